//! Small interpolation kernels: not-a-knot cubic splines and monotone
//! (Fritsch-Carlson) cubic Hermite interpolation.
//!
//! Both operate on strictly increasing abscissae. The cubic spline is used for
//! arc-length resampling and neck rescaling; the monotone variant is used for
//! graph extraction near the poles where overshoot must be avoided.

/// Cubic spline through `(x, y)` with not-a-knot end conditions.
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives (moments) at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Fits the spline. Panics if `x` is not strictly increasing or has
    /// fewer than 3 points; callers validate their abscissae first.
    pub fn fit(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert_eq!(n, y.len());
        assert!(n >= 3, "cubic spline needs at least 3 knots");
        for i in 1..n {
            assert!(x[i] > x[i - 1], "spline abscissae must be strictly increasing");
        }

        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        if n == 3 {
            // Both not-a-knot conditions coincide; the interpolant is the
            // parabola through the three points.
            let mm = 2.0 * (d[1] - d[0]) / (h[0] + h[1]);
            return Self { x: x.to_vec(), y: y.to_vec(), m: vec![mm; 3] };
        }

        // Solve for interior moments M_1 .. M_{n-2}. Not-a-knot expresses the
        // boundary moments through the first/last two interior ones:
        //   M_0 = M_1 (1 + h0/h1) - M_2 h0/h1,
        //   M_{n-1} = M_{n-2} (1 + h_{n-2}/h_{n-3}) - M_{n-3} h_{n-2}/h_{n-3}.
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for (row, i) in (1..n - 1).enumerate() {
            sub[row] = h[i - 1] / 6.0;
            diag[row] = (h[i - 1] + h[i]) / 3.0;
            sup[row] = h[i] / 6.0;
            rhs[row] = d[i] - d[i - 1];
        }
        let r0 = h[0] / h[1];
        diag[0] += sub[0] * (1.0 + r0);
        sup[0] -= sub[0] * r0;
        sub[0] = 0.0;
        let rn = h[n - 2] / h[n - 3];
        diag[k - 1] += sup[k - 1] * (1.0 + rn);
        sub[k - 1] -= sup[k - 1] * rn;
        sup[k - 1] = 0.0;

        let interior = thomas(&sub, &diag, &sup, &rhs);
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&interior);
        m[0] = m[1] * (1.0 + r0) - m[2] * r0;
        m[n - 1] = m[n - 2] * (1.0 + rn) - m[n - 3] * rn;

        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn segment(&self, q: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= q) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Evaluates the spline at `q` (clamped extrapolation uses the end cubics).
    pub fn eval(&self, q: f64) -> f64 {
        let i = self.segment(q);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - q) / h;
        let b = (q - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Thomas algorithm for a tridiagonal system; `sub[0]` and `sup[k-1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let k = diag.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..k {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < k { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; k];
    x[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
///
/// Does not overshoot the data, which matters when interpolating the graph
/// function near a pole where the curve flattens.
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    pub fn fit(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert_eq!(n, y.len());
        assert!(n >= 2);
        for i in 1..n {
            assert!(x[i] > x[i - 1], "pchip abscissae must be strictly increasing");
        }
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = d[0];
            slope[1] = d[0];
        } else {
            for i in 1..n - 1 {
                if d[i - 1] * d[i] <= 0.0 {
                    slope[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            slope[0] = edge_slope(h[0], h[1], d[0], d[1]);
            slope[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Self { x: x.to_vec(), y: y.to_vec(), slope }
    }

    pub fn eval(&self, q: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= q) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (q - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// One-sided three-point slope estimate with the standard monotonicity clamps.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubics_exactly() {
        // Not-a-knot is exact on a single cubic.
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let f = |t: f64| 2.0 - t + 0.5 * t * t - 0.25 * t * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let sp = CubicSpline::fit(&x, &y);
        for k in 0..200 {
            let q = 1.9 * k as f64 / 199.0;
            assert!((sp.eval(q) - f(q)).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn spline_interpolates_knots() {
        let x = [0.0, 0.3, 0.55, 1.0, 1.4];
        let y = [1.0, -0.4, 0.2, 0.9, 0.3];
        let sp = CubicSpline::fit(&x, &y);
        for (xi, yi) in x.iter().zip(y.iter()) {
            assert!((sp.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn pchip_is_monotone_on_monotone_data() {
        let x = [0.0, 0.1, 0.25, 0.5, 1.0];
        let y = [0.0, 0.5, 0.6, 0.61, 2.0];
        let p = Pchip::fit(&x, &y);
        let mut prev = p.eval(0.0);
        for k in 1..=500 {
            let q = k as f64 / 500.0;
            let v = p.eval(q);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
