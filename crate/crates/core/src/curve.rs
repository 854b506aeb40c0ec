//! Discrete profile curves and their differential geometry.
//!
//! A profile curve is a sampled planar curve `(g1(t), g2(t))` in the right
//! half plane, `t_i = i/N`, whose rotation about the vertical axis generates a
//! surface of revolution. Endpoints are pinned to the axis (`g1 = 0`) and the
//! interior stays strictly positive. All derivatives use second-order finite
//! differences on the uniform parameter grid; integrals use trapezoid weights,
//! whose integrands vanish at the poles.
//!
//! Principal curvatures of the generated surface:
//! ```text
//! k1 = (g2'' g1' - g1'' g2') / |g'|^3        (meridional)
//! k2 = g2' / (g1 |g'|)                       (azimuthal)
//! ```
//! `k2` is 0/0 at the poles; smooth caps are umbilic there, so the pole nodes
//! carry `k2 := k1`.

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Rejection threshold for node speeds, relative to the arc length estimate.
pub const SPEED_FLOOR_FACTOR: f64 = 1e-10;
/// Minimal admissible total chord length.
pub const LENGTH_FLOOR: f64 = 1e-12;
/// Relative chord non-uniformity accepted after reparameterization.
pub const REPARAM_TOL: f64 = 1e-8;
/// Barrier value the optimizer clips interior `g1` against.
pub const AXIS_FLOOR: f64 = 1e-9;
/// Turning angle (radians) between consecutive chords flagged as a corner.
pub const CORNER_ANGLE: f64 = 0.5;

/// Sampled profile curve with axis-pinned endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl ProfileCurve {
    /// Builds a curve from node coordinates, checking the class invariants:
    /// `g1[0] = g1[N] = 0` exactly, interior `g1 > 0`, all values finite,
    /// at least 16 cells.
    pub fn new(g1: Vec<f64>, g2: Vec<f64>) -> Result<Self> {
        if g1.len() != g2.len() {
            return Err(Error::InvalidInput(format!(
                "coordinate arrays differ in length: {} vs {}",
                g1.len(),
                g2.len()
            )));
        }
        if g1.len() < 17 {
            return Err(Error::InvalidInput(format!(
                "need at least 17 nodes (N >= 16), got {}",
                g1.len()
            )));
        }
        if g1.iter().chain(g2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite node coordinate".into()));
        }
        let n = g1.len() - 1;
        if g1[0] != 0.0 || g1[n] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "poles must be pinned to the axis exactly: g1[0] = {:e}, g1[N] = {:e}",
                g1[0], g1[n]
            )));
        }
        if let Some(i) = (1..n).find(|&i| g1[i] <= 0.0) {
            return Err(Error::AxisViolation { node: i, value: g1[i] });
        }
        Ok(Self { g1, g2 })
    }

    /// Internal constructor for trusted intermediate states (optimizer
    /// iterates may carry clipped near-axis values).
    pub(crate) fn new_unchecked(g1: Vec<f64>, g2: Vec<f64>) -> Self {
        debug_assert_eq!(g1.len(), g2.len());
        Self { g1, g2 }
    }

    pub fn n_cells(&self) -> usize {
        self.g1.len() - 1
    }

    pub fn len(&self) -> usize {
        self.g1.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    pub fn g2(&self) -> &[f64] {
        &self.g2
    }

    /// Parameter grid spacing `1/N`.
    pub fn grid_h(&self) -> f64 {
        1.0 / self.n_cells() as f64
    }

    /// Parameter value of node `i`.
    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.n_cells() as f64
    }

    pub(crate) fn coords_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.g1, &mut self.g2)
    }

    /// Total chord length.
    pub fn chord_length(&self) -> f64 {
        let mut s = 0.0;
        for i in 1..self.g1.len() {
            s += ((self.g1[i] - self.g1[i - 1]).powi(2) + (self.g2[i] - self.g2[i - 1]).powi(2))
                .sqrt();
        }
        s
    }

    pub fn min_interior_g1(&self) -> f64 {
        let n = self.n_cells();
        self.g1[1..n].iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Open sampled curve (no axis pins); used for blow-up profiles.
#[derive(Debug, Clone)]
pub struct OpenCurve {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Parameter range `[t0, t1]` of the samples.
    pub t0: f64,
    pub t1: f64,
}

impl OpenCurve {
    pub fn grid_h(&self) -> f64 {
        (self.t1 - self.t0) / (self.g1.len() - 1) as f64
    }
}

/// Whether the endpoints sit on the axis (pole handling) or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CurveKind {
    Pinned,
    Open,
}

/// Per-node derivatives, curvatures and measure weights of a profile curve.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    /// First derivative per unit parameter, `(d1_1, d1_2)` per node.
    pub d1: Vec<[f64; 2]>,
    /// Second derivative per unit parameter.
    pub d2: Vec<[f64; 2]>,
    /// Node speeds `|g'|`.
    pub speed: Vec<f64>,
    /// Arc length estimate (summed chord length).
    pub l_est: f64,
    /// Meridional principal curvature.
    pub k1: Vec<f64>,
    /// Azimuthal principal curvature (pole nodes carry `k2 := k1`).
    pub k2: Vec<f64>,
    /// Mean curvature `k1 + k2`.
    pub h_mean: Vec<f64>,
    /// Gauss curvature `k1 * k2`.
    pub k_gauss: Vec<f64>,
    /// Quadrature weight of `d mu = 2 pi g1 |g'| dt` per node
    /// (trapezoid weight included).
    pub mu_weights: Vec<f64>,
    /// Parameter grid spacing.
    pub grid_h: f64,
}

impl GeometryCache {
    /// Trapezoid weight of node `i` on the parameter grid.
    pub fn trap_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.speed.len() - 1 {
            0.5 * self.grid_h
        } else {
            self.grid_h
        }
    }

    /// Outward-consistent unit normal `nu = (-g2', g1') / |g'|` at node `i`.
    pub fn normal(&self, i: usize) -> [f64; 2] {
        [-self.d1[i][1] / self.speed[i], self.d1[i][0] / self.speed[i]]
    }
}

/// Applies the second-order first-derivative stencil row for node `i` of an
/// `n+1`-node grid to the visitor; coefficients already carry `1/h`.
pub(crate) fn for_each_d1_coeff<F: FnMut(usize, f64)>(i: usize, n: usize, h: f64, mut f: F) {
    if i == 0 {
        f(0, -1.5 / h);
        f(1, 2.0 / h);
        f(2, -0.5 / h);
    } else if i == n {
        f(n, 1.5 / h);
        f(n - 1, -2.0 / h);
        f(n - 2, 0.5 / h);
    } else {
        f(i - 1, -0.5 / h);
        f(i + 1, 0.5 / h);
    }
}

/// Same for the second-derivative stencil (one-sided rows are exact on cubics).
pub(crate) fn for_each_d2_coeff<F: FnMut(usize, f64)>(i: usize, n: usize, h: f64, mut f: F) {
    let h2 = h * h;
    if i == 0 {
        f(0, 2.0 / h2);
        f(1, -5.0 / h2);
        f(2, 4.0 / h2);
        f(3, -1.0 / h2);
    } else if i == n {
        f(n, 2.0 / h2);
        f(n - 1, -5.0 / h2);
        f(n - 2, 4.0 / h2);
        f(n - 3, -1.0 / h2);
    } else {
        f(i - 1, 1.0 / h2);
        f(i, -2.0 / h2);
        f(i + 1, 1.0 / h2);
    }
}

fn stencil_apply(values1: &[f64], values2: &[f64], h: f64, second: bool) -> Vec<[f64; 2]> {
    let n = values1.len() - 1;
    let mut out = vec![[0.0; 2]; n + 1];
    for i in 0..=n {
        let mut acc = [0.0; 2];
        let visit = |j: usize, c: f64| {
            acc[0] += c * values1[j];
            acc[1] += c * values2[j];
        };
        if second {
            for_each_d2_coeff(i, n, h, visit);
        } else {
            for_each_d1_coeff(i, n, h, visit);
        }
        out[i] = acc;
    }
    out
}

fn compute_geometry(g1: &[f64], g2: &[f64], h: f64, kind: CurveKind) -> Result<GeometryCache> {
    let n = g1.len() - 1;
    let mut l_est = 0.0;
    for i in 1..=n {
        l_est += ((g1[i] - g1[i - 1]).powi(2) + (g2[i] - g2[i - 1]).powi(2)).sqrt();
    }

    // Open curves need g1 > 0 everywhere (k2 is evaluated at every node).
    let check_range = match kind {
        CurveKind::Pinned => 1..n,
        CurveKind::Open => 0..n + 1,
    };
    if let Some(i) = check_range.into_iter().find(|&i| g1[i] <= 0.0) {
        return Err(Error::AxisViolation { node: i, value: g1[i] });
    }

    let d1 = stencil_apply(g1, g2, h, false);
    let d2 = stencil_apply(g1, g2, h, true);

    let floor = SPEED_FLOOR_FACTOR * l_est.max(LENGTH_FLOOR);
    let mut speed = Vec::with_capacity(n + 1);
    for (i, d) in d1.iter().enumerate() {
        let s = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if s <= floor {
            return Err(Error::NonImmersed { node: i, speed: s, floor });
        }
        speed.push(s);
    }

    let mut k1 = Vec::with_capacity(n + 1);
    let mut k2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = speed[i];
        let cross = d2[i][1] * d1[i][0] - d2[i][0] * d1[i][1];
        let k1i = cross / (s * s * s);
        k1.push(k1i);
        let pole = kind == CurveKind::Pinned && (i == 0 || i == n);
        if pole {
            k2.push(k1i);
        } else {
            k2.push(d1[i][1] / (g1[i] * s));
        }
    }
    let h_mean: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| a + b).collect();
    let k_gauss: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| a * b).collect();

    let mut mu_weights = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 * h } else { h };
        mu_weights.push(2.0 * std::f64::consts::PI * w * g1[i] * speed[i]);
    }

    Ok(GeometryCache {
        d1,
        d2,
        speed,
        l_est,
        k1,
        k2,
        h_mean,
        k_gauss,
        mu_weights,
        grid_h: h,
    })
}

/// Differentiates a pinned profile curve: stencils, curvatures, measure weights.
pub fn differentiate(curve: &ProfileCurve) -> Result<GeometryCache> {
    compute_geometry(curve.g1(), curve.g2(), curve.grid_h(), CurveKind::Pinned)
}

/// Differentiates an open curve sample (all nodes must satisfy `g1 > 0`).
pub fn differentiate_open(curve: &OpenCurve) -> Result<GeometryCache> {
    compute_geometry(&curve.g1, &curve.g2, curve.grid_h(), CurveKind::Open)
}

/// Resamples the curve so consecutive chords are equal, preserving the trace
/// up to interpolation error and the endpoints exactly.
///
/// Cubic splines over cumulative chord length are resampled at uniform
/// positions; a few passes contract the chord non-uniformity below
/// [`REPARAM_TOL`].
pub fn reparametrize_arclength(curve: &ProfileCurve) -> Result<ProfileCurve> {
    let n = curve.n_cells();
    let mut g1 = curve.g1().to_vec();
    let mut g2 = curve.g2().to_vec();

    for _pass in 0..16 {
        let mut s = Vec::with_capacity(n + 1);
        s.push(0.0);
        for i in 1..=n {
            let c = ((g1[i] - g1[i - 1]).powi(2) + (g2[i] - g2[i - 1]).powi(2)).sqrt();
            if c <= 0.0 {
                return Err(Error::NonImmersed { node: i, speed: 0.0, floor: 0.0 });
            }
            s.push(s[i - 1] + c);
        }
        let total = s[n];
        if total < LENGTH_FLOOR {
            return Err(Error::DegenerateLength { length: total });
        }
        let mean = total / n as f64;
        let worst = (1..=n)
            .map(|i| ((s[i] - s[i - 1]) - mean).abs() / mean)
            .fold(0.0, f64::max);
        if worst <= REPARAM_TOL {
            break;
        }

        let sp1 = CubicSpline::fit(&s, &g1);
        let sp2 = CubicSpline::fit(&s, &g2);
        let mut new1 = Vec::with_capacity(n + 1);
        let mut new2 = Vec::with_capacity(n + 1);
        new1.push(g1[0]);
        new2.push(g2[0]);
        for j in 1..n {
            let q = total * j as f64 / n as f64;
            new1.push(sp1.eval(q));
            new2.push(sp2.eval(q));
        }
        new1.push(g1[n]);
        new2.push(g2[n]);
        g1 = new1;
        g2 = new2;
    }

    Ok(ProfileCurve::new_unchecked(g1, g2))
}

/// Admissibility diagnostics mirroring the profile-curve class membership.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    /// Endpoints sit on the axis exactly.
    pub boundary_pinned: bool,
    /// All interior nodes satisfy `g1 > 0`.
    pub interior_positive: bool,
    /// Interior nodes violating positivity.
    pub positivity_violations: Vec<usize>,
    /// Discrete curvature energy `int (k1^2 + k2^2) d mu`.
    pub curvature_energy: f64,
    pub curvature_energy_finite: bool,
    /// `g2` slope at the two poles (should vanish).
    pub end_slope_g2: [f64; 2],
    /// `g1` slope at the two poles (should be `+L` and `-L`).
    pub end_slope_g1: [f64; 2],
    pub l_est: f64,
    /// Nodes where consecutive chords turn by more than [`CORNER_ANGLE`].
    pub corner_nodes: Vec<usize>,
    /// Summary verdict (corner warnings do not affect it).
    pub admissible: bool,
}

/// Checks class membership and collects curvature diagnostics.
pub fn validate_admissible(curve: &ProfileCurve, geom: &GeometryCache) -> AdmissibilityReport {
    let n = curve.n_cells();
    let g1 = curve.g1();
    let g2 = curve.g2();

    let boundary_pinned = g1[0] == 0.0 && g1[n] == 0.0;
    let positivity_violations: Vec<usize> = (1..n).filter(|&i| g1[i] <= 0.0).collect();
    let interior_positive = positivity_violations.is_empty();

    let curvature_energy: f64 = (0..=n)
        .map(|i| (geom.k1[i] * geom.k1[i] + geom.k2[i] * geom.k2[i]) * geom.mu_weights[i])
        .sum();
    let curvature_energy_finite = curvature_energy.is_finite();

    let l = geom.l_est;
    let end_slope_g2 = [geom.d1[0][1], geom.d1[n][1]];
    let end_slope_g1 = [geom.d1[0][0], geom.d1[n][0]];

    let mut corner_nodes = Vec::new();
    for i in 1..n {
        let a = [g1[i] - g1[i - 1], g2[i] - g2[i - 1]];
        let b = [g1[i + 1] - g1[i], g2[i + 1] - g2[i]];
        let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        let cosang = ((a[0] * b[0] + a[1] * b[1]) / (na * nb)).clamp(-1.0, 1.0);
        if cosang.acos() > CORNER_ANGLE {
            corner_nodes.push(i);
        }
    }

    let slope_tol = 0.05 * l;
    let slopes_ok = end_slope_g2[0].abs() <= slope_tol
        && end_slope_g2[1].abs() <= slope_tol
        && (end_slope_g1[0] - l).abs() <= slope_tol
        && (end_slope_g1[1] + l).abs() <= slope_tol;

    AdmissibilityReport {
        boundary_pinned,
        interior_positive,
        positivity_violations,
        curvature_energy,
        curvature_energy_finite,
        end_slope_g2,
        end_slope_g1,
        l_est: l,
        corner_nodes,
        admissible: boundary_pinned && interior_positive && curvature_energy_finite && slopes_ok,
    }
}

/// Writes the node table as CSV (`t,gamma1,gamma2,k1,k2,H`, 17 significant digits).
pub fn curve_csv_string(curve: &ProfileCurve, geom: &GeometryCache) -> String {
    let mut out = String::from("t,gamma1,gamma2,k1,k2,H\n");
    for i in 0..curve.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            curve.t(i),
            curve.g1()[i],
            curve.g2()[i],
            geom.k1[i],
            geom.k2[i],
            geom.h_mean[i]
        ));
    }
    out
}

/// Parses a curve CSV produced by [`curve_csv_string`] (extra columns ignored).
pub fn curve_from_csv(text: &str) -> Result<ProfileCurve> {
    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
            continue;
        }
        let mut fields = line.split(',');
        let _t = fields.next();
        let a = fields
            .next()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad gamma1 on line {}", lineno + 1)))?;
        let b = fields
            .next()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad gamma2 on line {}", lineno + 1)))?;
        g1.push(a);
        g2.push(b);
    }
    ProfileCurve::new(g1, g2)
}
