//! Closed-form profile curves: initializers, oracles and comparison targets.
//!
//! * round sphere `γ(t) = R (sin πt, -cos πt)`
//! * double sphere `κ(t) = (0, R) + R (|sin 2πt|, -cos 2πt)`, `R = 1/sqrt(8π)`
//! * catenoid blow-up `Γ*(t) = (sqrt(1 + L*² t²), -asinh(L* t))`, `L* = sqrt(π/2)`
//! * inverted perturbed catenoid (the `W < 8π` construction)
//!
//! plus the seeded random smooth sphere-type curves the test suite fits
//! gradients and Gauss-Bonnet sums against.

use crate::curve::{differentiate, reparametrize_arclength, OpenCurve, ProfileCurve};
use crate::error::{Error, Result};
use crate::functionals::{isoperimetric_ratio, willmore_energy};
use rand::Rng;

const PI: f64 = std::f64::consts::PI;

/// Radius of the double-sphere limit, `1/sqrt(8π)`.
pub fn double_sphere_radius() -> f64 {
    1.0 / (8.0 * PI).sqrt()
}

/// Catenoid neck speed `L* = sqrt(π/2)`; also the arc length of `κ`.
pub fn catenoid_speed() -> f64 {
    (PI / 2.0).sqrt()
}

/// Arc-length-uniform semicircle profile of the radius-`r` sphere.
pub fn sphere_profile(r: f64, n: usize) -> ProfileCurve {
    assert!(r > 0.0 && n >= 16);
    let mut g1 = Vec::with_capacity(n + 1);
    let mut g2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        g1.push(r * (PI * t).sin());
        g2.push(-r * (PI * t).cos());
    }
    g1[0] = 0.0;
    g1[n] = 0.0;
    ProfileCurve::new_unchecked(g1, g2)
}

/// The double-sphere curve `κ` with unit area.
///
/// `κ` folds at `t = 1/2`; sampling that point puts a zero-velocity node on
/// the grid, so an even cell count is bumped to the next odd one and the fold
/// lands mid-cell.
pub fn double_sphere_profile(n: usize) -> ProfileCurve {
    assert!(n >= 16);
    let n = if n % 2 == 0 { n + 1 } else { n };
    let r = double_sphere_radius();
    let mut g1 = Vec::with_capacity(n + 1);
    let mut g2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        g1.push(r * (2.0 * PI * t).sin().abs());
        g2.push(r - r * (2.0 * PI * t).cos());
    }
    g1[0] = 0.0;
    g1[n] = 0.0;
    g2[0] = 0.0;
    g2[n] = 0.0;
    ProfileCurve::new_unchecked(g1, g2)
}

/// Open samples of the catenoid blow-up profile on `[t0, t1]`.
pub fn catenoid_blowup_profile(t_range: [f64; 2], n: usize) -> OpenCurve {
    assert!(t_range[1] > t_range[0] && n >= 16);
    let l = catenoid_speed();
    let mut g1 = Vec::with_capacity(n + 1);
    let mut g2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = t_range[0] + (t_range[1] - t_range[0]) * i as f64 / n as f64;
        g1.push((1.0 + l * l * t * t).sqrt());
        g2.push(-(l * t).asinh());
    }
    OpenCurve { g1, g2, t0: t_range[0], t1: t_range[1] }
}

/// Inverted perturbed catenoid seed together with its measured invariants.
#[derive(Debug, Clone)]
pub struct SchygullaSeed {
    pub curve: ProfileCurve,
    /// Measured Willmore energy (8π for ε = 0 up to discretization).
    pub willmore: f64,
    /// Measured isoperimetric ratio (decreases with the neck scale `a`).
    pub iso_ratio: f64,
    /// Neck scale actually used (differs from the request when a target
    /// ratio was prescribed).
    pub a_used: f64,
}

/// Support radius of the pole perturbation bump.
const BUMP_SUPPORT: f64 = 0.3;

/// Smooth compactly supported bump with `φ(0) = 1`.
fn bump(r: f64) -> f64 {
    let x = r / BUMP_SUPPORT;
    if x >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Builds the inverted-catenoid profile with neck scale `a` and pole
/// separation `eps`. If `sigma_target` is given, bisects `a` so the measured
/// isoperimetric ratio lands within 2% of it.
pub fn schygulla_seed(
    a: f64,
    eps: f64,
    sigma_target: Option<f64>,
    n: usize,
) -> Result<SchygullaSeed> {
    if !(a > 0.0 && a <= 0.2) {
        return Err(Error::InvalidInput(format!("neck scale a = {a} outside (0, 0.2]")));
    }
    if eps < 0.0 {
        return Err(Error::InvalidInput(format!("eps = {eps} must be nonnegative")));
    }

    let a_used = match sigma_target {
        None => a,
        Some(sig) => {
            if !(0.0 < sig && sig < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "sigma_target = {sig} outside (0, 1)"
                )));
            }
            // I(a) grows with a; bisect on a coarse build.
            let n_probe = n.min(1024);
            let mut lo = 0.004;
            let mut hi = 0.2;
            let ratio_at = |aa: f64| -> Result<f64> {
                Ok(build_inverted_catenoid(aa, eps, n_probe)?.iso_ratio)
            };
            if ratio_at(hi)? < sig {
                hi = 0.2; // best effort: the family tops out near I(0.2)
                lo = 0.2;
            }
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if lo == hi {
                    break;
                }
                let val = ratio_at(mid)?;
                if (val - sig).abs() <= 0.02 * sig {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if val < sig {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };

    build_inverted_catenoid(a_used, eps, n)
}

fn build_inverted_catenoid(a: f64, eps: f64, n: usize) -> Result<SchygullaSeed> {
    // Truncate the catenoid where the inverted tail is within ~1e-7 of the pole.
    let rho_target = 1e7_f64;
    let s_max = a * (2.0 * rho_target / a).ln();
    let fine = (6 * n).max(6144);

    let mut g1 = Vec::with_capacity(fine + 1);
    let mut g2 = Vec::with_capacity(fine + 1);
    for i in 0..=fine {
        let s = -s_max + 2.0 * s_max * i as f64 / fine as f64;
        let rho = a * (s / a).cosh();
        let q = rho * rho + (s - 1.0) * (s - 1.0);
        g1.push(rho / q);
        g2.push(1.0 + (s - 1.0) / q);
    }
    // Compactify: both ends close at the inversion center e3 = (0, 1).
    g1[0] = 0.0;
    g2[0] = 1.0;
    g1[fine] = 0.0;
    g2[fine] = 1.0;

    // Uniform-speed resample at the requested resolution; the inverted
    // parameterization piles nodes near the pole.
    let raw = ProfileCurve::new_unchecked(g1, g2);
    let raw = resample_to(&raw, n)?;
    let mut curve = reparametrize_arclength(&raw)?;

    if eps > 0.0 {
        apply_pole_perturbation(&mut curve, eps);
        curve = reparametrize_arclength(&curve)?;
    }

    if let Some((i, j)) = self_intersection(&curve) {
        return Err(Error::BuildFailed {
            reason: format!("inverted catenoid self-intersects (segments {i} and {j}) at a = {a}, eps = {eps}"),
        });
    }

    let geom = differentiate(&curve)?;
    let willmore = willmore_energy(&curve, &geom);
    let iso_ratio = isoperimetric_ratio(&curve, &geom)?;
    Ok(SchygullaSeed { curve, willmore, iso_ratio, a_used: a })
}

/// Displaces the two pole-adjacent arcs apart: the upper sheet moves up by
/// `eps φ(g1)`, the lower one down.
fn apply_pole_perturbation(curve: &mut ProfileCurve, eps: f64) {
    let n = curve.n_cells();

    // Extent of each end arc: walk inward while inside the bump support.
    let mut head_end = 0;
    while head_end < n && curve.g1()[head_end + 1] < BUMP_SUPPORT {
        head_end += 1;
    }
    let mut tail_start = n;
    while tail_start > 0 && curve.g1()[tail_start - 1] < BUMP_SUPPORT {
        tail_start -= 1;
    }

    // Which arc is the upper sheet: larger mean height close to the pole.
    let sample_height = |range: std::ops::Range<usize>| {
        let mut acc = 0.0;
        let mut cnt = 0.0_f64;
        for i in range {
            if curve.g1()[i] < 0.5 * BUMP_SUPPORT {
                acc += curve.g2()[i];
                cnt += 1.0;
            }
        }
        acc / cnt.max(1.0)
    };
    let head_is_upper = sample_height(0..head_end + 1) > sample_height(tail_start..n + 1);
    let (head_sign, tail_sign) = if head_is_upper { (1.0, -1.0) } else { (-1.0, 1.0) };

    let (g1, g2) = curve.coords_mut();
    for i in 0..=head_end {
        g2[i] += head_sign * eps * bump(g1[i]);
    }
    for i in tail_start..=n {
        g2[i] += tail_sign * eps * bump(g1[i]);
    }
}

/// Resamples a curve to `n` cells by chord-length splines (pins preserved).
fn resample_to(curve: &ProfileCurve, n: usize) -> Result<ProfileCurve> {
    use crate::spline::CubicSpline;
    let m = curve.n_cells();
    let g1 = curve.g1();
    let g2 = curve.g2();
    let mut s = Vec::with_capacity(m + 1);
    s.push(0.0);
    for i in 1..=m {
        let mut c = ((g1[i] - g1[i - 1]).powi(2) + (g2[i] - g2[i - 1]).powi(2)).sqrt();
        if c == 0.0 {
            // Collapsed duplicate (tail cluster); nudge to keep knots strictly increasing.
            c = 1e-15;
        }
        s.push(s[i - 1] + c);
    }
    if s[m] < crate::curve::LENGTH_FLOOR {
        return Err(Error::DegenerateLength { length: s[m] });
    }
    let sp1 = CubicSpline::fit(&s, g1);
    let sp2 = CubicSpline::fit(&s, g2);
    let mut new1 = Vec::with_capacity(n + 1);
    let mut new2 = Vec::with_capacity(n + 1);
    new1.push(g1[0]);
    new2.push(g2[0]);
    for j in 1..n {
        let q = s[m] * j as f64 / n as f64;
        new1.push(sp1.eval(q).max(crate::curve::AXIS_FLOOR));
        new2.push(sp2.eval(q));
    }
    new1.push(g1[m]);
    new2.push(g2[m]);
    Ok(ProfileCurve::new_unchecked(new1, new2))
}

/// Proper segment-segment crossing sweep. Pole-hugging segment pairs are
/// skipped: the construction legitimately closes onto the axis there.
fn self_intersection(curve: &ProfileCurve) -> Option<(usize, usize)> {
    let n = curve.n_cells();
    let g1 = curve.g1();
    let g2 = curve.g2();
    let mean_chord = curve.chord_length() / n as f64;
    let pole_band = 10.0 * mean_chord;

    let seg_max_g1 = |i: usize| g1[i].max(g1[i + 1]);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue; // the two end segments share the compactified pole
            }
            if seg_max_g1(i) < pole_band && seg_max_g1(j) < pole_band {
                continue;
            }
            // Cheap bounding-box reject.
            if g1[i].max(g1[i + 1]) < g1[j].min(g1[j + 1])
                || g1[j].max(g1[j + 1]) < g1[i].min(g1[i + 1])
                || g2[i].max(g2[i + 1]) < g2[j].min(g2[j + 1])
                || g2[j].max(g2[j + 1]) < g2[i].min(g2[i + 1])
            {
                continue;
            }
            if segments_cross(
                [g1[i], g2[i]],
                [g1[i + 1], g2[i + 1]],
                [g1[j], g2[j]],
                [g1[j + 1], g2[j + 1]],
            ) {
                return Some((i, j));
            }
        }
    }
    None
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let d1 = orient(q0, q1, p0);
    let d2 = orient(q0, q1, p1);
    let d3 = orient(p0, p1, q0);
    let d4 = orient(p0, p1, q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Seeded random smooth sphere-type curve: radial cosine perturbation of the
/// unit sphere, reparameterized to uniform speed. Pole slopes vanish by
/// construction, so the curves are admissible.
pub fn smooth_test_curve<R: Rng>(rng: &mut R, n: usize) -> ProfileCurve {
    let n_modes = 6;
    let amp = 0.12;
    let coeffs: Vec<f64> = (1..=n_modes)
        .map(|m| amp * rng.gen_range(-1.0..1.0) / (m * m) as f64)
        .collect();
    let mut g1 = Vec::with_capacity(n + 1);
    let mut g2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let th = PI * i as f64 / n as f64;
        let mut rho = 1.0;
        for (m, c) in coeffs.iter().enumerate() {
            rho += c * ((m + 1) as f64 * th).cos();
        }
        g1.push(rho * th.sin());
        g2.push(-rho * th.cos());
    }
    g1[0] = 0.0;
    g1[n] = 0.0;
    let curve = ProfileCurve::new_unchecked(g1, g2);
    reparametrize_arclength(&curve).expect("smooth test curve reparameterization")
}

/// Seeded random smooth variation direction vanishing at the poles.
pub fn smooth_test_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<[f64; 2]> {
    let n_modes = 5;
    let c1: Vec<f64> = (1..=n_modes)
        .map(|m| rng.gen_range(-1.0..1.0) / m as f64)
        .collect();
    let c2: Vec<f64> = (1..=n_modes)
        .map(|m| rng.gen_range(-1.0..1.0) / m as f64)
        .collect();
    let mut dir = Vec::with_capacity(n + 1);
    let mut max_norm = 0.0_f64;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let mut d = [0.0, 0.0];
        for m in 1..=n_modes {
            let s = (m as f64 * PI * t).sin();
            d[0] += c1[m - 1] * s;
            d[1] += c2[m - 1] * s;
        }
        max_norm = max_norm.max((d[0] * d[0] + d[1] * d[1]).sqrt());
        dir.push(d);
    }
    for d in &mut dir {
        d[0] /= max_norm;
        d[1] /= max_norm;
    }
    dir
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{differentiate, differentiate_open, validate_admissible};
    use crate::functionals::{area, volume};
    use std::f64::consts::PI;

    #[test]
    fn sphere_profile_oracle_values() {
        let curve = sphere_profile(1.0, 512);
        let geom = differentiate(&curve).unwrap();
        let w = willmore_energy(&curve, &geom);
        let i = isoperimetric_ratio(&curve, &geom).unwrap();
        assert!((w - 4.0 * PI).abs() / (4.0 * PI) < 1e-5);
        assert!((i - 1.0).abs() < 1e-5);
    }

    #[test]
    fn sphere_pole_slope_vanishes() {
        let curve = sphere_profile(1.0, 2048);
        let geom = differentiate(&curve).unwrap();
        assert!(geom.d1[0][1].abs() < 1e-8, "g2'(0) = {:e}", geom.d1[0][1]);
        assert!(geom.d1[2048][1].abs() < 1e-8);
    }

    #[test]
    fn sphere_scaling_laws() {
        for &r in &[0.5, 1.0, 2.0] {
            let curve = sphere_profile(r, 512);
            let geom = differentiate(&curve).unwrap();
            let a = area(&curve, &geom);
            let v = volume(&curve, &geom);
            let i = isoperimetric_ratio(&curve, &geom).unwrap();
            assert!((a - 4.0 * PI * r * r).abs() / a < 1e-5);
            assert!((v - 4.0 * PI * r * r * r / 3.0).abs() / v < 1e-5);
            assert!((i - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn double_sphere_measurements() {
        let curve = double_sphere_profile(1024);
        let geom = differentiate(&curve).unwrap();
        assert!((area(&curve, &geom) - 1.0).abs() < 1e-3);
        assert!(volume(&curve, &geom) < 1e-3);

        // Membership in the normalized class: mean height is +R.
        let n = curve.n_cells();
        let h = curve.grid_h();
        let mut integral = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 * h } else { h };
            integral += w * curve.g2()[i];
        }
        let r = double_sphere_radius();
        assert!((integral - r).abs() < 1e-4, "mean height {integral}");
        assert!(integral > 0.0);
    }

    #[test]
    fn catenoid_blowup_construction() {
        let l = catenoid_speed();
        let curve = catenoid_blowup_profile([-2.0, 2.0], 1024);
        // Node at t = 0 is the waist.
        assert!((curve.g1[512] - 1.0).abs() < 1e-14);
        // Analytic velocity at the samples has speed exactly L*.
        for i in 0..=1024 {
            let t = -2.0 + 4.0 * i as f64 / 1024.0;
            let v1 = l * l * t / curve.g1[i];
            let v2 = -l / curve.g1[i];
            assert!((v1 * v1 + v2 * v2 - l * l).abs() < 1e-10);
        }
        // Discrete slope at the waist matches (0, -L*).
        let geom = differentiate_open(&curve).unwrap();
        assert!(geom.d1[512][0].abs() < 1e-12);
        assert!((geom.d1[512][1] + l).abs() < 1e-4);
    }

    #[test]
    fn schygulla_energy_is_eight_pi() {
        let seed = schygulla_seed(0.05, 0.0, None, 2048).unwrap();
        assert!(
            (seed.willmore - 8.0 * PI).abs() / (8.0 * PI) < 0.02,
            "W = {} vs 8 pi = {}",
            seed.willmore,
            8.0 * PI
        );
    }

    #[test]
    fn schygulla_ratio_decreases_with_neck_scale() {
        let i1 = schygulla_seed(0.1, 0.0, None, 2048).unwrap().iso_ratio;
        let i2 = schygulla_seed(0.05, 0.0, None, 2048).unwrap().iso_ratio;
        let i3 = schygulla_seed(0.02, 0.0, None, 2048).unwrap().iso_ratio;
        assert!(i1 > i2 && i2 > i3, "I sequence {i1}, {i2}, {i3}");
        assert!(i3 < 0.2, "I should head toward 0, got {i3}");
    }

    #[test]
    fn schygulla_perturbation_strictly_decreases_energy() {
        // The first-order decrease is -c0 eps with a small c0; quadratic
        // growth takes over near eps ~ 2e-3, so probe inside the linear range.
        let base = schygulla_seed(0.05, 0.0, None, 2048).unwrap();
        let pert1 = schygulla_seed(0.05, 5e-4, None, 2048).unwrap();
        let pert2 = schygulla_seed(0.05, 1e-3, None, 2048).unwrap();
        assert!(
            pert2.willmore < pert1.willmore && pert1.willmore < base.willmore,
            "expected strict decrease: {} -> {} -> {}",
            base.willmore,
            pert1.willmore,
            pert2.willmore
        );
        assert!(pert2.willmore < 8.0 * PI);
    }

    #[test]
    fn generated_curves_are_admissible() {
        let checks: Vec<(ProfileCurve, bool)> = vec![
            (sphere_profile(1.0, 256), false),
            (double_sphere_profile(512), true),
            (schygulla_seed(0.05, 0.0, None, 1024).unwrap().curve, false),
        ];
        for (curve, corner_allowed) in checks {
            let geom = differentiate(&curve).unwrap();
            let report = validate_admissible(&curve, &geom);
            assert!(report.boundary_pinned);
            assert!(report.interior_positive);
            assert!(report.curvature_energy_finite);
            if !corner_allowed {
                assert!(report.corner_nodes.is_empty(), "unexpected corners");
            }
        }
    }

    #[test]
    fn smooth_corpus_is_admissible() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let curve = smooth_test_curve(&mut rng, 256);
            let geom = differentiate(&curve).unwrap();
            let report = validate_admissible(&curve, &geom);
            assert!(report.admissible);
        }
    }
}
