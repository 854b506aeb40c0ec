//! Experiment orchestration: neck detection, double-sphere comparison,
//! σ-sweeps with warm starts, diagnostics aggregation and file output.
//!
//! Small-σ minimizers pinch toward the axis inside `t ∈ [1/8, 7/8]`; the neck
//! report rescales that region by the neck radius and compares against the
//! catenoid waist `sqrt(1 + L*² t²)`. Sweeps run σ in decreasing order, each
//! solve warm-started from the previous minimizer (with a cold stomatocyte
//! seed competing below the branch-transition region), and write a summary
//! CSV, per-σ curve dumps and a versioned JSON manifest. All writes are
//! atomic (temp file + rename) and bit-deterministic for a fixed config.

use crate::curve::{curve_csv_string, differentiate, GeometryCache, ProfileCurve};
use crate::error::{Error, Result};
use crate::functionals::{
    area, el_residual, mu_norm_windowed, volume, willmore_energy, EL_POLE_SKIP,
};
use crate::graph::{extract_patch, fit_lambda, PatchSide};
use crate::optimizer::{minimize, MinimizerResult, SeedKind, SolveConfig};
use crate::reference::{catenoid_speed, double_sphere_radius};
use crate::spline::CubicSpline;
use serde::Serialize;
use std::path::{Path, PathBuf};

const PI: f64 = std::f64::consts::PI;

/// Half-width of the rescaled neck sample window.
pub const NECK_WINDOW_T: f64 = 2.0;
/// Points in the rescaled neck sample.
const NECK_SAMPLES: usize = 81;
/// Dense resampling used for Hausdorff distances.
const HAUSDORFF_SAMPLES: usize = 4096;

// ---------------------------------------------------------------------------
// Neck detection
// ---------------------------------------------------------------------------

/// Neck location, scale and catenoid-fit diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct NeckReport {
    /// Parameter of the minimal radius inside `[1/8, 7/8]`.
    pub tau_hat: f64,
    /// Minimal radius.
    pub eps_hat: f64,
    /// No second local minimum within 5% of the neck radius.
    pub uniqueness_flag: bool,
    /// The minimum sits on the window boundary (sphere-like regime).
    pub boundary_min: bool,
    /// Largest parameter half-width with `g1' < 0` left and `> 0` right.
    pub monotone_window_rho: f64,
    /// Rescaled sample abscissae.
    pub rescaled_t: Vec<f64>,
    /// `(γ(τ + ε t) - (0, γ₂(τ))) / ε` at the abscissae.
    pub rescaled_samples: Vec<[f64; 2]>,
    /// `max |Γ̂₁(t) - sqrt(1 + L*² t²)|` over the sample window.
    pub catenoid_fit_err: f64,
}

/// Locates the neck of a normalized minimizer.
pub fn detect_neck(curve: &ProfileCurve, geom: &GeometryCache) -> Result<NeckReport> {
    let n = curve.n_cells();
    let g1 = curve.g1();
    let i_lo = (n + 7) / 8;
    let i_hi = 7 * n / 8;
    if i_lo > i_hi {
        return Err(Error::WindowEmpty);
    }

    let mut arg = i_lo;
    for i in i_lo..=i_hi {
        if g1[i] < g1[arg] {
            arg = i;
        }
    }
    let eps_hat = g1[arg];
    let tau_hat = curve.t(arg);
    let boundary_min = arg == i_lo || arg == i_hi;

    // Other strict local minima close to the global level break uniqueness.
    let mut uniqueness_flag = true;
    for i in (i_lo.max(1))..=(i_hi.min(n - 1)) {
        if (i as i64 - arg as i64).abs() <= 3 {
            continue;
        }
        if g1[i] < g1[i - 1] && g1[i] < g1[i + 1] && g1[i] <= 1.05 * eps_hat {
            uniqueness_flag = false;
            break;
        }
    }

    // Monotone window: g1 decreasing left of the neck, increasing right.
    let mut rho_steps = 0usize;
    if !boundary_min {
        loop {
            let k = rho_steps + 1;
            if arg < k || arg + k > n {
                break;
            }
            let left_ok = geom.d1[arg - k][0] < 0.0;
            let right_ok = geom.d1[arg + k][0] > 0.0;
            if left_ok && right_ok {
                rho_steps = k;
            } else {
                break;
            }
        }
    }
    let monotone_window_rho = rho_steps as f64 * curve.grid_h();

    // Rescaled window, clamped to the parameter domain.
    let l_star = catenoid_speed();
    let t_max = if eps_hat > 0.0 {
        NECK_WINDOW_T.min((tau_hat.min(1.0 - tau_hat) - curve.grid_h()) / eps_hat)
    } else {
        0.0
    };
    let params: Vec<f64> = (0..=n).map(|i| curve.t(i)).collect();
    let sp1 = CubicSpline::fit(&params, g1);
    let sp2 = CubicSpline::fit(&params, curve.g2());
    let center_height = sp2.eval(tau_hat);

    let mut rescaled_t = Vec::with_capacity(NECK_SAMPLES);
    let mut rescaled_samples = Vec::with_capacity(NECK_SAMPLES);
    let mut catenoid_fit_err = 0.0_f64;
    if eps_hat > 0.0 && t_max > 0.0 {
        for j in 0..NECK_SAMPLES {
            let t = -t_max + 2.0 * t_max * j as f64 / (NECK_SAMPLES - 1) as f64;
            let p = tau_hat + eps_hat * t;
            let x = sp1.eval(p) / eps_hat;
            let y = (sp2.eval(p) - center_height) / eps_hat;
            rescaled_t.push(t);
            rescaled_samples.push([x, y]);
            let target = (1.0 + l_star * l_star * t * t).sqrt();
            catenoid_fit_err = catenoid_fit_err.max((x - target).abs());
        }
    }

    Ok(NeckReport {
        tau_hat,
        eps_hat,
        uniqueness_flag,
        boundary_min,
        monotone_window_rho,
        rescaled_t,
        rescaled_samples,
        catenoid_fit_err,
    })
}

// ---------------------------------------------------------------------------
// Double-sphere comparison
// ---------------------------------------------------------------------------

/// Hausdorff and Sobolev distances of a normalized curve to `κ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DoubleSphereDistance {
    pub hausdorff: f64,
    /// Discrete `W^{1,2}` distance at matched parameters.
    pub sobolev: f64,
}

fn dense_resample(curve: &ProfileCurve, m: usize) -> Vec<[f64; 2]> {
    let n = curve.n_cells();
    let params: Vec<f64> = (0..=n).map(|i| curve.t(i)).collect();
    let sp1 = CubicSpline::fit(&params, curve.g1());
    let sp2 = CubicSpline::fit(&params, curve.g2());
    (0..m)
        .map(|j| {
            let t = j as f64 / (m - 1) as f64;
            [sp1.eval(t), sp2.eval(t)]
        })
        .collect()
}

fn kappa_point(t: f64) -> [f64; 2] {
    let r = double_sphere_radius();
    [
        r * (2.0 * PI * t).sin().abs(),
        r - r * (2.0 * PI * t).cos(),
    ]
}

fn directed_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut worst = 0.0_f64;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            if d < best {
                best = d;
            }
        }
        worst = worst.max(best);
    }
    worst.sqrt()
}

/// Symmetric Hausdorff distance (dense point sets) and `W^{1,2}` distance of
/// a normalized curve to the double sphere.
pub fn compare_double_sphere(curve: &ProfileCurve) -> DoubleSphereDistance {
    let a = dense_resample(curve, HAUSDORFF_SAMPLES);
    let b: Vec<[f64; 2]> = (0..HAUSDORFF_SAMPLES)
        .map(|j| kappa_point(j as f64 / (HAUSDORFF_SAMPLES - 1) as f64))
        .collect();
    let hausdorff = directed_hausdorff(&a, &b).max(directed_hausdorff(&b, &a));

    // W^{1,2} at matched parameters; derivatives by central differences on
    // the dense resample.
    let m = HAUSDORFF_SAMPLES;
    let dt = 1.0 / (m - 1) as f64;
    let mut acc = 0.0;
    for j in 0..m {
        let t = j as f64 * dt;
        let k = kappa_point(t);
        let d0 = (a[j][0] - k[0]).powi(2) + (a[j][1] - k[1]).powi(2);
        let d1 = if j > 0 && j + 1 < m {
            let da = [
                (a[j + 1][0] - a[j - 1][0]) / (2.0 * dt),
                (a[j + 1][1] - a[j - 1][1]) / (2.0 * dt),
            ];
            let kp = kappa_point(t + dt);
            let km = kappa_point(t - dt);
            let dk = [(kp[0] - km[0]) / (2.0 * dt), (kp[1] - km[1]) / (2.0 * dt)];
            (da[0] - dk[0]).powi(2) + (da[1] - dk[1]).powi(2)
        } else {
            0.0
        };
        let w = if j == 0 || j == m - 1 { 0.5 * dt } else { dt };
        acc += w * (d0 + d1);
    }

    DoubleSphereDistance { hausdorff, sobolev: acc.sqrt() }
}

// ---------------------------------------------------------------------------
// Sweep records and diagnostics
// ---------------------------------------------------------------------------

/// Structural diagnostics evaluated on a converged minimizer.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Relative Gauss-Bonnet defect `|∫ k1 k2 dμ - 4π| / 4π`.
    pub gb_err: f64,
    /// `W - 4π` (nonnegative by Li-Yau up to discretization).
    pub liyau_margin: f64,
    /// Upper length bound ratio `L / ((sqrt(A)/2π)(||k1|| + ||k2||))`; must stay <= 1 + slack.
    pub length_upper_ratio: f64,
    /// Lower bound ratio `(A / 6π) / L²`; must stay <= 1 + slack.
    pub length_lower_ratio: f64,
    /// Least-squares multiplier of the Euler-Lagrange residual fit.
    pub el_lambda: f64,
    /// μ-weighted residual norm of the Euler-Lagrange equation.
    pub el_residual_l2: f64,
    /// Scale `||1/2 H (H² - 4K)||_μ` used to judge the residual.
    pub el_cubic_norm: f64,
}

/// One row of a σ-sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub sigma: f64,
    pub beta_hat: f64,
    /// Null-space multiplier from the optimizer.
    pub multiplier: f64,
    pub eps_hat: f64,
    pub tau_hat: f64,
    pub double_sphere_dist: f64,
    pub lambda_south: f64,
    pub lambda_north: f64,
    pub seed_kind: String,
    pub iterations: usize,
    pub projected_grad_norm: f64,
    pub diagnostics: Diagnostics,
    pub neck_unique: bool,
    pub catenoid_fit_err: f64,
}

/// Gauss-Bonnet, Li-Yau, length-bound and Euler-Lagrange diagnostics.
pub fn diagnostics_for(
    curve: &ProfileCurve,
    geom: &GeometryCache,
    sigma: f64,
) -> Result<Diagnostics> {
    let n = curve.n_cells();
    let gb: f64 = (0..=n).map(|i| geom.k_gauss[i] * geom.mu_weights[i]).sum();
    let gb_err = (gb - 4.0 * PI).abs() / (4.0 * PI);

    let w = willmore_energy(curve, geom);
    let liyau_margin = w - 4.0 * PI;

    let a = area(curve, geom);
    let k1n: f64 = (0..=n)
        .map(|i| geom.k1[i] * geom.k1[i] * geom.mu_weights[i])
        .sum::<f64>()
        .sqrt();
    let k2n: f64 = (0..=n)
        .map(|i| geom.k2[i] * geom.k2[i] * geom.mu_weights[i])
        .sum::<f64>()
        .sqrt();
    let l = geom.l_est;
    let length_upper_ratio = l / (a.sqrt() / (2.0 * PI) * (k1n + k2n));
    let length_lower_ratio = (a / (6.0 * PI)) / (l * l);

    let el = el_residual(curve, geom, sigma)?;
    let cubic: Vec<f64> = geom
        .h_mean
        .iter()
        .zip(&geom.k_gauss)
        .map(|(h, k)| 0.5 * h * (h * h - 4.0 * k))
        .collect();
    let el_cubic_norm = mu_norm_windowed(geom, &cubic, EL_POLE_SKIP);

    Ok(Diagnostics {
        gb_err,
        liyau_margin,
        length_upper_ratio,
        length_lower_ratio,
        el_lambda: el.lambda_hat,
        el_residual_l2: el.residual_l2,
        el_cubic_norm,
    })
}

/// Builds the full sweep record for a converged minimizer.
pub fn record_for(result: &MinimizerResult) -> Result<SweepRecord> {
    let curve = &result.curve;
    let geom = differentiate(curve)?;
    let diagnostics = diagnostics_for(curve, &geom, result.sigma)?;
    let neck = detect_neck(curve, &geom)?;
    let ds = compare_double_sphere(curve);

    // Window the residue fit by the cap curvature radius: wider windows let
    // higher cap Taylor terms leak into the singular basis column.
    let r_max = curve.g1().iter().cloned().fold(0.0, f64::max);
    let lambda_of = |side: PatchSide| -> f64 {
        let pole = match side {
            PatchSide::South => 0,
            PatchSide::North => curve.n_cells(),
        };
        let cap_radius = 1.0 / geom.k2[pole].abs().max(1e-6);
        let frac = (0.4 * cap_radius / r_max).clamp(0.05, 0.3);
        extract_patch(curve, &geom, side, frac)
            .and_then(|p| fit_lambda(&p))
            .map(|f| f.lambda_hat)
            .unwrap_or(f64::NAN)
    };

    Ok(SweepRecord {
        sigma: result.sigma,
        beta_hat: result.beta_hat,
        multiplier: result.multiplier,
        eps_hat: neck.eps_hat,
        tau_hat: neck.tau_hat,
        double_sphere_dist: ds.hausdorff,
        lambda_south: lambda_of(PatchSide::South),
        lambda_north: lambda_of(PatchSide::North),
        seed_kind: result.seed_label.to_string(),
        iterations: result.iterations,
        projected_grad_norm: result.projected_grad_norm,
        diagnostics,
        neck_unique: neck.uniqueness_flag,
        catenoid_fit_err: neck.catenoid_fit_err,
    })
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub sigma: f64,
    pub error: String,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    pub results: Vec<MinimizerResult>,
    pub summary_csv: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    rng_seed: u64,
    n_cells: usize,
    sigmas: Vec<f64>,
    records: &'a [SweepRecord],
    failures: &'a [SweepFailure],
    curve_files: Vec<String>,
}

/// Result JSON written per solve.
#[derive(Serialize)]
pub struct ResultJson<'a> {
    pub sigma: f64,
    pub n_cells: usize,
    pub beta_hat: f64,
    pub multiplier: f64,
    pub projected_grad_norm: f64,
    pub constraint_errors: ConstraintErrors,
    pub iterations: usize,
    pub seed_kind: &'a str,
    pub curve_csv_path: String,
}

#[derive(Serialize)]
pub struct ConstraintErrors {
    pub area: f64,
    pub volume: f64,
}

/// σ below which a cold stomatocyte seed competes with the warm start.
const BRANCH_COMPETITION_SIGMA: f64 = 0.65;

/// Runs warm-started solves over a strictly decreasing σ list, writing the
/// summary CSV, per-σ curve dumps and the manifest into `out_dir`.
/// Per-σ failures are recorded and the sweep continues.
pub fn run_sweep(configs: &[SolveConfig], out_dir: &Path) -> Result<SweepOutput> {
    if configs.is_empty() {
        return Err(Error::InvalidInput("empty sigma list".into()));
    }
    for pair in configs.windows(2) {
        if pair[1].sigma >= pair[0].sigma {
            return Err(Error::InvalidInput(
                "sigma list must be strictly decreasing".into(),
            ));
        }
    }
    std::fs::create_dir_all(out_dir)?;

    let mut records = Vec::new();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut curve_files = Vec::new();
    let mut warm: Option<ProfileCurve> = None;

    for config in configs {
        let mut candidates: Vec<SolveConfig> = Vec::new();
        if let Some(prev) = &warm {
            let mut c = config.clone();
            c.seed_kind = SeedKind::WarmStart(Box::new(prev.clone()));
            candidates.push(c);
        }
        if warm.is_none() || config.sigma < BRANCH_COMPETITION_SIGMA {
            candidates.push(config.clone());
        }

        let mut best: Option<MinimizerResult> = None;
        let mut last_err: Option<Error> = None;
        for cand in candidates {
            match minimize(&cand) {
                Ok(res) => {
                    let better = best
                        .as_ref()
                        .map(|b| res.beta_hat < b.beta_hat)
                        .unwrap_or(true);
                    if better {
                        best = Some(res);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }

        match best {
            Some(res) => {
                warm = Some(res.curve.clone());
                let geom = differentiate(&res.curve)?;
                let name = format!("curve_sigma_{:.4}.csv", res.sigma);
                atomic_write(&out_dir.join(&name), &curve_csv_string(&res.curve, &geom))?;
                let json = ResultJson {
                    sigma: res.sigma,
                    n_cells: config.n_cells,
                    beta_hat: res.beta_hat,
                    multiplier: res.multiplier,
                    projected_grad_norm: res.projected_grad_norm,
                    constraint_errors: ConstraintErrors {
                        area: res.constraint_errors[0],
                        volume: res.constraint_errors[1],
                    },
                    iterations: res.iterations,
                    seed_kind: res.seed_label,
                    curve_csv_path: name.clone(),
                };
                atomic_write(
                    &out_dir.join(format!("result_sigma_{:.4}.json", res.sigma)),
                    &(serde_json::to_string_pretty(&json).expect("result json") + "\n"),
                )?;
                curve_files.push(name);
                records.push(record_for(&res)?);
                results.push(res);
            }
            None => {
                failures.push(SweepFailure {
                    sigma: config.sigma,
                    error: last_err
                        .map(|e| e.to_string())
                        .unwrap_or_else(|| "no candidate seed".into()),
                });
            }
        }
    }

    let summary_csv = out_dir.join("summary.csv");
    atomic_write(&summary_csv, &summary_csv_string(&records))?;

    let manifest_path = out_dir.join("manifest.json");
    let manifest = Manifest {
        schema_version: 1,
        rng_seed: configs[0].rng_seed,
        n_cells: configs[0].n_cells,
        sigmas: configs.iter().map(|c| c.sigma).collect(),
        records: &records,
        failures: &failures,
        curve_files,
    };
    atomic_write(
        &manifest_path,
        &(serde_json::to_string_pretty(&manifest).expect("manifest json") + "\n"),
    )?;

    Ok(SweepOutput {
        records,
        failures,
        results,
        summary_csv,
        manifest: manifest_path,
    })
}

/// Summary CSV with the fixed column contract.
pub fn summary_csv_string(records: &[SweepRecord]) -> String {
    let mut out =
        String::from("sigma,beta_hat,multiplier,eps_hat,tau_hat,ds_dist,lambda_s,lambda_n,gb_err,liyau_margin\n");
    for r in records {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.sigma,
            r.beta_hat,
            r.multiplier,
            r.eps_hat,
            r.tau_hat,
            r.double_sphere_dist,
            r.lambda_south,
            r.lambda_north,
            r.diagnostics.gb_err,
            r.diagnostics.liyau_margin
        ));
    }
    out
}

/// Plain-text gnuplot script referencing the sweep CSVs.
pub fn plot_script() -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script for sweep outputs; run from the sweep directory.\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 'sigma'\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'beta_vs_sigma.png'\n");
    s.push_str("plot 'summary.csv' using 1:2 with linespoints title 'beta(sigma)', \\\n");
    s.push_str("     8*pi with lines dashtype 2 title '8 pi', \\\n");
    s.push_str("     4*pi with lines dashtype 2 title '4 pi'\n");
    s.push_str("set output 'neck_vs_sigma.png'\n");
    s.push_str("plot 'summary.csv' using 1:4 with linespoints title 'eps_hat(sigma)'\n");
    s.push_str("set output 'multiplier_vs_sigma.png'\n");
    s.push_str("plot 'summary.csv' using 1:3 with linespoints title 'multiplier(sigma)'\n");
    s
}

/// Human-readable diagnostics block for a stored curve.
pub fn diagnose_text(curve: &ProfileCurve, sigma_hint: Option<f64>) -> Result<String> {
    let geom = differentiate(curve)?;
    let a = area(curve, &geom);
    let v = volume(curve, &geom);
    let w = willmore_energy(curve, &geom);
    let iso = crate::functionals::isoperimetric_ratio(curve, &geom)?;
    let n = curve.n_cells();
    let gb: f64 = (0..=n).map(|i| geom.k_gauss[i] * geom.mu_weights[i]).sum();

    let mut out = String::new();
    out.push_str(&format!("nodes: {}\n", curve.len()));
    out.push_str(&format!("area: {a:.12e}\nvolume: {v:.12e}\n"));
    out.push_str(&format!("willmore: {w:.12e}\niso_ratio: {iso:.12e}\n"));
    out.push_str(&format!(
        "gauss_bonnet: {:.12e} (defect {:.3e} relative)\n",
        gb,
        (gb - 4.0 * PI).abs() / (4.0 * PI)
    ));
    out.push_str(&format!("liyau_margin: {:.12e}\n", w - 4.0 * PI));

    for side in [PatchSide::South, PatchSide::North] {
        match extract_patch(curve, &geom, side, 0.3).and_then(|p| fit_lambda(&p)) {
            Ok(fit) => out.push_str(&format!(
                "lambda_{}: {:.6e} (rms {:.3e})\n",
                side.label(),
                fit.lambda_hat,
                fit.fit_rms
            )),
            Err(e) => out.push_str(&format!("lambda_{}: unavailable ({e})\n", side.label())),
        }
    }

    let neck = detect_neck(curve, &geom)?;
    out.push_str(&format!(
        "neck: tau_hat = {:.6}, eps_hat = {:.6e}, unique = {}, boundary = {}, rho = {:.4}\n",
        neck.tau_hat, neck.eps_hat, neck.uniqueness_flag, neck.boundary_min, neck.monotone_window_rho
    ));
    out.push_str(&format!("catenoid_fit_err: {:.6e}\n", neck.catenoid_fit_err));

    if let Some(sigma) = sigma_hint {
        match el_residual(curve, &geom, sigma) {
            Ok(el) => out.push_str(&format!(
                "el_residual_l2: {:.6e} (lambda_hat {:.6e})\n",
                el.residual_l2, el.lambda_hat
            )),
            Err(e) => out.push_str(&format!("el_residual: unavailable ({e})\n")),
        }
    }
    let ds = compare_double_sphere(curve);
    out.push_str(&format!(
        "double_sphere_dist: hausdorff {:.6e}, w12 {:.6e}\n",
        ds.hausdorff, ds.sobolev
    ));
    Ok(out)
}

/// Writes `contents` to `path` atomically (temp file in the same directory,
/// then rename).
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
