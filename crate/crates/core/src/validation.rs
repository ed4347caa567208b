//! Executable acceptance checks with a machine-readable report.
//!
//! Each check reproduces one reference behavior of the model (closed-form
//! agreement, saturation limits, reported population values, symmetry,
//! oracle agreement, sweep determinism). Every bound lives in
//! [`tolerances`].

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytics::{
    analytic_defect_populations, analytic_pm, analytic_xi_max, predict_riel_minima, SATURATED_DEFECT_POPULATION,
    SATURATED_NEIGHBOR_POPULATION,
};
use crate::dynamics::{integrate, IntegrationOptions};
use crate::error::{Error, Result};
use crate::metrics::compute_riel_with_sets;
use crate::model::{
    build_coupling_matrix, build_drive_vector, build_geometry, make_asymmetric_scheme, make_central_defect_scheme,
    make_defect_scheme, make_uniform_scheme, ArrayGeometry, CouplingMatrix, CouplingParams, DriveScheme,
};
use crate::solver::{normalized_populations, solve_configuration, solve_steady_state};
use crate::sweep::{run_sweep, write_sweep_csv, Axis, FixedParams, OutputField, SchemeFamily, SweepParam, SweepSpec};

/// Acceptance bounds, one entry per quantity.
pub mod tolerances {
    /// Closed-form vs numeric normalized populations, elementwise.
    pub const ANALYTIC_VS_NUMERIC: f64 = 1e-8;
    /// `|P_m - 2/3|` and `|P_{m+-1} - 1/6|` at `xi = 1e-4`.
    pub const SATURATION: f64 = 1e-3;
    pub const SATURATION_XI: f64 = 1e-4;
    /// N = 5 overshoot values.
    pub const OVERSHOOT: f64 = 5e-3;
    /// Brute-force maximizer vs closed-form `xi_max`.
    pub const XI_MAX: f64 = 1e-6;
    /// Defect-scheme peak population.
    pub const DEFECT_PEAK: f64 = 0.01;
    /// Diagonal angle grid step, in units of pi.
    pub const DEFECT_GRID_STEP_PI: f64 = 0.005;
    /// Allowed offset of the grid maximizer from `0.86 pi`, in units of pi:
    /// two-decimal reporting precision (0.005) plus half a grid step.
    pub const DEFECT_PEAK_ANGLE_PI: f64 = 0.0075;
    /// Interface population of the two-zone scheme.
    pub const ASYM_INTERFACE: f64 = 5e-3;
    /// Bi-edge state: edge and interior populations.
    pub const BI_EDGE_EDGE: f64 = 5e-3;
    pub const BI_EDGE_INTERIOR: f64 = 1e-3;
    /// Distance in `cos theta` between a predicted and an observed RIEL minimum.
    pub const RIEL_MINIMA: f64 = 0.02;
    /// Time-integrated vs linear-solve populations.
    pub const ODE_VS_LU: f64 = 1e-6;
    /// Mirror symmetries of populations.
    pub const MIRROR: f64 = 1e-10;
    /// Drive-scale and global-phase invariance of populations.
    pub const INVARIANCE: f64 = 1e-12;
    /// Share held by the four sites around two adjacent defects.
    pub const MULTI_DEFECT_SHARE: f64 = 0.9;
    /// Wall-clock bound for the 200 x 200 sweep, seconds.
    pub const SWEEP_SECONDS: f64 = 120.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub criterion: u32,
    pub description: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub runtime_s: f64,
}

struct Outcome {
    expected: String,
    observed: String,
    tolerance: f64,
    pass: bool,
}

pub struct Check {
    pub id: &'static str,
    pub criterion: u32,
    pub description: &'static str,
    run: fn() -> Result<Outcome>,
}

/// All registered checks, ordered by criterion.
pub fn registry() -> Vec<Check> {
    vec![
        Check { id: "analytic-vs-numeric", criterion: 1, description: "closed-form defect amplitudes agree with the linear solve", run: check_analytic_vs_numeric },
        Check { id: "sat-2-3", criterion: 2, description: "defect population saturates to 2/3 (neighbors 1/6) as xi -> 0", run: check_saturation },
        Check { id: "overshoot-n5", criterion: 3, description: "N = 5 defect population overshoots 2/3", run: check_overshoot },
        Check { id: "xi-max-formula", criterion: 4, description: "brute-force maximizer of P_m matches the closed-form xi_max", run: check_xi_max },
        Check { id: "defect-peak-086", criterion: 5, description: "defect scheme peak P_m ~ 0.67 near theta = 0.86 pi", run: check_defect_peak },
        Check { id: "asym-interface", criterion: 6, description: "two-zone interfaced localization populations", run: check_asym_interface },
        Check { id: "bi-edge", criterion: 7, description: "uniform normal incidence bi-edge reference state", run: check_bi_edge },
        Check { id: "riel-minima", criterion: 8, description: "diagonal RIEL minima sit at the predicted cos theta values", run: check_riel_minima },
        Check { id: "excluded-points", criterion: 9, description: "reciprocal excluded points are reported singular", run: check_excluded_points },
        Check { id: "ode-vs-lu-N8", criterion: 10, description: "time integration converges to the linear-solve populations", run: check_ode_vs_lu },
        Check { id: "symmetry", criterion: 11, description: "mirror, drive-scale and global-phase symmetries", run: check_symmetry },
        Check { id: "gamma-ng-robust", criterion: 12, description: "defect localization survives gamma_ng = 0.5 gamma", run: check_gamma_ng },
        Check { id: "multi-defect", criterion: 13, description: "multi-defect localization dominance structure", run: check_multi_defect },
        Check { id: "sweep-determinism", criterion: 14, description: "200 x 200 sweep is fast and bit-reproducible", run: check_sweep_determinism },
    ]
}

/// Runs every check whose id contains `filter` (all when `None`).
pub fn run_all(filter: Option<&str>) -> Vec<CheckReport> {
    let mut reports: Vec<CheckReport> = registry()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.id.contains(f)))
        .map(|c| {
            let start = Instant::now();
            let outcome = (c.run)();
            let runtime_s = start.elapsed().as_secs_f64();
            let (expected, observed, tolerance, pass) = match outcome {
                Ok(o) => (o.expected, o.observed, o.tolerance, o.pass),
                Err(e) => ("check completes".into(), format!("error: {e}"), f64::NAN, false),
            };
            CheckReport {
                id: c.id.to_string(),
                criterion: c.criterion,
                description: c.description.to_string(),
                expected,
                observed,
                tolerance,
                status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
                runtime_s,
            }
        })
        .collect();
    reports.sort_by_key(|r| r.criterion);
    reports
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.status == CheckStatus::Pass)
}

pub fn write_report_json<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, reports).map_err(|e| Error::Io(e.to_string()))
}

/// One line per check.
pub fn summary_line(r: &CheckReport) -> String {
    let tag = match r.status {
        CheckStatus::Pass => "PASS",
        CheckStatus::Fail => "FAIL",
    };
    format!(
        "[{tag}] #{:<2} {:<20} expected {} | observed {} ({:.2}s)",
        r.criterion, r.id, r.expected, r.observed, r.runtime_s
    )
}

fn reciprocal(n: usize, gamma_ng: f64) -> Result<CouplingParams<f64>> {
    CouplingParams::resonant(n, 0.0, gamma_ng)
}

fn populations(geom: &ArrayGeometry<f64>, cpl: &CouplingParams<f64>, scheme: &DriveScheme<f64>) -> Result<Vec<f64>> {
    Ok(solve_configuration(geom, cpl, scheme)?.populations)
}

fn defect_populations(n: usize, xi: f64, theta: f64, gamma_ng: f64) -> Result<Vec<f64>> {
    let g = build_geometry(n, xi)?;
    let s = make_central_defect_scheme(&g, theta, theta, 0.01)?;
    populations(&g, &reciprocal(n, gamma_ng)?, &s)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
        .0
}

/// Grid scan over `(lo, hi)` followed by golden-section refinement.
fn maximize(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, grid: usize) -> Result<f64> {
    let h = (hi - lo) / grid as f64;
    let mut best = (lo + 0.5 * h, f64::NEG_INFINITY);
    for k in 0..grid {
        let x = lo + (k as f64 + 0.5) * h;
        let y = f(x)?;
        if y > best.1 {
            best = (x, y);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo + 1e-12), (best.0 + h).min(hi - 1e-12));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

fn check_analytic_vs_numeric() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [5, 7, 9, 51] {
        for xi in [0.05 * PI, 0.1 * PI, 0.3 * PI, 0.7 * PI] {
            let numeric = defect_populations(n, xi, PI / 2.0, 0.0)?;
            let exact = analytic_defect_populations(n, xi)?;
            worst = worst.max(max_abs_diff(&numeric, &exact));
        }
    }
    let tol = tolerances::ANALYTIC_VS_NUMERIC;
    Ok(Outcome {
        expected: format!("max |dP| <= {tol:e}"),
        observed: format!("max |dP| = {worst:.3e}"),
        tolerance: tol,
        pass: worst <= tol,
    })
}

fn check_saturation() -> Result<Outcome> {
    let xi = tolerances::SATURATION_XI;
    let tol = tolerances::SATURATION;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [10usize, 100, 1000] {
        let m = n.div_ceil(2);
        let analytic = analytic_pm(n, xi)?;
        let p = defect_populations(n, xi, PI / 2.0, 0.0)?;
        let dev = [
            (analytic - SATURATED_DEFECT_POPULATION).abs(),
            (p[m - 1] - SATURATED_DEFECT_POPULATION).abs(),
            (p[m - 2] - SATURATED_NEIGHBOR_POPULATION).abs(),
            (p[m] - SATURATED_NEIGHBOR_POPULATION).abs(),
        ];
        worst = dev.iter().copied().fold(worst, f64::max);
        parts.push(format!("N={n}: P_m={:.6} P_m-1={:.6}", p[m - 1], p[m - 2]));
    }
    Ok(Outcome {
        expected: format!("P_m = 2/3, P_m+-1 = 1/6 within {tol:e}"),
        observed: format!("{}; max dev {worst:.2e}", parts.join(", ")),
        tolerance: tol,
        pass: worst < tol,
    })
}

fn check_overshoot() -> Result<Outcome> {
    let n = 5;
    let pm = |xi: f64| -> Result<f64> { Ok(defect_populations(n, xi, PI / 2.0, 0.0)?[2]) };
    let xi_star = maximize(pm, 1e-3, PI - 1e-3, 4000)?;
    let p = defect_populations(n, xi_star, PI / 2.0, 0.0)?;
    let tol = tolerances::OVERSHOOT;
    let pass = (p[2] - 0.723).abs() <= tol
        && (p[0] - 0.092).abs() <= tol
        && (p[4] - 0.092).abs() <= tol
        && (p[1] - 0.044).abs() <= tol
        && (p[3] - 0.044).abs() <= tol;
    Ok(Outcome {
        expected: format!("P_m = 0.723, P_1,N = 0.092, P_m+-1 = 0.044 (+-{tol})"),
        observed: format!(
            "xi* = {xi_star:.6}: P_m = {:.5}, P_1 = {:.5}, P_m-1 = {:.5}",
            p[2], p[0], p[1]
        ),
        tolerance: tol,
        pass,
    })
}

fn check_xi_max() -> Result<Outcome> {
    let tol = tolerances::XI_MAX;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [5, 20, 100] {
        let brute = maximize(|xi| analytic_pm(n, xi), 1e-6, PI - 1e-6, 20_000)?;
        let formula: f64 = analytic_xi_max(n, 0)?;
        worst = worst.max((brute - formula).abs());
        parts.push(format!("N={n}: {brute:.8} vs {formula:.8}"));
    }
    Ok(Outcome {
        expected: format!("|xi_brute - xi_max| <= {tol:e}"),
        observed: format!("{}; max gap {worst:.2e}", parts.join(", ")),
        tolerance: tol,
        pass: worst <= tol,
    })
}

fn check_defect_peak() -> Result<Outcome> {
    let n = 100;
    let xi = 0.1 * PI;
    let g = build_geometry(n, xi)?;
    let matrix = build_coupling_matrix(&g, &reciprocal(n, 0.0)?)?;
    let m = g.center();
    let solve_at = |theta: f64| -> Result<Vec<f64>> {
        let s = make_central_defect_scheme(&g, theta, theta, 0.01)?;
        Ok(solve_steady_state(&matrix, &build_drive_vector(&g, &s)?)?.populations)
    };
    let at_ref = solve_at(0.86 * PI)?;
    let step = tolerances::DEFECT_GRID_STEP_PI;
    let steps = (1.0 / step).round() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 1..steps {
        let theta = k as f64 * step * PI;
        let p = solve_at(theta)?[m - 1];
        if p > best.1 {
            best = (theta, p);
        }
    }
    let at_best = solve_at(best.0)?;
    let tol = tolerances::DEFECT_PEAK;
    let angle_gap = (best.0 / PI - 0.86).abs();
    let pass = (at_ref[m - 1] - 0.67).abs() <= tol
        && (best.1 - 0.67).abs() <= tol
        && angle_gap <= tolerances::DEFECT_PEAK_ANGLE_PI
        && argmax(&at_ref) == m - 1
        && argmax(&at_best) == m - 1;
    Ok(Outcome {
        expected: format!(
            "P_m(0.86 pi) = 0.67 +- {tol}; grid argmax within {} pi of 0.86 pi; site m dominant",
            tolerances::DEFECT_PEAK_ANGLE_PI
        ),
        observed: format!(
            "P_m(0.86 pi) = {:.5}; grid max {:.5} at {:.3} pi; argmax site {}",
            at_ref[m - 1],
            best.1,
            best.0 / PI,
            argmax(&at_ref) + 1
        ),
        tolerance: tol,
        pass,
    })
}

fn check_asym_interface() -> Result<Outcome> {
    let n = 100;
    let g = build_geometry(n, 0.1 * PI)?;
    let cpl = reciprocal(n, 0.0)?;
    let m = g.center();
    let tol = tolerances::ASYM_INTERFACE;
    let mut pass = true;
    let mut parts = Vec::new();
    for (t1, t2, want) in [(0.9, 0.1, 0.998), (0.75, 0.25, 0.968)] {
        let s = make_asymmetric_scheme(&g, t1 * PI, t2 * PI, 0.01)?;
        let p = populations(&g, &cpl, &s)?;
        let iface = p[m - 1] + p[m];
        pass &= (iface - want).abs() <= tol;
        parts.push(format!("({t1}pi, {t2}pi): {iface:.5}"));
    }
    Ok(Outcome {
        expected: format!("0.998 and 0.968 (+-{tol})"),
        observed: parts.join(", "),
        tolerance: tol,
        pass,
    })
}

fn check_bi_edge() -> Result<Outcome> {
    let n = 50;
    let g = build_geometry(n, 0.05 * PI)?;
    let s = make_uniform_scheme(&g, PI / 2.0, 0.01)?;
    let p = populations(&g, &reciprocal(n, 0.0)?, &s)?;
    let interior = &p[1..n - 1];
    let worst_interior = interior.iter().map(|x| (x - 0.0078).abs()).fold(0.0, f64::max);
    let pass = (p[0] - 0.314).abs() <= tolerances::BI_EDGE_EDGE
        && (p[n - 1] - 0.314).abs() <= tolerances::BI_EDGE_EDGE
        && worst_interior <= tolerances::BI_EDGE_INTERIOR;
    Ok(Outcome {
        expected: format!(
            "P_1 = P_N = 0.314 +- {}, interior 0.0078 +- {}",
            tolerances::BI_EDGE_EDGE,
            tolerances::BI_EDGE_INTERIOR
        ),
        observed: format!(
            "P_1 = {:.5}, P_N = {:.5}, interior max dev {worst_interior:.2e}",
            p[0],
            p[n - 1]
        ),
        tolerance: tolerances::BI_EDGE_EDGE,
        pass,
    })
}

fn check_riel_minima() -> Result<Outcome> {
    let n = 100;
    let xi = 0.1 * PI;
    let g = build_geometry(n, xi)?;
    let matrix = build_coupling_matrix(&g, &reciprocal(n, 0.0)?)?;
    let m = g.center();
    let points = 201;
    let cs: Vec<f64> = (0..points).map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64).collect();
    let mut riel = Vec::with_capacity(points);
    for &c in &cs {
        let s = make_asymmetric_scheme(&g, c.clamp(-1.0, 1.0).acos(), (-c).clamp(-1.0, 1.0).acos(), 0.01)?;
        let st = solve_steady_state(&matrix, &build_drive_vector(&g, &s)?)?;
        riel.push(compute_riel_with_sets(&st.populations, &[m, m + 1], &[1, n])?);
    }
    let minima: Vec<f64> = (1..points - 1)
        .filter(|&k| riel[k] < riel[k - 1] && riel[k] < riel[k + 1])
        .map(|k| cs[k])
        .collect();
    // Predictions are differences cos t1 - cos t2 = 2 cos t1 on the diagonal.
    let predicted: Vec<f64> = predict_riel_minima(n, xi)?.into_iter().map(|d| d / 2.0).collect();
    let tol = tolerances::RIEL_MINIMA;
    let gaps: Vec<f64> = predicted
        .iter()
        .map(|p| minima.iter().map(|o| (o - p).abs()).fold(f64::INFINITY, f64::min))
        .collect();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        expected: format!("a local minimum within {tol} of each of {predicted:.2?}"),
        observed: format!("minima at {minima:.2?}; worst gap {worst:.3}"),
        tolerance: tol,
        pass: predicted.len() == 9 && worst <= tol,
    })
}

fn check_excluded_points() -> Result<Outcome> {
    let mut observed = Vec::new();
    let mut pass = true;
    for n in [2, 50] {
        for xi in [1e-14, PI] {
            let g = build_geometry(n, xi)?;
            let s = make_uniform_scheme(&g, PI / 2.0, 0.01)?;
            let r = solve_configuration(&g, &reciprocal(n, 0.0)?, &s);
            let singular = matches!(r, Err(Error::SingularSystem { .. }));
            pass &= singular;
            observed.push(format!(
                "N={n} xi={xi:.3e}: {}",
                match r {
                    Err(Error::SingularSystem { condition }) => format!("singular (cond {condition:.1e})"),
                    Err(e) => format!("other error {e}"),
                    Ok(_) => "solved".into(),
                }
            ));
        }
    }
    Ok(Outcome {
        expected: "SingularSystem for all four".into(),
        observed: observed.join("; "),
        tolerance: f64::NAN,
        pass,
    })
}

/// Random configuration for the integration oracle. `gamma_ng >= 0.2`
/// bounds every decay rate below by 0.1 gamma, so transients are below
/// `e^{-20}` at `t = 200 / gamma`.
pub fn random_configuration(
    rng: &mut impl Rng,
) -> Result<(ArrayGeometry<f64>, CouplingParams<f64>, DriveScheme<f64>)> {
    let n = rng.gen_range(1..=8usize);
    let d: f64 = rng.gen_range(-1.0..=1.0);
    let xi = loop {
        let x: f64 = rng.gen_range(0.1 * PI..=1.9 * PI);
        if d.abs() >= 0.05 || (x - PI).abs() >= 0.05 * PI {
            break x;
        }
    };
    let gamma_ng = rng.gen_range(0.2..=1.0);
    let detunings = (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let geom = build_geometry(n, xi)?;
    let cpl = CouplingParams::new(1.0, d, gamma_ng, detunings)?;
    let angle = |rng: &mut dyn rand::RngCore| rng.gen_range(0.0..=PI);
    let rabi = 0.01;
    let scheme = match rng.gen_range(0..4) {
        0 => make_uniform_scheme(&geom, angle(rng), rabi)?,
        1 => make_asymmetric_scheme(&geom, angle(rng), angle(rng), rabi)?,
        2 if n >= 2 => {
            let site = rng.gen_range(1..=n);
            make_defect_scheme(&geom, angle(rng), angle(rng), rabi, &[site])?
        }
        _ => {
            let amps = (0..n).map(|_| rng.gen_range(0.001..=0.01)).collect();
            let phases = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            let angles = (0..n).map(|_| angle(rng)).collect();
            DriveScheme::custom(amps, phases, angles)?
        }
    };
    Ok((geom, cpl, scheme))
}

fn check_ode_vs_lu() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let opts = IntegrationOptions::default();
    let mut worst: f64 = 0.0;
    let mut unconverged = 0;
    for _ in 0..50 {
        let (g, c, s) = random_configuration(&mut rng)?;
        let matrix: CouplingMatrix<f64> = build_coupling_matrix(&g, &c)?;
        let drive = build_drive_vector(&g, &s)?;
        let lu = solve_steady_state(&matrix, &drive)?;
        let traj = integrate(&matrix, &drive, &opts)?;
        if !traj.converged {
            unconverged += 1;
        }
        let ode = normalized_populations(traj.final_amplitudes())?;
        worst = worst.max(max_abs_diff(&ode, &lu.populations));
    }
    let tol = tolerances::ODE_VS_LU;
    Ok(Outcome {
        expected: format!("50 configs, max |dP| <= {tol:e} at t = 200"),
        observed: format!("max |dP| = {worst:.3e}, {unconverged} unconverged"),
        tolerance: tol,
        pass: worst <= tol,
    })
}

fn check_symmetry() -> Result<Outcome> {
    // Uniform mirror: P_j(D, theta) = P_{N+1-j}(-D, pi - theta).
    let mut mirror: f64 = 0.0;
    for n in [7, 10] {
        for d in [-0.9, -0.4, 0.0, 0.4, 0.9] {
            for theta in [0.1, 0.3, 0.5, 0.7, 0.9].map(|t| t * PI) {
                for xi in [0.2, 0.55, 1.3].map(|x| x * PI) {
                    let g = build_geometry(n, xi)?;
                    let a = populations(
                        &g,
                        &CouplingParams::resonant(n, d, 0.0)?,
                        &make_uniform_scheme(&g, theta, 0.01)?,
                    )?;
                    let b = populations(
                        &g,
                        &CouplingParams::resonant(n, -d, 0.0)?,
                        &make_uniform_scheme(&g, PI - theta, 0.01)?,
                    )?;
                    let rev: Vec<f64> = b.into_iter().rev().collect();
                    mirror = mirror.max(max_abs_diff(&a, &rev));
                }
            }
        }
    }
    // Odd-N central defect at D = 0, theta1 = theta2.
    let mut defect: f64 = 0.0;
    for n in [9, 21] {
        for theta in [0.3 * PI, 0.86 * PI] {
            for xi in [0.1 * PI, 0.4 * PI] {
                let p = defect_populations(n, xi, theta, 0.0)?;
                let rev: Vec<f64> = p.iter().rev().copied().collect();
                defect = defect.max(max_abs_diff(&p, &rev));
            }
        }
    }
    // Drive scale and global phase.
    let n = 30;
    let g = build_geometry(n, 0.37 * PI)?;
    let cpl = CouplingParams::resonant(n, 0.3, 0.1)?;
    let base = make_asymmetric_scheme(&g, 0.7, 2.3, 0.01)?;
    let p0 = populations(&g, &cpl, &base)?;
    let mut invariance: f64 = 0.0;
    for variant in [base.scaled(0.1), base.scaled(7.3), base.phase_shifted(1.234), base.phase_shifted(-4.0)] {
        invariance = invariance.max(max_abs_diff(&p0, &populations(&g, &cpl, &variant)?));
    }
    let pass = mirror <= tolerances::MIRROR && defect <= tolerances::MIRROR && invariance <= tolerances::INVARIANCE;
    Ok(Outcome {
        expected: format!(
            "mirror <= {:e}, defect mirror <= {:e}, invariance <= {:e}",
            tolerances::MIRROR,
            tolerances::MIRROR,
            tolerances::INVARIANCE
        ),
        observed: format!("mirror {mirror:.2e}, defect mirror {defect:.2e}, invariance {invariance:.2e}"),
        tolerance: tolerances::MIRROR,
        pass,
    })
}

fn check_gamma_ng() -> Result<Outcome> {
    let n = 100;
    let p = defect_populations(n, 0.1 * PI, 0.86 * PI, 0.5)?;
    let m = n.div_ceil(2);
    let top = argmax(&p) + 1;
    Ok(Outcome {
        expected: format!("argmax site = m = {m}"),
        observed: format!("argmax site {top}, P_m = {:.4}", p[m - 1]),
        tolerance: 0.0,
        pass: top == m,
    })
}

fn check_multi_defect() -> Result<Outcome> {
    let theta = 0.86 * PI;
    let xi = 0.1 * PI;
    let run = |n: usize, defects: &[usize]| -> Result<Vec<f64>> {
        let g = build_geometry(n, xi)?;
        let s = make_defect_scheme(&g, theta, theta, 0.01, defects)?;
        populations(&g, &reciprocal(n, 0.0)?, &s)
    };
    let p = run(20, &[10, 11])?;
    let share: f64 = p[8..12].iter().sum();
    let mut pass = share >= tolerances::MULTI_DEFECT_SHARE;
    let mut parts = vec![format!("N=20 {{10,11}}: share {share:.4}")];
    let m = 15;
    for defects in [vec![m - 6, m + 10], vec![m - 10, m - 3, m + 3, m + 10]] {
        let p = run(30, &defects)?;
        let near = |j: usize| defects.iter().any(|&d| j + 1 >= d && j <= d + 1);
        let others = (1..=30)
            .filter(|&j| !near(j))
            .map(|j| p[j - 1])
            .fold(0.0, f64::max);
        let weakest = defects.iter().map(|&d| p[d - 1]).fold(f64::INFINITY, f64::min);
        pass &= weakest > others;
        parts.push(format!("N=30 {defects:?}: min defect {weakest:.4} vs max other {others:.2e}"));
    }
    Ok(Outcome {
        expected: format!(
            "share >= {}; every defect above every driven non-neighbor",
            tolerances::MULTI_DEFECT_SHARE
        ),
        observed: parts.join("; "),
        tolerance: tolerances::MULTI_DEFECT_SHARE,
        pass,
    })
}

/// The 200 x 200 two-zone angle sweep used by the determinism check.
pub fn determinism_sweep_spec() -> SweepSpec {
    SweepSpec {
        scheme_family: SchemeFamily::Asymmetric,
        fixed: FixedParams {
            n_atoms: 100,
            xi: 0.1 * PI,
            directionality: 0.0,
            gamma_ng: 0.0,
            gamma: 1.0,
            detuning: 0.0,
            theta1: PI / 2.0,
            theta2: None,
            rabi: 0.01,
            defect_sites: None,
        },
        axis1: Axis::new(SweepParam::Theta1, 0.0, PI, 200),
        axis2: Axis::new(SweepParam::Theta2, 0.0, PI, 200),
        outputs: vec![OutputField::Riel, OutputField::Ipr, OutputField::Iipr, OutputField::PInterface],
        max_cells: 1_000_000,
    }
}

fn check_sweep_determinism() -> Result<Outcome> {
    let spec = determinism_sweep_spec();
    let mut bodies = Vec::new();
    let mut times = Vec::new();
    for _ in 0..2 {
        let start = Instant::now();
        let result = run_sweep(&spec, 4)?;
        times.push(start.elapsed().as_secs_f64());
        let mut buf = Vec::new();
        write_sweep_csv(&result, &mut buf)?;
        bodies.push(buf);
    }
    let identical = bodies[0] == bodies[1];
    let slowest = times.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        expected: format!("identical CSV, each run < {} s", tolerances::SWEEP_SECONDS),
        observed: format!(
            "identical = {identical}, runs {:.2} s / {:.2} s, {} bytes",
            times[0],
            times[1],
            bodies[0].len()
        ),
        tolerance: tolerances::SWEEP_SECONDS,
        pass: identical && slowest < tolerances::SWEEP_SECONDS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_ordered() {
        let reg = registry();
        let mut ids: Vec<&str> = reg.iter().map(|c| c.id).collect();
        let criteria: Vec<u32> = reg.iter().map(|c| c.criterion).collect();
        assert_eq!(criteria, (1..=14).collect::<Vec<_>>());
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 14);
    }

    #[test]
    fn filter_selects_subset() {
        let r = run_all(Some("excluded"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].status, CheckStatus::Pass);
        assert!(run_all(Some("no-such-check")).is_empty());
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let x = maximize(|x| Ok(-(x - 0.3) * (x - 0.3)), 0.0, 1.0, 50).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn random_configurations_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (g, c, s) = random_configuration(&mut rng).unwrap();
            assert_eq!(s.n_atoms(), g.n_atoms());
            assert!(c.gamma_ng() >= 0.2);
        }
    }
}
