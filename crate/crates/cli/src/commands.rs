use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chiralwg::io::fmt_num;
use chiralwg::linalg::norm2;
use chiralwg::model::{build_coupling_matrix, build_drive_vector, NEAR_FIELD_WARNING};
use chiralwg::sweep::{CellStatus, Provenance};
use chiralwg::validation::{all_passed, run_all, summary_line, write_report_json};
use chiralwg::{
    analytic_pm, analytic_xi_max, compute_metrics, diagonal_angles, integrate, normalized_populations,
    predict_riel_minima, run_sweep, solve_steady_state, write_sweep_csv, write_trajectory_csv, Complex, Error,
    MetricSet, Result,
};
use serde::Serialize;

use crate::config::RunConfig;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn stem<'a>(cfg: &'a RunConfig, default: &'a str) -> &'a str {
    cfg.output.prefix.as_deref().unwrap_or(default)
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut w = create(dir, &path.file_name().unwrap().to_string_lossy())?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn no_sweep(cfg: &RunConfig, cmd: &str) -> Result<()> {
    if cfg.sweep.is_some() {
        return Err(Error::Validation {
            field: "sweep".into(),
            reason: format!("`{cmd}` takes no sweep section; use `sweep`"),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct Diagnostics {
    condition_estimate: f64,
    raw_excitation: f64,
    weak_excitation_ok: bool,
    relative_residual: f64,
}

#[derive(Serialize)]
struct SteadySidecar<'a> {
    config: &'a RunConfig,
    engine_version: &'static str,
    p_m: f64,
    metrics: MetricSet,
    diagnostics: Diagnostics,
    warnings: Vec<String>,
}

pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<()> {
    no_sweep(cfg, "steady")?;
    let geom = cfg.geometry()?;
    let cpl = cfg.couplings()?;
    let scheme = cfg.scheme(&geom)?;
    let matrix = build_coupling_matrix(&geom, &cpl)?;
    let drive = build_drive_vector(&geom, &scheme)?;
    let st = solve_steady_state(&matrix, &drive)?;
    if st.raw_excitation == 0.0 {
        return Err(Error::ZeroExcitation);
    }
    let mut warnings = Vec::new();
    if geom.near_field() {
        log::warn!("{NEAR_FIELD_WARNING}");
        warnings.push(NEAR_FIELD_WARNING.to_string());
    }
    if !st.weak_excitation_ok {
        let msg = format!("total excitation {:.3e} exceeds the weak-drive limit", st.raw_excitation);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let i = Complex::new(0.0, 1.0);
    let residual: Vec<Complex> = matrix
        .entries()
        .matvec(&st.amplitudes)
        .iter()
        .zip(&drive)
        .map(|(mp, w)| mp - i * w)
        .collect();

    let name = stem(cfg, "steady");
    let mut w = csv_writer(create(out, &format!("{name}.csv"))?);
    w.write_record(["site_index", "population", "re_amplitude", "im_amplitude"])
        .map_err(csv_err)?;
    for (j, (p, a)) in st.populations.iter().zip(&st.amplitudes).enumerate() {
        w.write_record([(j + 1).to_string(), fmt_num(*p), fmt_num(a.re), fmt_num(a.im)])
            .map_err(csv_err)?;
    }
    w.flush()?;

    let sidecar = SteadySidecar {
        config: cfg,
        engine_version: env!("CARGO_PKG_VERSION"),
        p_m: st.populations[geom.center() - 1],
        metrics: compute_metrics(&st.populations, &scheme)?,
        diagnostics: Diagnostics {
            condition_estimate: st.condition_estimate,
            raw_excitation: st.raw_excitation,
            weak_excitation_ok: st.weak_excitation_ok,
            relative_residual: norm2(&residual) / norm2(&drive),
        },
        warnings,
    };
    write_json(out.join(format!("{name}.json")), &sidecar)
}

#[derive(Serialize)]
struct StatusCounts {
    ok: usize,
    singular: usize,
    weak_excitation_violated: usize,
    invalid: usize,
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    config: &'a RunConfig,
    spec: &'a chiralwg::SweepSpec,
    cells: usize,
    status_counts: StatusCounts,
    warnings: &'a [String],
    provenance: &'a Provenance,
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, threads: usize) -> Result<()> {
    let spec = cfg.sweep_spec()?;
    let result = run_sweep(&spec, threads)?;
    let count = |s: CellStatus| result.cells.iter().filter(|c| c.status == s).count();
    let status_counts = StatusCounts {
        ok: count(CellStatus::Ok),
        singular: count(CellStatus::Singular),
        weak_excitation_violated: count(CellStatus::WeakExcitationViolated),
        invalid: count(CellStatus::Invalid),
    };
    log::info!(
        "{} cells: {} ok, {} singular, {} invalid",
        result.cells.len(),
        status_counts.ok,
        status_counts.singular,
        status_counts.invalid
    );
    let name = stem(cfg, "sweep");
    let mut w = create(out, &format!("{name}.csv"))?;
    write_sweep_csv(&result, &mut w)?;
    w.flush()?;
    write_json(
        out.join(format!("{name}.json")),
        &SweepSidecar {
            config: cfg,
            spec: &result.spec,
            cells: result.cells.len(),
            status_counts,
            warnings: &result.warnings,
            provenance: &result.provenance,
        },
    )
}

#[derive(Serialize)]
struct DynamicsSidecar<'a> {
    config: &'a RunConfig,
    converged: bool,
    final_derivative_norm: f64,
    snapshots: usize,
    /// Largest population gap to the linear solve, when it exists.
    steady_state_gap: Option<f64>,
}

pub fn cmd_dynamics(cfg: &RunConfig, out: &Path) -> Result<()> {
    no_sweep(cfg, "dynamics")?;
    let geom = cfg.geometry()?;
    let cpl = cfg.couplings()?;
    let scheme = cfg.scheme(&geom)?;
    let matrix = build_coupling_matrix(&geom, &cpl)?;
    let drive = build_drive_vector(&geom, &scheme)?;
    let record = integrate(&matrix, &drive, &cfg.integration_options())?;
    if !record.converged {
        log::warn!(
            "not converged at t_end: |dp/dt| = {:.3e}",
            record.final_derivative_norm
        );
    }
    let steady_state_gap = solve_steady_state(&matrix, &drive).ok().and_then(|st| {
        let p = normalized_populations(record.final_amplitudes()).ok()?;
        Some(
            p.iter()
                .zip(&st.populations)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    });
    let name = stem(cfg, "dynamics");
    let mut w = create(out, &format!("{name}.csv"))?;
    write_trajectory_csv(&record, &mut w)?;
    w.flush()?;
    write_json(
        out.join(format!("{name}.json")),
        &DynamicsSidecar {
            config: cfg,
            converged: record.converged,
            final_derivative_norm: record.final_derivative_norm,
            snapshots: record.times.len(),
            steady_state_gap,
        },
    )
}

#[derive(Serialize)]
struct AnalyticSidecar<'a> {
    config: &'a RunConfig,
    files: Vec<String>,
    warnings: Vec<String>,
}

pub fn cmd_analytic(cfg: &RunConfig, out: &Path) -> Result<()> {
    no_sweep(cfg, "analytic")?;
    let a = &cfg.analytic;
    if a.n_values.is_empty() {
        return Err(Error::Validation {
            field: "analytic.n_values".into(),
            reason: "must not be empty".into(),
        });
    }
    if let Some(&n) = a.n_values.iter().find(|&&n| n < 5) {
        return Err(Error::Validation {
            field: "analytic.n_values".into(),
            reason: format!("closed forms need N >= 5, got {n}"),
        });
    }
    let (lo, hi) = (cfg.angle_unit.to_rad(a.xi_min), cfg.angle_unit.to_rad(a.xi_max));
    if a.xi_points == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Validation {
            field: "analytic".into(),
            reason: "need xi_points >= 1 and finite xi_min < xi_max".into(),
        });
    }
    let name = stem(cfg, "analytic");
    let mut files = Vec::new();
    let mut warnings = Vec::new();

    let pm_file = format!("{name}_pm.csv");
    let mut w = csv_writer(create(out, &pm_file)?);
    let mut header = vec!["xi".to_string()];
    header.extend(a.n_values.iter().map(|n| format!("p_m_n{n}")));
    w.write_record(&header).map_err(csv_err)?;
    let h = (hi - lo) / a.xi_points as f64;
    for k in 0..a.xi_points {
        let xi = lo + (k as f64 + 0.5) * h;
        let mut row = vec![fmt_num(xi)];
        // Poles (sin xi = 0) are left empty.
        row.extend(
            a.n_values
                .iter()
                .map(|&n| analytic_pm(n, xi).map(fmt_num).unwrap_or_default()),
        );
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    files.push(pm_file);

    let xm_file = format!("{name}_xi_max.csv");
    let mut w = csv_writer(create(out, &xm_file)?);
    w.write_record(["n_atoms", "xi_max", "p_m_at_xi_max"]).map_err(csv_err)?;
    for &n in &a.n_values {
        let xi: f64 = analytic_xi_max(n, 0)?;
        w.write_record([n.to_string(), fmt_num(xi), fmt_num(analytic_pm(n, xi)?)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    files.push(xm_file);

    let xi = cfg.angle_unit.to_rad(cfg.geometry.xi);
    match predict_riel_minima(cfg.geometry.n_atoms, xi) {
        Ok(minima) => {
            let rm_file = format!("{name}_riel_minima.csv");
            let mut w = csv_writer(create(out, &rm_file)?);
            w.write_record(["n_atoms", "xi", "cos_difference", "theta1_diagonal", "theta2_diagonal"])
                .map_err(csv_err)?;
            for d in minima {
                let (t1, t2) = diagonal_angles(d).expect("clipped to [-2, 2]");
                w.write_record([
                    cfg.geometry.n_atoms.to_string(),
                    fmt_num(xi),
                    fmt_num(d),
                    fmt_num(t1),
                    fmt_num(t2),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            files.push(rm_file);
        }
        Err(e) => {
            log::warn!("RIEL minima skipped: {e}");
            warnings.push(format!("RIEL minima skipped: {e}"));
        }
    }
    write_json(
        out.join(format!("{name}.json")),
        &AnalyticSidecar {
            config: cfg,
            files,
            warnings,
        },
    )
}

/// Runs the acceptance checks; `Ok(false)` when any fails.
pub fn cmd_validate(out: &Path, filter: Option<&str>) -> Result<bool> {
    let reports = run_all(filter);
    for r in &reports {
        println!("{}", summary_line(r));
    }
    let mut w = create(out, "validation.json")?;
    write_report_json(&reports, &mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(all_passed(&reports))
}
