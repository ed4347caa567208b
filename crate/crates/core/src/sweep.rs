//! Steady states and metrics over rectangular two-parameter grids.
//!
//! Cells are independent: they are evaluated in parallel and merged by cell
//! index, so results never depend on scheduling. Cells that cannot be
//! solved are kept with a failure status.

use std::io::Write;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::metrics::compute_metrics;
use crate::model::{
    build_coupling_matrix, build_drive_vector, build_geometry, make_asymmetric_scheme, make_central_defect_scheme,
    make_defect_scheme, make_uniform_scheme, ArrayGeometry, CouplingMatrix, CouplingParams, DriveScheme,
    DEFAULT_RABI, NEAR_FIELD_WARNING,
};
use crate::solver::solve_steady_state;

pub const DEFAULT_MAX_CELLS: usize = 1_000_000;

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "D")]
    Directionality,
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "theta1")]
    Theta1,
    #[serde(rename = "theta2")]
    Theta2,
    #[serde(rename = "gamma_ng")]
    GammaNg,
    #[serde(rename = "N")]
    NAtoms,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Directionality => "D",
            SweepParam::Xi => "xi",
            SweepParam::Theta1 => "theta1",
            SweepParam::Theta2 => "theta2",
            SweepParam::GammaNg => "gamma_ng",
            SweepParam::NAtoms => "N",
        }
    }

    /// Whether the parameter enters the coupling matrix.
    pub fn affects_matrix(self) -> bool {
        !matches!(self, SweepParam::Theta1 | SweepParam::Theta2)
    }

    pub fn is_angle(self) -> bool {
        matches!(self, SweepParam::Xi | SweepParam::Theta1 | SweepParam::Theta2)
    }
}

/// Linearly spaced axis. Closed axes include both endpoints; open axes
/// sample cell midpoints `min + (k + 1/2) (max - min) / count`.
/// `open` defaults to true for `xi` and false otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<bool>,
}

impl Axis {
    pub fn new(param: SweepParam, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
            open: None,
        }
    }

    pub fn is_open(&self) -> bool {
        self.open.unwrap_or(self.param == SweepParam::Xi)
    }

    pub fn value(&self, k: usize) -> f64 {
        let span = self.max - self.min;
        if self.is_open() {
            self.min + (k as f64 + 0.5) * span / self.count as f64
        } else if self.count == 1 {
            self.min
        } else {
            self.min + k as f64 * span / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.value(k)).collect()
    }

    /// Spacing between neighboring grid lines (zero for a single point).
    pub fn step(&self) -> f64 {
        let span = self.max - self.min;
        if self.is_open() {
            span / self.count as f64
        } else if self.count > 1 {
            span / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        let field = format!("axis {}", self.param.name());
        if self.count == 0 {
            return Err(Error::validation(field, "count must be at least 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::validation(field, "need finite min <= max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeFamily {
    Uniform,
    Asymmetric,
    Defect,
}

/// Values for every non-swept parameter. Angles in radians. The uniform
/// family drives at `theta1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub n_atoms: usize,
    pub xi: f64,
    #[serde(default)]
    pub directionality: f64,
    #[serde(default)]
    pub gamma_ng: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub detuning: f64,
    pub theta1: f64,
    #[serde(default)]
    pub theta2: Option<f64>,
    #[serde(default = "default_rabi")]
    pub rabi: f64,
    /// Defect family only; defaults to the central site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_sites: Option<Vec<usize>>,
}

fn one() -> f64 {
    1.0
}

fn default_rabi() -> f64 {
    DEFAULT_RABI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputField {
    Populations,
    Ipr,
    Iipr,
    Riel,
    PM,
    PInterface,
    PEdge,
    RawExcitation,
    ConditionEstimate,
}

impl OutputField {
    pub fn name(self) -> &'static str {
        match self {
            OutputField::Populations => "populations",
            OutputField::Ipr => "ipr",
            OutputField::Iipr => "iipr",
            OutputField::Riel => "riel",
            OutputField::PM => "p_m",
            OutputField::PInterface => "p_interface",
            OutputField::PEdge => "p_edge",
            OutputField::RawExcitation => "raw_excitation",
            OutputField::ConditionEstimate => "condition_estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scheme_family: SchemeFamily,
    pub fixed: FixedParams,
    pub axis1: Axis,
    pub axis2: Axis,
    pub outputs: Vec<OutputField>,
    #[serde(default = "default_cap")]
    pub max_cells: usize,
}

fn default_cap() -> usize {
    DEFAULT_MAX_CELLS
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.axis1.count.saturating_mul(self.axis2.count)
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.param == self.axis2.param {
            return Err(Error::validation("axes", "axis parameters must be distinct"));
        }
        if self.outputs.is_empty() {
            return Err(Error::validation("outputs", "at least one output is required"));
        }
        let cells = self.cell_count();
        if cells > self.max_cells {
            return Err(Error::CapExceeded {
                cells,
                cap: self.max_cells,
            });
        }
        Ok(())
    }

    /// Parameter values at grid position `(i, j)`.
    pub fn cell_coordinates(&self, i: usize, j: usize) -> (f64, f64) {
        (self.axis1.value(i), self.axis2.value(j))
    }

    fn touches_near_field(&self) -> bool {
        let bound = 0.1 * std::f64::consts::PI;
        [&self.axis1, &self.axis2]
            .iter()
            .find(|a| a.param == SweepParam::Xi)
            .map_or(self.fixed.xi < bound, |a| a.values().iter().any(|&x| x < bound))
    }
}

/// Per-cell parameter set after applying axis values.
#[derive(Debug, Clone, PartialEq)]
struct CellParams {
    n_atoms: usize,
    xi: f64,
    directionality: f64,
    gamma_ng: f64,
    theta1: f64,
    theta2: f64,
}

fn cell_params(spec: &SweepSpec, x1: f64, x2: f64) -> CellParams {
    let f = &spec.fixed;
    let mut p = CellParams {
        n_atoms: f.n_atoms,
        xi: f.xi,
        directionality: f.directionality,
        gamma_ng: f.gamma_ng,
        theta1: f.theta1,
        theta2: f.theta2.unwrap_or(f.theta1),
    };
    for (axis, x) in [(&spec.axis1, x1), (&spec.axis2, x2)] {
        match axis.param {
            SweepParam::Directionality => p.directionality = x,
            SweepParam::Xi => p.xi = x,
            SweepParam::Theta1 => p.theta1 = x,
            SweepParam::Theta2 => p.theta2 = x,
            SweepParam::GammaNg => p.gamma_ng = x,
            SweepParam::NAtoms => p.n_atoms = x.round().max(0.0) as usize,
        }
    }
    p
}

fn cell_model(spec: &SweepSpec, p: &CellParams) -> Result<(ArrayGeometry<f64>, CouplingParams<f64>)> {
    let geom = build_geometry(p.n_atoms, p.xi)?;
    let cpl = CouplingParams::new(
        spec.fixed.gamma,
        p.directionality,
        p.gamma_ng,
        vec![spec.fixed.detuning; p.n_atoms],
    )?;
    Ok((geom, cpl))
}

fn cell_scheme(spec: &SweepSpec, geom: &ArrayGeometry<f64>, p: &CellParams) -> Result<DriveScheme<f64>> {
    let rabi = spec.fixed.rabi;
    match spec.scheme_family {
        SchemeFamily::Uniform => make_uniform_scheme(geom, p.theta1, rabi),
        SchemeFamily::Asymmetric => make_asymmetric_scheme(geom, p.theta1, p.theta2, rabi),
        SchemeFamily::Defect => match &spec.fixed.defect_sites {
            Some(sites) => make_defect_scheme(geom, p.theta1, p.theta2, rabi, sites),
            None => make_central_defect_scheme(geom, p.theta1, p.theta2, rabi),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Singular,
    WeakExcitationViolated,
    /// The cell's parameters fail validation (e.g. `xi` outside `(0, 2 pi)`).
    Invalid,
}

impl CellStatus {
    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Singular => "singular",
            CellStatus::WeakExcitationViolated => "weak_excitation_violated",
            CellStatus::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellValues {
    pub populations: Vec<f64>,
    pub ipr: f64,
    pub iipr: f64,
    pub riel: Option<f64>,
    /// Population of site `ceil(N/2)` (the undriven atom for a central defect).
    pub p_m: f64,
    pub p_interface: f64,
    pub p_edge: f64,
    pub raw_excitation: f64,
    pub condition_estimate: f64,
}

impl CellValues {
    /// Scalar value of an output field; `None` for populations or an
    /// undefined RIEL.
    pub fn get(&self, field: OutputField) -> Option<f64> {
        match field {
            OutputField::Populations => None,
            OutputField::Ipr => Some(self.ipr),
            OutputField::Iipr => Some(self.iipr),
            OutputField::Riel => self.riel,
            OutputField::PM => Some(self.p_m),
            OutputField::PInterface => Some(self.p_interface),
            OutputField::PEdge => Some(self.p_edge),
            OutputField::RawExcitation => Some(self.raw_excitation),
            OutputField::ConditionEstimate => Some(self.condition_estimate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    pub status: CellStatus,
    /// Present for `ok` and `weak_excitation_violated` cells.
    pub values: Option<CellValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub engine_version: String,
    pub timestamp_unix: u64,
}

impl Provenance {
    pub fn now() -> Self {
        Self {
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Row-major: cell `(i, j)` at `i * axis2.count + j`.
    pub cells: Vec<CellRecord>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &CellRecord {
        &self.cells[i * self.spec.axis2.count + j]
    }

    pub fn ok_count(&self) -> usize {
        self.cells.iter().filter(|c| c.values.is_some()).count()
    }

    pub fn failure_count(&self) -> usize {
        self.cells.len() - self.ok_count()
    }
}

fn failed(i: usize, j: usize, x1: f64, x2: f64, err: Error) -> CellRecord {
    let status = match err {
        Error::SingularSystem { .. } => CellStatus::Singular,
        _ => CellStatus::Invalid,
    };
    CellRecord {
        i,
        j,
        x1,
        x2,
        status,
        values: None,
        message: Some(err.to_string()),
    }
}

fn evaluate(spec: &SweepSpec, i: usize, j: usize, shared: Option<&CouplingMatrix<f64>>) -> CellRecord {
    let (x1, x2) = spec.cell_coordinates(i, j);
    let p = cell_params(spec, x1, x2);
    let run = || -> Result<CellRecord> {
        let (geom, cpl) = cell_model(spec, &p)?;
        let scheme = cell_scheme(spec, &geom, &p)?;
        let owned;
        let matrix = match shared {
            Some(m) => m,
            None => {
                owned = build_coupling_matrix(&geom, &cpl)?;
                &owned
            }
        };
        let drive = build_drive_vector(&geom, &scheme)?;
        let state = solve_steady_state(matrix, &drive)?;
        let metrics = compute_metrics(&state.populations, &scheme)?;
        let status = if state.weak_excitation_ok {
            CellStatus::Ok
        } else {
            CellStatus::WeakExcitationViolated
        };
        let m = geom.center();
        Ok(CellRecord {
            i,
            j,
            x1,
            x2,
            status,
            values: Some(CellValues {
                p_m: state.populations[m - 1],
                populations: state.populations,
                ipr: metrics.ipr,
                iipr: metrics.iipr,
                riel: metrics.riel,
                p_interface: metrics.p_interface,
                p_edge: metrics.p_edge,
                raw_excitation: state.raw_excitation,
                condition_estimate: state.condition_estimate,
            }),
            message: None,
        })
    };
    run().unwrap_or_else(|e| failed(i, j, x1, x2, e))
}

/// Evaluates one cell from scratch by flat index. Bit-identical to the
/// corresponding cell of [`run_sweep`].
pub fn evaluate_cell(spec: &SweepSpec, index: usize) -> CellRecord {
    let n2 = spec.axis2.count;
    evaluate(spec, index / n2, index % n2, None)
}

type SharedMatrices = (Option<usize>, Vec<Option<Arc<CouplingMatrix<f64>>>>);

/// Coupling matrices keyed by the grid line of the single matrix-affecting
/// axis (or one matrix when neither axis affects it). `None` when both do.
fn shared_matrices(spec: &SweepSpec) -> Option<SharedMatrices> {
    let a1 = spec.axis1.param.affects_matrix();
    let a2 = spec.axis2.param.affects_matrix();
    let (which, count) = match (a1, a2) {
        (true, true) => return None,
        (true, false) => (Some(1), spec.axis1.count),
        (false, true) => (Some(2), spec.axis2.count),
        (false, false) => (None, 1),
    };
    let build = |k: usize| -> Option<Arc<CouplingMatrix<f64>>> {
        let (i, j) = match which {
            Some(1) => (k, 0),
            Some(_) => (0, k),
            None => (0, 0),
        };
        let (x1, x2) = spec.cell_coordinates(i, j);
        let p = cell_params(spec, x1, x2);
        let (geom, cpl) = cell_model(spec, &p).ok()?;
        build_coupling_matrix(&geom, &cpl).ok().map(Arc::new)
    };
    Some((which, (0..count).into_par_iter().map(build).collect()))
}

/// Runs the sweep on `threads` workers (0 = rayon default).
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    spec.validate()?;
    let mut warnings = Vec::new();
    if spec.touches_near_field() {
        log::warn!("{NEAR_FIELD_WARNING}");
        warnings.push(NEAR_FIELD_WARNING.to_string());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::validation("threads", e.to_string()))?;
    let n2 = spec.axis2.count;
    let cells = pool.install(|| {
        let shared = shared_matrices(spec);
        (0..spec.cell_count())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n2, idx % n2);
                let matrix = shared.as_ref().and_then(|(which, ms)| {
                    let k = match which {
                        Some(1) => i,
                        Some(_) => j,
                        None => 0,
                    };
                    ms[k].as_deref()
                });
                evaluate(spec, i, j, matrix)
            })
            .collect::<Vec<_>>()
    });
    Ok(SweepResult {
        spec: spec.clone(),
        cells,
        warnings,
        provenance: Provenance::now(),
    })
}

/// One row or column of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    /// Parameter that varies along the section (`None` for diagonals).
    pub axis: Option<SweepParam>,
    pub coordinates: Vec<f64>,
    pub cells: Vec<CellRecord>,
}

impl Section {
    pub fn series(&self, field: OutputField) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.values.as_ref().and_then(|v| v.get(field)))
            .collect()
    }
}

/// Cells where `param` equals `fixed_value` (within half a grid step).
pub fn cross_section(result: &SweepResult, param: SweepParam, fixed_value: f64) -> Result<Section> {
    let spec = &result.spec;
    let (fixed_axis, other, fixed_is_first) = if spec.axis1.param == param {
        (&spec.axis1, &spec.axis2, true)
    } else if spec.axis2.param == param {
        (&spec.axis2, &spec.axis1, false)
    } else {
        return Err(Error::validation("axis", format!("{} is not swept", param.name())));
    };
    let half = 0.5 * fixed_axis.step();
    let tol = if half > 0.0 { half } else { 1e-12 * fixed_value.abs().max(1.0) };
    let hit = fixed_axis
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (k, (v - fixed_value).abs()))
        .filter(|(_, d)| *d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .ok_or(Error::NoGridLine {
            axis: param.name().to_string(),
            value: fixed_value,
        })?;
    let cells: Vec<CellRecord> = (0..other.count)
        .map(|k| {
            if fixed_is_first {
                result.cell(hit, k).clone()
            } else {
                result.cell(k, hit).clone()
            }
        })
        .collect();
    Ok(Section {
        axis: Some(other.param),
        coordinates: other.values(),
        cells,
    })
}

/// Cells `(k, k)` of a square grid; coordinates are the axis-1 values.
pub fn diagonal(result: &SweepResult) -> Result<Section> {
    let spec = &result.spec;
    if spec.axis1.count != spec.axis2.count {
        return Err(Error::validation("axes", "diagonal needs equal axis counts"));
    }
    Ok(Section {
        axis: None,
        coordinates: spec.axis1.values(),
        cells: (0..spec.axis1.count).map(|k| result.cell(k, k).clone()).collect(),
    })
}

/// Long-format CSV: axis1 and axis2 coordinates (headed by parameter name),
/// `status`, then the requested outputs. Populations are
/// `;`-joined; missing values are empty fields.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let spec = &result.spec;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec![spec.axis1.param.name(), spec.axis2.param.name(), "status"];
    header.extend(spec.outputs.iter().map(|o| o.name()));
    w.write_record(&header)?;
    for cell in &result.cells {
        let mut row = vec![fmt_num(cell.x1), fmt_num(cell.x2), cell.status.name().to_string()];
        for &field in &spec.outputs {
            let text = match (&cell.values, field) {
                (None, _) => String::new(),
                (Some(v), OutputField::Populations) => {
                    v.populations.iter().map(|&p| fmt_num(p)).collect::<Vec<_>>().join(";")
                }
                (Some(v), f) => v.get(f).map(fmt_num).unwrap_or_default(),
            };
            row.push(text);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_configuration;
    use std::f64::consts::PI;

    fn fixed(n: usize) -> FixedParams {
        FixedParams {
            n_atoms: n,
            xi: 0.1 * PI,
            directionality: 0.0,
            gamma_ng: 0.0,
            gamma: 1.0,
            detuning: 0.0,
            theta1: PI / 2.0,
            theta2: Some(PI / 2.0),
            rabi: 0.01,
            defect_sites: None,
        }
    }

    #[test]
    fn axis_spacing() {
        let a = Axis::new(SweepParam::Xi, 0.0, PI, 4);
        assert!(a.is_open());
        let v = a.values();
        assert!((v[0] - PI / 8.0).abs() < 1e-15 && (v[3] - 7.0 * PI / 8.0).abs() < 1e-15);
        let b = Axis::new(SweepParam::Directionality, 0.0, 1.0, 5);
        assert_eq!(b.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Axis::new(SweepParam::GammaNg, 0.3, 0.3, 1).values(), vec![0.3]);
    }

    #[test]
    fn validation_errors() {
        let mut spec = SweepSpec {
            scheme_family: SchemeFamily::Uniform,
            fixed: fixed(10),
            axis1: Axis::new(SweepParam::Xi, 0.0, PI, 3),
            axis2: Axis::new(SweepParam::Xi, 0.0, PI, 3),
            outputs: vec![OutputField::Ipr],
            max_cells: 100,
        };
        assert!(spec.validate().is_err());
        spec.axis2 = Axis::new(SweepParam::Directionality, 0.0, 1.0, 50);
        assert!(matches!(spec.validate(), Err(Error::CapExceeded { cells: 150, cap: 100 })));
        spec.axis2.count = 3;
        spec.outputs.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn single_cell_matches_direct_solve() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Asymmetric,
            fixed: fixed(20),
            axis1: Axis::new(SweepParam::Theta1, 2.0, 2.0, 1),
            axis2: Axis::new(SweepParam::Theta2, 0.5, 0.5, 1),
            outputs: vec![OutputField::Populations],
            max_cells: 10,
        };
        let r = run_sweep(&spec, 1).unwrap();
        let g = build_geometry(20, 0.1 * PI).unwrap();
        let c = CouplingParams::resonant(20, 0.0, 0.0).unwrap();
        let s = make_asymmetric_scheme(&g, 2.0, 0.5, 0.01).unwrap();
        let st = solve_configuration(&g, &c, &s).unwrap();
        assert_eq!(r.cells[0].values.as_ref().unwrap().populations, st.populations);
    }

    #[test]
    fn excluded_points_reported_singular() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Uniform,
            fixed: fixed(50),
            axis1: Axis::new(SweepParam::Directionality, 0.0, 1.0, 3),
            axis2: Axis {
                open: Some(false),
                ..Axis::new(SweepParam::Xi, 1e-14, PI, 3)
            },
            outputs: vec![OutputField::Ipr],
            max_cells: 100,
        };
        let r = run_sweep(&spec, 2).unwrap();
        assert_eq!(r.cell(0, 0).status, CellStatus::Singular);
        assert_eq!(r.cell(0, 2).status, CellStatus::Singular);
        assert!(r.cell(2, 1).values.is_some());
        assert_eq!(r.ok_count() + r.failure_count(), 9);
    }

    #[test]
    fn invalid_cells_are_kept() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Uniform,
            fixed: fixed(10),
            axis1: Axis::new(SweepParam::Directionality, 0.5, 1.5, 3),
            axis2: Axis::new(SweepParam::GammaNg, 0.0, 0.1, 2),
            outputs: vec![OutputField::Ipr],
            max_cells: 100,
        };
        let r = run_sweep(&spec, 1).unwrap();
        assert_eq!(r.cell(2, 0).status, CellStatus::Invalid);
        assert!(r.cell(2, 0).message.as_ref().unwrap().contains("directionality"));
        assert_eq!(r.cells.len(), 6);
    }

    #[test]
    fn order_independent_and_csv_deterministic() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Defect,
            fixed: fixed(15),
            axis1: Axis::new(SweepParam::Theta1, 0.1, 3.0, 6),
            axis2: Axis::new(SweepParam::Xi, 0.0, PI, 5),
            outputs: vec![OutputField::PM, OutputField::Riel, OutputField::Populations],
            max_cells: 100,
        };
        let a = run_sweep(&spec, 3).unwrap();
        let b = run_sweep(&spec, 1).unwrap();
        let mut order: Vec<usize> = (0..30).collect();
        order.reverse();
        order.swap(3, 17);
        let mut shuffled: Vec<(usize, CellRecord)> = order.iter().map(|&k| (k, evaluate_cell(&spec, k))).collect();
        shuffled.sort_by_key(|(k, _)| *k);
        for ((_, c), d) in shuffled.iter().zip(&a.cells) {
            assert_eq!(c, d);
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_sweep_csv(&a, &mut x).unwrap();
        write_sweep_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("theta1,xi,status,p_m,riel,populations\n"));
        assert_eq!(text.lines().count(), 31);
    }

    #[test]
    fn sections() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Uniform,
            fixed: fixed(12),
            axis1: Axis::new(SweepParam::Directionality, 0.0, 1.0, 5),
            axis2: Axis::new(SweepParam::Xi, 0.0, PI, 5),
            outputs: vec![OutputField::Ipr],
            max_cells: 100,
        };
        let r = run_sweep(&spec, 1).unwrap();
        let s = cross_section(&r, SweepParam::Directionality, 0.01).unwrap();
        assert_eq!(s.axis, Some(SweepParam::Xi));
        assert_eq!(s.cells.len(), 5);
        assert!(s.cells.iter().all(|c| c.x1 == 0.0));
        let s = cross_section(&r, SweepParam::Xi, 0.5 * PI).unwrap();
        assert!(s.cells.iter().all(|c| (c.x2 - 0.5 * PI).abs() < 1e-12));
        assert!(cross_section(&r, SweepParam::Directionality, 1.3).is_err());
        assert!(cross_section(&r, SweepParam::Theta1, 0.2).is_err());
        let d = diagonal(&r).unwrap();
        assert_eq!(d.cells[2].i, 2);
        assert_eq!(d.cells[2].j, 2);
        assert_eq!(d.series(OutputField::Ipr).len(), 5);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SweepSpec {
            scheme_family: SchemeFamily::Defect,
            fixed: fixed(9),
            axis1: Axis::new(SweepParam::NAtoms, 5.0, 9.0, 3),
            axis2: Axis::new(SweepParam::Xi, 0.0, PI, 5),
            outputs: vec![OutputField::PM, OutputField::ConditionEstimate],
            max_cells: 100,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"param\":\"N\""));
        assert!(text.contains("\"p_m\""));
        let back: SweepSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<SweepSpec>(&text.replace("\"max_cells\"", "\"bogus\"")).is_err());
    }
}
