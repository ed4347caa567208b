//! Strict JSON run configuration.

use std::f64::consts::PI;

use chiralwg::model::{
    build_geometry, make_asymmetric_scheme, make_defect_scheme, make_uniform_scheme, ArrayGeometry, CouplingParams,
    DriveScheme,
};
use chiralwg::sweep::{Axis, FixedParams, OutputField, SchemeFamily, SweepParam, SweepSpec, DEFAULT_MAX_CELLS};
use chiralwg::{Error, IntegrationOptions, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleUnit {
    /// Radians.
    #[default]
    Rad,
    /// Multiples of pi.
    Pi,
}

impl AngleUnit {
    pub fn to_rad(self, x: f64) -> f64 {
        match self {
            AngleUnit::Rad => x,
            AngleUnit::Pi => x * PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub angle_unit: AngleUnit,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub couplings: CouplingConfig,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub analytic: AnalyticConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_atoms: usize,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub gamma: f64,
    pub directionality: f64,
    pub gamma_ng: f64,
    /// Common detuning, ignored when `detunings` is present.
    pub detuning: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            directionality: 0.0,
            gamma_ng: 0.0,
            detuning: 0.0,
            detunings: None,
        }
    }
}

fn default_rabi() -> f64 {
    chiralwg::model::DEFAULT_RABI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    Uniform {
        theta: f64,
        #[serde(default = "default_rabi")]
        rabi: f64,
    },
    Asymmetric {
        theta1: f64,
        theta2: f64,
        #[serde(default = "default_rabi")]
        rabi: f64,
    },
    Defect {
        theta1: f64,
        theta2: f64,
        #[serde(default = "default_rabi")]
        rabi: f64,
        /// 1-based; the central site when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        defect_sites: Option<Vec<usize>>,
    },
    Custom {
        rabi: Vec<f64>,
        phases: Vec<f64>,
        angles: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        let d = IntegrationOptions::<f64>::default();
        Self {
            t_end: d.t_end,
            dt: d.dt,
            stride: d.stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Angle and `xi` bounds are read in `angle_unit`.
    pub axis1: Axis,
    pub axis2: Axis,
    pub outputs: Vec<OutputField>,
    #[serde(default = "default_cap")]
    pub max_cells: usize,
}

fn default_cap() -> usize {
    DEFAULT_MAX_CELLS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    /// Array sizes tabulated against `xi`.
    pub n_values: Vec<usize>,
    /// Open `xi` grid in `angle_unit`.
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        Self {
            n_values: vec![5, 10, 100, 1000],
            xi_min: 0.0,
            xi_max: PI,
            xi_points: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; defaults to the subcommand name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

/// Parse errors carry the serde path and position.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Validation {
        field: "config".into(),
        reason: e.to_string(),
    })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Validation {
            field: "schema_version".into(),
            reason: format!("expected {SCHEMA_VERSION}, got {}", cfg.schema_version),
        });
    }
    Ok(cfg)
}

impl RunConfig {
    fn rad(&self, x: f64) -> f64 {
        self.angle_unit.to_rad(x)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry<f64>> {
        build_geometry(self.geometry.n_atoms, self.rad(self.geometry.xi))
    }

    pub fn couplings(&self) -> Result<CouplingParams<f64>> {
        let c = &self.couplings;
        let n = self.geometry.n_atoms;
        let detunings = c.detunings.clone().unwrap_or_else(|| vec![c.detuning; n]);
        CouplingParams::new(c.gamma, c.directionality, c.gamma_ng, detunings)
    }

    pub fn scheme(&self, geom: &ArrayGeometry<f64>) -> Result<DriveScheme<f64>> {
        match &self.scheme {
            SchemeConfig::Uniform { theta, rabi } => make_uniform_scheme(geom, self.rad(*theta), *rabi),
            SchemeConfig::Asymmetric { theta1, theta2, rabi } => {
                make_asymmetric_scheme(geom, self.rad(*theta1), self.rad(*theta2), *rabi)
            }
            SchemeConfig::Defect {
                theta1,
                theta2,
                rabi,
                defect_sites,
            } => {
                let sites = defect_sites.clone().unwrap_or_else(|| vec![geom.center()]);
                make_defect_scheme(geom, self.rad(*theta1), self.rad(*theta2), *rabi, &sites)
            }
            SchemeConfig::Custom { rabi, phases, angles } => DriveScheme::custom(
                rabi.clone(),
                phases.iter().map(|&p| self.rad(p)).collect(),
                angles.iter().map(|&a| self.rad(a)).collect(),
            ),
        }
    }

    pub fn integration_options(&self) -> IntegrationOptions<f64> {
        IntegrationOptions {
            t_end: self.dynamics.t_end,
            dt: self.dynamics.dt,
            stride: self.dynamics.stride,
        }
    }

    /// Engine sweep spec with angles converted to radians.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sweep = self.sweep.as_ref().ok_or_else(|| Error::Validation {
            field: "sweep".into(),
            reason: "missing sweep section".into(),
        })?;
        let c = &self.couplings;
        if c.detunings.is_some() {
            return Err(Error::Validation {
                field: "couplings.detunings".into(),
                reason: "sweeps take a common detuning".into(),
            });
        }
        let (family, theta1, theta2, defect_sites) = match &self.scheme {
            SchemeConfig::Uniform { theta, .. } => (SchemeFamily::Uniform, *theta, None, None),
            SchemeConfig::Asymmetric { theta1, theta2, .. } => {
                (SchemeFamily::Asymmetric, *theta1, Some(*theta2), None)
            }
            SchemeConfig::Defect {
                theta1,
                theta2,
                defect_sites,
                ..
            } => (SchemeFamily::Defect, *theta1, Some(*theta2), defect_sites.clone()),
            SchemeConfig::Custom { .. } => {
                return Err(Error::Validation {
                    field: "scheme.kind".into(),
                    reason: "custom schemes cannot be swept".into(),
                })
            }
        };
        let rabi = match &self.scheme {
            SchemeConfig::Uniform { rabi, .. }
            | SchemeConfig::Asymmetric { rabi, .. }
            | SchemeConfig::Defect { rabi, .. } => *rabi,
            SchemeConfig::Custom { .. } => unreachable!(),
        };
        let convert = |a: &Axis| {
            let mut a = a.clone();
            if a.param.is_angle() || a.param == SweepParam::Xi {
                a.min = self.rad(a.min);
                a.max = self.rad(a.max);
            }
            a
        };
        let spec = SweepSpec {
            scheme_family: family,
            fixed: FixedParams {
                n_atoms: self.geometry.n_atoms,
                xi: self.rad(self.geometry.xi),
                directionality: c.directionality,
                gamma_ng: c.gamma_ng,
                gamma: c.gamma,
                detuning: c.detuning,
                theta1: self.rad(theta1),
                theta2: theta2.map(|t| self.rad(t)),
                rabi,
                defect_sites,
            },
            axis1: convert(&sweep.axis1),
            axis2: convert(&sweep.axis2),
            outputs: sweep.outputs.clone(),
            max_cells: sweep.max_cells,
        };
        spec.validate()?;
        Ok(spec)
    }
}
