//! Configuration schemas. Every table rejects unknown keys, and all
//! expressions are parsed and validated before any computation starts.

use cartan_core::certify::{GraphDistribution, GridSpec};
use cartan_core::connections::{BuiltinForm, ConnectionForm, GroupModel, LieAlgebra3, SurfaceChart};
use cartan_core::expr::{parse, Expr};
use cartan_core::extension::{CapSampling, ConeProblem};
use cartan_core::fields::{Distribution2, VectorField};
use cartan_core::topology::{ManifoldInvariants, SimplyConnectedData};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

pub fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_at(path: &str, text: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| config_err(format!("{path} = \"{text}\": {e}")))
}

fn parse_list(path: &str, texts: &[String]) -> Result<Vec<Expr>, CliError> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| parse_at(&format!("{path}[{i}]"), t))
        .collect()
}

fn parse3(path: &str, texts: &[String; 3]) -> Result<[Expr; 3], CliError> {
    let v = parse_list(path, texts)?;
    Ok([v[0].clone(), v[1].clone(), v[2].clone()])
}

/// Optional output settings; command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub steps: Vec<usize>,
    /// Axes sampled without their upper endpoint (periodic directions).
    #[serde(default)]
    pub half_open: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self, path: &str, dim: usize) -> Result<GridSpec, CliError> {
        if self.lo.len() != dim {
            return Err(config_err(format!("{path}: expected {dim} axes, got {}", self.lo.len())));
        }
        let mut g = GridSpec::new(self.lo.clone(), self.hi.clone(), self.steps.clone())
            .map_err(|e| config_err(format!("{path}: {e}")))?;
        for &axis in &self.half_open {
            if axis >= dim {
                return Err(config_err(format!("{path}.half_open: axis {axis} is not below {dim}")));
            }
            g = g.with_half_open(axis);
        }
        Ok(g)
    }
}

/// A rank-two distribution, either as two vector fields `x`, `y` or in
/// graph form `d_1 + a . d_(3..5)`, `d_2 + b . d_(3..5)` on a 5-chart.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub x: Option<Vec<String>>,
    pub y: Option<Vec<String>>,
    pub a: Option<[String; 3]>,
    pub b: Option<[String; 3]>,
}

impl DistributionConfig {
    pub fn build(&self) -> Result<Distribution2, CliError> {
        let field_err = |e: cartan_core::fields::FieldError| config_err(format!("distribution: {e}"));
        match (&self.x, &self.y, &self.a, &self.b) {
            (Some(x), Some(y), None, None) => {
                let x = VectorField::new(parse_list("distribution.x", x)?).map_err(field_err)?;
                let y = VectorField::new(parse_list("distribution.y", y)?).map_err(field_err)?;
                Distribution2::new(x, y).map_err(field_err)
            }
            (None, None, Some(a), Some(b)) => {
                let g = GraphDistribution::new(parse3("distribution.a", a)?, parse3("distribution.b", b)?).map_err(field_err)?;
                g.to_distribution().map_err(field_err)
            }
            _ => Err(config_err("distribution: give exactly one of the pairs (x, y) or (a, b)")),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub tol: Option<f64>,
    pub distribution: DistributionConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub name: Option<String>,
    pub period_x: Option<f64>,
    pub period_y: Option<f64>,
    /// Density of the area form in the chart coordinates.
    pub area_density: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormConfig {
    /// A named built-in form; excludes every other key.
    pub builtin: Option<String>,
    /// `"abelian"`, `"heisenberg"` or `"so3"`.
    pub algebra: Option<String>,
    /// `structure_constants[k][i][j]` is the coefficient of `e_k` in `[e_i, e_j]`.
    pub structure_constants: Option<[[[f64; 3]; 3]; 3]>,
    pub chart: Option<ChartConfig>,
    pub a: Option<[String; 3]>,
    pub b: Option<[String; 3]>,
}

impl FormConfig {
    /// The form and, when known, the group model matching its algebra.
    pub fn build(&self) -> Result<(ConnectionForm, Option<GroupModel>), CliError> {
        if let Some(name) = &self.builtin {
            if self.algebra.is_some() || self.structure_constants.is_some() || self.chart.is_some() || self.a.is_some() || self.b.is_some() {
                return Err(config_err("connection: `builtin` excludes algebra, chart and components"));
            }
            let f = BuiltinForm::parse(name).map_err(|e| config_err(format!("connection.builtin: {e}")))?;
            return Ok((f.form(), Some(f.model())));
        }
        let algebra = match (&self.algebra, &self.structure_constants) {
            (Some(name), None) => {
                LieAlgebra3::by_name(name).ok_or_else(|| config_err(format!("connection.algebra: unknown algebra `{name}`")))?
            }
            (None, Some(c)) => LieAlgebra3::new(*c).map_err(|e| config_err(format!("connection.structure_constants: {e}")))?,
            _ => return Err(config_err("connection: give exactly one of `algebra` or `structure_constants`")),
        };
        let chart = match &self.chart {
            None => SurfaceChart::plane(),
            Some(c) => SurfaceChart {
                name: c.name.clone().unwrap_or_else(|| "plane".into()),
                periodic: [c.period_x, c.period_y],
                area_density: c
                    .area_density
                    .as_ref()
                    .map(|t| parse_at("connection.chart.area_density", t))
                    .transpose()?,
            },
        };
        let (Some(a), Some(b)) = (&self.a, &self.b) else {
            return Err(config_err("connection: components `a` and `b` are required"));
        };
        let a = parse3("connection.a", a)?;
        let b = parse3("connection.b", b)?;
        let model = [GroupModel::Abelian, GroupModel::Heisenberg]
            .into_iter()
            .find(|m| m.algebra().approx_eq(&algebra, cartan_core::connections::ALGEBRA_TOL));
        let form = ConnectionForm::new(algebra, chart, a, b).map_err(|e| config_err(format!("connection: {e}")))?;
        Ok((form, model))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspensionConfig {
    /// `"abelian"` or `"heisenberg"`; defaults to the model of the algebra.
    pub model: Option<String>,
    pub epsilons: Option<Vec<f64>>,
    pub grid: GridConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub point: Vec<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub exponent: i32,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionConfig {
    pub tol: Option<f64>,
    pub connection: FormConfig,
    pub criterion: Option<GridConfig>,
    pub suspension: Option<SuspensionConfig>,
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

pub fn parse_model(path: &str, name: &str) -> Result<GroupModel, CliError> {
    match name {
        "abelian" => Ok(GroupModel::Abelian),
        "heisenberg" => Ok(GroupModel::Heisenberg),
        _ => Err(config_err(format!("{path}: unknown group model `{name}`"))),
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub theta_steps: Option<usize>,
    pub z_steps: Option<usize>,
    pub z_top: Option<f64>,
    pub polar_steps: Option<usize>,
}

impl SamplingConfig {
    pub fn build(&self) -> CapSampling {
        let d = CapSampling::default();
        CapSampling {
            theta_steps: self.theta_steps.unwrap_or(d.theta_steps),
            z_steps: self.z_steps.unwrap_or(d.z_steps),
            z_top: self.z_top.unwrap_or(d.z_top),
            polar_steps: self.polar_steps.unwrap_or(d.polar_steps),
        }
    }
}

/// The family of forms on the punctured sphere, decided on the caps
/// `z >= h` for each height.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub alpha: f64,
    pub heights: Vec<f64>,
    #[serde(default = "default_n_quad")]
    pub n_quad: usize,
    pub sampling: Option<SamplingConfig>,
}

fn default_n_quad() -> usize {
    256
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    pub samples: Vec<[f64; 3]>,
    pub target: [f64; 3],
}

impl ConeConfig {
    pub fn build(&self, tol: f64) -> Result<ConeProblem, CliError> {
        ConeProblem::new(self.samples.clone(), self.target, tol).map_err(|e| config_err(format!("cone: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendConfig {
    pub tol: Option<f64>,
    pub table: Option<TableConfig>,
    pub cone: Option<ConeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RokhlinConfig {
    pub p1: Vec<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub manifold: Option<ManifoldInvariants>,
    pub simply_connected: Option<SimplyConnectedData>,
    pub rokhlin: Option<RokhlinConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Validates a tolerance from any source.
pub fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(config_err(format!("tolerance must be positive and finite, got {tol}")))
    }
}

