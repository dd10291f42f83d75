//! Connection 1-forms `omega = A dx + B dy` on surface charts with values in a
//! 3-dimensional Lie algebra: curvature, the Cartan criteria, and the
//! epsilon-suspension to rank two distributions in dimension five.
//!
//! Curvature follows the convention that makes the suspension brackets
//! exact: `F = d_x B - d_y A + {A, B}`, and the criterion columns are
//! `F`, `d_x F + {A, F}`, `d_y F + {B, F}`. With the vector-field bracket
//! `[X,Y] = X(Y) - Y(X)` and a frame realizing the structure constants, the
//! vertical parts of `[X,Y]`, `[X,[X,Y]]`, `[Y,[X,Y]]` of the suspended
//! fields are exactly these three columns pushed through the scaling.

mod builtin;
mod suspension;

pub use builtin::{builtin, cext_form, sphere_form, sphere_position, torus_heisenberg, BuiltinForm, SphereChart};
pub use suspension::{
    epsilon_sweep, ratio_test, scaled_determinants, suspend, RatioTest, GroupModel, SuspensionSpec, SweepEntry, SweepReport,
    DEFAULT_EPSILONS,
};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::certify::{CertifyError, GridSpec};
use crate::expr::{EvalError, Expr};
use crate::fields::FieldError;
use crate::linalg::{det3, norm3};
use crate::report;

/// Tolerance for the antisymmetry and Jacobi validators.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectionError {
    #[error("structure constants are not antisymmetric: c^{k}_{i}{j} + c^{k}_{j}{i} = {residual:e}", k = .k + 1, i = .i + 1, j = .j + 1)]
    NotAntisymmetric { k: usize, i: usize, j: usize, residual: f64 },
    #[error("structure constants violate the Jacobi identity on (e{i}, e{j}, e{k}): residual {residual:e}", i = .i + 1, j = .j + 1, k = .k + 1)]
    JacobiViolation { i: usize, j: usize, k: usize, residual: f64 },
    #[error("the abelian criterion needs an abelian algebra")]
    NotAbelian,
    #[error("connection algebra does not match the {model} group model")]
    ModelMismatch { model: &'static str },
    #[error("unknown built-in connection form `{0}`")]
    UnknownBuiltin(String),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("component {component} of the form references x{} on a surface chart", .var + 1)]
    VariableOutsideChart { component: String, var: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

/// A 3-dimensional real Lie algebra in a fixed basis `e1, e2, e3`;
/// `constants[k][i][j]` is `c^k_ij` with `[e_i, e_j] = sum_k c^k_ij e_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LieAlgebra3 {
    pub constants: [[[f64; 3]; 3]; 3],
}

impl LieAlgebra3 {
    /// Validates antisymmetry and the Jacobi identity.
    pub fn new(constants: [[[f64; 3]; 3]; 3]) -> Result<Self, ConnectionError> {
        let alg = LieAlgebra3 { constants };
        alg.validate()?;
        Ok(alg)
    }

    pub fn abelian() -> Self {
        LieAlgebra3 {
            constants: [[[0.0; 3]; 3]; 3],
        }
    }

    /// Basis `E, F, [E,F]` with `[E,F]` central.
    pub fn heisenberg() -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        c[2][0][1] = 1.0;
        c[2][1][0] = -1.0;
        LieAlgebra3 { constants: c }
    }

    /// `so(3)`: `[e_i, e_j] = e_i x e_j`.
    pub fn so3() -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[k][i][j] = 1.0;
            c[k][j][i] = -1.0;
        }
        LieAlgebra3 { constants: c }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "abelian" => Some(Self::abelian()),
            "heisenberg" => Some(Self::heisenberg()),
            "so3" => Some(Self::so3()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConnectionError> {
        let c = &self.constants;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let residual = c[k][i][j] + c[k][j][i];
                    if residual.abs() > ALGEBRA_TOL || !c[k][i][j].is_finite() {
                        return Err(ConnectionError::NotAntisymmetric { k, i, j, residual });
                    }
                }
            }
        }
        let basis = |i: usize| {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            v
        };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let (a, b, e) = (basis(i), basis(j), basis(k));
                    let t1 = self.bracket(a, self.bracket(b, e));
                    let t2 = self.bracket(b, self.bracket(e, a));
                    let t3 = self.bracket(e, self.bracket(a, b));
                    let residual = norm3([t1[0] + t2[0] + t3[0], t1[1] + t2[1] + t3[1], t1[2] + t2[2] + t3[2]]);
                    if residual > ALGEBRA_TOL {
                        return Err(ConnectionError::JacobiViolation { i, j, k, residual });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().flatten().flatten().all(|&c| c == 0.0)
    }

    pub fn approx_eq(&self, other: &LieAlgebra3, tol: f64) -> bool {
        let a = self.constants.iter().flatten().flatten();
        let b = other.constants.iter().flatten().flatten();
        a.zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn bracket(&self, u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    *slot += self.constants[k][i][j] * u[i] * v[j];
                }
            }
        }
        out
    }

    pub fn bracket_expr(&self, u: &[Expr; 3], v: &[Expr; 3]) -> [Expr; 3] {
        let component = |k: usize| {
            let mut acc = Expr::zero();
            for i in 0..3 {
                for j in 0..3 {
                    let c = self.constants[k][i][j];
                    if c != 0.0 {
                        acc = acc.add(&constant(c).mul(&u[i].mul(&v[j])));
                    }
                }
            }
            acc
        };
        [component(0), component(1), component(2)]
    }
}

pub(crate) fn constant(c: f64) -> Expr {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        Expr::int(c as i64)
    } else {
        Expr::num(c)
    }
}

/// A coordinate chart `(x, y) = (x1, x2)` on a surface. Periodic axes carry
/// their period. The optional area density `rho` expresses a reference area
/// form as `rho dx dy`; curvature densities are taken with respect to it.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceChart {
    pub name: String,
    pub periodic: [Option<f64>; 2],
    pub area_density: Option<Expr>,
}

impl SurfaceChart {
    pub fn plane() -> Self {
        SurfaceChart {
            name: "plane".into(),
            periodic: [None, None],
            area_density: None,
        }
    }

    pub fn torus() -> Self {
        let tau = std::f64::consts::TAU;
        SurfaceChart {
            name: "torus".into(),
            periodic: [Some(tau), Some(tau)],
            area_density: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionForm {
    pub algebra: LieAlgebra3,
    pub chart: SurfaceChart,
    pub a: [Expr; 3],
    pub b: [Expr; 3],
}

fn check_surface_vars(name: &str, exprs: &[Expr]) -> Result<(), ConnectionError> {
    for (i, e) in exprs.iter().enumerate() {
        if let Some(var) = e.max_var() {
            if var >= 2 {
                return Err(ConnectionError::VariableOutsideChart {
                    component: format!("{name}{}", i + 1),
                    var,
                });
            }
        }
    }
    Ok(())
}

impl ConnectionForm {
    pub fn new(algebra: LieAlgebra3, chart: SurfaceChart, a: [Expr; 3], b: [Expr; 3]) -> Result<Self, ConnectionError> {
        algebra.validate()?;
        check_surface_vars("A", &a)?;
        check_surface_vars("B", &b)?;
        if let Some(rho) = &chart.area_density {
            check_surface_vars("area_density", std::slice::from_ref(rho))?;
        }
        Ok(ConnectionForm { algebra, chart, a, b })
    }

    /// The form plus another one on the same chart and algebra.
    pub fn plus(&self, other: &ConnectionForm) -> ConnectionForm {
        let add = |u: &[Expr; 3], v: &[Expr; 3]| [u[0].add(&v[0]), u[1].add(&v[1]), u[2].add(&v[2])];
        ConnectionForm {
            algebra: self.algebra.clone(),
            chart: self.chart.clone(),
            a: add(&self.a, &other.a),
            b: add(&self.b, &other.b),
        }
    }

    /// Symbolic curvature `d_x B - d_y A + {A, B}`.
    pub fn curvature_expr(&self) -> [Expr; 3] {
        let ab = self.algebra.bracket_expr(&self.a, &self.b);
        let comp = |k: usize| self.b[k].differentiate(0).sub(&self.a[k].differentiate(1)).add(&ab[k]);
        [comp(0), comp(1), comp(2)]
    }

    pub fn curvature(&self, p: &[f64]) -> Result<[f64; 3], ConnectionError> {
        check_point(p)?;
        eval3(&self.curvature_expr(), p)
    }

    /// Curvature divided by the chart's area density: `d omega = F' Omega`
    /// for the reference area form `Omega = rho dx dy`.
    pub fn curvature_density(&self, p: &[f64]) -> Result<[f64; 3], ConnectionError> {
        let f = self.curvature(p)?;
        let rho = match &self.chart.area_density {
            Some(rho) => rho.eval(p)?,
            None => 1.0,
        };
        Ok(f.map(|v| v / rho))
    }

    /// Value of `omega` on the tangent vector `(dx, dy)` at `p`.
    pub fn pair(&self, p: &[f64], dx: f64, dy: f64) -> Result<[f64; 3], ConnectionError> {
        let a = eval3(&self.a, p)?;
        let b = eval3(&self.b, p)?;
        Ok([a[0] * dx + b[0] * dy, a[1] * dx + b[1] * dy, a[2] * dx + b[2] * dy])
    }
}

fn check_point(p: &[f64]) -> Result<(), ConnectionError> {
    if p.len() != 2 {
        return Err(ConnectionError::PointDimension {
            expected: 2,
            got: p.len(),
        });
    }
    Ok(())
}

pub(crate) fn eval3(e: &[Expr; 3], p: &[f64]) -> Result<[f64; 3], ConnectionError> {
    Ok([e[0].eval(p)?, e[1].eval(p)?, e[2].eval(p)?])
}

/// The symbolic criterion columns `F`, `d_x F + {A,F}`, `d_y F + {B,F}`.
#[derive(Clone, Debug)]
pub struct CriterionFrame {
    columns: [[Expr; 3]; 3],
}

impl CriterionFrame {
    pub fn new(form: &ConnectionForm) -> Self {
        let f = form.curvature_expr();
        let af = form.algebra.bracket_expr(&form.a, &f);
        let bf = form.algebra.bracket_expr(&form.b, &f);
        let dx = |k: usize| f[k].differentiate(0).add(&af[k]);
        let dy = |k: usize| f[k].differentiate(1).add(&bf[k]);
        CriterionFrame {
            columns: [f.clone(), [dx(0), dx(1), dx(2)], [dy(0), dy(1), dy(2)]],
        }
    }

    pub fn columns(&self) -> &[[Expr; 3]; 3] {
        &self.columns
    }

    pub fn eval(&self, p: &[f64], tol: f64) -> Result<CriterionResult, ConnectionError> {
        check_point(p)?;
        let f = eval3(&self.columns[0], p)?;
        let fx = eval3(&self.columns[1], p)?;
        let fy = eval3(&self.columns[2], p)?;
        let det = det3(f, fx, fy);
        let scale = norm3(f) * norm3(fx) * norm3(fy);
        let relative_margin = if scale == 0.0 { 0.0 } else { det.abs() / scale };
        let holds = relative_margin > tol;
        let reason = if holds {
            None
        } else if norm3(f) <= tol {
            Some("curvature vanishes".to_string())
        } else {
            Some("curvature and its covariant derivatives are linearly dependent".to_string())
        };
        Ok(CriterionResult {
            holds,
            margin: det.abs(),
            det,
            relative_margin,
            columns: [f, fx, fy],
            reason,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub holds: bool,
    /// `|det(F | d_x F + {A,F} | d_y F + {B,F})|`.
    #[serde(serialize_with = "report::fixed")]
    pub margin: f64,
    #[serde(serialize_with = "report::fixed")]
    pub det: f64,
    /// `margin` divided by the product of the column norms; compared with `tol`.
    #[serde(serialize_with = "report::fixed")]
    pub relative_margin: f64,
    #[serde(serialize_with = "fixed_columns")]
    pub columns: [[f64; 3]; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn fixed_columns<S: serde::Serializer>(cols: &[[f64; 3]; 3], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(cols.iter().map(|c| c.map(report::round_sig)))
}

pub fn cartan_criterion_abelian(form: &ConnectionForm, p: &[f64], tol: f64) -> Result<CriterionResult, ConnectionError> {
    if !form.algebra.is_abelian() {
        return Err(ConnectionError::NotAbelian);
    }
    CriterionFrame::new(form).eval(p, tol)
}

pub fn cartan_criterion_algebra(form: &ConnectionForm, p: &[f64], tol: f64) -> Result<CriterionResult, ConnectionError> {
    CriterionFrame::new(form).eval(p, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionPoint {
    #[serde(serialize_with = "report::fixed_vec")]
    pub coords: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<CriterionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionPoint {
    pub fn holds(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.holds)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionGridReport {
    pub grid: GridSpec,
    #[serde(serialize_with = "report::fixed")]
    pub tol: f64,
    pub holds_everywhere: bool,
    #[serde(serialize_with = "report::fixed_opt")]
    pub min_margin: Option<f64>,
    #[serde(serialize_with = "report::fixed_opt")]
    pub max_margin: Option<f64>,
    #[serde(serialize_with = "report::fixed_opt")]
    pub min_relative_margin: Option<f64>,
    pub failures: Vec<usize>,
    pub points: Vec<CriterionPoint>,
}

/// Evaluates the criterion at every point of a 2-dimensional grid.
pub fn criterion_grid(form: &ConnectionForm, grid: &GridSpec, tol: f64) -> Result<CriterionGridReport, ConnectionError> {
    if grid.dim() != 2 {
        return Err(CertifyError::BoxDimension {
            expected: 2,
            got: grid.dim(),
        }
        .into());
    }
    let frame = CriterionFrame::new(form);
    let points: Vec<CriterionPoint> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let coords = grid.point(i);
            match frame.eval(&coords, tol) {
                Ok(r) => CriterionPoint {
                    coords,
                    result: Some(r),
                    error: None,
                },
                Err(e) => CriterionPoint {
                    coords,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<&CriterionResult> = points.iter().filter_map(|p| p.result.as_ref()).collect();
    let fold = |f: fn(f64, f64) -> f64, pick: fn(&CriterionResult) -> f64| ok.iter().map(|r| pick(r)).reduce(f);
    let failures = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.holds())
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    Ok(CriterionGridReport {
        grid: grid.clone(),
        tol,
        holds_everywhere: failures.is_empty(),
        min_margin: fold(f64::min, |r| r.margin),
        max_margin: fold(f64::max, |r| r.margin),
        min_relative_margin: fold(f64::min, |r| r.relative_margin),
        failures,
        points,
    })
}
