//! Extension of abelian connection germs across a disk: loop integrals,
//! convex-cone membership with certificates, and the decision procedure
//! comparing the boundary integral with the cone spanned by curvature values
//! over the enclosed region.

pub mod lp;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::certify::GridSpec;
use crate::connections::{
    cartan_criterion_abelian, criterion_grid, BuiltinForm, ConnectionError, ConnectionForm, SphereChart,
};
use crate::expr::{EvalError, Expr};
use crate::linalg::{dot3, norm3};
use crate::report;

pub use lp::LpError;

/// Default feasibility tolerance for cone problems.
pub const DEFAULT_CONE_TOL: f64 = 1e-9;
pub const MIN_QUADRATURE: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtensionError {
    #[error("cone problem has no samples")]
    NoSamples,
    #[error("sample {index} has norm {norm:e}, not above the tolerance")]
    DegenerateSample { index: usize, norm: f64 },
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("feasibility solver failed: {0}")]
    NumericalFailure(LpError),
    #[error("quadrature needs at least {MIN_QUADRATURE} points, got {0}")]
    TooFewQuadraturePoints(usize),
    #[error("loop expressions may only use the parameter x1")]
    LoopVariable,
    #[error("germ is not of Cartan type on the annulus: {0}")]
    CriterionFailure(String),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A closed curve `t -> (u(t), v(t))` in the surface chart for `t` in
/// `[t0, t0 + period]`. Expressions use `x1` (alias `t`) as the parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    pub u: Expr,
    pub v: Expr,
    pub t0: f64,
    pub period: f64,
}

impl Loop {
    pub fn new(u: Expr, v: Expr, t0: f64, period: f64) -> Result<Self, ExtensionError> {
        if u.max_var().is_some_and(|k| k > 0) || v.max_var().is_some_and(|k| k > 0) {
            return Err(ExtensionError::LoopVariable);
        }
        if !(period.is_finite() && period > 0.0 && t0.is_finite()) {
            return Err(ExtensionError::NonFinite("loop period"));
        }
        Ok(Loop { u, v, t0, period })
    }

    /// The unit circle `(cos t, sin t)`.
    pub fn unit_circle() -> Self {
        Loop::new(Expr::var(0).cos(), Expr::var(0).sin(), 0.0, TAU).expect("valid loop")
    }

    /// The coordinate circle `theta -> (theta, h)` of the band chart.
    pub fn latitude(h: f64) -> Self {
        Loop::new(Expr::var(0), Expr::num(h), 0.0, TAU).expect("valid loop")
    }

    pub fn point(&self, t: f64) -> Result<[f64; 2], ExtensionError> {
        Ok([self.u.eval(&[t])?, self.v.eval(&[t])?])
    }
}

/// `int_loop omega` by the composite trapezoid rule on `n_quad` equally
/// spaced parameter values. For smooth periodic integrands the error decays
/// faster than any power of `1/n_quad`; for merely continuous piecewise
/// smooth ones it is `O(1/n_quad^2)`.
pub fn loop_integral(form: &ConnectionForm, lp: &Loop, n_quad: usize) -> Result<[f64; 3], ExtensionError> {
    if n_quad < MIN_QUADRATURE {
        return Err(ExtensionError::TooFewQuadraturePoints(n_quad));
    }
    let du = lp.u.differentiate(0);
    let dv = lp.v.differentiate(0);
    let h = lp.period / n_quad as f64;
    let terms = (0..n_quad)
        .map(|k| {
            let t = lp.t0 + h * k as f64;
            let p = lp.point(t)?;
            Ok(form.pair(&p, du.eval(&[t])?, dv.eval(&[t])?)?)
        })
        .collect::<Result<Vec<[f64; 3]>, ExtensionError>>()?;
    let mut sum = [0.0; 3];
    for v in terms {
        for k in 0..3 {
            sum[k] += v[k];
        }
    }
    Ok(sum.map(|s| s * h))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeProblem {
    pub samples: Vec<[f64; 3]>,
    pub target: [f64; 3],
    pub tol: f64,
}

impl ConeProblem {
    pub fn new(samples: Vec<[f64; 3]>, target: [f64; 3], tol: f64) -> Result<Self, ExtensionError> {
        if samples.is_empty() {
            return Err(ExtensionError::NoSamples);
        }
        if !target.iter().all(|v| v.is_finite()) {
            return Err(ExtensionError::NonFinite("target"));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(ExtensionError::NonFinite("tolerance"));
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(ExtensionError::NonFinite("samples"));
            }
            let norm = norm3(*s);
            if norm <= tol {
                return Err(ExtensionError::DegenerateSample { index, norm });
            }
        }
        Ok(ConeProblem { samples, target, tol })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConeStatus {
    Inside,
    Outside,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    /// Nonnegative `lambda` with `sum lambda_i sample_i = target` (Inside and
    /// Boundary), in terms of the original, unnormalized vectors.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "fixed_opt_vec")]
    pub coefficients: Option<Vec<f64>>,
    /// Unit normal with `<n, target> < 0 <= <n, sample_i>` (Outside).
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "fixed_opt3")]
    pub normal: Option<[f64; 3]>,
    /// Interior margin: the smallest step along the coordinate directions,
    /// relative to `|target|`, that can leave the cone. Zero when Outside.
    #[serde(serialize_with = "report::fixed")]
    pub margin: f64,
    /// Distance from the normalized target to the cone of normalized samples.
    #[serde(serialize_with = "report::fixed")]
    pub residual: f64,
}

fn fixed_opt_vec<S: serde::Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(|x| report::round_sig(*x))),
        None => s.serialize_none(),
    }
}

fn fixed_opt3<S: serde::Serializer>(v: &Option<[f64; 3]>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(|x| report::round_sig(*x))),
        None => s.serialize_none(),
    }
}

impl ConeVerdict {
    /// Re-checks the certificate against the problem at the problem's
    /// tolerance.
    pub fn verify(&self, p: &ConeProblem) -> bool {
        match self.status {
            ConeStatus::Inside | ConeStatus::Boundary => {
                let Some(lambda) = &self.coefficients else {
                    return false;
                };
                if lambda.len() != p.samples.len() || lambda.iter().any(|&l| l < 0.0 || !l.is_finite()) {
                    return false;
                }
                let mut sum = [0.0; 3];
                for (l, s) in lambda.iter().zip(&p.samples) {
                    for k in 0..3 {
                        sum[k] += l * s[k];
                    }
                }
                let err = norm3([sum[0] - p.target[0], sum[1] - p.target[1], sum[2] - p.target[2]]);
                err <= p.tol * norm3(p.target)
            }
            ConeStatus::Outside => {
                let Some(n) = self.normal else {
                    return false;
                };
                let t = norm3(p.target);
                t > 0.0
                    && dot3(n, p.target) / t < -p.tol
                    && p.samples.iter().all(|s| dot3(n, *s) / norm3(*s) >= -p.tol)
            }
        }
    }
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    v.map(|x| x / n)
}

fn max_iterations(samples: usize) -> usize {
    50 * (samples + 10)
}

/// Largest `r <= 1` with `target + r d` in the cone of `columns`.
fn ray_length(columns: &DMatrix<f64>, target: [f64; 3], d: [f64; 3]) -> Result<f64, LpError> {
    let m = columns.ncols();
    // Variables: lambda (m), r, s with r + s = 1.
    let mut a = DMatrix::zeros(4, m + 2);
    a.view_mut((0, 0), (3, m)).copy_from(columns);
    for k in 0..3 {
        a[(k, m)] = -d[k];
    }
    a[(3, m)] = 1.0;
    a[(3, m + 1)] = 1.0;
    let b = DVector::from_vec(vec![target[0], target[1], target[2], 1.0]);
    let mut c = DVector::zeros(m + 2);
    c[m] = 1.0;
    match lp::simplex(&a, &b, &c, max_iterations(m)) {
        Ok(sol) => Ok(sol.x[m].clamp(0.0, 1.0)),
        Err(LpError::Infeasible) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Decides whether the target lies in the open cone spanned by the samples.
/// Vectors are normalized first, so the verdict is invariant under positive
/// rescaling of the target or of any sample.
pub fn cone_membership(p: &ConeProblem) -> Result<ConeVerdict, ExtensionError> {
    let m = p.samples.len();
    let columns = DMatrix::from_fn(3, m, |i, j| unit(p.samples[j])[i]);
    let t_norm = norm3(p.target);
    if t_norm <= p.tol {
        return Ok(ConeVerdict {
            status: ConeStatus::Boundary,
            coefficients: Some(vec![0.0; m]),
            normal: None,
            margin: 0.0,
            residual: t_norm,
        });
    }
    let t = unit(p.target);
    let sol = lp::nnls(&columns, &DVector::from_column_slice(&t), max_iterations(m))
        .map_err(ExtensionError::NumericalFailure)?;
    let projection = &columns * &sol.x;
    if sol.residual > p.tol {
        let n = unit([projection[0] - t[0], projection[1] - t[1], projection[2] - t[2]]);
        return Ok(ConeVerdict {
            status: ConeStatus::Outside,
            coefficients: None,
            normal: Some(n),
            margin: 0.0,
            residual: sol.residual,
        });
    }
    let mut margin = f64::INFINITY;
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut d = [0.0; 3];
            d[axis] = sign;
            let r = ray_length(&columns, t, d).map_err(ExtensionError::NumericalFailure)?;
            margin = margin.min(r);
        }
    }
    let coefficients = sol
        .x
        .iter()
        .zip(&p.samples)
        .map(|(l, s)| l * t_norm / norm3(*s))
        .collect();
    Ok(ConeVerdict {
        status: if margin > p.tol {
            ConeStatus::Inside
        } else {
            ConeStatus::Boundary
        },
        coefficients: Some(coefficients),
        normal: None,
        margin,
        residual: sol.residual,
    })
}

/// Region of the disk given by sampling curvature over chart grids.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPiece {
    pub form: ConnectionForm,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionProblem {
    /// The germ near the boundary circle.
    pub germ: ConnectionForm,
    /// The boundary circle, oriented as the boundary of the disk.
    pub boundary: Loop,
    /// Grid on a collar of the boundary for the criterion check.
    pub annulus: GridSpec,
    /// Sampling of the region whose curvature cone decides the extension.
    pub region: Vec<RegionPiece>,
    pub n_quad: usize,
    /// Number of boundary directions used for the injectivity check.
    pub n_directions: usize,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExtensionVerdict {
    Extendable,
    NotExtendable,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub verdict: ExtensionVerdict,
    pub reason: String,
    #[serde(serialize_with = "report::fixed3")]
    pub loop_integral: [f64; 3],
    /// Smallest angle between non-adjacent boundary directions divided by the
    /// largest adjacent step; values above 1 indicate an embedded curve.
    #[serde(serialize_with = "report::fixed")]
    pub injectivity_ratio: f64,
    #[serde(serialize_with = "report::fixed_opt")]
    pub annulus_min_margin: Option<f64>,
    pub sample_count: usize,
    pub cone: Option<ConeVerdict>,
    pub certificate_verified: bool,
}

fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = dot3(a, b) / (norm3(a) * norm3(b));
    c.clamp(-1.0, 1.0).acos()
}

/// Ratio of the smallest separation between cyclically non-adjacent
/// directions to the largest step between adjacent ones.
pub fn injectivity_ratio(directions: &[[f64; 3]]) -> f64 {
    let n = directions.len();
    if n < 4 {
        return 0.0;
    }
    let max_step = (0..n)
        .map(|i| angle(directions[i], directions[(i + 1) % n]))
        .fold(0.0, f64::max);
    let mut min_sep = f64::INFINITY;
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            min_sep = min_sep.min(angle(directions[i], directions[j]));
        }
    }
    if max_step == 0.0 {
        0.0
    } else {
        min_sep / max_step
    }
}

pub fn decide_extension(problem: &ExtensionProblem) -> Result<ExtensionReport, ExtensionError> {
    let crit = criterion_grid(&problem.germ, &problem.annulus, problem.tol)?;
    if !problem.germ.algebra.is_abelian() {
        return Err(ConnectionError::NotAbelian.into());
    }
    if !crit.holds_everywhere {
        let first = crit.failures[0];
        let pt = &crit.points[first];
        let why = pt
            .error
            .clone()
            .or_else(|| pt.result.as_ref().and_then(|r| r.reason.clone()))
            .unwrap_or_default();
        return Err(ExtensionError::CriterionFailure(format!("at {:?}: {why}", pt.coords)));
    }

    let n = problem.n_directions.max(4);
    let directions = (0..n)
        .map(|k| {
            let t = problem.boundary.t0 + problem.boundary.period * k as f64 / n as f64;
            let p = problem.boundary.point(t)?;
            cartan_criterion_abelian(&problem.germ, &p, problem.tol)?;
            Ok(problem.germ.curvature_density(&p)?)
        })
        .collect::<Result<Vec<_>, ExtensionError>>()?;
    let inj = injectivity_ratio(&directions);

    let integral = loop_integral(&problem.germ, &problem.boundary, problem.n_quad)?;

    let mut samples = Vec::new();
    for piece in &problem.region {
        let vals = piece
            .grid
            .points()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|p| piece.form.curvature_density(p))
            .collect::<Result<Vec<_>, _>>()?;
        samples.extend(vals);
    }

    let base = ExtensionReport {
        verdict: ExtensionVerdict::Indeterminate,
        reason: String::new(),
        loop_integral: integral,
        injectivity_ratio: inj,
        annulus_min_margin: crit.min_margin,
        sample_count: samples.len(),
        cone: None,
        certificate_verified: false,
    };
    if inj <= 1.0 {
        return Ok(ExtensionReport {
            reason: "boundary curvature directions are not clearly injective".into(),
            ..base
        });
    }
    let cone_problem = ConeProblem::new(samples, integral, problem.tol)?;
    let cone = cone_membership(&cone_problem)?;
    let verified = cone.verify(&cone_problem);
    let (verdict, reason) = match cone.status {
        ConeStatus::Inside => (ExtensionVerdict::Extendable, "loop integral lies inside the curvature cone"),
        ConeStatus::Outside => (ExtensionVerdict::NotExtendable, "loop integral is separated from the curvature cone"),
        ConeStatus::Boundary => (ExtensionVerdict::Indeterminate, "loop integral lies on the boundary of the curvature cone"),
    };
    Ok(ExtensionReport {
        verdict,
        reason: reason.into(),
        cone: Some(cone),
        certificate_verified: verified,
        ..base
    })
}

/// Grid resolution for the punctured-sphere family problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapSampling {
    pub theta_steps: usize,
    pub z_steps: usize,
    /// The band chart covers `h <= z <= z_top`; a square in the upper
    /// hemisphere chart covers the polar cap above it.
    pub z_top: f64,
    pub polar_steps: usize,
}

impl Default for CapSampling {
    fn default() -> Self {
        CapSampling {
            theta_steps: 48,
            z_steps: 24,
            z_top: 0.9,
            polar_steps: 5,
        }
    }
}

/// The extension problem for the spherical cap `z >= h` with the germ of the
/// family of forms with parameter `alpha` along its boundary circle.
pub fn cext_problem(alpha: f64, h: f64, n_quad: usize, sampling: CapSampling, tol: f64) -> Result<ExtensionProblem, ExtensionError> {
    if !(h > -1.0 && h < sampling.z_top) {
        return Err(ExtensionError::NonFinite("cap height"));
    }
    let germ = BuiltinForm::CextFamily {
        alpha,
        chart: SphereChart::Band,
    }
    .form();
    let collar = 0.05f64.min((1.0 - h.abs()) / 2.0);
    let annulus = GridSpec::new(vec![0.0, h - collar], vec![TAU, h + collar], vec![32, 3])
        .map_err(|e| ExtensionError::CriterionFailure(e.to_string()))?
        .with_half_open(0);
    let band = GridSpec::new(vec![0.0, h], vec![TAU, sampling.z_top], vec![sampling.theta_steps, sampling.z_steps])
        .map_err(|e| ExtensionError::CriterionFailure(e.to_string()))?
        .with_half_open(0);
    // The square of half-width s lies inside the disk x^2 + y^2 < 1 - z_top^2.
    let s = ((1.0 - sampling.z_top * sampling.z_top) / 2.0).sqrt() * 0.95;
    let polar = GridSpec::cube(2, -s, s, sampling.polar_steps).map_err(|e| ExtensionError::CriterionFailure(e.to_string()))?;
    let mut region = vec![RegionPiece {
        form: BuiltinForm::SphereAbelian(SphereChart::Band).form(),
        grid: band,
    }];
    if sampling.polar_steps > 0 {
        region.push(RegionPiece {
            form: BuiltinForm::SphereAbelian(SphereChart::Upper).form(),
            grid: polar,
        });
    }
    Ok(ExtensionProblem {
        germ,
        boundary: Loop::latitude(h),
        annulus,
        region,
        n_quad,
        n_directions: 64,
        tol,
    })
}

/// The closed form of the boundary integral for the family.
pub fn cext_expected_integral(alpha: f64, h: f64) -> [f64; 3] {
    [0.0, 0.0, TAU * (1.0 - h * h + alpha)]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecisionRow {
    #[serde(serialize_with = "report::fixed")]
    pub alpha: f64,
    #[serde(serialize_with = "report::fixed")]
    pub h: f64,
    pub verdict: ExtensionVerdict,
    #[serde(serialize_with = "report::fixed3")]
    pub loop_integral: [f64; 3],
    #[serde(serialize_with = "report::fixed3")]
    pub expected_integral: [f64; 3],
    pub certificate_verified: bool,
    pub report: ExtensionReport,
}

pub fn cext_decision_table(
    alpha: f64,
    heights: &[f64],
    n_quad: usize,
    sampling: CapSampling,
    tol: f64,
) -> Result<Vec<DecisionRow>, ExtensionError> {
    heights
        .par_iter()
        .map(|&h| {
            let report = decide_extension(&cext_problem(alpha, h, n_quad, sampling, tol)?)?;
            Ok(DecisionRow {
                alpha,
                h,
                verdict: report.verdict,
                loop_integral: report.loop_integral,
                expected_integral: cext_expected_integral(alpha, h),
                certificate_verified: report.certificate_verified,
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{LieAlgebra3, SurfaceChart};
    use crate::expr::parse;

    fn abelian(a: [&str; 3], b: [&str; 3]) -> ConnectionForm {
        let p = |s: [&str; 3]| [parse(s[0]).unwrap(), parse(s[1]).unwrap(), parse(s[2]).unwrap()];
        ConnectionForm::new(LieAlgebra3::abelian(), SurfaceChart::plane(), p(a), p(b)).unwrap()
    }

    #[test]
    fn loop_integral_examples() {
        let w = abelian(["0"; 3], ["x", "0", "0"]);
        let v = loop_integral(&w, &Loop::unit_circle(), 256).unwrap();
        assert!((v[0] - std::f64::consts::PI).abs() < 1e-8 && v[1] == 0.0 && v[2] == 0.0);
        let exact = abelian(["1", "0", "0"], ["0"; 3]);
        let v = loop_integral(&exact, &Loop::unit_circle(), 256).unwrap();
        assert!(v[0].abs() < 1e-10);
        assert_eq!(loop_integral(&w, &Loop::unit_circle(), 4).unwrap_err(), ExtensionError::TooFewQuadraturePoints(4));
    }

    #[test]
    fn cext_loop_integral() {
        let h = 0.5;
        let w = BuiltinForm::CextFamily { alpha: -2.0, chart: SphereChart::Band }.form();
        let v = loop_integral(&w, &Loop::latitude(h), 256).unwrap();
        let want = cext_expected_integral(-2.0, h);
        assert!((want[2] + 2.5 * std::f64::consts::PI).abs() < 1e-15);
        for k in 0..3 {
            assert!((v[k] - want[k]).abs() < 1e-9, "{v:?}");
        }
    }

    #[test]
    fn cone_examples() {
        let pm = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let p = ConeProblem::new(pm.clone(), [1.0, 1.0, 1.0], 1e-9).unwrap();
        let v = cone_membership(&p).unwrap();
        assert_eq!(v.status, ConeStatus::Inside);
        assert!(v.verify(&p));

        let upper = vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.5], [0.0, 1.0, 2.0], [0.0, -1.0, 0.0]];
        let p = ConeProblem::new(upper, [0.0, 0.0, -1.0], 1e-9).unwrap();
        let v = cone_membership(&p).unwrap();
        assert_eq!(v.status, ConeStatus::Outside);
        let n = v.normal.unwrap();
        assert!((n[0]).abs() < 1e-12 && n[1].abs() < 1e-12 && (n[2] - 1.0).abs() < 1e-12);
        assert!(v.verify(&p));

        let p = ConeProblem::new(pm, [2.0, 0.0, 0.0], 1e-9).unwrap();
        let v = cone_membership(&p).unwrap();
        assert_eq!(v.status, ConeStatus::Inside);
        assert_eq!(v.coefficients.as_deref(), Some(&[2.0, 0.0, 0.0, 0.0, 0.0, 0.0][..]));
    }

    #[test]
    fn cone_boundary_cases() {
        let orthant = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let p = ConeProblem::new(orthant.clone(), [1.0, 1.0, 0.0], 1e-9).unwrap();
        let v = cone_membership(&p).unwrap();
        assert_eq!(v.status, ConeStatus::Boundary);
        assert!(v.verify(&p));
        let p = ConeProblem::new(orthant.clone(), [1.0, 2.0, 3.0], 1e-9).unwrap();
        let v = cone_membership(&p).unwrap();
        assert_eq!(v.status, ConeStatus::Inside);
        assert!(v.margin > 0.1);
        assert!(matches!(
            ConeProblem::new(vec![[0.0; 3]], [1.0, 0.0, 0.0], 1e-9),
            Err(ExtensionError::DegenerateSample { index: 0, .. })
        ));
    }

    #[test]
    fn injectivity_of_circles() {
        let circle: Vec<[f64; 3]> = (0..64)
            .map(|k| {
                let t = TAU * k as f64 / 64.0;
                [t.cos(), t.sin(), 0.5]
            })
            .collect();
        assert!(injectivity_ratio(&circle) > 1.5);
        let doubled: Vec<[f64; 3]> = (0..64)
            .map(|k| {
                let t = 2.0 * TAU * k as f64 / 64.0;
                [t.cos(), t.sin(), 0.5]
            })
            .collect();
        assert!(injectivity_ratio(&doubled) < 1e-6);
    }

    #[test]
    fn cext_table() {
        let rows = cext_decision_table(-2.0, &[0.5, 0.25, 0.0, -0.25, -0.5], 256, CapSampling::default(), 1e-9).unwrap();
        let verdicts: Vec<_> = rows.iter().map(|r| r.verdict).collect();
        use ExtensionVerdict::*;
        assert_eq!(verdicts, vec![NotExtendable, NotExtendable, NotExtendable, Extendable, Extendable]);
        assert!(rows.iter().all(|r| r.certificate_verified));
    }
}
