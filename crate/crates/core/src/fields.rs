//! Vector fields on coordinate charts, Lie brackets and growth vectors.
//!
//! The bracket convention throughout is `[X, Y] = X(Y) - Y(X)`, i.e.
//! `[X, Y]^k = sum_i X^i d_i Y^k - Y^i d_i X^k`.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{fd_partial, parse, EvalError, Expr, ExprError};
use crate::linalg;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 5;

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("chart dimension {0} is outside {MIN_DIM}..={MAX_DIM}")]
    InvalidDimension(usize),
    #[error("a rank-two distribution needs a {MAX_DIM}-dimensional chart, got {0}")]
    DistributionDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("component {component} references x{} on a {dim}-dimensional chart", .var + 1)]
    VariableOutsideChart {
        component: usize,
        var: usize,
        dim: usize,
    },
    #[error("X and Y are linearly dependent at {point:?}")]
    DegenerateFrame { point: Vec<f64> },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self, FieldError> {
        let dim = components.len();
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(FieldError::InvalidDimension(dim));
        }
        for (component, e) in components.iter().enumerate() {
            if let Some(var) = e.max_var().filter(|&v| v >= dim) {
                return Err(FieldError::VariableOutsideChart { component, var, dim });
            }
        }
        Ok(VectorField { components })
    }

    pub fn parse(components: &[&str]) -> Result<Self, FieldError> {
        let exprs = components.iter().map(|c| parse(c)).collect::<Result<Vec<_>, _>>()?;
        VectorField::new(exprs)
    }

    pub fn zero(dim: usize) -> Result<Self, FieldError> {
        VectorField::new(vec![Expr::zero(); dim])
    }

    /// The coordinate field along the zero-based `axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Result<Self, FieldError> {
        let components = (0..dim)
            .map(|k| if k == axis { Expr::one() } else { Expr::zero() })
            .collect();
        VectorField::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Expr {
        &self.components[k]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    /// Directional derivative `X(f) = sum_i X^i d_i f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.components
            .iter()
            .enumerate()
            .fold(Expr::zero(), |acc, (i, xi)| acc.add(&xi.mul(&f.differentiate(i))))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        check_dims(self, other)?;
        Ok(VectorField {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn scale(&self, factor: &Expr) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| factor.mul(c)).collect(),
        }
    }

    /// Push-forward along the linear change of coordinates `y = M x`:
    /// `(M_* X)(y) = M X(M^{-1} y)`. `None` if `M` is singular or of the wrong size.
    pub fn pushforward_linear(&self, m: &DMatrix<f64>) -> Option<VectorField> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return None;
        }
        let inv = m.clone().try_inverse()?;
        let old_coords: Vec<Expr> = (0..n)
            .map(|j| {
                (0..n).fold(Expr::zero(), |acc, k| acc.add(&Expr::num(inv[(j, k)]).mul(&Expr::var(k))))
            })
            .collect();
        let pulled: Vec<Expr> = self.components.iter().map(|c| c.substitute(&old_coords)).collect();
        let components = (0..n)
            .map(|k| (0..n).fold(Expr::zero(), |acc, j| acc.add(&Expr::num(m[(k, j)]).mul(&pulled[j]))))
            .collect();
        Some(VectorField { components })
    }
}

fn check_dims(x: &VectorField, y: &VectorField) -> Result<(), FieldError> {
    if x.dim() != y.dim() {
        return Err(FieldError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

/// Symbolic Lie bracket `[X, Y]`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    check_dims(x, y)?;
    let components = (0..x.dim())
        .map(|k| x.apply(y.component(k)).sub(&y.apply(x.component(k))))
        .collect();
    Ok(VectorField { components })
}

/// The bracket formula evaluated at `point` with central differences in
/// place of symbolic derivatives.
pub fn fd_bracket(x: &VectorField, y: &VectorField, point: &[f64], h: f64) -> Result<Vec<f64>, FieldError> {
    check_dims(x, y)?;
    let n = x.dim();
    if point.len() != n {
        return Err(FieldError::DimensionMismatch {
            left: n,
            right: point.len(),
        });
    }
    let xv = x.eval(point)?;
    let yv = y.eval(point)?;
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            acc += xv[i] * fd_partial(y.component(k), i, point, h)?;
            acc -= yv[i] * fd_partial(x.component(k), i, point, h)?;
        }
        *slot = acc;
    }
    Ok(out)
}

/// A rank-two distribution on a 5-chart, presented by a spanning pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution2 {
    x: VectorField,
    y: VectorField,
}

impl Distribution2 {
    pub fn new(x: VectorField, y: VectorField) -> Result<Self, FieldError> {
        check_dims(&x, &y)?;
        if x.dim() != MAX_DIM {
            return Err(FieldError::DistributionDimension(x.dim()));
        }
        Ok(Distribution2 { x, y })
    }

    pub fn parse(x: &[&str], y: &[&str]) -> Result<Self, FieldError> {
        Distribution2::new(VectorField::parse(x)?, VectorField::parse(y)?)
    }

    pub fn x(&self) -> &VectorField {
        &self.x
    }

    pub fn y(&self) -> &VectorField {
        &self.y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthVector {
    /// Ranks of `{X,Y}`, `{X,Y,[X,Y]}` and the full five-column span.
    pub ranks: [usize; 3],
    pub tol: f64,
}

impl GrowthVector {
    pub fn is_cartan(&self) -> bool {
        self.ranks == [2, 3, 5]
    }
}

/// Evaluation of the five bracket columns at one point.
#[derive(Clone, Debug)]
pub struct FrameSample {
    pub growth: GrowthVector,
    pub determinant: f64,
    /// Product of the column norms.
    pub scale: f64,
    pub columns: DMatrix<f64>,
}

/// The symbolic fields `X, Y, [X,Y], [X,[X,Y]], [Y,[X,Y]]`, built once and
/// evaluated at many points.
#[derive(Clone, Debug)]
pub struct BracketFrame {
    fields: [VectorField; 5],
}

impl BracketFrame {
    pub fn new(d: &Distribution2) -> Self {
        let x = d.x.clone();
        let y = d.y.clone();
        let xy = lie_bracket(&x, &y).expect("distribution fields share a chart");
        let x_xy = lie_bracket(&x, &xy).expect("same chart");
        let y_xy = lie_bracket(&y, &xy).expect("same chart");
        BracketFrame {
            fields: [x, y, xy, x_xy, y_xy],
        }
    }

    pub fn fields(&self) -> &[VectorField; 5] {
        &self.fields
    }

    pub fn matrix(&self, point: &[f64]) -> Result<DMatrix<f64>, FieldError> {
        if point.len() != MAX_DIM {
            return Err(FieldError::DimensionMismatch {
                left: MAX_DIM,
                right: point.len(),
            });
        }
        let columns = self.fields.iter().map(|f| f.eval(point)).collect::<Result<Vec<_>, _>>()?;
        Ok(linalg::from_columns(&columns))
    }

    /// All three ranks and the determinant at `point`; no early exit.
    pub fn sample(&self, point: &[f64], tol: f64) -> Result<FrameSample, FieldError> {
        let m = self.matrix(point)?;
        let r1 = linalg::rank(&m.columns(0, 2).into_owned(), tol);
        if r1 < 2 {
            return Err(FieldError::DegenerateFrame { point: point.to_vec() });
        }
        let r2 = linalg::rank(&m.columns(0, 3).into_owned(), tol);
        let r3 = linalg::rank(&m, tol);
        Ok(FrameSample {
            growth: GrowthVector {
                ranks: [r1, r2, r3],
                tol,
            },
            determinant: linalg::determinant(&m),
            scale: linalg::hadamard_scale(&m),
            columns: m,
        })
    }
}

pub fn growth_vector(d: &Distribution2, point: &[f64], tol: f64) -> Result<GrowthVector, FieldError> {
    Ok(BracketFrame::new(d).sample(point, tol)?.growth)
}

/// Signed determinant of `(X | Y | [X,Y] | [X,[X,Y]] | [Y,[X,Y]])` at `point`.
pub fn cartan_determinant(d: &Distribution2, point: &[f64]) -> Result<f64, FieldError> {
    Ok(BracketFrame::new(d).sample(point, DEFAULT_RANK_TOL)?.determinant)
}

/// The Monge normal form `X = d_x + p d_y + q d_p + q^2 d_z`, `Y = d_q` in
/// coordinates `(x, y, p, q, z) = (x1, .., x5)`.
pub fn monge_model() -> Distribution2 {
    Distribution2::parse(&["1", "p", "q", "0", "q^2"], &["0", "0", "0", "1", "0"]).expect("valid model")
}

/// A polynomial frame for the graded nilpotent (2,3,5) algebra:
/// `X = d1`, `Y = d2 + x1 d3 + x1^2/2 d4 + x1 x2 d5`. Its brackets are
/// `[X,Y] = d3 + x1 d4 + x2 d5`, `[X,[X,Y]] = d4`, `[Y,[X,Y]] = d5`, and all
/// brackets of length four vanish.
pub fn carnot_model() -> Distribution2 {
    Distribution2::parse(&["1", "0", "0", "0", "0"], &["0", "1", "x1", "x1^2/2", "x1*x2"]).expect("valid model")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn textbook_bracket() {
        let d1 = VectorField::coordinate(5, 0).unwrap();
        let f = VectorField::parse(&["0", "x1", "0", "0", "0"]).unwrap();
        let b = lie_bracket(&d1, &f).unwrap();
        assert_eq!(b, VectorField::coordinate(5, 1).unwrap());
        assert!(lie_bracket(&f, &f).unwrap().is_zero());
    }

    #[test]
    fn monge_bracket_matches_hand_formula() {
        let m = monge_model();
        let b = lie_bracket(m.y(), m.x()).unwrap();
        let expected = VectorField::parse(&["0", "0", "1", "0", "2*q"]).unwrap();
        for p in [[0.0, 0.0, 0.0, 0.3, 0.0], [0.1, -0.7, 0.4, -1.2, 2.0]] {
            assert_close(&b.eval(&p).unwrap(), &expected.eval(&p).unwrap(), 0.0);
        }
        let fd = fd_bracket(m.y(), m.x(), &[0.0, 0.0, 0.0, 0.3, 0.0], 1e-5).unwrap();
        assert_close(&fd, &[0.0, 0.0, 1.0, 0.0, 0.6], 1e-6);
    }

    #[test]
    fn fd_bracket_of_self_vanishes() {
        let f = VectorField::parse(&["sin(x2)", "x1^2", "x3*x1", "1", "exp(x5)"]).unwrap();
        let v = fd_bracket(&f, &f, &[0.3, 0.2, -0.1, 0.5, 0.7], 1e-5).unwrap();
        assert_close(&v, &[0.0; 5], 1e-10);
    }

    #[test]
    fn dimension_checks() {
        let a = VectorField::coordinate(3, 0).unwrap();
        let b = VectorField::coordinate(4, 0).unwrap();
        assert!(matches!(lie_bracket(&a, &b), Err(FieldError::DimensionMismatch { .. })));
        assert!(matches!(VectorField::zero(6), Err(FieldError::InvalidDimension(6))));
        assert!(matches!(
            VectorField::parse(&["x3", "0"]),
            Err(FieldError::VariableOutsideChart { var: 2, .. })
        ));
    }

    #[test]
    fn growth_examples() {
        let origin = [0.0; 5];
        let flat = Distribution2::parse(&["1", "0", "0", "0", "0"], &["0", "1", "0", "0", "0"]).unwrap();
        assert_eq!(growth_vector(&flat, &[0.3, 1.0, 2.0, -4.0, 0.1], 1e-9).unwrap().ranks, [2, 2, 2]);
        assert_eq!(cartan_determinant(&flat, &origin).unwrap(), 0.0);

        let contact = Distribution2::parse(&["1", "0", "0", "0", "0"], &["0", "1", "x1", "0", "0"]).unwrap();
        assert_eq!(growth_vector(&contact, &origin, 1e-9).unwrap().ranks, [2, 3, 3]);

        let monge = monge_model();
        let g = growth_vector(&monge, &origin, 1e-9).unwrap();
        assert!(g.is_cartan());
        assert!((cartan_determinant(&monge, &origin).unwrap().abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn carnot_frame_brackets() {
        let d = carnot_model();
        let frame = BracketFrame::new(&d);
        let [x, y, xy, x_xy, y_xy] = frame.fields().clone();
        let expect_xy = VectorField::parse(&["0", "0", "1", "x1", "x2"]).unwrap();
        let e4 = VectorField::coordinate(5, 3).unwrap();
        let e5 = VectorField::coordinate(5, 4).unwrap();
        let pts = [[0.0; 5], [0.4, -1.1, 0.3, 2.0, -0.5], [1.5, 0.25, -2.0, 0.0, 1.0]];
        for p in &pts {
            assert_close(&xy.eval(p).unwrap(), &expect_xy.eval(p).unwrap(), 1e-14);
            assert_close(&x_xy.eval(p).unwrap(), &e4.eval(p).unwrap(), 1e-14);
            assert_close(&y_xy.eval(p).unwrap(), &e5.eval(p).unwrap(), 1e-14);
            // Step three: every bracket of length four vanishes.
            for a in [&x, &y] {
                for b in [&x_xy, &y_xy] {
                    assert_close(&lie_bracket(a, b).unwrap().eval(p).unwrap(), &[0.0; 5], 1e-14);
                }
            }
        }
        assert_eq!(cartan_determinant(&d, &[0.0; 5]).unwrap().abs(), 1.0);
    }

    #[test]
    fn degenerate_frame_is_an_error() {
        let d = Distribution2::parse(&["1", "0", "0", "0", "0"], &["x1", "0", "0", "0", "0"]).unwrap();
        assert!(matches!(growth_vector(&d, &[0.5, 0.0, 0.0, 0.0, 0.0], 1e-9), Err(FieldError::DegenerateFrame { .. })));
        assert!(matches!(
            growth_vector(&d, &[0.0; 5], 1e-9),
            Err(FieldError::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn linear_pushforward_preserves_growth() {
        let m = DMatrix::from_row_slice(
            5,
            5,
            &[
                2.0, 1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.5, 0.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 3.0, 0.0, 1.0,
            ],
        );
        let d = monge_model();
        let pushed = Distribution2::new(
            d.x().pushforward_linear(&m).unwrap(),
            d.y().pushforward_linear(&m).unwrap(),
        )
        .unwrap();
        let p = [0.3, -0.2, 0.5, 0.1, 0.0];
        let q: Vec<f64> = (0..5).map(|i| (0..5).map(|j| m[(i, j)] * p[j]).sum()).collect();
        assert_eq!(growth_vector(&pushed, &q, 1e-9).unwrap().ranks, [2, 3, 5]);
        // Bracket columns push forward, so determinants scale by det(M).
        let ratio = cartan_determinant(&pushed, &q).unwrap() / cartan_determinant(&d, &p).unwrap();
        assert!((ratio - m.determinant()).abs() < 1e-12, "{ratio}");
    }
}
