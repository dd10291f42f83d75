//! Strategies and property checks shared by the property tests and the
//! acceptance suite.
#![allow(dead_code)]

use cartan_core::certify::{certify_grid, levi_data, GraphDistribution, GridSpec};
use cartan_core::connections::{
    cartan_criterion_algebra, suspend, ConnectionForm, GroupModel, LieAlgebra3, SuspensionSpec, SurfaceChart,
};
use cartan_core::expr::{fd_partial, parse, Expr, Number};
use cartan_core::extension::{cone_membership, ConeProblem, ConeStatus};
use cartan_core::fields::{
    cartan_determinant, fd_bracket, growth_vector, lie_bracket, BracketFrame, Distribution2, VectorField,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const TOL: f64 = 1e-9;

// ---------------------------------------------------------------- strategies

pub fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

/// Smooth expressions in `x1..x5` built from polynomials and trigonometric
/// functions, with divisions only by `1 + a^2` so they are defined everywhere.
pub fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => (0usize..5).prop_map(Expr::var),
        1 => (-3i64..=3).prop_map(Expr::int),
        1 => (-4i64..=4, 1i64..=3).prop_map(|(a, b)| Expr::num(Number::ratio(a, b))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            inner.clone().prop_map(|a| a.neg()),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            (inner.clone(), 2i32..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.div(&Expr::one().add(&a.mul(&a)))),
        ]
    })
}

fn monomial(vars: usize) -> impl Strategy<Value = Expr> {
    (-4i64..=4, prop::collection::vec(0..vars, 0..=3)).prop_map(|(c, factors)| {
        factors
            .into_iter()
            .fold(Expr::num(Number::ratio(c, 2)), |acc, v| acc.mul(&Expr::var(v)))
    })
}

/// Sparse polynomials of degree at most 3 in `x1..x{vars}` with coefficients
/// in `[-2, 2]`.
pub fn poly(vars: usize) -> impl Strategy<Value = Expr> {
    prop::collection::vec(monomial(vars), 0..=4).prop_map(|ms| ms.iter().fold(Expr::zero(), |acc, m| acc.add(m)))
}

pub fn poly3(vars: usize) -> impl Strategy<Value = [Expr; 3]> {
    (poly(vars), poly(vars), poly(vars)).prop_map(|(a, b, c)| [a, b, c])
}

pub fn graph_distribution() -> impl Strategy<Value = GraphDistribution> {
    (poly3(5), poly3(5)).prop_map(|(a, b)| GraphDistribution::new(a, b).expect("5-chart polynomials"))
}

pub fn poly_field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(poly(5), 5).prop_map(|c| VectorField::new(c).expect("5 components"))
}

/// Constant invertible 2x2 matrices with entries in `[-2, 2]` and `|det| >= 0.25`.
pub fn frame_matrix() -> impl Strategy<Value = [f64; 4]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
        .prop_filter("well-conditioned", |m| (m[0] * m[3] - m[1] * m[2]).abs() >= 0.25)
}

/// Invertible 5x5 matrices `P D S`: a permutation, a diagonal scaling with
/// entries of modulus in `[0.5, 2]`, and a single shear.
pub fn linear_map() -> impl Strategy<Value = DMatrix<f64>> {
    (
        Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
        prop::collection::vec((0.5f64..2.0, any::<bool>()), 5),
        (0usize..5, 0usize..5, -1.0f64..1.0),
    )
        .prop_map(|(perm, diag, (i, j, s))| {
            let p = DMatrix::from_fn(5, 5, |r, c| if perm[r] == c { 1.0 } else { 0.0 });
            let d = DMatrix::from_fn(5, 5, |r, c| {
                if r == c {
                    let (m, neg) = diag[r];
                    if neg { -m } else { m }
                } else {
                    0.0
                }
            });
            let mut shear = DMatrix::identity(5, 5);
            if i != j {
                shear[(i, j)] = s;
            }
            p * d * shear
        })
}

pub fn sample_vector() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_filter("norm above 0.1", |v| norm(v) > 0.1)
}

pub fn cone_problem() -> impl Strategy<Value = ConeProblem> {
    (prop::collection::vec(sample_vector(), 1..12), sample_vector())
        .prop_map(|(s, t)| ConeProblem::new(s, t, TOL).expect("valid cone problem"))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// -------------------------------------------------------------------- checks

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn check_fd_vs_symbolic(e: &Expr, var: usize, p: &[f64]) -> Result<(), TestCaseError> {
    let exact = e.differentiate(var).eval(p).expect("smooth expression");
    let fd = fd_partial(e, var, p, 1e-5).expect("smooth expression");
    prop_assert!(
        close(fd, exact, 1e-6 * (1.0 + exact.abs())),
        "d/dx{} of {e}: symbolic {exact}, fd {fd}",
        var + 1
    );
    Ok(())
}

pub fn check_roundtrip(e: &Expr) -> Result<(), TestCaseError> {
    let first = parse(&e.to_string()).expect("display output parses");
    let second = parse(&first.to_string()).expect("display output parses");
    prop_assert_eq!(&first, &second);
    let p = [0.3, -0.7, 0.2, 0.9, -0.1];
    let (a, b) = (e.eval(&p).unwrap(), first.eval(&p).unwrap());
    prop_assert!(close(a, b, 1e-12 * (1.0 + a.abs())), "{e} evaluates to {a}, reparsed to {b}");
    Ok(())
}

pub fn check_commuting_partials(e: &Expr, i: usize, j: usize, p: &[f64]) -> Result<(), TestCaseError> {
    let a = e.differentiate(i).differentiate(j).eval(p).unwrap();
    let b = e.differentiate(j).differentiate(i).eval(p).unwrap();
    prop_assert!(close(a, b, 1e-9 * (1.0 + a.abs())), "{e}: {a} vs {b}");
    Ok(())
}

pub fn check_antisymmetry(x: &VectorField, y: &VectorField, p: &[f64]) -> Result<(), TestCaseError> {
    let xy = lie_bracket(x, y).unwrap().eval(p).unwrap();
    let yx = lie_bracket(y, x).unwrap().eval(p).unwrap();
    for (a, b) in xy.iter().zip(&yx) {
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    Ok(())
}

pub fn check_jacobi(x: &VectorField, y: &VectorField, z: &VectorField, p: &[f64]) -> Result<(), TestCaseError> {
    let br = |a: &VectorField, b: &VectorField| lie_bracket(a, b).unwrap();
    let t1 = br(x, &br(y, z)).eval(p).unwrap();
    let t2 = br(y, &br(z, x)).eval(p).unwrap();
    let t3 = br(z, &br(x, y)).eval(p).unwrap();
    for k in 0..5 {
        let scale = 1.0 + t1[k].abs() + t2[k].abs() + t3[k].abs();
        prop_assert!((t1[k] + t2[k] + t3[k]).abs() <= 1e-9 * scale, "component {k}");
    }
    Ok(())
}

pub fn check_bracket_vs_fd(x: &VectorField, y: &VectorField, p: &[f64]) -> Result<(), TestCaseError> {
    let exact = lie_bracket(x, y).unwrap().eval(p).unwrap();
    let fd = fd_bracket(x, y, p, 1e-5).unwrap();
    let scale = 1.0 + norm(&exact);
    let err = norm(&exact.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
    prop_assert!(err <= 1e-6 * scale, "symbolic {exact:?} vs fd {fd:?}");
    Ok(())
}

pub fn check_frame_invariance(g: &GraphDistribution, m: [f64; 4], p: &[f64]) -> Result<(), TestCaseError> {
    let d = g.to_distribution().unwrap();
    let c = |k: f64| Expr::num(k);
    let x2 = d.x().scale(&c(m[0])).add(&d.y().scale(&c(m[1]))).unwrap();
    let y2 = d.x().scale(&c(m[2])).add(&d.y().scale(&c(m[3]))).unwrap();
    let d2 = Distribution2::new(x2, y2).unwrap();
    let g1 = growth_vector(&d, p, TOL).unwrap();
    let g2 = growth_vector(&d2, p, TOL).unwrap();
    prop_assert_eq!(g1.ranks, g2.ranks);
    Ok(())
}

pub fn check_linear_invariance(g: &GraphDistribution, m: &DMatrix<f64>, p: &[f64]) -> Result<(), TestCaseError> {
    let d = g.to_distribution().unwrap();
    let d2 = Distribution2::new(
        d.x().pushforward_linear(m).expect("invertible"),
        d.y().pushforward_linear(m).expect("invertible"),
    )
    .unwrap();
    let q: Vec<f64> = (m * nalgebra::DVector::from_column_slice(p)).iter().copied().collect();
    let g1 = growth_vector(&d, p, TOL).unwrap();
    let g2 = growth_vector(&d2, &q, TOL).unwrap();
    prop_assert_eq!(g1.ranks, g2.ranks);
    Ok(())
}

pub fn check_oracle_equivalence(g: &GraphDistribution, p: &[f64]) -> Result<(), TestCaseError> {
    let levi = levi_data(g, p, TOL).unwrap();
    let d = g.to_distribution().unwrap();
    let growth = growth_vector(&d, p, TOL).unwrap();
    prop_assert_eq!(levi.is_cartan, growth.is_cartan(), "levi {:?} growth {:?}", levi, growth.ranks);
    let det5 = cartan_determinant(&d, p).unwrap();
    let scale = 1e-9 * (1.0 + levi.det.abs());
    prop_assert!(close(levi.det.abs(), det5.abs(), scale), "{} vs {}", levi.det, det5);
    let frame = BracketFrame::new(&d);
    for f in &frame.fields()[2..] {
        let v = f.eval(p).unwrap();
        prop_assert!(v[0] == 0.0 && v[1] == 0.0);
    }
    Ok(())
}

/// Adds `c * prod (x_k - p_k)` over the given factors to a component.
fn bump(e: &Expr, coef: f64, factors: &[usize], p: &[f64]) -> Expr {
    let term = factors.iter().fold(Expr::num(coef), |acc, &k| {
        acc.mul(&Expr::var(k).sub(&Expr::num(p[k])))
    });
    e.add(&term)
}

fn perturbed(g: &GraphDistribution, order: usize, coefs: &[f64; 6], vars: &[usize], p: &[f64]) -> GraphDistribution {
    let factors: Vec<usize> = (0..order).map(|i| vars[i % vars.len()]).collect();
    let a = [0, 1, 2].map(|i| bump(&g.a[i], coefs[i], &factors, p));
    let b = [0, 1, 2].map(|i| bump(&g.b[i], coefs[3 + i], &factors, p));
    GraphDistribution::new(a, b).unwrap()
}

/// `c` sees only the 1-jet at `p`, `d` and `e` only the 2-jet.
pub fn check_jet_locality(
    g: &GraphDistribution,
    coefs: [f64; 6],
    vars: [usize; 3],
    p: &[f64],
) -> Result<(), TestCaseError> {
    let base = levi_data(g, p, TOL).unwrap();
    let second = levi_data(&perturbed(g, 2, &coefs, &vars, p), p, TOL).unwrap();
    let third = levi_data(&perturbed(g, 3, &coefs, &vars, p), p, TOL).unwrap();
    let same = |u: [f64; 3], v: [f64; 3]| (0..3).all(|k| close(u[k], v[k], 1e-9 * (1.0 + u[k].abs())));
    prop_assert!(same(base.c, second.c), "c changed under a 2nd-order perturbation");
    prop_assert!(same(base.c, third.c), "c changed under a 3rd-order perturbation");
    prop_assert!(same(base.d, third.d), "d changed under a 3rd-order perturbation");
    prop_assert!(same(base.e, third.e), "e changed under a 3rd-order perturbation");
    Ok(())
}

/// For `a, b` depending on `x1, x2` only, `c = b_1 - a_2`.
pub fn check_leading_terms(a: [Expr; 3], b: [Expr; 3], p: &[f64]) -> Result<(), TestCaseError> {
    let g = GraphDistribution::new(a.clone(), b.clone()).unwrap();
    let levi = levi_data(&g, p, TOL).unwrap();
    for k in 0..3 {
        let b1 = fd_partial(&b[k], 0, p, 1e-5).unwrap();
        let a2 = fd_partial(&a[k], 1, p, 1e-5).unwrap();
        prop_assert!(close(levi.c[k], b1 - a2, 1e-7 * (1.0 + levi.c[k].abs())), "component {k}");
    }
    Ok(())
}

pub fn check_cone_certificate(p: &ConeProblem) -> Result<(), TestCaseError> {
    let v = cone_membership(p).unwrap();
    prop_assert!(v.verify(p), "{:?} certificate fails for {:?}", v.status, p);
    Ok(())
}

pub fn check_cone_monotone(p: &ConeProblem, extra: &[[f64; 3]]) -> Result<(), TestCaseError> {
    let before = cone_membership(p).unwrap();
    let mut samples = p.samples.clone();
    samples.extend_from_slice(extra);
    let bigger = ConeProblem::new(samples, p.target, p.tol).unwrap();
    let after = cone_membership(&bigger).unwrap();
    if before.status == ConeStatus::Inside {
        prop_assert_eq!(after.status, ConeStatus::Inside);
    }
    if before.status != ConeStatus::Outside {
        prop_assert_ne!(after.status, ConeStatus::Outside);
    }
    Ok(())
}

pub fn check_cone_scale(p: &ConeProblem, s: f64) -> Result<(), TestCaseError> {
    let scaled = ConeProblem::new(
        p.samples.iter().map(|v| v.map(|x| x * s)).collect(),
        p.target.map(|x| x * s),
        p.tol,
    )
    .unwrap();
    prop_assert_eq!(cone_membership(p).unwrap().status, cone_membership(&scaled).unwrap().status);
    Ok(())
}

pub fn check_thread_determinism(g: &GraphDistribution) -> Result<(), TestCaseError> {
    let d = g.to_distribution().unwrap();
    let grid = GridSpec::cube(5, -1.0, 1.0, 2).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| certify_grid(&d, &grid, TOL).unwrap())
    };
    let one = run(1);
    let four = run(4);
    prop_assert_eq!(one.to_json(), four.to_json());
    prop_assert_eq!(one.to_csv(), four.to_csv());
    Ok(())
}

fn abelian_form(a: [Expr; 3], b: [Expr; 3]) -> ConnectionForm {
    ConnectionForm::new(LieAlgebra3::abelian(), SurfaceChart::plane(), a, b).unwrap()
}

/// Adding `d phi` leaves the abelian curvature unchanged.
pub fn check_curvature_additivity(a: [Expr; 3], b: [Expr; 3], phi: [Expr; 3], p: &[f64]) -> Result<(), TestCaseError> {
    let base = abelian_form(a, b);
    let exact = abelian_form(phi.clone().map(|f| f.differentiate(0)), phi.map(|f| f.differentiate(1)));
    let sum = base.plus(&exact);
    let (f0, f1) = (base.curvature(p).unwrap(), sum.curvature(p).unwrap());
    for k in 0..3 {
        prop_assert!(close(f0[k], f1[k], 1e-12 * (1.0 + f0[k].abs())));
    }
    Ok(())
}

/// The suspension's Cartan determinant equals `eps^w det(criterion columns)`
/// with `w = 3` (abelian) or `4` (Heisenberg).
pub fn check_suspension_leading_term(
    form: &ConnectionForm,
    model: GroupModel,
    eps: f64,
    p5: &[f64],
) -> Result<(), TestCaseError> {
    let crit = cartan_criterion_algebra(form, &p5[..2], TOL).unwrap();
    let d = suspend(&SuspensionSpec::new(form.clone(), eps, model).unwrap()).unwrap();
    let det5 = cartan_determinant(&d, p5).unwrap();
    let w = if model == GroupModel::Abelian { 3 } else { 4 };
    let want = eps.powi(w) * crit.det;
    let scale: f64 = crit.columns.iter().map(|c| norm(c)).product::<f64>() * eps.powi(w);
    prop_assert!(close(det5, want, 1e-9 * (scale + want.abs()) + 1e-300), "{det5} vs {want}");
    Ok(())
}

pub fn algebra_form(alg: LieAlgebra3) -> impl Strategy<Value = ConnectionForm> {
    (poly3(2), poly3(2)).prop_map(move |(a, b)| {
        ConnectionForm::new(alg.clone(), SurfaceChart::plane(), a, b).unwrap()
    })
}

pub fn field_triple() -> impl Strategy<Value = (VectorField, VectorField, VectorField)> {
    (poly_field(), poly_field(), poly_field())
}
