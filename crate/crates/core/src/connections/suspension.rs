//! The epsilon-suspension of a connection form to a 2-plane field on
//! `surface x group`, in coordinates `(x, y, u1, u2, u3) = (x1, .., x5)`.

use serde::Serialize;

use super::{ConnectionError, ConnectionForm, LieAlgebra3};
use crate::certify::{certify_grid, GridSpec, StatusCounts};
use crate::expr::Expr;
use crate::fields::{cartan_determinant, Distribution2, VectorField};
use crate::report;

pub const DEFAULT_EPSILONS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Group charts with an explicit frame realizing the algebra's structure
/// constants under the vector-field bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupModel {
    /// `R^3` (or the 3-torus) with the coordinate frame.
    Abelian,
    /// Heisenberg group in exponential coordinates:
    /// `E = d1 - u2/2 d3`, `F = d2 + u1/2 d3`, `Z = d3`, so `[E,F] = Z`.
    Heisenberg,
}

impl GroupModel {
    pub fn name(self) -> &'static str {
        match self {
            GroupModel::Abelian => "abelian",
            GroupModel::Heisenberg => "heisenberg",
        }
    }

    pub fn algebra(self) -> LieAlgebra3 {
        match self {
            GroupModel::Abelian => LieAlgebra3::abelian(),
            GroupModel::Heisenberg => LieAlgebra3::heisenberg(),
        }
    }

    /// Scaling weights: `rho_eps` multiplies frame component `i` by `eps^w_i`.
    pub fn weights(self) -> [i32; 3] {
        match self {
            GroupModel::Abelian => [1, 1, 1],
            GroupModel::Heisenberg => [1, 1, 2],
        }
    }

    /// The frame as components in the group coordinates `x{offset+1}..x{offset+3}`.
    pub fn frame_components(self, offset: usize) -> [[Expr; 3]; 3] {
        let u = |i: usize| Expr::var(offset + i);
        let (zero, one) = (Expr::zero(), Expr::one());
        let half = Expr::num(crate::expr::Number::ratio(1, 2));
        match self {
            GroupModel::Abelian => [
                [one.clone(), zero.clone(), zero.clone()],
                [zero.clone(), one.clone(), zero.clone()],
                [zero.clone(), zero, one],
            ],
            GroupModel::Heisenberg => [
                [one.clone(), zero.clone(), half.mul(&u(1)).neg()],
                [zero.clone(), one.clone(), half.mul(&u(0))],
                [zero.clone(), zero, one],
            ],
        }
    }

    /// The frame as vector fields on the 3-dimensional group chart.
    pub fn frame(self) -> [VectorField; 3] {
        self.frame_components(0)
            .map(|c| VectorField::new(c.to_vec()).expect("3-dimensional frame"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuspensionSpec {
    pub form: ConnectionForm,
    pub epsilon: f64,
    pub model: GroupModel,
}

impl SuspensionSpec {
    pub fn new(form: ConnectionForm, epsilon: f64, model: GroupModel) -> Result<Self, ConnectionError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(ConnectionError::InvalidEpsilon(epsilon));
        }
        if !form.algebra.approx_eq(&model.algebra(), super::ALGEBRA_TOL) {
            return Err(ConnectionError::ModelMismatch { model: model.name() });
        }
        Ok(SuspensionSpec { form, epsilon, model })
    }
}

/// `X = d_x + rho_eps A`, `Y = d_y + rho_eps B`, with `A` and `B` read as
/// vertical fields through the model frame.
pub fn suspend(s: &SuspensionSpec) -> Result<Distribution2, ConnectionError> {
    let s = SuspensionSpec::new(s.form.clone(), s.epsilon, s.model)?;
    let frame = s.model.frame_components(2);
    let weights = s.model.weights();
    let vertical = |coeffs: &[Expr; 3]| {
        let mut out = [Expr::zero(), Expr::zero(), Expr::zero()];
        for i in 0..3 {
            let scaled = Expr::num(s.epsilon.powi(weights[i])).mul(&coeffs[i]);
            for k in 0..3 {
                out[k] = out[k].add(&scaled.mul(&frame[i][k]));
            }
        }
        out
    };
    let lift = |lead: usize, coeffs: &[Expr; 3]| {
        let mut comps = vec![Expr::zero(), Expr::zero()];
        comps[lead] = Expr::one();
        comps.extend(vertical(coeffs));
        VectorField::new(comps)
    };
    Ok(Distribution2::new(lift(0, &s.form.a)?, lift(1, &s.form.b)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    #[serde(serialize_with = "report::fixed")]
    pub epsilon: f64,
    pub all_cartan: bool,
    pub counts: StatusCounts,
    #[serde(serialize_with = "report::fixed_opt")]
    pub min_abs_det: Option<f64>,
    #[serde(serialize_with = "report::fixed_opt")]
    pub min_relative_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub model: GroupModel,
    pub grid: GridSpec,
    pub entries: Vec<SweepEntry>,
    /// Once the all-Cartan verdict is attained (scanning epsilon downward),
    /// it persists for every smaller tested epsilon.
    pub monotone: bool,
    /// Largest tested epsilon from which all smaller ones are all-Cartan.
    #[serde(serialize_with = "report::fixed_opt")]
    pub epsilon0: Option<f64>,
}

pub fn epsilon_sweep(
    form: &ConnectionForm,
    model: GroupModel,
    epsilons: &[f64],
    grid: &GridSpec,
    tol: f64,
) -> Result<SweepReport, ConnectionError> {
    let mut entries = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let d = suspend(&SuspensionSpec::new(form.clone(), epsilon, model)?)?;
        let r = certify_grid(&d, grid, tol)?;
        let min_relative_margin = r.points.iter().filter_map(|p| p.relative_margin).reduce(f64::min);
        entries.push(SweepEntry {
            epsilon,
            all_cartan: r.all_cartan(),
            counts: r.counts,
            min_abs_det: r.min_abs_det,
            min_relative_margin,
        });
    }
    let mut order: Vec<&SweepEntry> = entries.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let first = order.iter().position(|e| e.all_cartan);
    let monotone = first.is_none_or(|i| order[i..].iter().all(|e| e.all_cartan));
    let epsilon0 = order
        .iter()
        .rposition(|e| !e.all_cartan)
        .map_or(order.first().map(|e| e.epsilon), |i| order.get(i + 1).map(|e| e.epsilon));
    Ok(SweepReport {
        model,
        grid: grid.clone(),
        entries,
        monotone,
        epsilon0,
    })
}

/// `cartan_determinant(suspend(eps)) / eps^exponent` for each epsilon at a
/// point of the 5-chart.
pub fn scaled_determinants(
    form: &ConnectionForm,
    model: GroupModel,
    point: &[f64],
    epsilons: &[f64],
    exponent: i32,
) -> Result<Vec<f64>, ConnectionError> {
    epsilons
        .iter()
        .map(|&eps| {
            let d = suspend(&SuspensionSpec::new(form.clone(), eps, model)?)?;
            Ok(cartan_determinant(&d, point)? / eps.powi(exponent))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioTest {
    /// `values[k] / values[k-1]`.
    #[serde(serialize_with = "report::fixed_vec")]
    pub ratios: Vec<f64>,
    #[serde(serialize_with = "report::fixed")]
    pub rel_tol: f64,
    pub passes: bool,
}

/// Checks that a sequence has settled: every successive ratio is within
/// `rel_tol` of 1 and no value vanishes.
pub fn ratio_test(values: &[f64], rel_tol: f64) -> RatioTest {
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let passes = values.len() >= 2
        && values.iter().all(|v| *v != 0.0 && v.is_finite())
        && ratios.iter().all(|r| (r - 1.0).abs() <= rel_tol);
    RatioTest { ratios, rel_tol, passes }
}
