//! Pointwise Cartan-type certification on grids, and the graph normal form
//! `X = (1, 0, a)`, `Y = (0, 1, b)` with its Levi data `(c, d, e)`.
//!
//! For graph fields the first two components of `[X,Y]`, `[X,[X,Y]]` and
//! `[Y,[X,Y]]` vanish identically, so the 5x5 Cartan determinant equals
//! `det(c | d | e)`. With the bracket convention `[X,Y] = X(Y) - Y(X)` the
//! leading term of `c` is `b_1 - a_2`; the other common convention flips the
//! sign of `c`, `d` and `e` alike, which does not change invertibility.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::fields::{BracketFrame, Distribution2, FieldError, FrameSample, VectorField};
use crate::linalg::{self, det3, norm3};
use crate::report;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("grid has {got} axes, chart has {expected}")]
    BoxDimension { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An equally spaced grid on a box. Closed axes include both endpoints;
/// half-open axes (used for periodic coordinates) omit the upper one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    #[serde(serialize_with = "report::fixed_vec")]
    pub lo: Vec<f64>,
    #[serde(serialize_with = "report::fixed_vec")]
    pub hi: Vec<f64>,
    pub steps: Vec<usize>,
    pub half_open: Vec<bool>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, steps: Vec<usize>) -> Result<Self, CertifyError> {
        let n = lo.len();
        if hi.len() != n || steps.len() != n {
            return Err(CertifyError::InvalidGrid(format!(
                "lo/hi/steps lengths differ ({}, {}, {})",
                n,
                hi.len(),
                steps.len()
            )));
        }
        if let Some(axis) = steps.iter().position(|&s| s == 0) {
            return Err(CertifyError::InvalidGrid(format!("axis {axis} has zero points")));
        }
        if let Some(axis) = (0..n).find(|&i| !lo[i].is_finite() || !hi[i].is_finite() || lo[i] > hi[i]) {
            return Err(CertifyError::InvalidGrid(format!("axis {axis} has an empty or non-finite interval")));
        }
        Ok(GridSpec {
            lo,
            hi,
            steps,
            half_open: vec![false; n],
        })
    }

    /// The cube `[lo, hi]^dim` with `steps` points per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, steps: usize) -> Result<Self, CertifyError> {
        GridSpec::new(vec![lo; dim], vec![hi; dim], vec![steps; dim])
    }

    pub fn with_half_open(mut self, axis: usize) -> Self {
        self.half_open[axis] = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.steps.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let n = self.steps[axis];
        let (lo, hi) = (self.lo[axis], self.hi[axis]);
        if self.half_open[axis] {
            lo + (hi - lo) * i as f64 / n as f64
        } else if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// The `index`-th point in lexicographic order (last axis fastest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut out = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.steps[axis];
            out[axis] = self.coordinate(axis, rest % n);
            rest /= n;
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum PointStatus {
    Cartan,
    NotCartan { growth: [usize; 3] },
    Indeterminate { growth: [usize; 3] },
    Error { message: String },
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Cartan => "Cartan",
            PointStatus::NotCartan { .. } => "NotCartan",
            PointStatus::Indeterminate { .. } => "Indeterminate",
            PointStatus::Error { .. } => "Error",
        }
    }
}

/// Relative margins at or below this are treated as an exact zero.
pub const ROUNDOFF_MARGIN: f64 = 64.0 * f64::EPSILON;

/// Classifies a frame sample. The relative margin is
/// `|det| / prod |column|`, which lies in `[0, 1]`:
///
/// * margin above `tol` and growth `(2,3,5)`: Cartan;
/// * deficient growth and a margin at roundoff level: NotCartan;
/// * anything else (small but resolvable margin, or rank and margin
///   disagreeing): Indeterminate.
pub fn classify(sample: &FrameSample, tol: f64) -> PointStatus {
    let growth = sample.growth.ranks;
    let margin = relative_margin(sample);
    if !sample.growth.is_cartan() && margin <= ROUNDOFF_MARGIN {
        PointStatus::NotCartan { growth }
    } else if margin > tol && sample.growth.is_cartan() {
        PointStatus::Cartan
    } else {
        PointStatus::Indeterminate { growth }
    }
}

pub fn relative_margin(sample: &FrameSample) -> f64 {
    if sample.scale == 0.0 {
        0.0
    } else {
        sample.determinant.abs() / sample.scale
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    #[serde(serialize_with = "report::fixed_vec")]
    pub coords: Vec<f64>,
    #[serde(flatten)]
    pub status: PointStatus,
    #[serde(serialize_with = "report::fixed_opt")]
    pub det: Option<f64>,
    #[serde(serialize_with = "report::fixed_opt")]
    pub relative_margin: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StatusCounts {
    pub cartan: usize,
    pub not_cartan: usize,
    pub indeterminate: usize,
    pub error: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport {
    pub grid: GridSpec,
    #[serde(serialize_with = "report::fixed")]
    pub tol: f64,
    pub point_count: usize,
    pub counts: StatusCounts,
    #[serde(serialize_with = "report::fixed_opt")]
    pub min_abs_det: Option<f64>,
    /// Indices of every point that is not Cartan, in grid order.
    pub failures: Vec<usize>,
    pub points: Vec<PointReport>,
}

impl GridReport {
    pub fn all_cartan(&self) -> bool {
        self.counts.cartan == self.point_count
    }

    pub fn has_errors(&self) -> bool {
        self.counts.error > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per grid point: index, coordinates, status, growth, det.
    pub fn to_csv(&self) -> String {
        let dim = self.grid.dim();
        let mut out = String::from("index");
        for k in 1..=dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push_str(",status,r1,r2,r3,det\n");
        for p in &self.points {
            out.push_str(&p.index.to_string());
            for c in &p.coords {
                out.push(',');
                out.push_str(&report::fmt_f64(*c));
            }
            let growth = match &p.status {
                PointStatus::NotCartan { growth } | PointStatus::Indeterminate { growth } => Some(*growth),
                PointStatus::Cartan => Some([2, 3, 5]),
                PointStatus::Error { .. } => None,
            };
            out.push(',');
            out.push_str(p.status.label());
            match growth {
                Some([a, b, c]) => out.push_str(&format!(",{a},{b},{c}")),
                None => out.push_str(",,,"),
            }
            out.push(',');
            if let Some(d) = p.det {
                out.push_str(&report::fmt_f64(d));
            }
            out.push('\n');
        }
        out
    }
}

fn evaluate_point(frame: &BracketFrame, grid: &GridSpec, index: usize, tol: f64) -> PointReport {
    let coords = grid.point(index);
    match frame.sample(&coords, tol) {
        Ok(sample) => PointReport {
            index,
            status: classify(&sample, tol),
            det: Some(sample.determinant),
            relative_margin: Some(relative_margin(&sample)),
            coords,
        },
        Err(e) => PointReport {
            index,
            coords,
            status: PointStatus::Error { message: e.to_string() },
            det: None,
            relative_margin: None,
        },
    }
}

/// Certifies every point of `grid`. Points are evaluated in parallel on the
/// current rayon pool; the report does not depend on the pool size.
pub fn certify_grid(d: &Distribution2, grid: &GridSpec, tol: f64) -> Result<GridReport, CertifyError> {
    if grid.dim() != 5 {
        return Err(CertifyError::BoxDimension {
            expected: 5,
            got: grid.dim(),
        });
    }
    let frame = BracketFrame::new(d);
    let points: Vec<PointReport> = (0..grid.len())
        .into_par_iter()
        .map(|i| evaluate_point(&frame, grid, i, tol))
        .collect();

    let mut counts = StatusCounts::default();
    let mut failures = Vec::new();
    let mut min_abs_det: Option<f64> = None;
    for p in &points {
        match p.status {
            PointStatus::Cartan => counts.cartan += 1,
            PointStatus::NotCartan { .. } => counts.not_cartan += 1,
            PointStatus::Indeterminate { .. } => counts.indeterminate += 1,
            PointStatus::Error { .. } => counts.error += 1,
        }
        if p.status != PointStatus::Cartan {
            failures.push(p.index);
        }
        if let Some(d) = p.det {
            min_abs_det = Some(min_abs_det.map_or(d.abs(), |m| m.min(d.abs())));
        }
    }
    Ok(GridReport {
        grid: grid.clone(),
        tol,
        point_count: points.len(),
        counts,
        min_abs_det,
        failures,
        points,
    })
}

/// A distribution in graph form over the `(x1, x2)` plane:
/// `X = d1 + sum a_i d_{2+i}`, `Y = d2 + sum b_i d_{2+i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDistribution {
    pub a: [Expr; 3],
    pub b: [Expr; 3],
}

impl GraphDistribution {
    pub fn new(a: [Expr; 3], b: [Expr; 3]) -> Result<Self, FieldError> {
        let g = GraphDistribution { a, b };
        g.to_distribution()?;
        Ok(g)
    }

    pub fn parse(a: [&str; 3], b: [&str; 3]) -> Result<Self, FieldError> {
        let p = |s: [&str; 3]| -> Result<[Expr; 3], FieldError> { Ok([parse(s[0])?, parse(s[1])?, parse(s[2])?]) };
        GraphDistribution::new(p(a)?, p(b)?)
    }

    pub fn to_distribution(&self) -> Result<Distribution2, FieldError> {
        let lift = |lead: usize, tail: &[Expr; 3]| {
            let mut comps = vec![Expr::zero(), Expr::zero()];
            comps[lead] = Expr::one();
            comps.extend(tail.iter().cloned());
            VectorField::new(comps)
        };
        Distribution2::new(lift(0, &self.a)?, lift(1, &self.b)?)
    }
}

pub fn graph_to_distribution(g: &GraphDistribution) -> Result<Distribution2, FieldError> {
    g.to_distribution()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeviData {
    #[serde(serialize_with = "report::fixed3")]
    pub c: [f64; 3],
    #[serde(serialize_with = "report::fixed3")]
    pub d: [f64; 3],
    #[serde(serialize_with = "report::fixed3")]
    pub e: [f64; 3],
    #[serde(serialize_with = "report::fixed")]
    pub det: f64,
    /// `|det| / (|c| |d| |e|)`, zero when a column vanishes.
    #[serde(serialize_with = "report::fixed")]
    pub relative_margin: f64,
    /// `(c|d|e)` is invertible: the frame `(1,0,a), (0,1,b), (0,0,c), (0,0,d),
    /// (0,0,e)`, whose determinant is `det(c|d|e)`, has numerical rank 5.
    pub is_cartan: bool,
}

/// Symbolic `(c, d, e)`: the vertical parts of `[X,Y]`, `[X,[X,Y]]`, `[Y,[X,Y]]`.
#[derive(Clone, Debug)]
pub struct LeviFrame {
    columns: [[Expr; 3]; 3],
    horizontal: [[Expr; 2]; 3],
    a: [Expr; 3],
    b: [Expr; 3],
}

impl LeviFrame {
    pub fn new(g: &GraphDistribution) -> Result<Self, FieldError> {
        let frame = BracketFrame::new(&g.to_distribution()?);
        let fields = frame.fields();
        let vertical = |f: &VectorField| [f.component(2).clone(), f.component(3).clone(), f.component(4).clone()];
        let horizontal = |f: &VectorField| [f.component(0).clone(), f.component(1).clone()];
        Ok(LeviFrame {
            columns: [vertical(&fields[2]), vertical(&fields[3]), vertical(&fields[4])],
            horizontal: [horizontal(&fields[2]), horizontal(&fields[3]), horizontal(&fields[4])],
            a: g.a.clone(),
            b: g.b.clone(),
        })
    }

    pub fn columns(&self) -> &[[Expr; 3]; 3] {
        &self.columns
    }

    /// Whether the first two components of all three brackets are the zero
    /// expression.
    pub fn horizontal_parts_vanish(&self) -> bool {
        self.horizontal.iter().flatten().all(Expr::is_zero)
    }

    pub fn eval(&self, point: &[f64], tol: f64) -> Result<LeviData, FieldError> {
        let ev = |col: &[Expr; 3]| -> Result<[f64; 3], FieldError> {
            Ok([col[0].eval(point)?, col[1].eval(point)?, col[2].eval(point)?])
        };
        let c = ev(&self.columns[0])?;
        let d = ev(&self.columns[1])?;
        let e = ev(&self.columns[2])?;
        let det = det3(c, d, e);
        let scale = norm3(c) * norm3(d) * norm3(e);
        let relative_margin = if scale == 0.0 { 0.0 } else { det.abs() / scale };
        // The same numerical-rank rule as the growth vector, so both verdicts
        // coincide near the tolerance.
        let a = ev(&self.a)?;
        let b = ev(&self.b)?;
        let frame = linalg::from_columns(&[
            vec![1.0, 0.0, a[0], a[1], a[2]],
            vec![0.0, 1.0, b[0], b[1], b[2]],
            vec![0.0, 0.0, c[0], c[1], c[2]],
            vec![0.0, 0.0, d[0], d[1], d[2]],
            vec![0.0, 0.0, e[0], e[1], e[2]],
        ]);
        Ok(LeviData {
            c,
            d,
            e,
            det,
            relative_margin,
            is_cartan: linalg::rank(&frame, tol) == 5,
        })
    }
}

/// Levi data at `point`. The Cartan flag is the invertibility of `(c|d|e)`
/// decided by numerical rank at `tol`.
pub fn levi_data(g: &GraphDistribution, point: &[f64], tol: f64) -> Result<LeviData, FieldError> {
    LeviFrame::new(g)?.eval(point, tol)
}
