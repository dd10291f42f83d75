//! Named connection forms: the sphere form `P x dP` on hemisphere and band
//! charts, the Heisenberg form on the torus, and the punctured-sphere family
//! obtained by adding a closed multiple of the angular form.

use std::f64::consts::TAU;

use super::{constant, ConnectionError, ConnectionForm, GroupModel, LieAlgebra3, SurfaceChart};
use crate::expr::{parse, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereChart {
    /// `(x, y) -> (x, y, sqrt(1 - x^2 - y^2))`.
    Upper,
    /// `(x, y) -> (x, y, -sqrt(1 - x^2 - y^2))`.
    Lower,
    /// `(theta, z) -> (r cos theta, r sin theta, z)` with `r = sqrt(1 - z^2)`.
    Band,
}

impl SphereChart {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "upper" => Some(SphereChart::Upper),
            "lower" => Some(SphereChart::Lower),
            "band" => Some(SphereChart::Band),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SphereChart::Upper => "upper",
            SphereChart::Lower => "lower",
            SphereChart::Band => "band",
        }
    }

    /// The surface chart with the area density of the round area form
    /// `x dy dz + y dz dx + z dx dy` (oriented by the outward normal).
    pub fn chart(self) -> SurfaceChart {
        match self {
            SphereChart::Upper | SphereChart::Lower => {
                let z = sphere_position(self)[2].clone();
                SurfaceChart {
                    name: format!("sphere_{}", self.name()),
                    periodic: [None, None],
                    area_density: Some(Expr::one().div(&z)),
                }
            }
            SphereChart::Band => SurfaceChart {
                name: "sphere_band".into(),
                periodic: [Some(TAU), None],
                area_density: Some(Expr::one()),
            },
        }
    }
}

/// Position on the unit sphere as expressions in the chart coordinates.
pub fn sphere_position(chart: SphereChart) -> [Expr; 3] {
    let p = |s: &str| parse(s).expect("built-in expression");
    match chart {
        SphereChart::Upper => [p("x"), p("y"), p("sqrt(1 - x^2 - y^2)")],
        SphereChart::Lower => [p("x"), p("y"), p("-sqrt(1 - x^2 - y^2)")],
        SphereChart::Band => [p("sqrt(1 - y^2) * cos(x)"), p("sqrt(1 - y^2) * sin(x)"), p("y")],
    }
}

/// Pulls an ambient `R^3`-valued 1-form `sum_j W[i][j] dX_j` (coefficients in
/// `x1..x3`) back through the chart map `pos`.
fn pullback(w: &[[Expr; 3]; 3], pos: &[Expr; 3]) -> ([Expr; 3], [Expr; 3]) {
    let component = |i: usize, var: usize| {
        let mut acc = Expr::zero();
        for j in 0..3 {
            acc = acc.add(&w[i][j].substitute(pos).mul(&pos[j].differentiate(var)));
        }
        acc
    };
    (
        [component(0, 0), component(1, 0), component(2, 0)],
        [component(0, 1), component(1, 1), component(2, 1)],
    )
}

/// `P x dP = (y dz - z dy, z dx - x dz, x dy - y dx)`.
fn sphere_ambient() -> [[Expr; 3]; 3] {
    let (x, y, z) = (Expr::var(0), Expr::var(1), Expr::var(2));
    let o = Expr::zero();
    [
        [o.clone(), z.neg(), y.clone()],
        [z, o.clone(), x.neg()],
        [y.neg(), x, o],
    ]
}

pub fn sphere_form(chart: SphereChart) -> ConnectionForm {
    let (a, b) = pullback(&sphere_ambient(), &sphere_position(chart));
    ConnectionForm::new(LieAlgebra3::abelian(), chart.chart(), a, b).expect("built-in form")
}

/// The sphere form plus `alpha (x dy - y dx) / (x^2 + y^2)` in the third
/// component. On the band chart the added term is exactly `alpha dtheta`.
pub fn cext_form(alpha: f64, chart: SphereChart) -> ConnectionForm {
    let base = sphere_form(chart);
    let alpha_e = constant(alpha);
    let (extra_a, extra_b) = match chart {
        SphereChart::Band => (alpha_e, Expr::zero()),
        SphereChart::Upper | SphereChart::Lower => {
            let r2 = parse("x^2 + y^2").expect("built-in expression");
            (
                alpha_e.mul(&Expr::var(1)).neg().div(&r2),
                alpha_e.mul(&Expr::var(0)).div(&r2),
            )
        }
    };
    let zero = Expr::zero();
    let closed = ConnectionForm {
        algebra: LieAlgebra3::abelian(),
        chart: base.chart.clone(),
        a: [zero.clone(), zero.clone(), extra_a],
        b: [zero.clone(), zero, extra_b],
    };
    base.plus(&closed)
}

/// `omega = (E cos x + F sin x) dy` on the periodic chart.
pub fn torus_heisenberg() -> ConnectionForm {
    let p = |s: &str| parse(s).expect("built-in expression");
    ConnectionForm::new(
        LieAlgebra3::heisenberg(),
        SurfaceChart::torus(),
        [Expr::zero(), Expr::zero(), Expr::zero()],
        [p("cos(x)"), p("sin(x)"), Expr::zero()],
    )
    .expect("built-in form")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinForm {
    SphereAbelian(SphereChart),
    TorusHeisenberg,
    CextFamily { alpha: f64, chart: SphereChart },
}

impl BuiltinForm {
    /// Accepts `sphere_abelian`, `sphere_abelian(upper|lower|band)`,
    /// `torus_heisenberg`, `cext_family(alpha)` and `cext_family(alpha, chart)`.
    pub fn parse(name: &str) -> Result<Self, ConnectionError> {
        let unknown = || ConnectionError::UnknownBuiltin(name.to_string());
        let name_t = name.trim();
        let (head, args) = match name_t.find('(') {
            Some(open) => {
                let inner = name_t[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
                (name_t[..open].trim(), inner.split(',').map(str::trim).collect::<Vec<_>>())
            }
            None => (name_t, Vec::new()),
        };
        match (head, args.as_slice()) {
            ("sphere_abelian", []) => Ok(BuiltinForm::SphereAbelian(SphereChart::Upper)),
            ("sphere_abelian", [c]) => SphereChart::parse(c).map(BuiltinForm::SphereAbelian).ok_or_else(unknown),
            ("torus_heisenberg", []) => Ok(BuiltinForm::TorusHeisenberg),
            ("cext_family", [a]) | ("cext_family", [a, _]) => {
                let alpha: f64 = a.parse().map_err(|_| unknown())?;
                if !alpha.is_finite() {
                    return Err(unknown());
                }
                let chart = match args.get(1) {
                    Some(c) => SphereChart::parse(c).ok_or_else(unknown)?,
                    None => SphereChart::Band,
                };
                Ok(BuiltinForm::CextFamily { alpha, chart })
            }
            _ => Err(unknown()),
        }
    }

    pub fn form(self) -> ConnectionForm {
        match self {
            BuiltinForm::SphereAbelian(chart) => sphere_form(chart),
            BuiltinForm::TorusHeisenberg => torus_heisenberg(),
            BuiltinForm::CextFamily { alpha, chart } => cext_form(alpha, chart),
        }
    }

    /// The group model whose suspension matches the form's algebra.
    pub fn model(self) -> GroupModel {
        match self {
            BuiltinForm::TorusHeisenberg => GroupModel::Heisenberg,
            _ => GroupModel::Abelian,
        }
    }
}

pub fn builtin(name: &str) -> Result<ConnectionForm, ConnectionError> {
    Ok(BuiltinForm::parse(name)?.form())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{cartan_criterion_abelian, cartan_criterion_algebra};

    #[test]
    fn names() {
        assert_eq!(BuiltinForm::parse("sphere_abelian(lower)").unwrap(), BuiltinForm::SphereAbelian(SphereChart::Lower));
        assert_eq!(
            BuiltinForm::parse("cext_family(-2)").unwrap(),
            BuiltinForm::CextFamily { alpha: -2.0, chart: SphereChart::Band }
        );
        assert_eq!(
            BuiltinForm::parse(" cext_family( -1.5 , upper )").unwrap(),
            BuiltinForm::CextFamily { alpha: -1.5, chart: SphereChart::Upper }
        );
        for bad in ["sphere", "sphere_abelian(left)", "cext_family(x)", "cext_family(-2", "torus_heisenberg(1)"] {
            assert!(matches!(builtin(bad), Err(ConnectionError::UnknownBuiltin(_))), "{bad}");
        }
    }

    #[test]
    fn sphere_curvature_density_is_twice_the_position() {
        for chart in [SphereChart::Upper, SphereChart::Lower, SphereChart::Band] {
            let w = sphere_form(chart);
            let pos = sphere_position(chart);
            for p in [[0.1, 0.2], [-0.4, 0.3], [0.5, -0.6], [0.0, 0.0]] {
                let f = w.curvature_density(&p).unwrap();
                for k in 0..3 {
                    let want = 2.0 * pos[k].eval(&p).unwrap();
                    assert!((f[k] - want).abs() < 1e-12, "{chart:?} {p:?}: {f:?}");
                }
            }
        }
    }

    #[test]
    fn north_pole_margin() {
        let r = cartan_criterion_abelian(&sphere_form(SphereChart::Upper), &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(r.columns, [[0.0, 0.0, 2.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        assert!((r.margin - 8.0).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn torus_form_components_and_margin() {
        let w = torus_heisenberg();
        assert!(w.a.iter().all(Expr::is_zero));
        assert_eq!(w.b[0].to_string(), "cos(x1)");
        assert_eq!(w.b[1].to_string(), "sin(x1)");
        for i in 0..8 {
            let x = i as f64 * 0.7;
            let r = cartan_criterion_algebra(&w, &[x, 0.3], 1e-9).unwrap();
            assert!((r.margin - 1.0).abs() < 1e-12);
            let f = w.curvature(&[x, 0.3]).unwrap();
            assert!((f[0] + x.sin()).abs() < 1e-15 && (f[1] - x.cos()).abs() < 1e-15 && f[2] == 0.0);
        }
    }

    #[test]
    fn cext_term_leaves_curvature_unchanged() {
        for chart in [SphereChart::Upper, SphereChart::Band] {
            let base = sphere_form(chart);
            let w = cext_form(-2.0, chart);
            for p in [[0.3, 0.2], [-0.5, 0.1], [0.2, -0.7]] {
                let (f0, f1) = (base.curvature(&p).unwrap(), w.curvature(&p).unwrap());
                for k in 0..3 {
                    assert!((f0[k] - f1[k]).abs() < 1e-12);
                }
            }
        }
    }
}
