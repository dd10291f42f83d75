//! Predicates for the existence of Cartan-type 2-plane fields on
//! 5-manifolds, evaluated over declared characteristic data.
//!
//! Characteristic classes are inputs. Pairings are integers against a basis
//! `a_1, .., a_n` of `H_4(M; Z)` modulo torsion; torsion in `H^4` is not
//! detected. The semi-characteristic is the real one, `(b0 + b2 + b4) mod 2`;
//! for spinnable manifolds it agrees with the mod-2 version, which this
//! module does not accept as input.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("missing data: {field}")]
    IncompleteData { field: &'static str },
    #[error("inconsistent input: {reason}")]
    InconsistentInput { reason: String },
    #[error("invalid data: {reason}")]
    InvalidData { reason: String },
}

/// `(b0 + b2 + b4) mod 2`.
pub fn kervaire(betti: &[u64; 6]) -> u8 {
    ((betti[0] + betti[2] + betti[4]) % 2) as u8
}

/// Warnings for Betti data that cannot come from a closed connected
/// orientable 5-manifold.
pub fn validate_betti(betti: &[u64; 6]) -> Vec<String> {
    let mut warnings = Vec::new();
    if betti[0] != 1 {
        warnings.push(format!("b0 = {} but a connected manifold has b0 = 1", betti[0]));
    }
    for q in 0..3 {
        if betti[q] != betti[5 - q] {
            warnings.push(format!("Poincare duality fails: b{q} = {} but b{} = {}", betti[q], 5 - q, betti[5 - q]));
        }
    }
    let chi: i128 = betti
        .iter()
        .enumerate()
        .map(|(q, &b)| if q % 2 == 0 { b as i128 } else { -(b as i128) })
        .sum();
    if chi != 0 {
        warnings.push(format!("Euler characteristic is {chi}, but it vanishes for closed odd-dimensional manifolds"));
    }
    warnings
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldInvariants {
    /// Open (non-compact) rather than closed connected.
    pub open: bool,
    /// `w1 = 0 = w2`.
    pub spin: bool,
    /// `b0..b5`; required for closed manifolds.
    #[serde(default)]
    pub betti: Option<[u64; 6]>,
    /// Rank of `H_4` modulo torsion, if declared; pairing lists must match it.
    #[serde(default)]
    pub h4_rank: Option<usize>,
    /// `<p1(M)/2, a_i>`.
    #[serde(default)]
    pub half_p1: Option<Vec<i64>>,
    /// `<e(xi)^2, a_i>`, given directly.
    #[serde(default)]
    pub e_squared: Option<Vec<i64>>,
    /// Coefficients of `e(xi)` in a basis `b_1, .., b_m` of `H^2`.
    #[serde(default)]
    pub euler_class: Option<Vec<i64>>,
    /// `cup_product[i][j][k] = <b_i b_j, a_k>`.
    #[serde(default)]
    pub cup_product: Option<Vec<Vec<Vec<i64>>>>,
    /// `<p1(M), a_i>`, checked against Rokhlin divisibility and `2 half_p1`.
    #[serde(default)]
    pub p1: Option<Vec<i64>>,
}

impl ManifoldInvariants {
    /// `<e^2, a_k> = sum_ij e_i e_j <b_i b_j, a_k>`.
    pub fn derived_e_squared(&self) -> Result<Option<Vec<i64>>, TopologyError> {
        let (Some(e), Some(cup)) = (&self.euler_class, &self.cup_product) else {
            return Ok(None);
        };
        let m = e.len();
        if cup.len() != m || cup.iter().any(|row| row.len() != m) {
            return Err(TopologyError::InvalidData {
                reason: format!("cup_product must be {m} x {m} x n for {m} Euler class coefficients"),
            });
        }
        let n = cup.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if cup.iter().flatten().any(|v| v.len() != n) {
            return Err(TopologyError::InvalidData {
                reason: "cup_product entries have different lengths".into(),
            });
        }
        let overflow = || TopologyError::InvalidData {
            reason: "integer overflow in e^2".into(),
        };
        let mut out = vec![0i64; n];
        for i in 0..m {
            for j in 0..m {
                for (k, slot) in out.iter_mut().enumerate() {
                    let term = e[i]
                        .checked_mul(e[j])
                        .and_then(|v| v.checked_mul(cup[i][j][k]))
                        .ok_or_else(overflow)?;
                    *slot = slot.checked_add(term).ok_or_else(overflow)?;
                }
            }
        }
        Ok(Some(out))
    }

    /// The `e^2` pairings, from the direct list or the cup-product path; both
    /// must agree when both are given.
    pub fn e_squared_pairings(&self) -> Result<Vec<i64>, TopologyError> {
        let derived = self.derived_e_squared()?;
        match (&self.e_squared, derived) {
            (Some(direct), Some(derived)) if *direct != derived => Err(TopologyError::InconsistentInput {
                reason: format!("e_squared {direct:?} disagrees with the cup-product value {derived:?}"),
            }),
            (Some(direct), _) => Ok(direct.clone()),
            (None, Some(derived)) => Ok(derived),
            (None, None) => Err(TopologyError::IncompleteData { field: "e_squared" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clause {
    #[serde(rename = "spin")]
    Spin,
    #[serde(rename = "pairing")]
    Pairing,
    #[serde(rename = "Kervaire")]
    Kervaire,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Spin => "spin",
            Clause::Pairing => "pairing",
            Clause::Kervaire => "Kervaire",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: Clause,
    /// `None` when the clause does not apply (Kervaire on open manifolds).
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionVerdict {
    pub holds: bool,
    pub failed: Vec<Clause>,
    pub trace: Vec<ClauseResult>,
    pub kervaire: Option<u8>,
    pub warnings: Vec<String>,
}

impl DecompositionVerdict {
    pub fn failed_clause(&self) -> Option<Clause> {
        self.failed.first().copied()
    }
}

/// Open case: spin and `p1/2 = e^2` on every class. Closed case: also
/// `k(M) = 0`. All clauses are evaluated and reported.
pub fn decide_decomposition(inv: &ManifoldInvariants) -> Result<DecompositionVerdict, TopologyError> {
    let half_p1 = inv.half_p1.as_ref().ok_or(TopologyError::IncompleteData { field: "half_p1" })?;
    let e2 = inv.e_squared_pairings()?;
    if half_p1.len() != e2.len() {
        return Err(TopologyError::InconsistentInput {
            reason: format!("half_p1 has {} entries but e_squared has {}", half_p1.len(), e2.len()),
        });
    }
    if let Some(rank) = inv.h4_rank {
        if half_p1.len() != rank {
            return Err(TopologyError::InconsistentInput {
                reason: format!("pairing lists have {} entries but h4_rank is {rank}", half_p1.len()),
            });
        }
    }
    if let Some(p1) = &inv.p1 {
        if p1.len() != half_p1.len() {
            return Err(TopologyError::InconsistentInput {
                reason: format!("p1 has {} entries but half_p1 has {}", p1.len(), half_p1.len()),
            });
        }
        if let Some(i) = (0..p1.len()).find(|&i| half_p1[i].checked_mul(2) != Some(p1[i])) {
            return Err(TopologyError::InconsistentInput {
                reason: format!("p1 = {} on class {} is not twice half_p1 = {}", p1[i], i + 1, half_p1[i]),
            });
        }
        if inv.spin {
            let r = rokhlin_check(p1);
            if !r.all_pass {
                let bad = r.passes.iter().position(|p| !p).unwrap_or(0);
                return Err(TopologyError::InconsistentInput {
                    reason: format!("p1 = {} on class {} violates divisibility by 48 for spin manifolds", p1[bad], bad + 1),
                });
            }
        }
    }

    let mut warnings = Vec::new();
    let kervaire_bit = if inv.open {
        None
    } else {
        let betti = inv.betti.as_ref().ok_or(TopologyError::IncompleteData { field: "betti" })?;
        warnings.extend(validate_betti(betti));
        if half_p1.len() as u64 != betti[4] {
            warnings.push(format!(
                "{} pairings supplied but b4 = {}; the list should cover a basis of H_4 modulo torsion",
                half_p1.len(),
                betti[4]
            ));
        }
        Some(kervaire(betti))
    };

    let mut trace = vec![ClauseResult {
        clause: Clause::Spin,
        passed: Some(inv.spin),
        detail: if inv.spin { "w1 = w2 = 0" } else { "not spinnable" }.into(),
    }];
    let mismatch = (0..e2.len()).find(|&i| half_p1[i] != e2[i]);
    trace.push(ClauseResult {
        clause: Clause::Pairing,
        passed: Some(mismatch.is_none()),
        detail: match mismatch {
            None => format!("p1/2 = e^2 on all {} classes", e2.len()),
            Some(i) => format!("class {}: p1/2 = {} but e^2 = {}", i + 1, half_p1[i], e2[i]),
        },
    });
    trace.push(ClauseResult {
        clause: Clause::Kervaire,
        passed: kervaire_bit.map(|k| k == 0),
        detail: match kervaire_bit {
            None => "not required for open manifolds".into(),
            Some(k) => format!("k(M) = {k}"),
        },
    });
    let failed: Vec<Clause> = trace.iter().filter(|c| c.passed == Some(false)).map(|c| c.clause).collect();
    Ok(DecompositionVerdict {
        holds: failed.is_empty(),
        failed,
        trace,
        kervaire: kervaire_bit,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplyConnectedData {
    /// Rank of `H_2(M; Z)`.
    pub b2: u64,
    /// Each `k` contributes a summand `M_k` with `H_2 = Z_k + Z_k`.
    #[serde(default)]
    pub torsion: Vec<u64>,
    pub w2_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmaleReport {
    pub holds: bool,
    pub w2_zero: bool,
    pub b2_odd: bool,
    /// Connected-sum decomposition of the spin manifold with this homology.
    pub description: String,
}

pub fn smale_remark(d: &SimplyConnectedData) -> Result<SmaleReport, TopologyError> {
    if let Some(k) = d.torsion.iter().find(|&&k| k < 2) {
        return Err(TopologyError::InvalidData {
            reason: format!("torsion order {k} must be at least 2"),
        });
    }
    let b2_odd = d.b2 % 2 == 1;
    let description = if !d.w2_zero {
        "not spin (w2 != 0)".to_string()
    } else if d.b2 == 0 && d.torsion.is_empty() {
        "S^5".to_string()
    } else {
        let mut parts: Vec<String> = Vec::new();
        match d.b2 {
            0 => {}
            1 => parts.push("S^2xS^3".into()),
            n => parts.push(format!("#{n}(S^2xS^3)")),
        }
        let mut torsion = d.torsion.clone();
        torsion.sort_unstable();
        parts.extend(torsion.iter().map(|k| format!("M_{k}")));
        parts.join(" # ")
    };
    Ok(SmaleReport {
        holds: d.w2_zero && b2_odd,
        w2_zero: d.w2_zero,
        b2_odd,
        description,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RokhlinReport {
    pub passes: Vec<bool>,
    pub all_pass: bool,
}

/// Divisibility of each `<p1(M), a>` by 48.
pub fn rokhlin_check(p1_pairings: &[i64]) -> RokhlinReport {
    let passes: Vec<bool> = p1_pairings.iter().map(|p| p % 48 == 0).collect();
    RokhlinReport {
        all_pass: passes.iter().all(|&p| p),
        passes,
    }
}

/// Betti numbers and pairings of the standard examples.
pub mod examples {
    use super::ManifoldInvariants;

    pub const S5: [u64; 6] = [1, 0, 0, 0, 0, 1];
    pub const S2_X_S3: [u64; 6] = [1, 0, 1, 1, 0, 1];
    pub const T5: [u64; 6] = [1, 5, 10, 10, 5, 1];

    fn closed_spin(betti: [u64; 6], n4: usize) -> ManifoldInvariants {
        ManifoldInvariants {
            open: false,
            spin: true,
            betti: Some(betti),
            half_p1: Some(vec![0; n4]),
            e_squared: Some(vec![0; n4]),
            ..Default::default()
        }
    }

    pub fn s2_x_s3() -> ManifoldInvariants {
        closed_spin(S2_X_S3, 0)
    }

    pub fn s5() -> ManifoldInvariants {
        closed_spin(S5, 0)
    }

    pub fn t5() -> ManifoldInvariants {
        closed_spin(T5, 5)
    }
}
