//! Deterministic float formatting for serialized reports.

use serde::Serializer;

/// Significant digits kept when floats are written to reports.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn fmt_f64(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn fixed_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig(*v)),
        None => s.serialize_none(),
    }
}

pub fn fixed_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| round_sig(*x)))
}

#[allow(clippy::ptr_arg)]
pub fn fixed_vec<S: Serializer>(xs: &Vec<f64>, s: S) -> Result<S::Ok, S::Error> {
    fixed_slice(xs, s)
}

pub fn fixed3<S: Serializer>(xs: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    fixed_slice(xs, s)
}

#[allow(clippy::ptr_arg)]
pub fn fixed3_vec<S: Serializer>(xs: &Vec<[f64; 3]>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|v| v.map(round_sig)))
}
