use std::fmt;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

/// A numeric literal. Rationals stay exact until they overflow `i64`, at which
/// point arithmetic falls back to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Rational(Rational64),
    Float(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rational(Rational64::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Number::Rational(Rational64::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Float(x) => x == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(x) => x < 0.0,
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(x) => Number::Float(-x),
        }
    }

    pub fn abs(self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    fn combine(
        self,
        other: Self,
        exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Self {
        if let (Number::Rational(a), Number::Rational(b)) = (self, other) {
            if let Some(r) = exact(&a, &b) {
                return Number::Rational(r);
            }
        }
        Number::Float(float(self.to_f64(), other.to_f64()))
    }

    pub fn add(self, other: Self) -> Self {
        self.combine(other, |a, b| a.checked_add(b), |a, b| a + b)
    }

    pub fn sub(self, other: Self) -> Self {
        self.combine(other, |a, b| a.checked_sub(b), |a, b| a - b)
    }

    pub fn mul(self, other: Self) -> Self {
        self.combine(other, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    /// `None` on division by an exact or floating zero.
    pub fn div(self, other: Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Some(self.combine(other, |a, b| a.checked_div(b), |a, b| a / b))
    }

    /// `None` when raising zero to a negative power.
    pub fn powi(self, n: i32) -> Option<Self> {
        if n < 0 && self.is_zero() {
            return None;
        }
        if let Number::Rational(r) = self {
            let mut acc = Rational64::one();
            let mut ok = true;
            for _ in 0..n.unsigned_abs() {
                match acc.checked_mul(&r) {
                    Some(v) => acc = v,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let value = if n < 0 { acc.recip() } else { acc };
                return Some(Number::Rational(value));
            }
        }
        Some(Number::Float(self.to_f64().powi(n)))
    }

    /// Parses a decimal literal such as `12`, `0.75` or `2.5e-3`. Plain
    /// decimals become exact rationals when they fit; anything with an
    /// exponent is a float.
    pub fn from_decimal(text: &str) -> Option<Self> {
        if text.contains(['e', 'E']) {
            return text.parse::<f64>().ok().map(Number::Float);
        }
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let digits = format!("{int_part}{frac_part}");
        let exact = digits.parse::<i64>().ok().and_then(|numer| {
            let scale = 10i64.checked_pow(frac_part.len() as u32)?;
            Some(Number::Rational(Rational64::new(numer, scale)))
        });
        exact.or_else(|| text.parse::<f64>().ok().map(Number::Float))
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }
}

impl fmt::Display for Number {
    /// Non-negative values print as re-parseable literals: integers plainly,
    /// other rationals as `(p/q)`, floats in exponent form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "({}/{})", r.numer(), r.denom()),
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::int(n)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}
