//! Scalar expressions in up to five chart variables.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Trees are built either
//! by [`parse`] (which keeps the literal structure of the input) or by the
//! smart constructors (`Expr::add`, `Expr::mul`, ...) which fold constants and
//! drop additive zeros and multiplicative ones. Differentiation always goes
//! through the smart constructors so repeated derivatives stay small.
//!
//! Variables are `x1`..`x5`; the parser also accepts the aliases
//! `x, y, p, q, z` for `x1..x5` (in that order, matching the `(x, y, p, q, z)`
//! convention of the Monge normal form) and `t` for `x1`.

mod number;
mod parser;

use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

pub use number::Number;
pub use parser::parse;

/// Number of chart variables an expression may reference.
pub const MAX_VARS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn arity(self) -> usize {
        1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(Number),
    /// Zero-based variable index: `Var(0)` is `x1`.
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Call(Func, Expr),
}

#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("{function} expects {expected} argument(s), found {found} (column {column})")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
        column: usize,
    },
}

impl ExprError {
    pub fn column(&self) -> usize {
        match self {
            ExprError::Parse { column, .. } | ExprError::Arity { column, .. } => *column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
    #[error("variable x{} is not a coordinate of a {dim}-dimensional point", .var + 1)]
    MissingCoordinate { var: usize, dim: usize },
}

impl Expr {
    /// Wraps a node verbatim, without simplification.
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(n: impl Into<Number>) -> Self {
        Expr::new(Node::Num(n.into()))
    }

    pub fn int(n: i64) -> Self {
        Expr::num(Number::int(n))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    /// Zero-based variable: `Expr::var(0)` is `x1`.
    pub fn var(index: usize) -> Self {
        Expr::new(Node::Var(index))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Num(n) => Expr::num(n.neg()),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::new(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::num(a.add(b)),
            (Some(a), _) if a.is_zero() => other.clone(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            (_, Some(b)) if b.is_negative() => Expr::new(Node::Sub(self.clone(), Expr::num(b.neg()))),
            _ => match other.node() {
                Node::Neg(inner) => Expr::new(Node::Sub(self.clone(), inner.clone())),
                _ => Expr::new(Node::Add(self.clone(), other.clone())),
            },
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::num(a.sub(b)),
            (Some(a), _) if a.is_zero() => other.neg(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ => match other.node() {
                Node::Neg(inner) => self.add(inner),
                _ => Expr::new(Node::Sub(self.clone(), other.clone())),
            },
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::num(a.mul(b)),
            (Some(a), _) | (_, Some(a)) if a.is_zero() => Expr::zero(),
            (Some(a), _) if a.is_one() => other.clone(),
            (_, Some(b)) if b.is_one() => self.clone(),
            (Some(a), _) if a.neg().is_one() => other.neg(),
            (_, Some(b)) if b.neg().is_one() => self.neg(),
            _ => Expr::new(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => match a.div(b) {
                Some(q) => Expr::num(q),
                None => Expr::new(Node::Div(self.clone(), other.clone())),
            },
            (Some(a), _) if a.is_zero() => Expr::zero(),
            (_, Some(b)) if b.is_one() => self.clone(),
            _ => Expr::new(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(value) = self.as_number().and_then(|a| a.powi(n)) {
            return Expr::num(value);
        }
        Expr::new(Node::Pow(self.clone(), n))
    }

    pub fn call(func: Func, arg: &Expr) -> Expr {
        if arg.is_zero() {
            match func {
                Func::Sin | Func::Sqrt => return Expr::zero(),
                Func::Cos | Func::Exp => return Expr::one(),
            }
        }
        Expr::new(Node::Call(func, arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    /// Exact partial derivative with respect to the zero-based variable `var`.
    pub fn differentiate(&self, var: usize) -> Expr {
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(j) => {
                if *j == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(u) => u.differentiate(var).neg(),
            Node::Add(u, v) => u.differentiate(var).add(&v.differentiate(var)),
            Node::Sub(u, v) => u.differentiate(var).sub(&v.differentiate(var)),
            Node::Mul(u, v) => {
                let du = u.differentiate(var);
                let dv = v.differentiate(var);
                du.mul(v).add(&u.mul(&dv))
            }
            Node::Div(u, v) => {
                let du = u.differentiate(var);
                let dv = v.differentiate(var);
                if dv.is_zero() {
                    return du.div(v);
                }
                du.mul(v).sub(&u.mul(&dv)).div(&v.powi(2))
            }
            Node::Pow(u, n) => {
                let du = u.differentiate(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                Expr::int(i64::from(*n)).mul(&u.powi(n - 1)).mul(&du)
            }
            Node::Call(func, u) => {
                let du = u.differentiate(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                let outer = match func {
                    Func::Sin => u.cos(),
                    Func::Cos => u.sin().neg(),
                    Func::Exp => self.clone(),
                    Func::Sqrt => return du.div(&Expr::int(2).mul(self)),
                };
                outer.mul(&du)
            }
        }
    }

    /// Evaluates at `point`, whose `k`-th entry is the value of `x{k+1}`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self.node() {
            Node::Num(n) => Ok(n.to_f64()),
            Node::Var(j) => point.get(*j).copied().ok_or(EvalError::MissingCoordinate {
                var: *j,
                dim: point.len(),
            }),
            Node::Neg(u) => Ok(-u.eval(point)?),
            Node::Add(u, v) => Ok(u.eval(point)? + v.eval(point)?),
            Node::Sub(u, v) => Ok(u.eval(point)? - v.eval(point)?),
            Node::Mul(u, v) => Ok(u.eval(point)? * v.eval(point)?),
            Node::Div(u, v) => {
                let den = v.eval(point)?;
                if den == 0.0 {
                    return Err(self.domain_error("division by zero"));
                }
                Ok(u.eval(point)? / den)
            }
            Node::Pow(u, n) => {
                let base = u.eval(point)?;
                if base == 0.0 && *n < 0 {
                    return Err(self.domain_error("zero raised to a negative power"));
                }
                Ok(base.powi(*n))
            }
            Node::Call(func, u) => {
                let arg = u.eval(point)?;
                match func {
                    Func::Sin => Ok(arg.sin()),
                    Func::Cos => Ok(arg.cos()),
                    Func::Exp => Ok(arg.exp()),
                    Func::Sqrt => {
                        if arg < 0.0 {
                            return Err(self.domain_error("square root of a negative number"));
                        }
                        Ok(arg.sqrt())
                    }
                }
            }
        }
    }

    fn domain_error(&self, reason: &'static str) -> EvalError {
        EvalError::Domain {
            node: self.to_string(),
            reason,
        }
    }

    /// Replaces `x{k+1}` by `values[k]` for every `k < values.len()`.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(j) => values.get(*j).cloned().unwrap_or_else(|| self.clone()),
            Node::Neg(u) => u.substitute(values).neg(),
            Node::Add(u, v) => u.substitute(values).add(&v.substitute(values)),
            Node::Sub(u, v) => u.substitute(values).sub(&v.substitute(values)),
            Node::Mul(u, v) => u.substitute(values).mul(&v.substitute(values)),
            Node::Div(u, v) => u.substitute(values).div(&v.substitute(values)),
            Node::Pow(u, n) => u.substitute(values).powi(*n),
            Node::Call(func, u) => Expr::call(*func, &u.substitute(values)),
        }
    }

    /// Largest zero-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Num(_) => None,
            Node::Var(j) => Some(*j),
            Node::Neg(u) | Node::Pow(u, _) | Node::Call(_, u) => u.max_var(),
            Node::Add(u, v) | Node::Sub(u, v) | Node::Mul(u, v) | Node::Div(u, v) => {
                match (u.max_var(), v.max_var()) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Var(_) => 1,
            Node::Neg(u) | Node::Pow(u, _) | Node::Call(_, u) => 1 + u.size(),
            Node::Add(u, v) | Node::Sub(u, v) | Node::Mul(u, v) | Node::Div(u, v) => {
                1 + u.size() + v.size()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Num(n) if n.is_negative() => 3,
            Node::Pow(..) => 4,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }
}

/// Central difference `(e(p + h e_i) - e(p - h e_i)) / 2h` along the
/// zero-based axis `var`.
pub fn fd_partial(expr: &Expr, var: usize, point: &[f64], h: f64) -> Result<f64, EvalError> {
    let mut forward = point.to_vec();
    let mut backward = point.to_vec();
    if var >= point.len() {
        return Err(EvalError::MissingCoordinate {
            var,
            dim: point.len(),
        });
    }
    forward[var] += h;
    backward[var] -= h;
    let hi = expr.eval(&forward)?;
    let lo = expr.eval(&backward)?;
    Ok((hi - lo) / (2.0 * h))
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        match self.node() {
            Node::Num(n) if n.is_negative() => write!(f, "-{}", n.abs()),
            Node::Num(n) => write!(f, "{n}"),
            Node::Var(j) => write!(f, "x{}", j + 1),
            Node::Neg(u) => {
                write!(f, "-")?;
                write_operand(f, u, u.precedence() < prec)
            }
            Node::Add(u, v) | Node::Sub(u, v) | Node::Mul(u, v) | Node::Div(u, v) => {
                let op = match self.node() {
                    Node::Add(..) => "+",
                    Node::Sub(..) => "-",
                    Node::Mul(..) => "*",
                    _ => "/",
                };
                write_operand(f, u, u.precedence() < prec)?;
                write!(f, " {op} ")?;
                write_operand(f, v, v.precedence() <= prec)
            }
            Node::Pow(u, n) => {
                write_operand(f, u, u.precedence() <= prec)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Call(func, u) => write!(f, "{}({u})", func.name()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $smart:ident) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$smart(self, rhs)
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$smart(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$smart(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$smart(self, &rhs)
            }
        }
    };
}

binary_op!(Add, add, add);
binary_op!(Sub, sub, sub);
binary_op!(Mul, mul, mul);
binary_op!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
