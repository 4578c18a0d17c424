//! Scalar expressions over named coordinates.
//!
//! Every metric component, vector-field component and structure function of a
//! chart is an [`Expr`]. Expressions are parsed from a small infix grammar,
//! differentiated symbolically (any order, exact), printed back in a form that
//! re-parses to the same tree, and evaluated in IEEE double precision.
//!
//! ```
//! use semisym::expr::Expr;
//!
//! let e = Expr::parse("sin(theta)^2").unwrap();
//! let de = e.diff("theta");
//! let v = de.eval_with(&[("theta", 0.4)]).unwrap();
//! assert!((v - 2.0 * 0.4f64.sin() * 0.4f64.cos()).abs() < 1e-15);
//! ```

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;
use std::sync::Arc;

pub use eval::{Bindings, EvalError, Point};
pub use parse::{ParseError, ParseErrorKind};

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree. Children are reference counted so derivative trees can
/// share subexpressions; values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Integer power.
    Pow(Arc<Expr>, i32),
    Call(Func, Arc<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        diff::diff(self, var)
    }

    /// Evaluates with explicit `(name, value)` pairs.
    pub fn eval_with(&self, pairs: &[(&str, f64)]) -> Result<f64, EvalError> {
        self.eval(&pairs)
    }

    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, EvalError> {
        eval::eval(self, bindings)
    }

    /// Whether `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => &**v == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Names of all variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(v) => out.push(v.to_string()),
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

// Smart constructors with light simplification: constant folding and the
// 0/1 identities. Nothing beyond that; equality of expressions is decided by
// evaluation, never by normal forms.

fn finite(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => Arc::unwrap_or_clone(inner),
        other => Expr::Neg(Arc::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => finite(x + y).unwrap_or_else(|| Expr::Add(Arc::new(a), Arc::new(b))),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Arc::new(a), Arc::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => finite(x - y).unwrap_or_else(|| Expr::Sub(Arc::new(a), Arc::new(b))),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Arc::new(a), Arc::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => finite(x * y).unwrap_or_else(|| Expr::Mul(Arc::new(a), Arc::new(b))),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::Mul(Arc::new(a), Arc::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => {
            finite(x / y).unwrap_or_else(|| Expr::Div(Arc::new(a), Arc::new(b)))
        }
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Arc::new(a), Arc::new(b)),
    }
}

pub fn pow(a: Expr, k: i32) -> Expr {
    match (k, a.as_const()) {
        (0, _) => Expr::one(),
        (1, _) => a,
        (_, Some(c)) if c != 0.0 || k > 0 => {
            finite(c.powi(k)).unwrap_or_else(|| Expr::Pow(Arc::new(a), k))
        }
        _ => Expr::Pow(Arc::new(a), k),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Arc::new(a))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var("x");
        assert_eq!(add(Expr::zero(), x.clone()), x);
        assert_eq!(mul(Expr::one(), x.clone()), x);
        assert_eq!(mul(Expr::zero(), x.clone()), Expr::zero());
        assert_eq!(mul(Expr::constant(2.0), Expr::constant(3.5)), Expr::constant(7.0));
        assert_eq!(pow(x.clone(), 1), x);
        assert_eq!(pow(x.clone(), 0), Expr::one());
        assert_eq!(neg(neg(x.clone())), x);
        assert_eq!(div(Expr::zero(), x.clone()), Expr::zero());
    }

    #[test]
    fn division_by_constant_zero_is_not_folded() {
        let e = div(Expr::one(), Expr::zero());
        assert!(matches!(e, Expr::Div(..)));
    }

    #[test]
    fn variables_are_collected() {
        let e = Expr::parse("x*y + sin(x) - z/2").unwrap();
        assert_eq!(e.variables(), vec!["x", "y", "z"]);
        assert!(e.depends_on("z"));
        assert!(!e.depends_on("w"));
    }
}
