use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("domain error in '{subexpr}': {reason}")]
    Domain { subexpr: String, reason: String },
}

/// Source of variable values during evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

impl<B: Bindings + ?Sized> Bindings for &B {
    fn lookup(&self, name: &str) -> Option<f64> {
        (**self).lookup(name)
    }
}

/// Coordinate names paired positionally with a point.
pub struct Point<'a> {
    pub names: &'a [String],
    pub values: &'a [f64],
}

impl Bindings for Point<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

fn domain(e: &Expr, reason: &str) -> EvalError {
    EvalError::Domain {
        subexpr: e.to_string(),
        reason: reason.to_string(),
    }
}

pub(super) fn eval<B: Bindings + ?Sized>(e: &Expr, b: &B) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var(name) => b
            .lookup(name)
            .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
        Expr::Neg(a) => -eval(a, b)?,
        Expr::Add(x, y) => eval(x, b)? + eval(y, b)?,
        Expr::Sub(x, y) => eval(x, b)? - eval(y, b)?,
        Expr::Mul(x, y) => eval(x, b)? * eval(y, b)?,
        Expr::Div(x, y) => {
            let den = eval(y, b)?;
            if den == 0.0 {
                return Err(domain(e, "division by zero"));
            }
            eval(x, b)? / den
        }
        Expr::Pow(a, k) => {
            let base = eval(a, b)?;
            if base == 0.0 && *k < 0 {
                return Err(domain(e, "zero raised to a negative power"));
            }
            base.powi(*k)
        }
        Expr::Call(f, a) => {
            let x = eval(a, b)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain(e, "logarithm of a non-positive value"));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain(e, "square root of a negative value"));
                    }
                    x.sqrt()
                }
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(e, "non-finite result"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_squared_at_half_pi() {
        let e = Expr::parse("sin(theta)^2").unwrap();
        let v = e.eval_with(&[("theta", std::f64::consts::FRAC_PI_2)]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn reciprocal_of_zero_is_a_domain_error() {
        let e = Expr::parse("1/x").unwrap();
        let err = e.eval_with(&[("x", 0.0)]).unwrap_err();
        assert!(matches!(err, EvalError::Domain { ref subexpr, .. } if subexpr == "1/x"));
    }

    #[test]
    fn log_domain_reports_offending_subexpression() {
        let e = Expr::parse("2 + log(x - 1)").unwrap();
        match e.eval_with(&[("x", 0.5)]).unwrap_err() {
            EvalError::Domain { subexpr, .. } => assert_eq!(subexpr, "log(x - 1)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbound_variable() {
        let e = Expr::parse("x + y").unwrap();
        assert_eq!(
            e.eval_with(&[("x", 1.0)]).unwrap_err(),
            EvalError::Unbound("y".into())
        );
    }

    #[test]
    fn map_bindings() {
        let mut m = HashMap::new();
        m.insert("r".to_string(), 2.0);
        assert_eq!(Expr::parse("r^3").unwrap().eval(&m).unwrap(), 8.0);
        let names = vec!["a".to_string(), "b".to_string()];
        let p = Point { names: &names, values: &[3.0, 4.0] };
        assert_eq!(Expr::parse("sqrt(a^2 + b^2)").unwrap().eval(&p).unwrap(), 5.0);
    }
}
