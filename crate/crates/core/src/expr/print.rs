use std::fmt;

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Const(c) if c.is_sign_negative() => UNARY,
        Expr::Pow(..) => POWER,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
    }
}

fn child(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        f.write_str("(")?;
        write_expr(e, f)?;
        f.write_str(")")
    } else {
        write_expr(e, f)
    }
}

pub(super) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(v) => f.write_str(v),
        Expr::Neg(a) => {
            f.write_str("-")?;
            // "-3" would re-parse as a negative literal, not a negation.
            if matches!(**a, Expr::Const(c) if !c.is_sign_negative()) {
                child(a, ATOM + 1, f)
            } else {
                child(a, UNARY, f)
            }
        }
        Expr::Add(a, b) => {
            child(a, SUM, f)?;
            f.write_str(" + ")?;
            child(b, PRODUCT, f)
        }
        Expr::Sub(a, b) => {
            child(a, SUM, f)?;
            f.write_str(" - ")?;
            child(b, PRODUCT, f)
        }
        Expr::Mul(a, b) => {
            child(a, PRODUCT, f)?;
            f.write_str("*")?;
            child(b, UNARY, f)
        }
        Expr::Div(a, b) => {
            child(a, PRODUCT, f)?;
            f.write_str("/")?;
            child(b, UNARY, f)
        }
        Expr::Pow(a, k) => {
            child(a, ATOM, f)?;
            write!(f, "^{k}")
        }
        Expr::Call(func, a) => {
            write!(f, "{func}(")?;
            write_expr(a, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn round_trip(s: &str) {
        let e = Expr::parse(s).unwrap();
        let printed = e.to_string();
        let back = Expr::parse(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(back, e, "{s} printed as {printed}");
    }

    #[test]
    fn printing_is_precedence_aware() {
        assert_eq!(Expr::parse("a*(b+c)").unwrap().to_string(), "a*(b + c)");
        assert_eq!(Expr::parse("(a*b)+c").unwrap().to_string(), "a*b + c");
        assert_eq!(Expr::parse("a-(b-c)").unwrap().to_string(), "a - (b - c)");
        assert_eq!(Expr::parse("sin(theta)^2").unwrap().to_string(), "sin(theta)^2");
    }

    #[test]
    fn negative_constants_and_negations_survive() {
        for s in ["-3", "-(3)", "--3", "(-3)^2", "-2^2", "x*-3", "x - -3", "-(x*y)", "(-x)^3"] {
            round_trip(s);
        }
    }

    #[test]
    fn built_trees_round_trip() {
        let x = Expr::var("x");
        let e = mul(Expr::constant(-2.0), pow(add(x.clone(), Expr::constant(0.1)), -3));
        let back = Expr::parse(&e.to_string()).unwrap();
        assert_eq!(back, e);
        let e = neg(Expr::constant(4.0));
        assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
    }
}
