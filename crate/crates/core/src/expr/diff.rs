use super::{add, call, div, mul, neg, pow, sub, Expr, Func};

pub(super) fn diff(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if &**v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => neg(diff(a, var)),
        Expr::Add(a, b) => add(diff(a, var), diff(b, var)),
        Expr::Sub(a, b) => sub(diff(a, var), diff(b, var)),
        Expr::Mul(a, b) => {
            let (a, b) = (&**a, &**b);
            add(mul(diff(a, var), b.clone()), mul(a.clone(), diff(b, var)))
        }
        Expr::Div(a, b) => {
            let (a, b) = (&**a, &**b);
            let da = diff(a, var);
            let db = diff(b, var);
            if db.is_zero() {
                div(da, b.clone())
            } else {
                div(
                    sub(mul(da, b.clone()), mul(a.clone(), db)),
                    pow(b.clone(), 2),
                )
            }
        }
        Expr::Pow(a, k) => {
            let a = &**a;
            mul(
                mul(Expr::constant(f64::from(*k)), pow(a.clone(), k - 1)),
                diff(a, var),
            )
        }
        Expr::Call(f, a) => {
            let a = &**a;
            let da = diff(a, var);
            let outer = match f {
                Func::Sin => call(Func::Cos, a.clone()),
                Func::Cos => neg(call(Func::Sin, a.clone())),
                Func::Tan => div(Expr::one(), pow(call(Func::Cos, a.clone()), 2)),
                Func::Exp => call(Func::Exp, a.clone()),
                Func::Log => return div(da, a.clone()),
                Func::Sqrt => {
                    return div(da, mul(Expr::constant(2.0), call(Func::Sqrt, a.clone())))
                }
                Func::Sinh => call(Func::Cosh, a.clone()),
                Func::Cosh => call(Func::Sinh, a.clone()),
            };
            mul(outer, da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn at(e: &Expr, var: &str, x: f64) -> f64 {
        e.eval_with(&[(var, x)]).unwrap()
    }

    #[test]
    fn sin_squared() {
        let d = Expr::parse("sin(theta)^2").unwrap().diff("theta");
        for &t in &[0.1, 0.7, 2.3] {
            let want = 2.0 * f64::sin(t) * f64::cos(t);
            assert!((at(&d, "theta", t) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_wrt_other_variable_is_zero() {
        assert_eq!(Expr::parse("c").unwrap().diff("theta"), Expr::zero());
        assert_eq!(Expr::parse("sin(c)*c^3").unwrap().diff("theta"), Expr::zero());
    }

    #[test]
    fn second_derivative_of_cube() {
        let e = Expr::parse("t^3").unwrap();
        let d2 = e.diff("t").diff("t");
        // 6t at t = 2
        assert_eq!(at(&d2, "t", 2.0), 12.0);
    }

    #[test]
    fn third_derivatives_of_elementary_functions() {
        let cases: &[(&str, fn(f64) -> f64)] = &[
            ("sin(x)", |x| -x.cos()),
            ("cos(x)", |x| x.sin()),
            ("exp(2*x)", |x| 8.0 * (2.0 * x).exp()),
            ("log(x)", |x| 2.0 / x.powi(3)),
            ("sqrt(x)", |x| 3.0 / 8.0 * x.powf(-2.5)),
            ("sinh(x)", |x| x.cosh()),
            ("cosh(x)", |x| x.sinh()),
            ("x^-1", |x| -6.0 / x.powi(4)),
            ("tan(x)", |x| {
                let c = x.cos();
                (2.0 + 4.0 * x.sin().powi(2)) / c.powi(4)
            }),
        ];
        for (src, want) in cases {
            let d3 = Expr::parse(src).unwrap().diff("x").diff("x").diff("x");
            for &x in &[0.3, 0.9, 1.2] {
                let got = at(&d3, "x", x);
                let w = want(x);
                assert!((got - w).abs() <= 1e-12 * (1.0 + w.abs()), "{src} at {x}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn exp_against_central_difference() {
        let e = Expr::parse("exp(2*t)").unwrap();
        let d = at(&e.diff("t"), "t", 0.3);
        let h = 1e-6;
        let fd = (at(&e, "t", 0.3 + h) - at(&e, "t", 0.3 - h)) / (2.0 * h);
        assert!((d - fd).abs() <= 1e-6 * d.abs());
    }

    #[test]
    fn quotient_rule() {
        let d = Expr::parse("x/(1 + x^2)").unwrap().diff("x");
        let x: f64 = 0.8;
        let want = (1.0 - x * x) / (1.0 + x * x).powi(2);
        assert!((at(&d, "x", x) - want).abs() < 1e-15);
    }
}
