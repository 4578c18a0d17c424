mod common;

use semisym::expr::{Expr, ParseErrorKind};

#[test]
fn corpus_is_large_enough() {
    assert!(common::corpus().len() >= 50);
}

#[test]
fn corpus_round_trips() {
    for s in common::corpus() {
        let e = Expr::parse(&s).unwrap_or_else(|err| panic!("{s:?}: {err}"));
        let printed = e.to_string();
        let again = Expr::parse(&printed).unwrap_or_else(|err| panic!("{printed:?}: {err}"));
        assert_eq!(e, again, "{s:?} printed as {printed:?}");
        assert_eq!(printed, again.to_string(), "{s:?}");
    }
}

#[test]
fn corpus_values_survive_printing() {
    let binds = [
        ("a", 0.3),
        ("b", -1.2),
        ("c", 2.0),
        ("x", 0.7),
        ("y", 1.1),
        ("z", -0.4),
        ("t", 0.9),
        ("r", 1.3),
        ("theta", 1.0),
        ("phi", 2.0),
        ("chi", 0.8),
        ("x1", 0.2),
    ];
    for s in common::corpus() {
        let e = Expr::parse(&s).unwrap();
        let Ok(v) = e.eval(&binds) else { continue };
        let w = Expr::parse(&e.to_string()).unwrap().eval(&binds).unwrap();
        assert!(v == w || (v.is_nan() && w.is_nan()), "{s:?}: {v} vs {w}");
    }
}

#[test]
fn malformed_input_reports_offsets() {
    for (text, offset) in [
        ("a +", 4),
        ("(x", 3),
        ("x $ y", 3),
        ("2*)", 3),
        ("a^2^3", 4),
        ("x^(-2)", 3),
        ("x^1.5", 3),
    ] {
        let err = Expr::parse(text).unwrap_err();
        assert_eq!(err.offset, offset, "{text:?}: {err}");
    }
    let err = Expr::parse("foo(x)").unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UnknownFunction(_)), "{err:?}");
}
