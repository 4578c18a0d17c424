#![allow(dead_code)]

use rand::Rng;
use semisym::expr::{self, Expr, Func};

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn corpus() -> Vec<String> {
    include_str!("../data/expressions.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Random expression over [`VARS`] with at most `depth` levels of operators.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.75) {
            Expr::var(VARS[rng.gen_range(0..VARS.len())])
        } else {
            Expr::constant([0.5, 1.0, 2.0, 3.0, -1.5, 0.25][rng.gen_range(0..6)])
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..7) {
        0 => expr::add(a, random_expr(rng, depth - 1)),
        1 => expr::sub(a, random_expr(rng, depth - 1)),
        2 => expr::mul(a, random_expr(rng, depth - 1)),
        3 => expr::div(a, random_expr(rng, depth - 1)),
        4 => expr::pow(a, [2, 3, -1, -2][rng.gen_range(0..4)]),
        5 => expr::neg(a),
        _ => expr::call(Func::ALL[rng.gen_range(0..Func::ALL.len())], a),
    }
}

pub fn random_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    [
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    ]
}

pub fn eval_at(e: &Expr, p: &[f64; 3]) -> Option<f64> {
    let b = [(VARS[0], p[0]), (VARS[1], p[1]), (VARS[2], p[2])];
    e.eval(&b).ok().filter(|v| v.is_finite())
}

fn shifted(p: &[f64; 3], k: usize, h: f64) -> [f64; 3] {
    let mut q = *p;
    q[k] += h;
    q
}

/// True when `e` is defined and moderate on a small neighbourhood of `p`
/// along coordinate `k`, so a central difference is meaningful there.
pub fn well_conditioned(e: &Expr, p: &[f64; 3], k: usize) -> bool {
    (-4..=4).all(|s| {
        eval_at(e, &shifted(p, k, s as f64 * 2.5e-3)).is_some_and(|v| v.abs() <= 1e4)
    })
}

pub fn central_difference(e: &Expr, p: &[f64; 3], k: usize, h: f64) -> Option<f64> {
    let hi = eval_at(e, &shifted(p, k, h))?;
    let lo = eval_at(e, &shifted(p, k, -h))?;
    Some((hi - lo) / (2.0 * h))
}

/// Outcome of one symbolic-vs-numeric derivative comparison.
pub enum FdOutcome {
    Agree,
    Disagree { exact: f64, numeric: f64 },
    Rejected,
}

pub fn compare_derivative(e: &Expr, p: &[f64; 3], k: usize) -> FdOutcome {
    if !well_conditioned(e, p, k) {
        return FdOutcome::Rejected;
    }
    let Some(exact) = eval_at(&e.diff(VARS[k]), p) else {
        return FdOutcome::Rejected;
    };
    let (Some(numeric), Some(coarse)) = (
        central_difference(e, p, k, 1e-6),
        central_difference(e, p, k, 2e-6),
    ) else {
        return FdOutcome::Rejected;
    };
    // The stencil cannot resolve the function when halving h moves the
    // estimate by more than a tenth of the tolerance.
    if (numeric - coarse).abs() > 1e-6 * (1.0 + numeric.abs()) {
        return FdOutcome::Rejected;
    }
    if (exact - numeric).abs() <= 1e-5 * (1.0 + exact.abs()) {
        FdOutcome::Agree
    } else {
        FdOutcome::Disagree { exact, numeric }
    }
}
