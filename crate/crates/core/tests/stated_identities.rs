//! Identities and worked values asserted exactly as originally stated.
//! Several do not hold for this connection. The corrected forms are checked
//! by `eq15_defect`, the pair-defect checks and tests/nullity_scaling.rs.

use std::process::Command;

use semisym::catalog;
use semisym::connections::{lambda, ConnectionKind};
use semisym::curvature::{nullity_fit, riemann_at};
use semisym::geometry::sample;
use semisym::tensor::max_abs_diff;
use semisym::theorems::{self, bundles, RunOptions, GATE_TOLERANCE};

fn residual(name: &str, check: &str) -> f64 {
    let chart = catalog::builtin(name).unwrap().spec.compile();
    let opts = RunOptions {
        samples: 50,
        checks: Some(vec![check.to_string()]),
        ..RunOptions::default()
    };
    theorems::run(&chart, &opts).unwrap()[0].residual_max.unwrap()
}

#[test]
fn ricci_derivative_is_connection_independent() {
    for name in ["euclidean3", "cylinder_s2xr", "gssf_c1"] {
        let r = residual(name, "eq15");
        assert!(r <= 1e-9, "{name}: max |∇̃S̃ − ∇S| = {r}");
    }
}

#[test]
fn codazzi_and_cyclic_ricci_quantities_agree() {
    for name in ["euclidean3", "cylinder_s2xr"] {
        let r = residual(name, "lem2_6");
        assert!(r <= 1e-9, "{name}: {r}");
    }
}

#[test]
fn flat_projective_tilde_equals_curvature_tilde() {
    let spec = catalog::builtin("euclidean3").unwrap().spec;
    let chart = spec.compile();
    let s = sample(&spec, 20, 42).unwrap();
    for b in bundles(&chart, &s).unwrap() {
        let d = max_abs_diff(b.p_tilde.as_ref().unwrap(), &b.pt.r);
        assert!(d <= 1e-10, "max |P̃ − R̃| = {d}");
    }
}

#[test]
fn flat_nullity_constant_equals_lambda() {
    for n in [3, 4, 5, 8] {
        let spec = catalog::builtin(&format!("euclidean_{n}")).unwrap().spec;
        let s = sample(&spec, 50, 42).unwrap();
        let f = nullity_fit(&spec.compile(), ConnectionKind::ProjectiveSemiSymmetric, &s, GATE_TOLERANCE)
            .unwrap();
        assert!((f.k - lambda(n)).abs() <= 1e-10, "n={n}: k = {}, λ = {}", f.k, lambda(n));
    }
}

#[test]
fn cylinder_lowered_sphere_component() {
    let chart = catalog::builtin("cylinder_s2xr").unwrap().spec.compile();
    let theta = 1.1f64;
    let cv = riemann_at(&chart, ConnectionKind::LeviCivita, &[theta, 0.5, 0.0]).unwrap();
    let v = cv.lowered[[0, 1, 0, 1]];
    assert!((v - theta.sin().powi(2)).abs() <= 1e-12, "′R_θφθφ = {v}");
}

#[test]
fn flat_suite_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_semisym"))
        .args(["verify", "--manifold", "euclidean3"])
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}
