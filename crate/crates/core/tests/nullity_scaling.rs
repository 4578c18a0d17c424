use semisym::catalog;
use semisym::connections::{lambda, ConnectionKind};
use semisym::curvature::nullity_fit;
use semisym::error::Error;
use semisym::geometry::sample;
use semisym::theorems::GATE_TOLERANCE;

fn fit(name: &str, kind: ConnectionKind) -> semisym::curvature::NullityFit {
    let spec = catalog::builtin(name).unwrap().spec;
    let samples = sample(&spec, 50, 42).unwrap();
    nullity_fit(&spec.compile(), kind, &samples, GATE_TOLERANCE).unwrap()
}

#[test]
fn flat_space_nullity_constant_scales_as_n_squared_over_n_plus_one_squared() {
    for (n, expected) in [(3, 9.0 / 16.0), (4, 16.0 / 25.0), (5, 25.0 / 36.0), (8, 64.0 / 81.0)] {
        let f = fit(&format!("euclidean_{n}"), ConnectionKind::ProjectiveSemiSymmetric);
        assert!((f.k - expected).abs() <= 1e-10, "n={n}: k = {}", f.k);
        assert!((f.k + lambda(n)).abs() <= 1e-10);
        assert!(f.residual <= 1e-10, "n={n}: residual {}", f.residual);
        assert_eq!(f.pairs, 50 * 6);
    }
}

#[test]
fn levi_civita_nullity_on_flat_space_is_zero() {
    let f = fit("euclidean3", ConnectionKind::LeviCivita);
    assert_eq!(f.k, 0.0);
    assert_eq!(f.residual, 0.0);
}

#[test]
fn curved_parallel_charts_share_the_flat_constant() {
    for name in ["cylinder_s2xr", "gssf_c1", "gssf_c4"] {
        let f = fit(name, ConnectionKind::ProjectiveSemiSymmetric);
        assert!((f.k - 9.0 / 16.0).abs() <= 1e-10, "{name}: {}", f.k);
        assert!(f.residual <= 1e-10, "{name}: {}", f.residual);
    }
}

#[test]
fn nullity_fit_is_gated() {
    let spec = catalog::builtin("sphere3_bad_xi").unwrap().spec;
    let samples = sample(&spec, 10, 42).unwrap();
    let err = nullity_fit(
        &spec.compile(),
        ConnectionKind::ProjectiveSemiSymmetric,
        &samples,
        GATE_TOLERANCE,
    )
    .unwrap_err();
    assert!(matches!(err, Error::GateFailed(r) if r > 0.1));
}
