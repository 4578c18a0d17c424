//! Built-in manifolds.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::ManifoldSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: ManifoldSpec,
    pub provenance: String,
}

impl CatalogEntry {
    /// Manifold document with the provenance note as a leading comment.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for line in self.provenance.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.spec.to_document());
        out
    }
}

/// Names of the fixed entries, in listing order. `euclidean_<n>` entries are
/// generated on demand by [`builtin`].
pub const NAMES: [&str; 5] = [
    "euclidean3",
    "cylinder_s2xr",
    "gssf_c1",
    "gssf_c4",
    "sphere3_bad_xi",
];

fn e(text: &str) -> Expr {
    Expr::parse(text).expect("catalog expression")
}

fn diag(entries: &[&str]) -> Vec<Vec<Expr>> {
    let n = entries.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { e(entries[i]) } else { Expr::zero() })
                .collect()
        })
        .collect()
}

fn unit_vector(n: usize, k: usize) -> Vec<Expr> {
    (0..n)
        .map(|i| if i == k { Expr::one() } else { Expr::zero() })
        .collect()
}

fn euclidean(n: usize, name: &str, coords: Vec<String>) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        spec: ManifoldSpec {
            name: name.to_string(),
            coords,
            metric: diag(&vec!["1"; n]),
            xi: unit_vector(n, 0),
            phi: None,
            structure_functions: None,
            sampling_box: vec![(-1.0, 1.0); n],
            parallel_xi_expected: true,
            asymmetric_pairs: Vec::new(),
        },
        provenance: format!(
            "Euclidean space of dimension {n} with xi = d/d{}. Flat, xi parallel and unit.",
            if n == 3 { "x" } else { "x1" }
        ),
    }
}

fn sphere_factor_box() -> Vec<(f64, f64)> {
    vec![(0.3, PI - 0.3), (0.1, 6.1), (-1.0, 1.0)]
}

fn cylinder() -> CatalogEntry {
    CatalogEntry {
        name: "cylinder_s2xr".into(),
        spec: ManifoldSpec {
            name: "cylinder_s2xr".into(),
            coords: vec!["theta".into(), "phi".into(), "t".into()],
            metric: diag(&["1", "sin(theta)^2", "1"]),
            xi: unit_vector(3, 2),
            phi: None,
            structure_functions: None,
            sampling_box: sphere_factor_box(),
            parallel_xi_expected: true,
            asymmetric_pairs: Vec::new(),
        },
        provenance: "Product of the unit 2-sphere with a line, xi = d/dt.\n\
                     Curved (sphere factor has K = 1) with xi parallel and unit."
            .into(),
    }
}

/// Unit 2-sphere of Gauss curvature c (radius 1/sqrt(c)) times a line, with
/// the rotation φ of the sphere factor. Cosymplectic, so R(X,Y)ξ = 0 and the
/// curvature has the three-term form with f1 = f2 = f3 = c/4.
fn gssf(name: &str, c: f64) -> CatalogEntry {
    let (g_theta, g_phi) = if c == 1.0 {
        ("1".to_string(), "sin(theta)^2".to_string())
    } else {
        (format!("{}", 1.0 / c), format!("sin(theta)^2/{c}"))
    };
    let mut metric = diag(&["1", "1", "1"]);
    metric[0][0] = e(&g_theta);
    metric[1][1] = e(&g_phi);
    let mut phi = vec![vec![Expr::zero(); 3]; 3];
    phi[0][1] = e("-sin(theta)");
    phi[1][0] = e("1/sin(theta)");
    let f = Expr::constant(c / 4.0);
    CatalogEntry {
        name: name.into(),
        spec: ManifoldSpec {
            name: name.into(),
            coords: vec!["theta".into(), "phi".into(), "t".into()],
            metric,
            xi: unit_vector(3, 2),
            phi: Some(phi),
            structure_functions: Some([f.clone(), f.clone(), f]),
            sampling_box: sphere_factor_box(),
            parallel_xi_expected: true,
            asymmetric_pairs: Vec::new(),
        },
        provenance: format!(
            "Sphere of Gauss curvature c = {c} times a line, eta = dt, phi a quarter turn\n\
             on the sphere factor. Cosymplectic generalized Sasakian space form with\n\
             f1 = f2 = f3 = c/4 = {}.",
            c / 4.0
        ),
    }
}

fn sphere3_bad_xi() -> CatalogEntry {
    CatalogEntry {
        name: "sphere3_bad_xi".into(),
        spec: ManifoldSpec {
            name: "sphere3_bad_xi".into(),
            coords: vec!["chi".into(), "theta".into(), "phi".into()],
            metric: diag(&["1", "sin(chi)^2", "sin(chi)^2*sin(theta)^2"]),
            xi: vec![Expr::zero(), Expr::zero(), e("1/(sin(chi)*sin(theta))")],
            phi: None,
            structure_functions: None,
            sampling_box: vec![(0.3, PI - 0.3), (0.3, PI - 0.3), (0.1, 6.1)],
            parallel_xi_expected: false,
            asymmetric_pairs: Vec::new(),
        },
        provenance: "Round unit 3-sphere in hyperspherical coordinates with xi the normalized\n\
                     d/dphi. Constant curvature 1; xi is unit but not parallel (negative control)."
            .into(),
    }
}

/// Looks up an entry by name. Besides the fixed names, `euclidean_<n>` for
/// any n ≥ 2 yields flat space in coordinates x1..xn with ξ = ∂/∂x1.
pub fn builtin(name: &str) -> Result<CatalogEntry> {
    match name {
        "euclidean3" => Ok(euclidean(
            3,
            "euclidean3",
            vec!["x".into(), "y".into(), "z".into()],
        )),
        "cylinder_s2xr" => Ok(cylinder()),
        "gssf_c1" => Ok(gssf("gssf_c1", 1.0)),
        "gssf_c4" => Ok(gssf("gssf_c4", 4.0)),
        "sphere3_bad_xi" => Ok(sphere3_bad_xi()),
        _ => {
            let n = name
                .strip_prefix("euclidean_")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&n| n >= 2)
                .ok_or_else(|| Error::UnknownManifold(name.to_string()))?;
            Ok(euclidean(
                n,
                name,
                (1..=n).map(|i| format!("x{i}")).collect(),
            ))
        }
    }
}

/// The fixed entries in listing order.
pub fn all() -> Vec<CatalogEntry> {
    NAMES
        .iter()
        .map(|n| builtin(n).expect("fixed catalog entry"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{load_spec, sample};

    #[test]
    fn every_entry_loads_from_its_document() {
        for entry in all() {
            let spec = load_spec(&entry.to_document()).unwrap();
            assert_eq!(spec, entry.spec);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("torus"), Err(Error::UnknownManifold(_))));
        assert!(matches!(builtin("euclidean_x"), Err(Error::UnknownManifold(_))));
        assert!(matches!(builtin("euclidean_1"), Err(Error::UnknownManifold(_))));
    }

    #[test]
    fn euclidean_family() {
        let e = builtin("euclidean_5").unwrap();
        assert_eq!(e.spec.dim(), 5);
        assert_eq!(e.spec.coords[4], "x5");
        assert_eq!(e.spec.xi[0], Expr::one());
    }

    #[test]
    fn metric_data_is_sound_on_samples() {
        for entry in all().into_iter().chain([builtin("euclidean_8").unwrap()]) {
            let chart = entry.spec.compile();
            let s = sample(&entry.spec, 100, 11).unwrap();
            for p in &s.points {
                let m = chart.metric_at(p, 0).unwrap();
                let n = entry.spec.dim();
                let prod = m.g.dot(&m.g_inv);
                for i in 0..n {
                    for j in 0..n {
                        assert!((m.g[[i, j]] - m.g[[j, i]]).abs() <= 1e-14);
                        let id = if i == j { 1.0 } else { 0.0 };
                        assert!((prod[[i, j]] - id).abs() <= 1e-11);
                    }
                }
                let (_, res) = chart.pi_at(p).unwrap();
                assert!(res <= 1e-10, "{} at {p:?}", entry.name);
            }
        }
    }
}
