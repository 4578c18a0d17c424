//! Manifold charts: metric and vector-field data given as expressions, their
//! exact partial derivatives, and seeded sampling of points and tangent frames.

mod document;
mod sample;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Array3, Array4, Array5};

use crate::error::{Error, Result};
use crate::expr::{Expr, Point};

pub use document::{load_spec, load_spec_file};
pub use sample::{sample, SampleSet};

/// A single-chart Riemannian manifold with a distinguished vector field ξ.
///
/// `metric` holds lower-index components `g_ij` (full n×n; the document
/// format needs only the upper triangle). `phi[i][j]` is the (1,1) tensor
/// component φ^i_j, so that φ(∂_j) = φ^i_j ∂_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    pub coords: Vec<String>,
    pub metric: Vec<Vec<Expr>>,
    pub xi: Vec<Expr>,
    pub phi: Option<Vec<Vec<Expr>>>,
    pub structure_functions: Option<[Expr; 3]>,
    pub sampling_box: Vec<(f64, f64)>,
    pub parallel_xi_expected: bool,
    /// Off-diagonal pairs (i < j) given twice with structurally different
    /// expressions; their symmetry is checked numerically at every point.
    pub asymmetric_pairs: Vec<(usize, usize)>,
}

impl ManifoldSpec {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.sampling_box)
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    pub fn has_contact_structure(&self) -> bool {
        self.phi.is_some() && self.structure_functions.is_some()
    }

    /// Checks that every expression only mentions chart coordinates.
    pub fn validate_variables(&self) -> Result<()> {
        let check = |key: String, e: &Expr| -> Result<()> {
            for var in e.variables() {
                if !self.coords.contains(&var) {
                    return Err(Error::UnknownCoordinate { key, var });
                }
            }
            Ok(())
        };
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                check(format!("g[{i}][{j}]"), &self.metric[i][j])?;
                if let Some(phi) = &self.phi {
                    check(format!("phi[{i}][{j}]"), &phi[i][j])?;
                }
            }
            check(format!("xi[{i}]"), &self.xi[i])?;
        }
        if let Some(fs) = &self.structure_functions {
            for (k, f) in fs.iter().enumerate() {
                check(format!("f{}", k + 1), f)?;
            }
        }
        Ok(())
    }

    /// Precomputes the symbolic partial derivatives used by every
    /// point evaluation.
    pub fn compile(&self) -> Chart {
        Chart::new(self.clone())
    }
}

/// Symbolic partials of one expression up to third order. Mixed partials
/// commute, so only non-decreasing index tuples are differentiated.
#[derive(Debug, Clone)]
struct Partials {
    value: Expr,
    first: Vec<Expr>,
    second: Vec<Expr>,
    third: Vec<Expr>,
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n + b
}

fn triple_index(n: usize, a: usize, b: usize, c: usize) -> usize {
    let mut t = [a, b, c];
    t.sort_unstable();
    (t[0] * n + t[1]) * n + t[2]
}

impl Partials {
    fn new(e: &Expr, coords: &[String], order: usize) -> Self {
        let n = coords.len();
        let first: Vec<Expr> = coords.iter().map(|c| e.diff(c)).collect();
        let mut second = vec![Expr::zero(); if order >= 2 { n * n } else { 0 }];
        let mut third = vec![Expr::zero(); if order >= 3 { n * n * n } else { 0 }];
        if order >= 2 {
            for a in 0..n {
                for b in a..n {
                    second[a * n + b] = first[a].diff(&coords[b]);
                    if order >= 3 {
                        for c in b..n {
                            third[(a * n + b) * n + c] = second[a * n + b].diff(&coords[c]);
                        }
                    }
                }
            }
        }
        Partials {
            value: e.clone(),
            first,
            second,
            third,
        }
    }
}

struct Evaluator<'a> {
    env: Point<'a>,
    point: &'a [f64],
}

impl Evaluator<'_> {
    fn eval(&self, e: &Expr) -> Result<f64> {
        if let Some(c) = e.as_const() {
            return Ok(c);
        }
        e.eval(&self.env).map_err(|source| Error::Eval {
            point: self.point.to_vec(),
            source,
        })
    }
}

/// A spec together with its derivative tables.
#[derive(Debug, Clone)]
pub struct Chart {
    spec: ManifoldSpec,
    metric: Vec<Partials>,
    metric_lower: Vec<Partials>,
    xi: Vec<Partials>,
}

/// Metric data at a point. Derivative arrays put the differentiation
/// indices first: `dg[[a, i, j]] = ∂_a g_ij`, `d2g[[a, b, i, j]]`, ….
#[derive(Debug, Clone)]
pub struct MetricValue {
    pub point: Vec<f64>,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub dg: Array3<f64>,
    pub d2g: Option<Array4<f64>>,
    pub d3g: Option<Array5<f64>>,
}

/// ξ components with partials: `dxi[[a, i]] = ∂_a ξ^i`.
#[derive(Debug, Clone)]
pub struct VectorJet {
    pub value: Array1<f64>,
    pub d1: Array2<f64>,
    pub d2: Array3<f64>,
}

/// The 1-form π = g(·, ξ) and its partials: `d1[[a, i]] = ∂_a π_i`.
#[derive(Debug, Clone)]
pub struct OneFormJet {
    pub value: Array1<f64>,
    pub d1: Array2<f64>,
    pub d2: Array3<f64>,
}

impl Chart {
    fn new(spec: ManifoldSpec) -> Self {
        let n = spec.dim();
        let mut metric = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                metric.push(Partials::new(&spec.metric[a][b], &spec.coords, 3));
            }
        }
        let metric_lower = spec
            .asymmetric_pairs
            .iter()
            .map(|&(i, j)| Partials::new(&spec.metric[j][i], &spec.coords, 0))
            .collect();
        let xi = spec
            .xi
            .iter()
            .map(|e| Partials::new(e, &spec.coords, 2))
            .collect();
        Chart {
            spec,
            metric,
            metric_lower,
            xi,
        }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn evaluator<'a>(&'a self, point: &'a [f64]) -> Result<Evaluator<'a>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(Evaluator {
            env: Point {
                names: &self.spec.coords,
                values: point,
            },
            point,
        })
    }

    /// Metric, inverse and partials up to `order` (0..=3) at `point`.
    /// Positive definiteness is verified by Cholesky factorization.
    pub fn metric_at(&self, point: &[f64], order: usize) -> Result<MetricValue> {
        let n = self.dim();
        let ev = self.evaluator(point)?;
        let mut g = Array2::zeros((n, n));
        let mut dg = Array3::zeros((n, n, n));
        let mut d2g = (order >= 2).then(|| Array4::zeros((n, n, n, n)));
        let mut d3g = (order >= 3).then(|| Array5::zeros((n, n, n, n, n)));
        for i in 0..n {
            for j in i..n {
                let p = &self.metric[i * n + j];
                let v = ev.eval(&p.value)?;
                g[[i, j]] = v;
                g[[j, i]] = v;
                if order >= 1 {
                    for a in 0..n {
                        let d = ev.eval(&p.first[a])?;
                        dg[[a, i, j]] = d;
                        dg[[a, j, i]] = d;
                    }
                }
                if let Some(d2g) = d2g.as_mut() {
                    for a in 0..n {
                        for b in a..n {
                            let d = ev.eval(&p.second[pair_index(n, a, b)])?;
                            for (x, y) in [(a, b), (b, a)] {
                                d2g[[x, y, i, j]] = d;
                                d2g[[x, y, j, i]] = d;
                            }
                        }
                    }
                }
                if let Some(d3g) = d3g.as_mut() {
                    for a in 0..n {
                        for b in a..n {
                            for c in b..n {
                                let d = ev.eval(&p.third[triple_index(n, a, b, c)])?;
                                for (x, y, z) in [
                                    (a, b, c),
                                    (a, c, b),
                                    (b, a, c),
                                    (b, c, a),
                                    (c, a, b),
                                    (c, b, a),
                                ] {
                                    d3g[[x, y, z, i, j]] = d;
                                    d3g[[x, y, z, j, i]] = d;
                                }
                            }
                        }
                    }
                }
            }
        }
        for (k, &(i, j)) in self.spec.asymmetric_pairs.iter().enumerate() {
            let gji = ev.eval(&self.metric_lower[k].value)?;
            let gij = g[[i, j]];
            if (gij - gji).abs() > 1e-12 * (1.0 + gij.abs()) {
                return Err(Error::NotSymmetric {
                    point: point.to_vec(),
                    i,
                    j,
                    gij,
                    gji,
                });
            }
        }
        let gm = DMatrix::from_fn(n, n, |i, j| g[[i, j]]);
        let chol = gm
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(point.to_vec()))?;
        let inv = chol.inverse();
        let g_inv = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (inv[(i, j)] + inv[(j, i)]));
        Ok(MetricValue {
            point: point.to_vec(),
            g,
            g_inv,
            dg,
            d2g,
            d3g,
        })
    }

    /// ξ^i with first and second partials.
    pub fn xi_at(&self, point: &[f64]) -> Result<VectorJet> {
        let n = self.dim();
        let ev = self.evaluator(point)?;
        let mut value = Array1::zeros(n);
        let mut d1 = Array2::zeros((n, n));
        let mut d2 = Array3::zeros((n, n, n));
        for (i, p) in self.xi.iter().enumerate() {
            value[i] = ev.eval(&p.value)?;
            for a in 0..n {
                d1[[a, i]] = ev.eval(&p.first[a])?;
                for b in a..n {
                    let d = ev.eval(&p.second[pair_index(n, a, b)])?;
                    d2[[a, b, i]] = d;
                    d2[[b, a, i]] = d;
                }
            }
        }
        Ok(VectorJet { value, d1, d2 })
    }

    /// π_i = g_ij ξ^j together with |π(ξ) − 1|.
    pub fn pi_at(&self, point: &[f64]) -> Result<(Array1<f64>, f64)> {
        let m = self.metric_at(point, 0)?;
        let xi = self.xi_at(point)?;
        let pi = m.g.dot(&xi.value);
        let residual = (pi.dot(&xi.value) - 1.0).abs();
        Ok((pi, residual))
    }

    /// φ^i_j at a point, if the chart carries an almost-contact structure.
    pub fn phi_at(&self, point: &[f64]) -> Result<Option<Array2<f64>>> {
        let Some(phi) = &self.spec.phi else {
            return Ok(None);
        };
        let ev = self.evaluator(point)?;
        let n = self.dim();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = ev.eval(&phi[i][j])?;
            }
        }
        Ok(Some(out))
    }

    /// (f1, f2, f3) at a point.
    pub fn structure_functions_at(&self, point: &[f64]) -> Result<Option<[f64; 3]>> {
        let Some(fs) = &self.spec.structure_functions else {
            return Ok(None);
        };
        let ev = self.evaluator(point)?;
        Ok(Some([ev.eval(&fs[0])?, ev.eval(&fs[1])?, ev.eval(&fs[2])?]))
    }
}

/// Lowers ξ with the metric, carrying partials through the product rule.
pub fn lower_xi(m: &MetricValue, xi: &VectorJet) -> OneFormJet {
    let n = m.g.nrows();
    let value = m.g.dot(&xi.value);
    let mut d1 = Array2::zeros((n, n));
    let mut d2 = Array3::zeros((n, n, n));
    for a in 0..n {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += m.dg[[a, i, j]] * xi.value[j] + m.g[[i, j]] * xi.d1[[a, j]];
            }
            d1[[a, i]] = s;
        }
    }
    if let Some(d2g) = &m.d2g {
        for a in 0..n {
            for b in 0..n {
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..n {
                        s += d2g[[a, b, i, j]] * xi.value[j]
                            + m.dg[[a, i, j]] * xi.d1[[b, j]]
                            + m.dg[[b, i, j]] * xi.d1[[a, j]]
                            + m.g[[i, j]] * xi.d2[[a, b, j]];
                    }
                    d2[[a, b, i]] = s;
                }
            }
        }
    }
    OneFormJet { value, d1, d2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::f64::consts::PI;

    fn max_abs<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn euclidean_metric_is_identity_and_flat() {
        let chart = catalog::builtin("euclidean3").unwrap().spec.compile();
        let m = chart.metric_at(&[0.2, -0.4, 0.9], 3).unwrap();
        assert_eq!(m.g, Array2::<f64>::eye(3));
        assert_eq!(max_abs(&m.dg), 0.0);
        assert_eq!(max_abs(m.d3g.as_ref().unwrap()), 0.0);
    }

    #[test]
    fn cylinder_metric_values() {
        let chart = catalog::builtin("cylinder_s2xr").unwrap().spec.compile();
        let m = chart.metric_at(&[PI / 2.0, 1.0, 0.0], 1).unwrap();
        assert_eq!(m.g, Array2::<f64>::eye(3));
        let m = chart.metric_at(&[PI / 3.0, 1.0, 0.0], 1).unwrap();
        assert!((m.g[[1, 1]] - 0.75).abs() < 1e-15);
        assert_eq!(m.g[[0, 0]], 1.0);
        assert_eq!(m.g[[2, 2]], 1.0);
        // ∂_θ sin²θ = sin 2θ
        assert!((m.dg[[0, 1, 1]] - (2.0 * PI / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn third_partials_match_hand_values() {
        let chart = catalog::builtin("cylinder_s2xr").unwrap().spec.compile();
        let th = 0.7;
        let m = chart.metric_at(&[th, 1.0, 0.0], 3).unwrap();
        // sin²θ: second partial 2cos2θ, third −4 sin2θ
        let d2 = m.d2g.unwrap();
        let d3 = m.d3g.unwrap();
        assert!((d2[[0, 0, 1, 1]] - 2.0 * (2.0 * th).cos()).abs() < 1e-14);
        assert!((d3[[0, 0, 0, 1, 1]] + 4.0 * (2.0 * th).sin()).abs() < 1e-14);
        assert_eq!(d3[[0, 0, 2, 1, 1]], 0.0);
    }

    #[test]
    fn pi_lowering() {
        let chart = catalog::builtin("euclidean3").unwrap().spec.compile();
        let (pi, res) = chart.pi_at(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pi.to_vec(), vec![1.0, 0.0, 0.0]);
        assert_eq!(res, 0.0);
        let chart = catalog::builtin("cylinder_s2xr").unwrap().spec.compile();
        let (pi, res) = chart.pi_at(&[1.0, 2.0, 0.5]).unwrap();
        assert_eq!(pi.to_vec(), vec![0.0, 0.0, 1.0]);
        assert_eq!(res, 0.0);
    }

    #[test]
    fn non_unit_xi_is_reported() {
        let mut spec = catalog::builtin("sphere3_bad_xi").unwrap().spec;
        spec.xi = vec![Expr::constant(2.0), Expr::zero(), Expr::zero()];
        let chart = spec.compile();
        let (_, res) = chart.pi_at(&[1.0, 1.0, 1.0]).unwrap();
        // g(ξ,ξ) = 4
        assert!((res - 3.0).abs() < 1e-14);
        assert!(res > 0.1);
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let mut spec = catalog::builtin("euclidean3").unwrap().spec;
        spec.metric[2][2] = Expr::parse("x").unwrap();
        let chart = spec.compile();
        assert!(chart.metric_at(&[0.5, 0.0, 0.0], 0).is_ok());
        assert!(matches!(
            chart.metric_at(&[-0.5, 0.0, 0.0], 0),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn metric_domain_errors_propagate() {
        let mut spec = catalog::builtin("euclidean3").unwrap().spec;
        spec.metric[0][0] = Expr::parse("1/x").unwrap();
        let chart = spec.compile();
        assert!(matches!(
            chart.metric_at(&[0.0, 0.0, 0.0], 0),
            Err(Error::Eval { .. })
        ));
    }

    #[test]
    fn lowered_xi_partials_match_direct_differentiation() {
        let chart = catalog::builtin("sphere3_bad_xi").unwrap().spec.compile();
        let p = [0.9, 1.1, 2.0];
        let m = chart.metric_at(&p, 2).unwrap();
        let xi = chart.xi_at(&p).unwrap();
        let pi = lower_xi(&m, &xi);
        // π_φ = g_φφ ξ^φ = sin χ sin θ; check its partials directly.
        let (c, t) = (p[0], p[1]);
        assert!((pi.value[2] - c.sin() * t.sin()).abs() < 1e-14);
        assert!((pi.d1[[0, 2]] - c.cos() * t.sin()).abs() < 1e-14);
        assert!((pi.d2[[0, 1, 2]] - c.cos() * t.cos()).abs() < 1e-14);
        assert!((pi.d2[[0, 0, 2]] + c.sin() * t.sin()).abs() < 1e-14);
    }
}
