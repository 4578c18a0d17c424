//! Levi-Civita and projective semi-symmetric connections in coordinates.
//!
//! Coefficients are stored as `gamma[[k, i, j]] = Γ^k_{ij}` with `i` the
//! direction of differentiation, so `∇_X Y = (X^i ∂_i Y^k + Γ^k_{ij} X^i Y^j) ∂_k`.
//! Partials put differentiation indices first: `d_gamma[[a, k, i, j]]`.

use ndarray::{Array1, Array2, Array3, Array4, Array5, ArrayD, IxDyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{lower_xi, Chart, MetricValue, OneFormJet, VectorJet};
use crate::tensor::{kronecker, TensorValue, Variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    ProjectiveSemiSymmetric,
}

impl ConnectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConnectionKind::LeviCivita => "levi_civita",
            ConnectionKind::ProjectiveSemiSymmetric => "projective_semi_symmetric",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConnectionCoeffs {
    pub kind: ConnectionKind,
    pub gamma: Array3<f64>,
    pub d_gamma: Array4<f64>,
    pub d2_gamma: Option<Array5<f64>>,
}

impl ConnectionCoeffs {
    pub fn dim(&self) -> usize {
        self.gamma.shape()[0]
    }

    /// ∇_X Y at the point for constant-coefficient fields X, Y.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Array1<f64> {
        let n = self.dim();
        Array1::from_shape_fn(n, |k| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.gamma[[k, i, j]] * x[i] * y[j];
                }
            }
            s
        })
    }
}

/// The 1-forms φ and ψ whose combination defines ∇̃.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormPair {
    pub phi: Array1<f64>,
    pub psi: Array1<f64>,
}

impl OneFormPair {
    pub fn from_pi(pi: &Array1<f64>) -> Self {
        let n = pi.len() as f64;
        OneFormPair {
            phi: pi * 0.5,
            psi: pi * ((n - 1.0) / (2.0 * (n + 1.0))),
        }
    }
}

/// Weights (a, b) in Γ̃^k_{ij} = Γ^k_{ij} + a π_j δ^k_i + b π_i δ^k_j.
pub fn projective_weights(n: usize) -> (f64, f64) {
    let n = n as f64;
    (n / (n + 1.0), -1.0 / (n + 1.0))
}

/// λ = −n²/(n+1)².
pub fn lambda(n: usize) -> f64 {
    let n = n as f64;
    -(n * n) / ((n + 1.0) * (n + 1.0))
}

/// Everything the curvature and check code needs at one point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub point: Vec<f64>,
    pub metric: MetricValue,
    pub xi: VectorJet,
    pub pi: OneFormJet,
    pub unit_residual: f64,
    pub lc: ConnectionCoeffs,
    pub pt: ConnectionCoeffs,
}

impl PointData {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn connection(&self, kind: ConnectionKind) -> &ConnectionCoeffs {
        match kind {
            ConnectionKind::LeviCivita => &self.lc,
            ConnectionKind::ProjectiveSemiSymmetric => &self.pt,
        }
    }

    pub fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.metric.g, x, y)
    }

    pub fn pi_of(&self, x: &[f64]) -> f64 {
        self.pi.value.iter().zip(x).map(|(p, v)| p * v).sum()
    }
}

pub fn bilinear(m: &Array2<f64>, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[[i, j]] * x[i] * y[j];
        }
    }
    s
}

impl Chart {
    /// Metric, ξ, π and both connections at `point`, with connection
    /// coefficients differentiated `derivs` times (1 or 2).
    pub fn point_data(&self, point: &[f64], derivs: usize) -> Result<PointData> {
        let derivs = derivs.clamp(1, 2);
        let metric = self.metric_at(point, derivs + 1)?;
        let xi = self.xi_at(point)?;
        let pi = lower_xi(&metric, &xi);
        let unit_residual = (pi.value.dot(&xi.value) - 1.0).abs();
        let lc = levi_civita_from_metric(&metric);
        let pt = projective_from(&lc, &pi);
        Ok(PointData {
            point: point.to_vec(),
            metric,
            xi,
            pi,
            unit_residual,
            lc,
            pt,
        })
    }
}

fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.dot(b)
}

/// Christoffel symbols and their partials from metric partials. The
/// derivative order of the result is one less than that of `m`.
pub fn levi_civita_from_metric(m: &MetricValue) -> ConnectionCoeffs {
    let n = m.g.nrows();
    let dg = &m.dg;
    let slice2 = |a: &Array3<f64>, k: usize| a.index_axis(ndarray::Axis(0), k).to_owned();

    // Γ_{l,ij}
    let first = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
        0.5 * (dg[[i, j, l]] + dg[[j, i, l]] - dg[[l, i, j]])
    });
    let dg_mats: Vec<Array2<f64>> = (0..n).map(|a| slice2(dg, a)).collect();
    let dginv: Vec<Array2<f64>> = dg_mats
        .iter()
        .map(|d| -matmul(&matmul(&m.g_inv, d), &m.g_inv))
        .collect();

    let raise = |inv: &Array2<f64>, low: &Array3<f64>| {
        Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            (0..n).map(|l| inv[[k, l]] * low[[l, i, j]]).sum()
        })
    };
    let gamma = raise(&m.g_inv, &first);

    let mut d_gamma = Array4::zeros((n, n, n, n));
    let mut d_first = Vec::new();
    if let Some(d2g) = &m.d2g {
        for a in 0..n {
            let dfa = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
                0.5 * (d2g[[a, i, j, l]] + d2g[[a, j, i, l]] - d2g[[a, l, i, j]])
            });
            let v = &raise(&dginv[a], &first) + &raise(&m.g_inv, &dfa);
            d_gamma.index_axis_mut(ndarray::Axis(0), a).assign(&v);
            d_first.push(dfa);
        }
    }

    let d2_gamma = match (&m.d2g, &m.d3g) {
        (Some(d2g), Some(d3g)) => {
            let mut out = Array5::zeros((n, n, n, n, n));
            for a in 0..n {
                for b in 0..n {
                    let d2g_ab = Array2::from_shape_fn((n, n), |(i, j)| d2g[[a, b, i, j]]);
                    let d2ginv = -(matmul(&matmul(&dginv[b], &dg_mats[a]), &m.g_inv)
                        + matmul(&matmul(&m.g_inv, &d2g_ab), &m.g_inv)
                        + matmul(&matmul(&m.g_inv, &dg_mats[a]), &dginv[b]));
                    let d2f = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
                        0.5 * (d3g[[a, b, i, j, l]] + d3g[[a, b, j, i, l]] - d3g[[a, b, l, i, j]])
                    });
                    let v = raise(&d2ginv, &first)
                        + raise(&dginv[a], &d_first[b])
                        + raise(&dginv[b], &d_first[a])
                        + raise(&m.g_inv, &d2f);
                    out.index_axis_mut(ndarray::Axis(0), a)
                        .index_axis_mut(ndarray::Axis(0), b)
                        .assign(&v);
                }
            }
            Some(out)
        }
        _ => None,
    };

    ConnectionCoeffs {
        kind: ConnectionKind::LeviCivita,
        gamma,
        d_gamma,
        d2_gamma,
    }
}

/// Γ̃ from Γ and π: Γ̃^k_{ij} = Γ^k_{ij} + n/(n+1) π_j δ^k_i − 1/(n+1) π_i δ^k_j.
pub fn projective_from(lc: &ConnectionCoeffs, pi: &OneFormJet) -> ConnectionCoeffs {
    let n = lc.dim();
    let (wa, wb) = projective_weights(n);
    let p = &pi.value;
    let gamma = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        lc.gamma[[k, i, j]] + wa * p[j] * kronecker(k, i) + wb * p[i] * kronecker(k, j)
    });
    let d_gamma = Array4::from_shape_fn((n, n, n, n), |(c, k, i, j)| {
        lc.d_gamma[[c, k, i, j]]
            + wa * pi.d1[[c, j]] * kronecker(k, i)
            + wb * pi.d1[[c, i]] * kronecker(k, j)
    });
    let d2_gamma = lc.d2_gamma.as_ref().map(|d2| {
        Array5::from_shape_fn((n, n, n, n, n), |(c, d, k, i, j)| {
            d2[[c, d, k, i, j]]
                + wa * pi.d2[[c, d, j]] * kronecker(k, i)
                + wb * pi.d2[[c, d, i]] * kronecker(k, j)
        })
    });
    ConnectionCoeffs {
        kind: ConnectionKind::ProjectiveSemiSymmetric,
        gamma,
        d_gamma,
        d2_gamma,
    }
}

pub fn levi_civita_at(chart: &Chart, point: &[f64]) -> Result<ConnectionCoeffs> {
    Ok(chart.point_data(point, 1)?.lc)
}

pub fn projective_coeffs_at(chart: &Chart, point: &[f64]) -> Result<ConnectionCoeffs> {
    Ok(chart.point_data(point, 1)?.pt)
}

/// Torsion components T^k_{ij} = π_j δ^k_i − π_i δ^k_j.
pub fn torsion_tensor(pi: &Array1<f64>) -> Array3<f64> {
    let n = pi.len();
    Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        pi[j] * kronecker(k, i) - pi[i] * kronecker(k, j)
    })
}

/// Antisymmetric part Γ^k_{ij} − Γ^k_{ji} of the coefficients.
pub fn torsion_from_coeffs(conn: &ConnectionCoeffs) -> Array3<f64> {
    let n = conn.dim();
    Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        conn.gamma[[k, i, j]] - conn.gamma[[k, j, i]]
    })
}

/// T̃(X, Y) = π(Y)X − π(X)Y.
pub fn torsion_at(pi: &Array1<f64>, x: &[f64], y: &[f64]) -> Array1<f64> {
    let px: f64 = pi.iter().zip(x).map(|(a, b)| a * b).sum();
    let py: f64 = pi.iter().zip(y).map(|(a, b)| a * b).sum();
    Array1::from_shape_fn(pi.len(), |k| py * x[k] - px * y[k])
}

/// Closed-form non-metricity Q_{ijk} = (∇̃_i g)_{jk}
/// = (2π_i g_jk − n π_j g_ik − n π_k g_ij)/(n+1).
pub fn nonmetricity_closed(g: &Array2<f64>, pi: &Array1<f64>) -> Array3<f64> {
    let n = pi.len();
    let nf = n as f64;
    Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        (2.0 * pi[i] * g[[j, k]] - nf * pi[j] * g[[i, k]] - nf * pi[k] * g[[i, j]]) / (nf + 1.0)
    })
}

/// (∇̃_i g)_{jk} by covariant differentiation of the metric with Γ̃.
pub fn nonmetricity_direct(pd: &PointData) -> Array3<f64> {
    let n = pd.dim();
    let g = TensorValue::new(
        vec![Variance::Lower, Variance::Lower],
        pd.metric.g.clone().into_dyn(),
    );
    let dg = pd.metric.dg.clone().into_dyn();
    let out = covariant_derivative(&pd.pt, &g, &dg).expect("rank (0,2) is supported");
    out.data.into_shape_with_order((n, n, n)).expect("shape")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonmetricity {
    pub closed_form: f64,
    pub direct: f64,
    pub discrepancy: f64,
}

/// (∇̃_X g)(Y, Z) evaluated both ways.
pub fn nonmetricity_at(pd: &PointData, x: &[f64], y: &[f64], z: &[f64]) -> Nonmetricity {
    let contract = |q: &Array3<f64>| {
        let n = pd.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += q[[i, j, k]] * x[i] * y[j] * z[k];
                }
            }
        }
        s
    };
    let closed_form = contract(&nonmetricity_closed(&pd.metric.g, &pd.pi.value));
    let direct = contract(&nonmetricity_direct(pd));
    Nonmetricity {
        closed_form,
        direct,
        discrepancy: (closed_form - direct).abs(),
    }
}

/// Covariant derivative of a tensor field given its value and coordinate
/// partials (`partials` has the differentiation index as axis 0). The new
/// lower index is placed first: `(∇T)[[a, ...]] = (∇_a T)[[...]]`.
pub fn covariant_derivative(
    conn: &ConnectionCoeffs,
    t: &TensorValue,
    partials: &ArrayD<f64>,
) -> Result<TensorValue> {
    let (upper, lower) = t.rank();
    if upper > 1 || lower > 3 {
        return Err(Error::UnsupportedRank { upper, lower });
    }
    let n = conn.dim();
    let r = t.variance.len();
    let mut shape = vec![n; r + 1];
    shape[0] = n;
    if partials.shape() != shape.as_slice() || t.data.shape() != &shape[1..] {
        return Err(Error::DimensionMismatch(format!(
            "tensor shape {:?} and partials shape {:?} do not match dimension {n}",
            t.data.shape(),
            partials.shape()
        )));
    }
    let mut out = partials.clone();
    let mut idx = vec![0usize; r];
    for (full, v) in out.indexed_iter_mut() {
        let a = full[0];
        for s in 0..r {
            idx[s] = full[s + 1];
        }
        let mut acc = 0.0;
        for (s, var) in t.variance.iter().enumerate() {
            let orig = idx[s];
            for m in 0..n {
                idx[s] = m;
                let tv = t.data[IxDyn(&idx)];
                acc += match var {
                    Variance::Upper => conn.gamma[[orig, a, m]] * tv,
                    Variance::Lower => -conn.gamma[[m, a, orig]] * tv,
                };
            }
            idx[s] = orig;
        }
        *v += acc;
    }
    let mut variance = vec![Variance::Lower];
    variance.extend_from_slice(&t.variance);
    Ok(TensorValue::new(variance, out))
}

/// (∇_i π)_j for the given connection.
pub fn nabla_pi(conn: &ConnectionCoeffs, pi: &OneFormJet) -> Array2<f64> {
    let n = conn.dim();
    Array2::from_shape_fn((n, n), |(i, j)| {
        pi.d1[[i, j]] - (0..n).map(|m| conn.gamma[[m, i, j]] * pi.value[m]).sum::<f64>()
    })
}

/// (∇_i ξ)^k for the given connection.
pub fn nabla_xi(conn: &ConnectionCoeffs, xi: &VectorJet) -> Array2<f64> {
    let n = conn.dim();
    Array2::from_shape_fn((n, n), |(i, k)| {
        xi.d1[[i, k]] + (0..n).map(|m| conn.gamma[[k, i, m]] * xi.value[m]).sum::<f64>()
    })
}

/// Residuals of the parallel-unit hypothesis at one point:
/// (max |(∇π)_{ij}|, max over frame pairs |(∇π)(X, Y)|, |g(ξ, ξ) − 1|).
pub fn parallel_xi_residuals(pd: &PointData, frame: &[Vec<f64>]) -> (f64, f64, f64) {
    let np = nabla_pi(&pd.lc, &pd.pi);
    let comp = crate::tensor::max_abs(np.iter().copied());
    let mut pairs: f64 = 0.0;
    for x in frame {
        for y in frame {
            pairs = pairs.max(bilinear(&np, x, y).abs());
        }
    }
    (comp, pairs, pd.unit_residual)
}
