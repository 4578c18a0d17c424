//! Curvature of both connections and the tensors built from it.
//!
//! `r[[l, i, j, k]] = R^l_{ijk}` with R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l and
//! R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z. Ricci tensors contract the
//! first slot: S_{jk} = R^i_{ijk}. The lowered tensor is
//! `lowered[[i, j, k, l]] = ′R_{ijkl} = g_{lm} R^m_{ijk}`.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Array4, Array5, Axis};
use serde::Serialize;

use crate::connections::{
    bilinear, covariant_derivative, lambda, nabla_pi, projective_weights, ConnectionCoeffs,
    ConnectionKind, PointData,
};
use crate::error::{Error, Result};
use crate::geometry::{Chart, SampleSet};
use crate::tensor::{kronecker, TensorValue, Variance};

#[derive(Debug, Clone)]
pub struct CurvatureValue {
    pub kind: ConnectionKind,
    pub r: Array4<f64>,
    pub lowered: Array4<f64>,
    /// Coordinate partials `dr[[a, l, i, j, k]] = ∂_a R^l_{ijk}` when the
    /// connection carries second partials.
    pub dr: Option<Array5<f64>>,
}

impl CurvatureValue {
    pub fn dim(&self) -> usize {
        self.r.shape()[0]
    }

    /// R(X, Y)Z.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Array1<f64> {
        apply3(&self.r, x, y, z)
    }

    /// The endomorphism R(X, Y) as a matrix `m[[l, k]]`.
    pub fn operator(&self, x: &[f64], y: &[f64]) -> Array2<f64> {
        operator(&self.r, x, y)
    }
}

/// T(X, Y)Z for a (1,3) array `t[[l, i, j, k]]`.
pub fn apply3(t: &Array4<f64>, x: &[f64], y: &[f64], z: &[f64]) -> Array1<f64> {
    let n = t.shape()[0];
    Array1::from_shape_fn(n, |l| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..n {
                    s += t[[l, i, j, k]] * xy * z[k];
                }
            }
        }
        s
    })
}

pub fn operator(t: &Array4<f64>, x: &[f64], y: &[f64]) -> Array2<f64> {
    let n = t.shape()[0];
    Array2::from_shape_fn((n, n), |(l, k)| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += t[[l, i, j, k]] * x[i] * y[j];
            }
        }
        s
    })
}

/// ′T_{ijkl} = g_{lm} T^m_{ijk}.
pub fn lower_last(g: &Array2<f64>, t: &Array4<f64>) -> Array4<f64> {
    let n = g.nrows();
    Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
        (0..n).map(|m| g[[l, m]] * t[[m, i, j, k]]).sum()
    })
}

/// Riemann tensor of a connection with its partials when available.
pub fn riemann_from(conn: &ConnectionCoeffs, g: &Array2<f64>) -> CurvatureValue {
    let n = conn.dim();
    let gm = &conn.gamma;
    let dg = &conn.d_gamma;
    let r = Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        let mut s = dg[[i, l, j, k]] - dg[[j, l, i, k]];
        for m in 0..n {
            s += gm[[l, i, m]] * gm[[m, j, k]] - gm[[l, j, m]] * gm[[m, i, k]];
        }
        s
    });
    let dr = conn.d2_gamma.as_ref().map(|d2| {
        Array5::from_shape_fn((n, n, n, n, n), |(a, l, i, j, k)| {
            let mut s = d2[[a, i, l, j, k]] - d2[[a, j, l, i, k]];
            for m in 0..n {
                s += dg[[a, l, i, m]] * gm[[m, j, k]] + gm[[l, i, m]] * dg[[a, m, j, k]]
                    - dg[[a, l, j, m]] * gm[[m, i, k]]
                    - gm[[l, j, m]] * dg[[a, m, i, k]];
            }
            s
        })
    });
    CurvatureValue {
        kind: conn.kind,
        lowered: lower_last(g, &r),
        r,
        dr,
    }
}

pub fn riemann_at(chart: &Chart, kind: ConnectionKind, point: &[f64]) -> Result<CurvatureValue> {
    let pd = chart.point_data(point, 1)?;
    Ok(riemann_from(pd.connection(kind), &pd.metric.g))
}

/// Covariant derivative of a curvature tensor with its own connection:
/// `out[[a, l, i, j, k]] = (∇_a R)^l_{ijk}`. Needs second partials of Γ.
pub fn nabla_curvature(conn: &ConnectionCoeffs, cv: &CurvatureValue) -> Option<Array5<f64>> {
    let n = cv.dim();
    let dr = cv.dr.as_ref()?;
    let t = TensorValue::new(
        vec![
            Variance::Upper,
            Variance::Lower,
            Variance::Lower,
            Variance::Lower,
        ],
        cv.r.clone().into_dyn(),
    );
    let out = covariant_derivative(conn, &t, &dr.clone().into_dyn()).ok()?;
    out.data.into_shape_with_order((n, n, n, n, n)).ok()
}

/// Component form of R(X,Y)Z + λ{π(X)π(Z)Y − π(Y)π(Z)X}.
pub fn rtilde_closed_form(pd: &PointData, lc: &CurvatureValue) -> Array4<f64> {
    let n = pd.dim();
    let lam = lambda(n);
    let p = &pd.pi.value;
    Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        lc.r[[l, i, j, k]] + lam * (p[i] * p[k] * kronecker(l, j) - p[j] * p[k] * kronecker(l, i))
    })
}

/// R(X,Y)Z + λ{π(X)π(Z)Y − π(Y)π(Z)X} as a vector.
pub fn rtilde_closed_form_at(
    pd: &PointData,
    lc: &CurvatureValue,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Array1<f64> {
    let lam = lambda(pd.dim());
    let (px, py, pz) = (pd.pi_of(x), pd.pi_of(y), pd.pi_of(z));
    let base = lc.apply(x, y, z);
    Array1::from_shape_fn(pd.dim(), |l| {
        base[l] + lam * (px * pz * y[l] - py * pz * x[l])
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBeta {
    pub theta: Array2<f64>,
    pub beta: Array2<f64>,
}

/// θ(X,Y) = ((∇_X(φ+ψ))(Y) − (φ+ψ)(X)(φ+ψ)(Y)) and
/// β(X,Y) = d(φ+ψ)(X,Y), with φ + ψ = n/(n+1) π.
pub fn theta_beta_at(pd: &PointData) -> ThetaBeta {
    let n = pd.dim();
    let (wa, _) = projective_weights(n);
    let np = nabla_pi(&pd.lc, &pd.pi);
    let p = &pd.pi.value;
    ThetaBeta {
        theta: Array2::from_shape_fn((n, n), |(i, j)| wa * np[[i, j]] - wa * wa * p[i] * p[j]),
        beta: Array2::from_shape_fn((n, n), |(i, j)| wa * (np[[i, j]] - np[[j, i]])),
    }
}

/// R + β(X,Y)Z + θ(X,Z)Y − θ(Y,Z)X in components.
pub fn eq4_reconstruction(lc: &CurvatureValue, tb: &ThetaBeta) -> Array4<f64> {
    let n = lc.dim();
    Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        lc.r[[l, i, j, k]] + tb.beta[[i, j]] * kronecker(l, k) + tb.theta[[i, k]] * kronecker(l, j)
            - tb.theta[[j, k]] * kronecker(l, i)
    })
}

/// S_{jk} = R^i_{ijk}.
pub fn ricci_from(r: &Array4<f64>) -> Array2<f64> {
    let n = r.shape()[0];
    Array2::from_shape_fn((n, n), |(j, k)| (0..n).map(|i| r[[i, i, j, k]]).sum())
}

/// ∂_a S_{jk} from ∂_a R^i_{ijk}.
pub fn ricci_partials(dr: &Array5<f64>) -> ndarray::Array3<f64> {
    let n = dr.shape()[0];
    ndarray::Array3::from_shape_fn((n, n, n), |(a, j, k)| {
        (0..n).map(|i| dr[[a, i, i, j, k]]).sum()
    })
}

pub fn trace(g_inv: &Array2<f64>, s: &Array2<f64>) -> f64 {
    (g_inv * s).sum()
}

#[derive(Debug, Clone)]
pub struct RicciValue {
    pub s: Array2<f64>,
    pub s_tilde: Array2<f64>,
    pub r: f64,
    pub r_tilde: f64,
    pub lambda: f64,
}

pub fn ricci_values(pd: &PointData, lc: &CurvatureValue, pt: &CurvatureValue) -> RicciValue {
    let s = ricci_from(&lc.r);
    let s_tilde = ricci_from(&pt.r);
    RicciValue {
        r: trace(&pd.metric.g_inv, &s),
        r_tilde: trace(&pd.metric.g_inv, &s_tilde),
        s,
        s_tilde,
        lambda: lambda(pd.dim()),
    }
}

pub fn ricci_at(chart: &Chart, point: &[f64]) -> Result<RicciValue> {
    let pd = chart.point_data(point, 1)?;
    let lc = riemann_from(&pd.lc, &pd.metric.g);
    let pt = riemann_from(&pd.pt, &pd.metric.g);
    Ok(ricci_values(&pd, &lc, &pt))
}

/// P(X,Y)Z = R(X,Y)Z − (1/(n−1)){S(Y,Z)X − S(X,Z)Y}.
pub fn projective_from(r: &Array4<f64>, s: &Array2<f64>) -> Result<Array4<f64>> {
    let n = r.shape()[0];
    if n <= 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let c = 1.0 / (n as f64 - 1.0);
    Ok(Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        r[[l, i, j, k]] - c * (s[[j, k]] * kronecker(l, i) - s[[i, k]] * kronecker(l, j))
    }))
}

pub fn projective_at(chart: &Chart, kind: ConnectionKind, point: &[f64]) -> Result<Array4<f64>> {
    if chart.dim() <= 2 {
        return Err(Error::DimensionTooSmall(chart.dim()));
    }
    let cv = riemann_at(chart, kind, point)?;
    projective_from(&cv.r, &ricci_from(&cv.r))
}

/// (A·T)(Z,U)V = A(T(Z,U)V) − T(AZ,U)V − T(Z,AU)V − T(Z,U)AV for an
/// endomorphism `a[[l, m]]` acting as a derivation on a (1,3) tensor.
pub fn derivation(a: &Array2<f64>, t: &Array4<f64>) -> Array4<f64> {
    let n = a.nrows();
    Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        let mut s = 0.0;
        for m in 0..n {
            s += a[[l, m]] * t[[m, i, j, k]]
                - t[[l, m, j, k]] * a[[m, i]]
                - t[[l, i, m, k]] * a[[m, j]]
                - t[[l, i, j, m]] * a[[m, k]];
        }
        s
    })
}

/// (R(X,Y)·T) for the curvature `cv` and tangent vectors X, Y.
pub fn derivation_apply(cv: &CurvatureValue, x: &[f64], y: &[f64], t: &Array4<f64>) -> Array4<f64> {
    derivation(&cv.operator(x, y), t)
}

/// Largest component of R(∂_i,∂_j)·T over all coordinate pairs i < j.
pub fn derivation_max(r: &Array4<f64>, t: &Array4<f64>) -> f64 {
    let n = r.shape()[0];
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let a = r.index_axis(Axis(1), i).index_axis(Axis(1), j).to_owned();
            let d = derivation(&a, t);
            worst = d.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiEinsteinFit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues split as {a: n−1, a+b: 1} within tolerance.
    pub multiplicity_ok: bool,
    /// b ≠ 0 and the eigenvalue pattern holds.
    pub quasi_einstein: bool,
}

/// Least-squares fit of S ≈ a·g + b·π⊗π over the independent components.
pub fn quasi_einstein_fit(
    s: &Array2<f64>,
    g: &Array2<f64>,
    pi: &Array1<f64>,
) -> Result<QuasiEinsteinFit> {
    let n = g.nrows();
    if pi.iter().all(|p| *p == 0.0) {
        return Err(Error::ZeroOneForm);
    }
    let rows = n * (n + 1) / 2;
    let mut design = DMatrix::zeros(rows, 2);
    let mut rhs = nalgebra::DVector::zeros(rows);
    let mut r = 0;
    for i in 0..n {
        for j in i..n {
            design[(r, 0)] = g[[i, j]];
            design[(r, 1)] = pi[i] * pi[j];
            rhs[r] = s[[i, j]];
            r += 1;
        }
    }
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::ZeroOneForm)?;
    let (a, b) = (sol[0], sol[1]);
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (s[[i, j]] - a * g[[i, j]] - b * pi[i] * pi[j]).abs())
        .fold(0.0, f64::max);

    let eigenvalues = ricci_eigenvalues(s, g)?;
    let scale = 1.0 + a.abs() + b.abs();
    let tol = 1e-8 * scale;
    let simple = a + b;
    let mut multiplicity_ok = false;
    if let Some(pos) = eigenvalues
        .iter()
        .position(|e| (e - simple).abs() <= tol)
    {
        multiplicity_ok = eigenvalues
            .iter()
            .enumerate()
            .all(|(k, e)| k == pos || (e - a).abs() <= tol);
    }
    let quasi_einstein = b.abs() > tol && multiplicity_ok && residual <= tol;
    Ok(QuasiEinsteinFit {
        a,
        b,
        residual,
        eigenvalues,
        multiplicity_ok,
        quasi_einstein,
    })
}

/// Eigenvalues of the Ricci operator g⁻¹S, ascending.
pub fn ricci_eigenvalues(s: &Array2<f64>, g: &Array2<f64>) -> Result<Vec<f64>> {
    let n = g.nrows();
    let gm = DMatrix::from_fn(n, n, |i, j| g[[i, j]]);
    let sm = DMatrix::from_fn(n, n, |i, j| 0.5 * (s[[i, j]] + s[[j, i]]));
    let chol = gm
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(Vec::new()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite(Vec::new()))?;
    let c = &l_inv * sm * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

#[derive(Debug, Clone, Serialize)]
pub struct NullityFit {
    pub k: f64,
    pub residual: f64,
    pub pairs: usize,
}

/// Fits R(X,Y)ξ ≈ k[g(Y,ξ)X − g(X,ξ)Y] over every pair of frame vectors at
/// every sample. For ∇̃ the parallel-unit hypothesis is checked first.
pub fn nullity_fit(
    chart: &Chart,
    kind: ConnectionKind,
    samples: &SampleSet,
    gate_tolerance: f64,
) -> Result<NullityFit> {
    let mut observed = Vec::new();
    let mut model = Vec::new();
    let mut gate: f64 = 0.0;
    for (p, frame) in samples.points.iter().zip(&samples.frames) {
        let pd = chart.point_data(p, 1)?;
        if kind == ConnectionKind::ProjectiveSemiSymmetric {
            let (c, f, u) = crate::connections::parallel_xi_residuals(&pd, frame);
            gate = gate.max(c).max(f).max(u);
        }
        let cv = riemann_from(pd.connection(kind), &pd.metric.g);
        let xi = pd.xi.value.to_vec();
        for (ai, x) in frame.iter().enumerate() {
            for y in &frame[ai + 1..] {
                let r = cv.apply(x, y, &xi);
                let (px, py) = (pd.pi_of(x), pd.pi_of(y));
                let m = Array1::from_shape_fn(pd.dim(), |l| py * x[l] - px * y[l]);
                observed.push(r);
                model.push(m);
            }
        }
    }
    if gate > gate_tolerance {
        return Err(Error::GateFailed(gate));
    }
    let num: f64 = observed.iter().zip(&model).map(|(r, m)| r.dot(m)).sum();
    let den: f64 = model.iter().map(|m| m.dot(m)).sum();
    let k = if den > 0.0 { num / den } else { 0.0 };
    let residual = observed
        .iter()
        .zip(&model)
        .flat_map(|(r, m)| r.iter().zip(m.iter()).map(|(a, b)| (a - k * b).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    Ok(NullityFit {
        k,
        residual,
        pairs: observed.len(),
    })
}

/// g(X, Y) helper re-exported for checks that mix vectors and tensors.
pub fn metric_pair(pd: &PointData, x: &[f64], y: &[f64]) -> f64 {
    bilinear(&pd.metric.g, x, y)
}
