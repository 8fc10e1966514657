//! Curvature of left-invariant metrics.
//!
//! All computations run in the orthonormal frame produced by the Cholesky
//! factor of the Gram matrix. In that frame the inner product is the dot
//! product and the algebra is described by its frame structure constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::exact::{self, QVec, Q};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("gram matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("gram matrix is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("gram matrix has a non-finite entry")]
    NonFinite,
    #[error("frame matrix is singular")]
    SingularFrame,
    #[error("metric has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurvatureError {
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the two vectors are linearly dependent; the plane is degenerate")]
    Degenerate,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// An inner product on the algebra, with its Cholesky orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    gram: DMatrix<f64>,
    /// Lᵀ where gram = L Lᵀ; maps basis coordinates to frame coordinates.
    lt: DMatrix<f64>,
    /// Columns are the orthonormal frame vectors E_i = L⁻ᵀ e_i in basis coordinates.
    frame: DMatrix<f64>,
}

impl Metric {
    pub fn from_gram(gram: DMatrix<f64>) -> Result<Self, MetricError> {
        let (r, c) = gram.shape();
        if r != c {
            return Err(MetricError::NotSquare { rows: r, cols: c });
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(MetricError::NonFinite);
        }
        let scale = gram.amax().max(1.0);
        for i in 0..r {
            for j in 0..i {
                if (gram[(i, j)] - gram[(j, i)]).abs() > 1e-12 * scale {
                    return Err(MetricError::NotSymmetric { i, j });
                }
            }
        }
        let sym = (&gram + gram.transpose()) * 0.5;
        let chol = nalgebra::Cholesky::new(sym.clone()).ok_or(MetricError::NotPositiveDefinite)?;
        let lt = chol.l().transpose();
        let frame = lt.clone().try_inverse().ok_or(MetricError::NotPositiveDefinite)?;
        Ok(Metric { gram: sym, lt, frame })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(MetricError::NotSquare { rows: n, cols: bad.len() });
        }
        Self::from_gram(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_gram(DMatrix::identity(n, n)).expect("identity is SPD")
    }

    /// The metric for which the columns of `frame` are orthonormal:
    /// gram = B⁻ᵀ B⁻¹.
    pub fn from_orthonormal_frame(frame: &DMatrix<f64>) -> Result<Self, MetricError> {
        let inv = frame.clone().try_inverse().ok_or(MetricError::SingularFrame)?;
        let g = inv.transpose() * &inv;
        let g = (&g + g.transpose()) * 0.5;
        Self::from_gram(g)
    }

    /// Gram = BᵀB + 1e−6·I with B uniform on [−1, 1].
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let g = b.transpose() * &b + DMatrix::identity(n, n) * 1e-6;
        Self::from_gram(g).expect("BᵀB + εI is SPD")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_rows(&self) -> Vec<Vec<f64>> {
        mat_rows(&self.gram)
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_vector(&self, i: usize) -> Vec<f64> {
        self.frame.column(i).iter().copied().collect()
    }

    pub fn to_frame(&self, v: &[f64]) -> DVector<f64> {
        &self.lt * DVector::from_column_slice(v)
    }

    pub fn from_frame(&self, w: &DVector<f64>) -> Vec<f64> {
        (&self.frame * w).iter().copied().collect()
    }

    /// Maps basis coordinates to frame coordinates (the matrix Lᵀ).
    pub fn to_frame_matrix(&self) -> &DMatrix<f64> {
        &self.lt
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        let v = DVector::from_column_slice(v);
        u.dot(&(&self.gram * v))
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    pub fn check_dim(&self, n: usize) -> Result<(), MetricError> {
        if self.dim() != n {
            return Err(MetricError::DimensionMismatch { expected: n, got: self.dim() });
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({ "gram": self.gram_rows() })
    }

    pub fn from_json_str(s: &str) -> Result<Self, MetricError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| MetricError::Json(e.to_string()))?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self, MetricError> {
        let rows = v
            .get("gram")
            .ok_or_else(|| MetricError::Json("missing key \"gram\"".into()))?
            .as_array()
            .ok_or_else(|| MetricError::Json("\"gram\" must be an array of rows".into()))?;
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| MetricError::Json(format!("gram[{i}] must be an array")))?;
            let mut r = Vec::with_capacity(row.len());
            for (j, x) in row.iter().enumerate() {
                r.push(x.as_f64().ok_or_else(|| MetricError::Json(format!("gram[{i}][{j}] must be a number")))?);
            }
            out.push(r);
        }
        Self::from_rows(&out)
    }
}

pub fn mat_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Structure constants c_ij^k = ⟨E_k, [E_i, E_j]⟩ of an orthonormal frame.
#[derive(Debug, Clone)]
pub struct FrameTensor {
    n: usize,
    c: Vec<f64>,
    /// Nonzero entries with i < j.
    nz: Vec<(usize, usize, usize, f64)>,
}

impl FrameTensor {
    pub fn from_dense(n: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), n * n * n);
        let mut nz = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let v = c[(i * n + j) * n + k];
                    if v != 0.0 {
                        nz.push((i, j, k, v));
                    }
                }
            }
        }
        FrameTensor { n, c, nz }
    }

    /// Constants of the Cholesky frame of `metric`.
    pub fn of(alg: &NilpotentAlgebra, metric: &Metric) -> Self {
        Self::of_frame(alg, metric.frame(), metric.to_frame_matrix())
    }

    /// Constants of an arbitrary frame (columns of `frame`) whose coordinate
    /// map is `to_frame` (the inverse of `frame`).
    pub fn of_frame(alg: &NilpotentAlgebra, frame: &DMatrix<f64>, to_frame: &DMatrix<f64>) -> Self {
        let n = alg.dim();
        let cols: Vec<Vec<f64>> = (0..n).map(|i| frame.column(i).iter().copied().collect()).collect();
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in i + 1..n {
                let b = to_frame * DVector::from_vec(alg.br_f(&cols[i], &cols[j]));
                for k in 0..n {
                    c[(i * n + j) * n + k] = b[k];
                    c[(j * n + i) * n + k] = -b[k];
                }
            }
        }
        Self::from_dense(n, c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.n + j) * self.n + k]
    }

    pub fn nonzero(&self) -> &[(usize, usize, usize, f64)] {
        &self.nz
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, k, v) in &self.nz {
            let s = x[i] * y[j] - x[j] * y[i];
            if s != 0.0 {
                out[k] += v * s;
            }
        }
        out
    }

    /// Ric(E_a, E_b) = ¼ Σ_ij c_ij^a c_ij^b − ½ Σ_ik c_ai^k c_bi^k.
    pub fn ricci_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut r = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                for a in 0..n {
                    let ca = self.get(i, j, a);
                    if ca == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        r[(a, b)] += 0.5 * ca * self.get(i, j, b);
                    }
                }
            }
        }
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        s += self.get(a, i, k) * self.get(b, i, k);
                    }
                }
                r[(a, b)] -= 0.5 * s;
                if a != b {
                    r[(b, a)] -= 0.5 * s;
                }
            }
        }
        r
    }

    /// The operator ½ Σ_{i>j,k} w(i,j,k) c_ij^k (c_ij ⊗ e_k* − e_j ⊗ e_k* ad_{e_i} + e_i ⊗ e_k* ad_{e_j})
    /// in frame coordinates. With w ≡ 1 this is the Ricci operator.
    pub fn ricci_sum_matrix(&self, weight: impl Fn(usize, usize, usize) -> f64) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        // Pairs (i, j) with i > j; the stored nonzero list has i < j, so swap.
        for &(lo, hi, k, v) in &self.nz {
            let (i, j) = (hi, lo);
            let cijk = -v; // c_{hi,lo}^k = −c_{lo,hi}^k
            let w = weight(i, j, k);
            if w == 0.0 {
                continue;
            }
            let s = 0.5 * w * cijk;
            // column x = e_b
            for b in 0..n {
                // ⟨e_k, X⟩ [e_i, e_j]
                if b == k {
                    for a in 0..n {
                        m[(a, b)] += s * self.get(i, j, a);
                    }
                }
                // −⟨e_k, [e_i, X]⟩ e_j + ⟨e_k, [e_j, X]⟩ e_i
                m[(j, b)] -= s * self.get(i, b, k);
                m[(i, b)] += s * self.get(j, b, k);
            }
        }
        m
    }

    /// ⟨U(V,W), E_k⟩ = ½(⟨V,[E_k,W]⟩ + ⟨W,[E_k,V]⟩), frame coordinates.
    pub fn u_operator(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            let ek = unit_f(n, k);
            let a = self.bracket(&ek, w);
            let b = self.bracket(&ek, v);
            *o = 0.5 * (dot_f(v, &a) + dot_f(w, &b));
        }
        out
    }

    /// Unnormalized sectional curvature, frame coordinates.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let uxy = self.u_operator(x, y);
        let uxx = self.u_operator(x, x);
        let uyy = self.u_operator(y, y);
        let xy = self.bracket(x, y);
        let xxy = self.bracket(x, &xy);
        let yx: Vec<f64> = xy.iter().map(|v| -v).collect();
        let yyx = self.bracket(y, &yx);
        dot_f(&uxy, &uxy) - dot_f(&uxx, &uyy) - 0.75 * dot_f(&xy, &xy) - 0.5 * dot_f(&xxy, y) - 0.5 * dot_f(&yyx, x)
    }
}

pub(crate) fn unit_f(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub(crate) fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues within this distance are treated as one cluster.
pub fn cluster_tol(eigenvalues: &[f64]) -> f64 {
    let rho = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-8 * (rho + 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciReport {
    /// Matrix of ric in the algebra basis (row-major).
    pub operator: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors in basis coordinates, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub max_simple: bool,
    pub min_simple: bool,
    pub cluster_tol: f64,
}

impl RicciReport {
    /// Builds the report from the symmetric matrix `r` of Ric in an
    /// orthonormal frame given by the columns of `frame`, with `to_frame` its inverse.
    pub fn from_frame_matrix(r: &DMatrix<f64>, frame: &DMatrix<f64>, to_frame: &DMatrix<f64>) -> Self {
        let n = r.nrows();
        let op = frame * r * to_frame;
        let (vals, vecs) = sorted_symmetric_eigen(r);
        let tol = cluster_tol(&vals);
        let simple = |a: usize, b: usize| n <= 1 || (vals[a] - vals[b]).abs() > tol;
        let eigenvectors = (0..n)
            .map(|i| {
                let w = frame * vecs.column(i);
                w.iter().copied().collect()
            })
            .collect();
        RicciReport {
            operator: mat_rows(&op),
            max_simple: n <= 1 || simple(n - 1, n - 2),
            min_simple: n <= 1 || simple(0, 1),
            eigenvalues: vals,
            eigenvectors,
            cluster_tol: tol,
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn operator_matrix(&self) -> DMatrix<f64> {
        let n = self.operator.len();
        DMatrix::from_fn(n, n, |i, j| self.operator[i][j])
    }
}

/// Eigen-decomposition of a symmetric matrix with ascending eigenvalues and
/// eigenvectors whose largest-magnitude entry is positive.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let p = v.iamax();
        if v[p] < 0.0 {
            v = -v;
        }
        vecs.set_column(c, &v);
    }
    (vals, vecs)
}

/// Curvature evaluator for one (algebra, metric) pair with cached frame constants.
#[derive(Debug, Clone)]
pub struct Curvature<'a> {
    metric: &'a Metric,
    tensor: FrameTensor,
}

impl<'a> Curvature<'a> {
    pub fn new(alg: &NilpotentAlgebra, metric: &'a Metric) -> Result<Self, CurvatureError> {
        metric.check_dim(alg.dim())?;
        Ok(Curvature { metric, tensor: FrameTensor::of(alg, metric) })
    }

    pub fn tensor(&self) -> &FrameTensor {
        &self.tensor
    }

    pub fn metric(&self) -> &Metric {
        self.metric
    }

    fn coords(&self, v: &[f64]) -> Result<Vec<f64>, CurvatureError> {
        let n = self.tensor.dim();
        if v.len() != n {
            return Err(CurvatureError::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(self.metric.to_frame(v).iter().copied().collect())
    }

    pub fn u_operator(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>, CurvatureError> {
        let u = self.tensor.u_operator(&self.coords(v)?, &self.coords(w)?);
        Ok(self.metric.from_frame(&DVector::from_vec(u)))
    }

    pub fn sectional_k(&self, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
        Ok(self.tensor.sectional(&self.coords(x)?, &self.coords(y)?))
    }

    pub fn sectional_kappa(&self, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
        let (xf, yf) = (self.coords(x)?, self.coords(y)?);
        let xx = dot_f(&xf, &xf);
        let yy = dot_f(&yf, &yf);
        let xy = dot_f(&xf, &yf);
        let area = xx * yy - xy * xy;
        if !(area > 1e-24 * xx * yy) {
            return Err(CurvatureError::Degenerate);
        }
        Ok(self.tensor.sectional(&xf, &yf) / area)
    }

    pub fn ricci_form(&self, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
        let r = self.tensor.ricci_matrix();
        let (xf, yf) = (self.coords(x)?, self.coords(y)?);
        Ok(DVector::from_vec(xf).dot(&(r * DVector::from_vec(yf))))
    }

    pub fn ricci_frame_matrix(&self) -> DMatrix<f64> {
        self.tensor.ricci_matrix()
    }

    pub fn ricci_report(&self) -> RicciReport {
        RicciReport::from_frame_matrix(&self.tensor.ricci_matrix(), self.metric.frame(), self.metric.to_frame_matrix())
    }

    /// The Ricci operator in basis coordinates from the bracket-sum formula,
    /// independent of the frame-matrix path used by `ricci_report`.
    pub fn ricci_operator_by_sum(&self) -> DMatrix<f64> {
        let m = self.tensor.ricci_sum_matrix(|_, _, _| 1.0);
        self.metric.frame() * m * self.metric.to_frame_matrix()
    }
}

pub fn u_operator(alg: &NilpotentAlgebra, g: &Metric, v: &[f64], w: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    Curvature::new(alg, g)?.u_operator(v, w)
}

pub fn sectional_k(alg: &NilpotentAlgebra, g: &Metric, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
    Curvature::new(alg, g)?.sectional_k(x, y)
}

pub fn sectional_kappa(alg: &NilpotentAlgebra, g: &Metric, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
    Curvature::new(alg, g)?.sectional_kappa(x, y)
}

pub fn ricci_form(alg: &NilpotentAlgebra, g: &Metric, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
    Curvature::new(alg, g)?.ricci_form(x, y)
}

pub fn ricci_operator(alg: &NilpotentAlgebra, g: &Metric) -> Result<RicciReport, CurvatureError> {
    Ok(Curvature::new(alg, g)?.ricci_report())
}

/// Exact Ricci form for a rational Gram matrix, using the inverse Gram
/// instead of an orthonormal frame:
/// Ric(X,Y) = ¼ Σ g^{ac} g^{bd} ⟨[b_a,b_b],X⟩⟨[b_c,b_d],Y⟩ − ½ Σ g^{ab} ⟨[X,b_a],[Y,b_b]⟩.
pub fn ricci_form_exact(alg: &NilpotentAlgebra, gram: &[QVec], x: &[Q], y: &[Q]) -> Option<Q> {
    let n = alg.dim();
    let ginv = inverse_exact(gram)?;
    let ip = |u: &[Q], v: &[Q]| -> Q {
        let gv: QVec = gram.iter().map(|row| exact::dot(row, v)).collect();
        exact::dot(u, &gv)
    };
    let basis: Vec<QVec> = (0..n).map(|i| exact::unit(n, i)).collect();
    let p: Vec<Vec<Q>> = (0..n)
        .map(|a| (0..n).map(|b| ip(&alg.basis_bracket(a, b), x)).collect())
        .collect();
    let qm: Vec<Vec<Q>> = (0..n)
        .map(|a| (0..n).map(|b| ip(&alg.basis_bracket(a, b), y)).collect())
        .collect();
    let mut first = exact::q(0);
    for a in 0..n {
        for b in 0..n {
            if p[a][b] == exact::q(0) {
                continue;
            }
            let mut s = exact::q(0);
            for c in 0..n {
                for d in 0..n {
                    s += &ginv[a][c] * &qm[c][d] * &ginv[d][b];
                }
            }
            first += &p[a][b] * s;
        }
    }
    let adx: Vec<QVec> = basis.iter().map(|e| alg.br(x, e)).collect();
    let ady: Vec<QVec> = basis.iter().map(|e| alg.br(y, e)).collect();
    let mut second = exact::q(0);
    for a in 0..n {
        for b in 0..n {
            if ginv[a][b] != exact::q(0) {
                second += &ginv[a][b] * ip(&adx[a], &ady[b]);
            }
        }
    }
    Some(first / exact::q(4) - second / exact::q(2))
}

/// Inverse of a rational matrix, or `None` when singular.
pub fn inverse_exact(m: &[QVec]) -> Option<Vec<QVec>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        cols.push(exact::solve(m, &exact::unit(n, i), n)?);
    }
    Some((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
}

/// Rational Gram matrix (B⁻¹)ᵀB⁻¹ making the columns of `frame` orthonormal.
pub fn gram_from_frame_exact(frame_cols: &[QVec]) -> Option<Vec<QVec>> {
    let n = frame_cols.len();
    let b: Vec<QVec> = (0..n).map(|r| (0..n).map(|c| frame_cols[c][r].clone()).collect()).collect();
    let inv = inverse_exact(&b)?;
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &inv[k][i] * &inv[k][j]).sum()).collect())
            .collect(),
    )
}

pub fn metric_from_exact_gram(gram: &[QVec]) -> Result<Metric, MetricError> {
    let rows: Vec<Vec<f64>> = gram.iter().map(|r| exact::to_f64_vec(r)).collect();
    Metric::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h3() -> NilpotentAlgebra {
        catalog::heisenberg(1)
    }

    #[test]
    fn u_operator_on_h3() {
        let g = h3();
        let m = Metric::identity(3);
        let u = u_operator(&g, &m, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(u.iter().all(|v| v.abs() < 1e-15));
        // U(Z, X) = −½ Y
        let u = u_operator(&g, &m, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(u[1], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sectional_on_h3() {
        let g = h3();
        let m = Metric::identity(3);
        assert_abs_diff_eq!(sectional_k(&g, &m, &[1., 0., 0.], &[0., 1., 0.]).unwrap(), -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(sectional_k(&g, &m, &[1., 0., 0.], &[0., 0., 1.]).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(
            sectional_kappa(&g, &m, &[1., 0., 0.], &[2., 0., 0.]),
            Err(CurvatureError::Degenerate)
        ));
        // Scaling X by 2 scales K by 4 and leaves κ unchanged.
        let k2 = sectional_kappa(&g, &m, &[2., 0., 0.], &[0., 1., 0.]).unwrap();
        assert_abs_diff_eq!(k2, -0.75, epsilon = 1e-15);
    }

    #[test]
    fn ricci_on_h3_and_abelian() {
        let g = h3();
        let m = Metric::identity(3);
        assert_abs_diff_eq!(ricci_form(&g, &m, &[1., 0., 0.], &[1., 0., 0.]).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ricci_form(&g, &m, &[0., 0., 1.], &[0., 0., 1.]).unwrap(), 0.5, epsilon = 1e-15);
        let r = ricci_operator(&g, &m).unwrap();
        for (a, b) in r.eigenvalues.iter().zip([-0.5, -0.5, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(r.max_simple);
        assert!(!r.min_simple);
        let a = catalog::abelian(4);
        let r = ricci_operator(&a, &Metric::identity(4)).unwrap();
        assert!(r.operator.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn metric_rejections_and_json() {
        assert!(matches!(
            Metric::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(MetricError::NotPositiveDefinite)
        ));
        assert!(matches!(
            Metric::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]),
            Err(MetricError::NotSymmetric { .. })
        ));
        assert!(Metric::from_rows(&[vec![1.0, 0.0]]).is_err());
        let m = Metric::random(3, &mut ChaCha8Rng::seed_from_u64(1));
        let back = Metric::from_json_value(&m.to_json_value()).unwrap();
        assert_eq!(back.gram(), m.gram());
        let err = Metric::from_json_str("{\"gr\": []}").unwrap_err();
        assert!(err.to_string().contains("gram"));
    }

    #[test]
    fn cholesky_frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=7 {
            for _ in 0..20 {
                let m = Metric::random(n, &mut rng);
                let e = m.frame();
                let id = e.transpose() * m.gram() * e;
                let err = (id - DMatrix::<f64>::identity(n, n)).amax();
                let ev = m.gram().clone().symmetric_eigenvalues();
                let cond = ev.amax() / ev.min();
                // Round-off in LᵀE is of order ε·cond, so 1e−12 is only
                // reachable for well-conditioned Gram matrices.
                if cond <= 1e3 {
                    assert!(err < 1e-12, "n={n} err={err:e}");
                }
                assert!(err < 64.0 * f64::EPSILON * n as f64 * cond, "n={n} err={err:e} cond={cond:e}");
            }
        }
    }

    #[test]
    fn frame_from_declared_orthonormal_vectors() {
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 3.0, 0.0, 0.0, 1.0]);
        let m = Metric::from_orthonormal_frame(&b).unwrap();
        let id = b.transpose() * m.gram() * &b;
        assert!((id - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn two_paths_agree_and_operator_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for e in catalog::list_catalog() {
            let g = &e.algebra;
            for _ in 0..5 {
                let m = Metric::random(g.dim(), &mut rng);
                let c = Curvature::new(g, &m).unwrap();
                let rep = c.ricci_report();
                let op = rep.operator_matrix();
                let by_sum = c.ricci_operator_by_sum();
                let scale = op.amax().max(1.0);
                assert!((&op - &by_sum).amax() < 1e-9 * scale, "{}", e.id());
                let go = m.gram() * &op;
                assert!((&go - go.transpose()).amax() < 1e-10 * scale * m.gram().amax().max(1.0), "{}", e.id());
            }
        }
    }

    #[test]
    fn exact_ricci_form_matches_float() {
        use crate::exact::{q, qr};
        let g = catalog::named("filiform4");
        let frame = vec![
            vec![q(1), qr(1, 2), q(0), q(3)],
            vec![q(0), q(1), q(0), q(0)],
            vec![q(0), q(2), q(1), q(0)],
            vec![q(0), q(0), qr(-1, 3), q(1)],
        ];
        let gram = gram_from_frame_exact(&frame).unwrap();
        let m = metric_from_exact_gram(&gram).unwrap();
        let c = Curvature::new(&g, &m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ex = ricci_form_exact(&g, &gram, &exact::unit(4, i), &exact::unit(4, j)).unwrap();
                let fl = c.ricci_form(&unit_f(4, i), &unit_f(4, j)).unwrap();
                assert_abs_diff_eq!(exact::to_f64(&ex), fl, epsilon = 1e-10);
            }
        }
    }
}
