//! Diagonal metric deformations g_t(U,V) = ⟨e^{Dt}U, V⟩, the scaled Ricci
//! operators Φ_t = 2e^{−td} ric_t, their limit Φ⁰, and closed-form
//! Ricci-extremal directions.
//!
//! Matrices of Φ_t and Φ⁰ are expressed in the deformation frame {e_i},
//! which is orthonormal for the base metric. Every exponential weight used
//! below is of the form e^{(x−d)t} with x ≤ d, so nothing overflows for t ≥ 0.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::curvature::{self, dot_f, sorted_symmetric_eigen, unit_f, FrameTensor, Metric, MetricError, RicciReport};
use crate::exact;

/// Largest |λ_i t| accepted before exponentials are considered unsafe.
pub const OVERFLOW_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeformationError {
    #[error("|λ·t| = {0} exceeds the overflow limit {OVERFLOW_LIMIT}")]
    Overflow(f64),
    #[error("t must be finite and nonnegative for scaled operators, got {0}")]
    BadTime(f64),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exponents must be finite")]
    NonFiniteLambda,
    #[error("frame is not orthonormal for the base metric (deviation {0:e})")]
    FrameNotOrthonormal(f64),
    #[error("inputs are not orthonormal: {0}")]
    NotOrthonormal(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no block structure: exponents are not p ones, zeros, q minus-ones with p ≥ 1, q ≥ 2")]
    NoBlockStructure,
    #[error("top eigenvalue of A is not simple and positive (eigenvalues {0:?})")]
    NotSimple(Vec<f64>),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("deformation json: {0}")]
    Json(String),
}

/// Base metric, a base-orthonormal frame {e_i} and exponents λ_i.
#[derive(Debug, Clone)]
pub struct DeformationSpec {
    base: Metric,
    /// Columns e_i in basis coordinates.
    frame: DMatrix<f64>,
    /// Fᵀ G: basis coordinates to frame coordinates.
    coords: DMatrix<f64>,
    lambdas: Vec<f64>,
}

impl DeformationSpec {
    /// Validates the frame to 1e−8 and then re-orthonormalizes it (modified
    /// Gram–Schmidt in the base metric, order preserved).
    pub fn new(base: Metric, frame: DMatrix<f64>, lambdas: Vec<f64>) -> Result<Self, DeformationError> {
        let n = base.dim();
        if frame.shape() != (n, n) {
            return Err(DeformationError::DimensionMismatch { expected: n, got: frame.ncols() });
        }
        if lambdas.len() != n {
            return Err(DeformationError::DimensionMismatch { expected: n, got: lambdas.len() });
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(DeformationError::NonFiniteLambda);
        }
        let dev = (frame.transpose() * base.gram() * &frame - DMatrix::<f64>::identity(n, n)).amax();
        if !(dev <= 1e-8) {
            return Err(DeformationError::FrameNotOrthonormal(dev));
        }
        let frame = gram_schmidt(base.gram(), &frame);
        let coords = frame.transpose() * base.gram();
        Ok(DeformationSpec { base, frame, coords, lambdas })
    }

    /// Uses the base metric's Cholesky frame.
    pub fn with_cholesky_frame(base: Metric, lambdas: Vec<f64>) -> Result<Self, DeformationError> {
        let f = base.frame().clone();
        Self::new(base, f, lambdas)
    }

    /// The base metric is the one making the given columns orthonormal.
    pub fn from_declared_frame(frame: DMatrix<f64>, lambdas: Vec<f64>) -> Result<Self, DeformationError> {
        let base = Metric::from_orthonormal_frame(&frame)?;
        Self::new(base, frame, lambdas)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn base(&self) -> &Metric {
        &self.base
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_vector(&self, i: usize) -> Vec<f64> {
        self.frame.column(i).iter().copied().collect()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        (&self.coords * DVector::from_column_slice(v)).iter().copied().collect()
    }

    pub fn from_frame(&self, w: &[f64]) -> Vec<f64> {
        (&self.frame * DVector::from_column_slice(w)).iter().copied().collect()
    }

    /// Frame structure constants ⟨e_k, [e_i, e_j]⟩.
    pub fn tensor(&self, alg: &NilpotentAlgebra) -> FrameTensor {
        FrameTensor::of_frame(alg, &self.frame, &self.coords)
    }

    fn guard(&self, t: f64) -> Result<(), DeformationError> {
        let m = self.lambdas.iter().fold(0.0f64, |m, l| m.max((l * t).abs()));
        if !t.is_finite() || m > OVERFLOW_LIMIT {
            return Err(DeformationError::Overflow(m));
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let frame: Vec<Vec<f64>> = (0..self.dim()).map(|i| self.frame_vector(i)).collect();
        serde_json::json!({ "metric": self.base.to_json_value(), "lambdas": self.lambdas, "frame": frame })
    }

    /// `{"metric": {"gram": ...}, "lambdas": [...], "frame": [[...], ...]?}`;
    /// `frame` lists the frame vectors and defaults to the Cholesky frame.
    pub fn from_json_str(s: &str) -> Result<Self, DeformationError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| DeformationError::Json(e.to_string()))?;
        let metric = v.get("metric").ok_or_else(|| DeformationError::Json("missing key \"metric\"".into()))?;
        let base = Metric::from_json_value(metric)?;
        let lambdas = float_list(&v, "lambdas")?;
        match v.get("frame") {
            None => Self::with_cholesky_frame(base, lambdas),
            Some(f) => {
                let rows = f.as_array().ok_or_else(|| DeformationError::Json("\"frame\" must be an array".into()))?;
                let n = base.dim();
                if rows.len() != n {
                    return Err(DeformationError::DimensionMismatch { expected: n, got: rows.len() });
                }
                let mut m = DMatrix::zeros(n, n);
                for (i, r) in rows.iter().enumerate() {
                    let r = r.as_array().ok_or_else(|| DeformationError::Json(format!("frame[{i}] must be an array")))?;
                    if r.len() != n {
                        return Err(DeformationError::DimensionMismatch { expected: n, got: r.len() });
                    }
                    for (j, x) in r.iter().enumerate() {
                        m[(j, i)] =
                            x.as_f64().ok_or_else(|| DeformationError::Json(format!("frame[{i}][{j}] must be a number")))?;
                    }
                }
                Self::new(base, m, lambdas)
            }
        }
    }
}

fn float_list(v: &serde_json::Value, key: &str) -> Result<Vec<f64>, DeformationError> {
    let a = v
        .get(key)
        .ok_or_else(|| DeformationError::Json(format!("missing key \"{key}\"")))?
        .as_array()
        .ok_or_else(|| DeformationError::Json(format!("\"{key}\" must be an array")))?;
    a.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| DeformationError::Json(format!("{key}[{i}] must be a number"))))
        .collect()
}

/// Modified Gram–Schmidt of the columns of `m` in the inner product `gram`.
pub fn gram_schmidt(gram: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..m.ncols() {
        let mut v = out.column(i).into_owned();
        for j in 0..i {
            let u = out.column(j).into_owned();
            let c = u.dot(&(gram * &v));
            v -= u * c;
        }
        let nrm = v.dot(&(gram * &v)).sqrt();
        out.set_column(i, &(v / nrm));
    }
    out
}

/// Orthonormal frame (columns) whose first vectors are `head`, last vectors
/// are `tail` (both assumed orthonormal) and whose middle completes a basis.
pub fn complete_frame(metric: &Metric, head: &[Vec<f64>], tail: &[Vec<f64>]) -> Result<DMatrix<f64>, DeformationError> {
    let n = metric.dim();
    let g = metric.gram();
    let given: Vec<&Vec<f64>> = head.iter().chain(tail.iter()).collect();
    for (i, u) in given.iter().enumerate() {
        if u.len() != n {
            return Err(DeformationError::DimensionMismatch { expected: n, got: u.len() });
        }
        for (j, v) in given.iter().enumerate().take(i + 1) {
            let ip = metric.inner(u, v);
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - want).abs() > 1e-10 {
                return Err(DeformationError::NotOrthonormal(format!("vectors {j} and {i} have inner product {ip}")));
            }
        }
    }
    let mut basis: Vec<DVector<f64>> = given.iter().map(|v| DVector::from_column_slice(v)).collect();
    let mut middle = Vec::new();
    for c in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::from_vec(unit_f(n, c));
        for _ in 0..2 {
            for u in &basis {
                let a = u.dot(&(g * &v));
                v -= u * a;
            }
        }
        let nrm = v.dot(&(g * &v)).sqrt();
        if nrm > 1e-8 {
            let v = v / nrm;
            basis.push(v.clone());
            middle.push(v);
        }
    }
    let mut cols: Vec<DVector<f64>> = head.iter().map(|v| DVector::from_column_slice(v)).collect();
    cols.extend(middle);
    cols.extend(tail.iter().map(|v| DVector::from_column_slice(v)));
    Ok(DMatrix::from_columns(&cols))
}

/// Gram matrix of g_t in the algebra basis.
pub fn deformed_metric(spec: &DeformationSpec, t: f64) -> Result<Metric, DeformationError> {
    spec.guard(t)?;
    let w = DMatrix::from_diagonal(&DVector::from_iterator(spec.dim(), spec.lambdas.iter().map(|l| (l * t).exp())));
    let g = spec.coords.transpose() * w * &spec.coords;
    Ok(Metric::from_gram((&g + g.transpose()) * 0.5)?)
}

/// Ricci report of g_t computed from the frame E_i = e^{−λ_i t/2} e_i.
pub fn deformed_ricci(alg: &NilpotentAlgebra, spec: &DeformationSpec, t: f64) -> Result<RicciReport, DeformationError> {
    spec.guard(t)?;
    spec.base.check_dim(alg.dim())?;
    let n = spec.dim();
    let lam = &spec.lambdas;
    let te = eframe_tensor(&spec.tensor(alg), lam, t);
    let s = DVector::from_iterator(n, lam.iter().map(|l| (-l * t / 2.0).exp()));
    let frame_t = &spec.frame * DMatrix::from_diagonal(&s);
    let to_frame_t = DMatrix::from_diagonal(&s.map(|x| 1.0 / x)) * &spec.coords;
    Ok(RicciReport::from_frame_matrix(&te.ricci_matrix(), &frame_t, &to_frame_t))
}

/// Structure constants in the g_t-orthonormal frame E_i = e^{−λ_i t/2} e_i.
fn eframe_tensor(c: &FrameTensor, lam: &[f64], t: f64) -> FrameTensor {
    let n = c.dim();
    let mut ce = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = c.get(i, j, k);
                if v != 0.0 {
                    ce[(i * n + j) * n + k] = ((lam[k] - lam[i] - lam[j]) * t / 2.0).exp() * v;
                }
            }
        }
    }
    FrameTensor::from_dense(n, ce)
}

fn eframe_coords(spec: &DeformationSpec, t: f64, v: &[f64]) -> Vec<f64> {
    spec.to_frame(v).iter().zip(&spec.lambdas).map(|(x, l)| x * (l * t / 2.0).exp()).collect()
}

/// Ric_t(x, y) for the deformed metric, evaluated in the frame {E_i}.
pub fn deformed_ricci_form(
    alg: &NilpotentAlgebra,
    spec: &DeformationSpec,
    t: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64, DeformationError> {
    spec.guard(t)?;
    check_len(spec.dim(), &[x, y])?;
    let r = eframe_tensor(&spec.tensor(alg), &spec.lambdas, t).ricci_matrix();
    let (xe, ye) = (eframe_coords(spec, t, x), eframe_coords(spec, t, y));
    Ok((DVector::from_vec(xe).transpose() * r * DVector::from_vec(ye))[(0, 0)])
}

/// Unnormalized K_t(x, y) for the deformed metric, evaluated in the frame {E_i}.
pub fn deformed_sectional(
    alg: &NilpotentAlgebra,
    spec: &DeformationSpec,
    t: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64, DeformationError> {
    spec.guard(t)?;
    check_len(spec.dim(), &[x, y])?;
    let te = eframe_tensor(&spec.tensor(alg), &spec.lambdas, t);
    Ok(te.sectional(&eframe_coords(spec, t, x), &eframe_coords(spec, t, y)))
}

/// Exponent data: d = max over Ω of λ_k − λ_i − λ_j (i > j), the maximizing
/// triples Λ and the gap to the next exponent value.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentData {
    pub d: f64,
    pub lambda_set: Vec<(usize, usize, usize)>,
    pub gap: f64,
}

pub fn exponent_data(lambdas: &[f64]) -> ExponentData {
    let n = lambdas.len();
    let scale = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = 1e-12 * scale;
    let mut d = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..i {
            for k in 0..n {
                d = d.max(lambdas[k] - lambdas[i] - lambdas[j]);
            }
        }
    }
    let mut set = Vec::new();
    let mut second = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..i {
            for k in 0..n {
                let x = lambdas[k] - lambdas[i] - lambdas[j];
                if (x - d).abs() <= tol {
                    set.push((i, j, k));
                } else {
                    second = second.max(x);
                }
            }
        }
    }
    ExponentData { d, lambda_set: set, gap: d - second }
}

/// Φ_t = 2e^{−td} ric_t in the deformation frame, from the bracket-sum form.
pub fn scaled_ricci_by_sum(tensor: &FrameTensor, lambdas: &[f64], t: f64) -> Result<DMatrix<f64>, DeformationError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DeformationError::BadTime(t));
    }
    let d = exponent_data(lambdas).d;
    Ok(tensor.ricci_sum_matrix(|i, j, k| ((lambdas[k] - lambdas[i] - lambdas[j] - d) * t).exp()) * 2.0)
}

/// Φ_t in the deformation frame (non-symmetric) and the symmetric matrix
/// e^{−td} Ric_t in the frame {E_i}, both from the frame Ricci formula.
pub fn scaled_ricci_by_frame(
    tensor: &FrameTensor,
    lambdas: &[f64],
    t: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>), DeformationError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DeformationError::BadTime(t));
    }
    let n = tensor.dim();
    let lam = lambdas;
    let d = exponent_data(lambdas).d;
    let mut phi = DMatrix::zeros(n, n);
    let mut sym = DMatrix::zeros(n, n);
    // ¼ Σ_ij over ordered pairs = ½ Σ_{i<j}.
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..n {
                let ca = tensor.get(i, j, a);
                if ca == 0.0 {
                    continue;
                }
                let xa = lam[a] - lam[i] - lam[j] - d;
                for b in 0..n {
                    let cb = tensor.get(i, j, b);
                    if cb == 0.0 {
                        continue;
                    }
                    let xb = lam[b] - lam[i] - lam[j] - d;
                    phi[(a, b)] += 2.0 * 0.5 * (xb * t).exp() * ca * cb;
                    sym[(a, b)] += 0.5 * ((xa + xb) * t / 2.0).exp() * ca * cb;
                }
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for a in 0..n {
                let ca = tensor.get(a, i, k);
                if ca == 0.0 {
                    continue;
                }
                let xa = lam[k] - lam[a] - lam[i] - d;
                for b in 0..n {
                    let cb = tensor.get(b, i, k);
                    if cb == 0.0 {
                        continue;
                    }
                    let xb = lam[k] - lam[b] - lam[i] - d;
                    phi[(a, b)] -= 2.0 * 0.5 * (xa * t).exp() * ca * cb;
                    sym[(a, b)] -= 0.5 * ((xa + xb) * t / 2.0).exp() * ca * cb;
                }
            }
        }
    }
    Ok((phi, sym))
}

/// Block data available when the exponents are p ones, zeros, q minus-ones.
#[derive(Debug, Clone, Serialize)]
pub struct BlockData {
    pub p: usize,
    pub q: usize,
    pub j: Vec<Vec<Vec<f64>>>,
    pub a: Vec<Vec<f64>>,
    pub sum_j2: Vec<Vec<f64>>,
    /// Largest entry of Φ⁰ outside the block lower-triangular pattern, plus
    /// the deviation of the diagonal blocks from A, 0 and ΣJ_k².
    pub structure_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledRicciLimit {
    pub d: f64,
    pub lambda_set: Vec<(usize, usize, usize)>,
    pub gap: f64,
    pub phi0: Vec<Vec<f64>>,
    pub block: Option<BlockData>,
    #[serde(skip)]
    tensor: FrameTensor,
    #[serde(skip)]
    frame: DMatrix<f64>,
}

/// Returns (p, q) if the exponents are (1,…,1, 0,…,0, −1,…,−1) with p ≥ 1, q ≥ 2.
pub fn block_pattern(lambdas: &[f64]) -> Option<(usize, usize)> {
    let n = lambdas.len();
    let p = lambdas.iter().take_while(|&&l| l == 1.0).count();
    let q = lambdas.iter().rev().take_while(|&&l| l == -1.0).count();
    if p < 1 || q < 2 || p + q > n {
        return None;
    }
    if lambdas[p..n - q].iter().all(|&l| l == 0.0) {
        Some((p, q))
    } else {
        None
    }
}

impl ScaledRicciLimit {
    pub fn phi0_matrix(&self) -> DMatrix<f64> {
        rows_to_mat(&self.phi0)
    }

    pub fn tensor(&self) -> &FrameTensor {
        &self.tensor
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Eigenvalues implied by the block structure: eig(A), n−p−q zeros, eig(ΣJ_k²).
    pub fn block_eigenvalues(&self) -> Option<Vec<f64>> {
        let b = self.block.as_ref()?;
        let n = self.phi0.len();
        let (mut ev, _) = sorted_symmetric_eigen(&rows_to_mat(&b.a));
        ev.extend(std::iter::repeat_n(0.0, n - b.p - b.q));
        ev.extend(sorted_symmetric_eigen(&rows_to_mat(&b.sum_j2)).0);
        ev.sort_by(f64::total_cmp);
        Some(ev)
    }
}

pub fn rows_to_mat(r: &[Vec<f64>]) -> DMatrix<f64> {
    let n = r.len();
    let m = r.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| r[i][j])
}

pub fn scaled_ricci_limit(alg: &NilpotentAlgebra, spec: &DeformationSpec) -> Result<ScaledRicciLimit, DeformationError> {
    spec.base.check_dim(alg.dim())?;
    let tensor = spec.tensor(alg);
    Ok(limit_from_tensor(tensor, spec.frame.clone(), &spec.lambdas))
}

fn limit_from_tensor(tensor: FrameTensor, frame: DMatrix<f64>, lambdas: &[f64]) -> ScaledRicciLimit {
    let n = tensor.dim();
    let ex = exponent_data(lambdas);
    let mut in_set = vec![false; n * n * n];
    for &(i, j, k) in &ex.lambda_set {
        in_set[(i * n + j) * n + k] = true;
    }
    let phi0 = tensor.ricci_sum_matrix(|i, j, k| if in_set[(i * n + j) * n + k] { 1.0 } else { 0.0 }) * 2.0;
    let block = block_pattern(lambdas).map(|(p, q)| {
        let off = n - q;
        let j: Vec<DMatrix<f64>> =
            (0..p).map(|k| DMatrix::from_fn(q, q, |r, s| tensor.get(off + r, off + s, k))).collect();
        let a = DMatrix::from_fn(p, p, |k, l| 0.5 * (&j[k] * j[l].transpose()).trace());
        let sum_j2 = j.iter().fold(DMatrix::zeros(q, q), |acc, m| acc + m * m);
        let mut res = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let v = phi0[(r, c)];
                let expected_zero = (r < off && c >= p) || (r >= p && r < off && c >= p);
                if expected_zero {
                    res = res.max(v.abs());
                }
            }
        }
        for k in 0..p {
            for l in 0..p {
                res = res.max((phi0[(k, l)] - a[(k, l)]).abs());
            }
        }
        for r in 0..q {
            for s in 0..q {
                res = res.max((phi0[(off + r, off + s)] - sum_j2[(r, s)]).abs());
            }
        }
        BlockData {
            p,
            q,
            j: j.iter().map(curvature::mat_rows).collect(),
            a: curvature::mat_rows(&a),
            sum_j2: curvature::mat_rows(&sum_j2),
            structure_residual: res,
        }
    });
    ScaledRicciLimit {
        d: ex.d,
        lambda_set: ex.lambda_set,
        gap: ex.gap,
        phi0: curvature::mat_rows(&phi0),
        block,
        tensor,
        frame,
    }
}

/// Eigenvalues of a general real matrix, sorted by real part. Eigenvalues
/// closer than `merge` are replaced by their cluster mean; the mean of a
/// cluster is well conditioned even when the individual eigenvalues of a
/// defective block are not.
pub fn clustered_eigenvalues(m: &DMatrix<f64>, merge: f64) -> Vec<(f64, f64)> {
    let ev = m.complex_eigenvalues();
    let mut v: Vec<(f64, f64)> = ev.iter().map(|c| (c.re, c.im)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i + 1;
        while j < v.len() && (v[j].0 - v[j - 1].0).abs() <= merge && (v[j].1 - v[j - 1].1).abs() <= 2.0 * merge {
            j += 1;
        }
        let k = (j - i) as f64;
        let re = v[i..j].iter().map(|x| x.0).sum::<f64>() / k;
        let im = v[i..j].iter().map(|x| x.1).sum::<f64>() / k;
        out.extend(std::iter::repeat_n((re, im), j - i));
        i = j;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremal {
    Max,
    Min,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalCandidate {
    pub construction: String,
    pub extremal: Extremal,
    /// The candidate vector in basis coordinates.
    pub t: Vec<f64>,
    pub lambda_max: Option<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub simple: bool,
    pub zero: bool,
    /// Orthogonal p×p change of the first frame vectors applied to reach
    /// A's eigenbasis, when the given frame was not aligned.
    pub rotation: Option<Vec<Vec<f64>>>,
    /// ‖Φ⁰T − λT‖∞ in frame coordinates, when checked.
    pub residual: Option<f64>,
    /// A deformation whose limit realizes the candidate, when one exists.
    #[serde(skip)]
    pub spec: Option<DeformationSpec>,
}

impl ExtremalCandidate {
    fn plain(construction: &str, extremal: Extremal, t: Vec<f64>) -> Self {
        let zero = t.iter().all(|x| x.abs() < 1e-12);
        ExtremalCandidate {
            construction: construction.to_string(),
            extremal,
            t,
            lambda_max: None,
            xi: Vec::new(),
            eta: Vec::new(),
            simple: true,
            zero,
            rotation: None,
            residual: None,
            spec: None,
        }
    }
}

/// The top eigenvector T = Y + Σ η_r e_{n−q+r} of Φ⁰ under the block
/// structure, rotating the first p frame vectors onto A's eigenbasis first.
pub fn extremal_t(limit: &ScaledRicciLimit) -> Result<ExtremalCandidate, DeformationError> {
    let b = limit.block.as_ref().ok_or(DeformationError::NoBlockStructure)?;
    let (p, q) = (b.p, b.q);
    let n = limit.phi0.len();
    let off = n - q;
    let a = rows_to_mat(&b.a);
    let (vals, vecs) = sorted_symmetric_eigen(&a);
    let tol = curvature::cluster_tol(&vals);
    let lmax = vals[p - 1];
    let simple = lmax > tol && (p == 1 || lmax - vals[p - 2] > tol);
    if !simple {
        return Err(DeformationError::NotSimple(vals));
    }
    // Order the eigenbasis descending so the new e_1 carries λ_max.
    let o = DMatrix::from_fn(p, p, |r, c| vecs[(r, p - 1 - c)]);
    let aligned = (&o - DMatrix::<f64>::identity(p, p)).amax() < 1e-14;
    let mut rot = DMatrix::<f64>::identity(n, n);
    rot.view_mut((0, 0), (p, p)).copy_from(&o);
    let tensor = if aligned { limit.tensor.clone() } else { rotate_tensor(&limit.tensor, &rot) };
    let j: Vec<DMatrix<f64>> = (0..p).map(|k| DMatrix::from_fn(q, q, |r, s| tensor.get(off + r, off + s, k))).collect();
    let sum_j2 = j.iter().fold(DMatrix::zeros(q, q), |acc, m| acc + m * m);
    let mut y = vec![0.0; n];
    for r in 0..q {
        for s in 0..q {
            let c = j[0][(r, s)];
            if c != 0.0 {
                let br = tensor.bracket(&unit_f(n, off + r), &unit_f(n, off + s));
                for (yi, bi) in y.iter_mut().zip(&br) {
                    *yi += c * bi;
                }
            }
        }
    }
    let xi = DVector::from_fn(q, |r, _| {
        let mut s_total = 0.0;
        for s in 0..q {
            let br = tensor.bracket(&unit_f(n, off + s), &y);
            for (k, jk) in j.iter().enumerate() {
                s_total += jk[(r, s)] * br[k];
            }
        }
        s_total
    });
    let lhs = DMatrix::<f64>::identity(q, q) * lmax - &sum_j2;
    let eta = lhs.lu().solve(&xi).expect("λ_max I − ΣJ² is positive definite");
    let mut t_rot = y;
    for r in 0..q {
        t_rot[off + r] += eta[r];
    }
    let t_frame = &rot * DVector::from_vec(t_rot);
    let phi0 = limit.phi0_matrix();
    let residual = (&phi0 * &t_frame - &t_frame * lmax).amax();
    let t = (&limit.frame * &t_frame).iter().copied().collect::<Vec<_>>();
    let mut cand = ExtremalCandidate::plain("generic_limit", Extremal::Max, t);
    cand.lambda_max = Some(lmax);
    cand.xi = xi.iter().copied().collect();
    cand.eta = eta.iter().copied().collect();
    cand.simple = true;
    cand.residual = Some(residual);
    cand.rotation = if aligned { None } else { Some(curvature::mat_rows(&o)) };
    Ok(cand)
}

/// Structure constants of the frame e'_a = Σ_i Q_ia e_i for orthogonal Q.
pub fn rotate_tensor(t: &FrameTensor, q: &DMatrix<f64>) -> FrameTensor {
    let n = t.dim();
    // c'_ab^k = Σ_ijl Q_ia Q_jb Q_lk c_ij^l, contracted one index at a time.
    let mut s1 = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += q[(l, k)] * t.get(i, j, l);
                }
                s1[(i * n + j) * n + k] = acc;
            }
        }
    }
    let mut s2 = vec![0.0; n * n * n];
    for i in 0..n {
        for b in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += q[(j, b)] * s1[(i * n + j) * n + k];
                }
                s2[(i * n + b) * n + k] = acc;
            }
        }
    }
    let mut s3 = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += q[(i, a)] * s2[(i * n + b) * n + k];
                }
                s3[(a * n + b) * n + k] = acc;
            }
        }
    }
    FrameTensor::from_dense(n, s3)
}

fn check_orthonormal(metric: &Metric, names: &[&str], vs: &[&[f64]]) -> Result<(), DeformationError> {
    for i in 0..vs.len() {
        for j in 0..=i {
            let ip = metric.inner(vs[i], vs[j]);
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - want).abs() > 1e-10 {
                return Err(DeformationError::NotOrthonormal(format!("⟨{},{}⟩ = {ip}", names[j], names[i])));
            }
        }
    }
    Ok(())
}

fn check_len(n: usize, vs: &[&[f64]]) -> Result<(), DeformationError> {
    for v in vs {
        if v.len() != n {
            return Err(DeformationError::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    Ok(())
}

fn axpy_f(acc: &mut [f64], s: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += s * b;
    }
}

/// T = 2⟨u₁₂,e⟩u₁₂ + ⟨u₂₁₂,e⟩u₁ − ⟨u₁₁₂,e⟩u₂ for orthonormal e, u₁, u₂.
pub fn candidate_e1u2(
    alg: &NilpotentAlgebra,
    g: &Metric,
    e: &[f64],
    u1: &[f64],
    u2: &[f64],
) -> Result<ExtremalCandidate, DeformationError> {
    check_len(alg.dim(), &[e, u1, u2])?;
    g.check_dim(alg.dim())?;
    check_orthonormal(g, &["e", "u1", "u2"], &[e, u1, u2])?;
    let u12 = alg.br_f(u1, u2);
    let u112 = alg.br_f(u1, &u12);
    let u212 = alg.br_f(u2, &u12);
    let a = g.inner(&u12, e);
    let mut t = vec![0.0; alg.dim()];
    axpy_f(&mut t, 2.0 * a, &u12);
    axpy_f(&mut t, g.inner(&u212, e), u1);
    axpy_f(&mut t, -g.inner(&u112, e), u2);
    let mut c = ExtremalCandidate::plain("e1u2", Extremal::Max, t);
    c.lambda_max = Some(a * a);
    c.simple = a.abs() > 1e-12;
    if c.simple {
        let frame = complete_frame(g, &[e.to_vec()], &[u1.to_vec(), u2.to_vec()])?;
        let mut lam = vec![0.0; alg.dim()];
        lam[0] = 1.0;
        let n = lam.len();
        lam[n - 2] = -1.0;
        lam[n - 1] = -1.0;
        c.spec = Some(DeformationSpec::new(g.clone(), frame, lam)?);
    }
    Ok(c)
}

/// Inner products required by the five-vector construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiveVectorData {
    pub a: f64,
    pub b: f64,
}

fn five_vector_check(
    alg: &NilpotentAlgebra,
    g: &Metric,
    v: [&[f64]; 5],
) -> Result<FiveVectorData, DeformationError> {
    check_len(alg.dim(), &v)?;
    g.check_dim(alg.dim())?;
    let [e1, e2, u1, u2, u3] = v;
    check_orthonormal(g, &["e1", "e2", "u1", "u2", "u3"], &v)?;
    let u12 = alg.br_f(u1, u2);
    let u13 = alg.br_f(u1, u3);
    let u23 = alg.br_f(u2, u3);
    for (name, val) in [
        ("⟨e1,u13⟩", g.inner(e1, &u13)),
        ("⟨e1,u23⟩", g.inner(e1, &u23)),
        ("⟨e2,u12⟩", g.inner(e2, &u12)),
        ("⟨e2,u23⟩", g.inner(e2, &u23)),
    ] {
        if val.abs() > 1e-10 {
            return Err(DeformationError::Precondition(format!("{name} = {val} must vanish")));
        }
    }
    let a = g.inner(e1, &u12);
    let b = g.inner(e2, &u13);
    if a.abs() <= 1e-10 {
        return Err(DeformationError::Precondition(format!("a = ⟨e1,u12⟩ = {a} must be nonzero")));
    }
    if b.abs() <= 1e-10 {
        return Err(DeformationError::Precondition(format!("b = ⟨e2,u13⟩ = {b} must be nonzero")));
    }
    Ok(FiveVectorData { a, b })
}

fn five_vector_spec(g: &Metric, v: [&[f64]; 5]) -> Result<DeformationSpec, DeformationError> {
    let [e1, e2, u1, u2, u3] = v;
    let frame = complete_frame(g, &[e1.to_vec(), e2.to_vec()], &[u1.to_vec(), u2.to_vec(), u3.to_vec()])?;
    let n = g.dim();
    let mut lam = vec![0.0; n];
    lam[0] = 1.0;
    lam[1] = 1.0;
    for l in lam.iter_mut().skip(n - 3) {
        *l = -1.0;
    }
    DeformationSpec::new(g.clone(), frame, lam)
}

/// u₁ as a Ricci-minimal candidate; the minimal eigenvalue of ΣJ_k² is −a²−b².
pub fn candidate_min_u1(
    alg: &NilpotentAlgebra,
    g: &Metric,
    e1: &[f64],
    e2: &[f64],
    u1: &[f64],
    u2: &[f64],
    u3: &[f64],
) -> Result<ExtremalCandidate, DeformationError> {
    let v = [e1, e2, u1, u2, u3];
    let FiveVectorData { a, b } = five_vector_check(alg, g, v)?;
    let mut c = ExtremalCandidate::plain("eumin", Extremal::Min, u1.to_vec());
    c.lambda_max = Some(-a * a - b * b);
    c.simple = true;
    c.spec = Some(five_vector_spec(g, v)?);
    Ok(c)
}

/// The pair (T₁, T₂); requires |a| > |b|.
pub fn candidate_t1_t2(
    alg: &NilpotentAlgebra,
    g: &Metric,
    e1: &[f64],
    e2: &[f64],
    u1: &[f64],
    u2: &[f64],
    u3: &[f64],
) -> Result<(ExtremalCandidate, ExtremalCandidate), DeformationError> {
    let v = [e1, e2, u1, u2, u3];
    let FiveVectorData { a, b } = five_vector_check(alg, g, v)?;
    if a.abs() <= b.abs() {
        return Err(DeformationError::Precondition(format!("|a| = {} must exceed |b| = {}", a.abs(), b.abs())));
    }
    let u12 = alg.br_f(u1, u2);
    let u112 = alg.br_f(u1, &u12);
    let u212 = alg.br_f(u2, &u12);
    let u312 = alg.br_f(u3, &u12);
    let e1_212 = g.inner(e1, &u212);
    let e2_312 = g.inner(e2, &u312);
    let e1_112 = g.inner(e1, &u112);
    let e2_112 = g.inner(e2, &u112);
    let n = alg.dim();
    let mut t1 = vec![0.0; n];
    axpy_f(&mut t1, 2.0 * (b * e1_212 + a * e2_312), u1);
    axpy_f(&mut t1, -3.0 * b * e1_112, u2);
    axpy_f(&mut t1, -3.0 * a * e2_112, u3);
    axpy_f(&mut t1, 6.0 * a * b, &u12);
    let mut t2 = vec![0.0; n];
    axpy_f(&mut t2, (a * e1_212 + b * e2_312) / (2.0 * a * a + b * b), u1);
    axpy_f(&mut t2, -e1_112 / (2.0 * a), u2);
    axpy_f(&mut t2, -b / (a * a + b * b) * e2_112, u3);
    axpy_f(&mut t2, 1.0, &u12);
    let mut c1 = ExtremalCandidate::plain("e2u3_T1", Extremal::Max, t1);
    c1.lambda_max = None;
    let mut c2 = ExtremalCandidate::plain("e2u3_T2", Extremal::Max, t2);
    c2.lambda_max = Some(a * a);
    c2.spec = Some(five_vector_spec(g, v)?);
    Ok((c1, c2))
}

/// T = Σ_{i,j} ⟨e,u_ij⟩ u_ij over a g-orthonormal basis {u_i} of (g′)^⊥.
pub fn candidate_two_step(alg: &NilpotentAlgebra, g: &Metric, e: &[f64]) -> Result<ExtremalCandidate, DeformationError> {
    check_len(alg.dim(), &[e])?;
    g.check_dim(alg.dim())?;
    if !alg.is_two_step() {
        return Err(DeformationError::Precondition("algebra is not two-step nilpotent".into()));
    }
    if (g.norm(e) - 1.0).abs() > 1e-10 {
        return Err(DeformationError::NotOrthonormal(format!("‖e‖ = {}", g.norm(e))));
    }
    let derived: Vec<Vec<f64>> = alg.derived().basis().iter().map(|v| exact::to_f64_vec(v)).collect();
    let (inside, perp) = split_orthonormal(g, &derived);
    let mut resid = e.to_vec();
    for w in &inside {
        let c = g.inner(w, e);
        axpy_f(&mut resid, -c, w);
    }
    if g.norm(&resid) > 1e-10 {
        return Err(DeformationError::Precondition("e does not lie in the derived algebra".into()));
    }
    let q = perp.len();
    let mut t = vec![0.0; alg.dim()];
    for i in 0..q {
        for j in 0..q {
            let uij = alg.br_f(&perp[i], &perp[j]);
            axpy_f(&mut t, g.inner(e, &uij), &uij);
        }
    }
    let mut c = ExtremalCandidate::plain("two_step", Extremal::Max, t);
    if q >= 2 && !c.zero {
        let frame = complete_frame(g, &[e.to_vec()], &perp)?;
        let n = alg.dim();
        let mut lam = vec![0.0; n];
        lam[0] = 1.0;
        for l in lam.iter_mut().skip(n - q) {
            *l = -1.0;
        }
        c.spec = Some(DeformationSpec::new(g.clone(), frame, lam)?);
    }
    Ok(c)
}

/// Splits the space into a g-orthonormal basis of span(vs) and one of its
/// orthogonal complement.
pub fn split_orthonormal(g: &Metric, vs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = g.dim();
    let mut inside: Vec<Vec<f64>> = Vec::new();
    let push = |list: &mut Vec<Vec<f64>>, all: &[Vec<f64>], v: &[f64]| -> bool {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for u in all {
                let c = g.inner(u, &w);
                axpy_f(&mut w, -c, u);
            }
        }
        let nrm = g.norm(&w);
        if nrm > 1e-9 * g.norm(v).max(1e-300) {
            list.push(w.iter().map(|x| x / nrm).collect());
            true
        } else {
            false
        }
    };
    for v in vs {
        let snapshot = inside.clone();
        push(&mut inside, &snapshot, v);
    }
    let mut perp: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        if inside.len() + perp.len() == n {
            break;
        }
        let all: Vec<Vec<f64>> = inside.iter().chain(perp.iter()).cloned().collect();
        push(&mut perp, &all, &unit_f(n, i));
    }
    (inside, perp)
}

/// sin of the angle between two lines, in Euclidean coordinates.
pub fn projective_distance(u: &[f64], v: &[f64]) -> f64 {
    let uu = dot_f(u, u);
    let vv = dot_f(v, v);
    let uv = dot_f(u, v);
    let s = (uu * vv - uv * uv).max(0.0);
    (s.sqrt() / (uu.sqrt() * vv.sqrt())).min(1.0)
}

/// Projective distance measured in the metric `g`.
pub fn projective_distance_in(g: &Metric, u: &[f64], v: &[f64]) -> f64 {
    let a: Vec<f64> = g.to_frame(u).iter().copied().collect();
    let b: Vec<f64> = g.to_frame(v).iter().copied().collect();
    projective_distance(&a, &b)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub t: f64,
    /// Extremal eigenvalue of Φ_t = 2e^{−td} ric_t (scaled to stay finite).
    pub lambda_max_t: f64,
    pub proj_distance: f64,
    pub clustered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    /// First grid value from which every distance stays below `tol`.
    pub converged_from: Option<f64>,
    pub tol: f64,
}

impl ConvergenceTrace {
    pub fn final_distance(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.proj_distance)
    }

    pub fn converged(&self) -> bool {
        self.converged_from.is_some()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "lambda_max_t", "proj_distance"]).expect("in-memory csv");
        for r in &self.rows {
            w.write_record([format!("{}", r.t), format!("{:e}", r.lambda_max_t), format!("{:e}", r.proj_distance)])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

/// {2⁰, …, 2¹⁰} truncated so that |λ_i t| stays within the overflow limit.
pub fn default_t_grid(lambdas: &[f64]) -> Vec<f64> {
    let m = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    (0..=10).map(|k| f64::from(1u32 << k)).filter(|t| m * t <= OVERFLOW_LIMIT).collect()
}

/// Extremal eigenvector of Φ_t in deformation-frame coordinates, its
/// eigenvalue, and whether the extremal eigenvalue is clustered.
pub fn extremal_eigen_at(
    tensor: &FrameTensor,
    lambdas: &[f64],
    t: f64,
    which: Extremal,
) -> Result<(Vec<f64>, f64, bool), DeformationError> {
    let n = tensor.dim();
    let (phi, sym) = scaled_ricci_by_frame(tensor, lambdas, t)?;
    let (vals, vecs) = sorted_symmetric_eigen(&sym);
    let idx = match which {
        Extremal::Max => n - 1,
        Extremal::Min => 0,
    };
    let tol = curvature::cluster_tol(&vals);
    let clustered = n > 1
        && match which {
            Extremal::Max => vals[n - 1] - vals[n - 2] <= tol,
            Extremal::Min => vals[1] - vals[0] <= tol,
        };
    // x_a ∝ e^{−λ_a t/2} y_a, shifted to keep the factors ≤ 1.
    let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = DVector::from_fn(n, |a, _| ((lmin - lambdas[a]) * t / 2.0).exp() * vecs[(a, idx)]);
    // Scale by the largest entry first: squares of tiny entries underflow.
    x /= x.amax();
    x /= x.norm();
    let mu = 2.0 * vals[idx];
    // Inverse iteration on Φ_t repairs the accuracy lost in the rescaling.
    let shift = mu + 1e-10 * (phi.amax() + 1.0);
    let lu = (&phi - DMatrix::<f64>::identity(n, n) * shift).lu();
    for _ in 0..3 {
        match lu.solve(&x) {
            Some(z) if z.iter().all(|v| v.is_finite()) && z.amax() > 0.0 => {
                let z = &z / z.amax();
                x = &z / z.norm();
            }
            _ => break,
        }
    }
    Ok((x.iter().copied().collect(), mu, clustered))
}

/// Projective distance (base metric) between π(T) and the extremal
/// eigendirection of ric_t along the grid.
pub fn convergence_check(
    alg: &NilpotentAlgebra,
    spec: &DeformationSpec,
    candidate: &ExtremalCandidate,
    t_grid: &[f64],
) -> Result<ConvergenceTrace, DeformationError> {
    if candidate.zero || !candidate.simple {
        return Err(DeformationError::Precondition("candidate must be nonzero with a simple eigenvalue".into()));
    }
    let tensor = spec.tensor(alg);
    let target = spec.to_frame(&candidate.t);
    let tol = 1e-4;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        spec.guard(t)?;
        let (x, mu, clustered) = extremal_eigen_at(&tensor, &spec.lambdas, t, candidate.extremal)?;
        rows.push(TraceRow { t, lambda_max_t: mu, proj_distance: projective_distance(&x, &target), clustered });
    }
    let mut converged_from = None;
    for r in rows.iter().rev() {
        if r.proj_distance < tol {
            converged_from = Some(r.t);
        } else {
            break;
        }
    }
    Ok(ConvergenceTrace { rows, converged_from, tol })
}

/// ‖2e^{−td} ric_t − Φ⁰‖∞ in the deformation frame.
pub fn limit_error(limit: &ScaledRicciLimit, lambdas: &[f64], t: f64) -> Result<f64, DeformationError> {
    let (phi, _) = scaled_ricci_by_frame(&limit.tensor, lambdas, t)?;
    Ok((phi - limit.phi0_matrix()).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exact::q;
    use crate::tables::{l5_frame, l6_frame};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    #[test]
    fn deformed_metric_closed_form() {
        let g = catalog::heisenberg(1);
        let spec = DeformationSpec::with_cholesky_frame(Metric::identity(3), vec![1.0, 0.0, 0.0]).unwrap();
        let m = deformed_metric(&spec, 4f64.ln()).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0]));
        assert!((m.gram() - want).amax() < 1e-12);
        let base = deformed_metric(&spec, 0.0).unwrap();
        assert!((base.gram() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
        assert!(matches!(deformed_metric(&spec, 800.0), Err(DeformationError::Overflow(_))));
        let r0 = deformed_ricci(&g, &spec, 0.0).unwrap();
        let rb = curvature::ricci_operator(&g, &Metric::identity(3)).unwrap();
        assert_eq!(r0.eigenvalues.len(), 3);
        for (a, b) in r0.eigenvalues.iter().zip(&rb.eigenvalues) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn deformed_frame_is_orthonormal_for_g_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = Metric::random(4, &mut rng);
        let spec = DeformationSpec::with_cholesky_frame(base, vec![0.7, -0.2, 0.1, -1.3]).unwrap();
        for t in [0.0, 1.0, 3.0] {
            let m = deformed_metric(&spec, t).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let ei: Vec<f64> = spec.frame_vector(i).iter().map(|x| x * (-spec.lambdas()[i] * t / 2.0).exp()).collect();
                    let ej: Vec<f64> = spec.frame_vector(j).iter().map(|x| x * (-spec.lambdas()[j] * t / 2.0).exp()).collect();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((m.inner(&ei, &ej) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn deformation_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for e in catalog::list_catalog() {
            let g = &e.algebra;
            let n = g.dim();
            for _ in 0..10 {
                let base = Metric::random(n, &mut rng);
                let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let spec = DeformationSpec::with_cholesky_frame(base, lam.clone()).unwrap();
                let tensor = spec.tensor(g);
                for t in [0.0, 1.0, 5.0] {
                    let ra = deformed_ricci(g, &spec, t).unwrap();
                    let gt = deformed_metric(&spec, t).unwrap();
                    let rb = curvature::ricci_operator(g, &gt).unwrap();
                    // The direct path factors g_t, so its error grows like ε·cond(g_t).
                    let cond = gt.gram().clone().symmetric_eigenvalues();
                    let cond = cond.max() / cond.min();
                    let rel = 1e-8f64.max(64.0 * f64::EPSILON * cond);
                    let rho = ra.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    for (x, y) in ra.eigenvalues.iter().zip(&rb.eigenvalues) {
                        assert!((x - y).abs() < rel * (rho + 1.0), "{} t={t}: {x} vs {y}", e.id());
                    }
                    if cond < 1e7 {
                        let (a, b) = (ra.operator_matrix(), rb.operator_matrix());
                        let scale = a.amax().max(1.0);
                        assert!((&a - &b).amax() < 1e-8 * scale, "{} t={t}: {:e}", e.id(), (&a - &b).amax());
                    }
                    let (phi_f, _) = scaled_ricci_by_frame(&tensor, &lam, t).unwrap();
                    let phi_s = scaled_ricci_by_sum(&tensor, &lam, t).unwrap();
                    assert!((&phi_f - &phi_s).amax() < 1e-10 * phi_f.amax().max(1.0), "{}", e.id());
                }
            }
        }
    }

    #[test]
    fn eframe_evaluators_match_direct_metric() {
        let g = catalog::named("L6_2");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = DeformationSpec::with_cholesky_frame(Metric::random(6, &mut rng), vec![0.5, 0.2, 0.0, -0.1, -0.4, -0.6]).unwrap();
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for t in [0.0, 1.0, 2.0] {
            let m = deformed_metric(&spec, t).unwrap();
            let r0 = curvature::ricci_form(&g, &m, &x, &y).unwrap();
            let r1 = deformed_ricci_form(&g, &spec, t, &x, &y).unwrap();
            assert!((r0 - r1).abs() < 1e-9 * (1.0 + r0.abs()));
            let k0 = curvature::sectional_k(&g, &m, &x, &y).unwrap();
            let k1 = deformed_sectional(&g, &spec, t, &x, &y).unwrap();
            assert!((k0 - k1).abs() < 1e-9 * (1.0 + k0.abs()));
        }
    }

    #[test]
    fn exponent_data_and_pattern() {
        let ex = exponent_data(&[1.0, -1.0, -1.0]);
        assert_eq!(ex.d, 3.0);
        assert_eq!(ex.lambda_set, vec![(2, 1, 0)]);
        assert_eq!(ex.gap, 2.0);
        assert_eq!(block_pattern(&[1.0, 0.0, -1.0, -1.0]), Some((1, 2)));
        assert_eq!(block_pattern(&[1.0, 1.0, 0.0, -1.0, -1.0, -1.0]), Some((2, 3)));
        assert_eq!(block_pattern(&[1.0, -1.0]), None);
        assert_eq!(block_pattern(&[1.0, 0.5, -1.0, -1.0]), None);
    }

    fn h3_spec() -> DeformationSpec {
        // e1 = Z, e2 = X, e3 = Y
        let f = DMatrix::from_columns(&[
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ]);
        DeformationSpec::new(Metric::identity(3), f, vec![1.0, -1.0, -1.0]).unwrap()
    }

    #[test]
    fn h3_limit_and_top_vector() {
        let g = catalog::heisenberg(1);
        let lim = scaled_ricci_limit(&g, &h3_spec()).unwrap();
        let b = lim.block.as_ref().unwrap();
        assert_eq!(b.j[0], vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert_eq!(b.a, vec![vec![1.0]]);
        assert!(b.structure_residual < 1e-15);
        let c = extremal_t(&lim).unwrap();
        assert_abs_diff_eq!(c.lambda_max.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.t[2], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.t[0], 0.0, epsilon = 1e-14);
        assert!(c.residual.unwrap() < 1e-12);
    }

    #[test]
    fn abelian_has_zero_limit_and_no_top_vector() {
        let g = catalog::abelian(3);
        let spec = DeformationSpec::with_cholesky_frame(Metric::identity(3), vec![1.0, -1.0, -1.0]).unwrap();
        let lim = scaled_ricci_limit(&g, &spec).unwrap();
        assert!(lim.phi0_matrix().amax() == 0.0);
        assert!(matches!(extremal_t(&lim), Err(DeformationError::NotSimple(_))));
    }

    #[test]
    fn two_step_candidates() {
        let g = catalog::heisenberg(1);
        let m = Metric::identity(3);
        let c = candidate_two_step(&g, &m, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.t, vec![0.0, 0.0, 2.0]);
        let g5 = catalog::heisenberg(2);
        let c = candidate_two_step(&g5, &Metric::identity(5), &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.t, vec![0.0, 0.0, 0.0, 0.0, 4.0]);
        let l58 = catalog::named("L58");
        let z1 = l58.e("Z1");
        let c = candidate_two_step(&l58, &Metric::identity(5), &exact::to_f64_vec(&z1)).unwrap();
        assert_eq!(c.t, vec![0.0, 0.0, 0.0, 2.0, 0.0]);
        assert!(candidate_two_step(&g, &m, &[1.0, 0.0, 0.0]).is_err());
        assert!(candidate_two_step(&catalog::named("filiform4"), &Metric::identity(4), &[0.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn filiform4_e1u2() {
        let g = catalog::named("filiform4");
        let m = Metric::identity(4);
        // u1 = X, u2 = W, e = Z
        let c = candidate_e1u2(&g, &m, &[0., 0., 0., 1.], &[0., 1., 0., 0.], &[1., 0., 0., 0.]).unwrap();
        assert_eq!(c.t, vec![0.0, -1.0, 0.0, 0.0]);
        assert!(!c.simple, "a = ⟨e,u12⟩ vanishes for this choice");
        // e ⊥ everything relevant gives the zero flag.
        let h = catalog::heisenberg(1);
        let c = candidate_e1u2(&h, &Metric::identity(3), &[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.]).unwrap();
        assert!(c.zero);
        assert!(candidate_e1u2(&h, &Metric::identity(3), &[1., 0., 0.], &[1., 0., 0.], &[0., 0., 1.]).is_err());
    }

    #[test]
    fn l58_min_candidate_and_block_data() {
        let g = catalog::named("L58");
        let m = Metric::identity(5);
        let v = |l: &str| exact::to_f64_vec(&g.e(l));
        let c = candidate_min_u1(&g, &m, &v("Z1"), &v("Z2"), &v("X"), &v("Y1"), &v("Y2")).unwrap();
        assert_eq!(c.t, v("X"));
        assert_abs_diff_eq!(c.lambda_max.unwrap(), -2.0, epsilon = 1e-15);
        let spec = c.spec.as_ref().unwrap();
        let lim = scaled_ricci_limit(&g, spec).unwrap();
        let b = lim.block.as_ref().unwrap();
        let s = rows_to_mat(&b.sum_j2);
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, -1.0, -1.0]));
        assert!((s - want).amax() < 1e-14);
        // h5: u1 = X1, u2 = X2, u3 = X4, e1 = X5 fails ⟨e2,u13⟩ ≠ 0 for any unit e2 ⊥ e1.
        let h5 = catalog::heisenberg(2);
        let e = |i| unit_f(5, i);
        let err = candidate_min_u1(&h5, &Metric::identity(5), &e(4), &e(2), &e(0), &e(1), &e(3)).unwrap_err();
        assert!(err.to_string().contains("b ="), "{err}");
    }

    #[test]
    fn l5_t2_matches_closed_form() {
        for alpha in [[2.0, 3.0, 5.0], [1.0, -1.0, 2.0], [-2.0, 1.0, 3.0]] {
            let (g, m, [e1, e2, u1, u2, u3]) = l5_frame(alpha, [0.0, 0.0]);
            let (_, t2) = candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).unwrap();
            let [a1, a2, a3] = alpha;
            let k = 2.0 * a1 / a3;
            let want = [k * a1, k * a2, k * a3, -k * 0.5 * a2 * a3 / a1, 0.0];
            for (x, w) in t2.t.iter().zip(want) {
                assert_abs_diff_eq!(*x, w, epsilon = 1e-9);
            }
            // The block construction reproduces 2a·T₂.
            let spec = t2.spec.as_ref().unwrap();
            let lim = scaled_ricci_limit(&g, spec).unwrap();
            let c = extremal_t(&lim).unwrap();
            let a = m.inner(&e1, &g.br_f(&u1, &u2));
            for (x, w) in c.t.iter().zip(&t2.t) {
                assert_abs_diff_eq!(*x, 2.0 * a * w, epsilon = 1e-9);
            }
            assert!(c.residual.unwrap() < 1e-9);
        }
    }

    #[test]
    fn six_dimensional_table_values() {
        let alpha = [2.0, 3.0, 5.0];
        for key in ["L6_1", "L6_3"] {
            let (g, m, [e1, e2, u1, u2, u3]) = l6_frame(key, alpha, [0.0; 3]);
            let (t1, t2) = candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).unwrap();
            for (x, w) in t1.t.iter().zip([2.0, 3.0, 5.0, -6.0, 0.0, -15.0]) {
                assert_abs_diff_eq!(*x, w, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(t2.lambda_max.unwrap(), 1.0, epsilon = 1e-12);
        }
        let (g, m, [e1, e2, u1, u2, u3]) = l6_frame("L6_2", alpha, [0.0; 3]);
        let (_, t2) = candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).unwrap();
        for (x, w) in t2.t.iter().zip([0.16, 0.24, 0.4, 3.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*x, w, epsilon = 1e-9);
        }
        let lim = scaled_ricci_limit(&g, t2.spec.as_ref().unwrap()).unwrap();
        let c = extremal_t(&lim).unwrap();
        for (x, w) in c.t.iter().zip(&t2.t) {
            assert_abs_diff_eq!(*x, 2.0 * w, epsilon = 1e-9);
        }
    }

    #[test]
    fn shifted_frames_transport_candidates() {
        // c ↦ c + U with U central-ish acts as an automorphism: T moves by the same map.
        let (g, m, [e1, e2, u1, u2, u3]) = l6_frame("L6_1", [2.0, 3.0, 5.0], [0.5, -1.0, 2.0]);
        let (t1, _) = candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).unwrap();
        // φ(T1) with T1 = α1 c + α2 X + α3 Y − 3α1 A1 − 3α3 Z.
        let want = [2.0, 3.0, 5.0, -6.0 + 2.0 * 0.5, -2.0, -15.0 + 2.0 * 2.0];
        for (x, w) in t1.t.iter().zip(want) {
            assert_abs_diff_eq!(*x, w, epsilon = 1e-9);
        }
    }

    #[test]
    fn t2_limit_along_rescaled_family_gives_t1() {
        let (g, _, [e1, e2, u1, u2, u3]) = l5_frame([2.0, 3.0, 5.0], [0.0, 0.0]);
        let fr = |s: f64| {
            let e1s: Vec<f64> = e1.iter().map(|v| v * s).collect();
            let cols = DMatrix::from_columns(&[&e1s, &e2, &u1, &u2, &u3].map(|v| DVector::from_column_slice(v)));
            (Metric::from_orthonormal_frame(&cols).unwrap(), e1s)
        };
        let (m, _) = fr(1.0);
        let (t1, _) = candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).unwrap();
        let a = m.inner(&e1, &g.br_f(&u1, &u2));
        let b = m.inner(&e2, &g.br_f(&u1, &u3));
        let s_lim = (a / b).abs();
        let s = s_lim * (1.0 - 1e-9);
        let (ms, e1s) = fr(s);
        let (_, t2s) = candidate_t1_t2(&g, &ms, &e1s, &e2, &u1, &u2, &u3).unwrap();
        for (x, w) in t2s.t.iter().zip(&t1.t) {
            assert_abs_diff_eq!(*x, w / (6.0 * a * b), epsilon = 1e-6);
        }
        let (ms, e1s) = fr(s_lim * 1.01);
        assert!(candidate_t1_t2(&g, &ms, &e1s, &e2, &u1, &u2, &u3).is_err());
    }

    #[test]
    fn two_step_t1_t2_reduce_to_u12() {
        // L58 is two-step with a = b = 1, so |a| > |b| fails; rescale e2 direction by a metric.
        let g = catalog::named("L58");
        let v = |l: &str| exact::to_f64_vec(&g.e(l));
        let cols = [v("Z1"), v("Z2").iter().map(|x| x * 2.0).collect(), v("X"), v("Y1"), v("Y2")];
        let m = Metric::from_orthonormal_frame(&DMatrix::from_columns(&cols.each_ref().map(|c| DVector::from_column_slice(c)))).unwrap();
        let (t1, t2) = candidate_t1_t2(&g, &m, &cols[0], &cols[1], &cols[2], &cols[3], &cols[4]).unwrap();
        let u12 = g.br_f(&cols[2], &cols[3]);
        let (a, b) = (1.0, 0.5);
        for i in 0..5 {
            assert_abs_diff_eq!(t1.t[i], 6.0 * a * b * u12[i], epsilon = 1e-12);
            assert_abs_diff_eq!(t2.t[i], u12[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn rotated_frame_still_gives_eigenvector() {
        // L58 with e1, e2 mixed: A is no longer diagonal.
        let g = catalog::named("L58");
        let v = |l: &str| exact::to_f64_vec(&g.e(l));
        let (c, s) = (0.6, 0.8);
        let z1 = v("Z1");
        let z2: Vec<f64> = v("Z2").iter().map(|x| x * 2.0).collect();
        let mix = |p: f64, q: f64| z1.iter().zip(&z2).map(|(a, b)| p * a + q * b).collect::<Vec<f64>>();
        let cols = [mix(c, s), mix(-s, c), v("X"), v("Y1"), v("Y2")];
        let fr = DMatrix::from_columns(&cols.each_ref().map(|c| DVector::from_column_slice(c)));
        let spec = DeformationSpec::from_declared_frame(fr, vec![1.0, 1.0, -1.0, -1.0, -1.0]).unwrap();
        let lim = scaled_ricci_limit(&g, &spec).unwrap();
        let cand = extremal_t(&lim).unwrap();
        assert!(cand.rotation.is_some());
        assert!(cand.residual.unwrap() < 1e-9);
        let phi = lim.phi0_matrix();
        let ev = clustered_eigenvalues(&phi, 1e-6);
        let top = ev.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(cand.lambda_max.unwrap(), top, epsilon = 1e-9);
    }

    #[test]
    fn h3_convergence() {
        let g = catalog::heisenberg(1);
        let spec = h3_spec();
        let lim = scaled_ricci_limit(&g, &spec).unwrap();
        let cand = extremal_t(&lim).unwrap();
        let grid: Vec<f64> = (0..=6).map(|k| f64::from(1u32 << k)).collect();
        let tr = convergence_check(&g, &spec, &cand, &grid).unwrap();
        assert!(tr.final_distance() < 1e-6, "{:?}", tr.rows);
        assert!(tr.to_csv().starts_with("t,lambda_max_t,proj_distance\n"));
    }

    #[test]
    fn filiform4_convergence() {
        let g = catalog::named("filiform4");
        // Basis W, X, Y, Z; frame (Y, Y+Z, X+2Y+4Z, W) declared orthonormal.
        let cols = [[0., 0., 1., 0.], [0., 0., 1., 1.], [0., 1., 2., 4.], [1., 0., 0., 0.]];
        let fr = DMatrix::from_columns(&cols.map(|c| DVector::from_column_slice(&c)));
        let m = Metric::from_orthonormal_frame(&fr).unwrap();
        let c = candidate_e1u2(&g, &m, &cols[0], &cols[2], &cols[3]).unwrap();
        assert!(c.simple);
        let spec = c.spec.as_ref().unwrap();
        let tr = convergence_check(&g, spec, &c, &default_t_grid(spec.lambdas())).unwrap();
        assert!(tr.converged(), "{:?}", tr.rows);
        let lim = scaled_ricci_limit(&g, spec).unwrap();
        let top = extremal_t(&lim).unwrap();
        assert!(projective_distance_in(&m, &top.t, &c.t) < 1e-10);
    }

    #[test]
    fn limit_error_decays() {
        let g = catalog::filiform_standard(5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = Metric::random(5, &mut rng);
        let spec = DeformationSpec::with_cholesky_frame(base, vec![1.0, 0.0, 0.0, -1.0, -1.0]).unwrap();
        let lim = scaled_ricci_limit(&g, &spec).unwrap();
        let t = 40.0 / lim.gap;
        assert!(limit_error(&lim, spec.lambdas(), t).unwrap() < 1e-6);
        assert!(lim.block.as_ref().unwrap().structure_residual < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let spec = h3_spec();
        let s = spec.to_json_value().to_string();
        let back = DeformationSpec::from_json_str(&s).unwrap();
        assert_eq!(back.lambdas(), spec.lambdas());
        assert!((back.frame() - spec.frame()).amax() < 1e-15);
        let plain = r#"{"metric": {"gram": [[1,0],[0,1]]}, "lambdas": [1, -1]}"#;
        assert!(DeformationSpec::from_json_str(plain).is_ok());
        let err = DeformationSpec::from_json_str(r#"{"metric": {"gram": [[1]]}}"#).unwrap_err();
        assert!(err.to_string().contains("lambdas"));
        let _ = (col(&[1.0]), q(0));
    }
}
