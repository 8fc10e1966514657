//! Metric-independent sign sets of Ricci and sectional curvature, with
//! explicit metric witnesses for the strict claims.
//!
//! Vector labels: `g_pos` is (g′∩z)∖0 (Ric > 0 for every metric), the
//! center z is where Ric ≥ 0 for every metric. Plane labels: `G_geq` planes
//! have K ≥ 0 for every metric; they are exactly the abelian planes whose
//! brackets [X,Z], [Y,Z] are parallel for every Z. `G1` meets the center,
//! `G2` lies in a 3-dim abelian ideal a with dim[g,a] = 1.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::curvature::{self, Metric};
use crate::deformation::{self, complete_frame, DeformationError, DeformationSpec};
use crate::exact::{self, Subspace, Q, QVec};
use crate::poly::Poly;

/// Random metrics tried before any deformation.
pub const RANDOM_BUDGET: usize = 200;
/// Deformation specs tried after the random metrics.
pub const DEFORMATION_BUDGET: usize = 20;
/// Strictness threshold for witnessed signs.
pub const STRICT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignError {
    #[error("vectors do not span a two-plane")]
    DegeneratePlane,
    #[error("expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no witness within budget: {0}")]
    BudgetExhausted(String),
    #[error("witness does not reproduce: {0}")]
    Irreproducible(String),
    #[error(transparent)]
    Deformation(#[from] DeformationError),
}

fn check_len(n: usize, v: &[Q]) -> Result<(), SignError> {
    if v.len() != n {
        return Err(SignError::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(())
}

/// A two-plane with its reduced echelon basis (X, Y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPlane {
    x: QVec,
    y: QVec,
}

impl TwoPlane {
    pub fn new(x: &[Q], y: &[Q]) -> Result<Self, SignError> {
        if x.len() != y.len() {
            return Err(SignError::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        let s = Subspace::span(x.len(), [x.to_vec(), y.to_vec()]);
        if s.dim() != 2 {
            return Err(SignError::DegeneratePlane);
        }
        Ok(TwoPlane { x: s.basis()[0].clone(), y: s.basis()[1].clone() })
    }

    pub fn x(&self) -> &[Q] {
        &self.x
    }

    pub fn y(&self) -> &[Q] {
        &self.y
    }

    pub fn x_f(&self) -> Vec<f64> {
        exact::to_f64_vec(&self.x)
    }

    pub fn y_f(&self) -> Vec<f64> {
        exact::to_f64_vec(&self.y)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn subspace(&self) -> Subspace {
        Subspace::span(self.dim(), [self.x.clone(), self.y.clone()])
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let f = |v: &[Q]| v.iter().map(exact::format_rational).collect::<Vec<_>>();
        serde_json::json!([f(&self.x), f(&self.y)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorLabel {
    GPos,
    GGeqOnly,
    GZeroTrivial,
    Outside,
}

impl VectorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            VectorLabel::GPos => "g_pos",
            VectorLabel::GGeqOnly => "g_geq_only",
            VectorLabel::GZeroTrivial => "g_zero_trivial",
            VectorLabel::Outside => "outside",
        }
    }
}

pub fn classify_ric_vector(alg: &NilpotentAlgebra, x: &[Q]) -> Result<VectorLabel, SignError> {
    check_len(alg.dim(), x)?;
    if exact::is_zero_vec(x) {
        return Ok(VectorLabel::GZeroTrivial);
    }
    let z = alg.center();
    if !z.contains(x) {
        return Ok(VectorLabel::Outside);
    }
    if alg.derived().contains(x) {
        Ok(VectorLabel::GPos)
    } else {
        Ok(VectorLabel::GGeqOnly)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaneLabels {
    pub g_pos: bool,
    pub g_geq: bool,
    pub g_zero: bool,
    pub g1: bool,
    pub g2: bool,
    /// A vector Q with σ + ℝQ a 3-dim abelian ideal a, dim[g,a] = 1, when
    /// one with rational coordinates was found.
    #[serde(skip)]
    pub g2_extension: Option<QVec>,
}

impl PlaneLabels {
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (on, name) in [
            (self.g_pos, "G_pos"),
            (self.g_geq, "G_geq"),
            (self.g_zero, "G_zero"),
            (self.g1, "G1"),
            (self.g2, "G2"),
        ] {
            if on {
                v.push(name);
            }
        }
        v
    }
}

pub fn classify_plane(alg: &NilpotentAlgebra, sigma: &TwoPlane) -> Result<PlaneLabels, SignError> {
    check_len(alg.dim(), sigma.x())?;
    let z = alg.center();
    let s = sigma.subspace();
    let zs = z.intersect(&s);
    let g2 = decide_g2(alg, sigma);
    Ok(PlaneLabels {
        g_pos: is_g_pos(alg, sigma, &zs),
        g_geq: is_g_geq(alg, sigma),
        g_zero: zs.dim() == 2,
        g1: zs.dim() > 0,
        g2: g2.is_some(),
        g2_extension: g2.flatten(),
    })
}

/// [X,Y] = 0 and [X,Z] ∥ [Y,Z] for all Z. Parallelism is the vanishing of
/// the quadratic forms Z ↦ [X,Z]_r[Y,Z]_s − [X,Z]_s[Y,Z]_r, checked
/// coefficient by coefficient.
pub fn is_g_geq(alg: &NilpotentAlgebra, sigma: &TwoPlane) -> bool {
    let n = alg.dim();
    if !exact::is_zero_vec(&alg.br(sigma.x(), sigma.y())) {
        return false;
    }
    let a: Vec<QVec> = (0..n).map(|m| alg.br(sigma.x(), &exact::unit(n, m))).collect();
    let b: Vec<QVec> = (0..n).map(|m| alg.br(sigma.y(), &exact::unit(n, m))).collect();
    for r in 0..n {
        for s in r + 1..n {
            for m in 0..n {
                for l in m..n {
                    let c = &a[m][r] * &b[l][s] - &a[m][s] * &b[l][r] + &a[l][r] * &b[m][s] - &a[l][s] * &b[m][r];
                    if !c.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The alternative form of the G_geq condition at one Z: some nonzero
/// X ∈ σ has [X,Z] = 0.
pub fn has_annihilating_vector(alg: &NilpotentAlgebra, sigma: &TwoPlane, z: &[Q]) -> bool {
    let a = alg.br(sigma.x(), z);
    let b = alg.br(sigma.y(), z);
    exact::rank(&[a, b]) <= 1
}

fn is_g_pos(alg: &NilpotentAlgebra, sigma: &TwoPlane, zs: &Subspace) -> bool {
    if zs.dim() != 1 {
        return false;
    }
    let x = &zs.basis()[0];
    let y = if Subspace::span(alg.dim(), [x.clone(), sigma.x().to_vec()]).dim() == 2 { sigma.x() } else { sigma.y() };
    let n = alg.dim();
    let image = Subspace::span(n, (0..n).map(|m| alg.br(y, &exact::unit(n, m))));
    image.contains(x)
}

/// `None` if σ is not in G2. Otherwise `Some(q)`, where q is a rational Q
/// with σ + ℝQ a 3-dim abelian ideal a, dim[g,a] = 1, if one exists.
pub fn decide_g2(alg: &NilpotentAlgebra, sigma: &TwoPlane) -> Option<Option<QVec>> {
    let n = alg.dim();
    let (x, y) = (sigma.x(), sigma.y());
    if !exact::is_zero_vec(&alg.br(x, y)) {
        return None;
    }
    let s = sigma.subspace();
    let w = Subspace::span(n, (0..n).flat_map(|m| [alg.br(x, &exact::unit(n, m)), alg.br(y, &exact::unit(n, m))]));
    match w.dim() {
        1 => {
            let p = w.basis()[0].clone();
            if !s.contains(&p) {
                // a = σ + ℝP, which is an ideal exactly when P is central.
                return alg.center().contains(&p).then_some(Some(p));
            }
            // Q with [g,Q] ⊆ ℝP and [X,Q] = [Y,Q] = 0, outside σ.
            let cand = brackets_into(alg, &w).intersect(&kernel_of_ad(alg, x)).intersect(&kernel_of_ad(alg, y));
            cand.basis().iter().find(|v| !s.contains(v)).map(|v| Some(v.clone()))
        }
        0 => central_plane_extension(alg, sigma),
        _ => None,
    }
}

/// {Q : [g,Q] ⊆ target}.
fn brackets_into(alg: &NilpotentAlgebra, target: &Subspace) -> Subspace {
    let n = alg.dim();
    let ann = target.annihilator();
    let mut eqs = Vec::new();
    for m in 0..n {
        let rows = alg.ad_rows(&exact::unit(n, m));
        // The map Q ↦ [e_m, Q] has matrix rows `rows`; compose with each functional.
        for f in &ann {
            let mut eq = exact::zero_vec(n);
            for (r, fr) in f.iter().enumerate() {
                if !fr.is_zero() {
                    exact::axpy(&mut eq, fr, &rows[r]);
                }
            }
            eqs.push(eq);
        }
    }
    Subspace::from_equations(n, &eqs)
}

fn kernel_of_ad(alg: &NilpotentAlgebra, x: &[Q]) -> Subspace {
    Subspace::from_equations(alg.dim(), &alg.ad_rows(x))
}

/// σ ⊆ z: look for Q with ad_Q of rank exactly one and image inside σ.
/// For Q in V = {Q : [g,Q] ⊆ σ}, write [e_m,Q] = c₁_m(Q)X + c₂_m(Q)Y. The
/// image lies on the line through αX + βY iff βc₁ − αc₂ = 0, so the task
/// is to find a real (α:β) where the kernel of the pencil βC₁ − αC₂ on V
/// exceeds z.
fn central_plane_extension(alg: &NilpotentAlgebra, sigma: &TwoPlane) -> Option<Option<QVec>> {
    let n = alg.dim();
    let s = sigma.subspace();
    let v = brackets_into(alg, &s);
    let z = alg.center();
    let k = v.dim();
    let dz = z.dim();
    if k == dz {
        return None;
    }
    // Coordinates of [e_m, v_j] in the basis (X, Y).
    let mut c1 = vec![vec![Q::zero(); k]; n];
    let mut c2 = vec![vec![Q::zero(); k]; n];
    for (j, vj) in v.basis().iter().enumerate() {
        for m in 0..n {
            let b = alg.br(&exact::unit(n, m), vj);
            let c = s.coordinates(&b).expect("bracket lies in σ by construction");
            // s.basis() is (X, Y) as both come from the same echelon form.
            c1[m][j] = c[0].clone();
            c2[m][j] = c[1].clone();
        }
    }
    let pencil = |alpha: &Q, beta: &Q| -> Vec<QVec> {
        (0..n).map(|m| (0..k).map(|j| beta * &c1[m][j] - alpha * &c2[m][j]).collect()).collect()
    };
    let kernel_vector = |alpha: &Q, beta: &Q| -> Option<QVec> {
        let rows = pencil(alpha, beta);
        exact::nullspace(&rows, k).into_iter().map(|coef| combine(v.basis(), &coef)).find(|q| !z.contains(q))
    };
    let target = k - dz;
    // Generic rank: the maximum over more sample points than the pencil's degree.
    let mut generic = 0;
    for a in 0..=(n + k + 1) as i64 {
        generic = generic.max(exact::rank(&pencil(&exact::q(a), &Q::one())));
    }
    if generic < target {
        return Some(kernel_vector(&Q::zero(), &Q::one()));
    }
    if exact::rank(&pencil(&Q::one(), &Q::zero())) < target {
        return Some(kernel_vector(&Q::one(), &Q::zero()));
    }
    // Rank drops below `generic` exactly at the common real roots of all
    // generic-size minors of C₁ − αC₂.
    let r = generic;
    let mut g = Poly::zero();
    let rows_sets = combinations(n, r);
    let col_sets = combinations(k, r);
    let samples: Vec<Q> = (0..=r as i64).map(exact::q).collect();
    let mats: Vec<Vec<QVec>> = samples.iter().map(|a| pencil(a, &Q::one())).collect();
    'outer: for rs in &rows_sets {
        for cs in &col_sets {
            let pts: Vec<(Q, Q)> = samples
                .iter()
                .zip(&mats)
                .map(|(a, m)| {
                    let sub: Vec<QVec> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect();
                    (a.clone(), exact::det(&sub))
                })
                .collect();
            let minor = Poly::interpolate(&pts);
            g = g.gcd(&minor);
            if g.degree() == Some(0) {
                break 'outer;
            }
        }
    }
    if g.degree().unwrap_or(0) == 0 || !g.has_real_root() {
        return None;
    }
    // A real root exists. Its direction is reported only when the root is rational.
    Some(rational_root(&g).and_then(|a| kernel_vector(&a, &Q::one())))
}

fn rational_root(p: &Poly) -> Option<Q> {
    // Rational roots of a monic rational polynomial: clear denominators and
    // test ±(divisor of a₀)/(divisor of a_n).
    use num_bigint::BigInt;
    use num_integer::Integer;
    let c = p.coeffs();
    let lcm = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    if ints[0].is_zero() {
        return Some(Q::zero());
    }
    let divisors = |x: &BigInt| -> Vec<BigInt> {
        let x = if x < &BigInt::zero() { -x } else { x.clone() };
        let mut out = Vec::new();
        let mut d = BigInt::one();
        while &d * &d <= x {
            if (&x % &d).is_zero() {
                out.push(d.clone());
                out.push(&x / &d);
            }
            d += 1;
            if d > BigInt::from(100_000) {
                break;
            }
        }
        out
    };
    let lead = ints.last().expect("nonzero polynomial");
    for a in divisors(&ints[0]) {
        for b in divisors(lead) {
            for sgn in [1, -1] {
                let r = Q::new(a.clone() * sgn, b.clone());
                if p.eval(&r).is_zero() {
                    return Some(r);
                }
            }
        }
    }
    None
}

fn combine(basis: &[QVec], coef: &[Q]) -> QVec {
    let mut out = exact::zero_vec(basis[0].len());
    for (b, c) in basis.iter().zip(coef) {
        exact::axpy(&mut out, c, b);
    }
    out
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Coefficients of K_t(X,Y) = Σ e^{(λ_j+λ_k−λ_i)t} Ψ_ijk + Σ e^{λ_i t} Φ_i.
#[derive(Debug, Clone, Serialize)]
pub struct SecdefCoefficients {
    pub n: usize,
    /// Indexed [(i*n + j)*n + k].
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    /// μ_ij(X,Y), μ_ij(Y,X), μ_ij(X,X), μ_ij(Y,Y), indexed [i][j].
    pub mu_xy: Vec<Vec<f64>>,
    pub mu_yx: Vec<Vec<f64>>,
    pub mu_xx: Vec<Vec<f64>>,
    pub mu_yy: Vec<Vec<f64>>,
}

impl SecdefCoefficients {
    pub fn psi(&self, i: usize, j: usize, k: usize) -> f64 {
        self.psi[(i * self.n + j) * self.n + k]
    }

    pub fn evaluate(&self, lambdas: &[f64], t: f64) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.psi(i, j, k);
                    if p != 0.0 {
                        acc += ((lambdas[j] + lambdas[k] - lambdas[i]) * t).exp() * p;
                    }
                }
            }
            if self.phi[i] != 0.0 {
                acc += (lambdas[i] * t).exp() * self.phi[i];
            }
        }
        acc
    }
}

pub fn secdef_coefficients(
    alg: &NilpotentAlgebra,
    spec: &DeformationSpec,
    x: &[f64],
    y: &[f64],
) -> Result<SecdefCoefficients, SignError> {
    let n = alg.dim();
    for v in [x, y] {
        if v.len() != n {
            return Err(SignError::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    spec.base().check_dim(n).map_err(DeformationError::from)?;
    let e: Vec<Vec<f64>> = (0..n).map(|i| spec.frame_vector(i)).collect();
    let xf = spec.to_frame(x);
    let yf = spec.to_frame(y);
    // ad_{e_i} V in frame coordinates.
    let mu = |a: &[f64], b: &[f64]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let br = spec.to_frame(&alg.br_f(&e[i], b));
                (0..n).map(|j| a[j] * br[j]).collect()
            })
            .collect()
    };
    let mu_xy = mu(&xf, y);
    let mu_yx = mu(&yf, x);
    let mu_xx = mu(&xf, x);
    let mu_yy = mu(&yf, y);
    let mut psi = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                psi[(i * n + j) * n + k] = 0.25 * (mu_xy[i][j] + mu_yx[i][j]) * (mu_xy[i][k] + mu_yx[i][k])
                    - mu_xx[i][j] * mu_yy[i][k];
            }
        }
    }
    let xy = alg.br_f(x, y);
    let xxy = spec.to_frame(&alg.br_f(x, &xy));
    let yyx = spec.to_frame(&alg.br_f(y, &alg.br_f(y, x)));
    let xyf = spec.to_frame(&xy);
    let phi = (0..n).map(|i| -0.75 * xyf[i] * xyf[i] - 0.5 * yf[i] * xxy[i] - 0.5 * xf[i] * yyx[i]).collect();
    Ok(SecdefCoefficients { n, psi, phi, mu_xy, mu_yx, mu_xx, mu_yy })
}

/// ¼ Σ_i (⟨X,[e_i,Y]⟩ − ⟨Y,[e_i,X]⟩)² over a g-orthonormal frame; equals
/// K(X,Y) on planes in G_geq.
pub fn knonneg_value(alg: &NilpotentAlgebra, g: &Metric, sigma: &TwoPlane) -> Result<f64, SignError> {
    check_len(alg.dim(), sigma.x())?;
    g.check_dim(alg.dim()).map_err(DeformationError::from)?;
    if !is_g_geq(alg, sigma) {
        return Err(SignError::Precondition("plane is not in G_geq".into()));
    }
    let (x, y) = (sigma.x_f(), sigma.y_f());
    let mut acc = 0.0;
    for i in 0..alg.dim() {
        let e = g.frame_vector(i);
        let d = g.inner(&x, &alg.br_f(&e, &y)) - g.inner(&y, &alg.br_f(&e, &x));
        acc += d * d;
    }
    Ok(acc / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    RicPositive,
    RicNegative,
    KPositive,
    KNegative,
    KZero,
}

#[derive(Debug, Clone)]
pub enum WitnessMetric {
    Plain(Metric),
    Deformed { spec: DeformationSpec, t: f64 },
}

#[derive(Debug, Clone)]
pub enum WitnessTarget {
    Vector(QVec),
    Plane(TwoPlane),
}

#[derive(Debug, Clone)]
pub struct SignWitness {
    pub kind: WitnessKind,
    pub metric: WitnessMetric,
    pub value: f64,
    pub target: WitnessTarget,
    pub seed: u64,
    /// How the metric was found, e.g. "identity", "random#17", "deformation#3".
    pub source: String,
}

impl SignWitness {
    fn evaluate(&self, alg: &NilpotentAlgebra) -> Result<f64, SignError> {
        match (&self.target, &self.metric) {
            (WitnessTarget::Vector(v), m) => {
                let v = exact::to_f64_vec(v);
                match m {
                    WitnessMetric::Plain(g) => Ok(curvature::ricci_form(alg, g, &v, &v).map_err(curv_err)?),
                    WitnessMetric::Deformed { spec, t } => Ok(deformation::deformed_ricci_form(alg, spec, *t, &v, &v)?),
                }
            }
            (WitnessTarget::Plane(p), m) => {
                let (x, y) = (p.x_f(), p.y_f());
                match m {
                    WitnessMetric::Plain(g) => Ok(curvature::sectional_k(alg, g, &x, &y).map_err(curv_err)?),
                    WitnessMetric::Deformed { spec, t } => Ok(deformation::deformed_sectional(alg, spec, *t, &x, &y)?),
                }
            }
        }
    }

    /// Re-evaluates the curvature and checks value and sign.
    pub fn verify(&self, alg: &NilpotentAlgebra) -> Result<f64, SignError> {
        let v = self.evaluate(alg)?;
        if (v - self.value).abs() > 1e-9 * self.value.abs().max(1.0) {
            return Err(SignError::Irreproducible(format!("stored {} but recomputed {}", self.value, v)));
        }
        let ok = match self.kind {
            WitnessKind::RicPositive | WitnessKind::KPositive => v > STRICT,
            WitnessKind::RicNegative | WitnessKind::KNegative => v < -STRICT,
            WitnessKind::KZero => v.abs() <= STRICT,
        };
        if !ok {
            return Err(SignError::Irreproducible(format!("value {v} has the wrong sign for {:?}", self.kind)));
        }
        Ok(v)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let metric = match &self.metric {
            WitnessMetric::Plain(g) => serde_json::json!({ "metric": g.to_json_value() }),
            WitnessMetric::Deformed { spec, t } => serde_json::json!({ "deformation": spec.to_json_value(), "t": t }),
        };
        let target = match &self.target {
            WitnessTarget::Vector(v) => {
                serde_json::json!({ "vector": v.iter().map(exact::format_rational).collect::<Vec<_>>() })
            }
            WitnessTarget::Plane(p) => serde_json::json!({ "plane": p.to_json_value() }),
        };
        serde_json::json!({
            "kind": self.kind,
            "value": self.value,
            "seed": self.seed,
            "source": self.source,
            "target": target,
            "metric": metric,
        })
    }
}

fn curv_err(e: curvature::CurvatureError) -> SignError {
    SignError::Precondition(e.to_string())
}

fn f64_vec(v: &[Q]) -> Vec<f64> {
    exact::to_f64_vec(v)
}

/// Ric(X) < 0 for X outside the center: identity metric, then random
/// metrics, then a deformation shrinking X.
pub fn find_negative_ric_witness(alg: &NilpotentAlgebra, x: &[Q], seed: u64) -> Result<SignWitness, SignError> {
    let n = alg.dim();
    check_len(n, x)?;
    if alg.center().contains(x) {
        return Err(SignError::Precondition("vector is central, so Ric(X) ≥ 0 for every metric".into()));
    }
    let xf = f64_vec(x);
    let target = WitnessTarget::Vector(x.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..=RANDOM_BUDGET {
        let (g, source) =
            if k == 0 { (Metric::identity(n), "identity".to_string()) } else { (Metric::random(n, &mut rng), format!("random#{k}")) };
        let v = curvature::ricci_form(alg, &g, &xf, &xf).map_err(curv_err)?;
        if v < -STRICT {
            return Ok(SignWitness { kind: WitnessKind::RicNegative, metric: WitnessMetric::Plain(g), value: v, target, seed, source });
        }
    }
    // Frame e₁ = X/|X| with λ = (−1, 0, …): the positive bracket term decays.
    let g = Metric::identity(n);
    let e1: Vec<f64> = xf.iter().map(|c| c / g.norm(&xf)).collect();
    let frame = complete_frame(&g, &[e1], &[])?;
    let mut lam = vec![0.0; n];
    lam[0] = -1.0;
    let spec = DeformationSpec::new(g, frame, lam)?;
    for t in deformation::default_t_grid(spec.lambdas()) {
        let v = deformation::deformed_ricci_form(alg, &spec, t, &xf, &xf)?;
        if v < -STRICT {
            return Ok(SignWitness {
                kind: WitnessKind::RicNegative,
                metric: WitnessMetric::Deformed { spec, t },
                value: v,
                target,
                seed,
                source: "deformation#0".into(),
            });
        }
    }
    Err(SignError::BudgetExhausted("negative Ricci direction".into()))
}

/// Ric(Z) > 0 at a finite deformation time, for any nonzero Z.
pub fn find_positive_ric_witness(alg: &NilpotentAlgebra, z: &[Q], seed: u64) -> Result<SignWitness, SignError> {
    let n = alg.dim();
    check_len(n, z)?;
    if exact::is_zero_vec(z) {
        return Err(SignError::Precondition("Z must be nonzero".into()));
    }
    if alg.is_abelian() {
        return Err(SignError::Precondition("algebra is abelian, so Ric vanishes identically".into()));
    }
    let zf = f64_vec(z);
    let target = WitnessTarget::Vector(z.to_vec());
    if alg.center().contains(z) && alg.derived().contains(z) {
        let g = Metric::identity(n);
        let v = curvature::ricci_form(alg, &g, &zf, &zf).map_err(curv_err)?;
        if v > STRICT {
            return Ok(SignWitness {
                kind: WitnessKind::RicPositive,
                metric: WitnessMetric::Plain(g),
                value: v,
                target,
                seed,
                source: "identity".into(),
            });
        }
    }
    let (x, y) = positive_ric_pair(alg, z).ok_or_else(|| SignError::BudgetExhausted("no admissible pair X, Y".into()))?;
    // Declared basis {Z, middle, X, Y}; the middle avoids Z and [X,Y] so
    // that ⟨Z,[X,Y]⟩ ≠ 0 in the metric making it orthonormal.
    let xy = alg.br(&x, &y);
    let middle = hyperplane_complement(n, &[x.clone(), y.clone()], &[z.to_vec(), xy])
        .ok_or_else(|| SignError::BudgetExhausted("no complementary hyperplane".into()))?;
    let mut cols: Vec<QVec> = vec![z.to_vec()];
    cols.extend(middle);
    cols.push(x);
    cols.push(y);
    let frame = DMatrix::from_fn(n, n, |r, c| exact::to_f64(&cols[c][r]));
    let mut lam = vec![0.0; n];
    lam[0] = 1.0;
    lam[n - 2] = -1.0;
    lam[n - 1] = -2.0;
    let spec = DeformationSpec::from_declared_frame(frame, lam)?;
    // Prefer the first t where e^{−5t}Ric_t(Z) is within 1% of its limit
    // ½⟨Z,[X,Y]⟩², so the witness sits in the asymptotic regime.
    let (xf, yf) = (spec.frame_vector(n - 2), spec.frame_vector(n - 1));
    let c = spec.to_frame(&alg.br_f(&xf, &yf))[0];
    let limit = 0.5 * c * c;
    let mut first = None;
    for t in deformation::default_t_grid(spec.lambdas()) {
        let v = deformation::deformed_ricci_form(alg, &spec, t, &zf, &zf)?;
        if v > STRICT {
            first.get_or_insert((t, v));
            if (v * (-5.0 * t).exp() - limit).abs() <= 0.01 * limit {
                first = Some((t, v));
                break;
            }
        }
    }
    let (t, v) = first.ok_or_else(|| SignError::BudgetExhausted("positive Ricci direction".into()))?;
    Ok(SignWitness {
        kind: WitnessKind::RicPositive,
        metric: WitnessMetric::Deformed { spec, t },
        value: v,
        target,
        seed,
        source: "deformation#0".into(),
    })
}

/// X, Y with [X,Y] ≠ 0 and Z ∉ span(X, Y), perturbing by [X,Y] when needed.
pub fn positive_ric_pair(alg: &NilpotentAlgebra, z: &[Q]) -> Option<(QVec, QVec)> {
    let n = alg.dim();
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (exact::unit(n, i), exact::unit(n, j));
            let xy = alg.br(&x, &y);
            if exact::is_zero_vec(&xy) {
                continue;
            }
            let cands = [
                (x.clone(), y.clone()),
                (exact::add(&x, &xy), y.clone()),
                (x.clone(), exact::add(&y, &xy)),
                (exact::add(&x, &xy), exact::add(&y, &xy)),
            ];
            for (a, b) in cands {
                let ab = alg.br(&a, &b);
                if exact::is_zero_vec(&ab) {
                    continue;
                }
                if exact::rank(&[a.clone(), b.clone(), z.to_vec()]) == 3 {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

/// Vectors completing `fixed` to a hyperplane basis that contains none of `avoid`.
fn hyperplane_complement(n: usize, fixed: &[QVec], avoid: &[QVec]) -> Option<Vec<QVec>> {
    let need = n - 1 - fixed.len();
    let f = Subspace::span(n, fixed.iter().cloned());
    if avoid.iter().any(|a| f.contains(a)) {
        return None;
    }
    // Hyperplanes ⊇ f are kernels of functionals vanishing on f; pick one
    // that is nonzero on every vector to avoid, searching small integer combinations.
    let ann = f.annihilator();
    let m = ann.len();
    let mut coef = vec![0i64; m];
    for count in 0..5i64.pow(m.min(6) as u32) {
        let mut c = count;
        for slot in coef.iter_mut() {
            *slot = c % 5 - 2;
            c /= 5;
        }
        let mut func = exact::zero_vec(n);
        for (a, &k) in ann.iter().zip(&coef) {
            exact::axpy(&mut func, &exact::q(k), a);
        }
        if exact::is_zero_vec(&func) || avoid.iter().any(|v| exact::dot(&func, v).is_zero()) {
            continue;
        }
        let h = Subspace::from_equations(n, &[func]);
        let mut out = Vec::new();
        let mut acc = f.clone();
        for b in h.basis() {
            if !acc.contains(b) {
                acc = acc.with(b);
                out.push(b.clone());
            }
        }
        debug_assert_eq!(out.len(), need);
        return Some(out);
    }
    None
}

/// K(σ) < 0 for a plane outside G_geq: random metrics, then deformations
/// whose leading coefficient is negative.
pub fn find_negative_k_witness(alg: &NilpotentAlgebra, sigma: &TwoPlane, seed: u64) -> Result<SignWitness, SignError> {
    let n = alg.dim();
    check_len(n, sigma.x())?;
    if is_g_geq(alg, sigma) {
        return Err(SignError::Precondition("plane is in G_geq, so K ≥ 0 for every metric".into()));
    }
    let (x, y) = (sigma.x_f(), sigma.y_f());
    let target = WitnessTarget::Plane(sigma.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..=RANDOM_BUDGET {
        let (g, source) =
            if k == 0 { (Metric::identity(n), "identity".to_string()) } else { (Metric::random(n, &mut rng), format!("random#{k}")) };
        let v = curvature::sectional_k(alg, &g, &x, &y).map_err(curv_err)?;
        if v < -STRICT {
            return Ok(SignWitness {
                kind: WitnessKind::KNegative,
                metric: WitnessMetric::Plain(g),
                value: v,
                target: target.clone(),
                seed,
                source,
            });
        }
    }
    let abelian_plane = exact::is_zero_vec(&alg.br(sigma.x(), sigma.y()));
    for k in 0..DEFORMATION_BUDGET {
        let g = Metric::random(n, &mut rng);
        let spec = if abelian_plane { pattern_b(alg, &g, &x, &y, &mut rng)? } else { pattern_a(alg, &g, &x, &y)? };
        let Some(spec) = spec else { continue };
        for t in (-2..=6).map(|e| 2f64.powi(e)) {
            if spec.lambdas().iter().any(|l| (l * t).abs() > deformation::OVERFLOW_LIMIT) {
                break;
            }
            let v = deformation::deformed_sectional(alg, &spec, t, &x, &y)?;
            if v < -STRICT {
                return Ok(SignWitness {
                    kind: WitnessKind::KNegative,
                    metric: WitnessMetric::Deformed { spec, t },
                    value: v,
                    target,
                    seed,
                    source: format!("deformation#{k}"),
                });
            }
        }
    }
    Err(SignError::BudgetExhausted("negative sectional curvature".into()))
}

fn orth_unit(g: &Metric, v: &[f64], against: &[Vec<f64>]) -> Option<Vec<f64>> {
    let (mut inside, _) = deformation::split_orthonormal(g, against);
    let mut w = v.to_vec();
    for _ in 0..2 {
        for u in &inside {
            let c = g.inner(u, &w);
            for (a, b) in w.iter_mut().zip(u) {
                *a -= c * b;
            }
        }
    }
    let nrm = g.norm(&w);
    if nrm <= 1e-8 * g.norm(v).max(1e-300) {
        return None;
    }
    inside.clear();
    Some(w.iter().map(|a| a / nrm).collect())
}

/// [X,Y] ≠ 0: e₁ the normalized part of [X,Y] orthogonal to σ, λ = (1, 0, …, 0).
fn pattern_a(alg: &NilpotentAlgebra, g: &Metric, x: &[f64], y: &[f64]) -> Result<Option<DeformationSpec>, SignError> {
    let n = alg.dim();
    let xy = alg.br_f(x, y);
    let Some(e1) = orth_unit(g, &xy, &[x.to_vec(), y.to_vec()]) else { return Ok(None) };
    let frame = complete_frame(g, &[e1], &[])?;
    let mut lam = vec![0.0; n];
    lam[0] = 1.0;
    Ok(Some(DeformationSpec::new(g.clone(), frame, lam)?))
}

/// [X,Y] = 0: e_n = e with rk(σ ∪ [e,Y′]) = 3, e₁ ⊥ span(e, Y′, [e,Y′]) and
/// not orthogonal to X′, λ = (10, 9, 2, …, 2, 0).
fn pattern_b(
    alg: &NilpotentAlgebra,
    g: &Metric,
    x: &[f64],
    y: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Option<DeformationSpec>, SignError> {
    let n = alg.dim();
    if n < 4 {
        return Ok(None);
    }
    let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let yp: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
    let xp: Vec<f64> = x.iter().zip(y).map(|(p, q)| -b * p + a * q).collect();
    let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ey = alg.br_f(&e, &yp);
    let span3 = [e.clone(), yp.clone(), ey.clone()];
    let rank_ok = {
        let m = DMatrix::from_fn(n, 4, |r, c| [&x.to_vec(), &y.to_vec(), &ey, &e][c][r]);
        m.columns(0, 3).into_owned().svd(false, false).singular_values.min() > 1e-8
    };
    if !rank_ok {
        return Ok(None);
    }
    let en: Vec<f64> = e.iter().map(|c| c / g.norm(&e)).collect();
    let r1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let r1: Vec<f64> = r1.iter().zip(&xp).map(|(r, p)| r + p).collect();
    let Some(e1) = orth_unit(g, &r1, &span3) else { return Ok(None) };
    if g.inner(&e1, &xp).abs() < 1e-6 {
        return Ok(None);
    }
    let r2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let Some(e2) = orth_unit(g, &r2, &[e1.clone(), en.clone()]) else { return Ok(None) };
    let frame = complete_frame(g, &[e1, e2], &[en])?;
    let mut lam = vec![2.0; n];
    lam[0] = 10.0;
    lam[1] = 9.0;
    lam[n - 1] = 0.0;
    Ok(Some(DeformationSpec::new(g.clone(), frame, lam)?))
}

/// Witness for a plane label: K > 0 for G_pos, K = 0 for G_zero, K < 0 outside G_geq.
pub fn plane_witness(alg: &NilpotentAlgebra, sigma: &TwoPlane, seed: u64) -> Result<Option<SignWitness>, SignError> {
    let labels = classify_plane(alg, sigma)?;
    let n = alg.dim();
    let (x, y) = (sigma.x_f(), sigma.y_f());
    let target = WitnessTarget::Plane(sigma.clone());
    if !labels.g_geq {
        return find_negative_k_witness(alg, sigma, seed).map(Some);
    }
    let kind = if labels.g_pos {
        WitnessKind::KPositive
    } else if labels.g_zero {
        WitnessKind::KZero
    } else {
        return Ok(None);
    };
    let g = Metric::identity(n);
    let v = curvature::sectional_k(alg, &g, &x, &y).map_err(curv_err)?;
    Ok(Some(SignWitness { kind, metric: WitnessMetric::Plain(g), value: v, target, seed, source: "identity".into() }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exact::from_ints;

    fn plane(a: &[i64], b: &[i64]) -> TwoPlane {
        TwoPlane::new(&from_ints(a), &from_ints(b)).unwrap()
    }

    #[test]
    fn vector_labels() {
        let h3 = catalog::heisenberg(1);
        assert_eq!(classify_ric_vector(&h3, &from_ints(&[0, 0, 1])).unwrap(), VectorLabel::GPos);
        assert_eq!(classify_ric_vector(&h3, &from_ints(&[1, 0, 0])).unwrap(), VectorLabel::Outside);
        assert_eq!(classify_ric_vector(&h3, &from_ints(&[0, 0, 0])).unwrap(), VectorLabel::GZeroTrivial);
        let hx = catalog::heisenberg_x_abelian(1, 1);
        assert_eq!(classify_ric_vector(&hx, &from_ints(&[0, 0, 0, 1])).unwrap(), VectorLabel::GGeqOnly);
    }

    #[test]
    fn plane_labels_examples() {
        let h5 = catalog::heisenberg(2);
        let l = classify_plane(&h5, &plane(&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0])).unwrap();
        assert!(l.g_geq && !l.g1 && l.g2 && !l.g_pos);
        let h3 = catalog::heisenberg(1);
        let l = classify_plane(&h3, &plane(&[0, 0, 1], &[1, 0, 0])).unwrap();
        assert!(l.g_pos && l.g_geq && l.g1 && !l.g_zero);
        let l = classify_plane(&h3, &plane(&[1, 0, 0], &[0, 1, 0])).unwrap();
        assert!(!l.g_geq && !l.g1 && !l.g2);
        let fil = catalog::filiform_standard(5);
        let l = classify_plane(&fil, &plane(&[0, 0, 1, 0, 0], &[0, 0, 0, 1, 0])).unwrap();
        assert!(!l.g_geq && !l.g2);
        assert!(TwoPlane::new(&from_ints(&[1, 0]), &from_ints(&[2, 0])).is_err());
    }

    #[test]
    fn central_plane_g2_uses_pencil() {
        // h3 × ℝ²: σ = span(Z, A1) is central; Q = X has [g,X] = ℝZ ⊂ σ.
        let g = catalog::heisenberg_x_abelian(1, 2);
        let l = classify_plane(&g, &plane(&[0, 0, 1, 0, 0], &[0, 0, 0, 1, 0])).unwrap();
        assert!(l.g_zero && l.g2);
        // Abelian algebra: no Q with rank-one ad.
        let a = catalog::abelian(3);
        let l = classify_plane(&a, &plane(&[1, 0, 0], &[0, 1, 0])).unwrap();
        assert!(l.g_zero && !l.g2);
        // L58 center span(Z1, Z2): Q = Y1 maps onto ℝZ1 only.
        let l58 = catalog::named("L58");
        let l = classify_plane(&l58, &plane(&[0, 0, 0, 1, 0], &[0, 0, 0, 0, 1])).unwrap();
        assert!(l.g_zero && l.g2);
    }

    #[test]
    fn lemma3_identity_on_grids() {
        for e in catalog::list_catalog() {
            let g = &e.algebra;
            let n = g.dim();
            if n > 5 {
                continue;
            }
            let vs = small_grid(n);
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let Ok(p) = TwoPlane::new(&vs[i], &vs[j]) else { continue };
                    let l = classify_plane(g, &p).unwrap();
                    assert_eq!(l.g_geq, l.g1 || l.g2, "{} {:?}", e.id(), p);
                }
            }
        }
    }

    /// Nonzero vectors with entries in {−1,0,1}, first nonzero entry positive.
    fn small_grid(n: usize) -> Vec<QVec> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let v: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect();
            if let Some(f) = v.iter().find(|x| **x != 0) {
                if *f > 0 {
                    out.push(from_ints(&v));
                }
            }
        }
        out
    }

    #[test]
    fn secdef_reproduces_deformed_sectional() {
        let g = catalog::named("L5_lemma7a");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec =
            DeformationSpec::with_cholesky_frame(Metric::random(5, &mut rng), vec![0.3, -0.2, 0.1, 0.0, -0.5]).unwrap();
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = secdef_coefficients(&g, &spec, &x, &y).unwrap();
        for t in [0.0, 1.0, 3.0] {
            let m = deformation::deformed_metric(&spec, t).unwrap();
            let k = curvature::sectional_k(&g, &m, &x, &y).unwrap();
            let s = c.evaluate(spec.lambdas(), t);
            assert!((k - s).abs() < 1e-8 * (1.0 + k.abs()), "t={t}: {k} vs {s}");
        }
    }

    #[test]
    fn knonneg_matches_sectional() {
        let h5 = catalog::heisenberg(2);
        let p = plane(&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let g = Metric::random(5, &mut rng);
            let k = curvature::sectional_k(&h5, &g, &p.x_f(), &p.y_f()).unwrap();
            let v = knonneg_value(&h5, &g, &p).unwrap();
            assert!((k - v).abs() < 1e-9 * (1.0 + k.abs()));
            assert!(v >= 0.0);
        }
        let h3 = catalog::heisenberg(1);
        assert!(knonneg_value(&h3, &Metric::identity(3), &plane(&[1, 0, 0], &[0, 1, 0])).is_err());
    }

    #[test]
    fn ricci_witnesses() {
        let h3 = catalog::heisenberg(1);
        let w = find_negative_ric_witness(&h3, &from_ints(&[1, 0, 0]), 1).unwrap();
        assert_eq!(w.source, "identity");
        assert!((w.value + 0.5).abs() < 1e-12);
        w.verify(&h3).unwrap();
        assert!(find_negative_ric_witness(&h3, &from_ints(&[0, 0, 1]), 1).is_err());
        let f4 = catalog::named("filiform4");
        let w = find_negative_ric_witness(&f4, &from_ints(&[1, 0, 0, 0]), 1).unwrap();
        assert!((w.value + 1.0).abs() < 1e-12);
        let w = find_positive_ric_witness(&h3, &from_ints(&[0, 0, 1]), 1).unwrap();
        assert!((w.value - 0.5).abs() < 1e-12);
        let w = find_positive_ric_witness(&h3, &from_ints(&[1, 0, 0]), 1).unwrap();
        assert!(matches!(w.metric, WitnessMetric::Deformed { .. }));
        w.verify(&h3).unwrap();
        assert!(find_positive_ric_witness(&catalog::abelian(3), &from_ints(&[1, 0, 0]), 1).is_err());
    }

    #[test]
    fn positive_ric_limit() {
        // e^{−(2λ₁−λ_{n−1}−λ_n)t} Ric_t(Z) → ½⟨Z,[X,Y]⟩², with Z, X, Y orthonormal in the base metric.
        let g = catalog::filiform_standard(5);
        let z = from_ints(&[1, 0, 0, 0, 0]);
        let w = find_positive_ric_witness(&g, &z, 0).unwrap();
        let WitnessMetric::Deformed { spec, .. } = &w.metric else { panic!("expected a deformation") };
        let n = 5;
        let (x, y) = (spec.frame_vector(n - 2), spec.frame_vector(n - 1));
        let e1 = spec.frame_vector(0);
        let c = spec.base().inner(&e1, &g.br_f(&x, &y));
        let zf = exact::to_f64_vec(&z);
        let zn = spec.base().norm(&zf);
        let lam = spec.lambdas();
        let t = 12.0;
        let v = deformation::deformed_ricci_form(&g, spec, t, &zf, &zf).unwrap() / (zn * zn);
        let scaled = v * (-(2.0 * lam[0] - lam[n - 2] - lam[n - 1]) * t).exp();
        assert!((scaled - 0.5 * c * c).abs() < 0.05 * 0.5 * c * c, "{scaled} vs {}", 0.5 * c * c);
    }

    #[test]
    fn negative_k_witnesses_for_non_geq_planes() {
        for e in catalog::list_catalog() {
            let g = &e.algebra;
            let n = g.dim();
            if n > 5 {
                continue;
            }
            let vs = small_grid(n);
            let mut checked = 0;
            'planes: for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let Ok(p) = TwoPlane::new(&vs[i], &vs[j]) else { continue };
                    if is_g_geq(g, &p) {
                        continue;
                    }
                    let w = find_negative_k_witness(g, &p, 7).unwrap();
                    w.verify(g).unwrap();
                    checked += 1;
                    if checked >= 15 {
                        break 'planes;
                    }
                }
            }
        }
    }

    #[test]
    fn g_geq_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in catalog::list_catalog() {
            let g = &e.algebra;
            let n = g.dim();
            let vs = small_grid(n.min(4));
            let pad = |v: &QVec| {
                let mut w = v.clone();
                w.resize(n, Q::zero());
                w
            };
            for i in 0..vs.len().min(20) {
                for j in i + 1..vs.len().min(20) {
                    let Ok(p) = TwoPlane::new(&pad(&vs[i]), &pad(&vs[j])) else { continue };
                    if !exact::is_zero_vec(&g.br(p.x(), p.y())) {
                        continue;
                    }
                    let geq = is_g_geq(g, &p);
                    let all = (0..8).all(|_| {
                        let z: QVec = (0..n).map(|_| exact::q(rng.gen_range(-9..=9))).collect();
                        has_annihilating_vector(g, &p, &z)
                    });
                    assert_eq!(geq, all, "{}", e.id());
                }
            }
        }
    }
}
