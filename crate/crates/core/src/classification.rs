//! Structural tests behind the maximal/minimal Ricci direction results:
//! the generic rank conditions on pairs and triples, the small-L dichotomy
//! (Heisenberg×abelian or 4-dim filiform), and the cocycle/derivation
//! classes of algebras violating both rank conditions.
//!
//! Rank conditions are decided by exact rank on swept and sampled rational
//! inputs; a `false` verdict only means nothing was found within budget.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::exact::{self, Subspace, Q, QVec};

/// Bound on numerators and denominators of sampled rationals.
pub const RATIONAL_BOUND: i64 = 97;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassificationError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ambiguous structure: {0}")]
    Ambiguous(String),
}

pub fn random_rational<R: Rng + ?Sized>(rng: &mut R) -> Q {
    let num = rng.gen_range(-RATIONAL_BOUND..=RATIONAL_BOUND);
    let den = rng.gen_range(1..=RATIONAL_BOUND);
    Q::new(num.into(), den.into())
}

pub fn random_rational_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QVec {
    (0..n).map(|_| random_rational(rng)).collect()
}

fn fmt_vec(v: &[Q]) -> Vec<String> {
    v.iter().map(exact::format_rational).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RankCheck {
    pub holds: bool,
    /// The witnessing pair or triple, as exact rationals.
    pub witness: Option<Vec<Vec<String>>>,
    #[serde(skip)]
    pub witness_exact: Option<Vec<QVec>>,
    pub samples: usize,
    /// "witnessed" or "not found within budget".
    pub status: &'static str,
}

impl RankCheck {
    fn found(w: Vec<QVec>, samples: usize) -> Self {
        RankCheck {
            holds: true,
            witness: Some(w.iter().map(|v| fmt_vec(v)).collect()),
            witness_exact: Some(w),
            samples,
            status: "witnessed",
        }
    }

    fn not_found(samples: usize) -> Self {
        RankCheck { holds: false, witness: None, witness_exact: None, samples, status: "not found within budget" }
    }
}

/// The five vectors X₁, X₂, X₁₂, X₁₁₂, X₂₁₂.
pub fn rk5_vectors(alg: &NilpotentAlgebra, x1: &[Q], x2: &[Q]) -> Vec<QVec> {
    let x12 = alg.br(x1, x2);
    vec![x1.to_vec(), x2.to_vec(), alg.br(x1, &x12), alg.br(x2, &x12), x12]
}

/// The seven vectors X₁, X₂, X₃, X₁₂, X₁₃, X₂₃, X₃₁₂.
pub fn rk7_vectors(alg: &NilpotentAlgebra, x1: &[Q], x2: &[Q], x3: &[Q]) -> Vec<QVec> {
    let x12 = alg.br(x1, x2);
    vec![
        x1.to_vec(),
        x2.to_vec(),
        x3.to_vec(),
        alg.br(x3, &x12),
        alg.br(x1, x3),
        alg.br(x2, x3),
        x12,
    ]
}

fn basis_sums(n: usize) -> Vec<QVec> {
    let mut v: Vec<QVec> = (0..n).map(|i| exact::unit(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            v.push(exact::add(&exact::unit(n, i), &exact::unit(n, j)));
        }
    }
    v
}

pub fn check_rk5(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> RankCheck {
    let n = alg.dim();
    if n < 5 || alg.is_two_step() {
        return RankCheck::not_found(0);
    }
    let sweep = basis_sums(n);
    for a in &sweep {
        for b in &sweep {
            if exact::rank(&rk5_vectors(alg, a, b)) == 5 {
                return RankCheck::found(vec![a.clone(), b.clone()], samples);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (a, b) = (random_rational_vec(n, &mut rng), random_rational_vec(n, &mut rng));
        if exact::rank(&rk5_vectors(alg, &a, &b)) == 5 {
            return RankCheck::found(vec![a, b], samples);
        }
    }
    RankCheck::not_found(samples)
}

pub fn check_rk7(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> RankCheck {
    let n = alg.dim();
    if n < 7 || alg.is_two_step() {
        return RankCheck::not_found(0);
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (a, b, c) = (exact::unit(n, i), exact::unit(n, j), exact::unit(n, k));
                if exact::rank(&rk7_vectors(alg, &a, &b, &c)) == 7 {
                    return RankCheck::found(vec![a, b, c], samples);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let v: Vec<QVec> = (0..3).map(|_| random_rational_vec(n, &mut rng)).collect();
        if exact::rank(&rk7_vectors(alg, &v[0], &v[1], &v[2])) == 7 {
            return RankCheck::found(v, samples);
        }
    }
    RankCheck::not_found(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma6Class {
    HeisenbergXAbelian,
    Filiform4,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma6Verdict {
    pub class: Lemma6Class,
    /// Largest dim L(X₁,X₂,X₃) seen over the sweep and samples.
    pub max_dim_l: usize,
    pub witness: Vec<Vec<String>>,
}

/// Largest dim L over basis triples, basis-sum triples and random triples.
pub fn sampled_max_dim_l(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> (usize, Vec<QVec>) {
    let n = alg.dim();
    let cap = n.min(6);
    let mut best = (0, vec![exact::zero_vec(n); 3]);
    let sweep = basis_sums(n);
    let consider = |a: &QVec, b: &QVec, c: &QVec, best: &mut (usize, Vec<QVec>)| {
        let d = alg.span_with_brackets(a, b, c).dim();
        if d > best.0 {
            *best = (d, vec![a.clone(), b.clone(), c.clone()]);
        }
        best.0 == cap
    };
    for i in 0..sweep.len() {
        for j in i + 1..sweep.len() {
            for k in j + 1..sweep.len() {
                if consider(&sweep[i], &sweep[j], &sweep[k], &mut best) {
                    return best;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let v: Vec<QVec> = (0..3).map(|_| random_rational_vec(n, &mut rng)).collect();
        if consider(&v[0], &v[1], &v[2], &mut best) {
            break;
        }
    }
    best
}

pub fn lemma6_classify(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> Result<Lemma6Verdict, ClassificationError> {
    let (max_dim_l, w) = sampled_max_dim_l(alg, samples, seed);
    let witness = w.iter().map(|v| fmt_vec(v)).collect();
    let class = if max_dim_l > 4 || alg.is_abelian() {
        Lemma6Class::NotApplicable
    } else {
        let derived = alg.derived();
        let series: Vec<usize> = alg.lower_central_series().iter().map(Subspace::dim).collect();
        if derived.dim() == 1 {
            // dim g′ = 1 forces g′ central; the bracket pairing is then
            // nondegenerate modulo its radical, the center.
            if !alg.center().contains(&derived.basis()[0]) {
                return Err(ClassificationError::Ambiguous("one-dimensional derived algebra is not central".into()));
            }
            Lemma6Class::HeisenbergXAbelian
        } else if alg.dim() == 4 && series == [4, 2, 1, 0] {
            // The unique 4-dim nilpotent algebra of class 3.
            Lemma6Class::Filiform4
        } else {
            return Err(ClassificationError::Ambiguous(format!(
                "dim L ≤ 4 but lower central series dims {series:?} match neither shape"
            )));
        }
    };
    Ok(Lemma6Verdict { class, max_dim_l, witness })
}

/// Exact maximum of dim L(X₁,X₂,X₃) over the integer grid {−b,…,b}ⁿ, for n ≤ 5.
///
/// X₁ and X₂ run over grid lines. X₃ is eliminated exactly: with
/// S = span(X₁, X₂, X₁₂) of dim 3, dim L = 5 iff for some X₃ the images of
/// X₃, [X₁,X₃], [X₂,X₃] in g/S have rank 2. Each 2×2 minor is a quadratic
/// form in X₃ with degree ≤ 2 in every coordinate, so it vanishes on a grid
/// with 2b+1 ≥ 3 points per axis iff it vanishes identically. When dim L = 5
/// occurs, some ordering of the triple has dim S = 3, so that case suffices.
pub fn grid_max_dim_l(alg: &NilpotentAlgebra, b: i64) -> usize {
    let n = alg.dim();
    assert!(n <= 5, "grid oracle is limited to dimension ≤ 5");
    assert!(b >= 1);
    let c = int_structure(alg);
    let lines = grid_lines(n, b);
    if n == 5 && five_reachable(&c, &lines) {
        return 5;
    }
    // Otherwise the maximum is ≤ 4: enumerate with early exit at min(n, 4).
    let cap = n.min(4);
    let mut best = 0;
    for i in 0..lines.len() {
        for j in i..lines.len() {
            for k in j..lines.len() {
                let (x, y, z) = (&lines[i], &lines[j], &lines[k]);
                let vs = [x.clone(), y.clone(), z.clone(), br_i(&c, x, y), br_i(&c, y, z), br_i(&c, x, z)];
                best = best.max(int_rank(&vs));
                if best >= cap {
                    return best;
                }
            }
        }
    }
    best
}

type IntTensor = Vec<Vec<Vec<i128>>>;

fn int_structure(alg: &NilpotentAlgebra) -> IntTensor {
    let n = alg.dim();
    let mut c = vec![vec![vec![0i128; n]; n]; n];
    for (i, j, k, v) in alg.entries() {
        assert!(v.is_integer(), "grid oracle needs integer structure constants");
        let v: i128 = v.to_integer().try_into().expect("small structure constant");
        c[i][j][k] = v;
        c[j][i][k] = -v;
    }
    c
}

fn br_i(c: &IntTensor, x: &[i128], y: &[i128]) -> Vec<i128> {
    let n = x.len();
    let mut out = vec![0i128; n];
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        for j in 0..n {
            if y[j] == 0 {
                continue;
            }
            for k in 0..n {
                out[k] += x[i] * y[j] * c[i][j][k];
            }
        }
    }
    out
}

/// Grid vectors with first nonzero entry positive.
fn grid_lines(n: usize, b: i64) -> Vec<Vec<i128>> {
    let side = (2 * b + 1) as usize;
    let mut out = Vec::new();
    for code in 0..side.pow(n as u32) {
        let mut c = code;
        let v: Vec<i128> = (0..n)
            .map(|_| {
                let d = (c % side) as i128 - b as i128;
                c /= side;
                d
            })
            .collect();
        if v.iter().find(|x| **x != 0).is_some_and(|f| *f > 0) {
            out.push(v);
        }
    }
    out
}

/// Rank by fraction-free elimination.
fn int_rank(vs: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = vs.iter().filter(|v| v.iter().any(|x| *x != 0)).cloned().collect();
    let ncols = vs.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if m[r][col] != 0 {
                let (a, b) = (m[rank][col], m[r][col]);
                let g = gcd(a, b);
                for cc in col..ncols {
                    m[r][cc] = m[r][cc] * (a / g) - m[rank][cc] * (b / g);
                }
                let row_g = m[r].iter().fold(0i128, |acc, x| gcd(acc, *x));
                if row_g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= row_g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Two integer functionals spanning the annihilator of a rank-3 set in ℤ⁵.
fn annihilator_int(vs: &[Vec<i128>; 3]) -> Vec<Vec<i128>> {
    let rows: Vec<QVec> = vs.iter().map(|v| v.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
    exact::nullspace(&rows, vs[0].len())
        .into_iter()
        .map(|f| {
            let den = f.iter().fold(num_bigint::BigInt::from(1), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
            f.iter()
                .map(|x| (x * Q::from_integer(den.clone())).to_integer().try_into().expect("small functional"))
                .collect()
        })
        .collect()
}

fn five_reachable(c: &IntTensor, lines: &[Vec<i128>]) -> bool {
    let n = 5;
    for i in 0..lines.len() {
        for j in 0..lines.len() {
            if i == j {
                continue;
            }
            let (x, y) = (&lines[i], &lines[j]);
            let xy = br_i(c, x, y);
            let s = [x.clone(), y.clone(), xy];
            if int_rank(&s) < 3 {
                continue;
            }
            let f = annihilator_int(&s);
            debug_assert_eq!(f.len(), 2);
            // Rows of M_a: functionals of X₃ giving coordinates of X₃, [X,X₃], [Y,X₃] in g/S.
            let ad = |v: &[i128]| -> Vec<Vec<i128>> {
                // ad_v as matrix: (ad_v)_{k,m} = Σ_i v_i c[i][m][k]
                (0..n).map(|k| (0..n).map(|m| (0..n).map(|ii| v[ii] * c[ii][m][k]).sum()).collect()).collect()
            };
            let compose = |mat: Option<&Vec<Vec<i128>>>| -> Vec<Vec<i128>> {
                f.iter()
                    .map(|fr| match mat {
                        None => fr.clone(),
                        Some(a) => (0..n).map(|m| (0..n).map(|k| fr[k] * a[k][m]).sum()).collect(),
                    })
                    .collect()
            };
            let (adx, ady) = (ad(x), ad(y));
            let maps = [compose(None), compose(Some(&adx)), compose(Some(&ady))];
            for a in 0..3 {
                for bb in a..3 {
                    let (ma, mb) = (&maps[a], &maps[bb]);
                    for m in 0..n {
                        for l in m..n {
                            let coef = ma[0][m] * mb[1][l] - ma[1][m] * mb[0][l] + ma[0][l] * mb[1][m]
                                - ma[1][l] * mb[0][m];
                            if coef != 0 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// Structure constants of a subalgebra in the echelon basis of `s`, or
/// `None` when `s` is not closed under the bracket.
pub fn restrict_to_subalgebra(alg: &NilpotentAlgebra, s: &Subspace) -> Option<NilpotentAlgebra> {
    let b = s.basis();
    let mut entries = Vec::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let coords = s.coordinates(&alg.br(&b[i], &b[j]))?;
            for (k, c) in coords.into_iter().enumerate() {
                if !c.is_zero() {
                    entries.push((i, j, k, c));
                }
            }
        }
    }
    NilpotentAlgebra::from_brackets(None, b.len(), &entries).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubalgebraShape {
    /// [c,X]=A, [c,A]=Z, [X,Y]=Z.
    #[serde(rename = "five")]
    Five,
    /// [c,X]=A₁, [c,A₁]=A₂, [X,Y]=Z.
    #[serde(rename = "dimsix1")]
    Six1,
    /// [c,X]=A₁, [c,Y]=A₂, [c,A₁]=Z, [X,Y]=Z.
    #[serde(rename = "dimsix2")]
    Six2,
    /// [c,X]=A₁, [c,A₁]=A₂, [c,A₂]=Z, [X,Y]=Z.
    #[serde(rename = "dimsix3")]
    Six3,
}

impl SubalgebraShape {
    pub const ALL: [SubalgebraShape; 4] =
        [SubalgebraShape::Five, SubalgebraShape::Six1, SubalgebraShape::Six2, SubalgebraShape::Six3];

    pub fn model(&self) -> NilpotentAlgebra {
        let key = match self {
            SubalgebraShape::Five => "L5_lemma7a",
            SubalgebraShape::Six1 => "L6_1",
            SubalgebraShape::Six2 => "L6_2",
            SubalgebraShape::Six3 => "L6_3",
        };
        crate::catalog::named(key)
    }
}

/// Isomorphism invariants separating the four subalgebra shapes: lower
/// central series dims, center dim, and whether the derived algebra of the
/// centralizer of L′ equals [L, L′].
pub fn shape_fingerprint(alg: &NilpotentAlgebra) -> (Vec<usize>, usize, bool) {
    let series: Vec<usize> = alg.lower_central_series().iter().map(Subspace::dim).collect();
    let d = alg.derived();
    let cent = alg.centralizer(&d);
    let cc = alg.bracket_spaces(&cent, &cent);
    let l2 = alg.bracket_spaces(&alg.whole(), &d);
    (series, alg.center().dim(), cc == l2)
}

pub fn match_shape(alg: &NilpotentAlgebra) -> Option<SubalgebraShape> {
    let fp = shape_fingerprint(alg);
    let hits: Vec<SubalgebraShape> =
        SubalgebraShape::ALL.into_iter().filter(|s| shape_fingerprint(&s.model()) == fp).collect();
    (hits.len() == 1).then(|| hits[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivationCertificate {
    pub h_basis: Vec<Vec<String>>,
    pub c: Vec<String>,
    /// D = ad_c restricted to h, in h-basis coordinates (rows = images).
    pub d_matrix: Vec<Vec<String>>,
    /// D[U,V] = 2[DU,V] = 2[U,DV] on basis pairs.
    pub derivation_identity: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleCertificate {
    pub c: Vec<String>,
    /// Sampled X for which some Y has [X,[X,Y]] = 0 and [Y,[X,Y]] ≠ 0.
    pub passing_samples: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma7Verdict {
    /// Subset of {"A", "C"}: the cocycle class and the derivation class.
    pub classes: Vec<&'static str>,
    pub derivation: Option<DerivationCertificate>,
    pub cocycle: Option<CocycleCertificate>,
    /// Generic dim L and the matched subalgebra shape, for the derivation class.
    pub n_generic: Option<usize>,
    pub n_agreement: Option<(usize, usize)>,
    pub shape: Option<SubalgebraShape>,
}

pub fn lemma7_classify(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> Result<Lemma7Verdict, ClassificationError> {
    if alg.is_abelian() {
        return Err(ClassificationError::Precondition("algebra is abelian".into()));
    }
    if alg.is_two_step() {
        return Err(ClassificationError::Precondition("algebra is two-step nilpotent".into()));
    }
    if check_rk5(alg, samples, seed).holds {
        return Err(ClassificationError::Precondition("the pair rank condition holds".into()));
    }
    if check_rk7(alg, samples, seed).holds {
        return Err(ClassificationError::Precondition("the triple rank condition holds".into()));
    }
    let derivation = derivation_class(alg);
    let cocycle = cocycle_class(alg, samples.clamp(1, 20), seed);
    let mut classes = Vec::new();
    if cocycle.as_ref().is_some_and(|c| c.passing_samples == c.samples) {
        classes.push("A");
    }
    let (mut n_generic, mut n_agreement, mut shape) = (None, None, None);
    if derivation.is_some() {
        classes.push("C");
        let (n, agree, l) = generic_l(alg, 100, seed);
        n_generic = Some(n);
        n_agreement = Some((agree, 100));
        shape = l.as_ref().and_then(match_shape);
    }
    Ok(Lemma7Verdict { classes, derivation, cocycle, n_generic, n_agreement, shape })
}

/// Most frequent dim L over seeded random triples, its count, and the
/// subalgebra L for one triple attaining it.
pub fn generic_l(alg: &NilpotentAlgebra, trials: usize, seed: u64) -> (usize, usize, Option<NilpotentAlgebra>) {
    let n = alg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4c);
    let mut counts: BTreeMap<usize, (usize, Subspace)> = BTreeMap::new();
    for _ in 0..trials {
        let v: Vec<QVec> = (0..3).map(|_| random_rational_vec(n, &mut rng)).collect();
        let l = alg.span_with_brackets(&v[0], &v[1], &v[2]);
        counts.entry(l.dim()).or_insert((0, l)).0 += 1;
    }
    let (dim, (count, l)) = counts.into_iter().max_by_key(|(d, (c, _))| (*c, *d)).expect("trials > 0");
    (dim, count, restrict_to_subalgebra(alg, &l))
}

/// Codimension-one two-step ideals h ⊇ g′ from functionals with small
/// integer coordinates over a basis of the annihilator of g′, checked for
/// D = ad_c|h with [DU,V] + [DV,U] = 0.
pub fn derivation_class(alg: &NilpotentAlgebra) -> Option<DerivationCertificate> {
    let n = alg.dim();
    let ann = alg.derived().annihilator();
    let m = ann.len();
    let side = 5usize;
    for code in 1..side.pow(m as u32) {
        let mut cc = code;
        let coef: Vec<i64> = (0..m)
            .map(|_| {
                let d = (cc % side) as i64 - 2;
                cc /= side;
                d
            })
            .collect();
        if coef.iter().find(|x| **x != 0).is_none_or(|f| *f < 0) {
            continue;
        }
        let mut f = exact::zero_vec(n);
        for (a, &k) in ann.iter().zip(&coef) {
            exact::axpy(&mut f, &exact::q(k), a);
        }
        let h = Subspace::from_equations(n, &[f.clone()]);
        let hh = alg.bracket_spaces(&h, &h);
        if !alg.bracket_spaces(&h, &hh).is_zero() {
            continue;
        }
        let ci = (0..n).find(|&i| !f[i].is_zero()).expect("nonzero functional");
        let c = exact::unit(n, ci);
        let hb = h.basis();
        let d: Vec<QVec> = hb.iter().map(|u| alg.br(&c, u)).collect();
        let polarized = (0..hb.len()).all(|i| {
            (i..hb.len()).all(|j| exact::is_zero_vec(&exact::add(&alg.br(&d[i], &hb[j]), &alg.br(&d[j], &hb[i]))))
        });
        if !polarized {
            continue;
        }
        let two = exact::q(2);
        let identity = (0..hb.len()).all(|i| {
            (0..hb.len()).all(|j| {
                let lhs = alg.br(&c, &alg.br(&hb[i], &hb[j]));
                let mid = exact::scale(&two, &alg.br(&d[i], &hb[j]));
                let rhs = exact::scale(&two, &alg.br(&hb[i], &d[j]));
                lhs == mid && mid == rhs
            })
        });
        let d_matrix = d.iter().map(|v| fmt_vec(&h.coordinates(v).expect("h is an ideal"))).collect();
        return Some(DerivationCertificate {
            h_basis: hb.iter().map(|v| fmt_vec(v)).collect(),
            c: fmt_vec(&c),
            d_matrix,
            derivation_identity: identity,
        });
    }
    None
}

/// Requires [g,[g,g]] = ℝc with c central. Then for sampled X, checks
/// whether Y ↦ [Y,[X,Y]] is nonzero somewhere on ker ad_X².
pub fn cocycle_class(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> Option<CocycleCertificate> {
    let n = alg.dim();
    let d = alg.derived();
    let g3 = alg.bracket_spaces(&alg.whole(), &d);
    if g3.dim() != 1 || !alg.center().contains(&g3.basis()[0]) {
        return None;
    }
    let c = g3.basis()[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA);
    let mut passing = 0;
    for _ in 0..samples {
        let x = random_rational_vec(n, &mut rng);
        let adx = alg.ad_rows(&x);
        let adx2: Vec<QVec> = (0..n)
            .map(|r| {
                let mut row = exact::zero_vec(n);
                for (k, a) in adx[r].iter().enumerate() {
                    if !a.is_zero() {
                        exact::axpy(&mut row, a, &adx[k]);
                    }
                }
                row
            })
            .collect();
        let kb = Subspace::from_equations(n, &adx2).basis().to_vec();
        // Bilinear form B(Y₁,Y₂) = [Y₁,[X,Y₂]] + [Y₂,[X,Y₁]] on the kernel.
        let nonzero = (0..kb.len()).any(|i| {
            (i..kb.len()).any(|j| {
                let v = exact::add(&alg.br(&kb[i], &alg.br(&x, &kb[j])), &alg.br(&kb[j], &alg.br(&x, &kb[i])));
                !exact::is_zero_vec(&v)
            })
        });
        if nonzero {
            passing += 1;
        }
    }
    Some(CocycleCertificate { c: fmt_vec(&c), passing_samples: passing, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxCase {
    Abelian,
    TwoStep,
    Codim1Abelian,
    Generic,
}

#[derive(Debug, Clone)]
pub struct ExpectedM {
    pub case: MaxCase,
    pub subspace: Subspace,
}

/// The subspace whose projectivization is the closure of the set of
/// Ricci-maximal directions over all metrics.
pub fn theorem2_expected_m(alg: &NilpotentAlgebra) -> ExpectedM {
    if alg.is_abelian() {
        ExpectedM { case: MaxCase::Abelian, subspace: alg.whole() }
    } else if alg.is_two_step() {
        ExpectedM { case: MaxCase::TwoStep, subspace: alg.derived() }
    } else if let Some(a) = alg.find_codim1_abelian_ideal() {
        ExpectedM { case: MaxCase::Codim1Abelian, subspace: a }
    } else {
        ExpectedM { case: MaxCase::Generic, subspace: alg.whole() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureVerdict {
    pub rk5: RankCheck,
    pub rk7: RankCheck,
    pub two_step: bool,
    pub codim1_abelian: Option<Vec<Vec<String>>>,
    pub lemma6: Result<Lemma6Verdict, String>,
    pub lemma7: Result<Lemma7Verdict, String>,
    pub expected_m_case: MaxCase,
    pub expected_m: Vec<Vec<String>>,
}

pub fn classify(alg: &NilpotentAlgebra, samples: usize, seed: u64) -> StructureVerdict {
    let m = theorem2_expected_m(alg);
    StructureVerdict {
        rk5: check_rk5(alg, samples, seed),
        rk7: check_rk7(alg, samples, seed),
        two_step: alg.is_two_step(),
        codim1_abelian: alg.find_codim1_abelian_ideal().map(|s| s.basis().iter().map(|v| fmt_vec(v)).collect()),
        lemma6: lemma6_classify(alg, samples, seed).map_err(|e| e.to_string()),
        lemma7: lemma7_classify(alg, samples, seed).map_err(|e| e.to_string()),
        expected_m_case: m.case,
        expected_m: m.subspace.basis().iter().map(|v| fmt_vec(v)).collect(),
    }
}
