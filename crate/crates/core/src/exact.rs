//! Exact rational linear algebra: vectors, echelon forms, null spaces and
//! subspaces stored in canonical reduced row-echelon form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type QVec = Vec<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero_vec(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = zero_vec(n);
    v[i] = Q::one();
    v
}

pub fn from_ints(v: &[i64]) -> QVec {
    v.iter().map(|&x| q(x)).collect()
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(s: &Q, a: &[Q]) -> QVec {
    a.iter().map(|x| s * x).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [Q], s: &Q, x: &[Q]) {
    if s.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += s * xi;
        }
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn to_f64_vec(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Exact binary value of a finite float.
pub fn from_f64_exact(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions). Used to recognise rational values that were
/// computed in floating point.
pub fn rationalize(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut r = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = r - a;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let v = Q::new(BigInt::from(p1), BigInt::from(q1));
    Some(if neg { -v } else { v })
}

/// Parses "p/q", "p" or a terminating decimal such as "-0.25".
pub fn parse_rational(s: &str) -> Result<Q, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| format!("bad integer {s:?}"))?;
    Ok(Q::from_integer(n))
}

pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Reduced row-echelon form of the given rows. Returns the nonzero rows and
/// their pivot columns.
pub fn rref(mut rows: Vec<QVec>, ncols: usize) -> (Vec<QVec>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(vectors: &[QVec]) -> usize {
    match vectors.first() {
        None => 0,
        Some(v) => rref(vectors.to_vec(), v.len()).1.len(),
    }
}

/// Basis of `{x : row . x = 0 for every row}`.
pub fn nullspace(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let (r, pivots) = rref(rows.to_vec(), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = zero_vec(ncols);
            v[f] = Q::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `A x = b`, with `A` given by rows, or `None`.
pub fn solve(rows: &[QVec], rhs: &[Q], ncols: usize) -> Option<QVec> {
    let aug: Vec<QVec> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let (r, pivots) = rref(aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = zero_vec(ncols);
    for (row, &p) in r.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Determinant by fraction-based elimination.
pub fn det(m: &[QVec]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        let pr = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] * &inv;
                for (x, y) in row.iter_mut().zip(&pr).skip(c) {
                    *x -= &f * y;
                }
            }
        }
    }
    d
}

/// Scales a nonzero vector so that its first nonzero entry is 1.
pub fn normalize_projective(v: &[Q]) -> QVec {
    match v.iter().find(|x| !x.is_zero()) {
        None => v.to_vec(),
        Some(lead) => {
            let inv = lead.recip();
            scale(&inv, v)
        }
    }
}

pub fn abs_max(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}

/// A linear subspace of `Q^n`, stored as a canonical RREF basis so that
/// derived equality is equality of subspaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<QVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span<I: IntoIterator<Item = QVec>>(ambient: usize, vecs: I) -> Self {
        let rows: Vec<QVec> = vecs.into_iter().filter(|v| !is_zero_vec(v)).collect();
        let (basis, pivots) = rref(rows, ambient);
        Subspace { ambient, basis, pivots }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, (0..ambient).map(|i| unit(ambient, i)))
    }

    /// `{x : eq . x = 0 for every eq}`.
    pub fn from_equations(ambient: usize, eqs: &[QVec]) -> Self {
        Self::span(ambient, nullspace(eqs, ambient))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after eliminating the pivot coordinates; zero iff
    /// `v` lies in the subspace.
    pub fn reduce(&self, v: &[Q]) -> QVec {
        let mut r = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (x, y) in r.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.ambient, self.basis.iter().chain(&other.basis).cloned())
    }

    pub fn with(&self, v: &[Q]) -> Subspace {
        Subspace::span(self.ambient, self.basis.iter().cloned().chain(std::iter::once(v.to_vec())))
    }

    /// Functionals vanishing on the subspace, as coefficient rows.
    pub fn annihilator(&self) -> Vec<QVec> {
        nullspace(&self.basis, self.ambient)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let mut eqs = self.annihilator();
        eqs.extend(other.annihilator());
        Subspace::from_equations(self.ambient, &eqs)
    }

    /// Coordinates of `v` in the RREF basis, if `v` is in the subspace.
    pub fn coordinates(&self, v: &[Q]) -> Option<QVec> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    /// Basis vectors of the standard basis completing this subspace to the
    /// whole space (the non-pivot coordinates).
    pub fn complement_units(&self) -> Vec<usize> {
        (0..self.ambient).filter(|c| !self.pivots.contains(c)).collect()
    }
}
