//! Nilpotent Lie algebras given by exact structure constants, and the
//! structural queries used throughout: brackets, lower central series,
//! centre, spans with brackets, codimension-one abelian ideals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exact::{self, format_rational, parse_rational, Subspace, QVec, Q};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bracket entry [{i},{j}] must have i < j")]
    NotIncreasing { i: usize, j: usize },
    #[error("duplicate bracket entry (i={i}, j={j}, k={k})")]
    Duplicate { i: usize, j: usize, k: usize },
    #[error("index out of range in bracket entry (i={i}, j={j}, k={k}) for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, n: usize },
    #[error("dimension must be positive")]
    EmptyAlgebra,
    #[error("invalid algebra JSON: {0}")]
    Json(String),
}

/// A finite-dimensional Lie algebra over Q with structure constants
/// `[e_i, e_j] = sum_k c_ij^k e_k`, stored sparsely for `i < j`.
#[derive(Debug, Clone)]
pub struct NilpotentAlgebra {
    name: Option<String>,
    n: usize,
    labels: Vec<String>,
    consts: BTreeMap<(usize, usize), BTreeMap<usize, Q>>,
    terms_f: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub jacobi_holds: bool,
    /// Basis triples `(i, j, k)` (0-based) where the Jacobi identity fails.
    pub jacobi_violations: Vec<(usize, usize, usize)>,
    pub nilpotent: bool,
    pub nilpotency_class: Option<usize>,
    pub abelian: bool,
    pub series_dims: Vec<usize>,
}

impl NilpotentAlgebra {
    /// Builds an algebra from 0-based entries `(i, j, k, c)` with `i < j`.
    /// Zero coefficients are dropped. Jacobi and nilpotency are not checked
    /// here; see [`NilpotentAlgebra::validate`].
    pub fn from_brackets(
        name: Option<&str>,
        n: usize,
        entries: &[(usize, usize, usize, Q)],
    ) -> Result<Self, AlgebraError> {
        if n == 0 {
            return Err(AlgebraError::EmptyAlgebra);
        }
        let mut consts: BTreeMap<(usize, usize), BTreeMap<usize, Q>> = BTreeMap::new();
        for (i, j, k, c) in entries.iter().cloned() {
            if i >= n || j >= n || k >= n {
                return Err(AlgebraError::IndexOutOfRange { i, j, k, n });
            }
            if i >= j {
                return Err(AlgebraError::NotIncreasing { i, j });
            }
            let slot = consts.entry((i, j)).or_default();
            if slot.contains_key(&k) {
                return Err(AlgebraError::Duplicate { i, j, k });
            }
            slot.insert(k, c);
        }
        for m in consts.values_mut() {
            m.retain(|_, c| !c.is_zero());
        }
        consts.retain(|_, m| !m.is_empty());
        let terms_f = consts
            .iter()
            .flat_map(|(&(i, j), m)| m.iter().map(move |(&k, c)| (i, j, k, exact::to_f64(c))))
            .collect();
        Ok(NilpotentAlgebra {
            name: name.map(str::to_string),
            n,
            labels: (1..=n).map(|i| format!("e{i}")).collect(),
            consts,
            terms_f,
        })
    }

    /// Same as [`from_brackets`](Self::from_brackets) with integer coefficients.
    pub fn from_int_brackets(
        name: Option<&str>,
        n: usize,
        entries: &[(usize, usize, usize, i64)],
    ) -> Result<Self, AlgebraError> {
        let e: Vec<_> = entries.iter().map(|&(i, j, k, c)| (i, j, k, exact::q(c))).collect();
        Self::from_brackets(name, n, &e)
    }

    pub fn abelian(n: usize) -> Self {
        Self::from_brackets(Some("abelian"), n, &[]).expect("positive dimension")
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        assert_eq!(labels.len(), self.n, "one label per basis vector");
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the basis vector with the given label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Basis vector by label; panics on an unknown label.
    pub fn e(&self, label: &str) -> QVec {
        let i = self.index_of(label).unwrap_or_else(|| panic!("no basis vector {label}"));
        exact::unit(self.n, i)
    }

    /// Nonzero structure constants `(i, j, k, c)` with `i < j`, 0-based.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Q)> {
        self.consts
            .iter()
            .flat_map(|(&(i, j), m)| m.iter().map(move |(&k, c)| (i, j, k, c.clone())))
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.consts.is_empty()
    }

    /// `c_ij^k` for any ordered pair.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> Q {
        if i == j {
            return Q::zero();
        }
        let (a, b, s) = if i < j { (i, j, Q::one()) } else { (j, i, -Q::one()) };
        self.consts
            .get(&(a, b))
            .and_then(|m| m.get(&k))
            .map(|c| &s * c)
            .unwrap_or_else(Q::zero)
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> QVec {
        let mut v = exact::zero_vec(self.n);
        if i == j {
            return v;
        }
        let (a, b, neg) = if i < j { (i, j, false) } else { (j, i, true) };
        if let Some(m) = self.consts.get(&(a, b)) {
            for (&k, c) in m {
                v[k] = if neg { -c.clone() } else { c.clone() };
            }
        }
        v
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Result<QVec, AlgebraError> {
        for v in [x, y] {
            if v.len() != self.n {
                return Err(AlgebraError::DimensionMismatch { expected: self.n, got: v.len() });
            }
        }
        Ok(self.br(x, y))
    }

    /// Exact bracket; the caller guarantees matching lengths.
    pub fn br(&self, x: &[Q], y: &[Q]) -> QVec {
        debug_assert!(x.len() == self.n && y.len() == self.n);
        let mut out = exact::zero_vec(self.n);
        for (&(i, j), m) in &self.consts {
            let w = &x[i] * &y[j] - &x[j] * &y[i];
            if w.is_zero() {
                continue;
            }
            for (&k, c) in m {
                out[k] += &w * c;
            }
        }
        out
    }

    /// Floating bracket; the caller guarantees matching lengths.
    pub fn br_f(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, k, c) in &self.terms_f {
            out[k] += c * (x[i] * y[j] - x[j] * y[i]);
        }
        out
    }

    /// Dense float structure constants, indexed `[(i * n + j) * n + k]`.
    pub fn dense_f64(&self) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n * n];
        for &(i, j, k, v) in &self.terms_f {
            c[(i * n + j) * n + k] = v;
            c[(j * n + i) * n + k] = -v;
        }
        c
    }

    /// Matrix of `ad_x` as rows: `(ad_x)_{kj}` is the `k`-th coordinate of `[x, e_j]`.
    pub fn ad_rows(&self, x: &[Q]) -> Vec<QVec> {
        let n = self.n;
        let mut rows = vec![exact::zero_vec(n); n];
        for j in 0..n {
            let col = self.br(x, &exact::unit(n, j));
            for k in 0..n {
                rows[k][j] = col[k].clone();
            }
        }
        rows
    }

    /// Apply a row-form matrix to a vector.
    pub fn apply(rows: &[QVec], v: &[Q]) -> QVec {
        rows.iter().map(|r| exact::dot(r, v)).collect()
    }

    /// `[U, V]` for subspaces: the span of brackets of basis vectors.
    pub fn bracket_spaces(&self, u: &Subspace, v: &Subspace) -> Subspace {
        let mut vecs = Vec::new();
        for a in u.basis() {
            for b in v.basis() {
                vecs.push(self.br(a, b));
            }
        }
        Subspace::span(self.n, vecs)
    }

    pub fn whole(&self) -> Subspace {
        Subspace::full(self.n)
    }

    pub fn derived(&self) -> Subspace {
        let n = self.n;
        let mut vecs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                vecs.push(self.basis_bracket(i, j));
            }
        }
        Subspace::span(n, vecs)
    }

    /// `g, g', [g, g'], ...` down to zero. For a non-nilpotent algebra the
    /// series stops at the first repeated term (which is nonzero).
    pub fn lower_central_series(&self) -> Vec<Subspace> {
        let g = self.whole();
        let mut series = vec![g.clone()];
        loop {
            let last = series.last().expect("nonempty");
            if last.is_zero() {
                break;
            }
            let next = self.bracket_spaces(&g, last);
            if &next == last {
                break;
            }
            series.push(next);
        }
        series
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last().is_some_and(Subspace::is_zero)
    }

    /// Step of nilpotency: the number of nonzero terms of the lower central
    /// series (abelian = 1). `None` if not nilpotent.
    pub fn nilpotency_class(&self) -> Option<usize> {
        let s = self.lower_central_series();
        s.last().filter(|l| l.is_zero()).map(|_| s.len() - 1)
    }

    pub fn jacobi_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.n;
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (ei, ej, ek) = (exact::unit(n, i), exact::unit(n, j), exact::unit(n, k));
                    let a = self.br(&ei, &self.basis_bracket(j, k));
                    let b = self.br(&ej, &self.basis_bracket(k, i));
                    let c = self.br(&ek, &self.basis_bracket(i, j));
                    let s = exact::add(&exact::add(&a, &b), &c);
                    if !exact::is_zero_vec(&s) {
                        bad.push((i, j, k));
                    }
                }
            }
        }
        bad
    }

    pub fn validate(&self) -> ValidationReport {
        let jacobi_violations = self.jacobi_violations();
        let series = self.lower_central_series();
        let nilpotent = series.last().is_some_and(Subspace::is_zero);
        let jacobi_holds = jacobi_violations.is_empty();
        ValidationReport {
            valid: jacobi_holds && nilpotent,
            jacobi_holds,
            jacobi_violations,
            nilpotent,
            nilpotency_class: if nilpotent { Some(series.len() - 1) } else { None },
            abelian: self.is_abelian(),
            series_dims: series.iter().map(Subspace::dim).collect(),
        }
    }

    /// Exact null space of the stacked ad-matrices.
    pub fn center(&self) -> Subspace {
        let n = self.n;
        // [x, e_j]_k = sum_i x_i c_ij^k, one equation per (j, k).
        let mut eqs = Vec::new();
        for j in 0..n {
            for k in 0..n {
                let row: QVec = (0..n).map(|i| self.constant(i, j, k)).collect();
                if !exact::is_zero_vec(&row) {
                    eqs.push(row);
                }
            }
        }
        Subspace::from_equations(n, &eqs)
    }

    /// `{x : [x, s] = 0 for all s in S}`.
    pub fn centralizer(&self, s: &Subspace) -> Subspace {
        let n = self.n;
        let mut eqs = Vec::new();
        for v in s.basis() {
            // [x, v] = -ad_v x
            eqs.extend(self.ad_rows(v).into_iter().filter(|r| !exact::is_zero_vec(r)));
        }
        Subspace::from_equations(n, &eqs)
    }

    /// `{x : [x, g] is contained in S}`.
    pub fn preimage_of_bracket_into(&self, s: &Subspace) -> Subspace {
        let n = self.n;
        let ann = s.annihilator();
        let mut eqs = Vec::new();
        for j in 0..n {
            // k-th coordinate of [x, e_j] = sum_i x_i c_ij^k
            let cols: Vec<QVec> = (0..n).map(|k| (0..n).map(|i| self.constant(i, j, k)).collect()).collect();
            for f in &ann {
                let mut row = exact::zero_vec(n);
                for (k, fk) in f.iter().enumerate() {
                    if !fk.is_zero() {
                        exact::axpy(&mut row, fk, &cols[k]);
                    }
                }
                if !exact::is_zero_vec(&row) {
                    eqs.push(row);
                }
            }
        }
        Subspace::from_equations(n, &eqs)
    }

    /// `L(X1, X2, X3) = span(X1, X2, X3, X12, X23, X13)`.
    pub fn span_with_brackets(&self, x1: &[Q], x2: &[Q], x3: &[Q]) -> Subspace {
        Subspace::span(
            self.n,
            vec![
                x1.to_vec(),
                x2.to_vec(),
                x3.to_vec(),
                self.br(x1, x2),
                self.br(x2, x3),
                self.br(x1, x3),
            ],
        )
    }

    pub fn is_two_step(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    let inner = self.basis_bracket(j, k);
                    if !exact::is_zero_vec(&self.br(&exact::unit(n, i), &inner)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_ideal(&self, s: &Subspace) -> bool {
        s.contains_subspace(&self.bracket_spaces(&self.whole(), s))
    }

    pub fn is_abelian_subspace(&self, s: &Subspace) -> bool {
        self.bracket_spaces(s, s).is_zero()
    }

    /// Functionals `f` whose kernel is a codimension-one abelian ideal, as a
    /// linear space of coefficient rows (empty when none exist).
    ///
    /// `ker f` is an ideal iff `f` vanishes on `g'`, and it is abelian iff
    /// every component 2-form `b_k(x, y) = [x, y]_k` is divisible by `f`,
    /// i.e. `f ^ b_k = 0`. Both conditions are linear in `f`.
    pub fn codim1_abelian_functionals(&self) -> Vec<QVec> {
        let n = self.n;
        let mut eqs: Vec<QVec> = Vec::new();
        for v in self.derived().basis() {
            eqs.push(v.clone());
        }
        for k in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        // (f ^ b_k)_{abc} = f_a b_bc - f_b b_ac + f_c b_ab
                        let mut row = exact::zero_vec(n);
                        row[a] = self.constant(b, c, k);
                        row[b] = -self.constant(a, c, k);
                        row[c] = self.constant(a, b, k);
                        if !exact::is_zero_vec(&row) {
                            eqs.push(row);
                        }
                    }
                }
            }
        }
        exact::nullspace(&eqs, n)
    }

    /// A codimension-one abelian ideal, if one exists. The canonical choice
    /// is the kernel of the first functional of the RREF solution basis.
    pub fn find_codim1_abelian_ideal(&self) -> Option<Subspace> {
        let fs = self.codim1_abelian_functionals();
        let f = Subspace::span(self.n, fs).basis().first()?.clone();
        let ideal = Subspace::from_equations(self.n, &[f]);
        debug_assert!(self.is_ideal(&ideal) && self.is_abelian_subspace(&ideal));
        Some(ideal)
    }

    pub fn to_file(&self) -> AlgebraFile {
        AlgebraFile {
            name: self.name.clone().unwrap_or_default(),
            dim: self.n,
            brackets: self
                .entries()
                .into_iter()
                .map(|(i, j, k, c)| BracketEntry { i: i + 1, j: j + 1, k: k + 1, c: format_rational(&c) })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    /// Parses the algebra JSON format (1-based indices, rational strings).
    pub fn from_json_str(s: &str) -> Result<Self, AlgebraError> {
        let v: Value = serde_json::from_str(s).map_err(|e| AlgebraError::Json(e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| AlgebraError::Json("top level must be an object".into()))?;
        let name = match obj.get("name") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(AlgebraError::Json("key \"name\" must be a string".into())),
        };
        let dim = obj
            .get("dim")
            .ok_or_else(|| AlgebraError::Json("missing key \"dim\"".into()))?
            .as_u64()
            .ok_or_else(|| AlgebraError::Json("key \"dim\" must be a positive integer".into()))?
            as usize;
        let brackets = match obj.get("brackets") {
            None => return Err(AlgebraError::Json("missing key \"brackets\"".into())),
            Some(Value::Array(a)) => a,
            Some(_) => return Err(AlgebraError::Json("key \"brackets\" must be an array".into())),
        };
        let mut entries = Vec::new();
        for (idx, b) in brackets.iter().enumerate() {
            let get_index = |key: &str| -> Result<usize, AlgebraError> {
                let x = b
                    .get(key)
                    .ok_or_else(|| AlgebraError::Json(format!("brackets[{idx}]: missing key \"{key}\"")))?
                    .as_u64()
                    .ok_or_else(|| {
                        AlgebraError::Json(format!("brackets[{idx}].{key}: must be a positive integer"))
                    })?;
                if x == 0 {
                    return Err(AlgebraError::Json(format!("brackets[{idx}].{key}: indices are 1-based")));
                }
                Ok(x as usize - 1)
            };
            let (i, j, k) = (get_index("i")?, get_index("j")?, get_index("k")?);
            let c = match b.get("c") {
                Some(Value::String(s)) => {
                    parse_rational(s).map_err(|e| AlgebraError::Json(format!("brackets[{idx}].c: {e}")))?
                }
                Some(Value::Number(x)) if x.is_i64() => exact::q(x.as_i64().expect("checked")),
                Some(_) => {
                    return Err(AlgebraError::Json(format!("brackets[{idx}].c: must be a rational string \"p/q\"")))
                }
                None => return Err(AlgebraError::Json(format!("brackets[{idx}]: missing key \"c\""))),
            };
            entries.push((i, j, k, c));
        }
        Self::from_brackets(name.as_deref(), dim, &entries)
    }
}

/// Serialized algebra: `{"name", "dim", "brackets": [{"i","j","k","c"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}
