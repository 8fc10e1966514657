//! Named algebra families used as ground truth.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::NilpotentAlgebra;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog key {0:?}")]
    UnknownKey(String),
    #[error("invalid parameters for {key}: {reason}")]
    InvalidParams { key: String, reason: String },
}

pub const KEYS: [&str; 14] = [
    "abelian",
    "heisenberg",
    "heisenberg_x_abelian",
    "filiform_standard",
    "filiform4",
    "L5_lemma7a",
    "L6_1",
    "L6_2",
    "L6_3",
    "L54",
    "L52",
    "L58",
    "remark_famA",
    "remark_famB",
];

/// Integer family parameters keyed by name (`n`, `m`, `l`, `pad`, `k`).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Params(pub BTreeMap<String, usize>);

impl Params {
    pub fn none() -> Self {
        Params::default()
    }

    pub fn with(mut self, key: &str, value: usize) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    fn get(&self, family: &str, key: &str) -> Result<usize, CatalogError> {
        self.0.get(key).copied().ok_or_else(|| CatalogError::InvalidParams {
            key: family.to_string(),
            reason: format!("missing parameter {key}"),
        })
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
    }
}

/// Properties implied by the defining relations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedFacts {
    pub dim: usize,
    pub nilpotency_class: usize,
    pub center_dim: usize,
    pub two_step: bool,
    /// Ricci spectrum (ascending) for the metric making the listed basis
    /// orthonormal, where a closed form is known.
    pub ricci_spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub key: String,
    pub params: Params,
    pub algebra: NilpotentAlgebra,
    pub expected: ExpectedFacts,
}

impl CatalogEntry {
    pub fn id(&self) -> String {
        if self.params.0.is_empty() {
            self.key.clone()
        } else {
            format!("{}({})", self.key, self.params.label())
        }
    }
}

fn invalid(key: &str, reason: &str) -> CatalogError {
    CatalogError::InvalidParams { key: key.to_string(), reason: reason.to_string() }
}

fn build_rel(name: &str, labels: &[String], rels: &[(&str, &str, &str, i64)]) -> NilpotentAlgebra {
    let idx = |s: &str| labels.iter().position(|l| l == s).unwrap_or_else(|| panic!("label {s}"));
    let entries: Vec<_> = rels
        .iter()
        .map(|&(a, b, c, v)| {
            let (i, j) = (idx(a), idx(b));
            if i < j {
                (i, j, idx(c), v)
            } else {
                (j, i, idx(c), -v)
            }
        })
        .collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    NilpotentAlgebra::from_int_brackets(Some(name), labels.len(), &entries)
        .expect("catalog relations are well formed")
        .with_labels(&refs)
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn heisenberg_spectrum(l: usize, pad: usize) -> Vec<f64> {
    let mut s = vec![-0.5; 2 * l];
    s.extend(std::iter::repeat_n(0.0, pad));
    s.push(l as f64 / 2.0);
    s.sort_by(f64::total_cmp);
    s
}

/// Builds a catalog algebra together with the facts implied by its relations.
pub fn build_entry(key: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    let p = |k: &str| params.get(key, k);
    let (algebra, class, center_dim, spectrum) = match key {
        "abelian" => {
            let n = p("n")?;
            if n == 0 {
                return Err(invalid(key, "n must be positive"));
            }
            let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
            (build_rel("abelian", &names, &[]), 1, n, Some(vec![0.0; n]))
        }
        "heisenberg" | "heisenberg_x_abelian" => {
            let (l, pad) = if key == "heisenberg" { (p("m")?, 0) } else { (p("l")?, p("pad")?) };
            if l == 0 {
                return Err(invalid(key, "needs at least one Heisenberg pair"));
            }
            let n = 2 * l + 1 + pad;
            let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
            let top = format!("X{}", 2 * l + 1);
            let rels: Vec<(String, String)> =
                (1..=l).map(|i| (format!("X{}", 2 * i - 1), format!("X{}", 2 * i))).collect();
            let r: Vec<(&str, &str, &str, i64)> =
                rels.iter().map(|(a, b)| (a.as_str(), b.as_str(), top.as_str(), 1)).collect();
            (build_rel(key, &names, &r), 2, 1 + pad, Some(heisenberg_spectrum(l, pad)))
        }
        "filiform_standard" => {
            let n = p("n")?;
            if n < 3 {
                return Err(invalid(key, "n must be at least 3"));
            }
            let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
            let mut r = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if i + j <= n {
                        r.push((i, j, i + j, (j - i) as i64));
                    }
                }
            }
            let entries: Vec<_> = r.iter().map(|&(i, j, k, c)| (i - 1, j - 1, k - 1, c)).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let g = NilpotentAlgebra::from_int_brackets(Some(key), n, &entries)
                .expect("well formed")
                .with_labels(&refs);
            (g, n - 1, 1, None)
        }
        "filiform4" => (
            build_rel(key, &labels(&["W", "X", "Y", "Z"]), &[("W", "X", "Y", 1), ("W", "Y", "Z", 1)]),
            3,
            1,
            Some(vec![-1.0, -0.5, 0.0, 0.5]),
        ),
        "L5_lemma7a" => (
            build_rel(
                key,
                &labels(&["c", "X", "Y", "A", "Z"]),
                &[("c", "X", "A", 1), ("c", "A", "Z", 1), ("X", "Y", "Z", 1)],
            ),
            3,
            1,
            None,
        ),
        "L6_1" => (
            build_rel(
                key,
                &labels(&["c", "X", "Y", "A1", "A2", "Z"]),
                &[("c", "X", "A1", 1), ("c", "A1", "A2", 1), ("X", "Y", "Z", 1)],
            ),
            3,
            2,
            None,
        ),
        "L6_2" => (
            build_rel(
                key,
                &labels(&["c", "X", "Y", "A1", "A2", "Z"]),
                &[("c", "X", "A1", 1), ("c", "Y", "A2", 1), ("c", "A1", "Z", 1), ("X", "Y", "Z", 1)],
            ),
            3,
            2,
            None,
        ),
        "L6_3" => (
            build_rel(
                key,
                &labels(&["c", "X", "Y", "A1", "A2", "Z"]),
                &[("c", "X", "A1", 1), ("c", "A1", "A2", 1), ("c", "A2", "Z", 1), ("X", "Y", "Z", 1)],
            ),
            4,
            1,
            None,
        ),
        "L54" => (
            build_rel(
                key,
                &labels(&["X1", "Y1", "X2", "Y2", "Z"]),
                &[("X1", "Y1", "Z", 1), ("X2", "Y2", "Z", 1)],
            ),
            2,
            1,
            Some(heisenberg_spectrum(2, 0)),
        ),
        "L52" => (
            build_rel(key, &labels(&["X", "Y", "Z", "A1", "A2"]), &[("X", "Y", "Z", 1)]),
            2,
            3,
            Some(heisenberg_spectrum(1, 2)),
        ),
        "L58" => (
            build_rel(
                key,
                &labels(&["X", "Y1", "Y2", "Z1", "Z2"]),
                &[("X", "Y1", "Z1", 1), ("X", "Y2", "Z2", 1)],
            ),
            2,
            2,
            None,
        ),
        "remark_famA" | "remark_famB" => {
            let (k, l) = (p("k")?, p("l")?);
            let min_l = if key == "remark_famA" { 2 } else { 1 };
            if k < 2 {
                return Err(invalid(key, "k must be at least 2"));
            }
            if l < min_l {
                return Err(invalid(key, &format!("l must be at least {min_l}")));
            }
            let mut names: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
            names.extend((1..=k).map(|i| format!("Y{i}")));
            names.extend((1..=l).map(|i| format!("Z{i}")));
            let pairs: Vec<(String, String)> = (1..=k).map(|i| (format!("X{i}"), format!("Y{i}"))).collect();
            let mut r: Vec<(&str, &str, &str, i64)> =
                pairs.iter().map(|(a, b)| (a.as_str(), b.as_str(), "Z1", 1)).collect();
            let center_dim = if key == "remark_famA" {
                r.push(("X1", "Z2", "Y1", 1));
                l - 1
            } else {
                r.push(("X1", "X2", "Y1", 1));
                l
            };
            (build_rel(key, &names, &r), 3, center_dim, None)
        }
        other => return Err(CatalogError::UnknownKey(other.to_string())),
    };
    let expected = ExpectedFacts {
        dim: algebra.dim(),
        nilpotency_class: class,
        center_dim,
        two_step: class <= 2,
        ricci_spectrum: spectrum,
    };
    Ok(CatalogEntry { key: key.to_string(), params: params.clone(), algebra, expected })
}

pub fn build(key: &str, params: &Params) -> Result<NilpotentAlgebra, CatalogError> {
    build_entry(key, params).map(|e| e.algebra)
}

/// Convenience for parameterless families; panics on an unknown key.
pub fn named(key: &str) -> NilpotentAlgebra {
    build(key, &Params::none()).unwrap_or_else(|e| panic!("{e}"))
}

pub fn heisenberg(m: usize) -> NilpotentAlgebra {
    build("heisenberg", &Params::none().with("m", m)).expect("m >= 1")
}

pub fn heisenberg_x_abelian(l: usize, pad: usize) -> NilpotentAlgebra {
    build("heisenberg_x_abelian", &Params::none().with("l", l).with("pad", pad)).expect("l >= 1")
}

pub fn filiform_standard(n: usize) -> NilpotentAlgebra {
    build("filiform_standard", &Params::none().with("n", n)).expect("n >= 3")
}

pub fn abelian(n: usize) -> NilpotentAlgebra {
    build("abelian", &Params::none().with("n", n)).expect("n >= 1")
}

/// The default catalog instances, in a fixed order.
pub fn list_catalog() -> Vec<CatalogEntry> {
    let specs: Vec<(&str, Params)> = vec![
        ("abelian", Params::none().with("n", 3)),
        ("heisenberg", Params::none().with("m", 1)),
        ("heisenberg", Params::none().with("m", 2)),
        ("heisenberg_x_abelian", Params::none().with("l", 1).with("pad", 1)),
        ("heisenberg_x_abelian", Params::none().with("l", 2).with("pad", 1)),
        ("filiform_standard", Params::none().with("n", 5)),
        ("filiform_standard", Params::none().with("n", 6)),
        ("filiform4", Params::none()),
        ("L5_lemma7a", Params::none()),
        ("L6_1", Params::none()),
        ("L6_2", Params::none()),
        ("L6_3", Params::none()),
        ("L54", Params::none()),
        ("L52", Params::none()),
        ("L58", Params::none()),
        ("remark_famA", Params::none().with("k", 2).with("l", 2)),
        ("remark_famB", Params::none().with("k", 2).with("l", 1)),
    ];
    specs
        .into_iter()
        .map(|(k, p)| {
            let e = build_entry(k, &p).expect("catalog defaults are valid");
            debug_assert!(e.algebra.validate().valid, "{} must validate", e.id());
            e
        })
        .collect()
}

/// Structural filter classes accepted by `list_filtered`.
pub const FILTERS: [&str; 5] = ["two-step", "codim1-abelian", "abelian", "nonabelian", "not-two-step"];

pub fn matches_filter(g: &NilpotentAlgebra, filter: &str) -> Option<bool> {
    Some(match filter {
        "two-step" => g.is_two_step() && !g.is_abelian(),
        "not-two-step" => !g.is_two_step(),
        "codim1-abelian" => g.find_codim1_abelian_ideal().is_some(),
        "abelian" => g.is_abelian(),
        "nonabelian" => !g.is_abelian(),
        _ => return None,
    })
}

pub fn list_filtered(filter: &str) -> Option<Vec<CatalogEntry>> {
    let all = list_catalog();
    let mut out = Vec::new();
    for e in all {
        if matches_filter(&e.algebra, filter)? {
            out.push(e);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{unit, Subspace};

    #[test]
    fn heisenberg_relations() {
        let g = heisenberg(2);
        assert_eq!(g.dim(), 5);
        assert_eq!(g.br(&unit(5, 0), &unit(5, 1)), unit(5, 4));
        assert_eq!(g.br(&unit(5, 2), &unit(5, 3)), unit(5, 4));
        assert!(crate::exact::is_zero_vec(&g.br(&unit(5, 1), &unit(5, 2))));
    }

    #[test]
    fn l6_1_relations() {
        let g = named("L6_1");
        assert_eq!(g.dim(), 6);
        assert_eq!(g.br(&g.e("c"), &g.e("X")), g.e("A1"));
        assert_eq!(g.br(&g.e("c"), &g.e("A1")), g.e("A2"));
        assert_eq!(g.br(&g.e("X"), &g.e("Y")), g.e("Z"));
        assert_eq!(g.entries().len(), 3);
    }

    #[test]
    fn filiform_standard_relations() {
        let g = filiform_standard(5);
        assert_eq!(g.br(&unit(5, 0), &unit(5, 1)), unit(5, 2));
        // [X2, X3] = (3 - 2) X5
        assert_eq!(g.br(&unit(5, 1), &unit(5, 2)), unit(5, 4));
        // [X1, X3] = 2 X4
        assert_eq!(g.br(&unit(5, 0), &unit(5, 2)), crate::exact::scale(&crate::exact::q(2), &unit(5, 3)));
    }

    #[test]
    fn trivial_abelian() {
        let g = abelian(1);
        assert_eq!(g.dim(), 1);
        assert!(g.entries().is_empty());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            build("filiform_standard", &Params::none().with("n", 2)),
            Err(CatalogError::InvalidParams { .. })
        ));
        assert!(build("remark_famA", &Params::none().with("k", 2).with("l", 1)).is_err());
        assert!(build("remark_famB", &Params::none().with("k", 2).with("l", 1)).is_ok());
        assert!(build("remark_famB", &Params::none().with("k", 1).with("l", 1)).is_err());
        assert!(matches!(build("nope", &Params::none()), Err(CatalogError::UnknownKey(_))));
        assert!(build("heisenberg", &Params::none()).is_err());
    }

    #[test]
    fn every_entry_validates_with_expected_facts() {
        let all = list_catalog();
        assert!(all.len() >= 14);
        for e in &all {
            let r = e.algebra.validate();
            assert!(r.valid, "{}", e.id());
            assert_eq!(r.nilpotency_class, Some(e.expected.nilpotency_class), "{}", e.id());
            assert_eq!(e.algebra.center().dim(), e.expected.center_dim, "{}", e.id());
            assert_eq!(e.algebra.is_two_step(), e.expected.two_step, "{}", e.id());
        }
    }

    #[test]
    fn filiform_class_and_center() {
        for n in 4..=8 {
            let g = filiform_standard(n);
            assert_eq!(g.nilpotency_class(), Some(n - 1));
            assert_eq!(g.center().dim(), 1);
        }
    }

    #[test]
    fn filters() {
        let ts: Vec<String> = list_filtered("two-step").unwrap().iter().map(|e| e.key.clone()).collect();
        assert!(ts.contains(&"heisenberg".to_string()));
        assert!(!ts.contains(&"filiform4".to_string()));
        let ca: Vec<String> = list_filtered("codim1-abelian").unwrap().iter().map(|e| e.key.clone()).collect();
        assert!(ca.contains(&"filiform4".to_string()));
        assert!(ca.contains(&"filiform_standard".to_string()) || !ca.iter().any(|k| k == "filiform_standard"));
        assert!(list_filtered("bogus").is_none());
    }

    #[test]
    fn derivation_class_properties() {
        // L5: D = ad_c on span(X, Y, A, Z) satisfies [DU, V] + [DV, U] = 0.
        let g = named("L5_lemma7a");
        let h = Subspace::span(5, vec![g.e("X"), g.e("Y"), g.e("A"), g.e("Z")]);
        let c = g.e("c");
        for u in h.basis() {
            for v in h.basis() {
                let s = crate::exact::add(&g.br(&g.br(&c, u), v), &g.br(&g.br(&c, v), u));
                assert!(crate::exact::is_zero_vec(&s));
            }
        }
        for key in ["L6_1", "L6_2", "L6_3"] {
            let g = named(key);
            let c = g.e("c");
            let h: Vec<_> = ["X", "Y", "A1", "A2", "Z"].iter().map(|l| g.e(l)).collect();
            for u in &h {
                for v in &h {
                    let d_uv = g.br(&c, &g.br(u, v));
                    let two_du_v = crate::exact::scale(&crate::exact::q(2), &g.br(&g.br(&c, u), v));
                    assert_eq!(d_uv, two_du_v, "{key}");
                }
            }
        }
    }
}
