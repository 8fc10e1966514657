//! The acceptance suite: nine criteria with fixed tolerances and runtime
//! budgets. Each returns a JSON detail record; timings are kept out of the
//! JSON so that reports are byte-reproducible.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use nilcurv_core::catalog::{self, CatalogEntry};
use nilcurv_core::classification::{self, Lemma6Class};
use nilcurv_core::curvature::{self, Curvature, Metric};
use nilcurv_core::deformation::{self, DeformationSpec};
use nilcurv_core::exact::{self, Subspace, Q, QVec};
use nilcurv_core::maxmin;
use nilcurv_core::sign_sets::{self, TwoPlane, WitnessMetric};
use nilcurv_core::tables;
use nilcurv_core::NilpotentAlgebra;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CriterionId {
    HeisenbergSpectrum = 1,
    Filiform4Spectrum = 2,
    DeformationLimit = 3,
    Convergence = 4,
    RicciSigns = 5,
    PlaneSigns = 6,
    SmallLOracle = 7,
    MaxMinSampling = 8,
    Determinism = 9,
}

impl CriterionId {
    pub const ALL: [CriterionId; 9] = [
        CriterionId::HeisenbergSpectrum,
        CriterionId::Filiform4Spectrum,
        CriterionId::DeformationLimit,
        CriterionId::Convergence,
        CriterionId::RicciSigns,
        CriterionId::PlaneSigns,
        CriterionId::SmallLOracle,
        CriterionId::MaxMinSampling,
        CriterionId::Determinism,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::HeisenbergSpectrum => "heisenberg-spectrum",
            CriterionId::Filiform4Spectrum => "filiform4-spectrum",
            CriterionId::DeformationLimit => "deformation-limit",
            CriterionId::Convergence => "extremal-convergence",
            CriterionId::RicciSigns => "ricci-signs",
            CriterionId::PlaneSigns => "plane-signs",
            CriterionId::SmallLOracle => "small-l-oracle",
            CriterionId::MaxMinSampling => "maxmin-sampling",
            CriterionId::Determinism => "determinism",
        }
    }

    /// Group names accepted by `--only` besides numbers and full names.
    fn groups(self) -> &'static [&'static str] {
        match self {
            CriterionId::HeisenbergSpectrum | CriterionId::Filiform4Spectrum => &["spectra"],
            CriterionId::DeformationLimit | CriterionId::Convergence => &["deform"],
            CriterionId::RicciSigns | CriterionId::PlaneSigns => &["signsets"],
            CriterionId::SmallLOracle => &["classify"],
            CriterionId::MaxMinSampling => &["maxmin"],
            CriterionId::Determinism => &["determinism"],
        }
    }

    pub fn budget(self) -> Duration {
        Duration::from_secs(match self {
            CriterionId::HeisenbergSpectrum | CriterionId::Filiform4Spectrum => 1,
            CriterionId::DeformationLimit => 30,
            CriterionId::Convergence => 10,
            CriterionId::RicciSigns => 60,
            CriterionId::PlaneSigns | CriterionId::SmallLOracle | CriterionId::MaxMinSampling => 120,
            CriterionId::Determinism => 5,
        })
    }

    /// Parses a comma-separated `--only` list.
    pub fn parse_list(s: &str) -> Result<Vec<CriterionId>, String> {
        let mut out = BTreeSet::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let hits: Vec<CriterionId> = CriterionId::ALL
                .into_iter()
                .filter(|c| tok == c.number().to_string() || tok == c.name() || c.groups().contains(&tok))
                .collect();
            if hits.is_empty() {
                return Err(format!("unknown criterion {tok:?}"));
            }
            out.extend(hits);
        }
        Ok(out.into_iter().collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub details: Value,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {} {:<22} {}  ({:.2}s, budget {}s)",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

pub fn run(id: CriterionId, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let (passed, details) = match id {
        CriterionId::HeisenbergSpectrum => heisenberg_spectrum(seed),
        CriterionId::Filiform4Spectrum => filiform4_spectrum(seed),
        CriterionId::DeformationLimit => deformation_limit(seed),
        CriterionId::Convergence => convergence(),
        CriterionId::RicciSigns => ricci_signs(seed),
        CriterionId::PlaneSigns => plane_signs(seed),
        CriterionId::SmallLOracle => small_l_oracle(seed),
        CriterionId::MaxMinSampling => maxmin_sampling(seed),
        CriterionId::Determinism => determinism(seed),
    };
    CriterionResult { id: id.number(), name: id.name(), passed, details, elapsed: start.elapsed(), budget: id.budget() }
}

pub fn run_all(ids: &[CriterionId], seed: u64) -> Vec<CriterionResult> {
    ids.iter().map(|&id| run(id, seed)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn frame_metric(cols: &[Vec<f64>]) -> Metric {
    let m = DMatrix::from_columns(&cols.iter().map(|c| DVector::from_column_slice(c)).collect::<Vec<_>>());
    Metric::from_orthonormal_frame(&m).expect("frame is a basis")
}

fn spectrum(alg: &NilpotentAlgebra, g: &Metric) -> Vec<f64> {
    curvature::ricci_operator(alg, g).expect("dimensions match").eigenvalues
}

fn heisenberg_spectrum(seed: u64) -> (bool, Value) {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h3 = catalog::heisenberg(1);
    let mut worst = max_abs_diff(&spectrum(&h3, &Metric::identity(3)), &[-0.5, -0.5, 0.5]);
    let mut cases = Vec::new();
    for l in 1..=3usize {
        for pad in 0..=2usize {
            let g = catalog::heisenberg_x_abelian(l, pad);
            let n = 2 * l + 1 + pad;
            let top = 2 * l;
            // E_i = X_i + Z_i + a_i X_top for i ≤ 2l, with Z_i in the abelian factor.
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    if i < top {
                        for z in v.iter_mut().skip(top + 1) {
                            *z = rng.gen_range(-2.0..2.0);
                        }
                        v[top] = rng.gen_range(-2.0..2.0);
                    }
                    v
                })
                .collect();
            let mut want = vec![-0.5; 2 * l];
            want.extend(std::iter::repeat_n(0.0, pad));
            want.push(l as f64 / 2.0);
            let err = max_abs_diff(&spectrum(&g, &frame_metric(&cols)), &want);
            worst = worst.max(err);
            cases.push(json!({ "l": l, "pad": pad, "max_error": err }));
        }
    }
    (worst < TOL, json!({ "tol": TOL, "max_error": worst, "cases": cases }))
}

fn filiform4_spectrum(seed: u64) -> (bool, Value) {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
    let g = catalog::named("filiform4");
    let want = [-1.0, -0.5, 0.0, 0.5];
    let mut worst = 0.0f64;
    let mut samples = Vec::new();
    for _ in 0..10 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        // Basis W, X, Y, Z.
        let cols = vec![vec![1.0, a, b, c], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]];
        let err = max_abs_diff(&spectrum(&g, &frame_metric(&cols)), &want);
        worst = worst.max(err);
        samples.push(json!({ "abc": [a, b, c], "max_error": err }));
    }
    (worst < TOL, json!({ "tol": TOL, "max_error": worst, "samples": samples }))
}

fn cluster_means(m: &DMatrix<f64>) -> Vec<f64> {
    deformation::clustered_eigenvalues(m, 1e-6).into_iter().map(|(re, _)| re).collect()
}

fn merged(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let d = DMatrix::from_diagonal(&DVector::from_vec(v));
    cluster_means(&d)
}

/// BᵀB + I with B uniform in [−1,1]: condition number at most 1 + n².
fn conditioned_metric(n: usize, rng: &mut ChaCha8Rng) -> Metric {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    Metric::from_gram(b.transpose() * &b + DMatrix::identity(n, n)).expect("SPD")
}

fn deformation_limit(seed: u64) -> (bool, Value) {
    const LIMIT_TOL: f64 = 1e-6;
    const EIG_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
    let mut worst_limit = 0.0f64;
    let mut worst_eig = 0.0f64;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for e in catalog::list_catalog().into_iter().filter(|e| e.algebra.dim() <= 7) {
        let g = &e.algebra;
        let n = g.dim();
        let (mut le, mut ee) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let p = rng.gen_range(1..=n - 2);
            let q = rng.gen_range(2..=n - p);
            let mut lam = vec![0.0; n];
            lam[..p].fill(1.0);
            lam[n - q..].fill(-1.0);
            let res = DeformationSpec::with_cholesky_frame(conditioned_metric(n, &mut rng), lam.clone())
                .and_then(|spec| {
                    let lim = deformation::scaled_ricci_limit(g, &spec)?;
                    let err = deformation::limit_error(&lim, spec.lambdas(), 40.0 / lim.gap)?;
                    Ok((lim, err))
                });
            match res {
                Ok((lim, err)) => {
                    le = le.max(err);
                    let got = cluster_means(&lim.phi0_matrix());
                    let want = merged(lim.block_eigenvalues().expect("block pattern"));
                    ee = ee.max(max_abs_diff(&got, &want));
                }
                Err(err) => errors.push(format!("{} {:?}: {err}", e.id(), lam)),
            }
        }
        worst_limit = worst_limit.max(le);
        worst_eig = worst_eig.max(ee);
        rows.push(json!({ "algebra": e.id(), "limit_error": le, "eigenvalue_error": ee }));
    }
    let ok = errors.is_empty() && worst_limit < LIMIT_TOL && worst_eig < EIG_TOL;
    (
        ok,
        json!({
            "limit_tol": LIMIT_TOL,
            "eigenvalue_tol": EIG_TOL,
            "max_limit_error": worst_limit,
            "max_eigenvalue_error": worst_eig,
            "algebras": rows,
            "errors": errors,
        }),
    )
}

fn convergence() -> (bool, Value) {
    const CLOSED_FORM_TOL: f64 = 1e-9;
    let mut out = Vec::new();
    let mut ok = true;
    let mut record = |name: &str, res: Result<(f64, deformation::ConvergenceTrace), String>| match res {
        Ok((form_err, tr)) => {
            let pass = tr.converged() && form_err < CLOSED_FORM_TOL;
            ok &= pass;
            out.push(json!({
                "algebra": name,
                "closed_form_error": form_err,
                "final_distance": tr.final_distance(),
                "converged_from": tr.converged_from,
                "tol": tr.tol,
                "passed": pass,
            }));
        }
        Err(e) => {
            ok = false;
            out.push(json!({ "algebra": name, "error": e }));
        }
    };
    // h3 with e = Z: T = 2Z.
    record(
        "heisenberg(m=1)",
        (|| {
            let g = catalog::heisenberg(1);
            let c = deformation::candidate_two_step(&g, &Metric::identity(3), &[0.0, 0.0, 1.0]).map_err(|e| e.to_string())?;
            let err = max_abs_diff(&c.t, &[0.0, 0.0, 2.0]);
            let spec = c.spec.as_ref().ok_or("no deformation")?;
            let tr = deformation::convergence_check(&g, spec, &c, &deformation::default_t_grid(spec.lambdas()))
                .map_err(|e| e.to_string())?;
            Ok((err, tr))
        })(),
    );
    // filiform4: T is a multiple of X.
    record(
        "filiform4",
        (|| {
            let (g, m, [e, u1, u2]) = tables::filiform4_frame();
            let c = deformation::candidate_e1u2(&g, &m, &e, &u1, &u2).map_err(|e| e.to_string())?;
            let err = deformation::projective_distance(&c.t, &[0.0, -1.0, 0.0, 0.0]);
            let spec = c.spec.as_ref().ok_or("no deformation")?;
            let tr = deformation::convergence_check(&g, spec, &c, &deformation::default_t_grid(spec.lambdas()))
                .map_err(|e| e.to_string())?;
            Ok((err, tr))
        })(),
    );
    // L5_lemma7a: T₂ = k(α₁, α₂, α₃, −α₂α₃/(2α₁), 0) with k = 2α₁/α₃.
    record(
        "L5_lemma7a",
        (|| {
            let alpha = [2.0, 3.0, 5.0];
            let (g, m, [e1, e2, u1, u2, u3]) = tables::l5_frame(alpha, [0.0, 0.0]);
            let (_, t2) = deformation::candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3).map_err(|e| e.to_string())?;
            let [a1, a2, a3] = alpha;
            let k = 2.0 * a1 / a3;
            let err = max_abs_diff(&t2.t, &[k * a1, k * a2, k * a3, -k * a2 * a3 / (2.0 * a1), 0.0]);
            let spec = t2.spec.as_ref().ok_or("no deformation")?;
            let tr = deformation::convergence_check(&g, spec, &t2, &deformation::default_t_grid(spec.lambdas()))
                .map_err(|e| e.to_string())?;
            Ok((err, tr))
        })(),
    );
    (ok, json!({ "closed_form_tol": CLOSED_FORM_TOL, "cases": out }))
}

fn random_in(s: &Subspace, rng: &mut ChaCha8Rng) -> QVec {
    let mut v = exact::zero_vec(s.ambient());
    for b in s.basis() {
        exact::axpy(&mut v, &exact::q(rng.gen_range(-5..=5)), b);
    }
    v
}

fn nonabelian(entries: Vec<CatalogEntry>) -> impl Iterator<Item = CatalogEntry> {
    entries.into_iter().filter(|e| !e.algebra.is_abelian())
}

fn ricci_signs(seed: u64) -> (bool, Value) {
    const POS_TOL: f64 = 1e-12;
    const LIMIT_REL: f64 = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
    let mut ok = true;
    let mut rows = Vec::new();
    for e in nonabelian(catalog::list_catalog()) {
        let g = &e.algebra;
        let n = g.dim();
        let center = g.center();
        let dz = g.derived().intersect(&center);
        let metrics: Vec<Metric> = (0..50).map(|_| Metric::random(n, &mut rng)).collect();
        // (i) central derived vectors are Ricci-positive for every metric.
        let mut min_pos = f64::INFINITY;
        for _ in 0..20 {
            let x = loop {
                let v = random_in(&dz, &mut rng);
                if !exact::is_zero_vec(&v) {
                    break v;
                }
            };
            let xf = exact::to_f64_vec(&x);
            for m in &metrics {
                let r = curvature::ricci_form(g, m, &xf, &xf).expect("dims") / m.inner(&xf, &xf);
                min_pos = min_pos.min(r);
            }
        }
        // (ii) noncentral vectors admit a negative witness.
        let mut neg_fail = 0;
        for k in 0..20 {
            let x = loop {
                let v: QVec = (0..n).map(|_| exact::q(rng.gen_range(-3..=3))).collect();
                if !center.contains(&v) {
                    break v;
                }
            };
            let good = sign_sets::find_negative_ric_witness(g, &x, seed + k).and_then(|w| w.verify(g)).is_ok();
            neg_fail += usize::from(!good);
        }
        // (iii) every nonzero vector admits a positive witness; central
        // vectors outside g′ are included when they exist.
        let central_extra: Vec<QVec> = center.basis().iter().filter(|b| !g.derived().contains(b)).cloned().collect();
        let (mut pos_fail, mut worst_rel) = (0, 0.0f64);
        for k in 0..20 {
            let z: QVec = if !central_extra.is_empty() && k % 4 == 0 {
                let mut v = central_extra[k / 4 % central_extra.len()].clone();
                exact::axpy(&mut v, &exact::q(rng.gen_range(-2..=2)), &random_in(&dz, &mut rng));
                v
            } else {
                loop {
                    let v: QVec = (0..n).map(|_| exact::q(rng.gen_range(-3..=3))).collect();
                    if !exact::is_zero_vec(&v) {
                        break v;
                    }
                }
            };
            match sign_sets::find_positive_ric_witness(g, &z, seed + k as u64) {
                Ok(w) if w.verify(g).is_ok() => {
                    if let WitnessMetric::Deformed { spec, t } = &w.metric {
                        let rel = scaled_limit_error(g, spec, *t, &z);
                        worst_rel = worst_rel.max(rel);
                        if rel > LIMIT_REL {
                            pos_fail += 1;
                        }
                    }
                }
                _ => pos_fail += 1,
            }
        }
        let pass = min_pos > POS_TOL && neg_fail == 0 && pos_fail == 0;
        ok &= pass;
        rows.push(json!({
            "algebra": e.id(),
            "min_central_ricci": min_pos,
            "negative_failures": neg_fail,
            "positive_failures": pos_fail,
            "worst_limit_relative_error": worst_rel,
            "passed": pass,
        }));
    }
    (ok, json!({ "positive_tol": POS_TOL, "limit_relative_tol": LIMIT_REL, "algebras": rows }))
}

/// |e^{−(2λ₁−λ_{n−1}−λ_n)t}Ric_t(Z)/|Z|² − ½⟨Z,[X,Y]⟩²| relative to the limit,
/// with Z the first and X, Y the last two deformation-frame vectors.
fn scaled_limit_error(g: &NilpotentAlgebra, spec: &DeformationSpec, t: f64, z: &[Q]) -> f64 {
    let n = g.dim();
    let zf = exact::to_f64_vec(z);
    let (x, y) = (spec.frame_vector(n - 2), spec.frame_vector(n - 1));
    let e1 = spec.frame_vector(0);
    let base = spec.base();
    let c = base.inner(&e1, &g.br_f(&x, &y));
    let zn2 = base.inner(&zf, &zf);
    let lam = spec.lambdas();
    let v = deformation::deformed_ricci_form(g, spec, t, &zf, &zf).expect("valid witness") / zn2;
    let scaled = v * (-(2.0 * lam[0] - lam[n - 2] - lam[n - 1]) * t).exp();
    let limit = 0.5 * c * c;
    (scaled - limit).abs() / limit
}

/// Nonzero {−1,0,1} vectors with first nonzero entry positive.
fn unit_grid(n: usize) -> Vec<QVec> {
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
        if v.iter().find(|x| **x != 0).is_some_and(|f| *f > 0) {
            out.push(exact::from_ints(&v));
        }
    }
    out
}

fn plane_signs(seed: u64) -> (bool, Value) {
    const K_TOL: f64 = -1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
    let mut ok = true;
    let mut rows = Vec::new();
    for e in catalog::list_catalog().into_iter().filter(|e| e.algebra.dim() <= 6) {
        let g = &e.algebra;
        let n = g.dim();
        let metrics: Vec<Metric> = (0..50).map(|_| Metric::random(n, &mut rng)).collect();
        let curvs: Vec<Curvature> = metrics.iter().map(|m| Curvature::new(g, m).expect("dims")).collect();
        let vs = unit_grid(n);
        let mut seen = BTreeSet::new();
        let (mut planes, mut geq, mut mismatches, mut min_k, mut witness_fail) = (0, 0, 0, f64::INFINITY, 0);
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let Ok(p) = TwoPlane::new(&vs[i], &vs[j]) else { continue };
                if !seen.insert(format!("{:?}{:?}", p.x(), p.y())) {
                    continue;
                }
                planes += 1;
                let labels = sign_sets::classify_plane(g, &p).expect("valid plane");
                if labels.g_geq != (labels.g1 || labels.g2) {
                    mismatches += 1;
                }
                if labels.g_geq {
                    geq += 1;
                    let (x, y) = (p.x_f(), p.y_f());
                    for c in &curvs {
                        min_k = min_k.min(c.sectional_k(&x, &y).expect("dims"));
                    }
                } else {
                    let good = sign_sets::find_negative_k_witness(g, &p, seed)
                        .and_then(|w| w.verify(g))
                        .is_ok_and(|v| v < -sign_sets::STRICT);
                    witness_fail += usize::from(!good);
                }
            }
        }
        let pass = mismatches == 0 && witness_fail == 0 && (geq == 0 || min_k >= K_TOL);
        ok &= pass;
        rows.push(json!({
            "algebra": e.id(),
            "planes": planes,
            "g_geq": geq,
            "label_mismatches": mismatches,
            "min_k_on_g_geq": if geq == 0 { Value::Null } else { json!(min_k) },
            "witness_failures": witness_fail,
            "passed": pass,
        }));
    }
    (ok, json!({ "k_tol": K_TOL, "negative_tol": -sign_sets::STRICT, "algebras": rows }))
}

fn small_l_oracle(seed: u64) -> (bool, Value) {
    let mut cases: Vec<(String, NilpotentAlgebra, Lemma6Class)> = Vec::new();
    for l in 1..=2 {
        for pad in 0..=2 {
            cases.push((
                format!("heisenberg_x_abelian(l={l},pad={pad})"),
                catalog::heisenberg_x_abelian(l, pad),
                Lemma6Class::HeisenbergXAbelian,
            ));
        }
    }
    cases.push(("filiform4".into(), catalog::named("filiform4"), Lemma6Class::Filiform4));
    for n in [5, 6] {
        cases.push((format!("filiform_standard(n={n})"), catalog::filiform_standard(n), Lemma6Class::NotApplicable));
    }
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, g, want) in cases {
        let v = classification::lemma6_classify(&g, 200, seed);
        let oracle = (g.dim() <= 5).then(|| classification::grid_max_dim_l(&g, 2));
        let (class, sampled) = match &v {
            Ok(v) => (Some(v.class), Some(v.max_dim_l)),
            Err(_) => (None, None),
        };
        let oracle_agrees = match oracle {
            None => true,
            Some(m) => sampled == Some(m) && ((m > 4) == (want == Lemma6Class::NotApplicable)),
        };
        let pass = class == Some(want) && oracle_agrees;
        ok &= pass;
        rows.push(json!({
            "algebra": name,
            "class": class,
            "expected": want,
            "sampled_max_dim_l": sampled,
            "grid_max_dim_l": oracle,
            "passed": pass,
        }));
    }
    (ok, json!({ "grid": "{-2,...,2}^n", "cases": rows }))
}

/// Exact rank of float candidates after rationalization with denominators ≤ 10⁴;
/// vectors with an entry that does not rationalize within 1e−10 (relative to
/// the largest entry) are counted and skipped.
fn rationalized_rank(n: usize, cands: &[Vec<f64>]) -> (usize, usize) {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for c in cands {
        let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r: Option<QVec> = c
            .iter()
            .map(|x| exact::rationalize(*x, 10_000).filter(|q| (exact::to_f64(q) - x).abs() <= 1e-10 * scale.max(1.0)))
            .collect();
        match r {
            Some(v) => rows.push(v),
            None => skipped += 1,
        }
    }
    let rank = if rows.is_empty() { 0 } else { exact::rank(&rows) };
    debug_assert!(rank <= n);
    (rank, skipped)
}

fn maxmin_sampling(seed: u64) -> (bool, Value) {
    let mut ok = true;
    let mut out = Vec::new();
    for (key, alg, samples) in
        [("heisenberg(m=2)", catalog::heisenberg(2), 50), ("filiform4", catalog::named("filiform4"), 5000)]
    {
        let cfg = maxmin::MaxMinConfig { samples, seed, resolution: 0.1, convergence_runs: 0 };
        let r = maxmin::maxmin(&alg, &cfg);
        let pass = r.max.coverage.full() && r.max.coverage.max_outside < 1e-9;
        ok &= pass;
        out.push(json!({ "algebra": key, "case": r.case, "coverage": r.max.coverage, "passed": pass }));
    }
    let alphas = [-2.0, -1.0, 1.0, 2.0, 3.0];
    for key in ["L5_lemma7a", "L6_1", "L6_2", "L6_3"] {
        let shifts = [[0.0; 3], [1.0, -1.0, 0.5], [-2.0, 0.5, 3.0]];
        let (cands, failures) = maxmin::table_candidates(key, &alphas, &shifts);
        let n = catalog::named(key).dim();
        let dirs: Vec<Vec<f64>> = cands.iter().map(|c| c.t.clone()).collect();
        let (rank, skipped) = rationalized_rank(n, &dirs);
        let pass = rank == n;
        ok &= pass;
        out.push(json!({
            "algebra": key,
            "candidates": cands.len(),
            "precondition_failures": failures,
            "irrational_skipped": skipped,
            "exact_rank": rank,
            "dim": n,
            "passed": pass,
        }));
    }
    (ok, json!({ "resolution": 0.1, "cases": out }))
}

/// Reruns the fast criteria in-process and compares serialized reports.
fn determinism(seed: u64) -> (bool, Value) {
    let ids = [CriterionId::HeisenbergSpectrum, CriterionId::Filiform4Spectrum, CriterionId::Convergence];
    let render = || serde_json::to_string(&run_all(&ids, seed)).expect("serializable");
    let (a, b) = (render(), render());
    (a == b, json!({ "rerun": ids.iter().map(|c| c.name()).collect::<Vec<_>>(), "bytes": a.len(), "identical": a == b }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_list_parsing() {
        assert_eq!(
            CriterionId::parse_list("signsets").unwrap(),
            vec![CriterionId::RicciSigns, CriterionId::PlaneSigns]
        );
        assert_eq!(CriterionId::parse_list("1,determinism").unwrap(), vec![CriterionId::HeisenbergSpectrum, CriterionId::Determinism]);
        assert!(CriterionId::parse_list("nope").is_err());
    }

    #[test]
    fn rationalized_rank_of_simple_vectors() {
        let (r, s) = rationalized_rank(3, &[vec![1.0, 0.5, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 1.0 / 3.0]]);
        assert_eq!((r, s), (2, 0));
        let (_, s) = rationalized_rank(2, &[vec![std::f64::consts::PI, 0.0]]);
        assert_eq!(s, 1);
    }
}
