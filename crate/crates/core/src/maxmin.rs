//! Sampling the closures of the Ricci-maximal and Ricci-minimal sets.
//!
//! Candidates come from the limit constructions in `deformation`, chosen
//! per structural case. Density is not finitely checkable, so the report
//! gives a grid-coverage statistic over the expected subspace instead.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::classification::{self, MaxCase};
use crate::curvature::{self, Metric};
use crate::deformation::{self, DeformationSpec, Extremal, ExtremalCandidate};
use crate::exact::{self, Subspace, Q, QVec};
use crate::tables;

#[derive(Debug, Clone, Serialize)]
pub struct Coverage {
    pub subspace_dim: usize,
    pub resolution: f64,
    /// Probe directions: a cube-surface grid for dim ≤ 3, seeded random otherwise.
    pub probes: usize,
    pub grid: bool,
    pub covered: usize,
    pub fraction: f64,
    pub candidates: usize,
    /// Largest projective distance from a candidate to the subspace.
    pub max_outside: f64,
}

impl Coverage {
    pub fn full(&self) -> bool {
        self.covered == self.probes
    }
}

fn orthonormal_basis(s: &Subspace) -> DMatrix<f64> {
    let n = s.ambient();
    let cols: Vec<DVector<f64>> = s.basis().iter().map(|v| DVector::from_vec(exact::to_f64_vec(v))).collect();
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols).qr().q()
}

/// Unit vectors of the cube surface max|w_i| = 1 with step `h`, first
/// nonzero coordinate positive.
fn cube_grid(k: usize, h: f64) -> Vec<Vec<f64>> {
    let steps = (2.0 / h).round() as usize;
    let vals: Vec<f64> = (0..=steps).map(|i| -1.0 + i as f64 * 2.0 / steps as f64).collect();
    let mut out = Vec::new();
    let total = vals.len().pow(k as u32);
    for code in 0..total {
        let mut c = code;
        let w: Vec<f64> = (0..k)
            .map(|_| {
                let v = vals[c % vals.len()];
                c /= vals.len();
                v
            })
            .collect();
        let on_surface = w.iter().any(|x| (x.abs() - 1.0).abs() < 1e-12);
        let first = w.iter().find(|x| x.abs() > 1e-12);
        if on_surface && first.is_some_and(|f| *f > 0.0) {
            out.push(w);
        }
    }
    out
}

/// Fraction of probe directions of ℙS within `resolution` of some candidate.
pub fn coverage(s: &Subspace, dirs: &[Vec<f64>], resolution: f64, seed: u64) -> Coverage {
    let k = s.dim();
    let b = orthonormal_basis(s);
    let mut max_outside = 0.0f64;
    let coords: Vec<Vec<f64>> = dirs
        .iter()
        .map(|d| {
            let v = DVector::from_column_slice(d);
            let w = b.transpose() * &v;
            let resid = (&v - &b * &w).norm() / v.norm().max(1e-300);
            max_outside = max_outside.max(resid);
            w.iter().copied().collect()
        })
        .collect();
    let (probes, grid) = if k == 0 {
        (Vec::new(), true)
    } else if k <= 3 {
        (cube_grid(k, resolution), true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0);
        ((0..2000).map(|_| (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect(), false)
    };
    let covered = probes
        .iter()
        .filter(|p| coords.iter().any(|c| deformation::projective_distance(p, c) <= resolution))
        .count();
    Coverage {
        subspace_dim: k,
        resolution,
        probes: probes.len(),
        grid,
        covered,
        fraction: if probes.is_empty() { 1.0 } else { covered as f64 / probes.len() as f64 },
        candidates: dirs.len(),
        max_outside,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub construction: String,
    pub final_distance: f64,
    pub converged_from: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    pub constructions: Vec<String>,
    pub generated: usize,
    /// Attempts whose preconditions failed or whose candidate vanished.
    pub failures: usize,
    pub coverage: Coverage,
    pub convergence: Vec<ConvergenceSummary>,
    /// Largest ‖ric T − μT‖/‖T‖ for candidates checked directly as eigenvectors.
    pub eigen_residual: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxMinReport {
    pub case: MaxCase,
    pub expected_max: Vec<Vec<String>>,
    pub ricci_identically_zero: bool,
    pub max: SideReport,
    pub min: SideReport,
}

#[derive(Debug, Clone, Copy)]
pub struct MaxMinConfig {
    pub samples: usize,
    pub seed: u64,
    pub resolution: f64,
    /// Candidates per side whose convergence trace is computed.
    pub convergence_runs: usize,
}

impl Default for MaxMinConfig {
    fn default() -> Self {
        MaxMinConfig { samples: 200, seed: 0, resolution: 0.1, convergence_runs: 3 }
    }
}

/// Directions with their construction label; min-side candidates may come
/// with a metric for a direct eigenvector check instead of a deformation.
struct Generated {
    cands: Vec<ExtremalCandidate>,
    direct: Vec<(Metric, Vec<f64>)>,
    failures: usize,
    notes: Vec<String>,
}

impl Generated {
    fn new() -> Self {
        Generated { cands: Vec::new(), direct: Vec::new(), failures: 0, notes: Vec::new() }
    }
}

/// k/1000 with k uniform in [−1000, 1000]: near-uniform directions in a cube.
fn uniform_rational(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.gen_range(-1000i64..=1000).into(), 1000.into())
}

fn normalize_in(g: &Metric, v: &[f64]) -> Vec<f64> {
    let n = g.norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Declared basis `head` (then units completing it) made orthonormal.
fn declared_metric(n: usize, head: &[QVec]) -> Option<(Metric, Vec<QVec>)> {
    let mut cols: Vec<QVec> = Vec::new();
    let mut span = Subspace::zero(n);
    for v in head.iter().cloned().chain((0..n).map(|i| exact::unit(n, i))) {
        if !span.contains(&v) {
            span = span.with(&v);
            cols.push(v);
        }
    }
    if cols.len() != n || head.iter().zip(&cols).any(|(a, b)| a != b) {
        return None;
    }
    let f = DMatrix::from_fn(n, n, |r, c| exact::to_f64(&cols[c][r]));
    Some((Metric::from_orthonormal_frame(&f).ok()?, cols))
}

fn two_step_max(alg: &NilpotentAlgebra, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let n = alg.dim();
    let d = alg.derived();
    let mut out = Generated::new();
    for _ in 0..cfg.samples {
        let g = Metric::random(n, rng);
        let mut e = vec![0.0; n];
        for b in d.basis() {
            let c: f64 = rng.gen_range(-1.0..=1.0);
            for (ei, bi) in e.iter_mut().zip(exact::to_f64_vec(b)) {
                *ei += c * bi;
            }
        }
        let e = normalize_in(&g, &e);
        match deformation::candidate_two_step(alg, &g, &e) {
            Ok(c) if !c.zero => out.cands.push(c),
            _ => out.failures += 1,
        }
    }
    out
}

/// g = ℝc ⊕ a: declared orthonormal c, u₁, [c,u₁], v = [c,[c,u₁]], with
/// e = cos θ·v + sin θ·[c,u₁], |θ| < 1.4. At θ = 0 the candidate is a multiple of u₁.
fn codim1_max(alg: &NilpotentAlgebra, a: &Subspace, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let n = alg.dim();
    let mut out = Generated::new();
    let ci = a.complement_units()[0];
    let c = exact::unit(n, ci);
    for s in 0..cfg.samples {
        let mut u1 = exact::zero_vec(n);
        for b in a.basis() {
            exact::axpy(&mut u1, &uniform_rational(rng), b);
        }
        let cu1 = alg.br(&c, &u1);
        let v = alg.br(&c, &cu1);
        if exact::is_zero_vec(&v) {
            out.failures += 1;
            continue;
        }
        let Some((g, _)) = declared_metric(n, &[c.clone(), u1.clone(), cu1.clone(), v.clone()]) else {
            out.failures += 1;
            continue;
        };
        let theta: f64 = if s % 4 == 0 { 0.0 } else { rng.gen_range(-1.4..1.4) };
        let (vf, cf) = (exact::to_f64_vec(&v), exact::to_f64_vec(&cu1));
        let e: Vec<f64> = vf.iter().zip(&cf).map(|(x, y)| theta.cos() * x + theta.sin() * y).collect();
        match deformation::candidate_e1u2(alg, &g, &e, &exact::to_f64_vec(&u1), &exact::to_f64_vec(&c)) {
            Ok(cand) if !cand.zero => out.cands.push(cand),
            _ => out.failures += 1,
        }
    }
    out
}

/// Top eigenvector of Φ⁰ for random metrics with λ = (1, 0, …, 0, −1, …, −1).
fn block_max(alg: &NilpotentAlgebra, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let n = alg.dim();
    let mut out = Generated::new();
    for s in 0..cfg.samples {
        let q = if n >= 5 && s % 2 == 1 { 3 } else { 2 };
        let mut lam = vec![0.0; n];
        lam[0] = 1.0;
        for l in lam.iter_mut().skip(n - q) {
            *l = -1.0;
        }
        let Ok(spec) = DeformationSpec::with_cholesky_frame(Metric::random(n, rng), lam) else {
            out.failures += 1;
            continue;
        };
        let res = deformation::scaled_ricci_limit(alg, &spec).and_then(|l| deformation::extremal_t(&l));
        match res {
            Ok(mut c) if !c.zero => {
                c.spec = Some(spec);
                out.cands.push(c);
            }
            _ => out.failures += 1,
        }
    }
    out
}

/// T₁/T₂ candidates from the frame tables on L5_lemma7a and L6_1..3, over an
/// α grid (entries from `alpha_values`, α₁ ≠ 0) and the listed shifts.
pub fn table_candidates(key: &str, alpha_values: &[f64], shifts: &[[f64; 3]]) -> (Vec<ExtremalCandidate>, usize) {
    let mut out = Vec::new();
    let mut failures = 0;
    for &a1 in alpha_values.iter().filter(|a| **a != 0.0) {
        for &a2 in alpha_values {
            for &a3 in alpha_values {
                for sh in shifts {
                    let (g, m, [e1, e2, u1, u2, u3]) = if key == "L5_lemma7a" {
                        tables::l5_frame([a1, a2, a3], [sh[0], sh[1]])
                    } else {
                        tables::l6_frame(key, [a1, a2, a3], *sh)
                    };
                    match deformation::candidate_t1_t2(&g, &m, &e1, &e2, &u1, &u2, &u3) {
                        Ok((t1, t2)) => {
                            for c in [t1, t2] {
                                if !c.zero {
                                    out.push(c);
                                }
                            }
                        }
                        Err(_) => failures += 1,
                    }
                }
            }
        }
    }
    (out, failures)
}

/// Symplectic basis (x₁, y₁, …) of a complement of the center for an
/// algebra with one-dimensional central derived algebra ℝz.
fn symplectic_pairs(alg: &NilpotentAlgebra, z: &[Q]) -> Vec<(QVec, QVec)> {
    let n = alg.dim();
    let zi = (0..n).find(|&i| !z[i].is_zero()).expect("z nonzero");
    let omega = |x: &[Q], y: &[Q]| alg.br(x, y)[zi].clone() / z[zi].clone();
    let center = alg.center();
    let mut rest: Vec<QVec> = center.complement_units().into_iter().map(|i| exact::unit(n, i)).collect();
    let mut pairs = Vec::new();
    while let Some(x) = rest.pop() {
        let Some(pos) = rest.iter().position(|y| !omega(&x, y).is_zero()) else { continue };
        let y0 = rest.remove(pos);
        let y = exact::scale(&(Q::from_integer(1.into()) / omega(&x, &y0)), &y0);
        for w in rest.iter_mut() {
            let (wy, wx) = (omega(w, &y), omega(w, &x));
            let mut nw = w.clone();
            exact::axpy(&mut nw, &-wy, &x);
            exact::axpy(&mut nw, &wx, &y);
            *w = nw;
        }
        pairs.push((x, y));
    }
    pairs
}

/// Frame E_i = X_i + Z_i + a_i X_top with random Z_i in the abelian factor;
/// every combination of the E_i is a minimal eigenvector.
fn heisenberg_min(alg: &NilpotentAlgebra, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let n = alg.dim();
    let mut out = Generated::new();
    let z = alg.derived().basis()[0].clone();
    let pairs = symplectic_pairs(alg, &z);
    let center = alg.center();
    let abelian: Vec<QVec> = {
        let mut s = Subspace::span(n, [z.clone()]);
        center.basis().iter().filter(|b| {
            let keep = !s.contains(b);
            if keep {
                s = s.with(b);
            }
            keep
        }).cloned().collect()
    };
    for _ in 0..cfg.samples {
        let mut head: Vec<QVec> = Vec::new();
        for (x, y) in &pairs {
            for base in [x, y] {
                let mut v = base.clone();
                for a in &abelian {
                    exact::axpy(&mut v, &classification::random_rational(rng), a);
                }
                exact::axpy(&mut v, &classification::random_rational(rng), &z);
                head.push(v);
            }
        }
        let k = head.len();
        head.push(z.clone());
        head.extend(abelian.iter().cloned());
        let Some((g, cols)) = declared_metric(n, &head) else {
            out.failures += 1;
            continue;
        };
        let mut t = vec![0.0; n];
        for col in cols.iter().take(k) {
            let c: f64 = rng.gen_range(-1.0..=1.0);
            for (ti, ci) in t.iter_mut().zip(exact::to_f64_vec(col)) {
                *ti += c * ci;
            }
        }
        out.direct.push((g, t));
    }
    out
}

/// Orthonormal E₁ = W + aX + bY + cZ, X, Y, Z with [W,X] = Y, [W,Y] = Z;
/// E₁ is the minimal eigenvector.
fn filiform4_min(alg: &NilpotentAlgebra, a: &Subspace, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let n = alg.dim();
    let mut out = Generated::new();
    let w = exact::unit(n, a.complement_units()[0]);
    let x = a.basis().iter().find(|b| !exact::is_zero_vec(&alg.br(&w, &alg.br(&w, b)))).cloned();
    let Some(x) = x else {
        out.notes.push("no X with [W,[W,X]] ≠ 0".into());
        return out;
    };
    let y = alg.br(&w, &x);
    let zz = alg.br(&w, &y);
    for _ in 0..cfg.samples {
        let mut e1 = w.clone();
        for v in [&x, &y, &zz] {
            exact::axpy(&mut e1, &classification::random_rational(rng), v);
        }
        match declared_metric(n, &[e1.clone(), x.clone(), y.clone(), zz.clone()]) {
            Some((g, _)) => out.direct.push((g, exact::to_f64_vec(&e1))),
            None => out.failures += 1,
        }
    }
    out
}

/// Minimal candidates u₁ from random triples with dim L ≥ 5: a two-plane σ in
/// L completing L₃ = span(X₁,X₂,X₃), ψ(X∧Y) the σ-component of [X,Y] along
/// g = L₃ ⊕ σ ⊕ W, u₂, u₃ spanning the plane of ker ψ, e_j = ψ(u₁∧u_{j+1}).
fn generic_min(alg: &NilpotentAlgebra, cfg: &MaxMinConfig, rng: &mut ChaCha8Rng) -> Generated {
    let mut out = Generated::new();
    for _ in 0..cfg.samples {
        match generic_min_one(alg, rng) {
            Some(c) => out.cands.push(c),
            None => out.failures += 1,
        }
    }
    out
}

fn generic_min_one(alg: &NilpotentAlgebra, rng: &mut ChaCha8Rng) -> Option<ExtremalCandidate> {
    let n = alg.dim();
    let xs: Vec<QVec> = (0..3).map(|_| classification::random_rational_vec(n, rng)).collect();
    let l = alg.span_with_brackets(&xs[0], &xs[1], &xs[2]);
    let l3 = Subspace::span(n, xs.iter().cloned());
    if l.dim() < 5 || l3.dim() < 3 {
        return None;
    }
    let sigma: Vec<QVec> = {
        let mut acc = l3.clone();
        let mut out = Vec::new();
        for b in l.basis() {
            if out.len() < 2 && !acc.contains(b) {
                acc = acc.with(b);
                out.push(b.clone());
            }
        }
        out
    };
    // Coordinates along (X₁, X₂, X₃, σ₁, σ₂, W) with W spanned by units.
    let mut basis: Vec<QVec> = xs.clone();
    basis.extend(sigma.iter().cloned());
    let mut acc = Subspace::span(n, basis.iter().cloned());
    for i in 0..n {
        let u = exact::unit(n, i);
        if !acc.contains(&u) {
            acc = acc.with(&u);
            basis.push(u);
        }
    }
    let psi = |a: &[Q], b: &[Q]| -> [Q; 2] {
        let v = alg.br(a, b);
        let c = exact::solve(&transpose(&basis), &v, n).expect("basis spans g");
        [c[3].clone(), c[4].clone()]
    };
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let rows: Vec<QVec> = (0..2)
        .map(|r| pairs.iter().map(|&(i, j)| psi(&xs[i], &xs[j])[r].clone()).collect())
        .collect();
    let ker = exact::nullspace(&rows, 3);
    if ker.len() != 1 {
        return None;
    }
    let k = &ker[0];
    // U∧V = k₁₂X₁∧X₂ + k₁₃X₁∧X₃ + k₂₃X₂∧X₃; its plane is {a : a₁k₂₃ − a₂k₁₃ + a₃k₁₂ = 0}.
    let normal = vec![k[2].clone(), -k[1].clone(), k[0].clone()];
    let plane = exact::nullspace(std::slice::from_ref(&normal), 3);
    let comb = |a: &[Q]| {
        let mut v = exact::zero_vec(n);
        for (ai, x) in a.iter().zip(&xs) {
            exact::axpy(&mut v, ai, x);
        }
        v
    };
    let (u2, u3) = (comb(&plane[0]), comb(&plane[1]));
    let mut a1 = classification::random_rational_vec(3, rng);
    if exact::dot(&a1, &normal).is_zero() {
        a1[0] += Q::from_integer(1.into());
        if exact::dot(&a1, &normal).is_zero() {
            return None;
        }
    }
    let u1 = comb(&a1);
    let e = |u: &QVec| {
        let [p, q] = psi(&u1, u);
        let mut v = exact::scale(&p, &sigma[0]);
        exact::axpy(&mut v, &q, &sigma[1]);
        v
    };
    let (e1, e2) = (e(&u2), e(&u3));
    let mut head = vec![e1, e2, u1, u2, u3];
    head.extend(basis.iter().skip(5).cloned());
    let f = DMatrix::from_fn(n, n, |r, c| exact::to_f64(&head[c][r]));
    let g = Metric::from_orthonormal_frame(&f).ok()?;
    let v: Vec<Vec<f64>> = head.iter().take(5).map(|x| exact::to_f64_vec(x)).collect();
    deformation::candidate_min_u1(alg, &g, &v[0], &v[1], &v[2], &v[3], &v[4]).ok()
}

fn transpose(cols: &[QVec]) -> Vec<QVec> {
    let n = cols[0].len();
    (0..n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

fn side_report(
    alg: &NilpotentAlgebra,
    gen: Generated,
    constructions: Vec<String>,
    target: &Subspace,
    which: Extremal,
    cfg: &MaxMinConfig,
) -> SideReport {
    let mut dirs: Vec<Vec<f64>> = gen.cands.iter().map(|c| c.t.clone()).collect();
    dirs.extend(gen.direct.iter().map(|(_, t)| t.clone()));
    let mut convergence = Vec::new();
    for c in gen.cands.iter().filter(|c| c.spec.is_some() && c.simple).take(cfg.convergence_runs) {
        let spec = c.spec.as_ref().expect("filtered");
        let grid = deformation::default_t_grid(spec.lambdas());
        if let Ok(tr) = deformation::convergence_check(alg, spec, c, &grid) {
            convergence.push(ConvergenceSummary {
                construction: c.construction.clone(),
                final_distance: tr.final_distance(),
                converged_from: tr.converged_from,
                tol: tr.tol,
            });
        }
    }
    let eigen_residual = (!gen.direct.is_empty()).then(|| {
        gen.direct
            .iter()
            .map(|(g, t)| {
                let rep = curvature::ricci_operator(alg, g).expect("dimensions match");
                let mu = match which {
                    Extremal::Max => rep.max_eigenvalue(),
                    Extremal::Min => rep.min_eigenvalue(),
                };
                let tv = DVector::from_column_slice(t);
                let r = rep.operator_matrix() * &tv - &tv * mu;
                g.norm(r.as_slice()) / g.norm(t)
            })
            .fold(0.0f64, f64::max)
    });
    SideReport {
        constructions,
        generated: dirs.len(),
        failures: gen.failures,
        coverage: coverage(target, &dirs, cfg.resolution, cfg.seed),
        convergence,
        eigen_residual,
        notes: gen.notes,
    }
}

fn fmt_basis(s: &Subspace) -> Vec<Vec<String>> {
    s.basis().iter().map(|v| v.iter().map(exact::format_rational).collect()).collect()
}

pub fn maxmin(alg: &NilpotentAlgebra, cfg: &MaxMinConfig) -> MaxMinReport {
    let expected = classification::theorem2_expected_m(alg);
    let whole = alg.whole();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if alg.is_abelian() {
        let empty = |note: &str| SideReport {
            constructions: Vec::new(),
            generated: 0,
            failures: 0,
            coverage: Coverage {
                subspace_dim: alg.dim(),
                resolution: cfg.resolution,
                probes: 0,
                grid: true,
                covered: 0,
                fraction: 1.0,
                candidates: 0,
                max_outside: 0.0,
            },
            convergence: Vec::new(),
            eigen_residual: None,
            notes: vec![note.to_string()],
        };
        let note = "Ricci vanishes identically; every direction is extremal by convention";
        return MaxMinReport {
            case: expected.case,
            expected_max: fmt_basis(&whole),
            ricci_identically_zero: true,
            max: empty(note),
            min: empty(note),
        };
    }
    let (max_gen, max_names) = match expected.case {
        MaxCase::TwoStep => (two_step_max(alg, cfg, &mut rng), vec!["two_step".to_string()]),
        MaxCase::Codim1Abelian => (codim1_max(alg, &expected.subspace, cfg, &mut rng), vec!["e1u2".to_string()]),
        _ => {
            let mut g = block_max(alg, cfg, &mut rng);
            let mut names = vec!["generic_limit".to_string()];
            if let Some(key) = alg.name().filter(|k| ["L5_lemma7a", "L6_1", "L6_2", "L6_3"].contains(k)) {
                let (c, f) = table_candidates(key, &[1.0, 2.0, 3.0], &[[0.0; 3], [1.0, -1.0, 0.5]]);
                g.cands.extend(c);
                g.failures += f;
                names.push("e2u3_table".into());
            }
            (g, names)
        }
    };
    let max = side_report(alg, max_gen, max_names, &expected.subspace, Extremal::Max, cfg);
    let lemma6 = classification::lemma6_classify(alg, 50, cfg.seed);
    let (min_gen, min_names) = match lemma6.as_ref().map(|v| v.class) {
        Ok(classification::Lemma6Class::HeisenbergXAbelian) => {
            (heisenberg_min(alg, cfg, &mut rng), vec!["heisenberg_frame".to_string()])
        }
        Ok(classification::Lemma6Class::Filiform4) => {
            let a = alg.find_codim1_abelian_ideal().expect("filiform4 has one");
            (filiform4_min(alg, &a, cfg, &mut rng), vec!["filiform4_frame".to_string()])
        }
        Ok(classification::Lemma6Class::NotApplicable) => {
            (generic_min(alg, cfg, &mut rng), vec!["eumin".to_string()])
        }
        Err(e) => {
            let mut g = Generated::new();
            g.notes.push(format!("no minimal construction: {e}"));
            (g, Vec::new())
        }
    };
    let min = side_report(alg, min_gen, min_names, &whole, Extremal::Min, cfg);
    MaxMinReport {
        case: expected.case,
        expected_max: fmt_basis(&expected.subspace),
        ricci_identically_zero: false,
        max,
        min,
    }
}
