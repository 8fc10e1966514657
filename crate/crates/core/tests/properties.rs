//! Property tests for the structural and curvature invariants.

use nalgebra::DMatrix;
use proptest::prelude::*;

use nilcurv_core::catalog;
use nilcurv_core::curvature::{self, Curvature, Metric};
use nilcurv_core::deformation::{self, DeformationSpec};
use nilcurv_core::exact::{self, Subspace, QVec};
use nilcurv_core::sign_sets::{self, TwoPlane};
use nilcurv_core::NilpotentAlgebra;

fn algebras() -> Vec<NilpotentAlgebra> {
    catalog::list_catalog().into_iter().map(|e| e.algebra).collect()
}

fn algebra_index() -> impl Strategy<Value = usize> {
    0..algebras().len()
}

fn small_q() -> impl Strategy<Value = exact::Q> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| exact::qr(p, q))
}

fn qvec(n: usize) -> impl Strategy<Value = QVec> {
    proptest::collection::vec(small_q(), n)
}

/// Gram BᵀB + I from entries of B in [−1, 1].
fn metric(n: usize) -> impl Strategy<Value = Metric> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |b| {
        let b = DMatrix::from_vec(n, n, b);
        Metric::from_gram(b.transpose() * &b + DMatrix::identity(n, n)).unwrap()
    })
}

fn fvec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, n)
}

fn alg_with<S: Strategy>(f: impl Fn(usize) -> S + Clone + 'static) -> impl Strategy<Value = (NilpotentAlgebra, S::Value)>
where
    S::Value: std::fmt::Debug,
{
    algebra_index().prop_flat_map(move |i| {
        let g = algebras().swap_remove(i);
        let n = g.dim();
        (Just(g), f(n))
    })
}

/// Ric(X,X) = −½Σ|[X,eᵢ]|² + ¼Σ⟨[eᵢ,eⱼ],X⟩² over the g-orthonormal frame
/// obtained by rotating the metric's own frame with `q`.
fn ricci_oracle(g: &NilpotentAlgebra, m: &Metric, q: &DMatrix<f64>, x: &[f64]) -> f64 {
    let f = m.frame() * q;
    let e: Vec<Vec<f64>> = f.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut r = 0.0;
    for ei in &e {
        let b = g.br_f(x, ei);
        r -= 0.5 * m.inner(&b, &b);
        for ej in &e {
            r += 0.25 * m.inner(&g.br_f(ei, ej), x).powi(2);
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi((g, (x, y, z)) in alg_with(|n| (qvec(n), qvec(n), qvec(n)))) {
        let xy = g.br(&x, &y);
        let yx = g.br(&y, &x);
        prop_assert!(exact::is_zero_vec(&exact::add(&xy, &yx)));
        let j = exact::add(&exact::add(&g.br(&x, &g.br(&y, &z)), &g.br(&y, &g.br(&z, &x))), &g.br(&z, &g.br(&x, &y)));
        prop_assert!(exact::is_zero_vec(&j));
    }

    #[test]
    fn bracket_is_bilinear((g, (x, y, z, a)) in alg_with(|n| (qvec(n), qvec(n), qvec(n), small_q()))) {
        let lhs = g.br(&exact::add(&exact::scale(&a, &x), &z), &y);
        let rhs = exact::add(&exact::scale(&a, &g.br(&x, &y)), &g.br(&z, &y));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn algebra_json_round_trips(i in algebra_index()) {
        let g = algebras().swap_remove(i);
        let back = NilpotentAlgebra::from_json_str(&g.to_json()).unwrap();
        prop_assert_eq!(back.entries(), g.entries());
    }

    #[test]
    fn rank_nullity(rows in proptest::collection::vec(qvec(5), 1..6)) {
        let r = exact::rank(&rows);
        prop_assert_eq!(r + exact::nullspace(&rows, 5).len(), 5);
        prop_assert_eq!(Subspace::span(5, rows.clone()).dim(), r);
    }

    #[test]
    fn rational_format_round_trips(x in small_q()) {
        prop_assert_eq!(exact::parse_rational(&exact::format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn metric_frame_is_orthonormal(m in (2usize..7).prop_flat_map(metric)) {
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((m.inner(&m.frame_vector(i), &m.frame_vector(j)) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ricci_form_is_frame_independent((g, (m, x, r)) in alg_with(|n| (metric(n), fvec(n), proptest::collection::vec(-1.0f64..1.0, n * n)))) {
        let n = g.dim();
        let q = DMatrix::from_vec(n, n, r).qr().q();
        let got = curvature::ricci_form(&g, &m, &x, &x).unwrap();
        let want = ricci_oracle(&g, &m, &q, &x);
        prop_assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{got} vs {want}");
        let want = ricci_oracle(&g, &m, &DMatrix::identity(n, n), &x);
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }

    #[test]
    fn ricci_trace_and_sign_pattern((g, m) in alg_with(metric)) {
        let c = Curvature::new(&g, &m).unwrap();
        let r = c.ricci_report();
        let n = g.dim();
        let mut sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                let b = g.br_f(&m.frame_vector(i), &m.frame_vector(j));
                sq += m.inner(&b, &b);
            }
        }
        let trace: f64 = r.eigenvalues.iter().sum();
        prop_assert!((trace + 0.25 * sq).abs() < 1e-9 * (1.0 + sq));
        prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        if !g.is_abelian() {
            prop_assert!(r.min_eigenvalue() < 0.0 && r.max_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn ricci_scales_inversely_with_metric((g, (m, s)) in alg_with(|n| (metric(n), 0.2f64..5.0))) {
        let scaled = Metric::from_gram(m.gram() * s).unwrap();
        let a = curvature::ricci_operator(&g, &m).unwrap().eigenvalues;
        let b = curvature::ricci_operator(&g, &scaled).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x / s - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn sectional_curvature_depends_on_plane_and_area((g, (m, x, y, a, b)) in alg_with(|n| (metric(n), fvec(n), fvec(n), -2.0f64..2.0, 0.5f64..2.0))) {
        let c = Curvature::new(&g, &m).unwrap();
        let area = m.inner(&x, &x) * m.inner(&y, &y) - m.inner(&x, &y).powi(2);
        prop_assume!(area > 1e-3);
        let k = c.sectional_k(&x, &y).unwrap();
        let y2: Vec<f64> = y.iter().zip(&x).map(|(yi, xi)| b * yi + a * xi).collect();
        prop_assert!((c.sectional_k(&y, &x).unwrap() - k).abs() < 1e-8 * (1.0 + k.abs()));
        prop_assert!((c.sectional_k(&x, &y2).unwrap() - b * b * k).abs() < 1e-7 * (1.0 + k.abs()));
        let kappa = c.sectional_kappa(&x, &y).unwrap();
        prop_assert!((c.sectional_kappa(&x, &y2).unwrap() - kappa).abs() < 1e-7 * (1.0 + kappa.abs()));
    }

    #[test]
    fn projective_distance_bounds(u in fvec(4), v in fvec(4), s in -3.0f64..3.0) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3) && s.abs() > 1e-3);
        let d = deformation::projective_distance(&u, &v);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - deformation::projective_distance(&v, &u)).abs() < 1e-12);
        let su: Vec<f64> = u.iter().map(|x| s * x).collect();
        prop_assert!(deformation::projective_distance(&u, &su) < 1e-7);
        prop_assert!((deformation::projective_distance(&su, &v) - d).abs() < 1e-9);
    }

    #[test]
    fn deformed_frame_is_orthonormal_for_g_t((m, t) in (3usize..6).prop_flat_map(|n| (metric(n), 0.0f64..3.0))) {
        let n = m.dim();
        let mut lam = vec![0.0; n];
        lam[0] = 1.0;
        lam[n - 2] = -1.0;
        lam[n - 1] = -1.0;
        let spec = DeformationSpec::with_cholesky_frame(m.clone(), lam.clone()).unwrap();
        let gt = deformation::deformed_metric(&spec, t).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { (lam[i] * t).exp() } else { 0.0 };
                let got = gt.inner(&spec.frame_vector(i), &spec.frame_vector(j));
                prop_assert!((got - want).abs() < 1e-9 * (1.0 + want));
            }
        }
        let g0 = deformation::deformed_metric(&spec, 0.0).unwrap();
        prop_assert!((g0.gram() - m.gram()).amax() < 1e-10);
    }

    #[test]
    fn brackets_inside_small_spans_vanish((g, (x, y)) in alg_with(|n| (qvec(n), qvec(n)))) {
        let n = g.dim();
        let xy = g.br(&x, &y);
        if Subspace::span(n, [x.clone(), y.clone()]).contains(&xy) {
            prop_assert!(exact::is_zero_vec(&xy));
        }
        let xxy = g.br(&x, &xy);
        if Subspace::span(n, [x.clone(), y.clone(), xy.clone()]).contains(&xxy) {
            prop_assert!(exact::is_zero_vec(&xxy));
        }
    }

    #[test]
    fn center_and_series_containments(i in algebra_index()) {
        let g = algebras().swap_remove(i);
        let n = g.dim();
        for z in g.center().basis() {
            for k in 0..n {
                prop_assert!(exact::is_zero_vec(&g.br(z, &exact::unit(n, k))));
            }
        }
        let series = g.lower_central_series();
        for w in series.windows(2) {
            prop_assert!(w[1].contains_subspace(&g.bracket_spaces(&g.whole(), &w[0])));
            prop_assert!(g.is_ideal(&w[0]));
        }
    }

    #[test]
    fn sectional_sums_contract_to_ricci((g, m) in alg_with(metric)) {
        let n = g.dim();
        let c = Curvature::new(&g, &m).unwrap();
        for i in 0..n {
            let ei = m.frame_vector(i);
            let sum: f64 = (0..n).filter(|&j| j != i).map(|j| c.sectional_k(&ei, &m.frame_vector(j)).unwrap()).sum();
            let ric = c.ricci_form(&ei, &ei).unwrap();
            prop_assert!((sum - ric).abs() < 1e-9 * (1.0 + ric.abs()), "{sum} vs {ric}");
        }
    }

    #[test]
    fn two_step_ricci_signs((g, (m, y0, x0)) in alg_with(|n| (metric(n), qvec(n), qvec(n)))) {
        prop_assume!(g.is_two_step());
        let d = g.derived();
        // X ∈ g′ by projecting onto the derived basis; Y is x0 made g-orthogonal to g′.
        let mut x = exact::zero_vec(g.dim());
        for (b, c) in d.basis().iter().zip(&x0) {
            exact::axpy(&mut x, c, b);
        }
        let xf = exact::to_f64_vec(&x);
        let mut yf = exact::to_f64_vec(&y0);
        let basis: Vec<Vec<f64>> = d.basis().iter().map(|b| exact::to_f64_vec(b)).collect();
        let (inside, _) = deformation::split_orthonormal(&m, &basis);
        for u in &inside {
            let c = m.inner(&yf, u);
            for (a, b) in yf.iter_mut().zip(u) {
                *a -= c * b;
            }
        }
        prop_assert!(curvature::ricci_form(&g, &m, &xf, &xf).unwrap() >= -1e-12);
        prop_assert!(curvature::ricci_form(&g, &m, &yf, &yf).unwrap() <= 1e-12);
    }

    #[test]
    fn central_planes_are_nonnegative((g, (m, zc, y)) in alg_with(|n| (metric(n), qvec(n), fvec(n)))) {
        let z = g.center();
        let mut x = exact::zero_vec(g.dim());
        for (b, c) in z.basis().iter().zip(&zc) {
            exact::axpy(&mut x, c, b);
        }
        let k = curvature::sectional_k(&g, &m, &exact::to_f64_vec(&x), &y).unwrap();
        prop_assert!(k >= -1e-12);
    }

    #[test]
    fn plane_labels_are_sound((g, (m, x, y)) in alg_with(|n| (metric(n), qvec(n), qvec(n)))) {
        prop_assume!(g.dim() <= 6);
        let Ok(p) = TwoPlane::new(&x, &y) else { return Ok(()) };
        let labels = sign_sets::classify_plane(&g, &p).unwrap();
        prop_assert_eq!(labels.g_geq, labels.g1 || labels.g2);
        let k = curvature::sectional_kappa(&g, &m, &p.x_f(), &p.y_f()).unwrap();
        if labels.g_pos {
            prop_assert!(k > 1e-12);
        }
        if labels.g_geq {
            prop_assert!(k >= -1e-12);
        }
    }

    #[test]
    fn witnesses_reproduce_bit_for_bit((g, (x, seed)) in alg_with(|n| (qvec(n), 0u64..1000))) {
        prop_assume!(!g.is_abelian() && !exact::is_zero_vec(&x));
        let a = sign_sets::find_positive_ric_witness(&g, &x, seed).unwrap();
        let b = sign_sets::find_positive_ric_witness(&g, &x, seed).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.verify(&g).unwrap().to_bits(), a.value.to_bits());
        if !g.center().contains(&x) {
            let w = sign_sets::find_negative_ric_witness(&g, &x, seed).unwrap();
            prop_assert_eq!(w.verify(&g).unwrap().to_bits(), w.value.to_bits());
        }
    }
}
