//! Orthonormal frames realizing the five-vector construction on the
//! catalog algebras L5_lemma7a and L6_1..3, parametrized by α and by a
//! shift of c that acts as an automorphism.

use nalgebra::{DMatrix, DVector};

use crate::algebra::NilpotentAlgebra;
use crate::catalog;
use crate::curvature::Metric;

/// (algebra, metric declaring the frame orthonormal, [e1, e2, u1, u2, u3]).
pub type FiveFrame = (NilpotentAlgebra, Metric, [Vec<f64>; 5]);

fn lin(n: usize, s: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (k, v) in s {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += k * x;
        }
    }
    out
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn metric_of(cols: &[&Vec<f64>]) -> Metric {
    let m = DMatrix::from_columns(&cols.iter().map(|v| DVector::from_column_slice(v)).collect::<Vec<_>>());
    Metric::from_orthonormal_frame(&m).expect("table frames are bases")
}

/// L5_lemma7a (basis c, X, Y, A, Z) with c replaced by c + α₁⁻¹(β₁A + β₂Z).
/// Requires α₁ ≠ 0.
pub fn l5_frame(alpha: [f64; 3], beta: [f64; 2]) -> FiveFrame {
    let g = catalog::named("L5_lemma7a");
    let [a1, a2, a3] = alpha;
    let c = vec![1.0, 0.0, 0.0, beta[0] / a1, beta[1] / a1];
    let (x, y) = (unit(5, 1), unit(5, 2));
    let u1 = lin(5, &[(6.0 * a1, &c), (a2, &x)]);
    let u2 = c.clone();
    let u3 = lin(5, &[(10.0 * a1, &c), (a3, &y)]);
    let e1 = g.br_f(&u1, &u2);
    let e2: Vec<f64> = g.br_f(&u1, &u3).iter().map(|v| v * 2f64.sqrt()).collect();
    let m = metric_of(&[&e1, &e2, &u1, &u2, &u3]);
    (g, m, [e1, e2, u1, u2, u3])
}

/// L6_1, L6_2 or L6_3 (basis c, X, Y, A1, A2, Z) with c shifted by an
/// element of span(A1, A2, Z). The sixth frame vector is u₂₃.
pub fn l6_frame(key: &str, alpha: [f64; 3], shift: [f64; 3]) -> FiveFrame {
    let g = catalog::named(key);
    let [a1, a2, a3] = alpha;
    let c = vec![1.0, 0.0, 0.0, shift[0], shift[1], shift[2]];
    let (x, y, a1v) = (unit(6, 1), unit(6, 2), unit(6, 3));
    let (u1, u2, u3) = if key == "L6_2" {
        (lin(6, &[(a1, &c), (-a2, &x)]), c.clone(), lin(6, &[(-6.0 * a1, &c), (-11.0 * a2, &x), (-a3, &y)]))
    } else {
        (lin(6, &[(-2.0 * a1, &c), (a2, &x), (a3, &y)]), x.clone(), lin(6, &[(1.0, &c), (1.0, &a1v)]))
    };
    let e1 = g.br_f(&u1, &u2);
    let e2: Vec<f64> = g.br_f(&u1, &u3).iter().map(|v| 2.0 * v).collect();
    let u23 = g.br_f(&u2, &u3);
    let m = metric_of(&[&e1, &e2, &u23, &u1, &u2, &u3]);
    (g, m, [e1, e2, u1, u2, u3])
}

/// Filiform4 (basis W, X, Y, Z) with (Y, Y+Z, X+2Y+4Z, W) declared
/// orthonormal: returns (algebra, metric, [e, u1, u2]) with ⟨e,[u1,u2]⟩ = 1.
pub fn filiform4_frame() -> (NilpotentAlgebra, Metric, [Vec<f64>; 3]) {
    let g = catalog::named("filiform4");
    let cols = [vec![0., 0., 1., 0.], vec![0., 0., 1., 1.], vec![0., 1., 2., 4.], vec![1., 0., 0., 0.]];
    let m = metric_of(&cols.each_ref());
    let [e, _, u1, u2] = cols;
    (g, m, [e, u1, u2])
}
