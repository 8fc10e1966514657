//! Univariate polynomials over ℚ: gcd, interpolation and Sturm real-root counts.

use num_traits::{One, Signed, Zero};

use crate::exact::Q;

/// Coefficients from the constant term upward, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer((i as i64).into())).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Poly::new(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn neg(&self) -> Self {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Q::zero();
        Poly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &Poly) -> Self {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.0.len() - 1;
        let mut r = self.0.clone();
        let l = d.lead();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let f = r.last().expect("nonempty") / &l;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &f * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Poly) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The unique polynomial of degree < len through the given points.
    pub fn interpolate(points: &[(Q, Q)]) -> Self {
        let mut acc = Poly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            let mut basis = Poly::constant(yi.clone());
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    let d = xi - xj;
                    basis = basis.mul(&Poly::new(vec![-xj / &d, Q::one() / d]));
                }
            }
            acc = acc.sub(&basis.neg());
        }
        acc
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().expect("nonempty").is_zero() {
            let k = seq.len();
            let r = seq[k - 2].rem(&seq[k - 1]).neg();
            seq.push(r);
        }
        seq.pop();
        let sign_changes = |at_pos: bool| {
            let signs: Vec<i8> = seq
                .iter()
                .map(|p| {
                    let d = p.degree().unwrap_or(0);
                    let s = if p.lead().is_positive() { 1 } else { -1 };
                    if !at_pos && d % 2 == 1 {
                        -s
                    } else {
                        s
                    }
                })
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        sign_changes(false) - sign_changes(true)
    }

    pub fn has_real_root(&self) -> bool {
        self.count_real_roots() > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qr};

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn arithmetic_and_gcd() {
        // (x−1)(x+2) and (x−1)(x−3)
        let a = p(&[-2, 1, 1]);
        let b = p(&[3, -4, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        assert_eq!(a.mul(&b).rem(&a), Poly::zero());
        assert_eq!(a.eval(&q(1)), q(0));
        assert_eq!(p(&[0, 0, 0]).degree(), None);
        assert_eq!(a.derivative(), p(&[1, 2]));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = Poly::new(vec![qr(1, 2), q(-3), q(0), q(2)]);
        let pts: Vec<(Q, Q)> = (0..4).map(|i| (q(i), f.eval(&q(i)))).collect();
        assert_eq!(Poly::interpolate(&pts), f);
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(p(&[1, 0, 1]).count_real_roots(), 0);
        assert_eq!(p(&[-1, 0, 1]).count_real_roots(), 2);
        assert_eq!(p(&[-2, 1, 1]).mul(&p(&[1, 0, 1])).count_real_roots(), 2);
        // Repeated root counted once.
        assert_eq!(p(&[1, -2, 1]).count_real_roots(), 1);
        assert_eq!(p(&[0, 0, 0, 1]).count_real_roots(), 1);
        assert_eq!(p(&[5]).count_real_roots(), 0);
    }
}
