//! Degree-capped univariate polynomials with big-integer coefficients, and the
//! commutative ring interface used by the Pfaffian.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Commutative ring with an explicit zero taken from an existing element
/// (truncated polynomials carry their cap).
pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn sub_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn is_zero_elem(&self) -> bool;

    fn neg_elem(&self) -> Self {
        let mut z = self.zero_like();
        z.sub_assign_ref(self);
        z
    }
}

impl Ring for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// Polynomial in `X` whose powers above `cap` are discarded after every
/// operation. Trailing zero coefficients are trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPoly {
    coeffs: Vec<BigInt>,
    cap: usize,
}

impl TruncatedPoly {
    pub fn zero(cap: usize) -> Self {
        TruncatedPoly { coeffs: Vec::new(), cap }
    }

    pub fn constant(c: BigInt, cap: usize) -> Self {
        Self::monomial(c, 0, cap)
    }

    /// `c · X^deg`, or zero if `deg > cap`.
    pub fn monomial(c: BigInt, deg: usize, cap: usize) -> Self {
        if deg > cap || c.is_zero() {
            return Self::zero(cap);
        }
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = c;
        TruncatedPoly { coeffs, cap }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>, cap: usize) -> Self {
        coeffs.truncate(cap + 1);
        let mut p = TruncatedPoly { coeffs, cap };
        p.trim();
        p
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// The single term `(coefficient, degree)` if this is a monomial.
    fn as_monomial(&self) -> Option<(&BigInt, usize)> {
        let deg = self.degree()?;
        if self.coeffs[..deg].iter().all(|c| c.is_zero()) {
            Some((&self.coeffs[deg], deg))
        } else {
            None
        }
    }

    fn scaled_shift(&self, c: &BigInt, deg: usize) -> Self {
        if deg > self.cap || self.coeffs.is_empty() {
            return Self::zero(self.cap);
        }
        let keep = self.coeffs.len().min(self.cap + 1 - deg);
        let mut coeffs = vec![BigInt::zero(); deg + keep];
        for (k, a) in self.coeffs[..keep].iter().enumerate() {
            if !a.is_zero() {
                coeffs[deg + k] = a * c;
            }
        }
        let mut p = TruncatedPoly { coeffs, cap: self.cap };
        p.trim();
        p
    }
}

impl Ring for TruncatedPoly {
    fn zero_like(&self) -> Self {
        Self::zero(self.cap)
    }

    fn one_like(&self) -> Self {
        Self::constant(BigInt::one(), self.cap)
    }

    fn add_assign_ref(&mut self, other: &Self) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigInt::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        self.trim();
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigInt::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        self.trim();
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let cap = self.cap.min(other.cap);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(cap);
        }
        if let Some((c, d)) = other.as_monomial() {
            let mut p = self.scaled_shift(c, d);
            p.cap = cap;
            p.coeffs.truncate(cap + 1);
            p.trim();
            return p;
        }
        if let Some((c, d)) = self.as_monomial() {
            let mut p = other.scaled_shift(c, d);
            p.cap = cap;
            p.coeffs.truncate(cap + 1);
            p.trim();
            return p;
        }
        let len = (self.coeffs.len() + other.coeffs.len() - 1).min(cap + 1);
        let mut coeffs = vec![BigInt::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        let mut p = TruncatedPoly { coeffs, cap };
        p.trim();
        p
    }

    fn is_zero_elem(&self) -> bool {
        self.coeffs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64], cap: usize) -> TruncatedPoly {
        TruncatedPoly::from_coeffs(c.iter().map(|&v| BigInt::from(v)).collect(), cap)
    }

    #[test]
    fn truncates_products() {
        let a = poly(&[1, 2, 3], 3);
        let b = poly(&[0, 1, 1], 3);
        assert_eq!(a.mul_ref(&b), poly(&[0, 1, 3, 5], 3));
        let full = poly(&[1, 2, 3], 10).mul_ref(&poly(&[0, 1, 1], 10));
        assert_eq!(full, poly(&[0, 1, 3, 5, 3], 10));
    }

    #[test]
    fn monomial_fast_path_agrees() {
        let a = poly(&[4, -1, 0, 7], 5);
        let m = TruncatedPoly::monomial(BigInt::from(8), 2, 5);
        assert_eq!(a.mul_ref(&m), poly(&[0, 0, 32, -8, 0, 56], 5));
        assert_eq!(m.mul_ref(&a), a.mul_ref(&m));
        assert_eq!(TruncatedPoly::monomial(BigInt::from(1), 6, 5), TruncatedPoly::zero(5));
    }

    #[test]
    fn add_and_sub_trim() {
        let mut a = poly(&[1, 2, 3], 4);
        a.sub_assign_ref(&poly(&[0, 0, 3], 4));
        assert_eq!(a.degree(), Some(1));
        a.add_assign_ref(&poly(&[-1, -2], 4));
        assert!(a.is_zero_elem());
    }
}
