//! Circuits of integer matrices and the explicit circuit bound for block
//! matrices with a generalized matching part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::instance::Matrix;
use crate::numeric::{nullspace, primitive_integer, rank, to_rational};
use crate::{Error, Result};

/// Largest column count accepted by [`enumerate_circuits`].
pub const CIRCUIT_MAX_COLS: usize = 14;

/// All circuits of a matrix, each primitive with its first nonzero entry
/// positive, sorted lexicographically by support bitmask then entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitSet {
    pub circuits: Vec<Vec<BigInt>>,
}

impl CircuitSet {
    /// `c_∞`: the largest entry of any circuit, 0 when there is none.
    pub fn c_inf(&self) -> BigInt {
        self.circuits.iter().flatten().map(|v| v.abs()).max().unwrap_or_default()
    }
}

fn support(v: &[BigInt]) -> u32 {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).fold(0, |acc, (i, _)| acc | 1 << i)
}

/// Enumerates circuits by support: a support `S` yields a circuit when the
/// kernel of `A` restricted to `S` is one-dimensional and spanned by a vector
/// using all of `S`.
pub fn enumerate_circuits(a: &Matrix) -> Result<CircuitSet> {
    let n = a.cols();
    if n > CIRCUIT_MAX_COLS {
        return Err(Error::Cap(format!("circuit enumeration limited to {CIRCUIT_MAX_COLS} columns, got {n}")));
    }
    let full = to_rational(&a.to_rows());
    let r = rank(&full);
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() as usize > r + 1 {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        let sub: Vec<Vec<BigRational>> =
            full.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
        let ker = if sub.is_empty() {
            identity_basis(cols.len())
        } else {
            nullspace(&sub, cols.len())
        };
        if ker.len() != 1 || ker[0].iter().any(|v| v.is_zero()) {
            continue;
        }
        let prim = primitive_integer(&ker[0]);
        let mut c = vec![BigInt::zero(); n];
        for (k, &j) in cols.iter().enumerate() {
            c[j] = prim[k].clone();
        }
        out.push(c);
    }
    out.sort_by(|x, y| support(x).cmp(&support(y)).then_with(|| x.cmp(y)));
    Ok(CircuitSet { circuits: out })
}

fn identity_basis(k: usize) -> Vec<Vec<BigRational>> {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect()
}

/// Whether no proper sub-support of `c` carries a nonzero kernel vector.
pub fn is_support_minimal(a: &Matrix, c: &[BigInt]) -> bool {
    let full = to_rational(&a.to_rows());
    let cols: Vec<usize> = (0..c.len()).filter(|&j| !c[j].is_zero()).collect();
    cols.iter().all(|&drop| {
        let keep: Vec<usize> = cols.iter().copied().filter(|&j| j != drop).collect();
        if keep.is_empty() {
            return true;
        }
        if full.is_empty() {
            return false;
        }
        let sub: Vec<Vec<BigRational>> =
            full.iter().map(|row| keep.iter().map(|&j| row[j].clone()).collect()).collect();
        nullspace(&sub, keep.len()).is_empty()
    })
}

/// `(Δ r)^{p+h} · 2^{2p+3h+3}` with `Δ` and the rank `r` clamped to at least
/// one (the bound is stated for nonzero matrices).
pub fn circuit_bound(p: usize, h: usize, delta: i64, r: usize) -> BigInt {
    let base = BigInt::from(delta.max(1)) * BigInt::from(r.max(1));
    Pow::pow(&base, (p + h) as u32) * (BigInt::one() << (2 * p + 3 * h + 3))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitBoundReport {
    pub pass: bool,
    pub c_inf: BigInt,
    pub bound: BigInt,
    /// `c_∞ / bound`.
    pub ratio: BigRational,
}

/// Enumerates the circuits of `A = [[C, W], [T, M]]` and compares `c_∞` with
/// the explicit bound for `p` backdoor columns and `h` backdoor rows.
pub fn check_circuit_bound(a: &Matrix, p: usize, h: usize, delta: i64) -> Result<CircuitBoundReport> {
    let set = enumerate_circuits(a)?;
    let r = rank(&to_rational(&a.to_rows()));
    let c_inf = set.c_inf();
    let bound = circuit_bound(p, h, delta, r);
    Ok(CircuitBoundReport {
        pass: c_inf <= bound,
        ratio: BigRational::new(c_inf.clone(), bound.clone()),
        c_inf,
        bound,
    })
}
