//! Randomized exact perfect matching: isolation weights, a Tutte-type skew
//! matrix over truncated polynomials, and a division-free Pfaffian.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{incidence_graph, Ext, IlpInstance};
use crate::oracle::enumerate_perfect_matchings;
use crate::poly::{Ring, TruncatedPoly};
use crate::{precondition, Error, Result};

/// Largest vertex count for the deterministic enumeration fallback.
pub const FALLBACK_MAX_VERTICES: usize = 16;

pub const DEFAULT_TRIALS: usize = 20;

/// `Z_j` uniform in `{1, …, 2n}` for each of `n` edges.
pub fn isolation_sample(n: usize, seed: u64) -> Vec<u64> {
    isolation_sample_stream(n, seed, 0)
}

/// Independent samples for trial `stream` under the same seed.
pub fn isolation_sample_stream(n: usize, seed: u64, stream: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| rng.gen_range(1..=2 * n as u64)).collect()
}

/// Pfaffian of an even skew-symmetric matrix over any commutative ring,
/// without division.
///
/// Sums signed clow sequences: vertices `2q, 2q+1` form pair `q`, a clow
/// with head `H` starts by leaving `2H+1`, moves `u → v` with weight
/// `a[u][v]` (negated when `v` is odd) and continues from the partner of
/// `v`. It may only visit pairs above `H` and closes on entering `2H`,
/// contributing a factor −1. Heads increase along a sequence and the
/// sequence covers `m/2` pairs in total. `O(m⁴)` ring operations.
pub fn pfaffian<R: Ring>(a: &[Vec<R>], one: &R) -> Result<R> {
    let m = a.len();
    if m % 2 == 1 {
        return precondition(format!("Pfaffian of an odd {m}×{m} matrix"));
    }
    if a.iter().any(|row| row.len() != m) {
        return precondition("Pfaffian needs a square matrix");
    }
    let n = m / 2;
    let zero = one.zero_like();
    // states[l][h][u]: partial sequences covering l pairs, open clow head h,
    // current exit vertex u.
    let mut states: Vec<Vec<Vec<Option<R>>>> = vec![vec![vec![None; m]; n]; n + 1];
    // done[l][k]: completed sequences covering l pairs whose last head is k − 1.
    let mut done: Vec<Vec<Option<R>>> = vec![vec![None; n + 1]; n + 1];
    done[0][0] = Some(one.clone());
    let acc = |slot: &mut Option<R>, v: R| match slot {
        Some(cur) => cur.add_assign_ref(&v),
        None => *slot = Some(v),
    };
    for l in 0..=n {
        for h in 0..n {
            for u in 0..m {
                let Some(val) = states[l][h][u].take() else { continue };
                if val.is_zero_elem() {
                    continue;
                }
                for (v, entry) in a[u].iter().enumerate() {
                    if entry.is_zero_elem() {
                        continue;
                    }
                    let q = v / 2;
                    let step = if v % 2 == 1 { val.mul_ref(entry).neg_elem() } else { val.mul_ref(entry) };
                    if v == 2 * h {
                        acc(&mut done[l][h + 1], step.neg_elem());
                    } else if q > h && l < n {
                        acc(&mut states[l + 1][h][v ^ 1], step);
                    }
                }
            }
        }
        if l == n {
            break;
        }
        for last in 0..=n {
            let Some(val) = done[l][last].clone() else { continue };
            if val.is_zero_elem() {
                continue;
            }
            for h in last..n {
                acc(&mut states[l + 1][h][2 * h + 1], val.clone());
            }
        }
    }
    let mut total = zero;
    for v in done[n].iter().flatten() {
        total.add_assign_ref(v);
    }
    Ok(total)
}

/// [`pfaffian`] over degree-capped polynomials.
pub fn pfaffian_division_free(d: &[Vec<TruncatedPoly>], cap: usize) -> Result<TruncatedPoly> {
    pfaffian(d, &TruncatedPoly::constant(BigInt::one(), cap))
}

/// Edge data for the skew matrix `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TutteInstance {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
    /// Isolation weights `w_j`.
    pub weights: Vec<u64>,
    /// Constraint coefficients `W_{1j}`.
    pub coef: Vec<usize>,
    pub d1: usize,
}

impl TutteInstance {
    /// `D_{i₁i₂} = 2^{w_j} X^{W_{1j}}` for the edge `j = {i₁ < i₂}`, negated
    /// below the diagonal, with powers of `X` above `d₁` dropped.
    pub fn matrix(&self) -> Vec<Vec<TruncatedPoly>> {
        let zero = TruncatedPoly::zero(self.d1);
        let mut d = vec![vec![zero; self.m]; self.m];
        for (j, &(a, b)) in self.edges.iter().enumerate() {
            let (i1, i2) = (a.min(b), a.max(b));
            let c = BigInt::one() << self.weights[j];
            d[i1][i2] = TruncatedPoly::monomial(c.clone(), self.coef[j], self.d1);
            d[i2][i1] = TruncatedPoly::monomial(-c, self.coef[j], self.d1);
        }
        d
    }

    /// Coefficient of `X^{d₁}` in `Pf(D)`.
    pub fn certificate(&self) -> Result<BigInt> {
        Ok(pfaffian_division_free(&self.matrix(), self.d1)?.coeff(self.d1))
    }
}

/// `w_j = (nm + 1) c_j + Z_j`.
pub fn isolation_weights(c: &[i64], m: usize, z: &[u64]) -> Result<Vec<u64>> {
    let scale = (c.len() * m + 1) as u64;
    c.iter()
        .zip(z)
        .map(|(&cj, &zj)| {
            let cj = u64::try_from(cj).map_err(|_| Error::Precondition("costs must be nonnegative".into()))?;
            cj.checked_mul(scale).and_then(|v| v.checked_add(zj)).ok_or(Error::Overflow("isolation weight"))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactMatchingOutcome {
    Optimal { value: i64 },
    /// Certain: either `d₁` is out of range or enumeration found nothing.
    Infeasible,
    /// No trial produced a certificate; wrong with probability ≤ 2^{−trials}.
    ProbablyInfeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatchingReport {
    pub outcome: ExactMatchingOutcome,
    pub trials: usize,
    /// Trials whose coefficient `C` was nonzero.
    pub certified: usize,
    /// Whether the value came from the enumeration fallback.
    pub fallback: bool,
}

/// The data `exact_matching_objective` reads from a form (W) instance.
struct ExactData {
    m: usize,
    edges: Vec<(usize, usize)>,
    c: Vec<i64>,
    coef: Vec<usize>,
    d1: i64,
}

fn exact_data(inst: &IlpInstance) -> Result<ExactData> {
    if inst.p != 0 || inst.h != 1 {
        return precondition("exact matching needs p = 0 and h = 1");
    }
    let edges = incidence_graph(&inst.mm)?
        .simple_edges()
        .ok_or_else(|| Error::Precondition("exact matching needs a simple graph".into()))?;
    let ok = inst.c.iter().all(|&v| v >= 0)
        && inst.w.row(0).iter().all(|&v| v >= 0)
        && inst.l.iter().all(|&v| v == Ext::Finite(0))
        && inst.u.iter().all(|&v| v == Ext::Finite(1))
        && inst.b.iter().all(|&v| v == 1);
    if !ok {
        return precondition("exact matching needs c ≥ 0, W ≥ 0, l = 0, u = 1, b = 1");
    }
    Ok(ExactData {
        m: inst.m,
        edges,
        c: inst.c.clone(),
        coef: inst.w.row(0).iter().map(|&v| v as usize).collect(),
        d1: inst.d[0],
    })
}

/// Minimum `cᵀx` over perfect matchings `x` with `Wx = d₁`, by enumeration.
pub fn exact_matching_by_enumeration(inst: &IlpInstance) -> Result<Option<i64>> {
    let data = exact_data(inst)?;
    Ok(enumerate_perfect_matchings(data.m, &data.edges)?
        .iter()
        .filter(|mt| mt.iter().map(|&j| data.coef[j] as i64).sum::<i64>() == data.d1)
        .map(|mt| mt.iter().map(|&j| data.c[j]).sum::<i64>())
        .min())
}

/// Optimal value of a weighted exact perfect matching instance (value only).
///
/// Each trial draws isolation weights, reads the coefficient `C` of `X^{d₁}`
/// in `Pf(D)` and, if `C ≠ 0`, records `⌊ν₂(C) / (nm + 1)⌋`. A nonzero `C`
/// always certifies a matching of at most that cost, so the minimum over
/// trials never undercuts the optimum, and each trial hits it with
/// probability at least ½.
pub fn exact_matching_objective(inst: &IlpInstance, seed: u64, trials: usize) -> Result<ExactMatchingReport> {
    let data = exact_data(inst)?;
    let report = |outcome, certified, fallback| ExactMatchingReport { outcome, trials, certified, fallback };
    let max_w = data.coef.iter().copied().max().unwrap_or(0) as i64;
    if data.m % 2 == 1 || data.d1 < 0 || data.d1 > (data.m as i64 / 2) * max_w {
        return Ok(report(ExactMatchingOutcome::Infeasible, 0, false));
    }
    let n = data.edges.len();
    let scale = (n * data.m + 1) as u64;
    let mut best: Option<i64> = None;
    let mut certified = 0;
    for t in 0..trials {
        let z = isolation_sample_stream(n, seed, t as u64);
        let tutte = TutteInstance {
            m: data.m,
            edges: data.edges.clone(),
            weights: isolation_weights(&data.c, data.m, &z)?,
            coef: data.coef.clone(),
            d1: data.d1 as usize,
        };
        let cert = tutte.certificate()?;
        if cert.is_zero() {
            continue;
        }
        certified += 1;
        let nu = cert.trailing_zeros().unwrap_or(0);
        if nu < (data.m / 2) as u64 {
            return Err(Error::Certificate(format!("2-adic valuation {nu} below m/2")));
        }
        let cand = i64::try_from(nu / scale).map_err(|_| Error::Overflow("exact matching value"))?;
        best = Some(best.map_or(cand, |b| b.min(cand)));
    }
    if let Some(value) = best {
        return Ok(report(ExactMatchingOutcome::Optimal { value }, certified, false));
    }
    if data.m <= FALLBACK_MAX_VERTICES {
        return Ok(match exact_matching_by_enumeration(inst)? {
            Some(value) => report(ExactMatchingOutcome::Optimal { value }, 0, true),
            None => report(ExactMatchingOutcome::Infeasible, 0, true),
        });
    }
    Ok(report(ExactMatchingOutcome::ProbablyInfeasible, 0, false))
}
