//! Proximity boxes around LP vertices and the lower-bound family whose
//! unique integral solution is far from a fractional vertex.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::circuits::{circuit_bound, enumerate_circuits, CIRCUIT_MAX_COLS};
use crate::instance::{Ext, IlpInstance, Matrix};
use crate::lp::{LpResult, LpStatus};
use crate::numeric::{frac, rank, rat, to_rational, Rational};
use crate::{precondition, Result};

/// Integer box guaranteed to contain an optimal ILP solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProximityBox {
    pub lower: Vec<Ext>,
    pub upper: Vec<Ext>,
    /// `n · c_∞` (or `n` times the explicit circuit bound).
    pub radius: BigInt,
    pub c_inf: BigInt,
    /// Whether `c_inf` was enumerated rather than bounded.
    pub exact: bool,
}

impl ProximityBox {
    /// True when some coordinate has no integer in range.
    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(lo, hi)| match (lo, hi) {
            (Ext::Finite(a), Ext::Finite(b)) => a > b,
            (Ext::PosInf, _) | (_, Ext::NegInf) => true,
            _ => false,
        })
    }

    /// `inst` with its bounds replaced by the box.
    pub fn apply(&self, inst: &IlpInstance) -> IlpInstance {
        let mut out = inst.clone();
        out.set_bounds(&self.lower, &self.upper);
        out
    }
}

/// `c_∞(A)` by enumeration when `A` has at most [`CIRCUIT_MAX_COLS`]
/// columns, otherwise the explicit bound. The flag says which.
pub fn circuit_radius(inst: &IlpInstance) -> (BigInt, bool) {
    let a = inst.full_matrix();
    if a.cols() <= CIRCUIT_MAX_COLS {
        if let Ok(set) = enumerate_circuits(&a) {
            return (set.c_inf(), true);
        }
    }
    let r = rank(&to_rational(&a.to_rows()));
    (circuit_bound(inst.p, inst.h, inst.delta(), r), false)
}

fn ceil_big(q: &Rational) -> BigInt {
    let (n, d) = (q.numer(), q.denom());
    n.div_ceil(d)
}

fn floor_big(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

fn tighten_lo(orig: Ext, cand: &BigInt) -> Ext {
    match cand.to_i64() {
        Some(v) if !orig.is_finite() || orig.unwrap() < v => match orig {
            Ext::PosInf => orig,
            _ => Ext::Finite(v),
        },
        Some(_) => orig,
        None if cand > &BigInt::zero() => Ext::PosInf,
        None => orig,
    }
}

fn tighten_hi(orig: Ext, cand: &BigInt) -> Ext {
    match cand.to_i64() {
        Some(v) if !orig.is_finite() || orig.unwrap() > v => match orig {
            Ext::NegInf => orig,
            _ => Ext::Finite(v),
        },
        Some(_) => orig,
        None if cand < &BigInt::zero() => Ext::NegInf,
        None => orig,
    }
}

/// The integer points within `n · c_∞` of the LP vertex, intersected with
/// the original bounds. An optimal integral solution exists inside whenever
/// the ILP has one.
pub fn proximity_box(inst: &IlpInstance, lp: &LpResult<Rational>) -> Result<ProximityBox> {
    if lp.status != LpStatus::Optimal {
        return precondition(format!("proximity box needs an optimal LP vertex, got {}", lp.status.name()));
    }
    let n = inst.vars();
    if lp.x.len() != n {
        return precondition("LP vertex has the wrong length");
    }
    let (c_inf, exact) = circuit_radius(inst);
    let radius = &c_inf * BigInt::from(n);
    let rq = Rational::from_integer(radius.clone());
    let (lo0, hi0) = (inst.lower(), inst.upper());
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for j in 0..n {
        lower.push(tighten_lo(lo0[j], &ceil_big(&(&lp.x[j] - &rq))));
        upper.push(tighten_hi(hi0[j], &floor_big(&(&lp.x[j] + &rq))));
    }
    Ok(ProximityBox { lower, upper, radius, c_inf, exact })
}

/// A member of the lower-bound family together with its fractional vertex.
#[derive(Clone, Debug)]
pub struct ProximityLb {
    pub inst: IlpInstance,
    /// The described fractional vertex; it is the unique LP optimum.
    pub vertex: Vec<Rational>,
    /// Index of `x₂` among all `p + n` variables.
    pub x2: usize,
    /// `k (Δk)^{p+h}`, the value of `x₂` in the unique integral solution.
    pub x2_integral: BigInt,
}

/// Column-major builder for the block systems below.
struct Sys {
    cols: Vec<Vec<(usize, i64)>>,
    rows: usize,
    rhs: Vec<i64>,
}

impl Sys {
    fn var(&mut self) -> usize {
        self.cols.push(Vec::new());
        self.cols.len() - 1
    }

    fn vars(&mut self, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.var()).collect()
    }

    fn row(&mut self, entries: &[(usize, i64)], rhs: i64) {
        for &(j, v) in entries {
            self.cols[j].push((self.rows, v));
        }
        self.rows += 1;
        self.rhs.push(rhs);
    }
}

/// Builds the lower-bound instance for `p`, `h`, `Δ ≥ 1`, `k ≥ 1`.
///
/// Variables are `y` (p of them), then the matching part: for `p = 0` the
/// pair `(α, β)`, for `p > 0` the triple `u = (w, γ, δ)`, followed by the
/// chain `x` that multiplies `x₁` by `Δk` once per row of `W`. The rows
/// `2α + β = 1` force `β = 1` in every integral solution, so `x₁ = k`,
/// while `α = ½, β = 0` is a vertex with everything else zero.
///
/// The blocks `w^{(i)}` enter with coefficient −1 so that the chain
/// `w^{(i)} = Δ y_i`, `y_{i+1} = 1ᵀ w^{(i)}` is nonnegative.
pub fn gen_proximity_lb(p: usize, h: usize, delta: i64, k: usize) -> Result<ProximityLb> {
    if delta < 1 || k < 1 {
        return precondition("proximity lower bound needs Δ ≥ 1 and k ≥ 1");
    }
    let mut s = Sys { cols: Vec::new(), rows: 0, rhs: Vec::new() };
    let y = s.vars(p);
    // Rows of W come first; reserve them and fill once the x chain exists.
    s.rows = h;
    s.rhs = vec![0; h];
    let (pair_a, pair_b, w1) = if p == 0 {
        (s.vars(k), s.vars(k), None)
    } else {
        let w1 = s.var();
        let blocks: Vec<Vec<usize>> = (0..p).map(|_| s.vars(k)).collect();
        let gamma = s.vars(k);
        let delta_v = s.vars(k);
        // Chain w^{(i)} = Δ y_i, y_{i+1} = 1ᵀ w^{(i)}, w_1 = 1ᵀ w^{(p)}.
        for i in 0..p {
            for &wr in &blocks[i] {
                s.row(&[(y[i], delta), (wr, -1)], 0);
            }
            let mut sum: Vec<(usize, i64)> = blocks[i].iter().map(|&wr| (wr, -1)).collect();
            sum.push((if i + 1 < p { y[i + 1] } else { w1 }, 1));
            s.row(&sum, 0);
        }
        (gamma, delta_v, Some(w1))
    };
    let x1 = s.var();
    let x2 = s.var();
    // Chain x₂ = (Δk)^h x₁ through h copies of U.
    let mut w_rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); h];
    if h == 0 {
        s.row(&[(x1, 1), (x2, -1)], 0);
    } else {
        let mut feed = x1;
        for i in 0..h {
            let ub = s.vars(k);
            s.row(&[(feed, 1), (ub[0], -1)], 0);
            for r in 1..k {
                s.row(&[(ub[r - 1], 1), (ub[r], -1)], 0);
            }
            w_rows[i].extend(ub.iter().map(|&j| (j, delta)));
            if i + 1 < h {
                feed = s.var();
                w_rows[i].push((feed, -1));
            } else {
                w_rows[i].push((x2, -1));
            }
        }
    }
    for (i, row) in w_rows.iter().enumerate() {
        for &(j, v) in row {
            s.cols[j].push((i, v));
        }
    }
    for r in 0..k {
        s.row(&[(pair_a[r], 2), (pair_b[r], 1)], 1);
    }
    let mut link: Vec<(usize, i64)> = pair_b.iter().map(|&j| (j, 1)).collect();
    link.push((if p == 0 { x1 } else { y[0] }, -1));
    s.row(&link, 0);
    if let Some(w1) = w1 {
        s.row(&[(w1, 1), (x1, -1)], 0);
    }

    let nv = s.cols.len();
    let mut a = Matrix::zeros(s.rows, nv);
    for (j, col) in s.cols.iter().enumerate() {
        for &(i, v) in col {
            a.set(i, j, v);
        }
    }
    let mut obj = vec![0; nv];
    for &j in &pair_b {
        obj[j] = 1;
    }
    let inst = IlpInstance::from_full(
        p,
        h,
        &a,
        &s.rhs,
        &obj,
        &vec![Ext::Finite(0); nv],
        &vec![Ext::PosInf; nv],
    );
    let mut vertex = vec![Rational::zero(); nv];
    for &j in &pair_a {
        vertex[j] = frac(1, 2);
    }
    let dk = BigInt::from(delta) * BigInt::from(k);
    let x2_integral = BigInt::from(k) * Pow::pow(&dk, (p + h) as u32);
    Ok(ProximityLb { inst, vertex, x2, x2_integral })
}

/// `k (Δk)^{p+h}` as a plain integer when it fits.
pub fn lb_gap(p: usize, h: usize, delta: i64, k: usize) -> Option<i64> {
    let dk = BigInt::from(delta) * BigInt::from(k);
    (BigInt::from(k) * Pow::pow(&dk, (p + h) as u32)).to_i64()
}

/// Rank of the constraints tight at `x` (rows plus active bounds); a
/// feasible point is a vertex iff this equals the number of variables.
pub fn tight_rank(inst: &IlpInstance, x: &[Rational]) -> usize {
    let a = inst.full_matrix();
    let mut rows: Vec<Vec<Rational>> = to_rational(&a.to_rows());
    let (lo, hi) = (inst.lower(), inst.upper());
    for j in 0..x.len() {
        let hit = |b: Ext| b.finite().is_some_and(|v| rat(v) == x[j]);
        if hit(lo[j]) || hit(hi[j]) {
            let mut r = vec![Rational::zero(); x.len()];
            r[j] = Rational::one();
            rows.push(r);
        }
    }
    rank(&rows)
}
