//! Graver bases and Graver-best augmentation for form (W) instances.

use num_bigint::BigInt;
use num_traits::{Pow, ToPrimitive};

use crate::instance::{Ext, IlpInstance, Matrix};
use crate::lp::{lp_relaxation_vertex, LpStatus};
use crate::oracle::{brute_force_all_optima_in_box, brute_force_in_box, OracleBudget, OracleResult};
use crate::proximity::proximity_box;
use crate::{precondition, Error, Outcome, Result};

/// Default `‖g‖∞` cap for [`graver_enumerate`].
pub const DEFAULT_NORM_CAP: i64 = 6;

/// Constant in the documented query bound
/// `K · n · ⌈log₂(‖u − l‖∞ + 2)⌉ · ⌈log₂(gap + 2)⌉`.
pub const GRAVER_QUERY_CONSTANT: u64 = 4;

/// Conformally minimal kernel elements found within `‖·‖∞ ≤ cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraverSet {
    pub elements: Vec<Vec<i64>>,
    pub cap: i64,
    /// True when `cap` reaches a proven bound on `g_∞`; otherwise the set
    /// is possibly incomplete.
    pub complete: bool,
}

impl GraverSet {
    pub fn g_inf(&self) -> i64 {
        self.elements.iter().flatten().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn g_one(&self) -> i64 {
        self.elements.iter().map(|g| g.iter().map(|v| v.abs()).sum()).max().unwrap_or(0)
    }
}

/// `y ⊑ z`: same orthant and `|y_i| ≤ |z_i|` everywhere.
pub fn conformal_le(y: &[i64], z: &[i64]) -> bool {
    y.iter().zip(z).all(|(&a, &b)| a * b >= 0 && a.abs() <= b.abs())
}

/// Proven `g_∞` bound for a stack `(W; M)` with `h` rows in `W`, `‖W‖∞ ≤ Δ`
/// and `m` rows of a generalized matching block: `2` for `h = 0`, else
/// `2(2Δh(2m+1) + 1)^h`.
pub fn graver_inf_bound(h: usize, m: usize, delta: i64) -> BigInt {
    if h == 0 {
        return BigInt::from(2);
    }
    let base = BigInt::from(2 * delta * h as i64 * (2 * m as i64 + 1) + 1);
    BigInt::from(2) * Pow::pow(base, h as u32)
}

/// Proven `g₁` bound `2m + 1` for a generalized matching block.
pub fn graver_one_bound(m: usize) -> i64 {
    2 * m as i64 + 1
}

/// The proven `g_∞` bound when the last `rows − h` rows of `a` form a
/// generalized matching block, else `None`.
pub fn proven_inf_bound(a: &Matrix, h: usize) -> Option<BigInt> {
    let m = a.rows().checked_sub(h)?;
    let matching = (0..a.cols()).all(|j| (h..a.rows()).map(|i| a.get(i, j).abs()).sum::<i64>() <= 2);
    if !matching {
        return None;
    }
    let delta = (0..h).flat_map(|i| a.row(i).iter().map(|v| v.abs())).max().unwrap_or(0);
    Some(graver_inf_bound(h, m, delta))
}

fn homogeneous(a: &Matrix) -> IlpInstance {
    let n = a.cols();
    IlpInstance::generalized(a.clone(), vec![0; a.rows()], vec![0; n], vec![Ext::NegInf; n], vec![Ext::PosInf; n])
}

/// All conformally minimal kernel vectors of `a` with entries in
/// `[−cap, cap]`. The first `h` rows are read as `W` when deciding
/// completeness.
pub fn graver_enumerate(a: &Matrix, cap: i64, h: usize) -> Result<GraverSet> {
    if cap < 0 {
        return precondition("norm cap must be nonnegative");
    }
    let n = a.cols();
    let (res, mut all) = brute_force_all_optima_in_box(&homogeneous(a), &vec![-cap; n], &vec![cap; n], OracleBudget::default());
    if res == OracleResult::BudgetExceeded {
        return Err(Error::Cap(format!("kernel scan with cap {cap} over {n} columns")));
    }
    all.retain(|z| z.iter().any(|&v| v != 0));
    all.sort_by_key(|z| (z.iter().map(|v| v.abs()).sum::<i64>(), z.clone()));
    let mut elements: Vec<Vec<i64>> = Vec::new();
    for z in all {
        if !elements.iter().any(|g| conformal_le(g, &z)) {
            elements.push(z);
        }
    }
    let complete = proven_inf_bound(a, h).is_some_and(|b| BigInt::from(cap) >= b);
    Ok(GraverSet { elements, cap, complete })
}

fn box_cap(inst: &IlpInstance) -> i64 {
    graver_inf_bound(inst.h, inst.m, inst.delta()).to_i64().unwrap_or(i64::MAX)
}

/// A Graver-best step at step length 1: the best kernel vector `z` with
/// `l − x ≤ z ≤ u − x` and `‖z‖∞` within the proven bound. `None` when no
/// such `z` has `cᵀz < 0`.
pub fn graver_best_step(inst: &IlpInstance, x: &[i64]) -> Result<Option<Vec<i64>>> {
    scaled_best_step(inst, x, 1)
}

/// Best `z` with `l ≤ x + λz ≤ u` in the homogeneous system.
fn scaled_best_step(inst: &IlpInstance, x: &[i64], lambda: i64) -> Result<Option<Vec<i64>>> {
    if inst.p != 0 {
        return precondition("Graver steps need form (W)");
    }
    if x.len() != inst.n {
        return precondition("point has the wrong length");
    }
    let g = box_cap(inst);
    let mut lo = Vec::with_capacity(inst.n);
    let mut hi = Vec::with_capacity(inst.n);
    for j in 0..inst.n {
        let down = match inst.l[j] {
            Ext::Finite(l) => (l - x[j]).div_euclid(lambda) + i64::from((l - x[j]).rem_euclid(lambda) != 0),
            _ => -g,
        };
        let up = match inst.u[j] {
            Ext::Finite(u) => (u - x[j]).div_euclid(lambda).min(g),
            _ => g,
        };
        lo.push(down.max(-g));
        hi.push(up);
    }
    let mut hom = inst.clone();
    hom.d = vec![0; inst.h];
    hom.b = vec![0; inst.m];
    hom.l = vec![Ext::NegInf; inst.n];
    hom.u = vec![Ext::PosInf; inst.n];
    match brute_force_in_box(&hom, &lo, &hi, OracleBudget::default()) {
        OracleResult::Optimal { value, solution } if value < 0 => Ok(Some(solution)),
        OracleResult::BudgetExceeded => Err(Error::Cap("Graver-best oracle budget exceeded".into())),
        _ => Ok(None),
    }
}

/// Per-phase accounting of an augmentation run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub queries: u64,
    pub steps: u64,
    /// Objective after each step, starting with the initial point.
    pub trajectory: Vec<i128>,
    /// `K · n · ⌈log₂(‖u − l‖∞ + 2)⌉ · ⌈log₂(gap + 2)⌉`.
    pub query_bound: u64,
}

impl PhaseStats {
    pub fn within_bound(&self) -> bool {
        self.queries <= self.query_bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraverReport {
    pub outcome: Outcome,
    pub phase1: PhaseStats,
    pub phase2: PhaseStats,
}

fn ceil_log2(v: u128) -> u64 {
    (128 - (v.max(1) - 1).leading_zeros()) as u64
}

/// Augments a feasible `x` of an instance with finite bounds until no
/// Graver-best step improves it. Each round tries step lengths `λ = 2^k`
/// and keeps the best `λz`.
fn augment(inst: &IlpInstance, x: &mut [i64]) -> Result<PhaseStats> {
    let width = (0..inst.n).map(|j| inst.u[j].unwrap() - inst.l[j].unwrap()).max().unwrap_or(0);
    let mut st = PhaseStats { trajectory: vec![inst.objective_value(x)], ..PhaseStats::default() };
    loop {
        let mut best: Option<(i128, Vec<i64>)> = None;
        let mut lambda = 1i64;
        while lambda <= width.max(1) {
            st.queries += 1;
            let Some(z) = scaled_best_step(inst, x, lambda)? else {
                if lambda == 1 {
                    break;
                }
                lambda *= 2;
                continue;
            };
            let step: Vec<i64> = z.iter().map(|v| v * lambda).collect();
            let gain = inst.objective_value(&step);
            if best.as_ref().is_none_or(|(g, _)| gain < *g) {
                best = Some((gain, step));
            }
            lambda *= 2;
        }
        let Some((gain, step)) = best else { break };
        if gain >= 0 {
            return Err(Error::Certificate("augmenting step does not decrease the objective".into()));
        }
        for (xi, s) in x.iter_mut().zip(&step) {
            *xi += s;
        }
        st.steps += 1;
        st.trajectory.push(inst.objective_value(x));
    }
    let gap = (st.trajectory[0] - st.trajectory[st.trajectory.len() - 1]) as u128;
    st.query_bound =
        GRAVER_QUERY_CONSTANT * inst.n.max(1) as u64 * ceil_log2(width as u128 + 2) * ceil_log2(gap + 2);
    Ok(st)
}

/// Exact optimum of a form (W) instance by Graver-best augmentation.
/// Phase 1 drives the slacks of `[W I O; M O I]` to zero from `(0, d, b)`
/// (after shifting `x` by `l`), phase 2 augments the result.
pub fn solve_wide_graver(inst: &IlpInstance) -> Result<GraverReport> {
    inst.validate()?;
    if inst.p != 0 {
        return precondition("solve_wide_graver needs p = 0");
    }
    let done = |outcome| GraverReport { outcome, phase1: PhaseStats::default(), phase2: PhaseStats::default() };
    let lp = lp_relaxation_vertex(inst);
    match lp.status {
        LpStatus::Infeasible => return Ok(done(Outcome::Infeasible)),
        LpStatus::Unbounded => {
            let mut zero = inst.clone();
            zero.c = vec![0; inst.n];
            return Ok(done(match solve_wide_graver(&zero)?.outcome {
                Outcome::Infeasible => Outcome::Infeasible,
                _ => Outcome::Unbounded,
            }));
        }
        LpStatus::Optimal => {}
    }
    let bx = proximity_box(inst, &lp)?;
    if bx.is_empty() {
        return Ok(done(Outcome::Infeasible));
    }
    if bx.lower.iter().chain(&bx.upper).any(|b| !b.is_finite()) {
        return Err(Error::Cap("proximity box does not fit in i64".into()));
    }
    let boxed = bx.apply(inst);
    let (h, m, n) = (inst.h, inst.m, inst.n);
    let l: Vec<i64> = boxed.l.iter().map(|b| b.unwrap()).collect();
    let width: Vec<i64> = boxed.u.iter().zip(&l).map(|(u, lo)| u.unwrap() - lo).collect();
    let shift = |rhs: &[i64], a: &Matrix| -> Result<Vec<i64>> {
        rhs.iter()
            .zip(a.mul_vec(&l))
            .map(|(&r, s)| i64::try_from(r as i128 - s).map_err(|_| Error::Overflow("solve_wide_graver")))
            .collect()
    };
    let (d, b) = (shift(&inst.d, &inst.w)?, shift(&inst.b, &inst.mm)?);

    // Phase 1 on [W I O; M O I] with slacks at the right-hand side.
    let k = h + m;
    let mut aux = IlpInstance::empty(0, h, m, n + k);
    let rhs: Vec<i64> = d.iter().chain(&b).copied().collect();
    for i in 0..h {
        for j in 0..n {
            aux.w.set(i, j, inst.w.get(i, j));
        }
        aux.w.set(i, n + i, 1);
    }
    for i in 0..m {
        for j in 0..n {
            aux.mm.set(i, j, inst.mm.get(i, j));
        }
        aux.mm.set(i, n + h + i, 1);
    }
    aux.d = d.clone();
    aux.b = b.clone();
    for j in 0..n {
        aux.l[j] = Ext::Finite(0);
        aux.u[j] = Ext::Finite(width[j]);
    }
    for (i, &r) in rhs.iter().enumerate() {
        aux.l[n + i] = Ext::Finite(r.min(0));
        aux.u[n + i] = Ext::Finite(r.max(0));
        aux.c[n + i] = r.signum();
    }
    let mut start: Vec<i64> = vec![0; n];
    start.extend(&rhs);
    let phase1 = augment(&aux, &mut start)?;
    if aux.objective_value(&start) != 0 {
        return Ok(GraverReport { outcome: Outcome::Infeasible, phase1, phase2: PhaseStats::default() });
    }

    // Phase 2 on the shifted instance.
    let mut shifted = inst.clone();
    shifted.d = d;
    shifted.b = b;
    shifted.l = vec![Ext::Finite(0); n];
    shifted.u = width.iter().map(|&w| Ext::Finite(w)).collect();
    let mut x = start[..n].to_vec();
    let phase2 = augment(&shifted, &mut x)?;
    let solution: Vec<i64> = x.iter().zip(&l).map(|(a, b)| a + b).collect();
    let value = inst.check(&solution).map_err(|v| Error::Certificate(format!("Graver solution rejected: {v}")))?;
    let value = i64::try_from(value).map_err(|_| Error::Overflow("solve_wide_graver"))?;
    Ok(GraverReport { outcome: Outcome::Optimal { value, solution }, phase1, phase2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::simple_incidence;

    #[test]
    fn single_edge_kernel() {
        let set = graver_enumerate(&Matrix::from_rows(&[vec![1, 1]], 2), 6, 0).unwrap();
        assert_eq!(set.elements, vec![vec![-1, 1], vec![1, -1]]);
        assert_eq!(set.g_inf(), 1);
        assert!(set.complete);
    }

    #[test]
    fn trivial_kernel_is_empty() {
        let set = graver_enumerate(&Matrix::from_rows(&[vec![1, 0], vec![0, 1]], 2), 6, 0).unwrap();
        assert!(set.elements.is_empty());
    }

    #[test]
    fn small_cap_is_flagged() {
        let a = Matrix::from_rows(&[vec![1, 2, 3]], 3);
        assert!(!graver_enumerate(&a, 2, 1).unwrap().complete);
        assert_eq!(graver_inf_bound(1, 0, 3), BigInt::from(14));
    }

    #[test]
    fn loop_edge_steps() {
        // Half-edge x0 and a loop x1 at one vertex: x0 + 2 x1 = 4, c = (1, 0).
        let mm = Matrix::from_rows(&[vec![1, 2]], 2);
        let inst = IlpInstance::generalized(mm, vec![4], vec![1, 0], vec![Ext::Finite(0); 2], vec![Ext::Finite(4); 2]);
        let z = graver_best_step(&inst, &[4, 0]).unwrap().unwrap();
        assert!(inst.objective_value(&z) <= -2);
        assert_eq!(graver_best_step(&inst, &[0, 2]).unwrap(), None);
        let rep = solve_wide_graver(&inst).unwrap();
        assert_eq!(rep.outcome.value(), Some(0));
    }

    #[test]
    fn zero_rhs_needs_no_phase_one_steps() {
        let mm = simple_incidence(2, &[(0, 1)]);
        let inst = IlpInstance::generalized(mm, vec![0, 0], vec![1], vec![Ext::Finite(0)], vec![Ext::Finite(3)]);
        let rep = solve_wide_graver(&inst).unwrap();
        assert_eq!(rep.phase1.steps, 0);
        assert_eq!(rep.outcome, Outcome::Optimal { value: 0, solution: vec![0] });
    }
}
