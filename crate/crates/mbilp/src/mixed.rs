//! Form (M): `p` extra columns and `h` extra rows on a generalized matching
//! block. The solver fixes `y` one coordinate at a time inside shrinking
//! proximity boxes, solves every form (W) leaf for its value and recovers a
//! solution by binary search on one variable at a time.

use crate::graver::solve_wide_graver;
use crate::instance::{Ext, IlpInstance};
use crate::lp::{lp_relaxation_vertex, LpStatus};
use crate::matching::solve_generalized_matching;
use crate::pfaffian::{exact_matching_objective, ExactMatchingOutcome};
use crate::proximity::proximity_box;
use crate::reduction::{condense_constraints, expand_gb, normalize_to_b_matching, Reduced};
use crate::{Error, Outcome, Result};

/// Largest expanded vertex count sent to the Pfaffian engine under
/// [`LeafEngine::Auto`].
pub const PFAFFIAN_MAX_VERTICES: i64 = 12;

/// Default total failure probability for randomized leaves.
pub const DEFAULT_FAILURE_BUDGET: f64 = 1e-6;

/// Default cap on the number of leaves per value computation.
pub const DEFAULT_LEAF_CAP: u64 = 100_000;

/// How form (W) leaves with `h > 0` are solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafEngine {
    /// Pfaffian when the expanded graph has at most
    /// [`PFAFFIAN_MAX_VERTICES`] vertices, Graver augmentation otherwise.
    Auto,
    Pfaffian,
    Graver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedOptions {
    pub seed: u64,
    /// Trials per randomized leaf; `None` derives them from the budget.
    pub trials: Option<usize>,
    pub failure_budget: f64,
    pub engine: LeafEngine,
    pub leaf_cap: u64,
}

impl Default for MixedOptions {
    fn default() -> Self {
        MixedOptions {
            seed: 0,
            trials: None,
            failure_budget: DEFAULT_FAILURE_BUDGET,
            engine: LeafEngine::Auto,
            leaf_cap: DEFAULT_LEAF_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedReport {
    pub outcome: Outcome,
    /// Leaves solved, including those of recovery probes.
    pub leaves: u64,
    pub randomized_leaves: u64,
    pub trials: usize,
    /// Union bound `randomized_leaves · 2^{−trials}` on a wrong answer.
    pub failure_bound: f64,
    /// Value computations made during recovery.
    pub probes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Val {
    Opt(i128),
    Infeasible,
    Unbounded,
}

struct Solver<'a> {
    opts: &'a MixedOptions,
    trials: usize,
    leaves: u64,
    randomized: u64,
    leaf_budget: u64,
}

fn fit(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow("solve_mixed"))
}

/// `inst` with `y₁ = y` substituted.
fn fix_first(inst: &IlpInstance, y: i64) -> Result<IlpInstance> {
    let mut out = inst.clone();
    let keep: Vec<usize> = (1..inst.p).collect();
    out.p -= 1;
    out.a = inst.a[1..].to_vec();
    out.cc = inst.cc.select_cols(&keep);
    out.t = inst.t.select_cols(&keep);
    out.e = inst.e[1..].to_vec();
    out.g = inst.g[1..].to_vec();
    for i in 0..inst.h {
        out.d[i] = fit(inst.d[i] as i128 - inst.cc.get(i, 0) as i128 * y as i128)?;
    }
    for i in 0..inst.m {
        out.b[i] = fit(inst.b[i] as i128 - inst.t.get(i, 0) as i128 * y as i128)?;
    }
    Ok(out)
}

impl Solver<'_> {
    fn value(&mut self, inst: &IlpInstance) -> Result<Val> {
        let lp = lp_relaxation_vertex(inst);
        match lp.status {
            LpStatus::Infeasible => return Ok(Val::Infeasible),
            LpStatus::Unbounded => {
                let mut zero = inst.clone();
                zero.a = vec![0; inst.p];
                zero.c = vec![0; inst.n];
                return Ok(match self.value(&zero)? {
                    Val::Infeasible => Val::Infeasible,
                    _ => Val::Unbounded,
                });
            }
            LpStatus::Optimal => {}
        }
        let bx = proximity_box(inst, &lp)?;
        if bx.is_empty() {
            return Ok(Val::Infeasible);
        }
        if bx.lower.iter().chain(&bx.upper).any(|b| !b.is_finite()) {
            return Err(Error::Cap("proximity box does not fit in i64".into()));
        }
        let boxed = bx.apply(inst);
        if boxed.p == 0 {
            return self.leaf(&boxed);
        }
        let (lo, hi) = (boxed.e[0].unwrap(), boxed.g[0].unwrap());
        let mut best: Option<i128> = None;
        for y in lo..=hi {
            match self.value(&fix_first(&boxed, y)?)? {
                Val::Opt(v) => {
                    let cand = v + boxed.a[0] as i128 * y as i128;
                    best = Some(best.map_or(cand, |b| b.min(cand)));
                }
                Val::Infeasible => {}
                // A bounded LP stays bounded when y₁ is fixed.
                Val::Unbounded => return Ok(Val::Unbounded),
            }
        }
        Ok(best.map_or(Val::Infeasible, Val::Opt))
    }

    fn leaf(&mut self, inst: &IlpInstance) -> Result<Val> {
        self.leaves += 1;
        if self.leaves > self.leaf_budget {
            return Err(Error::Cap(format!("more than {} leaves", self.opts.leaf_cap)));
        }
        if inst.h == 0 {
            return Ok(match solve_generalized_matching(inst)? {
                Outcome::Optimal { value, .. } => Val::Opt(value as i128),
                Outcome::Infeasible => Val::Infeasible,
                Outcome::Unbounded => Val::Unbounded,
            });
        }
        let (normal, map) = normalize_to_b_matching(inst)?;
        if normal.b.iter().any(|&b| b < 0) {
            return Ok(Val::Infeasible);
        }
        let expanded: i64 = normal.b.iter().sum();
        let pfaffian = match self.opts.engine {
            LeafEngine::Pfaffian => true,
            LeafEngine::Graver => false,
            LeafEngine::Auto => expanded <= PFAFFIAN_MAX_VERTICES,
        };
        if !pfaffian {
            return Ok(match solve_wide_graver(inst)?.outcome {
                Outcome::Optimal { value, .. } => Val::Opt(value as i128),
                Outcome::Infeasible => Val::Infeasible,
                Outcome::Unbounded => Val::Unbounded,
            });
        }
        let (exp, emap) = expand_gb(&normal, &normal.b)?;
        let (cond, cmap) = match condense_constraints(&exp)? {
            Reduced::Instance(c, m) => (c, m),
            Reduced::Infeasible { .. } => return Ok(Val::Infeasible),
        };
        self.randomized += 1;
        let seed = self.opts.seed.wrapping_add(self.randomized.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let rep = exact_matching_objective(&cond, seed, self.trials)?;
        Ok(match rep.outcome {
            ExactMatchingOutcome::Optimal { value } => {
                Val::Opt(value as i128 + cmap.offset() + emap.offset() + map.offset())
            }
            ExactMatchingOutcome::Infeasible | ExactMatchingOutcome::ProbablyInfeasible => Val::Infeasible,
        })
    }
}

/// Upper bound on the leaves of one value computation: the volume of the
/// `y` part of the top-level proximity box.
fn leaf_bound(inst: &IlpInstance) -> u64 {
    let lp = lp_relaxation_vertex(inst);
    if lp.status != LpStatus::Optimal {
        return 1;
    }
    let Ok(bx) = proximity_box(inst, &lp) else { return 1 };
    (0..inst.p).fold(1u64, |acc, k| match (bx.lower[k], bx.upper[k]) {
        (Ext::Finite(a), Ext::Finite(b)) if b >= a => acc.saturating_mul((b - a + 1) as u64),
        _ => acc,
    })
}

/// Exact optimum of a form (M) instance with `trials` per randomized leaf.
pub fn solve_mixed(inst: &IlpInstance, seed: u64, trials: usize) -> Result<MixedReport> {
    solve_mixed_with(inst, &MixedOptions { seed, trials: Some(trials), ..MixedOptions::default() })
}

pub fn solve_mixed_with(inst: &IlpInstance, opts: &MixedOptions) -> Result<MixedReport> {
    inst.validate()?;
    let bound = leaf_bound(inst);
    let trials = opts
        .trials
        .unwrap_or_else(|| ((bound as f64 / opts.failure_budget).log2().ceil() as usize).max(1));
    let mut s = Solver { opts, trials, leaves: 0, randomized: 0, leaf_budget: opts.leaf_cap };
    let report = |s: &Solver, outcome, probes| MixedReport {
        outcome,
        leaves: s.leaves,
        randomized_leaves: s.randomized,
        trials,
        failure_bound: s.randomized as f64 * 0.5f64.powi(trials as i32),
        probes,
    };
    if inst.p == 0 && inst.h == 0 {
        return Ok(report(&s, solve_generalized_matching(inst)?, 0));
    }
    let target = match s.value(inst)? {
        Val::Opt(v) => v,
        Val::Infeasible => return Ok(report(&s, Outcome::Infeasible, 0)),
        Val::Unbounded => return Ok(report(&s, Outcome::Unbounded, 0)),
    };

    // Recovery: shrink each variable to the smallest value that keeps the
    // optimum, then fix it.
    let lp = lp_relaxation_vertex(inst);
    let mut cur = proximity_box(inst, &lp)?.apply(inst);
    let mut probes = 0;
    for k in 0..inst.vars() {
        s.leaf_budget = s.leaves + opts.leaf_cap;
        let (mut lo, mut hi) = (cur.lower()[k].unwrap(), cur.upper()[k].unwrap());
        while lo < hi {
            let mid = lo + (hi - lo).div_euclid(2);
            let mut probe = cur.clone();
            restrict(&mut probe, k, cur.lower()[k].unwrap(), mid);
            probes += 1;
            if s.value(&probe)? == Val::Opt(target) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        restrict(&mut cur, k, lo, lo);
    }
    let solution: Vec<i64> = cur.lower().iter().map(|b| b.unwrap()).collect();
    let value = inst.check(&solution).map_err(|v| Error::Certificate(format!("recovered solution rejected: {v}")))?;
    if value != target {
        return Err(Error::Certificate(format!("recovered value {value} differs from optimum {target}")));
    }
    Ok(report(&s, Outcome::Optimal { value: fit(value)?, solution }, probes))
}

fn restrict(inst: &mut IlpInstance, k: usize, lo: i64, hi: i64) {
    let (lo, hi) = (Ext::Finite(lo), Ext::Finite(hi));
    if k < inst.p {
        inst.e[k] = lo;
        inst.g[k] = hi;
    } else {
        inst.l[k - inst.p] = lo;
        inst.u[k - inst.p] = hi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{simple_incidence, Matrix};

    fn fin(v: &[i64]) -> Vec<Ext> {
        v.iter().map(|&x| Ext::Finite(x)).collect()
    }

    #[test]
    fn one_column_one_row() {
        // Path 0-1-2-3 with y feeding both ends; W asks for the middle edge.
        let mut inst = IlpInstance::empty(1, 1, 4, 3);
        inst.mm = simple_incidence(4, &[(0, 1), (1, 2), (2, 3)]);
        inst.t.set(0, 0, 1);
        inst.t.set(3, 0, 1);
        inst.w = Matrix::from_rows(&[vec![0, 1, 0]], 3);
        inst.d = vec![1];
        inst.b = vec![1, 1, 1, 1];
        inst.a = vec![2];
        inst.c = vec![1, 1, 1];
        inst.e = fin(&[0]);
        inst.g = fin(&[1]);
        inst.l = fin(&[0, 0, 0]);
        inst.u = fin(&[1, 1, 1]);
        let rep = solve_mixed(&inst, 1, 20).unwrap();
        let Outcome::Optimal { value, solution } = rep.outcome else { panic!("{rep:?}") };
        assert_eq!(solution, vec![1, 0, 1, 0]);
        assert_eq!(value, 3);
    }

    #[test]
    fn fixing_y_updates_right_hand_sides() {
        let mut inst = IlpInstance::empty(1, 1, 1, 1);
        inst.cc.set(0, 0, 2);
        inst.t.set(0, 0, -1);
        inst.d = vec![5];
        inst.b = vec![3];
        let sub = fix_first(&inst, 2).unwrap();
        assert_eq!((sub.p, sub.d.clone(), sub.b.clone()), (0, vec![1], vec![5]));
    }
}
