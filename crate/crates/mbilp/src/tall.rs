//! Form (T): `p` extra columns on a generalized matching block. The
//! solver guesses `y mod 2`, binary searches the objective threshold and
//! looks for `v` with `f(b − T(2v + t)) ≤ ω* − aᵀ(2v + t)`.

use crate::convexity::{pr_membership, FEval, PrMembership, PR_MAX_M, PR_MAX_U};
use crate::instance::IlpInstance;
use crate::lp::{lp_relaxation_vertex, LpStatus};
use crate::matching::{solve_generalized_matching, FValue};
use crate::numeric::rat;
use crate::proximity::proximity_box;
use crate::reduction::{normalize_to_b_matching, SolutionMap};
use crate::{precondition, Error, Outcome, Result};

/// Default cap on the number of `v` per parity guess.
pub const DEFAULT_BOX_CAP: u64 = 1_000_000;

/// One parity guess at one threshold. `v` ranges over `lo ≤ v ≤ hi`, which
/// is `{v : 0 ≤ 2v + t ≤ g}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TallSearchState {
    pub t: Vec<i64>,
    /// `(b − T t) mod 2`.
    pub r: Vec<i64>,
    pub omega: i64,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    /// `‖ẑ(v)‖∞ ≤ u` on the box.
    pub u: i64,
}

impl TallSearchState {
    /// `inst` must be normalized: `e = 0`, `g` finite.
    pub fn new(inst: &IlpInstance, t: &[i64], omega: i64) -> Result<Self> {
        if inst.h != 0 || t.len() != inst.p {
            return precondition("tall search state needs h = 0 and one parity bit per y");
        }
        let g: Vec<i64> = inst
            .g
            .iter()
            .map(|b| b.finite().ok_or_else(|| Error::Precondition("tall search needs finite g".into())))
            .collect::<Result<_>>()?;
        let r = (0..inst.m)
            .map(|i| (inst.b[i] as i128 - dot_row(inst, i, t)).rem_euclid(2) as i64)
            .collect();
        let lo = vec![0; inst.p];
        let hi = g.iter().zip(t).map(|(&gk, &tk)| (gk - tk).div_euclid(2)).collect();
        Ok(TallSearchState { t: t.to_vec(), r, omega, lo, hi, u: z_bound(inst, &g)? })
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a > b)
    }

    /// Number of integral `v` in the box.
    pub fn volume(&self) -> u128 {
        if self.is_empty() {
            return 0;
        }
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as u128).fold(1, |acc, s| acc.saturating_mul(s))
    }

    pub fn y(&self, v: &[i64]) -> Vec<i64> {
        v.iter().zip(&self.t).map(|(a, b)| 2 * a + b).collect()
    }

    /// `F(v) = (ω̂(v), ẑ(v))`.
    pub fn image(&self, inst: &IlpInstance, v: &[i64]) -> Result<(i64, Vec<i64>)> {
        let y = self.y(v);
        let ay: i128 = inst.a.iter().zip(&y).map(|(&a, &b)| a as i128 * b as i128).sum();
        let omega = fit(self.omega as i128 - ay)?;
        let z = (0..inst.m).map(|i| fit(inst.b[i] as i128 - dot_row(inst, i, &y))).collect::<Result<_>>()?;
        Ok((omega, z))
    }
}

fn fit(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow("tall solver"))
}

fn dot_row(inst: &IlpInstance, i: usize, y: &[i64]) -> i128 {
    inst.t.row(i).iter().zip(y).map(|(&a, &b)| a as i128 * b as i128).sum()
}

/// Largest `|b_i − (T y)_i|` over `0 ≤ y ≤ g`.
fn z_bound(inst: &IlpInstance, g: &[i64]) -> Result<i64> {
    let mut u = 0i128;
    for i in 0..inst.m {
        let (mut lo, mut hi) = (0i128, 0i128);
        for (k, &tk) in inst.t.row(i).iter().enumerate() {
            let s = tk as i128 * g[k] as i128;
            lo += s.min(0);
            hi += s.max(0);
        }
        let b = inst.b[i] as i128;
        u = u.max((b - lo).abs()).max((b - hi).abs());
    }
    fit(u)
}

/// First `v` of the box (first coordinate fastest) with
/// `f(ẑ(v)) ≤ ω̂(v)`, by direct enumeration.
pub fn feasibility_tall(
    state: &TallSearchState,
    inst: &IlpInstance,
    f: &mut FEval,
    box_cap: u64,
) -> Result<Option<Vec<i64>>> {
    if state.is_empty() {
        return Ok(None);
    }
    if state.volume() > box_cap as u128 {
        return Err(Error::Cap(format!(
            "tall search box has {} points, cap {box_cap}; try the mixed solver",
            state.volume()
        )));
    }
    let mut v = state.lo.clone();
    loop {
        let (omega, z) = state.image(inst, &v)?;
        debug_assert!(z.iter().zip(&state.r).all(|(a, b)| (a - b).rem_euclid(2) == 0));
        if matches!(f.value(&z)?, FValue::Finite(w) if w <= omega) {
            return Ok(Some(v));
        }
        let Some(k) = (0..v.len()).find(|&k| v[k] < state.hi[k]) else { return Ok(None) };
        v[k] += 1;
        v[..k].copy_from_slice(&state.lo[..k]);
    }
}

/// Compares the direct test at `v` with membership of `F(v)` in `P_{r,U}`.
/// Returns `None` when the instance exceeds the membership caps.
pub fn tall_cross_check(state: &TallSearchState, inst: &IlpInstance, f: &mut FEval, v: &[i64]) -> Result<Option<bool>> {
    if inst.m > PR_MAX_M || state.u > PR_MAX_U {
        return Ok(None);
    }
    let (omega, z) = state.image(inst, v)?;
    let direct = matches!(f.value(&z)?, FValue::Finite(w) if w <= omega);
    let q: Vec<_> = std::iter::once(rat(omega)).chain(z.iter().map(|&x| rat(x))).collect();
    let inside = pr_membership(&inst.c, &inst.mm, &state.r, state.u, &q)? == PrMembership::Inside;
    Ok(Some(direct == inside))
}

/// A solved form (T) instance with search statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TallReport {
    pub outcome: Outcome,
    /// Final threshold of the binary search, in units of the input objective.
    pub omega_star: Option<i64>,
    /// Threshold probes made by the binary search.
    pub probes: usize,
}

/// The normalized instance with its map and a bracket for the search.
pub struct TallPrepared {
    pub normal: IlpInstance,
    pub map: SolutionMap,
    pub bracket: (i64, i64),
}

/// Box, normalize and bracket. `Err(outcome)` settles the instance early.
pub fn prepare_tall(inst: &IlpInstance) -> Result<std::result::Result<TallPrepared, Outcome>> {
    let lp = lp_relaxation_vertex(inst);
    match lp.status {
        LpStatus::Infeasible => return Ok(Err(Outcome::Infeasible)),
        LpStatus::Unbounded => {
            let mut zero = inst.clone();
            zero.a = vec![0; inst.p];
            zero.c = vec![0; inst.n];
            return Ok(Err(match solve_tall(&zero)?.outcome {
                Outcome::Infeasible => Outcome::Infeasible,
                _ => Outcome::Unbounded,
            }));
        }
        LpStatus::Optimal => {}
    }
    let bx = proximity_box(inst, &lp)?;
    if bx.is_empty() {
        return Ok(Err(Outcome::Infeasible));
    }
    if bx.lower.iter().chain(&bx.upper).any(|b| !b.is_finite()) {
        return Err(Error::Cap("proximity box does not fit in i64".into()));
    }
    let (normal, map) = normalize_to_b_matching(&bx.apply(inst))?;
    let g: Vec<i64> = normal.g.iter().map(|b| b.unwrap()).collect();
    let u = z_bound(&normal, &g)? as i128;
    let s: i128 = normal.a.iter().zip(&g).map(|(&a, &gk)| a.unsigned_abs() as i128 * gk as i128).sum::<i128>()
        + normal.c.iter().map(|&c| c.unsigned_abs() as i128 * u).sum::<i128>();
    let s = fit(s)?;
    Ok(Ok(TallPrepared { normal, map, bracket: (-s, s) }))
}

/// Exact optimum of a form (T) instance, with the default box cap.
pub fn solve_tall(inst: &IlpInstance) -> Result<TallReport> {
    solve_tall_with(inst, DEFAULT_BOX_CAP)
}

/// Exact optimum of a form (T) instance. Bounds that are infinite after
/// the proximity box are rejected.
pub fn solve_tall_with(inst: &IlpInstance, box_cap: u64) -> Result<TallReport> {
    inst.validate()?;
    if inst.h != 0 {
        return precondition("solve_tall needs h = 0");
    }
    if inst.p == 0 {
        let outcome = solve_generalized_matching(inst)?;
        return Ok(TallReport { omega_star: outcome.value(), outcome, probes: 0 });
    }
    let prep = match prepare_tall(inst)? {
        Ok(p) => p,
        Err(outcome) => return Ok(TallReport { outcome, omega_star: None, probes: 0 }),
    };
    let normal = &prep.normal;
    let g: Vec<i64> = normal.g.iter().map(|b| b.unwrap()).collect();
    let u = z_bound(normal, &g)?;
    let mut f = FEval::with_expand_cap(&normal.c, &normal.mm, u, i64::MAX)?;
    let guesses: Vec<Vec<i64>> = (0..1u64 << normal.p)
        .map(|mask| (0..normal.p).map(|k| (mask >> k & 1) as i64).collect())
        .collect();
    let mut probes = 0usize;
    let mut feasible = |omega: i64, f: &mut FEval| -> Result<Option<(Vec<i64>, Vec<i64>)>> {
        probes += 1;
        for t in &guesses {
            let state = TallSearchState::new(normal, t, omega)?;
            if let Some(v) = feasibility_tall(&state, normal, f, box_cap)? {
                return Ok(Some((state.y(&v), state.image(normal, &v)?.1)));
            }
        }
        Ok(None)
    };
    let (mut lo, mut hi) = prep.bracket;
    let Some(mut best) = feasible(hi, &mut f)? else {
        return Ok(TallReport { outcome: Outcome::Infeasible, omega_star: None, probes });
    };
    // Invariant: `hi` is feasible with witness `best`, everything below `lo` is not.
    while lo < hi {
        let mid = lo + (hi - lo).div_euclid(2);
        match feasible(mid, &mut f)? {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid + 1,
        }
    }
    let (y, z) = best;
    let x = f.solution(&z)?.ok_or_else(|| Error::Certificate("witness z has no perfect matching".into()))?;
    let mut sol = y;
    sol.extend(x);
    let value = normal.check(&sol).map_err(|e| Error::Certificate(format!("tall witness: {e}")))?;
    if value != hi as i128 {
        return Err(Error::Certificate(format!("tall witness has value {value}, threshold {hi}")));
    }
    let solution = prep.map.pull_back(&sol)?;
    let value = fit(inst.objective_value(&solution))?;
    let omega_star = fit(hi as i128 + prep.map.offset())?;
    debug_assert_eq!(omega_star, value);
    Ok(TallReport { outcome: Outcome::Optimal { value, solution }, omega_star: Some(omega_star), probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Ext, Matrix};

    fn single_edge() -> IlpInstance {
        let mut inst = IlpInstance::empty(1, 0, 2, 1);
        inst.t = Matrix::from_rows(&[vec![1], vec![1]], 1);
        inst.mm = Matrix::from_rows(&[vec![1], vec![1]], 1);
        inst.b = vec![2, 2];
        inst.e = vec![Ext::Finite(0)];
        inst.g = vec![Ext::Finite(2)];
        inst.a = vec![0];
        inst.c = vec![1];
        inst.l = vec![Ext::Finite(0)];
        inst.u = vec![Ext::PosInf];
        inst
    }

    #[test]
    fn single_edge_optimum() {
        let rep = solve_tall(&single_edge()).unwrap();
        assert_eq!(rep.outcome, Outcome::Optimal { value: 0, solution: vec![2, 0] });
    }

    #[test]
    fn single_edge_feasibility() {
        let inst = single_edge();
        let mut f = FEval::new(&inst.c, &inst.mm, 4).unwrap();
        let state = TallSearchState::new(&inst, &[0], 0).unwrap();
        assert_eq!(state.r, vec![0, 0]);
        let v = feasibility_tall(&state, &inst, &mut f, DEFAULT_BOX_CAP).unwrap().unwrap();
        assert_eq!(v, vec![1]);
        assert_eq!(state.y(&v), vec![2]);
        let empty = TallSearchState { hi: vec![-1], ..state };
        assert_eq!(feasibility_tall(&empty, &inst, &mut f, DEFAULT_BOX_CAP).unwrap(), None);
    }

    #[test]
    fn odd_total_is_infeasible() {
        // Every column has an even column sum, b has an odd total.
        let mut inst = single_edge();
        inst.b = vec![2, 1];
        assert_eq!(solve_tall(&inst).unwrap().outcome, Outcome::Infeasible);
    }

    #[test]
    fn no_y_delegates() {
        let inst = IlpInstance::generalized(
            Matrix::from_rows(&[vec![1], vec![1]], 1),
            vec![3, 3],
            vec![2],
            vec![Ext::Finite(0)],
            vec![Ext::PosInf],
        );
        assert_eq!(solve_tall(&inst).unwrap().outcome.value(), Some(6));
    }
}
