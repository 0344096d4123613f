//! Brute-force ground truth: exhaustive box search, perfect matching
//! enumeration and direct evaluation of `f_{c,M}`.

use crate::instance::{Ext, IlpInstance, Matrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Maximum number of search nodes.
    pub max_nodes: u64,
    /// Maximum width of any single variable range.
    pub range_cap: i64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_nodes: 10_000_000, range_cap: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Optimal { value: i64, solution: Vec<i64> },
    Infeasible,
    BudgetExceeded,
}

impl OracleResult {
    pub fn value(&self) -> Option<i64> {
        match self {
            OracleResult::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

struct Search<'a> {
    rows: Vec<Vec<i64>>,
    rhs: Vec<i128>,
    obj: &'a [i64],
    lo: Vec<i64>,
    hi: Vec<i64>,
    /// `suffix[i][k]`: (min, max) of row i over variables k.. within bounds.
    suffix: Vec<Vec<(i128, i128)>>,
    acc: Vec<i128>,
    cur: Vec<i64>,
    nodes: u64,
    budget: u64,
    best: Option<(i128, Vec<i64>)>,
    all: Option<Vec<Vec<i64>>>,
    exceeded: bool,
}

impl Search<'_> {
    fn feasible_prefix(&self, k: usize) -> bool {
        self.rows.iter().enumerate().all(|(i, _)| {
            let (mn, mx) = self.suffix[i][k];
            let need = self.rhs[i] - self.acc[i];
            mn <= need && need <= mx
        })
    }

    fn dfs(&mut self, k: usize) {
        if self.exceeded {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exceeded = true;
            return;
        }
        if !self.feasible_prefix(k) {
            return;
        }
        if k == self.lo.len() {
            let val: i128 = self.obj.iter().zip(&self.cur).map(|(&c, &v)| c as i128 * v as i128).sum();
            match &mut self.best {
                Some((b, sol)) if val < *b => {
                    *b = val;
                    sol.clone_from(&self.cur);
                    if let Some(all) = &mut self.all {
                        all.clear();
                        all.push(self.cur.clone());
                    }
                }
                Some((b, _)) if val == *b => {
                    if let Some(all) = &mut self.all {
                        all.push(self.cur.clone());
                    }
                }
                Some(_) => {}
                None => {
                    self.best = Some((val, self.cur.clone()));
                    if let Some(all) = &mut self.all {
                        all.push(self.cur.clone());
                    }
                }
            }
            return;
        }
        for v in self.lo[k]..=self.hi[k] {
            self.cur[k] = v;
            for i in 0..self.rows.len() {
                self.acc[i] += self.rows[i][k] as i128 * v as i128;
            }
            self.dfs(k + 1);
            for i in 0..self.rows.len() {
                self.acc[i] -= self.rows[i][k] as i128 * v as i128;
            }
            if self.exceeded {
                return;
            }
        }
    }
}

fn run(
    a: &Matrix,
    rhs: &[i64],
    obj: &[i64],
    lo: &[i64],
    hi: &[i64],
    budget: OracleBudget,
    collect_all: bool,
) -> (OracleResult, Vec<Vec<i64>>) {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(l, h)| h - l > budget.range_cap) {
        return (OracleResult::BudgetExceeded, vec![]);
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return (OracleResult::Infeasible, vec![]);
    }
    let rows = a.to_rows();
    let suffix = rows
        .iter()
        .map(|r| {
            let mut s = vec![(0i128, 0i128); n + 1];
            for k in (0..n).rev() {
                let x = r[k] as i128 * lo[k] as i128;
                let y = r[k] as i128 * hi[k] as i128;
                s[k] = (s[k + 1].0 + x.min(y), s[k + 1].1 + x.max(y));
            }
            s
        })
        .collect();
    let mut s = Search {
        rhs: rhs.iter().map(|&v| v as i128).collect(),
        acc: vec![0; rows.len()],
        rows,
        obj,
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        suffix,
        cur: lo.to_vec(),
        nodes: 0,
        budget: budget.max_nodes,
        best: None,
        all: collect_all.then(Vec::new),
        exceeded: false,
    };
    s.dfs(0);
    if s.exceeded {
        return (OracleResult::BudgetExceeded, vec![]);
    }
    match s.best {
        Some((v, solution)) => {
            let value = i64::try_from(v).expect("objective overflow");
            (OracleResult::Optimal { value, solution }, s.all.unwrap_or_default())
        }
        None => (OracleResult::Infeasible, vec![]),
    }
}

fn finite_box(inst: &IlpInstance) -> Result<(Vec<i64>, Vec<i64>)> {
    let lo: Option<Vec<i64>> = inst.lower().iter().map(|b| b.finite()).collect();
    let hi: Option<Vec<i64>> = inst.upper().iter().map(|b| b.finite()).collect();
    match (lo, hi) {
        (Some(l), Some(h)) => Ok((l, h)),
        _ => Err(Error::Precondition("brute force needs finite bounds or a box".into())),
    }
}

/// Exhaustive lexicographic search over the bound box; the first optimum in
/// lexicographic order is returned.
pub fn brute_force_solve(inst: &IlpInstance, budget: OracleBudget) -> Result<OracleResult> {
    let (lo, hi) = finite_box(inst)?;
    Ok(brute_force_in_box(inst, &lo, &hi, budget))
}

/// Exhaustive search over a caller-supplied box (intersected with the
/// instance bounds).
pub fn brute_force_in_box(inst: &IlpInstance, lo: &[i64], hi: &[i64], budget: OracleBudget) -> OracleResult {
    let (lo, hi) = clip(inst, lo, hi);
    run(&inst.full_matrix(), &inst.rhs(), &inst.objective(), &lo, &hi, budget, false).0
}

/// All optimal solutions within the bound box, in lexicographic order.
pub fn brute_force_all_optima(inst: &IlpInstance, budget: OracleBudget) -> Result<(OracleResult, Vec<Vec<i64>>)> {
    let (lo, hi) = finite_box(inst)?;
    Ok(run(&inst.full_matrix(), &inst.rhs(), &inst.objective(), &lo, &hi, budget, true))
}

/// All optima within a caller-supplied box.
pub fn brute_force_all_optima_in_box(
    inst: &IlpInstance,
    lo: &[i64],
    hi: &[i64],
    budget: OracleBudget,
) -> (OracleResult, Vec<Vec<i64>>) {
    let (lo, hi) = clip(inst, lo, hi);
    run(&inst.full_matrix(), &inst.rhs(), &inst.objective(), &lo, &hi, budget, true)
}

fn clip(inst: &IlpInstance, lo: &[i64], hi: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let l = inst
        .lower()
        .iter()
        .zip(lo)
        .map(|(b, &v)| match b {
            Ext::Finite(x) => v.max(*x),
            _ => v,
        })
        .collect();
    let h = inst
        .upper()
        .iter()
        .zip(hi)
        .map(|(b, &v)| match b {
            Ext::Finite(x) => v.min(*x),
            _ => v,
        })
        .collect();
    (l, h)
}

/// All feasible points of the bound box (objective ignored).
pub fn enumerate_feasible(inst: &IlpInstance, budget: OracleBudget) -> Result<Option<Vec<Vec<i64>>>> {
    let (lo, hi) = finite_box(inst)?;
    let zero = vec![0; inst.vars()];
    let (res, all) = run(&inst.full_matrix(), &inst.rhs(), &zero, &lo, &hi, budget, true);
    Ok(match res {
        OracleResult::BudgetExceeded => None,
        _ => Some(all),
    })
}

/// Every perfect matching of a (multi)graph on `m` vertices, built by
/// pairing the lowest uncovered vertex. Matchings are edge index lists.
pub fn enumerate_perfect_matchings(m: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    if m > 16 {
        return Err(Error::Cap(format!("perfect matching enumeration needs m <= 16, got {m}")));
    }
    let mut out = Vec::new();
    if m % 2 == 1 {
        return Ok(out);
    }
    let mut adj = vec![Vec::new(); m];
    for (j, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adj[a].push((j, b));
            adj[b].push((j, a));
        }
    }
    fn rec(
        adj: &[Vec<(usize, usize)>],
        covered: u32,
        full: u32,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if covered == full {
            let mut s = cur.clone();
            s.sort_unstable();
            out.push(s);
            return;
        }
        let v = (!covered).trailing_zeros() as usize;
        for &(j, w) in &adj[v] {
            if covered & (1 << w) == 0 {
                cur.push(j);
                rec(adj, covered | 1 << v | 1 << w, full, cur, out);
                cur.pop();
            }
        }
    }
    let full = (1u32 << m) - 1;
    rec(&adj, 0, full, &mut Vec::new(), &mut out);
    Ok(out)
}

/// `min{cᵀx : Mx = z, 0 ≤ x ≤ ‖z‖₁}` by exhaustive search; `None` is ∞.
pub fn brute_force_f(c: &[i64], mm: &Matrix, z: &[i64], budget: OracleBudget) -> Result<Option<i64>> {
    let cap: i64 = z.iter().map(|v| v.abs()).sum();
    let n = mm.cols();
    let inst = IlpInstance::generalized(
        mm.clone(),
        z.to_vec(),
        c.to_vec(),
        vec![Ext::Finite(0); n],
        vec![Ext::Finite(cap); n],
    );
    match brute_force_solve(&inst, budget)? {
        OracleResult::Optimal { value, .. } => Ok(Some(value)),
        OracleResult::Infeasible => Ok(None),
        OracleResult::BudgetExceeded => Err(Error::Cap("brute_force_f budget exceeded".into())),
    }
}
