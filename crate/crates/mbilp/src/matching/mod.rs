//! Minimum-cost perfect matching, evaluation of `f_{c,M}`, the generalized
//! matching solver and parity-constrained optimization over `P_{r,U}`.

mod blossom;
mod gm;

use std::collections::HashMap;

use crate::{Error, Result};

pub use blossom::max_weight_matching;
pub use gm::{f_cm, f_cm_capped, f_cm_with_solution, parity_constrained_opt, solve_generalized_matching, ParityOpt, F_CM_CAP};

/// Value of `f_{c,M}`: an integer or +∞ (ordered above every integer).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FValue {
    Finite(i64),
    Infinite,
}

impl FValue {
    pub fn finite(self) -> Option<i64> {
        match self {
            FValue::Finite(v) => Some(v),
            FValue::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, FValue::Finite(_))
    }
}

impl std::fmt::Display for FValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FValue::Finite(v) => write!(f, "{v}"),
            FValue::Infinite => write!(f, "inf"),
        }
    }
}

/// A perfect matching given by edge indices, with its total cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub cost: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Bitmask dynamic program, exact for m ≤ 22.
    Dp,
    /// Weighted blossom algorithm.
    Blossom,
    /// DP for m ≤ 16, blossom above.
    Auto,
}

pub const DP_MAX_VERTICES: usize = 22;

fn check_simple(m: usize, edges: &[(usize, usize)]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for &(a, b) in edges {
        if a == b || a >= m || b >= m {
            return Err(Error::Precondition(format!("edge ({a},{b}) is not a simple edge on {m} vertices")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::Precondition(format!("duplicate edge ({a},{b})")));
        }
    }
    Ok(())
}

/// Exact minimum-cost perfect matching on a simple graph; `None` when no
/// perfect matching exists.
pub fn min_cost_perfect_matching(m: usize, edges: &[(usize, usize)], costs: &[i64]) -> Result<Option<Matching>> {
    min_cost_perfect_matching_with(Engine::Auto, m, edges, costs)
}

pub fn min_cost_perfect_matching_with(
    engine: Engine,
    m: usize,
    edges: &[(usize, usize)],
    costs: &[i64],
) -> Result<Option<Matching>> {
    check_simple(m, edges)?;
    assert_eq!(edges.len(), costs.len());
    if m % 2 == 1 {
        return Ok(None);
    }
    match engine {
        Engine::Dp => dp_matching(m, edges, costs),
        Engine::Blossom => Ok(blossom_matching(m, edges, costs)),
        Engine::Auto if m <= 16 => dp_matching(m, edges, costs),
        Engine::Auto => Ok(blossom_matching(m, edges, costs)),
    }
}

/// Processes vertex subsets in increasing order, always matching the lowest
/// unmatched vertex next.
fn dp_matching(m: usize, edges: &[(usize, usize)], costs: &[i64]) -> Result<Option<Matching>> {
    if m > DP_MAX_VERTICES {
        return Err(Error::Cap(format!("matching DP needs m <= {DP_MAX_VERTICES}, got {m}")));
    }
    if m == 0 {
        return Ok(Some(Matching { edges: vec![], cost: 0 }));
    }
    let mut adj = vec![Vec::new(); m];
    for (j, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, j));
        adj[b].push((a, j));
    }
    let size = 1usize << m;
    let full = size - 1;
    let mut best = vec![i64::MAX; size];
    let mut via = vec![u32::MAX; size];
    best[0] = 0;
    for mask in 0..full {
        let cur = best[mask];
        if cur == i64::MAX {
            continue;
        }
        let v = (!mask).trailing_zeros() as usize;
        for &(w, j) in &adj[v] {
            if mask & (1 << w) == 0 {
                let next = mask | 1 << v | 1 << w;
                let cost = cur + costs[j];
                if cost < best[next] {
                    best[next] = cost;
                    via[next] = j as u32;
                }
            }
        }
    }
    if best[full] == i64::MAX {
        return Ok(None);
    }
    let mut chosen = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let j = via[mask] as usize;
        chosen.push(j);
        mask &= !(1 << edges[j].0 | 1 << edges[j].1);
    }
    chosen.sort_unstable();
    Ok(Some(Matching { edges: chosen, cost: best[full] }))
}

/// Maximum-cardinality matching with weights `2·(cmax + 1 − c_j)`; among
/// perfect matchings this maximizes exactly `−Σc_j` up to a constant.
fn blossom_matching(m: usize, edges: &[(usize, usize)], costs: &[i64]) -> Option<Matching> {
    if m == 0 {
        return Some(Matching { edges: vec![], cost: 0 });
    }
    let cmax = costs.iter().copied().max().unwrap_or(0);
    let weighted: Vec<(usize, usize, i64)> =
        edges.iter().zip(costs).map(|(&(a, b), &c)| (a, b, 2 * (cmax + 1 - c))).collect();
    let mate = max_weight_matching(m, &weighted, true);
    if mate.iter().any(|x| x.is_none()) {
        return None;
    }
    let index: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(j, &(a, b))| ((a.min(b), a.max(b)), j)).collect();
    let mut chosen: Vec<usize> = (0..m)
        .filter_map(|v| {
            let w = mate[v].unwrap();
            (v < w).then(|| index[&(v, w)])
        })
        .collect();
    chosen.sort_unstable();
    let cost = chosen.iter().map(|&j| costs[j]).sum();
    Some(Matching { edges: chosen, cost })
}

/// Memoized `f_{c,M}` for a simple graph over a box `0 ≤ z ≤ cap`:
/// `f(z) = min over edges j at the lowest i with z_i > 0 of c_j + f(z − M_j)`.
/// Exact because some edge at `i` carries a unit in every perfect z-matching.
pub struct FcmTable {
    m: usize,
    cap: Vec<i64>,
    stride: Vec<usize>,
    adj: Vec<Vec<(usize, usize)>>,
    costs: Vec<i64>,
    /// `None` = not computed; `Some(None)` = ∞.
    memo: Vec<Option<Option<(i64, u32)>>>,
}

impl FcmTable {
    pub fn new(m: usize, edges: &[(usize, usize)], costs: &[i64], cap: &[i64]) -> Result<Self> {
        check_simple(m, edges)?;
        let mut stride = vec![1usize; m];
        let mut size = 1usize;
        for i in 0..m {
            stride[i] = size;
            size = size
                .checked_mul(cap[i] as usize + 1)
                .filter(|&s| s <= 1 << 24)
                .ok_or_else(|| Error::Cap("f table box too large".into()))?;
        }
        let mut adj = vec![Vec::new(); m];
        for (j, &(a, b)) in edges.iter().enumerate() {
            adj[a].push((b, j));
            adj[b].push((a, j));
        }
        Ok(FcmTable { m, cap: cap.to_vec(), stride, adj, costs: costs.to_vec(), memo: vec![None; size] })
    }

    fn key(&self, z: &[i64]) -> usize {
        z.iter().zip(&self.stride).map(|(&v, &s)| v as usize * s).sum()
    }

    fn in_box(&self, z: &[i64]) -> bool {
        z.iter().zip(&self.cap).all(|(&v, &c)| 0 <= v && v <= c)
    }

    fn eval(&mut self, z: &mut Vec<i64>) -> Option<(i64, u32)> {
        let key = self.key(z);
        if let Some(v) = self.memo[key] {
            return v;
        }
        let res = match z.iter().position(|&v| v > 0) {
            None => Some((0, u32::MAX)),
            Some(i) => {
                let mut best: Option<(i64, u32)> = None;
                for idx in 0..self.adj[i].len() {
                    let (k, j) = self.adj[i][idx];
                    if z[k] == 0 {
                        continue;
                    }
                    z[i] -= 1;
                    z[k] -= 1;
                    let sub = self.eval(z);
                    z[i] += 1;
                    z[k] += 1;
                    if let Some((v, _)) = sub {
                        let cand = v + self.costs[j];
                        if best.is_none_or(|(b, _)| cand < b) {
                            best = Some((cand, j as u32));
                        }
                    }
                }
                best
            }
        };
        self.memo[key] = Some(res);
        res
    }

    pub fn value(&mut self, z: &[i64]) -> FValue {
        if z.iter().any(|&v| v < 0) {
            return FValue::Infinite;
        }
        assert!(z.len() == self.m && self.in_box(z), "z outside the table box");
        match self.eval(&mut z.to_vec()) {
            Some((v, _)) => FValue::Finite(v),
            None => FValue::Infinite,
        }
    }

    /// An optimal perfect z-matching as edge multiplicities.
    pub fn solution(&mut self, z: &[i64], n: usize) -> Option<Vec<i64>> {
        let mut z = z.to_vec();
        self.eval(&mut z)?;
        let mut x = vec![0i64; n];
        while let Some(i) = z.iter().position(|&v| v > 0) {
            let (_, j) = self.eval(&mut z).unwrap();
            let j = j as usize;
            x[j] += 1;
            let k = self.adj[i].iter().find(|p| p.1 == j).unwrap().0;
            z[i] -= 1;
            z[k] -= 1;
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_perfect_matchings;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, m: usize, density: f64) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if rng.gen_bool(density) {
                    e.push((a, b));
                }
            }
        }
        e
    }

    #[test]
    fn small_examples() {
        let one = min_cost_perfect_matching(2, &[(0, 1)], &[7]).unwrap().unwrap();
        assert_eq!(one, Matching { edges: vec![0], cost: 7 });
        let c4 = [(0, 1), (1, 2), (2, 3), (0, 3)];
        let best = min_cost_perfect_matching(4, &c4, &[1, 5, 1, 5]).unwrap().unwrap();
        assert_eq!(best, Matching { edges: vec![0, 2], cost: 2 });
        assert!(min_cost_perfect_matching(3, &[(0, 1), (1, 2), (0, 2)], &[1, 1, 1]).unwrap().is_none());
        assert!(min_cost_perfect_matching(2, &[(0, 1), (1, 0)], &[1, 1]).is_err());
    }

    #[test]
    fn engines_agree_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = 2 * rng.gen_range(0..=5);
            let edges = random_graph(&mut rng, m, 0.5);
            let costs: Vec<i64> = edges.iter().map(|_| rng.gen_range(-5..=9)).collect();
            let truth = enumerate_perfect_matchings(m, &edges)
                .unwrap()
                .iter()
                .map(|mt| mt.iter().map(|&j| costs[j]).sum::<i64>())
                .min();
            for engine in [Engine::Dp, Engine::Blossom] {
                let got = min_cost_perfect_matching_with(engine, m, &edges, &costs).unwrap();
                assert_eq!(got.as_ref().map(|x| x.cost), truth, "{engine:?} {edges:?} {costs:?}");
                if let Some(mt) = got {
                    let mut deg = vec![0; m];
                    for &j in &mt.edges {
                        deg[edges[j].0] += 1;
                        deg[edges[j].1] += 1;
                    }
                    assert!(deg.iter().all(|&d| d == 1));
                }
            }
        }
    }

    #[test]
    fn blossom_agrees_with_dp_on_larger_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let m = 2 * rng.gen_range(5..=9);
            let edges = random_graph(&mut rng, m, 0.35);
            let costs: Vec<i64> = edges.iter().map(|_| rng.gen_range(0..=20)).collect();
            let dp = min_cost_perfect_matching_with(Engine::Dp, m, &edges, &costs).unwrap();
            let bl = min_cost_perfect_matching_with(Engine::Blossom, m, &edges, &costs).unwrap();
            assert_eq!(dp.map(|x| x.cost), bl.map(|x| x.cost));
        }
    }

    #[test]
    fn fcm_table_small_values() {
        let k3 = [(0, 1), (1, 2), (0, 2)];
        let mut t = FcmTable::new(3, &k3, &[1, 1, 1], &[4, 4, 4]).unwrap();
        assert_eq!(t.value(&[1, 1, 1]), FValue::Infinite);
        assert_eq!(t.value(&[2, 2, 2]), FValue::Finite(3));
        assert_eq!(t.value(&[0, 0, 0]), FValue::Finite(0));
        assert_eq!(t.solution(&[2, 2, 2], 3), Some(vec![1, 1, 1]));
        let mut e = FcmTable::new(2, &[(0, 1)], &[5], &[3, 3]).unwrap();
        assert_eq!(e.value(&[3, 3]), FValue::Finite(15));
    }
}
