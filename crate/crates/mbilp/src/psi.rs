//! Partitioned subgraph isomorphism as a wide instance with a 0/1 `W` and a
//! matching block made of disjoint even cycles.
//!
//! Given a pattern `H` with vertices `W(H)` and edges `F`, a host `G` with
//! vertices `V` and edges `E`, and a partition `V = ⋃ V_w`, we ask for
//! `φ(w) ∈ V_w` mapping every edge of `H` onto an edge of `G`. With a Sidon
//! sequence `a`, the base system is
//!
//! ```text
//! Σ_{v ∈ V_w1} a_v x_{w1 v} + Σ_{v ∈ V_w2} a_v x_{w2 v} − Σ_e (a_v1 + a_v2) x_{fe} = 0   f = w1w2 ∈ F
//! Σ_{v ∈ V_w} x_{wv} = 1                                                           w ∈ W(H)
//! Σ_e x_{fe} = 1                                                                   f ∈ F
//! ```

use std::collections::HashSet;

use crate::instance::{Ext, IlpInstance, Matrix};
use crate::oracle::{brute_force_solve, OracleBudget, OracleResult};
use crate::reduction::{add_quadrangles, reduce_coefficients_to_01};
use crate::{precondition, Error, Result};

/// Undirected simple graph on `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(a, b) in &edges {
            if a == b || a >= vertices || b >= vertices {
                return precondition(format!("bad edge ({a}, {b}) on {vertices} vertices"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return precondition(format!("duplicate edge ({a}, {b})"));
            }
        }
        Ok(SimpleGraph { vertices, edges })
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.iter().any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }

    /// Text form: the vertex count, then one `u v` pair per edge. `#`
    /// starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nums = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                nums.push(tok.parse::<usize>().map_err(|e| Error::Precondition(format!("bad token {tok:?}: {e}")))?);
            }
        }
        let Some((&n, rest)) = nums.split_first() else {
            return precondition("empty graph file");
        };
        if rest.len() % 2 != 0 {
            return precondition("odd number of edge endpoints");
        }
        SimpleGraph::new(n, rest.chunks(2).map(|p| (p[0], p[1])).collect())
    }
}

/// All pairwise sums `a_i + a_j` (`i ≤ j`) are distinct.
pub fn is_sidon(a: &[i64]) -> bool {
    let mut sums = HashSet::new();
    (0..a.len()).all(|i| (i..a.len()).all(|j| sums.insert(a[i] + a[j])))
}

/// Greedy Sidon sequence of length `k` starting at 1 (Mian–Chowla).
pub fn sidon_sequence(k: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(k);
    let mut sums = HashSet::new();
    let mut cand = 1i64;
    while out.len() < k {
        let new: Vec<i64> = out.iter().map(|&a| a + cand).chain([2 * cand]).collect();
        if new.iter().all(|s| !sums.contains(s)) {
            sums.extend(new);
            out.push(cand);
        }
        cand += 1;
    }
    debug_assert!(is_sidon(&out));
    out
}

/// The emitted instance and the column layout of its base variables.
#[derive(Clone, Debug)]
pub struct PsiInstance {
    pub inst: IlpInstance,
    pub sidon: Vec<i64>,
    /// Column `v` is `x_{partition[v], v}`.
    pub partition: Vec<usize>,
    pub pattern_edges: usize,
    pub host_edges: usize,
}

impl PsiInstance {
    /// Column of `x_{fe}`.
    pub fn edge_var(&self, f: usize, e: usize) -> usize {
        self.partition.len() + f * self.host_edges + e
    }

    /// `φ` read off a feasible solution.
    pub fn decode(&self, sol: &[i64]) -> Option<Vec<usize>> {
        let classes = self.partition.iter().max().map_or(0, |&c| c + 1);
        let mut phi = vec![None; classes];
        for (v, &w) in self.partition.iter().enumerate() {
            if sol[v] == 1 {
                if phi[w].is_some() {
                    return None;
                }
                phi[w] = Some(v);
            }
        }
        phi.into_iter().collect()
    }
}

/// Builds the hardness instance: base system, negative coefficients moved
/// onto quadrangle partners, quadrangles, then 0/1 coefficient splitting.
pub fn gen_psi_hardness(pattern: &SimpleGraph, host: &SimpleGraph, partition: &[usize]) -> Result<PsiInstance> {
    let k = pattern.vertices;
    if partition.len() != host.vertices {
        return precondition(format!("partition has {} entries for {} host vertices", partition.len(), host.vertices));
    }
    if let Some(&w) = partition.iter().find(|&&w| w >= k) {
        return precondition(format!("partition class {w} is not a pattern vertex"));
    }
    let nv = host.vertices;
    let (nf, ne) = (pattern.edges.len(), host.edges.len());
    let sidon = sidon_sequence(nv);
    let n = nv + nf * ne;
    let h = nf + k + nf;
    let mut w = Matrix::zeros(h, n);
    let mut d = vec![0i64; h];
    for (fi, &(w1, w2)) in pattern.edges.iter().enumerate() {
        for v in 0..nv {
            if partition[v] == w1 || partition[v] == w2 {
                w.set(fi, v, sidon[v]);
            }
        }
        for (ei, &(v1, v2)) in host.edges.iter().enumerate() {
            w.set(fi, nv + fi * ne + ei, -(sidon[v1] + sidon[v2]));
            w.set(nf + k + fi, nv + fi * ne + ei, 1);
        }
        d[nf + k + fi] = 1;
    }
    for v in 0..nv {
        w.set(nf + partition[v], v, 1);
    }
    for wv in 0..k {
        d[nf + wv] = 1;
    }

    // x_j = 1 − x2_j, where x2_j is the first quadrangle partner of j.
    let mut quad = add_quadrangles(&Matrix::zeros(h, n), &d)?;
    for i in 0..h {
        for j in 0..n {
            let v = w.get(i, j);
            if v >= 0 {
                quad.w.set(i, j, v);
            } else {
                let partner = n + 3 * j;
                quad.w.set(i, partner, quad.w.get(i, partner) - v);
                quad.d[i] -= v;
            }
        }
    }
    let (inst, _) = reduce_coefficients_to_01(&quad)?;
    Ok(PsiInstance { inst, sidon, partition: partition.to_vec(), pattern_edges: nf, host_edges: ne })
}

/// Brute-force partitioned subgraph isomorphism: some `φ(w) ∈ V_w` maps
/// every pattern edge to a host edge.
pub fn psi_brute_force(pattern: &SimpleGraph, host: &SimpleGraph, partition: &[usize]) -> Option<Vec<usize>> {
    let classes: Vec<Vec<usize>> =
        (0..pattern.vertices).map(|w| (0..host.vertices).filter(|&v| partition[v] == w).collect()).collect();
    let mut phi = vec![0usize; pattern.vertices];
    fn go(
        w: usize,
        phi: &mut Vec<usize>,
        classes: &[Vec<usize>],
        pattern: &SimpleGraph,
        host: &SimpleGraph,
    ) -> bool {
        if w == classes.len() {
            return true;
        }
        for &v in &classes[w] {
            phi[w] = v;
            let ok = pattern.edges.iter().all(|&(a, b)| {
                let (a, b) = (a.max(b), a.min(b));
                a != w || host.has_edge(phi[a], phi[b])
            });
            if ok && go(w + 1, phi, classes, pattern, host) {
                return true;
            }
        }
        false
    }
    go(0, &mut phi, &classes, pattern, host).then_some(phi)
}

/// The columns of `mm` split into cycles, each as two alternating classes
/// with the lowest column first. `None` unless `mm` is the incidence matrix
/// of a simple graph that is a disjoint union of even cycles.
pub fn even_cycles(mm: &Matrix) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
    let (m, n) = (mm.rows(), mm.cols());
    let mut ends = Vec::with_capacity(n);
    for j in 0..n {
        let col = mm.col(j);
        let nz: Vec<usize> = (0..m).filter(|&i| col[i] != 0).collect();
        if nz.len() != 2 || nz.iter().any(|&i| col[i] != 1) {
            return None;
        }
        ends.push((nz[0], nz[1]));
    }
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, &(a, b)) in ends.iter().enumerate() {
        at[a].push(j);
        at[b].push(j);
    }
    if at.iter().any(|v| v.len() != 2) || ends.iter().collect::<HashSet<_>>().len() != n {
        return None;
    }
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if used[start] {
            continue;
        }
        let (mut a_side, mut b_side) = (Vec::new(), Vec::new());
        let (mut j, mut vtx) = (start, ends[start].1);
        let mut parity = false;
        while !used[j] {
            used[j] = true;
            if parity { b_side.push(j) } else { a_side.push(j) }
            parity = !parity;
            let next = if at[vtx][0] == j { at[vtx][1] } else { at[vtx][0] };
            vtx = if ends[next].0 == vtx { ends[next].1 } else { ends[next].0 };
            j = next;
        }
        if j != start || parity {
            return None;
        }
        out.push((a_side, b_side));
    }
    Some(out)
}

/// Feasibility of `W x = d, M x = 1, 0 ≤ x ≤ 1` when `M` is a disjoint
/// union of even cycles. Each cycle has exactly two feasible 0/1 patterns,
/// so the system condenses to one binary variable per cycle.
pub fn even_cycle_feasible(inst: &IlpInstance) -> Result<Option<Vec<i64>>> {
    let binary = inst.l.iter().all(|&b| b == Ext::Finite(0)) && inst.u.iter().all(|&b| b == Ext::Finite(1));
    if inst.p != 0 || !binary || inst.b.iter().any(|&b| b != 1) {
        return precondition("even-cycle check needs p = 0, 0/1 bounds and b = 1");
    }
    let Some(cycles) = even_cycles(&inst.mm) else {
        return precondition("M is not a disjoint union of even cycles");
    };
    let k = cycles.len();
    let mut cond = IlpInstance::empty(0, inst.h, 0, k);
    cond.l = vec![Ext::Finite(0); k];
    cond.u = vec![Ext::Finite(1); k];
    for i in 0..inst.h {
        let mut rhs = inst.d[i] as i128;
        for (c, (a_side, b_side)) in cycles.iter().enumerate() {
            let sa: i64 = a_side.iter().map(|&j| inst.w.get(i, j)).sum();
            let sb: i64 = b_side.iter().map(|&j| inst.w.get(i, j)).sum();
            cond.w.set(i, c, sa - sb);
            rhs -= sb as i128;
        }
        cond.d[i] = i64::try_from(rhs).map_err(|_| Error::Overflow("even_cycle_feasible"))?;
    }
    match brute_force_solve(&cond, OracleBudget::default())? {
        OracleResult::Optimal { solution, .. } => {
            let mut x = vec![0i64; inst.n];
            for ((a_side, b_side), &y) in cycles.iter().zip(&solution) {
                for &j in a_side {
                    x[j] = y;
                }
                for &j in b_side {
                    x[j] = 1 - y;
                }
            }
            inst.check(&x).map_err(|v| Error::Certificate(format!("condensed solution rejected: {v}")))?;
            Ok(Some(x))
        }
        OracleResult::Infeasible => Ok(None),
        OracleResult::BudgetExceeded => Err(Error::Cap("even-cycle condensation budget exceeded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_sidon_prefix() {
        assert_eq!(sidon_sequence(8), vec![1, 2, 4, 8, 13, 21, 31, 45]);
        assert!(!is_sidon(&[1, 2, 3, 4]));
    }

    #[test]
    fn edge_into_edge() {
        let e = SimpleGraph::new(2, vec![(0, 1)]).unwrap();
        let psi = gen_psi_hardness(&e, &e, &[0, 1]).unwrap();
        let x = even_cycle_feasible(&psi.inst).unwrap().unwrap();
        assert_eq!(psi.decode(&x), Some(vec![0, 1]));
    }

    #[test]
    fn malformed_partition_is_rejected() {
        let e = SimpleGraph::new(2, vec![(0, 1)]).unwrap();
        assert!(gen_psi_hardness(&e, &e, &[0]).is_err());
        assert!(gen_psi_hardness(&e, &e, &[0, 2]).is_err());
    }

    #[test]
    fn parse_graph() {
        let g = SimpleGraph::parse("# C4\n4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        assert_eq!(g.edges.len(), 4);
        assert!(SimpleGraph::parse("2\n0 0\n").is_err());
    }
}
