//! 2-step decompositions of `f_{c,M}`, the SBO certificate check, the
//! closing step, lattice convexity scans and membership in `P_{r,U}`.

use std::collections::{HashMap, VecDeque};

use num_traits::{Signed, Zero};

use crate::instance::{incidence_graph, Matrix};
use crate::lp::{LpProblem, LpStatus};
use crate::matching::{f_cm_capped, FValue, FcmTable, F_CM_CAP};
use crate::numeric::{rat, Rational};
use crate::{precondition, Error, Result};

/// Evaluates `f_{c,M}` with a memo table on a box and the expansion route
/// outside it (or everywhere, when the box is too large to tabulate).
pub struct FEval {
    c: Vec<i64>,
    mm: Matrix,
    table: Option<FcmTable>,
    cap: Vec<i64>,
    expand_cap: i64,
    extra: HashMap<Vec<i64>, FValue>,
}

impl FEval {
    /// `box_cap` bounds each coordinate of the memoized region; points
    /// outside it are expanded if `‖z‖₁ ≤ F_CM_CAP`.
    pub fn new(c: &[i64], mm: &Matrix, box_cap: i64) -> Result<Self> {
        Self::with_expand_cap(c, mm, box_cap, F_CM_CAP)
    }

    /// As [`FEval::new`] with a custom limit on `‖z‖₁` for the expansion route.
    pub fn with_expand_cap(c: &[i64], mm: &Matrix, box_cap: i64, expand_cap: i64) -> Result<Self> {
        let edges = incidence_graph(mm)?
            .simple_edges()
            .ok_or_else(|| Error::Precondition("f_{c,M} needs a simple graph".into()))?;
        let cap = vec![box_cap.max(0); mm.rows()];
        let table = match FcmTable::new(mm.rows(), &edges, c, &cap) {
            Ok(t) => Some(t),
            Err(Error::Cap(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(FEval { c: c.to_vec(), mm: mm.clone(), table, cap, expand_cap, extra: HashMap::new() })
    }

    pub fn value(&mut self, z: &[i64]) -> Result<FValue> {
        if z.iter().any(|&v| v < 0) {
            return Ok(FValue::Infinite);
        }
        if let Some(table) = self.table.as_mut() {
            if z.iter().zip(&self.cap).all(|(&v, &c)| v <= c) {
                return Ok(table.value(z));
            }
        }
        if let Some(&v) = self.extra.get(z) {
            return Ok(v);
        }
        let v = f_cm_capped(&self.c, &self.mm, z, self.expand_cap)?.0;
        self.extra.insert(z.to_vec(), v);
        Ok(v)
    }

    /// An optimal perfect z-matching, if `z` is in the domain.
    pub fn solution(&mut self, z: &[i64]) -> Result<Option<Vec<i64>>> {
        if z.iter().any(|&v| v < 0) {
            return Ok(None);
        }
        if let Some(table) = self.table.as_mut() {
            if z.iter().zip(&self.cap).all(|(&v, &c)| v <= c) {
                return Ok(table.solution(z, self.mm.cols()));
            }
        }
        Ok(f_cm_capped(&self.c, &self.mm, z, self.expand_cap)?.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoStepDecomposition {
    pub z1: Vec<i64>,
    pub z2: Vec<i64>,
    pub steps: Vec<Vec<i64>>,
    pub gains: Vec<i64>,
}

impl TwoStepDecomposition {
    /// Checks `‖p‖₁ = 2`, `p ⊑ z2 − z1` and `Σ p = z2 − z1`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let d: Vec<i64> = self.z2.iter().zip(&self.z1).map(|(a, b)| a - b).collect();
        let mut sum = vec![0i64; d.len()];
        for (k, p) in self.steps.iter().enumerate() {
            if p.iter().map(|v| v.abs()).sum::<i64>() != 2 {
                return Err(format!("step {k} does not have 1-norm 2"));
            }
            if p.iter().zip(&d).any(|(&pi, &di)| pi.abs() > di.abs() || pi * di < 0) {
                return Err(format!("step {k} is not conformal to z2 − z1"));
            }
            for (s, &pi) in sum.iter_mut().zip(p) {
                *s += pi;
            }
        }
        if sum != d {
            return Err("steps do not sum to z2 − z1".into());
        }
        if self.gains.len() != self.steps.len() {
            return Err("one gain per step required".into());
        }
        Ok(())
    }
}

/// Matching in `G_{z̄}` associated with `x`: each unit of `x_j` takes the
/// lowest free copy of both endpoints. Entries are `(j, copy1, copy2)`.
fn associated_matching(edges: &[(usize, usize)], x: &[i64], m: usize) -> Vec<(usize, usize, usize)> {
    let mut next = vec![0usize; m];
    let mut out = Vec::new();
    for (j, &(a, b)) in edges.iter().enumerate() {
        for _ in 0..x[j] {
            out.push((j, next[a], next[b]));
            next[a] += 1;
            next[b] += 1;
        }
    }
    out
}

fn cost(c: &[i64], x: &[i64]) -> i64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Splits `x2 − x1` into alternating paths of the symmetric difference of
/// associated matchings in `G_{z̄}`, `z̄ = max(z1, z2)`. Path `k` with edge
/// difference `d` gives the step `M d` and the gain `cᵀd`; cycles have
/// `M d = 0` and are dropped.
pub fn two_step_decompose(
    c: &[i64],
    mm: &Matrix,
    z1: &[i64],
    z2: &[i64],
    x1: &[i64],
    x2: &[i64],
) -> Result<TwoStepDecomposition> {
    let hi = z1.iter().chain(z2).copied().max().unwrap_or(0).clamp(0, 8);
    let mut f = FEval::new(c, mm, hi)?;
    two_step_decompose_with(&mut f, c, mm, z1, z2, x1, x2)
}

/// [`two_step_decompose`] with a shared evaluator for the optimality checks.
pub fn two_step_decompose_with(
    f: &mut FEval,
    c: &[i64],
    mm: &Matrix,
    z1: &[i64],
    z2: &[i64],
    x1: &[i64],
    x2: &[i64],
) -> Result<TwoStepDecomposition> {
    let m = mm.rows();
    let edges = incidence_graph(mm)?
        .simple_edges()
        .ok_or_else(|| Error::Precondition("two_step_decompose needs a simple graph".into()))?;
    for (z, x, name) in [(z1, x1, "x1"), (z2, x2, "x2")] {
        if x.iter().any(|&v| v < 0) || mm.mul_vec(x).iter().zip(z).any(|(&a, &b)| a != b as i128) {
            return Err(Error::Certificate(format!("{name} is not a perfect z-matching")));
        }
        match f.value(z)? {
            FValue::Finite(v) if v == cost(c, x) => {}
            _ => return Err(Error::Certificate(format!("{name} is not of minimum cost"))),
        }
    }
    let zbar: Vec<i64> = z1.iter().zip(z2).map(|(&a, &b)| a.max(b)).collect();
    // Copy vertices are numbered per original vertex.
    let mut base = vec![0usize; m];
    let mut total = 0;
    for v in 0..m {
        base[v] = total;
        total += zbar[v] as usize;
    }
    let mut side: Vec<[Option<(usize, usize)>; 2]> = vec![[None, None]; total];
    let m1 = associated_matching(&edges, x1, m);
    let m2 = associated_matching(&edges, x2, m);
    let s1: std::collections::HashSet<_> = m1.iter().copied().collect();
    let s2: std::collections::HashSet<_> = m2.iter().copied().collect();
    for (which, list, other) in [(0usize, &m1, &s2), (1usize, &m2, &s1)] {
        for &(j, a, b) in list {
            if other.contains(&(j, a, b)) {
                continue;
            }
            let (va, vb) = (base[edges[j].0] + a, base[edges[j].1] + b);
            side[va][which] = Some((j, vb));
            side[vb][which] = Some((j, va));
        }
    }
    let mut used = vec![false; total];
    let mut steps = Vec::new();
    let mut gains = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| -> Vec<i64> {
        let mut d = vec![0i64; edges.len()];
        let mut cur = start;
        used[cur] = true;
        let mut which = if side[cur][0].is_some() { 0 } else { 1 };
        while let Some((j, nxt)) = side[cur][which] {
            d[j] += if which == 1 { 1 } else { -1 };
            cur = nxt;
            if used[cur] {
                break;
            }
            used[cur] = true;
            which = 1 - which;
        }
        d
    };
    for v in 0..total {
        let deg = side[v].iter().filter(|s| s.is_some()).count();
        if deg == 1 && !used[v] {
            let d = walk(v, &mut used);
            let p: Vec<i64> = mm.mul_vec(&d).into_iter().map(|x| x as i64).collect();
            steps.push(p);
            gains.push(cost(c, &d));
        }
    }
    for v in 0..total {
        if !used[v] && side[v][0].is_some() {
            let d = walk(v, &mut used);
            if mm.mul_vec(&d).iter().any(|&x| x != 0) || cost(c, &d) != 0 {
                return Err(Error::Certificate("alternating cycle changes z or the cost".into()));
            }
        }
    }
    let dec = TwoStepDecomposition { z1: z1.to_vec(), z2: z2.to_vec(), steps, gains };
    dec.validate().map_err(Error::Certificate)?;
    if dec.gains.iter().sum::<i64>() != cost(c, x2) - cost(c, x1) {
        return Err(Error::Certificate("gains do not telescope".into()));
    }
    Ok(dec)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SboVerdict {
    Pass,
    /// The decomposition itself is malformed.
    Malformed(String),
    /// `f(z2) ≠ f(z1) + Σ g`.
    Telescoping,
    /// `f(z1 + Σ_{k∈I} p_k) > f(z1) + Σ_{k∈I} g_k` for this `I` (0-based).
    Subset(Vec<usize>),
}

/// Largest decomposition length accepted by [`check_sbo_certificate`].
pub const SBO_MAX_STEPS: usize = 20;

/// Checks both conditions of the SBO definition for all `2^ℓ` subsets.
pub fn check_sbo_certificate(f: &mut FEval, dec: &TwoStepDecomposition) -> Result<SboVerdict> {
    let l = dec.steps.len();
    if l > SBO_MAX_STEPS {
        return precondition(format!("SBO check limited to {SBO_MAX_STEPS} steps, got {l}"));
    }
    if let Err(msg) = dec.validate() {
        return Ok(SboVerdict::Malformed(msg));
    }
    let FValue::Finite(f1) = f.value(&dec.z1)? else {
        return Ok(SboVerdict::Malformed("z1 is outside the domain".into()));
    };
    for mask in 1u32..(1u32 << l) {
        let mut z = dec.z1.clone();
        let mut bound = f1;
        for k in (0..l).filter(|k| mask >> k & 1 == 1) {
            for (zi, pi) in z.iter_mut().zip(&dec.steps[k]) {
                *zi += pi;
            }
            bound += dec.gains[k];
        }
        if f.value(&z)? > FValue::Finite(bound) {
            return Ok(SboVerdict::Subset((0..l).filter(|k| mask >> k & 1 == 1).collect()));
        }
    }
    if f.value(&dec.z2)? != FValue::Finite(f1 + dec.gains.iter().sum::<i64>()) {
        return Ok(SboVerdict::Telescoping);
    }
    Ok(SboVerdict::Pass)
}

/// Steps forming a shortest cycle through `i_star` in the multigraph with
/// one edge per step between its two nonzero coordinates (a loop for a ±2
/// entry). Ties go to the smallest step indices.
fn shortest_cycle(steps: &[Vec<i64>], i_star: usize, m: usize) -> Option<Vec<usize>> {
    let ends: Vec<(usize, usize)> = steps
        .iter()
        .map(|p| {
            let nz: Vec<usize> = (0..m).filter(|&i| p[i] != 0).collect();
            if nz.len() == 1 {
                (nz[0], nz[0])
            } else {
                (nz[0], nz[1])
            }
        })
        .collect();
    if let Some(k) = ends.iter().position(|&(a, b)| a == i_star && b == i_star) {
        return Some(vec![k]);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (k, &(a, b)) in ends.iter().enumerate() {
        if a != b {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
    }
    let mut best: Option<Vec<usize>> = None;
    for &(start, first) in &adj[i_star] {
        // BFS from `start` back to `i_star` without reusing `first`.
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; m];
        let mut seen = vec![false; m];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut found = start == i_star;
        while let Some(u) = queue.pop_front() {
            if found {
                break;
            }
            for &(w, k) in &adj[u] {
                if k == first || seen[w] {
                    continue;
                }
                seen[w] = true;
                prev[w] = Some((u, k));
                if w == i_star {
                    found = true;
                    break;
                }
                queue.push_back(w);
            }
        }
        if !found {
            continue;
        }
        let mut cycle = vec![first];
        let mut cur = i_star;
        while let Some((u, k)) = prev[cur] {
            cycle.push(k);
            cur = u;
        }
        if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
            best = Some(cycle);
        }
    }
    best
}

/// Moves `z1` and `z2` two units closer at `i_star` along a cycle of the
/// decomposition of `z2 − z1`, checking every property of the result.
pub fn closing_step(
    f: &mut FEval,
    z1: &[i64],
    z2: &[i64],
    i_star: usize,
    dec: &TwoStepDecomposition,
) -> Result<(Vec<i64>, Vec<i64>)> {
    let m = z1.len();
    if z1.iter().zip(z2).any(|(a, b)| (a - b).rem_euclid(2) != 0) {
        return precondition("closing step needs z1 ≡ z2 (mod 2)");
    }
    if (z1[i_star] - z2[i_star]).abs() < 2 {
        return precondition("closing step needs |z1 − z2| ≥ 2 at i*");
    }
    if dec.z1 != z1 || dec.z2 != z2 {
        return precondition("decomposition does not connect z1 and z2");
    }
    let cycle = shortest_cycle(&dec.steps, i_star, m)
        .ok_or_else(|| Error::Precondition(format!("coordinate {i_star} is isolated in the step graph")))?;
    let mut mv = vec![0i64; m];
    for &k in &cycle {
        for (s, p) in mv.iter_mut().zip(&dec.steps[k]) {
            *s += p;
        }
    }
    let z1n: Vec<i64> = z1.iter().zip(&mv).map(|(a, b)| a + b).collect();
    let z2n: Vec<i64> = z2.iter().zip(&mv).map(|(a, b)| a - b).collect();
    let sign = (z1[i_star] - z2[i_star]).signum();
    let ok = mv.iter().all(|&v| v == 0 || v.abs() == 2)
        && z1n[i_star] == z1[i_star] - 2 * sign
        && z2n[i_star] == z2[i_star] + 2 * sign
        && (0..m).all(|i| z1[i] != z2[i] || (z1n[i] == z1[i] && z2n[i] == z2[i]));
    if !ok {
        return Err(Error::Certificate("closing step broke a structural property".into()));
    }
    let before = add_f(f.value(z1)?, f.value(z2)?);
    let after = add_f(f.value(&z1n)?, f.value(&z2n)?);
    if after > before {
        return Err(Error::Certificate("closing step increased f(z1) + f(z2)".into()));
    }
    Ok((z1n, z2n))
}

fn add_f(a: FValue, b: FValue) -> FValue {
    match (a, b) {
        (FValue::Finite(x), FValue::Finite(y)) => FValue::Finite(x + y),
        _ => FValue::Infinite,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexityCheck {
    pub pass: bool,
    /// `f(Σ λ z)`.
    pub lhs: FValue,
    /// `Σ λ f(z)`, `None` when some weighted term is ∞.
    pub rhs: Option<Rational>,
}

/// `f(Σ λ_k z_k) ≤ Σ λ_k f(z_k)` for points in one parity class whose
/// combination is integral and in the same class.
pub fn check_lattice_convexity(f: &mut FEval, points: &[Vec<i64>], lambdas: &[Rational]) -> Result<ConvexityCheck> {
    if points.is_empty() || points.len() != lambdas.len() {
        return precondition("one multiplier per point required");
    }
    if lambdas.iter().any(|l| l.is_negative()) || lambdas.iter().sum::<Rational>() != rat(1) {
        return precondition("multipliers must be nonnegative and sum to 1");
    }
    let m = points[0].len();
    let r: Vec<i64> = points[0].iter().map(|v| v.rem_euclid(2)).collect();
    if points.iter().any(|z| z.iter().zip(&r).any(|(a, b)| a.rem_euclid(2) != *b)) {
        return precondition("points are not in one parity class");
    }
    let comb: Vec<Rational> = (0..m)
        .map(|i| points.iter().zip(lambdas).map(|(z, l)| l * rat(z[i])).sum())
        .collect();
    if comb.iter().any(|v| !v.is_integer()) {
        return precondition("the combination is not integral");
    }
    let z: Vec<i64> = comb.iter().map(|v| crate::numeric::floor_i64(v).unwrap()).collect();
    if z.iter().zip(&r).any(|(a, b)| a.rem_euclid(2) != *b) {
        return precondition("the combination is off the lattice 2Z^m + r");
    }
    let lhs = f.value(&z)?;
    let mut rhs = Rational::zero();
    for (zk, l) in points.iter().zip(lambdas) {
        if l.is_zero() {
            continue;
        }
        match f.value(zk)? {
            FValue::Finite(v) => rhs += l * rat(v),
            FValue::Infinite => return Ok(ConvexityCheck { pass: true, lhs, rhs: None }),
        }
    }
    let pass = matches!(lhs, FValue::Finite(v) if rat(v) <= rhs);
    Ok(ConvexityCheck { pass, lhs, rhs: Some(rhs) })
}

/// A convex combination that violates lattice convexity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexityViolation {
    pub points: Vec<Vec<i64>>,
    /// Numerators over `den`.
    pub weights: Vec<i64>,
    pub den: i64,
}

/// All multiplier triples `(a, b, c)/d` with `d ∈ {2, 3, 4}` and at least
/// two nonzero entries.
fn lambda_grid() -> Vec<([i64; 3], i64)> {
    let mut out = Vec::new();
    for d in 2..=4 {
        for a in 0..=d {
            for b in 0..=d - a {
                let c = d - a - b;
                if [a, b, c].iter().filter(|&&v| v > 0).count() >= 2 {
                    out.push(([a, b, c], d));
                }
            }
        }
    }
    out
}

/// Exhaustive scan over unordered triples of domain points in `[0, hi]^m`
/// sharing a parity class, with multipliers from a small grid. Returns the
/// first violation, if any.
pub fn lattice_convexity_scan(c: &[i64], mm: &Matrix, hi: i64) -> Result<Option<ConvexityViolation>> {
    let m = mm.rows();
    let mut f = FEval::new(c, mm, 2 * hi)?;
    let mut classes: HashMap<Vec<i64>, Vec<(Vec<i64>, i64)>> = HashMap::new();
    for z in lattice_box(m, hi) {
        if let FValue::Finite(v) = f.value(&z)? {
            classes.entry(z.iter().map(|x| x % 2).collect()).or_default().push((z, v));
        }
    }
    let grid = lambda_grid();
    let mut keys: Vec<_> = classes.keys().cloned().collect();
    keys.sort();
    for key in keys {
        let pts = &classes[&key];
        for i in 0..pts.len() {
            for j in i..pts.len() {
                for k in j..pts.len() {
                    let trio = [&pts[i], &pts[j], &pts[k]];
                    for &(w, d) in &grid {
                        let mut z = vec![0i64; m];
                        let mut ok = true;
                        for t in 0..m {
                            let s: i64 = (0..3).map(|q| w[q] * trio[q].0[t]).sum();
                            if s % d != 0 || (s / d - key[t]) % 2 != 0 {
                                ok = false;
                                break;
                            }
                            z[t] = s / d;
                        }
                        if !ok {
                            continue;
                        }
                        let rhs: i64 = (0..3).map(|q| w[q] * trio[q].1).sum();
                        let fine = matches!(f.value(&z)?, FValue::Finite(v) if v * d <= rhs);
                        if !fine {
                            return Ok(Some(ConvexityViolation {
                                points: trio.iter().map(|p| p.0.clone()).collect(),
                                weights: w.to_vec(),
                                den: d,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// All integer vectors in `[0, hi]^m`, first coordinate fastest.
pub fn lattice_box(m: usize, hi: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut z = vec![0i64; m];
    loop {
        out.push(z.clone());
        let Some(i) = z.iter().position(|&v| v < hi) else { break };
        z[i] += 1;
        z[..i].fill(0);
    }
    out
}

/// Caps for [`pr_membership`].
pub const PR_MAX_M: usize = 5;
pub const PR_MAX_U: i64 = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrMembership {
    Inside,
    /// `αᵀq > αᵀx` for every `x ∈ P_{r,U}`.
    Outside { alpha: Vec<Rational> },
}

/// The generators `(f(z), z)` of `P_{r,U}` besides the ray `(1, 0)`.
pub fn pr_generators(f: &mut FEval, m: usize, r: &[i64], u: i64) -> Result<Vec<(i64, Vec<i64>)>> {
    let mut out = Vec::new();
    for z in lattice_box(m, u) {
        if z.iter().zip(r).any(|(a, b)| (a - b).rem_euclid(2) != 0) {
            continue;
        }
        if let FValue::Finite(v) = f.value(&z)? {
            out.push((v, z));
        }
    }
    Ok(out)
}

/// Decides `q ∈ P_{r,U}` exactly by enumerating the generators and solving
/// a rational LP; outside points come with a separating `α` from a second
/// LP `max αᵀq − t` s.t. `αᵀs ≤ t` for all generators `s`, `α₀ ≤ 0`,
/// `−1 ≤ α ≤ 1`.
pub fn pr_membership(c: &[i64], mm: &Matrix, r: &[i64], u: i64, q: &[Rational]) -> Result<PrMembership> {
    let m = mm.rows();
    if m > PR_MAX_M || u > PR_MAX_U {
        return Err(Error::Cap(format!(
            "P_(r,U) membership enumerates generators only for m ≤ {PR_MAX_M}, U ≤ {PR_MAX_U}; use parity_constrained_opt to optimize instead"
        )));
    }
    if q.len() != m + 1 || r.len() != m || u < 0 {
        return precondition("pr_membership: dimension mismatch");
    }
    let mut f = FEval::new(c, mm, u)?;
    let gens = pr_generators(&mut f, m, r, u)?;
    if gens.is_empty() {
        return Ok(PrMembership::Outside { alpha: vec![Rational::zero(); m + 1] });
    }
    let s = |k: usize, i: usize| if i == 0 { rat(gens[k].0) } else { rat(gens[k].1[i - 1]) };
    // Variables: λ_k (one per generator), μ for the ray.
    let g = gens.len();
    let mut a = vec![vec![Rational::zero(); g + 1]; m + 2];
    for i in 0..=m {
        for k in 0..g {
            a[i][k] = s(k, i);
        }
    }
    a[0][g] = rat(1);
    for k in 0..g {
        a[m + 1][k] = rat(1);
    }
    let mut b: Vec<Rational> = q.to_vec();
    b.push(rat(1));
    let primal = LpProblem { a, b, c: vec![Rational::zero(); g + 1], lo: vec![Some(rat(0)); g + 1], hi: vec![None; g + 1] };
    if primal.solve().status == LpStatus::Optimal {
        return Ok(PrMembership::Inside);
    }
    // Variables: α (m + 1), t, slacks (g).
    let nv = m + 2 + g;
    let mut a = vec![vec![Rational::zero(); nv]; g];
    for k in 0..g {
        for i in 0..=m {
            a[k][i] = s(k, i);
        }
        a[k][m + 1] = rat(-1);
        a[k][m + 2 + k] = rat(1);
    }
    let mut obj = vec![Rational::zero(); nv];
    for i in 0..=m {
        obj[i] = -q[i].clone();
    }
    obj[m + 1] = rat(1);
    let mut lo = vec![Some(rat(-1)); m + 1];
    lo.push(None);
    lo.extend(std::iter::repeat_n(Some(rat(0)), g));
    let mut hi = vec![Some(rat(0))];
    hi.extend(std::iter::repeat_n(Some(rat(1)), m));
    hi.push(None);
    hi.extend(std::iter::repeat_n(None, g));
    let sep = LpProblem { a, b: vec![Rational::zero(); g], c: obj, lo, hi };
    let res = sep.solve();
    match (res.status, res.objective) {
        (LpStatus::Optimal, Some(v)) if v.is_negative() => {
            let alpha = res.x[..=m].to_vec();
            Ok(PrMembership::Outside { alpha })
        }
        _ => Err(Error::Certificate("no separating hyperplane for a point outside P_(r,U)".into())),
    }
}
