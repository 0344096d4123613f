//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::error::Error;
use std::panic::catch_unwind;
use std::time::Instant;

use mbilp::circuits::{check_circuit_bound, enumerate_circuits, CIRCUIT_MAX_COLS};
use mbilp::convexity::{check_sbo_certificate, lattice_box, lattice_convexity_scan, two_step_decompose_with, FEval, SboVerdict};
use mbilp::generators::{gen_random, GenSpec, GraphKind};
use mbilp::graver::{graver_enumerate, graver_one_bound, solve_wide_graver};
use mbilp::instance::{simple_incidence, Ext, IlpInstance};
use mbilp::lp::{lp_relaxation_vertex, LpStatus};
use mbilp::matching::FcmTable;
use mbilp::mixed::{solve_mixed_with, MixedOptions};
use mbilp::numeric::{bareiss_det, floor_i64, rat};
use mbilp::oracle::{
    brute_force_all_optima, brute_force_solve, enumerate_feasible, enumerate_perfect_matchings, OracleBudget,
    OracleResult,
};
use mbilp::pfaffian::{
    exact_matching_by_enumeration, exact_matching_objective, isolation_sample_stream, isolation_weights, pfaffian,
    ExactMatchingOutcome,
};
use mbilp::proximity::{gen_proximity_lb, tight_rank};
use mbilp::psi::{even_cycle_feasible, even_cycles, gen_psi_hardness, psi_brute_force, SimpleGraph};
use mbilp::reduction::{
    condense_constraints, expand_gb, normalize_to_b_matching, reduce_coefficients_to_01, Reduced,
};
use mbilp::tall::solve_tall;
use mbilp::{Matrix, Outcome, Rational};
use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, Box<dyn Error>>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*).into());
        }
    };
}

fn truth(inst: &IlpInstance) -> Result<Outcome, Box<dyn Error>> {
    Ok(match brute_force_solve(inst, OracleBudget::default())? {
        OracleResult::Optimal { value, solution } => Outcome::Optimal { value, solution },
        OracleResult::Infeasible => Outcome::Infeasible,
        OracleResult::BudgetExceeded => return Err("brute force budget exceeded".into()),
    })
}

/// Same value as the oracle, and a solution that checks to that value.
fn agrees(inst: &IlpInstance, got: &Outcome, want: &Outcome) -> bool {
    match (got, want) {
        (Outcome::Optimal { value, solution }, Outcome::Optimal { value: v, .. }) => {
            value == v && inst.check(solution).ok() == Some(*v as i128)
        }
        _ => got == want,
    }
}

fn mixed_spec(seed: u64) -> GenSpec {
    GenSpec {
        p: (0, 2),
        h: (0, 2),
        m: (1, 4),
        n: (1, 6),
        delta: 2,
        bound_width: 3,
        negative_bounds: seed % 3 == 0,
        planted: seed % 5 != 0,
        seed,
        ..GenSpec::default()
    }
}

fn tall_spec(seed: u64) -> GenSpec {
    GenSpec { p: (1, 3), h: (0, 0), n: (1, 5), planted: seed % 4 != 0, ..mixed_spec(seed) }
}

fn wide_spec(seed: u64) -> GenSpec {
    GenSpec { p: (0, 0), negative_bounds: seed % 2 == 1, planted: seed % 4 != 0, ..mixed_spec(seed) }
}

const MIXED_COUNT: u64 = 200;
const SUITE_FAILURE_BUDGET: f64 = 1e-4;

fn mixed_oracle() -> Check {
    let opts = MixedOptions { failure_budget: SUITE_FAILURE_BUDGET / MIXED_COUNT as f64, ..MixedOptions::default() };
    let (mut optimal, mut failure) = (0, 0f64);
    for seed in 0..MIXED_COUNT {
        let inst = gen_random(&mixed_spec(seed))?;
        let want = truth(&inst)?;
        let rep = solve_mixed_with(&inst, &MixedOptions { seed, ..opts.clone() })?;
        ensure!(agrees(&inst, &rep.outcome, &want), "seed {seed}: got {:?}, oracle {:?}", rep.outcome, want);
        failure += rep.failure_bound;
        optimal += usize::from(want.value().is_some());
    }
    ensure!(failure <= SUITE_FAILURE_BUDGET, "suite failure bound {failure:e}");
    Ok(format!("{MIXED_COUNT} instances, {optimal} optimal, 0 mismatches, failure bound {failure:.2e}"))
}

fn tall_oracle() -> Check {
    let mut optimal = 0;
    for seed in 0..150u64 {
        let inst = gen_random(&tall_spec(seed))?;
        let want = truth(&inst)?;
        let rep = solve_tall(&inst)?;
        ensure!(agrees(&inst, &rep.outcome, &want), "seed {seed}: got {:?}, oracle {:?}", rep.outcome, want);
        optimal += usize::from(want.value().is_some());
    }
    Ok(format!("150 instances, {optimal} optimal, 0 mismatches"))
}

struct Graph {
    m: usize,
    edges: Vec<(usize, usize)>,
    c: Vec<i64>,
    mm: Matrix,
}

fn random_graph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=4);
    let edges: Vec<(usize, usize)> =
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.6)).collect();
    let c = edges.iter().map(|_| rng.gen_range(-3..=3)).collect();
    let mm = simple_incidence(m, &edges);
    Graph { m, edges, c, mm }
}

fn lattice_convexity() -> Check {
    for seed in 0..50u64 {
        let g = random_graph(seed);
        if let Some(v) = lattice_convexity_scan(&g.c, &g.mm, 4)? {
            return Err(format!("seed {seed}: {v:?}").into());
        }
    }
    Ok("50 graphs, [0,4]^m, no violation".into())
}

fn sbo_certificates() -> Check {
    let mut pairs = 0usize;
    for seed in 1000..1050u64 {
        let g = random_graph(seed);
        let hi = 4;
        let mut f = FEval::new(&g.c, &g.mm, hi)?;
        let mut table = FcmTable::new(g.m, &g.edges, &g.c, &vec![hi; g.m])?;
        let dom: Vec<(Vec<i64>, Vec<i64>)> = lattice_box(g.m, hi)
            .into_iter()
            .filter_map(|z| table.solution(&z, g.edges.len()).map(|x| (z, x)))
            .collect();
        for (z1, x1) in &dom {
            for (z2, x2) in &dom {
                let dec = two_step_decompose_with(&mut f, &g.c, &g.mm, z1, z2, x1, x2)?;
                let verdict = check_sbo_certificate(&mut f, &dec)?;
                ensure!(verdict == SboVerdict::Pass, "seed {seed} {z1:?} {z2:?}: {verdict:?}");
                pairs += 1;
            }
        }
    }
    Ok(format!("50 graphs, {pairs} domain pairs certified"))
}

fn circuit_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    let mut worst = rat(0);
    while tested < 100 {
        let (p, h, delta) = (rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(1..=2));
        let spec = GenSpec {
            p: (p, p),
            h: (h, h),
            m: (1, 4),
            n: (0, 8),
            delta,
            seed: rng.gen(),
            ..GenSpec::default()
        };
        let inst = gen_random(&spec)?;
        if inst.vars() > CIRCUIT_MAX_COLS {
            continue;
        }
        let rep = check_circuit_bound(&inst.full_matrix(), p, h, delta)?;
        ensure!(rep.pass, "p={p} h={h} Δ={delta}: c_inf {} > bound {}", rep.c_inf, rep.bound);
        worst = worst.max(rep.ratio.clone());
        tested += 1;
    }
    for seed in 0..100u64 {
        let m = 3 + (seed % 2) as usize;
        let spec = GenSpec { m: (m, m), n: (1, 3), graph: GraphKind::Simple, seed, ..GenSpec::default() };
        let inst = gen_random(&spec)?;
        let set = graver_enumerate(&inst.mm, 3, 0)?;
        ensure!(set.complete, "seed {seed}: Graver enumeration incomplete");
        ensure!(set.g_inf() <= 2, "seed {seed}: g_inf {}", set.g_inf());
        ensure!(set.g_one() <= graver_one_bound(inst.m), "seed {seed}: g_one {} for m={}", set.g_one(), inst.m);
        ensure!(graver_one_bound(inst.m) == 2 * inst.m as i64 + 1, "g_one bound formula");
    }
    Ok(format!("100 matrices (worst c_inf/bound {worst}), 100 matching blocks within g_inf ≤ 2, g_1 ≤ 2m+1"))
}

/// `max_j |x_j − v_j|` over integral `x` and rational `v`.
fn inf_dist(x: &[i64], v: &[Rational]) -> Rational {
    x.iter().zip(v).map(|(&a, b)| (rat(a) - b).abs()).max().unwrap_or_else(|| rat(0))
}

fn proximity() -> Check {
    let specs = (0..MIXED_COUNT)
        .map(mixed_spec)
        .chain((0..150).map(tall_spec))
        .chain((0..150).map(wide_spec));
    let mut tested = 0;
    for spec in specs {
        let inst = gen_random(&spec)?;
        if inst.vars() > CIRCUIT_MAX_COLS {
            continue;
        }
        let lp = lp_relaxation_vertex(&inst);
        if lp.status != LpStatus::Optimal {
            continue;
        }
        let (res, optima) = brute_force_all_optima(&inst, OracleBudget::default())?;
        if !matches!(res, OracleResult::Optimal { .. }) {
            continue;
        }
        let c_inf = enumerate_circuits(&inst.full_matrix())?.c_inf();
        let radius = rat(inst.vars() as i64) * Rational::from_integer(c_inf);
        let nearest = optima.iter().map(|x| inf_dist(x, &lp.x)).min().unwrap();
        ensure!(nearest <= radius, "seed {}: nearest optimum at {nearest}, radius {radius}", spec.seed);
        tested += 1;
    }
    ensure!(tested >= 100, "only {tested} instances had both an LP vertex and an integral optimum");
    Ok(format!("{tested} instances, nearest integral optimum within n·c_inf"))
}

/// Rigorous per-variable upper bounds from the LP: `max x_j` over the
/// relaxation, rounded down.
fn lp_caps(inst: &IlpInstance) -> Result<Vec<i64>, Box<dyn Error>> {
    let a = inst.full_matrix();
    let rhs = inst.rhs();
    let (lo, hi) = (inst.lower(), inst.upper());
    let nv = inst.vars();
    (0..nv)
        .map(|j| {
            let mut obj = vec![0; nv];
            obj[j] = -1;
            let probe = IlpInstance::from_full(0, 0, &a, &rhs, &obj, &lo, &hi);
            let lp = lp_relaxation_vertex(&probe);
            ensure!(lp.status == LpStatus::Optimal, "x_{j} unbounded in the relaxation");
            Ok(floor_i64(&-lp.objective.unwrap()).ok_or("cap overflow")?)
        })
        .collect()
}

/// Columns reordered so that each one completes a row; the exhaustive
/// search then prunes wrong values immediately. Returns the permutation.
fn chain_order(inst: &IlpInstance) -> Vec<usize> {
    let a = inst.full_matrix();
    let rhs = inst.rhs();
    let nv = inst.vars();
    let mut order: Vec<usize> = (0..nv).filter(|&j| (0..a.rows()).any(|i| rhs[i] != 0 && a.get(i, j) != 0)).collect();
    while order.len() < nv {
        let next = (0..a.rows())
            .find_map(|i| {
                let open: Vec<usize> = (0..nv).filter(|&j| a.get(i, j) != 0 && !order.contains(&j)).collect();
                (open.len() == 1).then(|| open[0])
            })
            .unwrap_or_else(|| (0..nv).find(|j| !order.contains(j)).unwrap());
        order.push(next);
    }
    order
}

fn proximity_lower_bound() -> Check {
    let mut cases = 0;
    for p in 0..=2usize {
        for h in 0..=2 - p {
            for delta in 1..=2i64 {
                for k in 1..=3usize {
                    let tag = format!("p={p} h={h} Δ={delta} k={k}");
                    let lb = gen_proximity_lb(p, h, delta, k)?;
                    let inst = &lb.inst;
                    let expected = k as i128 * (delta as i128 * k as i128).pow((p + h) as u32);
                    ensure!(lb.x2_integral == BigInt::from(expected), "{tag}: stated x2 {}", lb.x2_integral);

                    // The supplied point is a feasible basic solution of the relaxation and optimal.
                    let a = inst.full_matrix();
                    let rhs = inst.rhs();
                    for (i, &r) in rhs.iter().enumerate() {
                        let row: Rational = (0..inst.vars()).map(|j| rat(a.get(i, j)) * &lb.vertex[j]).sum();
                        ensure!(row == rat(r), "{tag}: vertex violates row {i}");
                    }
                    ensure!(lb.vertex.iter().all(|v| *v >= rat(0)), "{tag}: vertex below 0");
                    ensure!(tight_rank(inst, &lb.vertex) == inst.vars(), "{tag}: point is not a vertex");
                    let lp = lp_relaxation_vertex(inst);
                    let at_vertex: Rational =
                        inst.objective().iter().zip(&lb.vertex).map(|(&c, v)| rat(c) * v).sum();
                    ensure!(lp.objective == Some(at_vertex), "{tag}: vertex is not LP-optimal");

                    // Integral solutions inside the LP's own bounds: exactly one.
                    let caps = lp_caps(inst)?;
                    let order = chain_order(inst);
                    let cols: Vec<Vec<i64>> = order.iter().map(|&j| a.col(j)).collect();
                    let obj: Vec<i64> = order.iter().map(|&j| inst.objective()[j]).collect();
                    let boxed = IlpInstance::from_full(
                        0,
                        0,
                        &Matrix::from_cols(&cols, a.rows()),
                        &rhs,
                        &obj,
                        &vec![Ext::Finite(0); order.len()],
                        &order.iter().map(|&j| Ext::Finite(caps[j])).collect::<Vec<_>>(),
                    );
                    let all = enumerate_feasible(&boxed, OracleBudget::default())?.ok_or("enumeration budget")?;
                    ensure!(all.len() == 1, "{tag}: {} integral solutions", all.len());
                    let x2 = order.iter().position(|&j| j == lb.x2).unwrap();
                    ensure!(all[0][x2] as i128 == expected, "{tag}: x2 = {}, want {expected}", all[0][x2]);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} parameter choices, unique optimum with x2 = k(Δk)^(p+h), vertex exact"))
}

struct Exact {
    m: usize,
    edges: Vec<(usize, usize)>,
    c: Vec<i64>,
    w: Vec<i64>,
    d: i64,
}

impl Exact {
    fn instance(&self) -> IlpInstance {
        let n = self.edges.len();
        let mut inst = IlpInstance::generalized(
            simple_incidence(self.m, &self.edges),
            vec![1; self.m],
            self.c.clone(),
            vec![Ext::Finite(0); n],
            vec![Ext::Finite(1); n],
        );
        inst.h = 1;
        inst.w = Matrix::from_rows(&[self.w.clone()], n);
        inst.d = vec![self.d];
        inst
    }
}

fn random_feasible(rng: &mut ChaCha8Rng, max_m: usize, max_c: i64) -> Exact {
    let m = 2 * rng.gen_range(1..=max_m / 2);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let planted: Vec<(usize, usize)> = perm.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    let mut edges = planted.clone();
    for a in 0..m {
        for b in a + 1..m {
            if !planted.contains(&(a, b)) && rng.gen_bool(0.4) {
                edges.push((a, b));
            }
        }
    }
    edges.shuffle(rng);
    let c: Vec<i64> = edges.iter().map(|_| rng.gen_range(0..=max_c)).collect();
    let w: Vec<i64> = edges.iter().map(|_| rng.gen_range(0..=2)).collect();
    let d = planted.iter().map(|e| w[edges.iter().position(|x| x == e).unwrap()]).sum();
    Exact { m, edges, c, w, d }
}

fn pfaffian_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..50 {
        let m = 2 * rng.gen_range(1..=4);
        let mut a = vec![vec![BigInt::from(0); m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let v = BigInt::from(rng.gen_range(-6..=6));
                a[j][i] = -v.clone();
                a[i][j] = v;
            }
        }
        let pf = pfaffian(&a, &BigInt::from(1))?;
        ensure!(&pf * &pf == bareiss_det(&a), "round {round}: Pf² ≠ det");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for round in 0..300u64 {
        let inst = random_feasible(&mut rng, 10, 5).instance();
        let want = exact_matching_by_enumeration(&inst)?.ok_or("planted instance infeasible")?;
        let rep = exact_matching_objective(&inst, 5000 + round, 20)?;
        ensure!(rep.outcome == ExactMatchingOutcome::Optimal { value: want }, "round {round}: {:?} vs {want}", rep.outcome);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut tested, mut worst) = (0, 1f64);
    while tested < 5 {
        let ex = random_feasible(&mut rng, 8, 1);
        let feasible: Vec<Vec<usize>> = enumerate_perfect_matchings(ex.m, &ex.edges)?
            .into_iter()
            .filter(|mt| mt.iter().map(|&j| ex.w[j]).sum::<i64>() == ex.d)
            .collect();
        let cost = |mt: &Vec<usize>| mt.iter().map(|&j| ex.c[j]).sum::<i64>();
        let opt = feasible.iter().map(cost).min().unwrap();
        if feasible.iter().filter(|mt| cost(mt) == opt).count() < 2 {
            continue;
        }
        tested += 1;
        let mut unique = 0;
        for t in 0..500u64 {
            let z = isolation_sample_stream(ex.edges.len(), 77, t);
            let w = isolation_weights(&ex.c, ex.m, &z)?;
            let weight = |mt: &Vec<usize>| mt.iter().map(|&j| w[j]).sum::<u64>();
            let best = feasible.iter().map(weight).min().unwrap();
            unique += usize::from(feasible.iter().filter(|mt| weight(mt) == best).count() == 1);
        }
        let rate = unique as f64 / 500.0;
        ensure!(rate >= 0.45, "isolation rate {rate}");
        worst = worst.min(rate);
    }
    Ok(format!("Pf² = det on 50 matrices, 300 exact-matching optima, isolation rate ≥ {worst:.3}"))
}

/// Finite bounds for the unbounded `x` of a normalized instance; `W, M ≥ 0`
/// and `0 ≤ y ≤ g` give `x_j ≤ (rhs_i + Σ_k max(0, −A_ik) g_k) / A_ij`.
fn boxed(inst: &IlpInstance) -> IlpInstance {
    let mut out = inst.clone();
    let a = inst.full_matrix();
    let rhs = inst.rhs();
    let reach: Vec<i64> = (0..a.rows())
        .map(|i| rhs[i] + (0..inst.p).map(|k| (-a.get(i, k)).max(0) * inst.g[k].unwrap()).sum::<i64>())
        .collect();
    for j in 0..inst.n {
        let col = inst.p + j;
        let cap = (0..a.rows()).filter(|&i| a.get(i, col) > 0).map(|i| reach[i].max(0) / a.get(i, col)).min();
        out.u[j] = Ext::Finite(cap.unwrap_or(0));
    }
    out
}

fn feasible_set(inst: &IlpInstance) -> Result<BTreeSet<Vec<i64>>, Box<dyn Error>> {
    Ok(enumerate_feasible(inst, OracleBudget::default())?.ok_or("enumeration budget")?.into_iter().collect())
}

fn random_perfect_matching_form(rng: &mut ChaCha8Rng) -> Result<IlpInstance, Box<dyn Error>> {
    loop {
        let m = 2 * rng.gen_range(1..=3);
        let edges: Vec<(usize, usize)> =
            (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.6)).take(12).collect();
        if edges.is_empty() {
            continue;
        }
        let n = edges.len();
        let h = rng.gen_range(2..=3);
        let rows: Vec<Vec<i64>> = (0..h).map(|_| (0..n).map(|_| rng.gen_range(0..=2)).collect()).collect();
        let mut inst = IlpInstance::generalized(
            simple_incidence(m, &edges),
            vec![1; m],
            (0..n).map(|_| rng.gen_range(0..=3)).collect(),
            vec![Ext::Finite(0); n],
            vec![Ext::Finite(1); n],
        );
        inst.h = h;
        inst.w = Matrix::from_rows(&rows, n);
        inst.cc = Matrix::zeros(h, 0);
        inst.d = (0..h).map(|_| rng.gen_range(0..=m as i64)).collect();
        if rng.gen_bool(0.6) {
            let plain = IlpInstance::generalized(inst.mm.clone(), inst.b.clone(), inst.c.clone(), inst.l.clone(), inst.u.clone());
            let all = feasible_set(&plain)?;
            if let Some(x) = all.iter().nth(rng.gen_range(0..all.len().max(1))) {
                inst.d = inst.w.mul_vec(x).into_iter().map(|v| v as i64).collect();
            }
        }
        return Ok(inst);
    }
}

/// Optimal values agree up to the map's offset and every target optimum
/// pulls back to an optimum of the source.
fn preserves_optimum(
    source: &IlpInstance,
    target: &IlpInstance,
    map: &mbilp::reduction::SolutionMap,
    tag: &str,
) -> Result<bool, Box<dyn Error>> {
    let want = truth(source)?;
    let (res, optima) = brute_force_all_optima(target, OracleBudget::default())?;
    match (want, res) {
        (Outcome::Optimal { value, .. }, OracleResult::Optimal { value: v, .. }) => {
            ensure!(v as i128 + map.offset() == value as i128, "{tag}: {v} + {} ≠ {value}", map.offset());
            for sol in optima.iter().take(50) {
                let x = map.pull_back(sol)?;
                ensure!(source.check(&x).ok() == Some(value as i128), "{tag}: pulled-back solution not optimal");
            }
            Ok(true)
        }
        (Outcome::Infeasible, OracleResult::Infeasible) => Ok(false),
        (w, r) => Err(format!("{tag}: source {w:?}, target {r:?}").into()),
    }
}

fn reduction_soundness() -> Check {
    let mut optimal = 0;
    for seed in 0..200u64 {
        let spec = GenSpec { m: (1, 5), negative_bounds: seed % 2 == 0, planted: seed % 3 != 0, ..mixed_spec(seed) };
        let inst = gen_random(&spec)?;
        let (red, map) = normalize_to_b_matching(&inst)?;
        optimal += usize::from(preserves_optimum(&inst, &boxed(&red), &map, &format!("normalize seed {seed}"))?);
    }

    let mut coeff = 0;
    for seed in 0..100u64 {
        let mut inst = gen_random(&wide_spec(seed))?;
        let rows: Vec<Vec<i64>> = inst.w.to_rows().into_iter().map(|r| r.into_iter().map(i64::abs).collect()).collect();
        inst.w = Matrix::from_rows(&rows, inst.n);
        let (red, map) = reduce_coefficients_to_01(&inst)?;
        ensure!(red.w.to_rows().iter().flatten().all(|&v| v == 0 || v == 1), "seed {seed}: W not 0/1");
        coeff += usize::from(preserves_optimum(&inst, &red, &map, &format!("coefficients seed {seed}"))?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut expanded = 0;
    for seed in 0..60u64 {
        let spec = GenSpec { m: (2, 4), n: (1, 4), graph: GraphKind::Simple, seed, ..GenSpec::default() };
        let Ok(base) = gen_random(&spec) else { continue };
        let b: Vec<i64> = (0..base.m).map(|_| rng.gen_range(0..=2)).collect();
        let c: Vec<i64> = (0..base.n).map(|_| rng.gen_range(-3..=3)).collect();
        let open = IlpInstance::generalized(base.mm.clone(), b.clone(), c.clone(), vec![Ext::Finite(0); base.n], vec![Ext::PosInf; base.n]);
        let (exp, map) = expand_gb(&open, &b)?;
        // Every edge value is at most 2 since b ≤ 2.
        let capped = IlpInstance { u: vec![Ext::Finite(2); base.n], ..open };
        expanded += usize::from(preserves_optimum(&capped, &exp, &map, &format!("expansion seed {seed}"))?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut condensed = 0;
    for round in 0..150 {
        let inst = random_perfect_matching_form(&mut rng)?;
        let before = feasible_set(&inst)?;
        match condense_constraints(&inst)? {
            Reduced::Instance(cond, map) => {
                ensure!(cond.h == 1, "round {round}: {} rows left", cond.h);
                let after: BTreeSet<Vec<i64>> =
                    feasible_set(&cond)?.iter().map(|x| map.pull_back(x)).collect::<Result<_, _>>()?;
                ensure!(before == after, "round {round}: feasible sets differ");
            }
            Reduced::Infeasible { .. } => ensure!(before.is_empty(), "round {round}: wrongly infeasible"),
        }
        condensed += usize::from(!before.is_empty());
    }
    Ok(format!(
        "normalization 200 ({optimal} optimal), coefficient splitting 100 ({coeff}), expansion 60 ({expanded}), \
         condensation 150 ({condensed} nonempty)"
    ))
}

fn graver_route() -> Check {
    let (mut optimal, mut steps) = (0, 0u64);
    for seed in 0..150u64 {
        let inst = gen_random(&wide_spec(seed))?;
        let want = truth(&inst)?;
        let rep = solve_wide_graver(&inst)?;
        ensure!(agrees(&inst, &rep.outcome, &want), "seed {seed}: got {:?}, oracle {:?}", rep.outcome, want);
        for ph in [&rep.phase1, &rep.phase2] {
            ensure!(ph.trajectory.windows(2).all(|w| w[1] < w[0]), "seed {seed}: {:?}", ph.trajectory);
            ensure!(ph.within_bound(), "seed {seed}: {} queries > {}", ph.queries, ph.query_bound);
            steps += ph.steps;
        }
        optimal += usize::from(want.value().is_some());
    }
    Ok(format!("150 instances, {optimal} optimal, {steps} strictly improving steps, queries within bound"))
}

fn random_simple(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Result<SimpleGraph, Box<dyn Error>> {
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect();
    Ok(SimpleGraph::new(n, edges)?)
}

fn hardness_generator() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut yes = 0;
    for round in 0..50 {
        let k = rng.gen_range(1..=3);
        let nv = rng.gen_range(k..=6);
        let pattern = random_simple(&mut rng, k, 0.7)?;
        let host = random_simple(&mut rng, nv, 0.5)?;
        let mut partition: Vec<usize> = (0..k).collect();
        partition.extend((k..nv).map(|_| rng.gen_range(0..k)));
        let psi = gen_psi_hardness(&pattern, &host, &partition)?;
        let inst = &psi.inst;
        ensure!(even_cycles(&inst.mm).is_some(), "round {round}: M is not a union of even cycles");
        ensure!(inst.w.to_rows().iter().flatten().all(|&v| v == 0 || v == 1), "round {round}: W not 0/1");
        ensure!(inst.b.iter().all(|&v| v == 1), "round {round}: b ≠ 1");
        let want = psi_brute_force(&pattern, &host, &partition).is_some();
        let got = even_cycle_feasible(inst)?;
        ensure!(got.is_some() == want, "round {round}: feasible {} vs isomorphism {want}", got.is_some());
        if let Some(x) = got {
            let phi = psi.decode(&x).ok_or("undecodable solution")?;
            ensure!(
                pattern.edges.iter().all(|&(a, b)| host.has_edge(phi[a], phi[b])),
                "round {round}: decoded map drops an edge"
            );
            yes += 1;
        }
    }
    Ok(format!("50 pattern/host pairs, {yes} feasible, all agree with brute force"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("mixed solver equals brute force", mixed_oracle),
        ("tall solver equals brute force", tall_oracle),
        ("lattice convexity of f_{c,M}", lattice_convexity),
        ("two-step decomposition certificates", sbo_certificates),
        ("circuit and Graver norm bounds", circuit_bound),
        ("proximity n·c_inf", proximity),
        ("proximity lower-bound family", proximity_lower_bound),
        ("Pfaffian identities and exact matching", pfaffian_identities),
        ("reduction soundness", reduction_soundness),
        ("Graver augmentation route", graver_route),
        ("hardness generator", hardness_generator),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
