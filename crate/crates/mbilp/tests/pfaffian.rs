use mbilp::instance::{simple_incidence, Ext, IlpInstance, Matrix};
use mbilp::oracle::enumerate_perfect_matchings;
use mbilp::pfaffian::{
    exact_matching_by_enumeration, exact_matching_objective, isolation_sample, isolation_sample_stream,
    isolation_weights, pfaffian_division_free, ExactMatchingOutcome, TutteInstance,
};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

    fn matchings(&self) -> Vec<Vec<usize>> {
        enumerate_perfect_matchings(self.m, &self.edges)
            .unwrap()
            .into_iter()
            .filter(|mt| mt.iter().map(|&j| self.w[j]).sum::<i64>() == self.d)
            .collect()
    }
}

/// A random graph containing a planted perfect matching, with `d` taken
/// from that matching so the instance is feasible.
fn random_feasible(rng: &mut ChaCha8Rng, max_m: usize, max_c: i64) -> Exact {
    let m = 2 * rng.gen_range(1..=max_m / 2);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = perm.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    let planted = edges.clone();
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

#[test]
fn never_below_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for round in 0..150 {
        let mut ex = random_feasible(&mut rng, 10, 4);
        if round % 3 == 0 {
            ex.d += 1;
        }
        let truth = exact_matching_by_enumeration(&ex.instance()).unwrap();
        let r = exact_matching_objective(&ex.instance(), round, 3).unwrap();
        match (r.outcome, truth) {
            (ExactMatchingOutcome::Optimal { value }, Some(t)) => assert!(value >= t),
            (ExactMatchingOutcome::Optimal { .. }, None) => panic!("certificate for an infeasible instance"),
            (_, Some(_)) => assert!(r.fallback),
            _ => {}
        }
    }
}

#[test]
fn twenty_trials_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for round in 0..300u64 {
        let ex = random_feasible(&mut rng, 10, 5);
        let truth = exact_matching_by_enumeration(&ex.instance()).unwrap().unwrap();
        let r = exact_matching_objective(&ex.instance(), 1000 + round, 20).unwrap();
        assert_eq!(r.outcome, ExactMatchingOutcome::Optimal { value: truth }, "round {round}");
        assert!(!r.fallback);
    }
}

#[test]
fn isolation_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut tested = 0;
    while tested < 5 {
        let ex = random_feasible(&mut rng, 8, 1);
        let feasible = ex.matchings();
        let cost = |mt: &Vec<usize>| mt.iter().map(|&j| ex.c[j]).sum::<i64>();
        let opt = feasible.iter().map(cost).min().unwrap();
        let optima: Vec<&Vec<usize>> = feasible.iter().filter(|mt| cost(mt) == opt).collect();
        if optima.len() < 2 {
            continue;
        }
        tested += 1;
        let mut unique = 0;
        for t in 0..500u64 {
            let z = isolation_sample_stream(ex.edges.len(), 77, t);
            let w = isolation_weights(&ex.c, ex.m, &z).unwrap();
            let weight = |mt: &Vec<usize>| mt.iter().map(|&j| w[j]).sum::<u64>();
            let best = feasible.iter().map(weight).min().unwrap();
            if feasible.iter().filter(|mt| weight(mt) == best).count() == 1 {
                unique += 1;
            }
        }
        assert!(unique as f64 >= 0.45 * 500.0, "isolated in {unique} of 500");
    }
}

#[test]
fn truncation_keeps_target_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for round in 0..60 {
        let ex = random_feasible(&mut rng, 6, 3);
        let z = isolation_sample(ex.edges.len(), round);
        let weights = isolation_weights(&ex.c, ex.m, &z).unwrap();
        let coef: Vec<usize> = ex.w.iter().map(|&v| v as usize).collect();
        let d1 = ex.d as usize;
        let tutte = TutteInstance { m: ex.m, edges: ex.edges.clone(), weights: weights.clone(), coef: coef.clone(), d1 };
        let full_cap = ex.m * 2;
        let wide = TutteInstance { m: ex.m, edges: ex.edges.clone(), weights, coef, d1: full_cap };
        let full = pfaffian_division_free(&wide.matrix(), full_cap).unwrap();
        assert_eq!(tutte.certificate().unwrap(), full.coeff(d1));
        assert!(!full.coeff(d1).is_zero() || ex.matchings().len() >= 2);
    }
}

#[test]
fn isolation_histogram_is_uniform() {
    let samples = 100_000u64;
    let mut counts = [0u64; 4];
    for seed in 0..samples / 2 {
        for v in isolation_sample(2, seed) {
            counts[(v - 1) as usize] += 1;
        }
    }
    let n = samples as f64;
    let sigma = (n * 0.25 * 0.75).sqrt();
    for c in counts {
        assert!((c as f64 - n / 4.0).abs() <= 3.0 * sigma, "{counts:?}");
    }
}
