use mbilp::convexity::FEval;
use mbilp::generators::{gen_random, GenSpec};
use mbilp::oracle::{brute_force_solve, OracleBudget, OracleResult};
use mbilp::tall::{feasibility_tall, prepare_tall, solve_tall, tall_cross_check, TallSearchState, DEFAULT_BOX_CAP};
use mbilp::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tall_spec(seed: u64) -> GenSpec {
    GenSpec {
        p: (1, 3),
        h: (0, 0),
        m: (1, 4),
        n: (1, 5),
        delta: 2,
        bound_width: 3,
        negative_bounds: seed % 2 == 0,
        planted: seed % 4 != 0,
        seed,
        ..GenSpec::default()
    }
}

#[test]
fn tall_equals_brute_force() {
    let mut seen = [0usize; 2];
    for seed in 0..150u64 {
        let inst = gen_random(&tall_spec(seed)).unwrap();
        let truth = brute_force_solve(&inst, OracleBudget::default()).unwrap();
        let rep = solve_tall(&inst).unwrap();
        match truth {
            OracleResult::Optimal { value, .. } => {
                seen[0] += 1;
                let Outcome::Optimal { value: v, solution } = &rep.outcome else { panic!("seed {seed}: {rep:?}") };
                assert_eq!(*v, value, "seed {seed}");
                assert_eq!(rep.omega_star, Some(value), "seed {seed}");
                assert_eq!(inst.check(solution).unwrap(), value as i128);
            }
            OracleResult::Infeasible => {
                seen[1] += 1;
                assert_eq!(rep.outcome, Outcome::Infeasible, "seed {seed}");
            }
            OracleResult::BudgetExceeded => unreachable!(),
        }
    }
    assert!(seen[0] > 60 && seen[1] > 10, "{seen:?}");
}

#[test]
fn parity_and_membership_coherence() {
    let mut checked = 0usize;
    for seed in 1000..1060u64 {
        let inst = gen_random(&GenSpec { m: (1, 3), n: (1, 3), p: (1, 2), delta: 1, bound_width: 2, ..tall_spec(seed) }).unwrap();
        let Ok(prep) = prepare_tall(&inst).unwrap() else { continue };
        let normal = &prep.normal;
        if normal.m > 5 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for mask in 0..1u64 << normal.p {
            let t: Vec<i64> = (0..normal.p).map(|k| (mask >> k & 1) as i64).collect();
            let omega = rng.gen_range(prep.bracket.0..=prep.bracket.1.min(prep.bracket.0 + 20));
            let state = TallSearchState::new(normal, &t, omega).unwrap();
            let mut f = FEval::new(&normal.c, &normal.mm, state.u).unwrap();
            // The search itself must not disagree with the state.
            let _ = feasibility_tall(&state, normal, &mut f, DEFAULT_BOX_CAP).unwrap();
            if state.is_empty() {
                continue;
            }
            for _ in 0..20 {
                let v: Vec<i64> = state.lo.iter().zip(&state.hi).map(|(&a, &b)| rng.gen_range(a..=b)).collect();
                let (_, z) = state.image(normal, &v).unwrap();
                assert!(z.iter().zip(&state.r).all(|(a, b)| (a - b).rem_euclid(2) == 0));
                if let Some(agree) = tall_cross_check(&state, normal, &mut f, &v).unwrap() {
                    assert!(agree, "seed {seed} v={v:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 50, "{checked}");
}
