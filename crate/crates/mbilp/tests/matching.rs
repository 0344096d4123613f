use mbilp::generators::{gen_random, GenSpec, GraphKind};
use mbilp::instance::{parse_instance, simple_incidence, Ext, IlpInstance};
use mbilp::matching::{
    f_cm, min_cost_perfect_matching, parity_constrained_opt, solve_generalized_matching, FValue, FcmTable, ParityOpt,
};
use mbilp::oracle::{brute_force_f, brute_force_solve, enumerate_perfect_matchings, OracleBudget, OracleResult};
use mbilp::Outcome;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG1: &str = include_str!("../../../instances/fig1.mbilp");

fn random_edges(rng: &mut ChaCha8Rng, m: usize, p: f64) -> Vec<(usize, usize)> {
    (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect()
}

#[test]
fn matching_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let m = rng.gen_range(0..=10);
        let edges = random_edges(&mut rng, m, 0.45);
        let costs: Vec<i64> = edges.iter().map(|_| rng.gen_range(-9..=9)).collect();
        let truth = enumerate_perfect_matchings(m, &edges)
            .unwrap()
            .iter()
            .map(|mt| mt.iter().map(|&j| costs[j]).sum::<i64>())
            .min();
        let got = min_cost_perfect_matching(m, &edges, &costs).unwrap();
        assert_eq!(got.map(|x| x.cost), truth);
    }
}

#[test]
fn f_equals_brute_force_on_small_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let m = rng.gen_range(1..=4);
        let edges = random_edges(&mut rng, m, 0.6);
        let c: Vec<i64> = edges.iter().map(|_| rng.gen_range(-3..=3)).collect();
        let mm = simple_incidence(m, &edges);
        let mut table = FcmTable::new(m, &edges, &c, &vec![4; m]).unwrap();
        let mut z = vec![0i64; m];
        loop {
            let truth = brute_force_f(&c, &mm, &z, OracleBudget::default()).unwrap();
            let got = f_cm(&c, &mm, &z).unwrap();
            assert_eq!(got.finite(), truth, "z={z:?} edges={edges:?} c={c:?}");
            assert_eq!(table.value(&z), got);
            let Some(i) = z.iter().position(|&v| v < 4) else { break };
            z[i] += 1;
            z[..i].fill(0);
        }
    }
}

#[test]
fn fig1_system_is_feasible() {
    let inst = parse_instance(FIG1).unwrap();
    match solve_generalized_matching(&inst).unwrap() {
        Outcome::Optimal { value, solution } => {
            assert_eq!(value, 0);
            assert!(inst.check(&solution).is_ok());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn generalized_matching_equals_brute_force() {
    let mut seen = [0usize; 2];
    for seed in 0..200u64 {
        let spec = GenSpec {
            m: (1, 4),
            n: (1, 5),
            bound_width: 3,
            negative_bounds: seed % 2 == 0,
            planted: seed % 3 != 0,
            graph: GraphKind::Bidirected,
            seed,
            ..GenSpec::default()
        };
        let inst = gen_random(&spec).unwrap();
        let truth = brute_force_solve(&inst, OracleBudget::default()).unwrap();
        let got = solve_generalized_matching(&inst).unwrap();
        match truth {
            OracleResult::Optimal { value, .. } => {
                seen[0] += 1;
                let Outcome::Optimal { value: v, solution } = got else { panic!("seed {seed}: {got:?}") };
                assert_eq!(v, value, "seed {seed}");
                assert_eq!(inst.check(&solution).unwrap(), value as i128);
            }
            OracleResult::Infeasible => {
                seen[1] += 1;
                assert_eq!(got, Outcome::Infeasible, "seed {seed}");
            }
            OracleResult::BudgetExceeded => unreachable!(),
        }
    }
    assert!(seen[0] > 50 && seen[1] > 10, "{seen:?}");
}

#[test]
fn unbounded_and_infeasible_with_infinite_bounds() {
    // Half-edge plus a self-loop at the same vertex: x0 + 2 x1 = 3.
    let mm = mbilp::Matrix::from_rows(&[vec![1, 2]], 2);
    let free = vec![Ext::NegInf; 2];
    let up = vec![Ext::PosInf; 2];
    let inst = IlpInstance::generalized(mm.clone(), vec![3], vec![1, 0], free.clone(), up.clone());
    assert_eq!(solve_generalized_matching(&inst).unwrap(), Outcome::Unbounded);
    let inst = IlpInstance::generalized(mm, vec![3], vec![1, 2], vec![Ext::Finite(0); 2], up);
    assert_eq!(solve_generalized_matching(&inst).unwrap().value(), Some(3));
}

/// Every `(f(z), z)` with `z ≡ r`, `0 ≤ z ≤ U`, `f(z) < ∞`.
fn domain(c: &[i64], mm: &mbilp::Matrix, r: &[i64], u: i64) -> Vec<(i64, Vec<i64>)> {
    let m = mm.rows();
    let mut out = Vec::new();
    let mut z = vec![0i64; m];
    loop {
        if z.iter().zip(r).all(|(a, b)| (a - b).rem_euclid(2) == 0) {
            if let FValue::Finite(v) = f_cm(c, mm, &z).unwrap() {
                out.push((v, z.clone()));
            }
        }
        let Some(i) = z.iter().position(|&v| v < u) else { break };
        z[i] += 1;
        z[..i].fill(0);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn parity_opt_is_minimal(seed in any::<u64>(), u in 0i64..=4, c0 in -1i64..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=4);
        let edges = random_edges(&mut rng, m, 0.6);
        let c: Vec<i64> = edges.iter().map(|_| rng.gen_range(-3..=3)).collect();
        let mm = simple_incidence(m, &edges);
        let r: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=1)).collect();
        let mut ct = vec![c0];
        ct.extend((0..m).map(|_| rng.gen_range(-3..=3)));
        let dom = domain(&c, &mm, &r, u);
        let res = parity_constrained_opt(&ct, &c, &mm, &r, u).unwrap();
        match res {
            ParityOpt::Empty => prop_assert!(dom.is_empty()),
            ParityOpt::Unbounded => prop_assert!(c0 < 0 && !dom.is_empty()),
            ParityOpt::Optimal { value, omega, z, x } => {
                prop_assert!(c0 >= 0);
                let member = dom.iter().find(|(_, zz)| *zz == z);
                prop_assert!(member.is_some());
                prop_assert_eq!(member.unwrap().0, omega);
                let xz: Vec<i64> = mm.mul_vec(&x).into_iter().map(|v| v as i64).collect();
                prop_assert_eq!(&xz, &z);
                for (w, zz) in &dom {
                    let other = c0 as i128 * *w as i128
                        + zz.iter().zip(&ct[1..]).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>();
                    prop_assert!(value <= other);
                }
            }
        }
    }
}
