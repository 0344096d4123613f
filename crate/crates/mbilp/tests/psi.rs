use mbilp::instance::Ext;
use mbilp::psi::{even_cycle_feasible, even_cycles, gen_psi_hardness, is_sidon, psi_brute_force, PsiInstance, SimpleGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SimpleGraph {
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect();
    SimpleGraph::new(n, edges).unwrap()
}

fn assert_shape(psi: &PsiInstance) {
    let inst = &psi.inst;
    inst.validate().unwrap();
    assert_eq!(inst.p, 0);
    assert!(inst.w.to_rows().iter().flatten().all(|&v| v == 0 || v == 1));
    assert!(inst.c.iter().all(|&v| v == 0));
    assert!(inst.l.iter().all(|&b| b == Ext::Finite(0)));
    assert!(inst.u.iter().all(|&b| b == Ext::Finite(1)));
    assert!(inst.b.iter().all(|&b| b == 1));
    assert!(even_cycles(&inst.mm).is_some());
    let k = psi.sidon.len() as i64;
    assert!(is_sidon(&psi.sidon));
    assert!(psi.sidon.iter().all(|&a| a <= 2 * k * k));
}

fn maps_edges(pattern: &SimpleGraph, host: &SimpleGraph, partition: &[usize], phi: &[usize]) -> bool {
    phi.iter().enumerate().all(|(w, &v)| partition[v] == w)
        && pattern.edges.iter().all(|&(a, b)| host.has_edge(phi[a], phi[b]))
}

#[test]
fn feasibility_matches_subgraph_isomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut seen = [0usize; 2];
    for _ in 0..50 {
        let k = rng.gen_range(1..=3);
        let nv = rng.gen_range(k..=6);
        let pattern = random_graph(&mut rng, k, 0.7);
        let host = random_graph(&mut rng, nv, 0.5);
        let mut partition: Vec<usize> = (0..k).collect();
        partition.extend((k..nv).map(|_| rng.gen_range(0..k)));
        let psi = gen_psi_hardness(&pattern, &host, &partition).unwrap();
        assert_shape(&psi);
        let truth = psi_brute_force(&pattern, &host, &partition);
        let got = even_cycle_feasible(&psi.inst).unwrap();
        assert_eq!(got.is_some(), truth.is_some(), "{pattern:?} {host:?} {partition:?}");
        if let Some(x) = got {
            seen[0] += 1;
            let phi = psi.decode(&x).unwrap();
            assert!(maps_edges(&pattern, &host, &partition, &phi));
        } else {
            seen[1] += 1;
        }
    }
    assert!(seen[0] >= 10 && seen[1] >= 10, "{seen:?}");
}

#[test]
fn triangle_does_not_fit_in_four_cycle() {
    let triangle = SimpleGraph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
    let c4 = SimpleGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    let mut partitions = 0;
    for code in 0..81usize {
        let partition: Vec<usize> = (0..4).map(|i| code / 3usize.pow(i) % 3).collect();
        if (0..3).any(|w| !partition.contains(&w)) {
            continue;
        }
        let psi = gen_psi_hardness(&triangle, &c4, &partition).unwrap();
        assert_shape(&psi);
        assert_eq!(even_cycle_feasible(&psi.inst).unwrap(), None, "{partition:?}");
        partitions += 1;
    }
    assert_eq!(partitions, 36);
}

#[test]
fn edgeless_pattern_only_chooses_vertices() {
    let pattern = SimpleGraph::new(2, vec![]).unwrap();
    let host = SimpleGraph::new(3, vec![(0, 1)]).unwrap();
    let psi = gen_psi_hardness(&pattern, &host, &[0, 1, 1]).unwrap();
    assert_shape(&psi);
    let x = even_cycle_feasible(&psi.inst).unwrap().unwrap();
    let phi = psi.decode(&x).unwrap();
    assert_eq!(phi[0], 0);
    assert!(phi[1] == 1 || phi[1] == 2);
}
