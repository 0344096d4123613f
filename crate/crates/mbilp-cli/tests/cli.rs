use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mbilp_cli::RunRecord;

fn mbilp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbilp")).args(args).output().unwrap()
}

fn record(out: &Output) -> RunRecord {
    RunRecord::parse(&String::from_utf8_lossy(&out.stdout)).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, seed: u64, spec: &str) -> PathBuf {
    let path = dir.join(name);
    let out = mbilp(&["--seed", &seed.to_string(), "gen", "random", "--spec", spec, "--out", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn write_solution(dir: &Path, rec: &RunRecord) -> PathBuf {
    let path = dir.join("sol.txt");
    let text: Vec<String> = rec.solution.as_ref().unwrap().iter().map(i64::to_string).collect();
    std::fs::write(&path, text.join(" ")).unwrap();
    path
}

#[test]
fn solver_output_is_deterministic_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mut optimal = 0;
    for seed in 0..12u64 {
        let file = generate(dir.path(), "a.mbilp", seed, "p=0..2,h=0..2,m=1..4,n=1..5,delta=2");
        let args = ["--seed", "9", "solve", s(&file)];
        let (a, b) = (mbilp(&args), mbilp(&args));
        let (ra, rb) = (record(&a), record(&b));
        assert_eq!(ra.without_timing(), rb.without_timing(), "seed {seed}");
        let oracle = record(&mbilp(&["solve", s(&file), "--method", "bruteforce"]));
        assert_eq!(ra.status, oracle.status, "seed {seed}");
        assert_eq!(ra.value, oracle.value, "seed {seed}");
        if ra.status == "optimal" {
            assert_eq!(a.status.code(), Some(0));
            let sol = write_solution(dir.path(), &ra);
            let check = mbilp(&["check", s(&file), s(&sol)]);
            assert_eq!(check.status.code(), Some(0));
            assert_eq!(record(&check).value, ra.value);
            optimal += 1;
        } else {
            assert_eq!(a.status.code(), Some(1));
        }
    }
    assert!(optimal >= 4, "{optimal}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.mbilp");
    assert_eq!(mbilp(&["solve", s(&missing)]).status.code(), Some(2));
    assert_eq!(mbilp(&["solve"]).status.code(), Some(2));
    assert_eq!(mbilp(&["frobnicate"]).status.code(), Some(2));
    let junk = dir.path().join("junk.mbilp");
    std::fs::write(&junk, "not an instance").unwrap();
    assert_eq!(mbilp(&["solve", s(&junk)]).status.code(), Some(2));

    let file = generate(dir.path(), "a.mbilp", 1, "p=1,h=1,m=3,n=4,delta=2");
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2 3").unwrap();
    let out = mbilp(&["check", s(&file), s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(record(&out).status, "infeasible");
}

#[test]
fn proximity_family_has_gap_four() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("lb.mbilp");
    let out = mbilp(&["gen", "proximity-lb", "--p", "0", "--h", "1", "--delta", "1", "--k", "2", "--out", s(&file)]);
    assert!(out.status.success());
    let lp = record(&mbilp(&["lp", s(&file)]));
    assert_eq!(lp.status, "optimal");
    let solved = record(&mbilp(&["solve", s(&file)]));
    assert_eq!(solved.status, "optimal");
    let text = std::fs::read_to_string(&file).unwrap();
    let inst = mbilp::instance::parse_instance(&text).unwrap();
    let lb = mbilp::proximity::gen_proximity_lb(0, 1, 1, 2).unwrap();
    assert_eq!(inst, lb.inst);
    let x = solved.solution.unwrap();
    assert_eq!(x[lb.x2], 4);
    assert_eq!(lb.x2_integral, 4.into());
}

#[test]
fn normalization_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate(dir.path(), "a.mbilp", 5, "p=1,h=1,m=3,n=3,delta=2");
    let red = dir.path().join("n.mbilp");
    let out = mbilp(&["reduce", s(&file), "--to", "normalize", "--out", s(&red)]);
    assert!(out.status.success());
    assert_eq!(record(&out).status, "reduced");
    let solved = record(&mbilp(&["solve", s(&red)]));
    assert_eq!(solved.status, "optimal");
    let sol = write_solution(dir.path(), &solved);
    let map = dir.path().join("n.mbilp.map");
    let back = mbilp(&["reduce", s(&file), "--replay", s(&map), "--solution", s(&sol)]);
    assert_eq!(back.status.code(), Some(0));
    let oracle = record(&mbilp(&["solve", s(&file), "--method", "bruteforce"]));
    assert_eq!(record(&back).value, oracle.value);
}

#[test]
fn bench_agrees_with_oracle() {
    let out = mbilp(&["--seed", "3", "bench", "--count", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| &r[10] == "true"));
}
