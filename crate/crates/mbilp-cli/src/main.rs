use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mbilp::circuits::{check_circuit_bound, enumerate_circuits};
use mbilp::convexity::lattice_convexity_scan;
use mbilp::generators::{gen_random, GenSpec};
use mbilp::graver::{graver_enumerate, solve_wide_graver, DEFAULT_NORM_CAP};
use mbilp::instance::{parse_instance, serialize_instance, IlpInstance};
use mbilp::lp::{lp_relaxation_vertex, LpStatus};
use mbilp::matching::{f_cm_with_solution, solve_generalized_matching, FValue};
use mbilp::mixed::{solve_mixed_with, LeafEngine, MixedOptions};
use mbilp::oracle::{brute_force_solve, OracleBudget, OracleResult};
use mbilp::pfaffian::{exact_matching_objective, ExactMatchingOutcome};
use mbilp::proximity::{gen_proximity_lb, proximity_box};
use mbilp::psi::{gen_psi_hardness, SimpleGraph};
use mbilp::reduction::{
    condense_constraints, expand_gb, normalize_to_b_matching, parse_log, reduce_coefficients_to_01, replay, Reduced,
};
use mbilp::tall::{solve_tall_with, DEFAULT_BOX_CAP};
use mbilp::{Error, Outcome};
use mbilp_cli::{instance_hash, RunRecord};

#[derive(Parser)]
#[command(name = "mbilp", version, about = "Exact solvers for generalized matching ILPs with small backdoors")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Mixed,
    Graver,
    Tall,
    ExactMatching,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Auto,
    Pfaffian,
    Graver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReduceKind {
    /// Perfect b-matching form.
    Normalize,
    /// Perfect matching form; the input must be in b-matching form.
    Expand,
    /// One `W` row; the input must be in perfect matching form.
    Condense,
    /// `W` entries in {0, 1}.
    Coeff01,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Trials per randomized leaf; derived from a 1e-6 failure budget if absent.
        #[arg(long)]
        trials: Option<usize>,
        /// Cap on the y box per parity guess of the tall solver.
        #[arg(long, default_value_t = DEFAULT_BOX_CAP)]
        box_cap: u64,
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
    },
    /// Apply a reduction and write the result with a `.map` sidecar, or pull
    /// a solution back through a recorded map.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ReduceKind::Normalize)]
        to: ReduceKind,
        #[arg(long, required_unless_present = "replay")]
        out: Option<PathBuf>,
        #[arg(long, requires = "solution")]
        replay: Option<PathBuf>,
        #[arg(long, requires = "replay")]
        solution: Option<PathBuf>,
    },
    /// Verify a solution exactly.
    Check { file: PathBuf, solution: PathBuf },
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Graver basis of the constraint matrix within a norm cap.
    Graver {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NORM_CAP)]
        cap: i64,
    },
    /// Circuits of the constraint matrix and the explicit circuit bound.
    Circuits { file: PathBuf },
    /// Exact LP relaxation and proximity box.
    Lp { file: PathBuf },
    /// Evaluate f_{c,M}(z) on the matching block of a p = h = 0 instance.
    Fcm {
        file: PathBuf,
        /// Comma-separated right-hand side.
        #[arg(long)]
        z: String,
    },
    /// Scan f_{c,M} for lattice convexity violations on [0, hi]^m.
    Convexity {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        hi: i64,
    },
    /// Solve random instances with `auto` and brute force, as CSV.
    Bench {
        #[arg(long, default_value = "p=0..1,h=0..1,m=1..4,n=1..5,delta=2")]
        spec: String,
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random instance; see `GenSpec` keys (p, h, m, n, delta, width, ...).
    Random {
        #[arg(long, default_value = "")]
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Proximity lower-bound family.
    ProximityLb {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        delta: i64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partitioned subgraph isomorphism hardness instance.
    Psi {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Fail {
    Usage(String),
    Solver(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Solver(e)
    }
}

type Run = Result<u8, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<IlpInstance, Fail> {
    let inst = parse_instance(&read(path)?).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    inst.validate().map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    Ok(inst)
}

fn read_ints<T: std::str::FromStr>(path: &Path) -> Result<Vec<T>, Fail>
where
    T::Err: std::fmt::Display,
{
    read(path)?
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| Fail::Usage(format!("{}: bad number {t:?}: {e}", path.display()))))
        .collect()
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::Usage(format!("{}: {e}", p.display()))),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// Write errors on stdout (a closed pipe, say) are ignored.
fn emit(rec: &RunRecord) {
    let _ = write!(std::io::stdout().lock(), "{rec}");
}

/// The answer of one solver run.
struct Solved {
    method: &'static str,
    status: String,
    value: Option<i64>,
    solution: Option<Vec<i64>>,
    failure_bound: Option<f64>,
    extra: Vec<(String, String)>,
}

impl Solved {
    fn from_outcome(method: &'static str, outcome: Outcome) -> Self {
        let status = outcome.status().to_string();
        let (value, solution) = match outcome {
            Outcome::Optimal { value, solution } => (Some(value), Some(solution)),
            _ => (None, None),
        };
        Solved { method, status, value, solution, failure_bound: None, extra: vec![] }
    }

    fn failed(&self) -> bool {
        !matches!(self.status.as_str(), "optimal" | "unbounded")
    }
}

struct SolveOpts {
    seed: u64,
    trials: Option<usize>,
    box_cap: u64,
    engine: Engine,
}

fn run_mixed(inst: &IlpInstance, o: &SolveOpts) -> Result<Solved, Error> {
    let opts = MixedOptions {
        seed: o.seed,
        trials: o.trials,
        engine: match o.engine {
            Engine::Auto => LeafEngine::Auto,
            Engine::Pfaffian => LeafEngine::Pfaffian,
            Engine::Graver => LeafEngine::Graver,
        },
        ..MixedOptions::default()
    };
    let rep = solve_mixed_with(inst, &opts)?;
    let mut s = Solved::from_outcome("mixed", rep.outcome);
    s.failure_bound = Some(rep.failure_bound);
    s.extra = vec![
        ("trials".into(), rep.trials.to_string()),
        ("leaves".into(), rep.leaves.to_string()),
        ("randomized_leaves".into(), rep.randomized_leaves.to_string()),
        ("recovery_probes".into(), rep.probes.to_string()),
    ];
    Ok(s)
}

/// `auto`: p = h = 0 goes to generalized matching, h = 0 to the tall
/// solver (mixed if its box is too large), everything else to mixed.
fn dispatch(inst: &IlpInstance, method: Method, o: &SolveOpts) -> Result<Solved, Error> {
    match method {
        Method::Auto if inst.p == 0 && inst.h == 0 => {
            Ok(Solved::from_outcome("matching", solve_generalized_matching(inst)?))
        }
        Method::Auto if inst.h == 0 => match dispatch(inst, Method::Tall, o) {
            Err(Error::Cap(_)) => run_mixed(inst, o),
            other => other,
        },
        Method::Auto | Method::Mixed => run_mixed(inst, o),
        Method::Tall => {
            let rep = solve_tall_with(inst, o.box_cap)?;
            let mut s = Solved::from_outcome("tall", rep.outcome);
            s.extra.push(("probes".into(), rep.probes.to_string()));
            Ok(s)
        }
        Method::Graver => {
            let rep = solve_wide_graver(inst)?;
            let mut s = Solved::from_outcome("graver", rep.outcome);
            for (name, ph) in [("phase1", &rep.phase1), ("phase2", &rep.phase2)] {
                s.extra.push((format!("{name}_queries"), ph.queries.to_string()));
                s.extra.push((format!("{name}_query_bound"), ph.query_bound.to_string()));
            }
            Ok(s)
        }
        Method::ExactMatching => {
            let trials = o.trials.unwrap_or(20);
            let rep = exact_matching_objective(inst, o.seed, trials)?;
            let (status, value) = match rep.outcome {
                ExactMatchingOutcome::Optimal { value } => ("optimal", Some(value)),
                ExactMatchingOutcome::Infeasible => ("infeasible", None),
                ExactMatchingOutcome::ProbablyInfeasible => ("probably-infeasible", None),
            };
            Ok(Solved {
                method: "exact-matching",
                status: status.into(),
                value,
                solution: None,
                failure_bound: Some(0.5f64.powi(trials as i32)),
                extra: vec![
                    ("trials".into(), trials.to_string()),
                    ("certified".into(), rep.certified.to_string()),
                    ("fallback".into(), rep.fallback.to_string()),
                ],
            })
        }
        Method::Bruteforce => Ok(match brute_force_solve(inst, OracleBudget::default())? {
            OracleResult::Optimal { value, solution } => {
                Solved::from_outcome("bruteforce", Outcome::Optimal { value, solution })
            }
            OracleResult::Infeasible => Solved::from_outcome("bruteforce", Outcome::Infeasible),
            OracleResult::BudgetExceeded => Solved {
                method: "bruteforce",
                status: "budget-exceeded".into(),
                value: None,
                solution: None,
                failure_bound: None,
                extra: vec![],
            },
        }),
    }
}

fn cmd_solve(file: &Path, method: Method, o: &SolveOpts) -> Run {
    let inst = read_instance(file)?;
    let start = Instant::now();
    let s = dispatch(&inst, method, o)?;
    let rec = RunRecord {
        command: "solve".into(),
        instance: Some(instance_hash(&inst)),
        seed: o.seed,
        method: Some(s.method.into()),
        status: s.status.clone(),
        value: s.value.map(|v| v.to_string()),
        solution: s.solution.clone(),
        elapsed_ms: Some(start.elapsed().as_millis()),
        failure_bound: s.failure_bound,
        extra: s.extra.clone(),
    };
    emit(&rec);
    Ok(u8::from(s.failed()))
}

fn base_record(command: &str, inst: &IlpInstance, seed: u64) -> RunRecord {
    RunRecord { command: command.into(), instance: Some(instance_hash(inst)), seed, ..RunRecord::default() }
}

fn cmd_reduce(
    file: &Path,
    to: ReduceKind,
    out: Option<&Path>,
    map_file: Option<&Path>,
    sol_file: Option<&Path>,
    seed: u64,
) -> Run {
    let inst = read_instance(file)?;
    let mut rec = base_record("reduce", &inst, seed);
    if let (Some(map_file), Some(sol_file)) = (map_file, sol_file) {
        let steps = parse_log(&read(map_file)?)?;
        let map = replay(&inst, &steps)?;
        let sol: Vec<i64> = read_ints(sol_file)?;
        let x = map.pull_back(&sol)?;
        rec.method = Some("pull-back".into());
        let ok = match inst.check(&x) {
            Ok(v) => {
                rec.status = "feasible".into();
                rec.value = Some(v.to_string());
                true
            }
            Err(v) => {
                rec.status = "infeasible".into();
                rec.extra.push(("reason".into(), v.to_string()));
                false
            }
        };
        rec.solution = Some(x);
        emit(&rec);
        return Ok(u8::from(!ok));
    }
    let out = out.ok_or_else(|| Fail::Usage("reduce needs --out".into()))?;
    let (target, map) = match to {
        ReduceKind::Normalize => normalize_to_b_matching(&inst)?,
        ReduceKind::Expand => expand_gb(&inst, &inst.b)?,
        ReduceKind::Coeff01 => reduce_coefficients_to_01(&inst)?,
        ReduceKind::Condense => match condense_constraints(&inst)? {
            Reduced::Instance(t, m) => (t, m),
            Reduced::Infeasible { step, reason } => {
                rec.method = Some("condense".into());
                rec.status = "infeasible".into();
                rec.extra.push(("step".into(), step.name().into()));
                rec.extra.push(("reason".into(), reason));
                emit(&rec);
                return Ok(1);
            }
        },
    };
    let map_path = PathBuf::from(format!("{}.map", out.display()));
    write_out(Some(out), &serialize_instance(&target))?;
    write_out(Some(&map_path), &map.log())?;
    rec.method = Some(format!("{to:?}").to_lowercase());
    rec.status = "reduced".into();
    rec.extra = vec![
        ("target".into(), instance_hash(&target)),
        ("out".into(), out.display().to_string()),
        ("map".into(), map_path.display().to_string()),
        ("steps".into(), map.steps().len().to_string()),
        ("offset".into(), map.offset().to_string()),
        ("size".into(), format!("p={} h={} m={} n={}", target.p, target.h, target.m, target.n)),
    ];
    emit(&rec);
    Ok(0)
}

fn cmd_check(file: &Path, sol_file: &Path, seed: u64) -> Run {
    let inst = read_instance(file)?;
    let sol: Vec<i64> = read_ints(sol_file)?;
    let mut rec = base_record("check", &inst, seed);
    let code = match inst.check(&sol) {
        Ok(v) => {
            rec.status = "feasible".into();
            rec.value = Some(v.to_string());
            0
        }
        Err(v) => {
            rec.status = "infeasible".into();
            rec.extra.push(("reason".into(), v.to_string()));
            1
        }
    };
    rec.solution = Some(sol);
    emit(&rec);
    Ok(code)
}

fn cmd_gen(family: &GenCmd, seed: u64) -> Run {
    match family {
        GenCmd::Random { spec, out } => {
            let mut spec: GenSpec = spec.parse().map_err(Fail::Usage)?;
            spec.seed = seed;
            write_out(out.as_deref(), &serialize_instance(&gen_random(&spec)?))?;
        }
        GenCmd::ProximityLb { p, h, delta, k, out } => {
            let lb = gen_proximity_lb(*p, *h, *delta, *k)?;
            write_out(out.as_deref(), &serialize_instance(&lb.inst))?;
        }
        GenCmd::Psi { pattern, host, partition, out } => {
            let pattern = SimpleGraph::parse(&read(pattern)?).map_err(|e| Fail::Usage(e.to_string()))?;
            let host = SimpleGraph::parse(&read(host)?).map_err(|e| Fail::Usage(e.to_string()))?;
            let partition: Vec<usize> = read_ints(partition)?;
            let psi = gen_psi_hardness(&pattern, &host, &partition).map_err(|e| Fail::Usage(e.to_string()))?;
            write_out(out.as_deref(), &serialize_instance(&psi.inst))?;
        }
    }
    Ok(0)
}

fn cmd_graver(file: &Path, cap: i64, seed: u64) -> Run {
    let inst = read_instance(file)?;
    let set = graver_enumerate(&inst.full_matrix(), cap, inst.h)?;
    let mut rec = base_record("graver", &inst, seed);
    rec.status = if set.complete { "complete" } else { "possibly-incomplete" }.into();
    rec.extra = vec![
        ("cap".into(), cap.to_string()),
        ("count".into(), set.elements.len().to_string()),
        ("g_inf".into(), set.g_inf().to_string()),
        ("g_one".into(), set.g_one().to_string()),
    ];
    for g in &set.elements {
        rec.extra.push(("element".into(), join(g)));
    }
    emit(&rec);
    Ok(0)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_circuits(file: &Path, seed: u64) -> Run {
    let inst = read_instance(file)?;
    let a = inst.full_matrix();
    let set = enumerate_circuits(&a)?;
    let rep = check_circuit_bound(&a, inst.p, inst.h, inst.delta())?;
    let mut rec = base_record("circuits", &inst, seed);
    rec.status = if rep.pass { "pass" } else { "fail" }.into();
    rec.extra = vec![
        ("count".into(), set.circuits.len().to_string()),
        ("c_inf".into(), rep.c_inf.to_string()),
        ("bound".into(), rep.bound.to_string()),
        ("ratio".into(), rep.ratio.to_string()),
    ];
    for c in &set.circuits {
        rec.extra.push(("circuit".into(), join(c)));
    }
    emit(&rec);
    Ok(u8::from(!rep.pass))
}

fn cmd_lp(file: &Path, seed: u64) -> Run {
    let inst = read_instance(file)?;
    let lp = lp_relaxation_vertex(&inst);
    let mut rec = base_record("lp", &inst, seed);
    rec.status = lp.status.name().into();
    rec.value = lp.objective.as_ref().map(|v| v.to_string());
    if lp.status == LpStatus::Optimal {
        rec.extra.push(("x".into(), join(&lp.x)));
        let bx = proximity_box(&inst, &lp)?;
        rec.extra.push(("radius".into(), bx.radius.to_string()));
        rec.extra.push(("c_inf".into(), bx.c_inf.to_string()));
        rec.extra.push(("c_inf_exact".into(), bx.exact.to_string()));
        rec.extra.push(("box_lower".into(), join(&bx.lower)));
        rec.extra.push(("box_upper".into(), join(&bx.upper)));
    }
    emit(&rec);
    Ok(u8::from(lp.status == LpStatus::Infeasible))
}

fn matching_block(inst: &IlpInstance) -> Result<(), Fail> {
    if inst.p != 0 || inst.h != 0 {
        return Err(Fail::Usage("this command needs an instance with p = h = 0".into()));
    }
    Ok(())
}

fn cmd_fcm(file: &Path, z: &str, seed: u64) -> Run {
    let inst = read_instance(file)?;
    matching_block(&inst)?;
    let z: Vec<i64> = z
        .split(',')
        .map(|t| t.trim().parse().map_err(|e| Fail::Usage(format!("bad z entry {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let (value, x) = f_cm_with_solution(&inst.c, &inst.mm, &z)?;
    let mut rec = base_record("fcm", &inst, seed);
    rec.extra.push(("z".into(), join(&z)));
    let code = match value {
        FValue::Finite(v) => {
            rec.status = "finite".into();
            rec.value = Some(v.to_string());
            rec.solution = x;
            0
        }
        FValue::Infinite => {
            rec.status = "infinite".into();
            1
        }
    };
    emit(&rec);
    Ok(code)
}

fn cmd_convexity(file: &Path, hi: i64, seed: u64) -> Run {
    let inst = read_instance(file)?;
    matching_block(&inst)?;
    let mut rec = base_record("convexity", &inst, seed);
    rec.extra.push(("hi".into(), hi.to_string()));
    let code = match lattice_convexity_scan(&inst.c, &inst.mm, hi)? {
        None => {
            rec.status = "pass".into();
            0
        }
        Some(v) => {
            rec.status = "violation".into();
            for (p, w) in v.points.iter().zip(&v.weights) {
                rec.extra.push(("point".into(), format!("{} weight {w}/{}", join(p), v.den)));
            }
            1
        }
    };
    emit(&rec);
    Ok(code)
}

fn cmd_bench(spec: &str, count: u64, out: Option<&Path>, o: &SolveOpts) -> Run {
    let base: GenSpec = spec.parse().map_err(Fail::Usage)?;
    let mut buf = Vec::new();
    let mut all_agree = true;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| Fail::Usage(e.to_string());
        w.write_record(["index", "seed", "p", "h", "m", "n", "method", "status", "value", "oracle", "agree", "elapsed_us"])
            .map_err(io)?;
        for i in 0..count {
            let spec = GenSpec { seed: o.seed.wrapping_add(i), ..base.clone() };
            let inst = gen_random(&spec)?;
            let start = Instant::now();
            let s = dispatch(&inst, Method::Auto, o)?;
            let elapsed = start.elapsed().as_micros();
            let oracle = match brute_force_solve(&inst, OracleBudget::default())? {
                OracleResult::Optimal { value, .. } => value.to_string(),
                OracleResult::Infeasible => "infeasible".into(),
                OracleResult::BudgetExceeded => "budget-exceeded".into(),
            };
            let value = s.value.map_or_else(|| s.status.clone(), |v| v.to_string());
            let agree = oracle == "budget-exceeded" || oracle == value;
            all_agree &= agree;
            let row = [
                i.to_string(),
                spec.seed.to_string(),
                inst.p.to_string(),
                inst.h.to_string(),
                inst.m.to_string(),
                inst.n.to_string(),
                s.method.to_string(),
                s.status.clone(),
                value,
                oracle,
                agree.to_string(),
                elapsed.to_string(),
            ];
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Fail::Usage(e.to_string()))?;
    }
    let text = String::from_utf8(buf).map_err(|e| Fail::Usage(e.to_string()))?;
    write_out(out, &text)?;
    Ok(u8::from(!all_agree))
}

fn run(cli: Cli) -> Run {
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Solve { file, method, trials, box_cap, engine } => {
            cmd_solve(file, *method, &SolveOpts { seed, trials: *trials, box_cap: *box_cap, engine: *engine })
        }
        Cmd::Reduce { file, to, out, replay, solution } => {
            cmd_reduce(file, *to, out.as_deref(), replay.as_deref(), solution.as_deref(), seed)
        }
        Cmd::Check { file, solution } => cmd_check(file, solution, seed),
        Cmd::Gen { family } => cmd_gen(family, seed),
        Cmd::Graver { file, cap } => cmd_graver(file, *cap, seed),
        Cmd::Circuits { file } => cmd_circuits(file, seed),
        Cmd::Lp { file } => cmd_lp(file, seed),
        Cmd::Fcm { file, z } => cmd_fcm(file, z, seed),
        Cmd::Convexity { file, hi } => cmd_convexity(file, *hi, seed),
        Cmd::Bench { spec, count, out } => cmd_bench(
            spec,
            *count,
            out.as_deref(),
            &SolveOpts { seed, trials: None, box_cap: DEFAULT_BOX_CAP, engine: Engine::Auto },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Fail::Solver(e)) => {
            eprintln!("error: {e}");
            1
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
