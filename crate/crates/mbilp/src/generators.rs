//! Seeded random instance families.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Ext, IlpInstance, Matrix};
use crate::{precondition, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// Incidence matrix of a simple graph: two +1 entries per column.
    Simple,
    /// Arbitrary columns with ‖·‖₁ ≤ 2.
    Bidirected,
}

/// Parameters for [`gen_random`]. Dimension fields are inclusive ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub p: (usize, usize),
    pub h: (usize, usize),
    pub m: (usize, usize),
    pub n: (usize, usize),
    pub delta: i64,
    /// Each variable gets `u − l ≤ bound_width`.
    pub bound_width: i64,
    /// Lower bounds are drawn from `[−bound_width, 0]` instead of fixed at 0.
    pub negative_bounds: bool,
    /// Probability that a backdoor entry is nonzero.
    pub density: f64,
    pub graph: GraphKind,
    /// Objective coefficients are drawn from `[−cost, cost]`.
    pub cost: i64,
    /// Right-hand sides come from a random point inside the bounds.
    pub planted: bool,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            p: (0, 0),
            h: (0, 0),
            m: (4, 4),
            n: (4, 4),
            delta: 1,
            bound_width: 2,
            negative_bounds: false,
            density: 0.5,
            graph: GraphKind::Bidirected,
            cost: 3,
            planted: true,
            seed: 0,
        }
    }
}

fn parse_range(v: &str) -> std::result::Result<(usize, usize), String> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("bad number {s:?}: {e}"));
    match v.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range {v}"));
            }
            Ok((a, b))
        }
        None => num(v).map(|x| (x, x)),
    }
}

impl FromStr for GenSpec {
    type Err = String;

    /// Comma-separated `key=value` pairs, e.g. `p=0..2,h=1,m=4,n=5,delta=2`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut spec = GenSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let int = || v.parse::<i64>().map_err(|e| format!("{k}: {e}"));
            let flag = || v.parse::<bool>().map_err(|e| format!("{k}: {e}"));
            match k.trim() {
                "p" => spec.p = parse_range(v)?,
                "h" => spec.h = parse_range(v)?,
                "m" => spec.m = parse_range(v)?,
                "n" => spec.n = parse_range(v)?,
                "delta" => spec.delta = int()?,
                "width" => spec.bound_width = int()?,
                "negative" => spec.negative_bounds = flag()?,
                "density" => spec.density = v.parse().map_err(|e| format!("density: {e}"))?,
                "graph" => {
                    spec.graph = match v {
                        "simple" => GraphKind::Simple,
                        "bidirected" => GraphKind::Bidirected,
                        _ => return Err(format!("unknown graph kind {v}")),
                    }
                }
                "cost" => spec.cost = int()?,
                "planted" => spec.planted = flag()?,
                "seed" => spec.seed = v.parse().map_err(|e| format!("seed: {e}"))?,
                other => return Err(format!("unknown key {other}")),
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |(a, b): (usize, usize)| if a == b { a.to_string() } else { format!("{a}..{b}") };
        write!(
            f,
            "p={},h={},m={},n={},delta={},width={},negative={},density={},graph={},cost={},planted={},seed={}",
            r(self.p),
            r(self.h),
            r(self.m),
            r(self.n),
            self.delta,
            self.bound_width,
            self.negative_bounds,
            self.density,
            match self.graph {
                GraphKind::Simple => "simple",
                GraphKind::Bidirected => "bidirected",
            },
            self.cost,
            self.planted,
            self.seed
        )
    }
}

fn random_column(rng: &mut ChaCha8Rng, m: usize) -> Vec<i64> {
    let mut col = vec![0; m];
    if m == 0 {
        return col;
    }
    let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1 } else { -1 };
    match rng.gen_range(0..10) {
        0 => {}
        1 => col[rng.gen_range(0..m)] = 2 * sign(rng),
        2 => col[rng.gen_range(0..m)] = sign(rng),
        _ if m >= 2 => {
            let picks: Vec<usize> = (0..m).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            col[picks[0]] = sign(rng);
            col[picks[1]] = sign(rng);
        }
        _ => col[0] = 2 * sign(rng),
    }
    col
}

fn backdoor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, spec: &GenSpec) -> Matrix {
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if spec.delta > 0 && rng.gen_bool(spec.density.clamp(0.0, 1.0)) {
                out.set(i, j, rng.gen_range(-spec.delta..=spec.delta));
            }
        }
    }
    out
}

/// Samples one instance; equal specs give identical instances.
pub fn gen_random(spec: &GenSpec) -> Result<IlpInstance> {
    if spec.delta < 0 || spec.bound_width < 0 || spec.cost < 0 || !(0.0..=1.0).contains(&spec.density) {
        return precondition(format!("invalid generator spec {spec}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pick = |rng: &mut ChaCha8Rng, (a, b): (usize, usize)| rng.gen_range(a..=b);
    let p = pick(&mut rng, spec.p);
    let h = pick(&mut rng, spec.h);
    let m = pick(&mut rng, spec.m);
    let n = pick(&mut rng, spec.n);
    let mm = match spec.graph {
        GraphKind::Simple => {
            let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
            if n > pairs.len() {
                return precondition(format!("a simple graph on {m} vertices has at most {} edges", pairs.len()));
            }
            let mut mat = Matrix::zeros(m, n);
            for (j, &(a, b)) in pairs.choose_multiple(&mut rng, n).enumerate() {
                mat.set(a, j, 1);
                mat.set(b, j, 1);
            }
            mat
        }
        GraphKind::Bidirected => {
            if m == 0 && n > 0 {
                Matrix::zeros(0, n)
            } else {
                Matrix::from_cols(&(0..n).map(|_| random_column(&mut rng, m)).collect::<Vec<_>>(), m)
            }
        }
    };
    let cc = backdoor(&mut rng, h, p, spec);
    let w = backdoor(&mut rng, h, n, spec);
    let t = backdoor(&mut rng, m, p, spec);
    let mut bounds = |k: usize| -> (Vec<i64>, Vec<i64>) {
        (0..k)
            .map(|_| {
                let lo = if spec.negative_bounds { rng.gen_range(-spec.bound_width..=0) } else { 0 };
                (lo, lo + rng.gen_range(0..=spec.bound_width))
            })
            .unzip()
    };
    let (e, g) = bounds(p);
    let (l, u) = bounds(n);
    let mut cost = |k: usize| -> Vec<i64> { (0..k).map(|_| rng.gen_range(-spec.cost..=spec.cost)).collect() };
    let a = cost(p);
    let c = cost(n);
    let fin = |v: &[i64]| v.iter().map(|&x| Ext::Finite(x)).collect::<Vec<_>>();
    let mut inst = IlpInstance {
        p,
        h,
        m,
        n,
        a,
        c,
        cc,
        w,
        t,
        mm,
        d: vec![0; h],
        b: vec![0; m],
        e: fin(&e),
        g: fin(&g),
        l: fin(&l),
        u: fin(&u),
    };
    let full = inst.full_matrix();
    let rhs: Vec<i64> = if spec.planted {
        let lo: Vec<i64> = e.iter().chain(&l).copied().collect();
        let hi: Vec<i64> = g.iter().chain(&u).copied().collect();
        let x: Vec<i64> = lo.iter().zip(&hi).map(|(&a, &b)| rng.gen_range(a..=b)).collect();
        full.mul_vec(&x).into_iter().map(|v| v as i64).collect()
    } else {
        let span = (spec.bound_width * 2).max(1);
        (0..h + m).map(|_| rng.gen_range(-span..=span)).collect()
    };
    inst.d = rhs[..h].to_vec();
    inst.b = rhs[h..].to_vec();
    inst.validate()?;
    Ok(inst)
}
