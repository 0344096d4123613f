//! Gadget reductions between block ILPs, each recorded as a replayable step
//! with an affine pullback of solutions.
//!
//! [`normalize_to_b_matching`] brings a bounded instance to perfect
//! b-matching form: simple `G(M)`, `c, W ≥ 0`, `e = l = 0`, `u = ∞`.
//! [`expand_gb`], [`condense_constraints`], [`reduce_coefficients_to_01`] and
//! [`add_quadrangles`] continue from there towards constrained perfect
//! matching.

use std::collections::HashSet;
use std::fmt;

use crate::instance::{incidence_graph, Ext, IlpInstance, Matrix};
use crate::{precondition, Error, Result};

/// Additive constant in the bound `n', m' ≤ 8(n + m) + K0` on the size of a
/// normalized instance.
pub const K0: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    InvertColumn,
    SignSplit,
    MixedSplit,
    Translate,
    ParityPad,
    ZeroPad,
    CapacityEliminate,
    GbExpand,
    Condense,
    CoeffReduce,
    QuadranglePad,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::InvertColumn => "invert-column",
            StepKind::SignSplit => "sign-split",
            StepKind::MixedSplit => "mixed-split",
            StepKind::Translate => "translate",
            StepKind::ParityPad => "parity-pad",
            StepKind::ZeroPad => "zero-pad",
            StepKind::CapacityEliminate => "capacity-eliminate",
            StepKind::GbExpand => "gb-expand",
            StepKind::Condense => "condense",
            StepKind::CoeffReduce => "coeff-reduce",
            StepKind::QuadranglePad => "quadrangle-pad",
        }
    }

    fn from_name(s: &str) -> Option<StepKind> {
        use StepKind::*;
        [
            InvertColumn,
            SignSplit,
            MixedSplit,
            Translate,
            ParityPad,
            ZeroPad,
            CapacityEliminate,
            GbExpand,
            Condense,
            CoeffReduce,
            QuadranglePad,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One reduction step. Column indices refer to `x` (not `(y, x)`) of the
/// instance the step is applied to. New variables and rows are appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionStep {
    /// Negate the listed columns.
    InvertColumn { cols: Vec<usize> },
    /// Split a column into its positive and negative part.
    SignSplit { col: usize },
    /// Split a column with entries `+1` and `-1`.
    MixedSplit { col: usize },
    /// Shift all variables so that lower bounds become zero.
    Translate,
    /// Append the row `r⁽¹⁾(y, x) + 2 s⁽¹⁾ = t⁽¹⁾` with `s⁽¹⁾ ∈ [0, slack_hi]`.
    ParityPad { row: Vec<i64>, rhs: i64, slack_hi: i64 },
    /// Append the row `r⁽²⁾(y, x) + 2 s⁽²⁾ = rhs` with `s⁽²⁾ ∈ [0, slack_hi]`.
    ZeroPad { row: Vec<i64>, rhs: i64, slack_hi: i64 },
    /// Subdivide each listed column into three uncapacitated edges; every
    /// other column has an implied capacity and only loses its upper bound.
    CapacityEliminate { cols: Vec<usize> },
    /// Replace vertex `v` by `caps[v]` copies.
    GbExpand { caps: Vec<i64> },
    /// Merge the `W` rows into one in base `base`.
    Condense { base: i64 },
    /// Lower the largest `W` entry of a column by one.
    CoeffReduce { col: usize },
    /// Embed each variable of a pure system into a 4-cycle.
    QuadranglePad,
}

impl ReductionStep {
    pub fn kind(&self) -> StepKind {
        match self {
            ReductionStep::InvertColumn { .. } => StepKind::InvertColumn,
            ReductionStep::SignSplit { .. } => StepKind::SignSplit,
            ReductionStep::MixedSplit { .. } => StepKind::MixedSplit,
            ReductionStep::Translate => StepKind::Translate,
            ReductionStep::ParityPad { .. } => StepKind::ParityPad,
            ReductionStep::ZeroPad { .. } => StepKind::ZeroPad,
            ReductionStep::CapacityEliminate { .. } => StepKind::CapacityEliminate,
            ReductionStep::GbExpand { .. } => StepKind::GbExpand,
            ReductionStep::Condense { .. } => StepKind::Condense,
            ReductionStep::CoeffReduce { .. } => StepKind::CoeffReduce,
            ReductionStep::QuadranglePad => StepKind::QuadranglePad,
        }
    }

    /// Applies the step to `inst`.
    pub fn apply(&self, inst: &IlpInstance) -> Result<Applied> {
        match self {
            ReductionStep::InvertColumn { cols } => invert_columns(inst, cols),
            ReductionStep::SignSplit { col } => sign_split(inst, *col),
            ReductionStep::MixedSplit { col } => mixed_split(inst, *col),
            ReductionStep::Translate => translate(inst),
            ReductionStep::ParityPad { row, rhs, slack_hi }
            | ReductionStep::ZeroPad { row, rhs, slack_hi } => pad_row(inst, row, *rhs, *slack_hi),
            ReductionStep::CapacityEliminate { cols } => eliminate_capacities(inst, cols),
            ReductionStep::GbExpand { caps } => gb_expand_step(inst, caps),
            ReductionStep::Condense { base } => condense_step(inst, *base),
            ReductionStep::CoeffReduce { col } => coeff_reduce_step(inst, *col),
            ReductionStep::QuadranglePad => quadrangle_step(inst),
        }
    }
}

fn join(v: &[impl ToString]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        match self {
            ReductionStep::InvertColumn { cols } | ReductionStep::CapacityEliminate { cols } => {
                write!(f, " cols {}", join(cols))
            }
            ReductionStep::SignSplit { col }
            | ReductionStep::MixedSplit { col }
            | ReductionStep::CoeffReduce { col } => write!(f, " col {col}"),
            ReductionStep::ParityPad { row, rhs, slack_hi }
            | ReductionStep::ZeroPad { row, rhs, slack_hi } => {
                write!(f, " rhs {rhs} slack {slack_hi} row {}", join(row))
            }
            ReductionStep::GbExpand { caps } => write!(f, " caps {}", join(caps)),
            ReductionStep::Condense { base } => write!(f, " base {base}"),
            ReductionStep::Translate | ReductionStep::QuadranglePad => Ok(()),
        }
    }
}

/// Parses one line written by the `Display` impl of [`ReductionStep`].
pub fn parse_step(line: &str) -> Option<ReductionStep> {
    let mut it = line.split_whitespace();
    let kind = StepKind::from_name(it.next()?)?;
    let rest: Vec<&str> = it.collect();
    let ints = |s: &[&str]| s.iter().map(|t| t.parse::<i64>().ok()).collect::<Option<Vec<i64>>>();
    let idx = |s: &[&str]| s.iter().map(|t| t.parse::<usize>().ok()).collect::<Option<Vec<usize>>>();
    let tagged = |tag: &str| -> Option<&[&str]> {
        match rest.split_first() {
            Some((t, tail)) if *t == tag => Some(tail),
            None if tag == "cols" || tag == "caps" => Some(&[]),
            _ => None,
        }
    };
    let single = |tag: &str| -> Option<i64> {
        match rest.as_slice() {
            [t, v] if *t == tag => v.parse().ok(),
            _ => None,
        }
    };
    let pad = || -> Option<(Vec<i64>, i64, i64)> {
        match rest.as_slice() {
            ["rhs", r, "slack", s, "row", row @ ..] => Some((ints(row)?, r.parse().ok()?, s.parse().ok()?)),
            _ => None,
        }
    };
    Some(match kind {
        StepKind::InvertColumn => ReductionStep::InvertColumn { cols: idx(tagged("cols")?)? },
        StepKind::CapacityEliminate => {
            ReductionStep::CapacityEliminate { cols: idx(tagged("cols")?)? }
        }
        StepKind::SignSplit => ReductionStep::SignSplit { col: single("col")? as usize },
        StepKind::MixedSplit => ReductionStep::MixedSplit { col: single("col")? as usize },
        StepKind::CoeffReduce => ReductionStep::CoeffReduce { col: single("col")? as usize },
        StepKind::ParityPad => {
            let (row, rhs, slack_hi) = pad()?;
            ReductionStep::ParityPad { row, rhs, slack_hi }
        }
        StepKind::ZeroPad => {
            let (row, rhs, slack_hi) = pad()?;
            ReductionStep::ZeroPad { row, rhs, slack_hi }
        }
        StepKind::GbExpand => ReductionStep::GbExpand { caps: ints(tagged("caps")?)? },
        StepKind::Condense => ReductionStep::Condense { base: single("base")? },
        StepKind::Translate if rest.is_empty() => ReductionStep::Translate,
        StepKind::QuadranglePad if rest.is_empty() => ReductionStep::QuadranglePad,
        _ => return None,
    })
}

/// `konst + Σ coef · v[idx]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub konst: i64,
    pub terms: Vec<(usize, i64)>,
}

impl Affine {
    fn var(k: usize) -> Self {
        Affine { konst: 0, terms: vec![(k, 1)] }
    }

    fn eval(&self, v: &[i64]) -> Result<i64> {
        let s: i128 = self.konst as i128
            + self.terms.iter().map(|&(k, c)| c as i128 * v[k] as i128).sum::<i128>();
        fit(s, "pullback")
    }
}

/// Result of applying one step: the new instance, the pullback expressing
/// each old variable in the new ones, and the objective offset
/// `old objective = new objective + offset`.
#[derive(Clone, Debug)]
pub struct Applied {
    pub inst: IlpInstance,
    pub pullback: Vec<Affine>,
    pub offset: i128,
}

/// Composite map from solutions of `target` back to solutions of `original`.
#[derive(Clone, Debug)]
pub struct SolutionMap {
    original: IlpInstance,
    target: IlpInstance,
    steps: Vec<ReductionStep>,
    pullbacks: Vec<Vec<Affine>>,
    offset: i128,
}

impl SolutionMap {
    pub fn identity(inst: &IlpInstance) -> Self {
        SolutionMap {
            original: inst.clone(),
            target: inst.clone(),
            steps: Vec::new(),
            pullbacks: Vec::new(),
            offset: 0,
        }
    }

    pub fn original(&self) -> &IlpInstance {
        &self.original
    }

    pub fn target(&self) -> &IlpInstance {
        &self.target
    }

    pub fn steps(&self) -> &[ReductionStep] {
        &self.steps
    }

    /// `original objective = target objective + offset`.
    pub fn offset(&self) -> i128 {
        self.offset
    }

    /// Applies `step` to the current target.
    pub fn push(&mut self, step: ReductionStep) -> Result<()> {
        let applied = step.apply(&self.target)?;
        self.target = applied.inst;
        self.pullbacks.push(applied.pullback);
        self.offset += applied.offset;
        self.steps.push(step);
        Ok(())
    }

    /// Appends a map whose original is this map's target.
    pub fn then(mut self, next: SolutionMap) -> Result<SolutionMap> {
        if next.original != self.target {
            return precondition("composed maps do not meet");
        }
        self.steps.extend(next.steps);
        self.pullbacks.extend(next.pullbacks);
        self.offset += next.offset;
        self.target = next.target;
        Ok(self)
    }

    /// Maps a feasible solution of the target to one of the original, checking
    /// both ends and the objective relation.
    pub fn pull_back(&self, sol: &[i64]) -> Result<Vec<i64>> {
        let reduced = self
            .target
            .check(sol)
            .map_err(|v| Error::Certificate(format!("not feasible for the reduced instance: {v}")))?;
        let orig = self.pull_back_unchecked(sol)?;
        let value = self
            .original
            .check(&orig)
            .map_err(|v| Error::Certificate(format!("pulled-back solution infeasible: {v}")))?;
        if value != reduced + self.offset {
            return Err(Error::Certificate(format!(
                "objective {value} differs from reduced {reduced} plus offset {}",
                self.offset
            )));
        }
        Ok(orig)
    }

    /// Applies the pullbacks without any feasibility checks.
    pub fn pull_back_unchecked(&self, sol: &[i64]) -> Result<Vec<i64>> {
        let mut cur = sol.to_vec();
        for pb in self.pullbacks.iter().rev() {
            cur = pb.iter().map(|a| a.eval(&cur)).collect::<Result<Vec<_>>>()?;
        }
        Ok(cur)
    }

    /// Line-oriented replay log, one step per line.
    pub fn log(&self) -> String {
        let mut s = String::from("MBMAP 1\n");
        s.push_str(&format!("offset {}\n", self.offset));
        for step in &self.steps {
            s.push_str(&format!("{step}\n"));
        }
        s
    }
}

/// Parses a replay log written by [`SolutionMap::log`].
pub fn parse_log(text: &str) -> Result<Vec<ReductionStep>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("MBMAP 1") {
        return precondition("map log: missing header");
    }
    let mut steps = Vec::new();
    for line in lines {
        if line.starts_with("offset ") {
            continue;
        }
        match parse_step(line) {
            Some(s) => steps.push(s),
            None => return precondition(format!("map log: cannot parse step '{line}'")),
        }
    }
    Ok(steps)
}

/// Replays `steps` from `original`.
pub fn replay(original: &IlpInstance, steps: &[ReductionStep]) -> Result<SolutionMap> {
    let mut map = SolutionMap::identity(original);
    for s in steps {
        map.push(s.clone())?;
    }
    Ok(map)
}

/// Outcome of a reduction that may detect infeasibility on its own.
#[derive(Clone, Debug)]
pub enum Reduced {
    Instance(IlpInstance, SolutionMap),
    Infeasible { step: StepKind, reason: String },
}

fn fit(v: i128, what: &'static str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(what))
}

fn identity_pullback(vars: usize) -> Vec<Affine> {
    (0..vars).map(Affine::var).collect()
}

/// Appends an `x` column.
fn push_x(inst: &mut IlpInstance, cost: i64, wcol: &[i64], mcol: &[i64], lo: Ext, hi: Ext) -> usize {
    inst.c.push(cost);
    inst.w.push_col(wcol);
    inst.mm.push_col(mcol);
    inst.l.push(lo);
    inst.u.push(hi);
    inst.n += 1;
    inst.n - 1
}

/// Appends an all-zero row to the matching block; returns its index.
fn push_m_row(inst: &mut IlpInstance, rhs: i64) -> usize {
    inst.t.push_row(&vec![0; inst.p]);
    inst.mm.push_row(&vec![0; inst.n]);
    inst.b.push(rhs);
    inst.m += 1;
    inst.m - 1
}

fn nonzeros(col: &[i64]) -> Vec<(usize, i64)> {
    col.iter().enumerate().filter(|(_, v)| **v != 0).map(|(i, v)| (i, *v)).collect()
}

fn check_col(inst: &IlpInstance, col: usize) -> Result<()> {
    if col >= inst.n {
        return precondition(format!("column {col} out of range"));
    }
    Ok(())
}

fn invert_columns(inst: &IlpInstance, cols: &[usize]) -> Result<Applied> {
    let mut out = inst.clone();
    let mut pullback = identity_pullback(inst.vars());
    for &j in cols {
        check_col(inst, j)?;
        out.c[j] = -out.c[j];
        for i in 0..out.h {
            out.w.set(i, j, -out.w.get(i, j));
        }
        for i in 0..out.m {
            out.mm.set(i, j, -out.mm.get(i, j));
        }
        out.l[j] = inst.u[j].neg();
        out.u[j] = inst.l[j].neg();
        pullback[inst.p + j].terms[0].1 = -1;
    }
    Ok(Applied { inst: out, pullback, offset: 0 })
}

fn sign_split(inst: &IlpInstance, j: usize) -> Result<Applied> {
    check_col(inst, j)?;
    let col = inst.mm.col(j);
    let nz = nonzeros(&col);
    // (row, coefficient) for x⁺ and x⁻.
    let (plus, minus): (Option<(usize, i64)>, Option<(usize, i64)>) = match nz.as_slice() {
        [] => (None, None),
        [(i, 2)] => (Some((*i, 1)), Some((*i, -1))),
        [(i, 1)] => (Some((*i, 1)), None),
        [(i1, v1), (i2, v2)] if *v1 >= 0 || *v2 >= 0 => {
            let (a, b) = if *v1 >= 0 { ((*i1, *v1), (*i2, *v2)) } else { ((*i2, *v2), (*i1, *v1)) };
            (Some(a), Some((b.0, -b.1)))
        }
        _ => return precondition(format!("sign split of column {j} needs a nonnegative entry")),
    };
    let mut out = inst.clone();
    let c = inst.c[j];
    let wcol = inst.w.col(j);
    out.c[j] = c.max(0);
    for i in 0..inst.h {
        out.w.set(i, j, wcol[i].max(0));
    }
    for i in 0..inst.m {
        out.mm.set(i, j, 0);
    }
    if let Some((i, v)) = plus {
        out.mm.set(i, j, v);
    }
    let mut mcol = vec![0; inst.m];
    if let Some((i, v)) = minus {
        mcol[i] = v;
    }
    let wneg: Vec<i64> = wcol.iter().map(|&v| -v.min(0)).collect();
    let k = push_x(&mut out, -c.min(0), &wneg, &mcol, inst.u[j].neg(), inst.l[j].neg());
    let r = push_m_row(&mut out, 0);
    out.mm.set(r, j, 1);
    out.mm.set(r, k, 1);
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

fn mixed_split(inst: &IlpInstance, j: usize) -> Result<Applied> {
    check_col(inst, j)?;
    let nz = nonzeros(&inst.mm.col(j));
    let (pos, neg) = match nz.as_slice() {
        [(i1, 1), (i2, -1)] => (*i1, *i2),
        [(i1, -1), (i2, 1)] => (*i2, *i1),
        _ => return precondition(format!("column {j} does not have entries +1 and -1")),
    };
    let mut out = inst.clone();
    out.mm.set(neg, j, 0);
    let mut mcol = vec![0; inst.m];
    mcol[neg] = 1;
    let k = push_x(&mut out, 0, &vec![0; inst.h], &mcol, inst.u[j].neg(), inst.l[j].neg());
    let r = push_m_row(&mut out, 0);
    out.mm.set(r, j, 1);
    out.mm.set(r, k, 1);
    debug_assert_eq!(out.mm.get(pos, j), 1);
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

fn translate(inst: &IlpInstance) -> Result<Applied> {
    let lower = inst.lower();
    let mut shift = Vec::with_capacity(lower.len());
    for (k, lo) in lower.iter().enumerate() {
        match lo.finite() {
            Some(v) => shift.push(v),
            None => return precondition(format!("variable {k} has no finite lower bound")),
        }
    }
    let mut out = inst.clone();
    let full = inst.full_matrix();
    let rhs = inst.rhs();
    let moved = full.mul_vec(&shift);
    let new_rhs: Vec<i64> =
        rhs.iter().zip(&moved).map(|(&r, &s)| fit(r as i128 - s, "translate")).collect::<Result<_>>()?;
    out.d = new_rhs[..inst.h].to_vec();
    out.b = new_rhs[inst.h..].to_vec();
    let upper = inst.upper();
    let new_upper: Vec<Ext> = upper
        .iter()
        .zip(&shift)
        .map(|(u, &s)| match u {
            Ext::Finite(v) => fit(*v as i128 - s as i128, "translate").map(Ext::Finite),
            other => Ok(*other),
        })
        .collect::<Result<_>>()?;
    out.set_bounds(&vec![Ext::Finite(0); shift.len()], &new_upper);
    let pullback = shift.iter().enumerate().map(|(k, &s)| Affine { konst: s, terms: vec![(k, 1)] }).collect();
    let offset = inst.objective().iter().zip(&shift).map(|(&c, &s)| c as i128 * s as i128).sum();
    Ok(Applied { inst: out, pullback, offset })
}

fn pad_row(inst: &IlpInstance, row: &[i64], rhs: i64, slack_hi: i64) -> Result<Applied> {
    if row.len() != inst.vars() {
        return precondition("pad row has the wrong length");
    }
    let mut out = inst.clone();
    let r = push_m_row(&mut out, rhs);
    for (k, &v) in row.iter().enumerate() {
        if k < inst.p {
            out.t.set(r, k, v);
        } else {
            out.mm.set(r, k - inst.p, v);
        }
    }
    let mut mcol = vec![0; out.m];
    mcol[r] = 2;
    push_x(&mut out, 0, &vec![0; inst.h], &mcol, Ext::Finite(0), Ext::Finite(slack_hi));
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

fn eliminate_capacities(inst: &IlpInstance, cols: &[usize]) -> Result<Applied> {
    let mut out = inst.clone();
    for &j in cols {
        check_col(inst, j)?;
        let nz = nonzeros(&inst.mm.col(j));
        let [(_, 1), (i2, 1)] = nz.as_slice() else {
            return precondition(format!("capacity elimination of column {j} needs a 0/1 link"));
        };
        let Some(cap) = inst.u[j].finite() else {
            return precondition(format!("column {j} has no finite capacity"));
        };
        if inst.l[j] != Ext::Finite(0) {
            return precondition(format!("column {j} has a nonzero lower bound"));
        }
        let ra = push_m_row(&mut out, cap);
        let rb = push_m_row(&mut out, cap);
        out.mm.set(*i2, j, 0);
        out.mm.set(ra, j, 1);
        let zero_w = vec![0; inst.h];
        let mut slack = vec![0; out.m];
        slack[ra] = 1;
        slack[rb] = 1;
        push_x(&mut out, 0, &zero_w, &slack, Ext::Finite(0), Ext::PosInf);
        let mut second = vec![0; out.m];
        second[rb] = 1;
        second[*i2] = 1;
        push_x(&mut out, 0, &zero_w, &second, Ext::Finite(0), Ext::PosInf);
    }
    for u in out.u.iter_mut() {
        *u = Ext::PosInf;
    }
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

/// The perfect b-matching form that [`normalize_to_b_matching`] produces.
pub fn is_normalized(inst: &IlpInstance) -> bool {
    let simple = incidence_graph(&inst.mm).map(|g| g.is_simple()).unwrap_or(false);
    simple
        && inst.c.iter().all(|&v| v >= 0)
        && inst.w.to_rows().iter().flatten().all(|&v| v >= 0)
        && inst.e.iter().chain(&inst.l).all(|&b| b == Ext::Finite(0))
        && inst.g.iter().all(|b| b.is_finite())
        && inst.u.iter().all(|&b| b == Ext::PosInf)
}

fn columns_where(inst: &IlpInstance, pred: impl Fn(&IlpInstance, usize) -> bool) -> Vec<usize> {
    (0..inst.n).filter(|&j| pred(inst, j)).collect()
}

/// Brings an instance with finite bounds to perfect b-matching form.
///
/// Sub-steps in order: invert nonpositive columns, sign-split columns with a
/// negative cost, a negative `W` entry or an entry 2, split the remaining
/// `+1/-1` columns, translate, parity pad, zero-column pad, split the entries
/// 2 introduced by the pads, translate again, eliminate capacities.
///
/// Columns of the input are always subdivided. A gadget column whose capacity
/// is implied by a link row (a row with nonnegative entries, no `y` part and
/// right-hand side at most the capacity) keeps its edge and only drops the
/// upper bound. With this, an input column turns into at most 5 columns and 4
/// rows, and `n', m' ≤ 8(n + m) + K0`.
///
/// An instance that is already normalized may carry `u = ∞`; it is returned
/// with an empty map.
pub fn normalize_to_b_matching(inst: &IlpInstance) -> Result<(IlpInstance, SolutionMap)> {
    inst.validate()?;
    if is_normalized(inst) {
        return Ok((inst.clone(), SolutionMap::identity(inst)));
    }
    if !inst.has_finite_bounds() {
        return precondition("normalize_to_b_matching needs finite bounds on all variables");
    }
    let mut map = SolutionMap::identity(inst);

    let invert = columns_where(inst, |s, j| {
        let col = s.mm.col(j);
        col.iter().any(|&v| v < 0) && col.iter().all(|&v| v <= 0)
    });
    if !invert.is_empty() {
        map.push(ReductionStep::InvertColumn { cols: invert })?;
    }
    let needs_sign = columns_where(map.target(), |s, j| {
        s.c[j] < 0 || (0..s.h).any(|i| s.w.get(i, j) < 0) || s.mm.col(j).contains(&2)
    });
    for j in needs_sign {
        map.push(ReductionStep::SignSplit { col: j })?;
    }
    split_mixed(&mut map)?;
    translate_if_needed(&mut map)?;

    let cur = map.target().clone();
    let parity: Vec<i64> = (0..cur.vars())
        .map(|k| {
            let s: i64 = if k < cur.p {
                (0..cur.m).map(|i| cur.t.get(i, k)).sum()
            } else {
                (0..cur.m).map(|i| cur.mm.get(i, k - cur.p)).sum()
            };
            s.rem_euclid(2)
        })
        .collect();
    if parity.iter().any(|&v| v != 0) {
        let reach: i128 = parity
            .iter()
            .zip(cur.upper())
            .map(|(&r, u)| r as i128 * u.unwrap() as i128)
            .sum();
        let half = fit((reach + 1) / 2, "parity pad")?;
        let bsum: i128 = cur.b.iter().map(|&v| v as i128).sum();
        let rhs = fit(bsum.rem_euclid(2) + 2 * half as i128, "parity pad")?;
        map.push(ReductionStep::ParityPad { row: parity, rhs, slack_hi: half })?;
    }

    let cur = map.target().clone();
    let zero_cols = columns_where(&cur, |s, j| s.mm.col_norm1(j) == 0);
    if !zero_cols.is_empty() {
        let unorm: i128 = cur.u.iter().map(|u| u.unwrap() as i128).sum();
        let unorm = fit(unorm, "zero pad")?;
        let mut row = vec![0; cur.vars()];
        for &j in &zero_cols {
            row[cur.p + j] = 2;
        }
        let rhs = fit(2 * unorm as i128, "zero pad")?;
        map.push(ReductionStep::ZeroPad { row, rhs, slack_hi: unorm })?;
    }

    let twos = columns_where(map.target(), |s, j| s.mm.col(j).contains(&2));
    for j in twos {
        map.push(ReductionStep::SignSplit { col: j })?;
    }
    split_mixed(&mut map)?;
    translate_if_needed(&mut map)?;

    let cur = map.target().clone();
    let mut kept: HashSet<(usize, usize)> = HashSet::new();
    let mut subdivide = Vec::new();
    for j in 0..cur.n {
        let nz = nonzeros(&cur.mm.col(j));
        let [(i1, 1), (i2, 1)] = nz.as_slice() else {
            return Err(Error::Certificate(format!("column {j} is not a 0/1 link after splitting")));
        };
        if j >= inst.n && capacity_implied(&cur, j) && kept.insert((*i1, *i2)) {
            continue;
        }
        subdivide.push(j);
    }
    map.push(ReductionStep::CapacityEliminate { cols: subdivide })?;

    let out = map.target().clone();
    debug_assert!(is_normalized(&out), "normalization missed a bullet");
    Ok((out, map))
}

fn split_mixed(map: &mut SolutionMap) -> Result<()> {
    let mixed = columns_where(map.target(), |s, j| {
        let col = s.mm.col(j);
        col.contains(&1) && col.contains(&-1)
    });
    for j in mixed {
        map.push(ReductionStep::MixedSplit { col: j })?;
    }
    Ok(())
}

fn translate_if_needed(map: &mut SolutionMap) -> Result<()> {
    if map.target().lower().iter().any(|&b| b != Ext::Finite(0)) {
        map.push(ReductionStep::Translate)?;
    }
    Ok(())
}

/// Whether `x_j ≤ u_j` follows from `x ≥ 0` and a row with nonnegative
/// entries, no `y` part and right-hand side at most `u_j`.
fn capacity_implied(inst: &IlpInstance, j: usize) -> bool {
    let Some(cap) = inst.u[j].finite() else {
        return true;
    };
    (0..inst.m).any(|i| {
        inst.mm.get(i, j) > 0
            && inst.b[i] <= cap
            && inst.t.row(i).iter().all(|&v| v == 0)
            && inst.mm.row(i).iter().all(|&v| v >= 0)
    })
}

/// Simple-graph edge list of the matching block, each as `(v1, v2)` with
/// `v1 < v2`.
fn simple_edges(inst: &IlpInstance) -> Result<Vec<(usize, usize)>> {
    incidence_graph(&inst.mm)?
        .simple_edges()
        .map_or_else(|| precondition("G(M) is not simple"), Ok)
}

fn gb_expand_step(inst: &IlpInstance, caps: &[i64]) -> Result<Applied> {
    if inst.p != 0 {
        return precondition("expand_gb needs p = 0");
    }
    if caps.len() != inst.m {
        return precondition("expand_gb: one cap per vertex required");
    }
    let edges = simple_edges(inst)?;
    for (v, (&bv, &cv)) in inst.b.iter().zip(caps).enumerate() {
        if bv < 0 || cv < bv {
            return precondition(format!("expand_gb: vertex {v} needs 0 ≤ b ≤ cap"));
        }
    }
    for (j, &(v1, v2)) in edges.iter().enumerate() {
        if inst.l[j] != Ext::Finite(0) {
            return precondition(format!("expand_gb: edge {j} has a nonzero lower bound"));
        }
        if inst.u[j] < Ext::Finite(inst.b[v1].min(inst.b[v2])) {
            return precondition(format!("expand_gb: edge {j} carries a binding capacity"));
        }
    }
    let copies: i128 = caps.iter().map(|&v| v as i128).sum::<i128>()
        + caps.iter().zip(&inst.b).map(|(&c, &b)| (c - b) as i128).sum::<i128>();
    if copies > 1 << 24 {
        return Err(Error::Cap(format!("expansion would have {copies} vertices")));
    }
    let mut first = Vec::with_capacity(inst.m);
    let mut next = 0usize;
    for &cv in caps {
        first.push(next);
        next += cv as usize;
    }
    let mut dummy_first = Vec::with_capacity(inst.m);
    for (&cv, &bv) in caps.iter().zip(&inst.b) {
        dummy_first.push(next);
        next += (cv - bv) as usize;
    }
    let m2 = next;

    let mut cols: Vec<(usize, usize)> = Vec::new();
    let mut costs = Vec::new();
    let mut wcols: Vec<Vec<i64>> = Vec::new();
    let mut pullback: Vec<Affine> = Vec::with_capacity(inst.n);
    for (j, &(v1, v2)) in edges.iter().enumerate() {
        let mut terms = Vec::new();
        let wcol = inst.w.col(j);
        for a in 0..caps[v1] as usize {
            for b in 0..caps[v2] as usize {
                terms.push((cols.len(), 1));
                cols.push((first[v1] + a, first[v2] + b));
                costs.push(inst.c[j]);
                wcols.push(wcol.clone());
            }
        }
        pullback.push(Affine { konst: 0, terms });
    }
    for v in 0..inst.m {
        for k in 0..(caps[v] - inst.b[v]) as usize {
            for a in 0..caps[v] as usize {
                cols.push((first[v] + a, dummy_first[v] + k));
                costs.push(0);
                wcols.push(vec![0; inst.h]);
            }
        }
    }
    let n2 = cols.len();
    let mut out = IlpInstance::empty(0, inst.h, m2, n2);
    out.c = costs;
    out.w = Matrix::from_cols(&wcols, inst.h);
    out.mm = crate::instance::simple_incidence(m2, &cols);
    out.d = inst.d.clone();
    out.b = vec![1; m2];
    out.l = vec![Ext::Finite(0); n2];
    out.u = vec![Ext::Finite(1); n2];
    Ok(Applied { inst: out, pullback, offset: 0 })
}

/// Replaces each vertex `v` of a simple `G(M)` by `caps[v]` copies and each
/// edge by all edges between copies, giving a perfect matching instance.
/// Copy edges are ordered by (edge, copy of first endpoint, copy of second
/// endpoint). When `caps[v] > b[v]`, `caps[v] − b[v]` dummy vertices adjacent
/// to every copy of `v` absorb the unsaturated copies; their edges come last
/// and have zero cost.
pub fn expand_gb(inst: &IlpInstance, caps: &[i64]) -> Result<(IlpInstance, SolutionMap)> {
    let mut map = SolutionMap::identity(inst);
    map.push(ReductionStep::GbExpand { caps: caps.to_vec() })?;
    Ok((map.target().clone(), map))
}

fn check_perfect_matching_form(inst: &IlpInstance, what: &str) -> Result<()> {
    simple_edges(inst)?;
    let ok = inst.l.iter().all(|&v| v == Ext::Finite(0))
        && inst.u.iter().all(|&v| v == Ext::Finite(1))
        && inst.b.iter().all(|&v| v == 1)
        && inst.p == 0;
    if !ok {
        return precondition(format!("{what} needs p = 0, l = 0, u = 1, b = 1"));
    }
    Ok(())
}

fn condense_step(inst: &IlpInstance, base: i64) -> Result<Applied> {
    let mut row = vec![0i128; inst.n];
    let mut rhs = 0i128;
    let mut pw = 1i128;
    for i in 0..inst.h {
        for (j, r) in row.iter_mut().enumerate() {
            *r = r
                .checked_add(pw.checked_mul(inst.w.get(i, j) as i128).ok_or(Error::Overflow("condense"))?)
                .ok_or(Error::Overflow("condense"))?;
        }
        rhs += pw * inst.d[i] as i128;
        if i + 1 < inst.h {
            pw = pw.checked_mul(base as i128).ok_or(Error::Overflow("condense"))?;
        }
    }
    let row: Vec<i64> = row.into_iter().map(|v| fit(v, "condense")).collect::<Result<_>>()?;
    let mut out = inst.clone();
    out.h = 1;
    out.w = Matrix::from_rows(&[row], inst.n);
    out.d = vec![fit(rhs, "condense")?];
    out.cc = Matrix::zeros(1, inst.p);
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

/// Merges the `h` rows of `W x = d` into one row in base `B = (m/2)Δ + 1`.
/// Instances with `h ≤ 1` are returned unchanged.
pub fn condense_constraints(inst: &IlpInstance) -> Result<Reduced> {
    check_perfect_matching_form(inst, "condense_constraints")?;
    if inst.w.to_rows().iter().flatten().any(|&v| v < 0) {
        return precondition("condense_constraints needs W ≥ 0");
    }
    if inst.h <= 1 {
        return Ok(Reduced::Instance(inst.clone(), SolutionMap::identity(inst)));
    }
    let delta = inst.w.max_abs();
    let cap = (inst.m as i128 / 2) * delta as i128;
    if let Some(i) = inst.d.iter().position(|&v| v < 0 || v as i128 > cap) {
        return Ok(Reduced::Infeasible {
            step: StepKind::Condense,
            reason: format!("d[{i}] = {} lies outside [0, {cap}]", inst.d[i]),
        });
    }
    let base = fit(cap + 1, "condense")?;
    let mut map = SolutionMap::identity(inst);
    map.push(ReductionStep::Condense { base })?;
    Ok(Reduced::Instance(map.target().clone(), map))
}

fn coeff_reduce_step(inst: &IlpInstance, j: usize) -> Result<Applied> {
    check_col(inst, j)?;
    let (Some(lo), Some(hi)) = (inst.l[j].finite(), inst.u[j].finite()) else {
        return precondition(format!("coefficient reduction of column {j} needs finite bounds"));
    };
    let wcol = inst.w.col(j);
    if wcol.iter().any(|&v| v < 0) {
        return precondition("coefficient reduction needs W ≥ 0");
    }
    let nz = nonzeros(&inst.mm.col(j));
    let (first, second): (Option<(usize, i64)>, Option<(usize, i64)>) = match nz.as_slice() {
        [] => (None, None),
        [(i, v)] if v.abs() == 2 => (Some((*i, v / 2)), Some((*i, v / 2))),
        [(i, v)] => (Some((*i, *v)), None),
        [a, b] => (Some(*a), Some(*b)),
        _ => unreachable!("validated column norm"),
    };
    let link = fit(lo as i128 + hi as i128, "coefficient reduction")?;
    let mut out = inst.clone();
    for i in 0..inst.h {
        out.w.set(i, j, (wcol[i] - 1).max(0));
    }
    for i in 0..inst.m {
        out.mm.set(i, j, 0);
    }
    if let Some((i, v)) = first {
        out.mm.set(i, j, v);
    }
    let ra = push_m_row(&mut out, link);
    let rb = push_m_row(&mut out, link);
    out.mm.set(ra, j, 1);
    let zero_w = vec![0; inst.h];
    let mut slack = vec![0; out.m];
    slack[ra] = 1;
    slack[rb] = 1;
    push_x(&mut out, 0, &zero_w, &slack, inst.l[j], inst.u[j]);
    let mut tail = vec![0; out.m];
    tail[rb] = 1;
    if let Some((i, v)) = second {
        tail[i] += v;
    }
    let wmin: Vec<i64> = wcol.iter().map(|&v| v.min(1)).collect();
    push_x(&mut out, 0, &wmin, &tail, inst.l[j], inst.u[j]);
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

/// Splits coefficients of `W` until all entries are 0 or 1. Each round
/// subdivides a column with an entry above 1 into three variables joined by
/// two link rows with right-hand side `l_j + u_j`.
pub fn reduce_coefficients_to_01(inst: &IlpInstance) -> Result<(IlpInstance, SolutionMap)> {
    inst.validate()?;
    if inst.w.to_rows().iter().flatten().any(|&v| v < 0) {
        return precondition("reduce_coefficients_to_01 needs W ≥ 0");
    }
    let mut map = SolutionMap::identity(inst);
    let mut j = 0;
    while j < map.target().n {
        if (0..map.target().h).any(|i| map.target().w.get(i, j) > 1) {
            map.push(ReductionStep::CoeffReduce { col: j })?;
        } else {
            j += 1;
        }
    }
    Ok((map.target().clone(), map))
}

fn quadrangle_step(inst: &IlpInstance) -> Result<Applied> {
    if inst.p != 0 || inst.m != 0 {
        return precondition("quadrangle padding needs a pure system (p = 0, m = 0)");
    }
    let n = inst.n;
    let mut out = inst.clone();
    for j in 0..n {
        let rows: Vec<usize> = (0..4).map(|_| push_m_row(&mut out, 1)).collect();
        let zero_w = vec![0; inst.h];
        // Rows: x_j + x2, x2 + x3, x3 + x4, x_j + x4.
        out.mm.set(rows[0], j, 1);
        out.mm.set(rows[3], j, 1);
        for (a, b) in [(0, 1), (1, 2), (2, 3)] {
            let mut col = vec![0; 4 * (j + 1)];
            col[rows[a]] = 1;
            col[rows[b]] = 1;
            col.resize(out.m, 0);
            push_x(&mut out, 0, &zero_w, &col, Ext::Finite(0), Ext::Finite(1));
        }
    }
    for j in 0..n {
        out.l[j] = Ext::Finite(0);
        out.u[j] = Ext::Finite(1);
    }
    Ok(Applied { inst: out, pullback: identity_pullback(inst.vars()), offset: 0 })
}

/// Embeds each variable of `{W x = d, 0 ≤ x ≤ 1}` into a redundant 4-cycle
/// of `b = 1` rows. Variable `j` keeps index `j`; its three partners follow
/// all original variables.
pub fn add_quadrangles(w: &Matrix, d: &[i64]) -> Result<IlpInstance> {
    let (h, n) = (w.rows(), w.cols());
    let mut base = IlpInstance::empty(0, h, 0, n);
    base.w = w.clone();
    base.d = d.to_vec();
    base.l = vec![Ext::Finite(0); n];
    base.u = vec![Ext::Finite(1); n];
    Ok(ReductionStep::QuadranglePad.apply(&base)?.inst)
}
