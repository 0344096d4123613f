//! Block ILP instances, the MBILP text format, backdoor detection and the
//! bidirected graph view of a matching block.

use std::cmp::Ordering;
use std::fmt;

use crate::{precondition, Result};

/// Integer or infinite bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    NegInf,
    Finite(i64),
    PosInf,
}

impl Ext {
    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Ext::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Finite value, panicking on an infinite bound. Callers check
    /// [`IlpInstance::has_finite_bounds`] first.
    pub fn unwrap(self) -> i64 {
        self.finite().expect("infinite bound")
    }

    fn rank(self) -> (i8, i64) {
        match self {
            Ext::NegInf => (-1, 0),
            Ext::Finite(v) => (0, v),
            Ext::PosInf => (1, 0),
        }
    }

    pub fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Finite(v) => Ext::Finite(-v),
        }
    }

    pub fn shift(self, by: i64) -> Ext {
        match self {
            Ext::Finite(v) => Ext::Finite(v + by),
            other => other,
        }
    }

    pub fn le_int(self, v: i64) -> bool {
        self <= Ext::Finite(v)
    }

    pub fn ge_int(self, v: i64) -> bool {
        self >= Ext::Finite(v)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "inf"),
            Ext::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    /// Builds a matrix from rows. `cols` is needed when there are no rows.
    pub fn from_rows(rows: &[Vec<i64>], cols: usize) -> Self {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix row {i}");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn from_cols(cols: &[Vec<i64>], rows: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix column {j}");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn col_norm1(&self, j: usize) -> i64 {
        (0..self.rows).map(|i| self.get(i, j).abs()).sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_cols(&self) -> Vec<Vec<i64>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn push_col(&mut self, col: &[i64]) {
        assert_eq!(col.len(), self.rows);
        let mut cols = self.to_cols();
        cols.push(col.to_vec());
        *self = Matrix::from_cols(&cols, self.rows);
    }

    pub fn push_row(&mut self, row: &[i64]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let cols: Vec<Vec<i64>> = idx.iter().map(|&j| self.col(j)).collect();
        Matrix::from_cols(&cols, self.rows)
    }

    pub fn mul_vec(&self, x: &[i64]) -> Vec<i128> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a as i128 * b as i128).sum())
            .collect()
    }

    /// `[[tl, tr], [bl, br]]`; the blocks must agree in shape.
    pub fn blocks(tl: &Matrix, tr: &Matrix, bl: &Matrix, br: &Matrix) -> Matrix {
        assert_eq!(tl.rows, tr.rows);
        assert_eq!(bl.rows, br.rows);
        assert_eq!(tl.cols, bl.cols);
        assert_eq!(tr.cols, br.cols);
        let cols = tl.cols + tr.cols;
        let mut out = Matrix::zeros(tl.rows + bl.rows, cols);
        for i in 0..tl.rows {
            for j in 0..tl.cols {
                out.set(i, j, tl.get(i, j));
            }
            for j in 0..tr.cols {
                out.set(i, tl.cols + j, tr.get(i, j));
            }
        }
        for i in 0..bl.rows {
            for j in 0..bl.cols {
                out.set(tl.rows + i, j, bl.get(i, j));
            }
            for j in 0..br.cols {
                out.set(tl.rows + i, bl.cols + j, br.get(i, j));
            }
        }
        out
    }
}

/// Which of the four block forms an instance is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// p = h = 0.
    Generalized,
    /// h = 0.
    Tall,
    /// p = 0.
    Wide,
    Mixed,
}

/// The block ILP. Solutions are vectors `(y, x)` of length `p + n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IlpInstance {
    pub p: usize,
    pub h: usize,
    pub m: usize,
    pub n: usize,
    pub a: Vec<i64>,
    pub c: Vec<i64>,
    /// `C`, h × p.
    pub cc: Matrix,
    /// `W`, h × n.
    pub w: Matrix,
    /// `T`, m × p.
    pub t: Matrix,
    /// `M`, m × n.
    pub mm: Matrix,
    pub d: Vec<i64>,
    pub b: Vec<i64>,
    pub e: Vec<Ext>,
    pub g: Vec<Ext>,
    pub l: Vec<Ext>,
    pub u: Vec<Ext>,
}

/// Why a candidate solution is rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Length { expected: usize, got: usize },
    Bound { var: usize },
    Row { row: usize, lhs: i128, rhs: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { expected, got } => {
                write!(f, "solution has length {got}, expected {expected}")
            }
            Violation::Bound { var } => write!(f, "variable {var} violates its bounds"),
            Violation::Row { row, lhs, rhs } => write!(f, "row {row}: lhs {lhs} != rhs {rhs}"),
        }
    }
}

impl IlpInstance {
    /// A form (G) instance `Mx = b, l ≤ x ≤ u`.
    pub fn generalized(mm: Matrix, b: Vec<i64>, c: Vec<i64>, l: Vec<Ext>, u: Vec<Ext>) -> Self {
        let (m, n) = (mm.rows(), mm.cols());
        IlpInstance {
            p: 0,
            h: 0,
            m,
            n,
            a: vec![],
            c,
            cc: Matrix::zeros(0, 0),
            w: Matrix::zeros(0, n),
            t: Matrix::zeros(m, 0),
            mm,
            d: vec![],
            b,
            e: vec![],
            g: vec![],
            l,
            u,
        }
    }

    /// An instance with no variables or constraints of the given dimensions,
    /// all zero, with unbounded variables.
    pub fn empty(p: usize, h: usize, m: usize, n: usize) -> Self {
        IlpInstance {
            p,
            h,
            m,
            n,
            a: vec![0; p],
            c: vec![0; n],
            cc: Matrix::zeros(h, p),
            w: Matrix::zeros(h, n),
            t: Matrix::zeros(m, p),
            mm: Matrix::zeros(m, n),
            d: vec![0; h],
            b: vec![0; m],
            e: vec![Ext::NegInf; p],
            g: vec![Ext::PosInf; p],
            l: vec![Ext::NegInf; n],
            u: vec![Ext::PosInf; n],
        }
    }

    pub fn form(&self) -> Form {
        match (self.p, self.h) {
            (0, 0) => Form::Generalized,
            (_, 0) => Form::Tall,
            (0, _) => Form::Wide,
            _ => Form::Mixed,
        }
    }

    pub fn vars(&self) -> usize {
        self.p + self.n
    }

    pub fn cons(&self) -> usize {
        self.h + self.m
    }

    /// Largest absolute entry of `C`, `W` and `T`.
    pub fn delta(&self) -> i64 {
        self.cc.max_abs().max(self.w.max_abs()).max(self.t.max_abs())
    }

    /// Checks dimensions, the matching-block norm condition and bound order.
    pub fn validate(&self) -> Result<()> {
        let (p, h, m, n) = (self.p, self.h, self.m, self.n);
        let shapes = [
            ("a", self.a.len(), p),
            ("c", self.c.len(), n),
            ("d", self.d.len(), h),
            ("b", self.b.len(), m),
            ("e", self.e.len(), p),
            ("g", self.g.len(), p),
            ("l", self.l.len(), n),
            ("u", self.u.len(), n),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return precondition(format!("{name} has length {got}, expected {want}"));
            }
        }
        let mats = [
            ("C", &self.cc, h, p),
            ("W", &self.w, h, n),
            ("T", &self.t, m, p),
            ("M", &self.mm, m, n),
        ];
        for (name, mat, r, c) in mats {
            if mat.rows() != r || mat.cols() != c {
                return precondition(format!(
                    "{name} is {}x{}, expected {r}x{c}",
                    mat.rows(),
                    mat.cols()
                ));
            }
        }
        for j in 0..n {
            if self.mm.col_norm1(j) > 2 {
                return precondition(format!("column {j} of M: column 1-norm exceeds 2"));
            }
        }
        for (lo, hi, what) in [(&self.e, &self.g, "y"), (&self.l, &self.u, "x")] {
            for (j, (a, b)) in lo.iter().zip(hi).enumerate() {
                if a > b || *a == Ext::PosInf || *b == Ext::NegInf {
                    return precondition(format!("bounds of {what}{j} are empty"));
                }
            }
        }
        Ok(())
    }

    pub fn has_finite_bounds(&self) -> bool {
        self.e.iter().chain(&self.g).chain(&self.l).chain(&self.u).all(|b| b.is_finite())
    }

    /// The full matrix `[[C, W], [T, M]]`.
    pub fn full_matrix(&self) -> Matrix {
        Matrix::blocks(&self.cc, &self.w, &self.t, &self.mm)
    }

    pub fn rhs(&self) -> Vec<i64> {
        self.d.iter().chain(&self.b).copied().collect()
    }

    pub fn objective(&self) -> Vec<i64> {
        self.a.iter().chain(&self.c).copied().collect()
    }

    pub fn lower(&self) -> Vec<Ext> {
        self.e.iter().chain(&self.l).copied().collect()
    }

    pub fn upper(&self) -> Vec<Ext> {
        self.g.iter().chain(&self.u).copied().collect()
    }

    /// Replaces the bounds of the `(y, x)` variables.
    pub fn set_bounds(&mut self, lower: &[Ext], upper: &[Ext]) {
        self.e = lower[..self.p].to_vec();
        self.l = lower[self.p..].to_vec();
        self.g = upper[..self.p].to_vec();
        self.u = upper[self.p..].to_vec();
    }

    pub fn objective_value(&self, sol: &[i64]) -> i128 {
        self.objective().iter().zip(sol).map(|(&c, &v)| c as i128 * v as i128).sum()
    }

    /// Verifies feasibility and returns the objective value.
    pub fn check(&self, sol: &[i64]) -> std::result::Result<i128, Violation> {
        if sol.len() != self.vars() {
            return Err(Violation::Length { expected: self.vars(), got: sol.len() });
        }
        for (j, ((lo, hi), &v)) in self.lower().iter().zip(self.upper()).zip(sol).enumerate() {
            if !(lo.le_int(v) && hi.ge_int(v)) {
                return Err(Violation::Bound { var: j });
            }
        }
        let lhs = self.full_matrix().mul_vec(sol);
        for (i, (l, r)) in lhs.iter().zip(self.rhs()).enumerate() {
            if *l != r as i128 {
                return Err(Violation::Row { row: i, lhs: *l, rhs: r });
            }
        }
        Ok(self.objective_value(sol))
    }

    /// Rebuilds an instance from a full constraint system with the first `p`
    /// columns and first `h` rows forming the backdoor.
    pub fn from_full(
        p: usize,
        h: usize,
        a_full: &Matrix,
        rhs: &[i64],
        obj: &[i64],
        lower: &[Ext],
        upper: &[Ext],
    ) -> Self {
        let rows = a_full.rows();
        let cols = a_full.cols();
        let (m, n) = (rows - h, cols - p);
        let sub = |r0: usize, r1: usize, c0: usize, c1: usize| {
            let mut out = Matrix::zeros(r1 - r0, c1 - c0);
            for i in r0..r1 {
                for j in c0..c1 {
                    out.set(i - r0, j - c0, a_full.get(i, j));
                }
            }
            out
        };
        IlpInstance {
            p,
            h,
            m,
            n,
            a: obj[..p].to_vec(),
            c: obj[p..].to_vec(),
            cc: sub(0, h, 0, p),
            w: sub(0, h, p, cols),
            t: sub(h, rows, 0, p),
            mm: sub(h, rows, p, cols),
            d: rhs[..h].to_vec(),
            b: rhs[h..].to_vec(),
            e: lower[..p].to_vec(),
            g: upper[..p].to_vec(),
            l: lower[p..].to_vec(),
            u: upper[p..].to_vec(),
        }
    }
}

/// Parse failure with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

struct Tokens<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut end = (1, 1);
        for (li, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            let mut start = None;
            for (ci, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
                if ch.is_whitespace() {
                    if let Some(s) = start.take() {
                        toks.push(Token { text: &body[s..ci], line: li + 1, col: s + 1 });
                    }
                } else if start.is_none() {
                    start = Some(ci);
                }
            }
            end = (li + 1, line.len() + 1);
        }
        Tokens { toks, pos: 0, end }
    }

    fn err<T>(&self, msg: impl Into<String>) -> std::result::Result<T, ParseError> {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.end,
        };
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text)
    }

    fn missing<T>(&self, label: &str) -> std::result::Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.err(format!("dimension mismatch: expected section '{label}', found '{t}'")),
            None => self.err(format!("missing section '{label}'")),
        }
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.end,
        }
    }

    /// Consumes a label made of one or more words if it is next.
    fn label(&mut self, words: &[&str]) -> bool {
        let matches = words
            .iter()
            .enumerate()
            .all(|(k, w)| self.toks.get(self.pos + k).map(|t| t.text) == Some(*w));
        if matches {
            self.pos += words.len();
        }
        matches
    }

    fn int(&mut self, what: &str) -> std::result::Result<i64, ParseError> {
        match self.peek() {
            Some(t) => match t.parse::<i64>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.err(format!("expected integer for {what}, found '{t}'")),
            },
            None => self.err(format!("expected integer for {what}, found end of input")),
        }
    }

    fn bound(&mut self, what: &str) -> std::result::Result<Ext, ParseError> {
        match self.peek() {
            Some("inf") | Some("+inf") => {
                self.pos += 1;
                Ok(Ext::PosInf)
            }
            Some("-inf") => {
                self.pos += 1;
                Ok(Ext::NegInf)
            }
            _ => self.int(what).map(Ext::Finite),
        }
    }

    fn dim(&mut self, what: &str) -> std::result::Result<usize, ParseError> {
        let v = self.int(what)?;
        if v < 0 {
            self.pos -= 1;
            return self.err(format!("negative dimension {what}"));
        }
        Ok(v as usize)
    }
}

fn section_vec(
    tk: &mut Tokens,
    label: &[&str],
    len: usize,
) -> std::result::Result<Vec<i64>, ParseError> {
    let present = tk.label(label);
    if !present && len > 0 {
        return tk.missing(&label.join(" "));
    }
    (0..len).map(|k| tk.int(&format!("{}[{k}]", label.join(" ")))).collect()
}

fn section_mat(
    tk: &mut Tokens,
    label: &str,
    rows: usize,
    cols: usize,
    positions: Option<&mut Vec<(usize, usize)>>,
) -> std::result::Result<Matrix, ParseError> {
    let present = tk.label(&[label]);
    if !present && rows * cols > 0 {
        return tk.missing(label);
    }
    let mut out = Matrix::zeros(rows, cols);
    let mut pos = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            pos.push(tk.here());
            let v = tk.int(&format!("{label} row {} entry {}", i + 1, j + 1))?;
            out.set(i, j, v);
        }
    }
    if let Some(p) = positions {
        *p = pos;
    }
    Ok(out)
}

fn section_bounds(
    tk: &mut Tokens,
    label: &[&str],
    len: usize,
) -> std::result::Result<(Vec<Ext>, Vec<Ext>), ParseError> {
    let present = tk.label(label);
    if !present && len > 0 {
        return tk.missing(&label.join(" "));
    }
    let mut lo = Vec::with_capacity(len);
    let mut hi = Vec::with_capacity(len);
    for k in 0..len {
        let at = tk.here();
        let a = tk.bound(&format!("lower bound {k}"))?;
        let b = tk.bound(&format!("upper bound {k}"))?;
        if a > b || a == Ext::PosInf || b == Ext::NegInf {
            return Err(ParseError { line: at.0, col: at.1, msg: format!("empty bound pair {a} {b}") });
        }
        lo.push(a);
        hi.push(b);
    }
    Ok((lo, hi))
}

/// Parses an MBILP document.
pub fn parse_instance(text: &str) -> std::result::Result<IlpInstance, ParseError> {
    let mut tk = Tokens::new(text);
    if tk.peek() != Some("MBILP") {
        return tk.err("malformed header: expected 'MBILP 1'");
    }
    tk.pos += 1;
    if tk.peek() != Some("1") {
        return tk.err("malformed header: unsupported version");
    }
    tk.pos += 1;
    let p = tk.dim("p")?;
    let h = tk.dim("h")?;
    let m = tk.dim("m")?;
    let n = tk.dim("n")?;
    let a = section_vec(&mut tk, &["a:"], p)?;
    let c = section_vec(&mut tk, &["c:"], n)?;
    let cc = section_mat(&mut tk, "C:", h, p, None)?;
    let w = section_mat(&mut tk, "W:", h, n, None)?;
    let t = section_mat(&mut tk, "T:", m, p, None)?;
    let mut mpos = Vec::new();
    let mm = section_mat(&mut tk, "M:", m, n, Some(&mut mpos))?;
    for j in 0..n {
        let mut acc = 0;
        for i in 0..m {
            acc += mm.get(i, j).abs();
            if acc > 2 {
                let (line, col) = mpos[i * n + j];
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("column {} of M: column 1-norm exceeds 2", j + 1),
                });
            }
        }
    }
    let d = section_vec(&mut tk, &["d:"], h)?;
    let b = section_vec(&mut tk, &["b:"], m)?;
    let (e, g) = section_bounds(&mut tk, &["e", "g:"], p)?;
    let (l, u) = section_bounds(&mut tk, &["l", "u:"], n)?;
    if let Some(t) = tk.peek() {
        return tk.err(format!("dimension mismatch: unexpected trailing token '{t}'"));
    }
    Ok(IlpInstance { p, h, m, n, a, c, cc, w, t, mm, d, b, e, g, l, u })
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes an instance in MBILP format, one matrix row per line.
pub fn serialize_instance(inst: &IlpInstance) -> String {
    let mut s = String::from("MBILP 1\n");
    s += &format!("{} {} {} {}\n", inst.p, inst.h, inst.m, inst.n);
    if inst.p > 0 {
        s += &format!("a: {}\n", join(&inst.a));
    }
    s += &format!("c: {}\n", join(&inst.c)).replace(": \n", ":\n");
    let mut mat = |label: &str, mat: &Matrix, skip: bool| {
        if skip {
            return;
        }
        s += label;
        s += "\n";
        for i in 0..mat.rows() {
            s += &join(mat.row(i));
            s += "\n";
        }
    };
    mat("C:", &inst.cc, inst.h == 0 || inst.p == 0);
    mat("W:", &inst.w, inst.h == 0);
    mat("T:", &inst.t, inst.p == 0);
    mat("M:", &inst.mm, false);
    if inst.h > 0 {
        s += &format!("d: {}\n", join(&inst.d));
    }
    s += &format!("b: {}\n", join(&inst.b)).replace(": \n", ":\n");
    let pairs = |lo: &[Ext], hi: &[Ext]| {
        lo.iter().zip(hi).map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join("  ")
    };
    if inst.p > 0 {
        s += &format!("e g: {}\n", pairs(&inst.e, &inst.g));
    }
    s += &format!("l u: {}\n", pairs(&inst.l, &inst.u)).replace(": \n", ":\n");
    s
}

/// Moves every column of 1-norm greater than 2 to the front. Returns the
/// column order (0-based) and the number of moved columns.
pub fn detect_tall_backdoor(a: &Matrix) -> (Vec<usize>, usize) {
    let (heavy, light): (Vec<usize>, Vec<usize>) =
        (0..a.cols()).partition(|&j| a.col_norm1(j) > 2);
    let p = heavy.len();
    (heavy.into_iter().chain(light).collect(), p)
}

/// A deletion backdoor: rows and columns whose removal leaves column
/// 1-norms at most 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedBackdoor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MixedBackdoor {
    pub fn size(&self) -> usize {
        self.rows.len() + self.cols.len()
    }
}

fn offending_column(a: &Matrix, rows: &[bool], cols: &[bool]) -> Option<usize> {
    (0..a.cols()).find(|&j| {
        !cols[j] && (0..a.rows()).filter(|&i| !rows[i]).map(|i| a.get(i, j).abs()).sum::<i64>() > 2
    })
}

fn mixed_search(a: &Matrix, rows: &mut Vec<bool>, cols: &mut Vec<bool>, left: usize) -> bool {
    let Some(j) = offending_column(a, rows, cols) else {
        return true;
    };
    if left == 0 {
        return false;
    }
    cols[j] = true;
    if mixed_search(a, rows, cols, left - 1) {
        return true;
    }
    cols[j] = false;
    let mut entries: Vec<(i64, usize)> = (0..a.rows())
        .filter(|&i| !rows[i] && a.get(i, j) != 0)
        .map(|i| (-a.get(i, j).abs(), i))
        .collect();
    entries.sort();
    for &(_, i) in entries.iter().take(3) {
        rows[i] = true;
        if mixed_search(a, rows, cols, left - 1) {
            return true;
        }
        rows[i] = false;
    }
    false
}

/// Finds a minimum-size deletion backdoor of size at most `budget` by
/// iterative deepening. Any valid deletion set either removes an offending
/// column or one of its three largest entries, so branching on those four
/// options is complete.
pub fn detect_mixed_backdoor(a: &Matrix, budget: usize) -> Option<MixedBackdoor> {
    for k in 0..=budget {
        let mut rows = vec![false; a.rows()];
        let mut cols = vec![false; a.cols()];
        if mixed_search(a, &mut rows, &mut cols, k) {
            let pick = |v: &[bool]| v.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect();
            return Some(MixedBackdoor { rows: pick(&rows), cols: pick(&cols) });
        }
    }
    None
}

/// One column of a matching block read as an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    /// All-zero column.
    Empty,
    /// A single ±1 entry.
    Half { v: usize, sign: i8 },
    /// A single ±2 entry.
    Loop { v: usize, sign: i8 },
    /// Two ±1 entries on distinct rows, `v1 < v2`.
    Link { v1: usize, s1: i8, v2: usize, s2: i8 },
}

/// Bidirected graph `G(M)`: one vertex per row, one edge per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidirectedGraph {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

impl BidirectedGraph {
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.vertices, self.edges.len());
        for (j, e) in self.edges.iter().enumerate() {
            match *e {
                Edge::Empty => {}
                Edge::Half { v, sign } => m.set(v, j, sign as i64),
                Edge::Loop { v, sign } => m.set(v, j, 2 * sign as i64),
                Edge::Link { v1, s1, v2, s2 } => {
                    m.set(v1, j, s1 as i64);
                    m.set(v2, j, s2 as i64);
                }
            }
        }
        m
    }

    /// All edges are positive links and no two edges share both endpoints.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|e| match *e {
            Edge::Link { v1, s1: 1, v2, s2: 1 } => seen.insert((v1, v2)),
            _ => false,
        })
    }

    /// Endpoint pairs of a simple graph.
    pub fn simple_edges(&self) -> Option<Vec<(usize, usize)>> {
        if !self.is_simple() {
            return None;
        }
        Some(
            self.edges
                .iter()
                .map(|e| match *e {
                    Edge::Link { v1, v2, .. } => (v1, v2),
                    _ => unreachable!(),
                })
                .collect(),
        )
    }
}

/// Reads a matching block as a bidirected graph.
pub fn incidence_graph(mm: &Matrix) -> Result<BidirectedGraph> {
    let mut edges = Vec::with_capacity(mm.cols());
    for j in 0..mm.cols() {
        if mm.col_norm1(j) > 2 {
            return precondition(format!("column {j}: column 1-norm exceeds 2"));
        }
        let nz: Vec<(usize, i64)> =
            (0..mm.rows()).map(|i| (i, mm.get(i, j))).filter(|p| p.1 != 0).collect();
        edges.push(match nz.as_slice() {
            [] => Edge::Empty,
            [(v, x)] if x.abs() == 1 => Edge::Half { v: *v, sign: x.signum() as i8 },
            [(v, x)] => Edge::Loop { v: *v, sign: x.signum() as i8 },
            [(v1, x1), (v2, x2)] => {
                Edge::Link { v1: *v1, s1: x1.signum() as i8, v2: *v2, s2: x2.signum() as i8 }
            }
            _ => unreachable!(),
        });
    }
    Ok(BidirectedGraph { vertices: mm.rows(), edges })
}

/// Incidence matrix of a simple graph on `m` vertices.
pub fn simple_incidence(m: usize, edges: &[(usize, usize)]) -> Matrix {
    let mut mat = Matrix::zeros(m, edges.len());
    for (j, &(a, b)) in edges.iter().enumerate() {
        mat.set(a, j, 1);
        mat.set(b, j, 1);
    }
    mat
}
