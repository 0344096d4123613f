//! Exact two-phase simplex with Bland's rule over an ordered field, for
//! `min cᵀx  s.t.  A x = b,  lo ≤ x ≤ hi` with possibly infinite bounds.
//!
//! Results carry certificates that [`LpProblem::verify`] re-checks exactly:
//! row duals satisfying complementary slackness at an optimum, a Farkas
//! multiplier for infeasibility, and a recession ray for unboundedness.

use crate::instance::{Ext, IlpInstance};
use crate::numeric::{rat, Field, Rational};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn name(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

/// Outcome of an LP solve.
///
/// * `Optimal`: `x` is a basic optimal solution, `duals` the row duals.
/// * `Infeasible`: `duals` is a Farkas multiplier `y` with
///   `yᵀb > max { yᵀA x : lo ≤ x ≤ hi }`.
/// * `Unbounded`: `x` is feasible and `ray` a recession direction with
///   `cᵀray < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpResult<F = Rational> {
    pub status: LpStatus,
    pub x: Vec<F>,
    pub objective: Option<F>,
    pub duals: Vec<F>,
    pub ray: Vec<F>,
}

/// An LP in equality form with optional bounds (`None` = infinite).
#[derive(Clone, Debug)]
pub struct LpProblem<F> {
    pub a: Vec<Vec<F>>,
    pub b: Vec<F>,
    pub c: Vec<F>,
    pub lo: Vec<Option<F>>,
    pub hi: Vec<Option<F>>,
}

/// How an original variable is expressed in nonnegative columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// `x = lo + z[k]`, with an extra row `z[k] + z[s] = hi − lo` if bounded.
    Lower { k: usize, lo_idx: usize },
    /// `x = hi − z[k]`.
    Upper { k: usize },
    /// `x = z[k] − z[k + 1]`.
    Free { k: usize },
}

impl<F: Field> LpProblem<F> {
    fn cols(&self) -> usize {
        self.c.len()
    }

    /// `max { gᵀx : lo ≤ x ≤ hi }`, `None` if unbounded.
    fn box_max(&self, g: &[F]) -> Option<F> {
        let mut total = F::zero();
        for (j, gj) in g.iter().enumerate() {
            if gj.is_zero() {
                continue;
            }
            let bound = if gj.is_positive() { &self.hi[j] } else { &self.lo[j] };
            total = total + gj.clone() * bound.clone()?;
        }
        Some(total)
    }

    fn row_combination(&self, y: &[F]) -> Vec<F> {
        (0..self.cols())
            .map(|j| {
                self.a.iter().zip(y).fold(F::zero(), |acc, (row, yi)| acc + row[j].clone() * yi.clone())
            })
            .collect()
    }

    pub fn is_feasible(&self, x: &[F]) -> bool {
        if x.len() != self.cols() {
            return false;
        }
        let in_box = x.iter().enumerate().all(|(j, v)| {
            self.lo[j].as_ref().is_none_or(|l| l <= v) && self.hi[j].as_ref().is_none_or(|h| v <= h)
        });
        in_box
            && self.a.iter().zip(&self.b).all(|(row, bi)| {
                row.iter().zip(x).fold(F::zero(), |acc, (a, v)| acc + a.clone() * v.clone()) == *bi
            })
    }

    /// Primal feasibility, dual feasibility and complementary slackness of
    /// `(x, y)`: the reduced cost `r = c − Aᵀy` is positive only where `x`
    /// sits at its lower bound and negative only where it sits at its upper.
    pub fn complementary_slackness(&self, x: &[F], y: &[F]) -> bool {
        if !self.is_feasible(x) || y.len() != self.a.len() {
            return false;
        }
        let ay = self.row_combination(y);
        (0..self.cols()).all(|j| {
            let r = self.c[j].clone() - ay[j].clone();
            if r.is_positive() {
                self.lo[j].as_ref() == Some(&x[j])
            } else if r.is_negative() {
                self.hi[j].as_ref() == Some(&x[j])
            } else {
                true
            }
        })
    }

    fn objective_value(&self, x: &[F]) -> F {
        self.c.iter().zip(x).fold(F::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    /// Re-checks the certificate carried by `res`.
    pub fn verify(&self, res: &LpResult<F>) -> Result<()> {
        let fail = |msg: &str| Err(Error::Certificate(format!("LP {}: {msg}", res.status.name())));
        match res.status {
            LpStatus::Optimal => {
                if !self.complementary_slackness(&res.x, &res.duals) {
                    return fail("complementary slackness violated");
                }
                if res.objective.as_ref() != Some(&self.objective_value(&res.x)) {
                    return fail("objective mismatch");
                }
            }
            LpStatus::Infeasible => {
                if res.duals.len() != self.a.len() {
                    return fail("Farkas multiplier has the wrong length");
                }
                let g = self.row_combination(&res.duals);
                let yb = res.duals.iter().zip(&self.b).fold(F::zero(), |acc, (y, b)| acc + y.clone() * b.clone());
                match self.box_max(&g) {
                    Some(m) if yb > m => {}
                    _ => return fail("Farkas inequality does not separate"),
                }
            }
            LpStatus::Unbounded => {
                if !self.is_feasible(&res.x) {
                    return fail("base point infeasible");
                }
                let d = &res.ray;
                if d.len() != self.cols() {
                    return fail("ray has the wrong length");
                }
                let in_cone = d.iter().enumerate().all(|(j, v)| {
                    (!v.is_negative() || self.lo[j].is_none()) && (!v.is_positive() || self.hi[j].is_none())
                });
                let ad_zero = self
                    .a
                    .iter()
                    .all(|row| row.iter().zip(d).fold(F::zero(), |acc, (a, v)| acc + a.clone() * v.clone()).is_zero());
                if !in_cone || !ad_zero || !self.objective_value(d).is_negative() {
                    return fail("ray is not an improving recession direction");
                }
            }
        }
        Ok(())
    }

    /// Solves the LP exactly.
    pub fn solve(&self) -> LpResult<F> {
        let n = self.cols();
        let m0 = self.a.len();
        // Nonnegative standard form.
        let mut maps = Vec::with_capacity(n);
        let mut width = 0usize;
        let mut bound_rows: Vec<(usize, usize, F)> = Vec::new();
        for j in 0..n {
            match (&self.lo[j], &self.hi[j]) {
                (Some(l), hi) => {
                    maps.push(VarMap::Lower { k: width, lo_idx: j });
                    width += 1;
                    if let Some(h) = hi {
                        bound_rows.push((width - 1, width, h.clone() - l.clone()));
                        width += 1;
                    }
                }
                (None, Some(_)) => {
                    maps.push(VarMap::Upper { k: width });
                    width += 1;
                }
                (None, None) => {
                    maps.push(VarMap::Free { k: width });
                    width += 2;
                }
            }
        }
        let rows = m0 + bound_rows.len();
        let mut a = vec![vec![F::zero(); width]; rows];
        let mut b = vec![F::zero(); rows];
        let mut c = vec![F::zero(); width];
        for i in 0..m0 {
            b[i] = self.b[i].clone();
        }
        for (j, map) in maps.iter().enumerate() {
            match map {
                VarMap::Lower { k, lo_idx } => {
                    let l = self.lo[*lo_idx].clone().expect("lower bound");
                    for i in 0..m0 {
                        a[i][*k] = self.a[i][j].clone();
                        b[i] = b[i].clone() - self.a[i][j].clone() * l.clone();
                    }
                    c[*k] = self.c[j].clone();
                }
                VarMap::Upper { k } => {
                    let h = self.hi[j].clone().expect("upper bound");
                    for i in 0..m0 {
                        a[i][*k] = -self.a[i][j].clone();
                        b[i] = b[i].clone() - self.a[i][j].clone() * h.clone();
                    }
                    c[*k] = -self.c[j].clone();
                }
                VarMap::Free { k } => {
                    for i in 0..m0 {
                        a[i][*k] = self.a[i][j].clone();
                        a[i][*k + 1] = -self.a[i][j].clone();
                    }
                    c[*k] = self.c[j].clone();
                    c[*k + 1] = -self.c[j].clone();
                }
            }
        }
        for (r, (k, s, width_j)) in bound_rows.iter().enumerate() {
            a[m0 + r][*k] = F::one();
            a[m0 + r][*s] = F::one();
            b[m0 + r] = width_j.clone();
        }
        let mut tab = Tableau::new(a, b, width);
        let flips = tab.flips.clone();

        // Phase 1.
        let mut cost1 = vec![F::zero(); width + rows];
        for v in cost1.iter_mut().skip(width) {
            *v = F::one();
        }
        tab.optimize(&cost1, width + rows);
        let infeas = tab.value(&cost1);
        if infeas.is_positive() {
            let pi = tab.duals(&cost1);
            // Farkas multiplier on the original rows, undoing the row flips.
            let y: Vec<F> = (0..m0).map(|i| if flips[i] { -pi[i].clone() } else { pi[i].clone() }).collect();
            return LpResult { status: LpStatus::Infeasible, x: vec![], objective: None, duals: y, ray: vec![] };
        }
        tab.drive_out_artificials(width);

        // Phase 2.
        let mut cost2 = vec![F::zero(); width + rows];
        cost2[..width].clone_from_slice(&c);
        let outcome = tab.optimize(&cost2, width);
        let z = tab.solution();
        let back = |z: &[F], shift: bool| -> Vec<F> {
            maps.iter()
                .enumerate()
                .map(|(j, map)| match map {
                    VarMap::Lower { k, .. } => {
                        let base = if shift { self.lo[j].clone().unwrap() } else { F::zero() };
                        base + z[*k].clone()
                    }
                    VarMap::Upper { k } => {
                        let base = if shift { self.hi[j].clone().unwrap() } else { F::zero() };
                        base - z[*k].clone()
                    }
                    VarMap::Free { k } => z[*k].clone() - z[*k + 1].clone(),
                })
                .collect()
        };
        let x = back(&z, true);
        if let Some(q) = outcome {
            let dz = tab.ray(q);
            let ray = back(&dz, false);
            return LpResult { status: LpStatus::Unbounded, x, objective: None, duals: vec![], ray };
        }
        let pi = tab.duals(&cost2);
        let y: Vec<F> = (0..m0).map(|i| if flips[i] { -pi[i].clone() } else { pi[i].clone() }).collect();
        let objective = Some(self.objective_value(&x));
        LpResult { status: LpStatus::Optimal, x, objective, duals: y, ray: vec![] }
    }
}

/// Dense tableau `[A | I] z = b` with `b ≥ 0`; the identity block holds one
/// artificial per row, so its columns always read `B⁻¹`.
struct Tableau<F> {
    t: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    width: usize,
    /// Rows multiplied by −1 to make the right-hand side nonnegative.
    flips: Vec<bool>,
}

impl<F: Field> Tableau<F> {
    fn new(a: Vec<Vec<F>>, b: Vec<F>, width: usize) -> Self {
        let rows = a.len();
        let mut t = Vec::with_capacity(rows);
        let mut rhs = Vec::with_capacity(rows);
        let mut flips = Vec::with_capacity(rows);
        for (i, (mut row, bi)) in a.into_iter().zip(b).enumerate() {
            let flip = bi.is_negative();
            if flip {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row.resize(width + rows, F::zero());
            row[width + i] = F::one();
            t.push(row);
            rhs.push(if flip { -bi } else { bi });
            flips.push(flip);
        }
        Tableau { t, rhs, basis: (width..width + rows).collect(), width, flips }
    }

    fn reduced_cost(&self, cost: &[F], j: usize) -> F {
        let mut r = cost[j].clone();
        for (i, &bv) in self.basis.iter().enumerate() {
            if !cost[bv].is_zero() && !self.t[i][j].is_zero() {
                r = r - cost[bv].clone() * self.t[i][j].clone();
            }
        }
        r
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = F::one() / self.t[r][q].clone();
        for v in self.t[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() * inv;
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][q].is_zero() {
                continue;
            }
            let f = self.t[i][q].clone();
            for (v, p) in self.t[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v = v.clone() - f.clone() * p.clone();
                }
            }
            self.rhs[i] = self.rhs[i].clone() - f * prhs.clone();
        }
        self.basis[r] = q;
    }

    /// Runs Bland's rule with entering columns restricted to `< allowed`.
    /// Returns the entering column of an unbounded direction, if any.
    fn optimize(&mut self, cost: &[F], allowed: usize) -> Option<usize> {
        loop {
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(q) = entering else {
                return None;
            };
            let mut best: Option<(F, usize, usize)> = None;
            for i in 0..self.t.len() {
                if self.t[i][q].is_positive() {
                    let ratio = self.rhs[i].clone() / self.t[i][q].clone();
                    let better = match &best {
                        None => true,
                        Some((r, _, bv)) => ratio < *r || (ratio == *r && self.basis[i] < *bv),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return Some(q),
                Some((_, r, _)) => self.pivot(r, q),
            }
        }
    }

    fn value(&self, cost: &[F]) -> F {
        self.basis.iter().zip(&self.rhs).fold(F::zero(), |acc, (&bv, v)| acc + cost[bv].clone() * v.clone())
    }

    /// `c_Bᵀ B⁻¹`, read off the artificial columns.
    fn duals(&self, cost: &[F]) -> Vec<F> {
        let rows = self.t.len();
        (0..rows)
            .map(|i| {
                self.basis.iter().enumerate().fold(F::zero(), |acc, (k, &bv)| {
                    acc + cost[bv].clone() * self.t[k][self.width + i].clone()
                })
            })
            .collect()
    }

    /// Pivots zero-level artificials out of the basis where possible; rows
    /// where this fails are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self, width: usize) {
        for r in 0..self.t.len() {
            if self.basis[r] >= width {
                if let Some(q) = (0..width).find(|&j| !self.t[r][j].is_zero() && !self.basis.contains(&j)) {
                    self.pivot(r, q);
                }
            }
        }
    }

    fn solution(&self) -> Vec<F> {
        let mut z = vec![F::zero(); self.width];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.width {
                z[bv] = self.rhs[i].clone();
            }
        }
        z
    }

    fn ray(&self, q: usize) -> Vec<F> {
        let mut d = vec![F::zero(); self.width];
        d[q] = F::one();
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.width {
                d[bv] = -self.t[i][q].clone();
            }
        }
        d
    }
}

fn ext_to_rat(b: Ext) -> Option<Rational> {
    b.finite().map(rat)
}

/// The LP relaxation of a block instance over the rationals.
pub fn relaxation(inst: &IlpInstance) -> LpProblem<Rational> {
    let full = inst.full_matrix();
    LpProblem {
        a: full.to_rows().iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect(),
        b: inst.rhs().into_iter().map(rat).collect(),
        c: inst.objective().into_iter().map(rat).collect(),
        lo: inst.lower().into_iter().map(ext_to_rat).collect(),
        hi: inst.upper().into_iter().map(ext_to_rat).collect(),
    }
}

/// Solves the LP relaxation of `inst` exactly and returns a basic solution.
pub fn lp_relaxation_vertex(inst: &IlpInstance) -> LpResult<Rational> {
    relaxation(inst).solve()
}
