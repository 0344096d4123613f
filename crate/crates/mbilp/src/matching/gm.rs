//! Generalized matching through normalization, proximity and the copy
//! expansion, plus `f_{c,M}` and optimization over `P_{r,U}`.

use crate::instance::{incidence_graph, Ext, IlpInstance, Matrix};
use crate::lp::{lp_relaxation_vertex, LpStatus};
use crate::proximity::proximity_box;
use crate::reduction::{expand_gb, normalize_to_b_matching};
use crate::{precondition, Error, Outcome, Result};

use super::{min_cost_perfect_matching, FValue};

/// Default limit on `‖z‖₁` for [`f_cm`]; the expansion has `‖z‖₁` vertices.
pub const F_CM_CAP: i64 = 64;

/// Solves the perfect matching instance produced by `expand_gb` and maps
/// the matching back through `map`. `None` when no perfect matching exists.
fn solve_expanded(expanded: &IlpInstance) -> Result<Option<Vec<i64>>> {
    let edges = incidence_graph(&expanded.mm)?
        .simple_edges()
        .ok_or_else(|| Error::Certificate("expanded graph is not simple".into()))?;
    let Some(mt) = min_cost_perfect_matching(expanded.m, &edges, &expanded.c)? else {
        return Ok(None);
    };
    let mut x = vec![0; expanded.n];
    for j in mt.edges {
        x[j] = 1;
    }
    Ok(Some(x))
}

/// `f_{c,M}(z)` together with an optimal perfect z-matching `x`.
pub fn f_cm_with_solution(c: &[i64], mm: &Matrix, z: &[i64]) -> Result<(FValue, Option<Vec<i64>>)> {
    f_cm_capped(c, mm, z, F_CM_CAP)
}

/// `f_{c,M}(z) = min { cᵀx : Mx = z, x ≥ 0 integral }` for simple `G(M)`.
pub fn f_cm(c: &[i64], mm: &Matrix, z: &[i64]) -> Result<FValue> {
    Ok(f_cm_with_solution(c, mm, z)?.0)
}

/// [`f_cm_with_solution`] with an explicit limit on `‖z‖₁`.
pub fn f_cm_capped(c: &[i64], mm: &Matrix, z: &[i64], cap: i64) -> Result<(FValue, Option<Vec<i64>>)> {
    if z.len() != mm.rows() || c.len() != mm.cols() {
        return precondition("f_cm: dimension mismatch");
    }
    if !incidence_graph(mm)?.is_simple() {
        return precondition("f_cm needs a simple graph; normalize first");
    }
    if z.iter().any(|&v| v < 0) {
        return Ok((FValue::Infinite, None));
    }
    let total: i128 = z.iter().map(|&v| v as i128).sum();
    if total > cap as i128 {
        return Err(Error::Cap(format!("f_cm: ‖z‖₁ = {total} exceeds {cap}")));
    }
    let n = mm.cols();
    let inst = IlpInstance::generalized(mm.clone(), z.to_vec(), c.to_vec(), vec![Ext::Finite(0); n], vec![Ext::PosInf; n]);
    let (expanded, map) = expand_gb(&inst, z)?;
    match solve_expanded(&expanded)? {
        None => Ok((FValue::Infinite, None)),
        Some(x) => {
            let sol = map.pull_back(&x)?;
            let value = inst.objective_value(&sol);
            let value = i64::try_from(value).map_err(|_| Error::Overflow("f_cm"))?;
            Ok((FValue::Finite(value), Some(sol)))
        }
    }
}

/// Exact optimum of a form (G) instance (`p = h = 0`, `‖M_j‖₁ ≤ 2`).
///
/// Unbounded LPs are settled by a feasibility solve with `c = 0`. Otherwise
/// the instance is cut to the proximity box around an LP vertex, normalized
/// to perfect b-matching form, expanded to a perfect matching instance, and
/// the matching is pulled back through both maps.
pub fn solve_generalized_matching(inst: &IlpInstance) -> Result<Outcome> {
    inst.validate()?;
    if inst.p != 0 || inst.h != 0 {
        return precondition("solve_generalized_matching needs p = h = 0");
    }
    let lp = lp_relaxation_vertex(inst);
    match lp.status {
        LpStatus::Infeasible => return Ok(Outcome::Infeasible),
        LpStatus::Unbounded => {
            let mut zero = inst.clone();
            zero.c = vec![0; inst.n];
            return Ok(match solve_generalized_matching(&zero)? {
                Outcome::Infeasible => Outcome::Infeasible,
                _ => Outcome::Unbounded,
            });
        }
        LpStatus::Optimal => {}
    }
    let bx = proximity_box(inst, &lp)?;
    if bx.is_empty() {
        return Ok(Outcome::Infeasible);
    }
    if bx.lower.iter().chain(&bx.upper).any(|b| !b.is_finite()) {
        return Err(Error::Cap("proximity box does not fit in i64".into()));
    }
    let boxed = bx.apply(inst);
    let (normal, norm_map) = normalize_to_b_matching(&boxed)?;
    let caps = normal.b.clone();
    let (expanded, gb_map) = expand_gb(&normal, &caps)?;
    let map = norm_map.then(gb_map)?;
    let Some(x) = solve_expanded(&expanded)? else {
        return Ok(Outcome::Infeasible);
    };
    let solution = map.pull_back(&x)?;
    let value = i64::try_from(inst.objective_value(&solution)).map_err(|_| Error::Overflow("generalized matching"))?;
    Ok(Outcome::Optimal { value, solution })
}

/// Result of minimizing `c̃ᵀ(ω, z)` over `P_{r,U}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParityOpt {
    /// A minimizer `(ω, z)` with `ω = f(z)` and a perfect z-matching `x`
    /// of cost `ω`.
    Optimal { value: i128, omega: i64, z: Vec<i64>, x: Vec<i64> },
    /// `S_{r,U}` has no point.
    Empty,
    /// `c̃₀ < 0` on a nonempty domain.
    Unbounded,
}

/// Minimizes `c̃₀ ω + c̃_zᵀ z` over `P_{r,U}` for a simple `G(M)`, via the
/// generalized matching instance `Mx + 2s = U·1 − r̃`, `r̃ = (U·1 + r) mod 2`.
pub fn parity_constrained_opt(c_tilde: &[i64], c: &[i64], mm: &Matrix, r: &[i64], u: i64) -> Result<ParityOpt> {
    let (m, n) = (mm.rows(), mm.cols());
    if c_tilde.len() != m + 1 || c.len() != n || r.len() != m {
        return precondition("parity_constrained_opt: dimension mismatch");
    }
    if r.iter().any(|&v| v != 0 && v != 1) || u < 0 {
        return precondition("parity_constrained_opt needs r ∈ {0,1}^m and U ≥ 0");
    }
    if !incidence_graph(mm)?.is_simple() {
        return precondition("parity_constrained_opt needs a simple graph");
    }
    let c0 = c_tilde[0];
    if c0 < 0 {
        let mut zero = c_tilde.to_vec();
        zero.fill(0);
        return Ok(match parity_constrained_opt(&zero, c, mm, r, u)? {
            ParityOpt::Empty => ParityOpt::Empty,
            _ => ParityOpt::Unbounded,
        });
    }
    let mut a = mm.clone();
    for i in 0..m {
        let mut col = vec![0; m];
        col[i] = 2;
        a.push_col(&col);
    }
    let rhs: Vec<i64> = r.iter().map(|&ri| u - (u + ri).rem_euclid(2)).collect();
    let mut obj: Vec<i64> = (0..n)
        .map(|j| {
            let zpart: i128 = (0..m).map(|i| mm.get(i, j) as i128 * c_tilde[1 + i] as i128).sum();
            i64::try_from(c0 as i128 * c[j] as i128 + zpart).map_err(|_| Error::Overflow("parity objective"))
        })
        .collect::<Result<_>>()?;
    obj.extend(std::iter::repeat_n(0, m));
    let inst = IlpInstance::generalized(a, rhs, obj, vec![Ext::Finite(0); n + m], vec![Ext::PosInf; n + m]);
    let sol = match solve_generalized_matching(&inst)? {
        Outcome::Optimal { solution, .. } => solution,
        Outcome::Infeasible => return Ok(ParityOpt::Empty),
        Outcome::Unbounded => return Err(Error::Certificate("bounded parity instance reported unbounded".into())),
    };
    let mut x = sol[..n].to_vec();
    let z: Vec<i64> = mm.mul_vec(&x).into_iter().map(|v| v as i64).collect();
    if c0 == 0 {
        // Any x with Mx = z was optimal; replace it by a cheapest one.
        let exact = IlpInstance::generalized(mm.clone(), z.clone(), c.to_vec(), vec![Ext::Finite(0); n], vec![Ext::PosInf; n]);
        match solve_generalized_matching(&exact)? {
            Outcome::Optimal { solution, .. } => x = solution,
            _ => return Err(Error::Certificate("z from a feasible x has no perfect z-matching".into())),
        }
    }
    let omega: i128 = x.iter().zip(c).map(|(&xj, &cj)| xj as i128 * cj as i128).sum();
    let omega = i64::try_from(omega).map_err(|_| Error::Overflow("parity omega"))?;
    let value = c0 as i128 * omega as i128 + z.iter().zip(&c_tilde[1..]).map(|(&zi, &ci)| zi as i128 * ci as i128).sum::<i128>();
    Ok(ParityOpt::Optimal { value, omega, z, x })
}
