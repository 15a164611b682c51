//! Enumeration of saturated phi-stable lines in a finite Kisin module.
//!
//! A line is a rank-1 saturated submodule L = F_q[[u]] * g stable under the
//! semilinear Frobenius: (sigma g) A = w * g for some series w, and the
//! valuation mu = v_u(w) is the invariant of interest (the hodge exponent of
//! the corresponding subgroup is v_u(det A) - mu). Two matrix shapes are
//! supported, covering every shipped preset and their wedge powers:
//!
//! * upper triangular with nonzero diagonal: scaling the generator makes its
//!   first nonzero coordinate an exact monomial u^nu, which forces
//!   w = A[s][s] u^{(p-1)nu}; the remaining coordinates solve a triangular
//!   cascade of scalar sigma-equations a sigma(x) - w x = r, pinned
//!   degree-by-degree (each unknown coefficient is first touched at a unique
//!   degree, with at most one Artin-Schreier branch point per equation);
//! * monomial (one monomial entry per row and column): lines are supported
//!   on cycles of the permutation, where exponents solve an explicit closure
//!   equation and coefficients a norm-type unit equation in F_q^x.
//!
//! The scan is exhaustive over (pivot, pivot valuation) cells, so the
//! returned set of distinct mu values is complete at the working precision.
//! Every witness is re-verified by full substitution before being returned.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::algebra::{frobenius_sigma, valuation, Fq, TruncSeries, Valuation};
use crate::kisin_core::FiniteKisinModule;
use crate::{Error, Result};

/// A saturated stable line: its Frobenius valuation mu and a generating
/// vector, normalized so that the first unit coordinate has constant term 1.
#[derive(Debug, Clone)]
pub struct EigenLine {
    pub mu: u64,
    pub generator: Vec<TruncSeries>,
    /// Index of the first nonzero coordinate of the generator.
    pub pivot: usize,
}

/// Distinct line valuations of the corank-k saturated submodules, computed
/// by enumerating lines in the (h-k)-th wedge power.
pub fn submodule_valuations(m: &FiniteKisinModule, corank: usize) -> Result<Vec<u64>> {
    if corank == 0 || corank >= m.rank {
        return Err(Error::invalid(format!(
            "corank must lie in 1..={}, got {corank}",
            m.rank - 1
        )));
    }
    let wedge = m.wedge_power(m.rank - corank)?;
    Ok(enumerate_lines(&wedge)?.into_iter().map(|l| l.mu).collect())
}

/// Hodge exponent of the subgroup cut out by a line of valuation mu:
/// v_u(det A) - mu. Negative values indicate a non-saturated witness and are
/// rejected.
pub fn hodge_exponent_of_subgroup(m: &FiniteKisinModule, mu: u64) -> Result<u64> {
    let v = m.det_valuation_finite()?;
    v.checked_sub(mu).ok_or_else(|| {
        Error::invalid(format!(
            "line valuation {mu} exceeds det valuation {v}; witness is not saturated"
        ))
    })
}

/// Enumerate the distinct line valuations with one witness each, sorted by
/// mu. Runs the scan in parallel when the `parallel` feature is enabled.
pub fn enumerate_lines(m: &FiniteKisinModule) -> Result<Vec<EigenLine>> {
    collect_lines(m, cfg!(feature = "parallel"))
}

/// Same as [`enumerate_lines`], forcing a single-threaded scan.
pub fn enumerate_lines_sequential(m: &FiniteKisinModule) -> Result<Vec<EigenLine>> {
    collect_lines(m, false)
}

#[derive(Debug)]
enum Shape {
    Triangular,
    /// row -> (column, exponent, coefficient) of the unique monomial entry.
    Monomial(Vec<(usize, u64, u64)>),
}

fn classify(m: &FiniteKisinModule) -> Result<Shape> {
    let h = m.rank;
    let upper = (0..h).all(|i| {
        (0..i).all(|j| m.frobenius[i][j].is_zero()) && !m.frobenius[i][i].is_zero()
    });
    if upper {
        return Ok(Shape::Triangular);
    }
    let mut perm = Vec::with_capacity(h);
    let mut seen_cols = vec![false; h];
    for i in 0..h {
        let nonzero: Vec<usize> = (0..h).filter(|&j| !m.frobenius[i][j].is_zero()).collect();
        if nonzero.len() != 1 {
            return Err(Error::invalid(
                "matrix is neither upper triangular with nonzero diagonal nor monomial",
            ));
        }
        let j = nonzero[0];
        let entry = &m.frobenius[i][j];
        if entry.terms().len() != 1 {
            return Err(Error::invalid(
                "monomial shape requires single-term entries",
            ));
        }
        if seen_cols[j] {
            return Err(Error::invalid("monomial shape requires a permutation pattern"));
        }
        seen_cols[j] = true;
        let (e, c) = entry.terms()[0];
        perm.push((j, e, c));
    }
    Ok(Shape::Monomial(perm))
}

fn collect_lines(m: &FiniteKisinModule, parallel: bool) -> Result<Vec<EigenLine>> {
    let v_det = m.det_valuation_finite()?;
    let precision = m.precision();
    if precision <= 2 * v_det {
        return Err(Error::precision(format!(
            "line enumeration needs precision > 2 * {v_det}, have {precision}"
        )));
    }
    let mut candidates = match classify(m)? {
        Shape::Triangular => triangular_lines(m, v_det, parallel)?,
        Shape::Monomial(perm) => monomial_lines(m, &perm, v_det)?,
    };
    // Deterministic order regardless of scan schedule, then one witness per
    // distinct mu.
    candidates.sort_by_key(|c| (c.mu, c.pivot, generator_key(&c.generator)));
    let mut out: Vec<EigenLine> = Vec::new();
    for cand in candidates {
        if out.last().map_or(false, |l| l.mu == cand.mu) {
            continue;
        }
        verify_line(m, &cand)?;
        out.push(normalize_unit_pivot(cand)?);
    }
    Ok(out)
}

fn generator_key(gen: &[TruncSeries]) -> Vec<(u64, u64)> {
    gen.iter().flat_map(|s| s.terms().to_vec()).collect()
}

struct Candidate {
    mu: u64,
    generator: Vec<TruncSeries>,
    pivot: usize,
    w: TruncSeries,
}

/// Substitute the witness into the line equation: (sigma f) A = w f must
/// vanish identically below the working precision. Any residue is a solver
/// bug, reported loudly.
fn verify_line(m: &FiniteKisinModule, cand: &Candidate) -> Result<()> {
    let h = m.rank;
    let sigma_f: Vec<TruncSeries> = cand
        .generator
        .iter()
        .map(|s| frobenius_sigma(s, 1))
        .collect();
    for k in 0..h {
        let mut lhs = TruncSeries::zero(m.field.clone(), m.precision());
        for j in 0..h {
            if sigma_f[j].is_zero() || m.frobenius[j][k].is_zero() {
                continue;
            }
            lhs = lhs.add(&sigma_f[j].mul(&m.frobenius[j][k])?)?;
        }
        let rhs = cand.w.mul(&cand.generator[k])?;
        if !lhs.sub(&rhs)?.is_zero() {
            return Err(Error::invalid(format!(
                "internal: line witness (mu = {}) failed substitution at coordinate {k}",
                cand.mu
            )));
        }
    }
    Ok(())
}

fn normalize_unit_pivot(cand: Candidate) -> Result<EigenLine> {
    let fq = cand.generator[cand.pivot].field().clone();
    let unit_const = cand
        .generator
        .iter()
        .find_map(|s| match s.leading() {
            Some((0, c)) => Some(c),
            _ => None,
        })
        .ok_or_else(|| Error::invalid("internal: candidate line is not saturated"))?;
    let inv = fq.inv(unit_const)?;
    Ok(EigenLine {
        mu: cand.mu,
        generator: cand.generator.iter().map(|s| s.scale(inv)).collect(),
        pivot: cand.pivot,
    })
}

// ---------------------------------------------------------------------------
// Triangular cascade
// ---------------------------------------------------------------------------

fn triangular_lines(
    m: &FiniteKisinModule,
    v_det: u64,
    parallel: bool,
) -> Result<Vec<Candidate>> {
    let h = m.rank;
    let p = m.field.p();
    let mut cells: Vec<(usize, u64)> = Vec::new();
    for s in 0..h {
        let v_ss = match valuation(&m.frobenius[s][s]) {
            Valuation::Finite(v) => v,
            Valuation::Infinity => unreachable!("diagonal checked nonzero"),
        };
        let nu_max = (v_det - v_ss) / (p - 1);
        for nu in 0..=nu_max {
            cells.push((s, nu));
        }
    }
    let run = |&(s, nu): &(usize, u64)| solve_cell(m, s, nu);
    let results: Vec<Result<Vec<Candidate>>> = if parallel {
        #[cfg(feature = "parallel")]
        {
            cells.par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            cells.iter().map(run).collect()
        }
    } else {
        cells.iter().map(run).collect()
    };
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Solve one (pivot, pivot-valuation) cell of the triangular scan: the pivot
/// coordinate is the exact monomial u^nu, fixing w = A[s][s] u^{(p-1)nu},
/// and the coordinates below the pivot are found by cascading scalar solves.
fn solve_cell(m: &FiniteKisinModule, s: usize, nu: u64) -> Result<Vec<Candidate>> {
    let h = m.rank;
    let p = m.field.p();
    let precision = m.precision();
    let w = m.frobenius[s][s].mul_monomial((p - 1) * nu, 1);
    let mu = match valuation(&w) {
        Valuation::Finite(v) => v,
        Valuation::Infinity => return Ok(Vec::new()),
    };

    let pivot_series = TruncSeries::monomial(m.field.clone(), precision, nu, 1);
    let mut states: Vec<Vec<TruncSeries>> = vec![vec![pivot_series]];
    for k in (s + 1)..h {
        let mut next = Vec::new();
        for partial in &states {
            // r_k = -(sum_{j=s}^{k-1} sigma(f_j) A[j][k])
            let mut r = TruncSeries::zero(m.field.clone(), precision);
            for (offset, f_j) in partial.iter().enumerate() {
                let j = s + offset;
                if f_j.is_zero() || m.frobenius[j][k].is_zero() {
                    continue;
                }
                r = r.add(&frobenius_sigma(f_j, 1).mul(&m.frobenius[j][k])?)?;
            }
            r = r.neg();
            for x in scalar_solve(&m.frobenius[k][k], &w, &r, &m.field, precision)? {
                let mut extended = partial.clone();
                extended.push(x);
                next.push(extended);
            }
        }
        states = next;
        if states.is_empty() {
            return Ok(Vec::new());
        }
    }

    let mut out = Vec::new();
    for coords in states {
        let mut generator = vec![TruncSeries::zero(m.field.clone(), precision); s];
        generator.extend(coords);
        // Saturation: some coordinate must be a unit.
        if generator.iter().any(|g| matches!(g.leading(), Some((0, _)))) {
            out.push(Candidate {
                mu,
                generator,
                pivot: s,
                w: w.clone(),
            });
        }
    }
    Ok(out)
}

/// All solutions x (as truncated series) of the scalar sigma-equation
///   alpha * sigma(x) - g * x = r   (below `precision`),
/// via an event-driven degree scan. Coefficient x[b] is first touched at
/// degree min(p*b + v_alpha, b + v_g); below that threshold it is pinned by
/// a p-th root, above by a linear solve, and at the unique crossing point
/// (when integral) by an Artin-Schreier equation over F_q, which is where
/// branching happens. Degrees carrying no nonzero contribution are skipped
/// entirely, so dead scan cells die cheaply.
fn scalar_solve(
    alpha: &TruncSeries,
    g: &TruncSeries,
    r: &TruncSeries,
    fq: &Arc<Fq>,
    precision: u64,
) -> Result<Vec<TruncSeries>> {
    let p = fq.p();
    let (v_a, lead_a) = alpha
        .leading()
        .ok_or_else(|| Error::invalid("scalar solve needs a nonzero sigma coefficient"))?;
    let (v_g, lead_g) = g
        .leading()
        .ok_or_else(|| Error::invalid("scalar solve needs a nonzero linear coefficient"))?;

    // The Artin-Schreier crossing: p*b + v_a = b + v_g.
    let crossing = if v_g >= v_a && (v_g - v_a) % (p - 1) == 0 {
        Some((v_g - v_a) / (p - 1))
    } else {
        None
    };

    let mut queue: BTreeSet<u64> = r.terms().iter().map(|&(e, _)| e).collect();
    if let Some(b) = crossing {
        if let Some(d) = b.checked_mul(p).and_then(|x| x.checked_add(v_a)) {
            if d < precision {
                queue.insert(d);
            }
        }
    }
    queue.retain(|&d| d < precision);

    let state = SolveState {
        pins: BTreeMap::new(),
        queue,
    };
    let mut solutions = Vec::new();
    run_scalar(
        &ScalarCtx {
            alpha,
            g,
            r,
            fq,
            precision,
            p,
            v_a,
            lead_a,
            v_g,
            lead_g,
            crossing,
        },
        state,
        &mut solutions,
    );
    solutions
        .into_iter()
        .map(|pins| TruncSeries::from_terms(fq.clone(), precision, pins))
        .collect()
}

struct ScalarCtx<'a> {
    alpha: &'a TruncSeries,
    g: &'a TruncSeries,
    r: &'a TruncSeries,
    fq: &'a Arc<Fq>,
    precision: u64,
    p: u64,
    v_a: u64,
    lead_a: u64,
    v_g: u64,
    lead_g: u64,
    crossing: Option<u64>,
}

#[derive(Clone)]
struct SolveState {
    /// Decided coefficients of x (zeros included, so that a coefficient is
    /// never treated as a fresh unknown twice).
    pins: BTreeMap<u64, u64>,
    /// Degrees still to process, ascending.
    queue: BTreeSet<u64>,
}

impl SolveState {
    /// Record a pin; nonzero values schedule their future contributions.
    fn pin(&mut self, ctx: &ScalarCtx, b: u64, val: u64) {
        self.pins.insert(b, val);
        if val == 0 {
            return;
        }
        for &(c, _) in ctx.alpha.terms() {
            if let Some(d) = b.checked_mul(ctx.p).and_then(|x| x.checked_add(c)) {
                if d < ctx.precision {
                    self.queue.insert(d);
                }
            }
        }
        for &(c, _) in ctx.g.terms() {
            let d = b + c;
            if d < ctx.precision {
                self.queue.insert(d);
            }
        }
    }
}

/// Accumulated value of alpha*sigma(x) - g*x at degree d from pinned
/// coefficients.
fn accumulate(ctx: &ScalarCtx, pins: &BTreeMap<u64, u64>, d: u64) -> u64 {
    let fq = ctx.fq;
    let mut acc = 0u64;
    for &(c, ac) in ctx.alpha.terms() {
        if c > d {
            break;
        }
        let rem = d - c;
        if rem % ctx.p == 0 {
            if let Some(&x) = pins.get(&(rem / ctx.p)) {
                acc = fq.add(acc, fq.mul(ac, fq.frobenius(x)));
            }
        }
    }
    for &(c, gc) in ctx.g.terms() {
        if c > d {
            break;
        }
        if let Some(&x) = pins.get(&(d - c)) {
            acc = fq.sub(acc, fq.mul(gc, x));
        }
    }
    acc
}

fn run_scalar(ctx: &ScalarCtx, mut state: SolveState, out: &mut Vec<BTreeMap<u64, u64>>) {
    let fq = ctx.fq;
    while let Some(&d) = state.queue.iter().next() {
        state.queue.remove(&d);
        let acc = accumulate(ctx, &state.pins, d);
        let rhs = ctx.r.coeff(d);

        // Fresh-unknown candidates at this degree (never a decided one).
        let sigma_b = if d >= ctx.v_a && (d - ctx.v_a) % ctx.p == 0 {
            let b = (d - ctx.v_a) / ctx.p;
            // First touch here iff the linear touch is not earlier.
            if b + ctx.v_g >= d && !state.pins.contains_key(&b) {
                Some(b)
            } else {
                None
            }
        } else {
            None
        };
        let linear_b = if d >= ctx.v_g {
            let b = d - ctx.v_g;
            if state.pins.contains_key(&b) {
                None
            } else {
                match b.checked_mul(ctx.p).and_then(|x| x.checked_add(ctx.v_a)) {
                    Some(t) if t < d => None, // sigma touch was earlier
                    _ => Some(b),
                }
            }
        } else {
            None
        };

        match (sigma_b, linear_b) {
            (Some(b1), Some(b2)) => {
                debug_assert_eq!(b1, b2, "distinct unknowns first touched at one degree");
                debug_assert_eq!(ctx.crossing, Some(b1));
                // Artin-Schreier: lead_a * t^p - lead_g * t = rhs - acc.
                let target = fq.sub(rhs, acc);
                let mut continuations = Vec::new();
                for t in fq.elements() {
                    let lhs = fq.sub(
                        fq.mul(ctx.lead_a, fq.pow(t, ctx.p)),
                        fq.mul(ctx.lead_g, t),
                    );
                    if lhs == target {
                        continuations.push(t);
                    }
                }
                // Fork on each root; zero roots kill the branch.
                for t in continuations {
                    let mut forked = state.clone();
                    forked.pin(ctx, b1, t);
                    run_scalar(ctx, forked, out);
                }
                return;
            }
            (Some(b), None) => {
                // lead_a * t^p = rhs - acc: unique p-th root.
                let target = fq.mul(fq.sub(rhs, acc), fq.inv(ctx.lead_a).expect("unit lead"));
                let t = fq.root_p(target);
                state.pin(ctx, b, t);
            }
            (None, Some(b)) => {
                // acc - lead_g * t = rhs.
                let t = fq.mul(fq.sub(acc, rhs), fq.inv(ctx.lead_g).expect("unit lead"));
                state.pin(ctx, b, t);
            }
            (None, None) => {
                if acc != rhs {
                    return; // inconsistent: no solution on this branch
                }
            }
        }
    }
    out.push(state.pins);
}

// ---------------------------------------------------------------------------
// Monomial (permutation) path
// ---------------------------------------------------------------------------

/// Lines of a monomial matrix are supported on cycles of its permutation;
/// exponents solve the cycle closure equation and coefficients a norm-type
/// unit equation in F_q^x. Any saturated line's restriction to a cycle with
/// minimal coordinate valuation zero realizes the same mu, so scanning
/// single cycles yields the complete mu-set.
fn monomial_lines(
    m: &FiniteKisinModule,
    perm: &[(usize, u64, u64)],
    v_det: u64,
) -> Result<Vec<Candidate>> {
    let h = m.rank;
    let p = m.field.p();
    let fq = &m.field;
    let precision = m.precision();
    let q = fq.q();

    let mut seen = vec![false; h];
    let mut out = Vec::new();
    for start in 0..h {
        if seen[start] {
            continue;
        }
        // Collect the cycle through `start` (which is its minimal element,
        // since smaller indices were already consumed).
        let mut cycle = Vec::new();
        let mut j = start;
        loop {
            seen[j] = true;
            cycle.push(j);
            j = perm[j].0;
            if j == start {
                break;
            }
        }
        let len = cycle.len() as u32;
        let exps: Vec<u64> = cycle.iter().map(|&i| perm[i].1).collect();
        let coeffs: Vec<u64> = cycle.iter().map(|&i| perm[i].2).collect();

        // Closure: mu * (p^L - 1)/(p - 1) = beta_0 (p^L - 1) + W, so
        // mu = (p-1) beta_0 + (p-1) W / (p^L - 1) with
        // W = sum_t p^{L-1-t} d_t.
        let pl = (p as u128).pow(len);
        let mut w_sum: u128 = 0;
        for (t, &d) in exps.iter().enumerate() {
            w_sum += (p as u128).pow(len - 1 - t as u32) * d as u128;
        }
        let modulus = pl - 1;
        let t_num = (p as u128 - 1) * w_sum;
        if t_num % modulus != 0 {
            continue; // no integral mu on this cycle
        }
        let t_base = (t_num / modulus) as u64;

        for beta0 in 0.. {
            let mu = (p - 1) * beta0 + t_base;
            if mu > v_det {
                break;
            }
            // Forward orbit of valuations.
            let mut betas = vec![beta0 as i128];
            let mut ok = true;
            for t in 0..len as usize {
                let next = p as i128 * betas[t] + exps[t] as i128 - mu as i128;
                if next < 0 {
                    ok = false;
                    break;
                }
                betas.push(next);
            }
            if !ok || betas[len as usize] != beta0 as i128 {
                continue;
            }
            if betas[..len as usize].iter().min() != Some(&0) {
                continue; // not saturated on this cycle
            }

            // Unit equation: gamma^{p^L - 1} = cst^{(p^L-1)/(p-1)} / U with
            // U = prod_t c_t^{p^{L-1-t}}. Brute-force over F_q^x.
            let exp_reduce = |e: u128| -> u64 { (e % (q as u128 - 1)) as u64 };
            let mut u_val = 1u64;
            for (t, &c) in coeffs.iter().enumerate() {
                let e = exp_reduce((p as u128).pow(len - 1 - t as u32));
                u_val = fq.mul(u_val, fq.pow(c, e));
            }
            let e_norm = exp_reduce(modulus / (p as u128 - 1));
            let e_pl = exp_reduce(modulus);
            let u_inv = fq.inv(u_val)?;
            let mut found: Option<(u64, u64)> = None;
            'search: for cst in 1..q {
                let v = fq.mul(fq.pow(cst, e_norm), u_inv);
                for gamma in 1..q {
                    if fq.pow(gamma, e_pl) == v {
                        found = Some((cst, gamma));
                        break 'search;
                    }
                }
            }
            let Some((cst, gamma)) = found else { continue };

            // Assemble the witness: f at cycle position t is gamma_t u^{beta_t},
            // with gamma_{t+1} = gamma_t^p c_t / cst.
            let cst_inv = fq.inv(cst)?;
            let mut gens = vec![TruncSeries::zero(m.field.clone(), precision); h];
            let mut gt = gamma;
            for (t, &i) in cycle.iter().enumerate() {
                gens[i] = TruncSeries::monomial(m.field.clone(), precision, betas[t] as u64, gt);
                gt = fq.mul(fq.mul(fq.frobenius(gt), coeffs[t]), cst_inv);
            }
            let w = TruncSeries::monomial(m.field.clone(), precision, mu, cst);
            out.push(Candidate {
                mu,
                generator: gens,
                pivot: start,
                w,
            });
        }
    }
    Ok(out)
}

/// Shape report for diagnostics and the CLI.
#[derive(Debug, Clone, Serialize)]
pub enum MatrixShape {
    UpperTriangular,
    Monomial,
}

/// Expose the classification without running the scan.
pub fn matrix_shape(m: &FiniteKisinModule) -> Result<MatrixShape> {
    Ok(match classify(m)? {
        Shape::Triangular => MatrixShape::UpperTriangular,
        Shape::Monomial(_) => MatrixShape::Monomial,
    })
}
