//! Finite-height Kisin modules: square Frobenius matrices over truncated
//! series, their determinant valuations, wedge powers, and the isotypic
//! decomposition after composing Frobenius along the unramified part.
//!
//! Row convention throughout: the semilinear operator phi sends the row
//! vector (f_1, ..., f_h) to (sigma f_1, ..., sigma f_h) * A, where sigma
//! raises coefficients to the p-th power and substitutes u -> u^p.

use std::collections::HashMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One};
use serde::{Deserialize, Serialize};

use crate::algebra::{frobenius_sigma, valuation, Fq, TruncSeries, Valuation};
use crate::{Error, Result};

/// A Kisin module of finite u-height: an h x h Frobenius matrix over
/// F_q[[u]] (truncated), together with the ramification degree e of the base
/// field, which normalizes degrees: deg = v_u(det A) / e.
#[derive(Debug, Clone)]
pub struct FiniteKisinModule {
    pub field: Arc<Fq>,
    pub rank: usize,
    pub frobenius: Vec<Vec<TruncSeries>>,
    pub eisenstein_degree: u64,
}

impl FiniteKisinModule {
    pub fn new(
        field: Arc<Fq>,
        frobenius: Vec<Vec<TruncSeries>>,
        eisenstein_degree: u64,
    ) -> Result<FiniteKisinModule> {
        let rank = frobenius.len();
        if rank == 0 {
            return Err(Error::invalid("empty Frobenius matrix"));
        }
        if eisenstein_degree == 0 {
            return Err(Error::invalid("Eisenstein degree must be positive"));
        }
        for row in &frobenius {
            if row.len() != rank {
                return Err(Error::invalid("Frobenius matrix must be square"));
            }
            for s in row {
                if !s.field().same_field(&field) {
                    return Err(Error::invalid("matrix entry over a different field"));
                }
            }
        }
        Ok(FiniteKisinModule {
            field,
            rank,
            frobenius,
            eisenstein_degree,
        })
    }

    /// Working precision: the minimum precision over all entries.
    pub fn precision(&self) -> u64 {
        self.frobenius
            .iter()
            .flatten()
            .map(|s| s.precision())
            .min()
            .unwrap_or(0)
    }

    /// Determinant of the Frobenius matrix as a truncated series.
    pub fn det_series(&self) -> Result<TruncSeries> {
        determinant(&self.frobenius, &self.field)
    }

    /// u-adic valuation of det(A).
    ///
    /// Errors with `PrecisionExhausted` when the determinant vanishes to the
    /// working precision: a zero determinant cannot be certified from finitely
    /// many coefficients, so no `Valuation::Infinity` is ever returned here.
    pub fn det_valuation(&self) -> Result<Valuation> {
        let det = self.det_series()?;
        match valuation(&det) {
            Valuation::Finite(v) => Ok(Valuation::Finite(v)),
            Valuation::Infinity => Err(Error::precision(format!(
                "determinant vanishes to precision {}",
                self.precision()
            ))),
        }
    }

    /// `det_valuation` unwrapped to the finite integer it always carries.
    pub fn det_valuation_finite(&self) -> Result<u64> {
        Ok(self.det_valuation()?.finite().expect("always finite"))
    }

    /// k-th wedge power: the k-th compound matrix, rows and columns indexed
    /// by k-element subsets in lexicographic order, entry (S,T) the minor
    /// det A[S,T]. Same Eisenstein degree.
    pub fn wedge_power(&self, k: usize) -> Result<FiniteKisinModule> {
        let h = self.rank;
        if k == 0 || k > h {
            return Err(Error::invalid(format!(
                "wedge power k = {k} out of range for rank {h}"
            )));
        }
        let subsets = subsets_lex(h, k);
        let n = subsets.len();
        let mut entries = Vec::with_capacity(n);
        for s in &subsets {
            let mut row = Vec::with_capacity(n);
            for t in &subsets {
                let minor: Vec<Vec<TruncSeries>> = s
                    .iter()
                    .map(|&i| t.iter().map(|&j| self.frobenius[i][j].clone()).collect())
                    .collect();
                row.push(determinant(&minor, &self.field)?);
            }
            entries.push(row);
        }
        FiniteKisinModule::new(self.field.clone(), entries, self.eisenstein_degree)
    }
}

/// All k-element subsets of {0, ..., n-1} in lexicographic order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Division-free determinant of a square matrix of truncated series:
/// column-by-column Laplace expansion with memoization on the surviving row
/// set. Exact at the working precision; no pivoting or division, so nothing
/// is lost to non-unit leading coefficients.
pub fn determinant(m: &[Vec<TruncSeries>], field: &Arc<Fq>) -> Result<TruncSeries> {
    let n = m.len();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    for row in m {
        if row.len() != n {
            return Err(Error::invalid("determinant of a non-square matrix"));
        }
    }
    if n > 12 {
        return Err(Error::invalid("determinant supported up to rank 12"));
    }
    let precision = m
        .iter()
        .flatten()
        .map(|s| s.precision())
        .min()
        .unwrap_or(0);
    let mut memo: HashMap<u32, TruncSeries> = HashMap::new();
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    det_rec(m, field, precision, full, 0, &mut memo)
}

fn det_rec(
    m: &[Vec<TruncSeries>],
    field: &Arc<Fq>,
    precision: u64,
    mask: u32,
    col: usize,
    memo: &mut HashMap<u32, TruncSeries>,
) -> Result<TruncSeries> {
    if mask == 0 {
        return Ok(TruncSeries::one(field.clone(), precision));
    }
    if let Some(hit) = memo.get(&mask) {
        return Ok(hit.clone());
    }
    let mut acc = TruncSeries::zero(field.clone(), precision);
    let mut sign_flip = false;
    for r in 0..m.len() {
        if mask & (1 << r) == 0 {
            continue;
        }
        let entry = &m[r][col];
        if !entry.is_zero() {
            let sub = det_rec(m, field, precision, mask & !(1 << r), col + 1, memo)?;
            let term = entry.mul(&sub)?;
            acc = if sign_flip { acc.sub(&term)? } else { acc.add(&term)? };
        }
        sign_flip = !sign_flip;
    }
    memo.insert(mask, acc.clone());
    Ok(acc)
}

/// One isotypic block of the f-fold composed Frobenius.
#[derive(Debug, Clone)]
pub struct QuasiKisinBlock {
    pub field: Arc<Fq>,
    pub block_frobenius: Vec<Vec<TruncSeries>>,
    /// Index of the residue-field embedding the block sits at, in {0..f-1}.
    pub isotypic_index: u32,
    /// Original basis indices spanned by this block, ascending.
    pub support: Vec<usize>,
}

impl QuasiKisinBlock {
    pub fn det_valuation(&self) -> Result<Valuation> {
        let det = determinant(&self.block_frobenius, &self.field)?;
        match valuation(&det) {
            Valuation::Finite(v) => Ok(Valuation::Finite(v)),
            Valuation::Infinity => Err(Error::precision(
                "block determinant vanishes to precision".to_string(),
            )),
        }
    }
}

/// Compose the Frobenius f times (f = residue degree of the coefficient
/// field) and split the result into isotypic blocks: connected components of
/// the nonzero pattern of sigma^{f-1}(A) ... sigma(A) A.
///
/// The decomposition is validated by the exact degree identity
/// v_u(det A) = (p-1)/(p^f-1) * sum over blocks of v_u(det block);
/// matrices violating it (no cyclic block structure) are rejected.
pub fn quasi_kisin_decompose(m: &FiniteKisinModule) -> Result<Vec<QuasiKisinBlock>> {
    let f = m.field.f();
    let h = m.rank;
    // M = sigma^{f-1}(A) * ... * sigma(A) * A, built by left-multiplying
    // successively higher twists.
    let mut composed = m.frobenius.clone();
    for t in 1..f {
        let twisted: Vec<Vec<TruncSeries>> = m
            .frobenius
            .iter()
            .map(|row| row.iter().map(|s| frobenius_sigma(s, t)).collect())
            .collect();
        composed = mat_mul(&twisted, &composed, &m.field)?;
    }

    // Union-find over basis indices joined by nonzero entries of M.
    let mut parent: Vec<usize> = (0..h).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..h {
        for j in 0..h {
            if !composed[i][j].is_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_of: HashMap<usize, usize> = HashMap::new();
    for i in 0..h {
        let r = find(&mut parent, i);
        let idx = *root_of.entry(r).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[idx].push(i);
    }
    components.sort_by_key(|c| c[0]);

    let mut blocks = Vec::with_capacity(components.len());
    for comp in &components {
        let sub: Vec<Vec<TruncSeries>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| composed[i][j].clone()).collect())
            .collect();
        blocks.push(QuasiKisinBlock {
            field: m.field.clone(),
            block_frobenius: sub,
            isotypic_index: (comp[0] as u32) % f,
            support: comp.clone(),
        });
    }

    // Exact degree identity check.
    let p = BigInt::from(m.field.p());
    let qf = p.pow(f);
    let ratio = BigRational::new(&p - BigInt::one(), &qf - BigInt::one());
    let mut block_sum = BigInt::from(0u32);
    for b in &blocks {
        let v = b
            .det_valuation()?
            .finite()
            .expect("block determinant valuation is finite");
        block_sum += BigInt::from(v);
    }
    let lhs = BigRational::from(BigInt::from(m.det_valuation_finite()?));
    let rhs = ratio * BigRational::from(block_sum);
    if lhs != rhs {
        return Err(Error::invalid(format!(
            "composed Frobenius violates the isotypic degree identity: v(det A) = {lhs}, scaled block sum = {rhs}"
        )));
    }
    Ok(blocks)
}

fn mat_mul(
    a: &[Vec<TruncSeries>],
    b: &[Vec<TruncSeries>],
    field: &Arc<Fq>,
) -> Result<Vec<Vec<TruncSeries>>> {
    let n = a.len();
    let precision = a
        .iter()
        .chain(b.iter())
        .flatten()
        .map(|s| s.precision())
        .min()
        .unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = TruncSeries::zero(field.clone(), precision);
            for (k, aik) in a[i].iter().enumerate() {
                if aik.is_zero() || b[k][j].is_zero() {
                    continue;
                }
                acc = acc.add(&aik.mul(&b[k][j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

/// Valuation of the Serre tensor of a module by a rank-rho coefficient
/// extension: degrees scale linearly, v -> rho * v.
pub fn serre_tensor_valuation(v: Valuation, rho: u64) -> Result<Valuation> {
    if rho == 0 {
        return Err(Error::invalid("Serre tensor rank must be positive"));
    }
    match v {
        Valuation::Finite(x) => Ok(Valuation::Finite(
            x.checked_mul(rho)
                .ok_or_else(|| Error::invalid("Serre tensor valuation overflow"))?,
        )),
        Valuation::Infinity => Err(Error::invalid(
            "Serre tensor of an infinite valuation is undefined here",
        )),
    }
}

/// Wire form of a module: field parameters, Eisenstein degree, rank, working
/// precision, and dense coefficient lists for each entry (row-major).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleRepr {
    pub p: u64,
    pub f: u32,
    pub e: u64,
    pub h: usize,
    pub precision: u64,
    pub entries: Vec<Vec<Vec<u64>>>,
    /// Expected distinct line valuations per corank, for fixture files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_mu_by_corank: Option<std::collections::BTreeMap<String, Vec<u64>>>,
    /// Note recording the subset ordering used by any printed wedge display.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge_display_order: Option<String>,
}

impl FiniteKisinModule {
    pub fn to_repr(&self) -> ModuleRepr {
        ModuleRepr {
            p: self.field.p(),
            f: self.field.f(),
            e: self.eisenstein_degree,
            h: self.rank,
            precision: self.precision(),
            entries: self
                .frobenius
                .iter()
                .map(|row| row.iter().map(|s| s.to_repr().coeffs).collect())
                .collect(),
            expected_mu_by_corank: None,
            wedge_display_order: None,
        }
    }

    pub fn from_repr(repr: &ModuleRepr) -> Result<FiniteKisinModule> {
        let field = Fq::canonical(repr.p, repr.f)?;
        if repr.entries.len() != repr.h {
            return Err(Error::invalid("entry rows do not match declared rank"));
        }
        let mut rows = Vec::with_capacity(repr.h);
        for row in &repr.entries {
            if row.len() != repr.h {
                return Err(Error::invalid("entry columns do not match declared rank"));
            }
            let mut out = Vec::with_capacity(repr.h);
            for coeffs in row {
                out.push(TruncSeries::from_dense(field.clone(), repr.precision, coeffs)?);
            }
            rows.push(out);
        }
        FiniteKisinModule::new(field, rows, repr.e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(field: &Arc<Fq>, prec: u64, coeffs: &[u64]) -> TruncSeries {
        TruncSeries::from_dense(field.clone(), prec, coeffs).unwrap()
    }

    fn module(field: &Arc<Fq>, e: u64, prec: u64, rows: &[&[&[u64]]]) -> FiniteKisinModule {
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|c| series(field, prec, c)).collect())
            .collect();
        FiniteKisinModule::new(field.clone(), entries, e).unwrap()
    }

    #[test]
    fn determinant_matches_cofactor_2x2() {
        let fq = Fq::canonical(5, 1).unwrap();
        // [[u, 1+u], [2, 3u^2]]
        let m = module(&fq, 1, 30, &[&[&[0, 1], &[1, 1]], &[&[2], &[0, 0, 3]]]);
        let det = m.det_series().unwrap();
        // u*3u^2 - 2(1+u) = 3u^3 - 2 - 2u
        assert_eq!(det.coeff(0), 3);
        assert_eq!(det.coeff(1), 3);
        assert_eq!(det.coeff(3), 3);
        assert_eq!(m.det_valuation_finite().unwrap(), 0);
    }

    #[test]
    fn determinant_of_permutation_sign() {
        let fq = Fq::canonical(3, 1).unwrap();
        // Antidiagonal 2x2: det = -1 = 2 mod 3.
        let m = module(&fq, 1, 10, &[&[&[], &[1]], &[&[1], &[]]]);
        assert_eq!(m.det_series().unwrap().coeff(0), 2);
    }

    #[test]
    fn wedge_top_equals_determinant() {
        let fq = Fq::canonical(3, 1).unwrap();
        let m = module(
            &fq,
            1,
            40,
            &[
                &[&[0, 1], &[1], &[2]],
                &[&[], &[0, 0, 1], &[1, 1]],
                &[&[], &[], &[0, 1, 1]],
            ],
        );
        let top = m.wedge_power(3).unwrap();
        assert_eq!(
            top.det_valuation_finite().unwrap(),
            m.det_valuation_finite().unwrap()
        );
        assert_eq!(top.rank, 1);
    }

    #[test]
    fn wedge_diagonal_on_triangular() {
        // On upper triangular matrices the compound is upper triangular with
        // diagonal products; det valuation scales by C(h-1, k-1).
        let fq = Fq::canonical(2, 1).unwrap();
        let m = module(
            &fq,
            1,
            100,
            &[
                &[&[0, 1], &[1], &[], &[1]],
                &[&[], &[0, 0, 1], &[1], &[]],
                &[&[], &[], &[0, 1], &[1]],
                &[&[], &[], &[], &[0, 0, 0, 1]],
            ],
        );
        let v1 = m.det_valuation_finite().unwrap(); // 1+2+1+3 = 7
        assert_eq!(v1, 7);
        for k in 1..=4usize {
            let w = m.wedge_power(k).unwrap();
            let expect = binom(3, k - 1) * v1;
            assert_eq!(w.det_valuation_finite().unwrap(), expect, "wedge {k}");
        }
    }

    fn binom(n: u64, k: usize) -> u64 {
        let mut out = 1u64;
        for i in 0..k {
            out = out * (n - i as u64) / (i as u64 + 1);
        }
        out
    }

    #[test]
    fn wedge_of_quartic_toeplitz_matches_display() {
        // Exterior powers of an upper-Toeplitz 4x4 with rows a_1..a_4 in
        // closed form. The square, in colex subset order (the lex order with
        // positions 3 and 4 swapped: 12, 13, 23, 14, 24, 34), is
        //   [a1^2  a1a2  a2^2-a1a3  a1a3  a2a3-a1a4  a3^2-a2a4]
        //   [      a1^2  a1a2       a1a2  a2^2       a2a3-a1a4]
        //   [            a1^2       0     a1a2       a2^2-a1a3]
        //   [                       a1^2  a1a2       a1a3     ]
        //   [                             a1^2       a1a2     ]
        //   [                                        a1^2     ]
        // and the cube, in lex order (123, 124, 134, 234), is
        //   [a1^3  a1^2a2  a1a2^2-a1^2a3  a2^3-2a1a2a3+a1^2a4]
        //   [      a1^3    a1^2a2         a1a2^2-a1^2a3      ]
        //   [              a1^3           a1^2a2             ]
        //   [                             a1^3               ]
        let fq = Fq::canonical(5, 1).unwrap();
        let prec = 64u64;
        let a1 = series(&fq, prec, &[0, 0, 0, 0, 0, 0, 0, 0, 0, 2]);
        let a2 = series(&fq, prec, &[0, 0, 0, 0, 0, 1, 3]);
        let a3 = series(&fq, prec, &[0, 0, 4, 0, 1]);
        let a4 = series(&fq, prec, &[1, 1]);
        let a = [a1, a2, a3, a4];
        let zero = TruncSeries::zero(fq.clone(), prec);
        let rows: Vec<Vec<TruncSeries>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if j >= i { a[j - i].clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        let m = FiniteKisinModule::new(fq.clone(), rows, 1).unwrap();

        let prod = |x: &TruncSeries, y: &TruncSeries| x.mul(y).unwrap();
        let sq = |x: &TruncSeries| prod(x, x);
        let p2 = |i: usize, j: usize| prod(&a[i - 1], &a[j - 1]);
        let z = zero.clone();

        let w2 = m.wedge_power(2).unwrap();
        // Map colex display position -> lex basis position.
        let perm = [0usize, 1, 3, 2, 4, 5];
        let display2: Vec<Vec<TruncSeries>> = vec![
            vec![
                sq(&a[0]),
                p2(1, 2),
                sq(&a[1]).sub(&p2(1, 3)).unwrap(),
                p2(1, 3),
                p2(2, 3).sub(&p2(1, 4)).unwrap(),
                sq(&a[2]).sub(&p2(2, 4)).unwrap(),
            ],
            vec![
                z.clone(),
                sq(&a[0]),
                p2(1, 2),
                p2(1, 2),
                sq(&a[1]),
                p2(2, 3).sub(&p2(1, 4)).unwrap(),
            ],
            vec![
                z.clone(),
                z.clone(),
                sq(&a[0]),
                z.clone(),
                p2(1, 2),
                sq(&a[1]).sub(&p2(1, 3)).unwrap(),
            ],
            vec![z.clone(), z.clone(), z.clone(), sq(&a[0]), p2(1, 2), p2(1, 3)],
            vec![z.clone(), z.clone(), z.clone(), z.clone(), sq(&a[0]), p2(1, 2)],
            vec![z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), sq(&a[0])],
        ];
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(
                    w2.frobenius[perm[i]][perm[j]].terms(),
                    display2[i][j].terms(),
                    "wedge-square entry ({i},{j})"
                );
            }
        }

        let w3 = m.wedge_power(3).unwrap();
        let cube_off = prod(&a[0], &sq(&a[1])).sub(&prod(&sq(&a[0]), &a[2])).unwrap();
        let corner = prod(&a[1], &sq(&a[1]))
            .sub(&prod(&p2(1, 2), &a[2]).add(&prod(&p2(1, 2), &a[2])).unwrap())
            .unwrap()
            .add(&prod(&sq(&a[0]), &a[3]))
            .unwrap();
        let cube_diag = prod(&a[0], &sq(&a[0]));
        let display3: Vec<Vec<TruncSeries>> = vec![
            vec![cube_diag.clone(), prod(&sq(&a[0]), &a[1]), cube_off.clone(), corner],
            vec![z.clone(), cube_diag.clone(), prod(&sq(&a[0]), &a[1]), cube_off],
            vec![z.clone(), z.clone(), cube_diag.clone(), prod(&sq(&a[0]), &a[1])],
            vec![z.clone(), z.clone(), z.clone(), cube_diag],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(
                    w3.frobenius[i][j].terms(),
                    display3[i][j].terms(),
                    "wedge-cube entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn subsets_lex_order() {
        assert_eq!(
            subsets_lex(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn decompose_f1_dense_is_single_block() {
        let fq = Fq::canonical(5, 1).unwrap();
        let m = module(&fq, 1, 30, &[&[&[0, 1], &[1, 1]], &[&[2], &[0, 0, 3]]]);
        let blocks = quasi_kisin_decompose(&m).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].support, vec![0, 1]);
        assert_eq!(blocks[0].isotypic_index, 0);
    }

    #[test]
    fn decompose_f1_diagonal_splits() {
        let fq = Fq::canonical(5, 1).unwrap();
        let m = module(&fq, 1, 30, &[&[&[0, 1], &[]], &[&[], &[0, 0, 1]]]);
        let blocks = quasi_kisin_decompose(&m).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].isotypic_index, 0);
        assert_eq!(blocks[1].isotypic_index, 0); // single embedding at f = 1
    }

    #[test]
    fn serre_tensor_scales() {
        assert_eq!(
            serre_tensor_valuation(Valuation::Finite(7), 3).unwrap(),
            Valuation::Finite(21)
        );
        assert!(serre_tensor_valuation(Valuation::Infinity, 2).is_err());
    }

    #[test]
    fn module_repr_roundtrip() {
        let fq = Fq::canonical(2, 2).unwrap();
        let m = module(&fq, 4, 20, &[&[&[0, 2], &[1]], &[&[], &[3, 1]]]);
        let repr = m.to_repr();
        let back = FiniteKisinModule::from_repr(&repr).unwrap();
        assert_eq!(back.rank, 2);
        assert_eq!(back.eisenstein_degree, 4);
        assert_eq!(back.frobenius[0][0].terms(), m.frobenius[0][0].terms());
    }
}
