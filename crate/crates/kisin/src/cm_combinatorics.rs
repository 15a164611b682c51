//! Combinatorics of unramified CM types: reflex weights, minimal subset
//! sums, and the exact Hodge valuations they produce for kernels of p-power
//! isogenies.
//!
//! Conventions: the local CM field is unramified of degree h with cyclic
//! Galois action shifting embeddings by one; a CM type is a subset
//! phi of {1..h} with 1 <= |phi| <= h-1, and the Hodge cocharacter has
//! multiplicity |phi| = h - d, where d is the dimension. A kernel type is a
//! non-increasing tuple (lambda_1, ..., lambda_h) recording the cyclic
//! factors Z/p^{lambda_i} of the kernel, with lambda_1 = n and
//! k = #{i : lambda_i > 0} < h (the kernel meets no p-power torsion fully).

use num::{BigInt, BigRational, BigUint, One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A local unramified CM type: degree h, type subset phi of {1..h}, residue
/// characteristic p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CMTypeLocal {
    pub h: u32,
    pub phi: Vec<u32>,
    pub p: u64,
}

impl CMTypeLocal {
    pub fn new(h: u32, phi: Vec<u32>, p: u64) -> Result<CMTypeLocal> {
        if h < 2 {
            return Err(Error::invalid("CM type needs degree h >= 2"));
        }
        let mut phi = phi;
        phi.sort_unstable();
        phi.dedup();
        if phi.is_empty() || phi.len() >= h as usize {
            return Err(Error::invalid(
                "CM type must satisfy 1 <= |phi| <= h-1 (neither empty nor full)",
            ));
        }
        if phi.iter().any(|&a| a == 0 || a > h) {
            return Err(Error::invalid("CM type elements must lie in 1..=h"));
        }
        if p < 2 {
            return Err(Error::invalid("p must be a prime"));
        }
        Ok(CMTypeLocal { h, phi, p })
    }

    /// Dimension d = h - |phi| of the p-divisible group with this type.
    pub fn dimension(&self) -> u32 {
        self.h - self.phi.len() as u32
    }
}

/// Kernel type of a finite subgroup of a CM p-divisible group: the
/// non-increasing exponents of its cyclic decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelType {
    pub lambdas: Vec<u32>,
    /// n = lambda_1, the p-exponent of the kernel.
    pub n: u32,
    /// Number of nonzero lambda_i; must stay below h so the kernel contains
    /// no full torsion level.
    pub k: u32,
}

impl KernelType {
    pub fn new(lambdas: Vec<u32>) -> Result<KernelType> {
        if lambdas.is_empty() {
            return Err(Error::invalid("kernel type needs at least one entry"));
        }
        if lambdas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("kernel type exponents must be non-increasing"));
        }
        let n = lambdas[0];
        let k = lambdas.iter().filter(|&&x| x > 0).count() as u32;
        if k == lambdas.len() as u32 && n > 0 {
            return Err(Error::invalid(
                "kernel type with all entries positive contains a full torsion level",
            ));
        }
        Ok(KernelType { lambdas, n, k })
    }

    /// Multiplicity function: iota(j) = #{i : lambda_i >= j} for 1 <= j <= n.
    pub fn multiplicity(&self, j: u32) -> u32 {
        self.lambdas.iter().filter(|&&l| l >= j).count() as u32
    }
}

/// Reflex weights of the CM type: for each power tau_t (t = 0..h-1) of the
/// cyclic shift, the weight w_t = sum over alpha in phi of
/// p^(h - tau_t^{-1}(alpha)), where tau_t^{-1}(alpha) = ((alpha-t-1) mod h) + 1.
///
/// These are the u-degrees of the diagonal blocks of the h-fold composed
/// Frobenius of the cyclic unramified module with type phi.
pub fn reflex_weights(t: &CMTypeLocal) -> Vec<BigUint> {
    let h = t.h;
    let p = BigUint::from(t.p);
    (0..h)
        .map(|shift| {
            t.phi
                .iter()
                .map(|&alpha| {
                    let inv = ((alpha as i64 - shift as i64 - 1).rem_euclid(h as i64)) as u32 + 1;
                    p.pow(h - inv)
                })
                .sum()
        })
        .collect()
}

/// Minimum sum over k-element subsets of `weights`, with the lexicographically
/// smallest attaining index subset.
pub fn min_subset_sum(weights: &[BigUint], k: usize) -> Result<(BigUint, Vec<usize>)> {
    if k == 0 || k > weights.len() {
        return Err(Error::invalid(format!(
            "subset size {k} out of range for {} weights",
            weights.len()
        )));
    }
    let idx = crate::kisin_core::subsets_lex(weights.len(), k);
    let mut best: Option<(BigUint, Vec<usize>)> = None;
    for subset in idx {
        let sum: BigUint = subset.iter().map(|&i| weights[i].clone()).sum();
        match &best {
            Some((b, _)) if *b <= sum => {}
            _ => best = Some((sum, subset)),
        }
    }
    Ok(best.expect("nonempty subset list"))
}

fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Hodge valuation contributed by a p-torsion subgroup of corank-profile k:
/// M_k * (p-1)/(p^h - 1), in units of the Eisenstein degree e.
pub fn hodge_val_unram_p_torsion(t: &CMTypeLocal, k: u32) -> Result<BigRational> {
    let weights = reflex_weights(t);
    let (m, _) = min_subset_sum(&weights, k as usize)?;
    let p = BigUint::from(t.p);
    Ok(big_ratio(
        m * (p.clone() - BigUint::one()),
        p.pow(t.h) - BigUint::one(),
    ))
}

/// Exact Hodge valuation for a full kernel type, by devissage through the
/// torsion levels: sum over levels j = 1..n of
/// M_{iota(j)} * p^{1-j} * (p-1)/(p^h - 1),
/// where iota(j) counts the cyclic factors still alive at level j. In units
/// of the Eisenstein degree e.
pub fn hodge_val_unram_full(t: &CMTypeLocal, kt: &KernelType) -> Result<BigRational> {
    if kt.lambdas.len() != t.h as usize {
        return Err(Error::invalid(format!(
            "kernel type length {} does not match CM degree {}",
            kt.lambdas.len(),
            t.h
        )));
    }
    if kt.k >= t.h {
        return Err(Error::invalid("kernel type must have k < h"));
    }
    let weights = reflex_weights(t);
    let p = BigUint::from(t.p);
    let denom = p.pow(t.h) - BigUint::one();
    let mut total = BigRational::zero();
    let mut m_cache: std::collections::HashMap<u32, BigUint> = std::collections::HashMap::new();
    for j in 1..=kt.n {
        let iota = kt.multiplicity(j);
        if iota == 0 {
            break;
        }
        let m = m_cache
            .entry(iota)
            .or_insert_with(|| min_subset_sum(&weights, iota as usize).unwrap().0)
            .clone();
        // level j contributes with scaling p^{1-j}
        let term = big_ratio(m * (p.clone() - BigUint::one()), denom.clone())
            / BigRational::from(BigInt::from(p.pow(j - 1)));
        total += term;
    }
    Ok(total)
}

/// Sharp upper bound for `hodge_val_unram_full` over all CM types of degree
/// h and dimension d, for kernels of p-height k inside the p^n-torsion.
///
/// The extremal kernel type is the rectangle (n, ..., n, 0, ...) with k
/// nonzero entries, so the bound is
///
///   max over types of M(k) * (p-1)/(p^h - 1) * (1-p^-n)/(1-p^-1),
///
/// computed by brute force over all types of the given dimension. When
/// delta = h/(h-d) is an integer the maximum is attained by the evenly
/// spaced type {1, 1+delta, ...}, whose weights are p^r (p^h-1)/(p^delta-1)
/// for r = 0..delta-1 with multiplicity h-d each; for k <= h-d this gives
/// the closed form k * (p-1)/(p^delta - 1) * (1-p^-n)/(1-p^-1), which for
/// k = 1 is the familiar (p-1)/(p^delta - 1) * geometric factor.
pub fn unram_bound(p: u64, h: u32, d: u32, k: u32, n: u32) -> Result<BigRational> {
    if d == 0 || d >= h {
        return Err(Error::invalid("dimension must satisfy 1 <= d <= h-1"));
    }
    if k == 0 || k >= h {
        return Err(Error::invalid("corank must satisfy 1 <= k <= h-1"));
    }
    if n == 0 {
        return Ok(BigRational::zero());
    }
    let pb = BigUint::from(p);
    // geometric factor (1-p^-n)/(1-p^-1) = (p^n - 1)/(p^n - p^{n-1})
    let geo = big_ratio(pb.pow(n) - BigUint::one(), pb.pow(n) - pb.pow(n - 1));
    let size = (h - d) as usize; // |phi|
    let mut best: Option<BigUint> = None;
    for phi_idx in crate::kisin_core::subsets_lex(h as usize, size) {
        let phi: Vec<u32> = phi_idx.iter().map(|&i| i as u32 + 1).collect();
        let t = CMTypeLocal::new(h, phi, p)?;
        let weights = reflex_weights(&t);
        let (m, _) = min_subset_sum(&weights, k as usize)?;
        if best.as_ref().map_or(true, |b| m > *b) {
            best = Some(m);
        }
    }
    let m = best.expect("at least one type exists");
    Ok(big_ratio(m * (pb.clone() - BigUint::one()), pb.pow(h) - BigUint::one()) * geo)
}
