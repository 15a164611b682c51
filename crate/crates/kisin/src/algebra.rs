//! Finite fields F_{p^f} and truncated power series in one variable u.
//!
//! Field elements are stored as integers in `0..p^f` encoding polynomials in
//! the canonical generator: the element sum(c_i * x^i) is encoded as
//! sum(c_i * p^i). The modulus is the lexicographically smallest monic
//! irreducible of degree f, found by scanning that same integer encoding
//! upward, so field construction is deterministic.
//!
//! Series are sparse (exponent, coefficient) lists truncated at a stated
//! precision. Every operation tracks precision and fails loudly instead of
//! silently truncating when asked for information beyond it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest table-backed field size; f >= 2 requires p^f <= this.
const TABLE_MAX: u64 = 1 << 20;

/// Description of a finite field F_{p^f}.
///
/// `modulus` lists the coefficients of the defining monic irreducible from
/// degree 0 up to degree f (so the last entry is 1). For f = 1 the modulus is
/// just `x`, i.e. `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub f: u32,
    pub modulus: Vec<u64>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Multiply two polynomials over F_p and reduce modulo a monic `modulus`.
fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let deg_m = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // Monic reduction from the top down.
    for i in (deg_m..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for (k, &mk) in modulus.iter().enumerate().take(deg_m) {
            let idx = i - deg_m + k;
            prod[idx] = (prod[idx] + c * (p - mk) % p) % p;
        }
    }
    prod.truncate(deg_m);
    prod
}

fn encode(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn decode(mut v: u64, p: u64, f: u32) -> Vec<u64> {
    let mut digits = vec![0u64; f as usize];
    for d in digits.iter_mut() {
        *d = v % p;
        v /= p;
    }
    digits
}

/// Test irreducibility of a monic polynomial over F_p by trial division
/// against every monic polynomial of degree 1..=deg/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for m in 0..count {
            let mut divisor = decode(m, p, d as u32);
            divisor.push(1); // monic of degree d
            if poly_divides(&divisor, poly, p) {
                return false;
            }
        }
    }
    true
}

/// Whether monic `d` divides `poly` over F_p.
fn poly_divides(d: &[u64], poly: &[u64], p: u64) -> bool {
    let mut rem: Vec<u64> = poly.to_vec();
    let dd = d.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - dd;
        if lead != 0 {
            for (k, &dk) in d.iter().enumerate() {
                let idx = shift + k;
                rem[idx] = (rem[idx] + lead * (p - dk) % p) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

/// Construct the canonical field F_{p^f}.
///
/// Errors if p is not prime, f = 0, or the field would be too large for
/// table-backed arithmetic (p^f > 2^20 with f >= 2; for f = 1 any prime
/// p < 2^31 is accepted).
pub fn make_field(p: u64, f: u32) -> Result<FieldSpec> {
    if !is_prime(p) || p >= (1 << 31) {
        return Err(Error::invalid(format!("p = {p} is not a prime below 2^31")));
    }
    if f == 0 {
        return Err(Error::invalid("field degree f must be at least 1"));
    }
    if f == 1 {
        return Ok(FieldSpec {
            p,
            f,
            modulus: vec![0, 1],
        });
    }
    let q = (p as u128).pow(f);
    if q > TABLE_MAX as u128 {
        return Err(Error::invalid(format!(
            "field F_{{{p}^{f}}} exceeds the supported size 2^20"
        )));
    }
    for m in 0..q as u64 {
        let mut candidate = decode(m, p, f);
        candidate.push(1);
        if is_irreducible(&candidate, p) {
            return Ok(FieldSpec {
                p,
                f,
                modulus: candidate,
            });
        }
    }
    unreachable!("an irreducible of every degree exists over F_p");
}

/// Arithmetic context for F_{p^f}: log/exp tables for f >= 2, direct modular
/// arithmetic for prime fields. Elements are integers in `0..q` under the
/// base-p digit encoding of `FieldSpec`.
#[derive(Debug)]
pub struct Fq {
    pub spec: FieldSpec,
    q: u64,
    /// exp[i] = g^i for a fixed multiplicative generator g; length q-1.
    exp: Vec<u32>,
    /// log[a] = i with exp[i] = a, for a in 1..q; log[0] unused.
    log: Vec<u32>,
}

impl Fq {
    pub fn new(spec: FieldSpec) -> Result<Arc<Fq>> {
        let p = spec.p;
        let f = spec.f;
        if spec.modulus.len() != f as usize + 1 || *spec.modulus.last().unwrap() != 1 {
            return Err(Error::invalid("modulus must be monic of degree f"));
        }
        let q = (p as u128).pow(f);
        if f >= 2 && q > TABLE_MAX as u128 {
            return Err(Error::invalid("field too large for table arithmetic"));
        }
        let q = q as u64;
        let (exp, log) = if f >= 2 {
            build_tables(&spec, q)?
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Arc::new(Fq { spec, q, exp, log }))
    }

    /// Convenience: canonical field context for F_{p^f}.
    pub fn canonical(p: u64, f: u32) -> Result<Arc<Fq>> {
        Fq::new(make_field(p, f)?)
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn f(&self) -> u32 {
        self.spec.f
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let p = self.spec.p;
        if self.spec.f == 1 {
            return (a + b) % p;
        }
        let (mut out, mut pw, mut x, mut y) = (0u64, 1u64, a, b);
        while x > 0 || y > 0 {
            out += (x % p + y % p) % p * pw;
            x /= p;
            y /= p;
            pw *= p;
        }
        out
    }

    pub fn neg(&self, a: u64) -> u64 {
        let p = self.spec.p;
        if self.spec.f == 1 {
            return (p - a) % p;
        }
        let (mut out, mut pw, mut x) = (0u64, 1u64, a);
        while x > 0 {
            out += (p - x % p) % p * pw;
            x /= p;
            pw *= p;
        }
        out
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.spec.f == 1 {
            return ((a as u128 * b as u128) % self.spec.p as u128) as u64;
        }
        let i = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(i % (self.q - 1)) as usize] as u64
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::invalid("division by zero in F_q"));
        }
        if self.spec.f == 1 {
            return Ok(self.pow(a, self.spec.p - 2));
        }
        let i = (self.q - 1 - self.log[a as usize] as u64) % (self.q - 1);
        Ok(self.exp[i as usize] as u64)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        if self.spec.f >= 2 {
            let i = (self.log[a as usize] as u128 * e as u128) % (self.q - 1) as u128;
            return self.exp[i as usize] as u64;
        }
        let (mut base, mut e, mut acc) = (a, e % (self.q - 1), 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The arithmetic Frobenius a -> a^p.
    pub fn frobenius(&self, a: u64) -> u64 {
        self.pow(a, self.spec.p)
    }

    /// Iterated Frobenius a -> a^{p^t}.
    pub fn frobenius_iter(&self, a: u64, t: u32) -> u64 {
        if a == 0 {
            return 0;
        }
        // Reduce the exponent p^t modulo q-1 to avoid overflow.
        let m = self.q - 1;
        let mut e = 1u64;
        let p = self.spec.p % m;
        for _ in 0..t {
            e = ((e as u128 * p as u128) % m as u128) as u64;
        }
        self.pow(a, e)
    }

    /// The unique p-th root in F_q (the inverse of Frobenius).
    pub fn root_p(&self, a: u64) -> u64 {
        if self.spec.f == 1 {
            return a; // x^p = x in F_p
        }
        self.frobenius_iter(a, self.spec.f - 1)
    }

    /// Iterate over all field elements, 0 first.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }

    /// Embed an integer (reduced mod p) into the prime subfield.
    pub fn from_int(&self, n: u64) -> u64 {
        n % self.spec.p
    }

    pub fn same_field(&self, other: &Fq) -> bool {
        self.spec == other.spec
    }
}

fn build_tables(spec: &FieldSpec, q: u64) -> Result<(Vec<u32>, Vec<u32>)> {
    let p = spec.p;
    let f = spec.f;
    // Prime factors of q-1 for order checks.
    let mut n = q - 1;
    let mut prime_factors = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            prime_factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        prime_factors.push(n);
    }
    let mul =
        |a: u64, b: u64| encode(&poly_mulmod(&decode(a, p, f), &decode(b, p, f), &spec.modulus, p), p);
    let pow = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    let mut generator = 0;
    for g in 2..q {
        if prime_factors.iter().all(|&ell| pow(g, (q - 1) / ell) != 1) {
            generator = g;
            break;
        }
    }
    if generator == 0 {
        return Err(Error::invalid("no multiplicative generator found"));
    }
    let mut exp = vec![0u32; (q - 1) as usize];
    let mut log = vec![0u32; q as usize];
    let mut acc = 1u64;
    for (i, slot) in exp.iter_mut().enumerate() {
        *slot = acc as u32;
        log[acc as usize] = i as u32;
        acc = mul(acc, generator);
    }
    if acc != 1 {
        return Err(Error::invalid("generator order mismatch while building tables"));
    }
    Ok((exp, log))
}

/// The u-adic valuation of a truncated series: a finite integer, or infinity
/// when every stored coefficient vanishes (the series is zero to precision).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Valuation::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinity) => std::cmp::Ordering::Less,
            (Infinity, Finite(_)) => std::cmp::Ordering::Greater,
            (Infinity, Infinity) => std::cmp::Ordering::Equal,
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite(v) => write!(fm, "{v}"),
            Valuation::Infinity => write!(fm, "inf"),
        }
    }
}

/// A power series in u over F_{p^f}, known modulo u^precision.
///
/// Terms are sparse: sorted by exponent, all coefficients nonzero, all
/// exponents below `precision`.
#[derive(Debug, Clone)]
pub struct TruncSeries {
    field: Arc<Fq>,
    precision: u64,
    terms: Vec<(u64, u64)>,
}

impl TruncSeries {
    pub fn zero(field: Arc<Fq>, precision: u64) -> TruncSeries {
        TruncSeries {
            field,
            precision,
            terms: Vec::new(),
        }
    }

    pub fn one(field: Arc<Fq>, precision: u64) -> TruncSeries {
        TruncSeries::monomial(field, precision, 0, 1)
    }

    /// c * u^e, truncated if e is at or beyond the precision.
    pub fn monomial(field: Arc<Fq>, precision: u64, e: u64, c: u64) -> TruncSeries {
        let terms = if c != 0 && e < precision {
            vec![(e, c)]
        } else {
            Vec::new()
        };
        TruncSeries {
            field,
            precision,
            terms,
        }
    }

    /// Build from sparse (exponent, coefficient) pairs; terms are sorted,
    /// merged, and validated against the precision.
    pub fn from_terms(
        field: Arc<Fq>,
        precision: u64,
        terms: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<TruncSeries> {
        let mut acc: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        for (e, c) in terms {
            if c >= field.q() {
                return Err(Error::invalid(format!(
                    "coefficient {c} outside field of {} elements",
                    field.q()
                )));
            }
            if c != 0 {
                if e >= precision {
                    return Err(Error::invalid(format!(
                        "term u^{e} at or beyond precision {precision}"
                    )));
                }
                let slot = acc.entry(e).or_insert(0);
                *slot = field.add(*slot, c);
            }
        }
        Ok(TruncSeries {
            field,
            precision,
            terms: acc.into_iter().filter(|&(_, c)| c != 0).collect(),
        })
    }

    /// Build from a dense coefficient list, least degree first. Coefficients
    /// at or beyond the precision are rejected rather than dropped.
    pub fn from_dense(field: Arc<Fq>, precision: u64, coeffs: &[u64]) -> Result<TruncSeries> {
        let q = field.q();
        let mut terms = Vec::new();
        for (e, &c) in coeffs.iter().enumerate() {
            if c >= q {
                return Err(Error::invalid(format!(
                    "coefficient {c} is not an element of a field with {q} elements"
                )));
            }
            if c != 0 {
                if e as u64 >= precision {
                    return Err(Error::invalid(format!(
                        "nonzero coefficient at degree {e} at or beyond precision {precision}"
                    )));
                }
                terms.push((e as u64, c));
            }
        }
        Ok(TruncSeries {
            field,
            precision,
            terms,
        })
    }

    pub fn field(&self) -> &Arc<Fq> {
        &self.field
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn terms(&self) -> &[(u64, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: u64) -> u64 {
        match self.terms.binary_search_by_key(&e, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0,
        }
    }

    /// Leading (lowest-degree) term, if any.
    pub fn leading(&self) -> Option<(u64, u64)> {
        self.terms.first().copied()
    }

    fn check_compatible(&self, other: &TruncSeries) -> Result<()> {
        if !self.field.same_field(&other.field) {
            return Err(Error::invalid("series over different fields"));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_compatible(other)?;
        let precision = self.precision.min(other.precision);
        let fq = &self.field;
        let (mut i, mut j) = (0, 0);
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        while i < self.terms.len() || j < other.terms.len() {
            let ea = self.terms.get(i).map(|t| t.0).unwrap_or(u64::MAX);
            let eb = other.terms.get(j).map(|t| t.0).unwrap_or(u64::MAX);
            let (e, c) = if ea < eb {
                i += 1;
                (ea, self.terms[i - 1].1)
            } else if eb < ea {
                j += 1;
                (eb, other.terms[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (ea, fq.add(self.terms[i - 1].1, other.terms[j - 1].1))
            };
            if e >= precision {
                break;
            }
            if c != 0 {
                terms.push((e, c));
            }
        }
        Ok(TruncSeries {
            field: self.field.clone(),
            precision,
            terms,
        })
    }

    pub fn neg(&self) -> TruncSeries {
        let fq = &self.field;
        TruncSeries {
            field: self.field.clone(),
            precision: self.precision,
            terms: self.terms.iter().map(|&(e, c)| (e, fq.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_compatible(other)?;
        let precision = self.precision.min(other.precision);
        let fq = &self.field;
        let mut acc: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        for &(ea, ca) in &self.terms {
            if ea >= precision {
                break;
            }
            for &(eb, cb) in &other.terms {
                let e = ea + eb;
                if e >= precision {
                    break;
                }
                let entry = acc.entry(e).or_insert(0);
                *entry = fq.add(*entry, fq.mul(ca, cb));
            }
        }
        let terms = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        Ok(TruncSeries {
            field: self.field.clone(),
            precision,
            terms,
        })
    }

    /// Multiply by the scalar c in F_q.
    pub fn scale(&self, c: u64) -> TruncSeries {
        if c == 0 {
            return TruncSeries::zero(self.field.clone(), self.precision);
        }
        let fq = &self.field;
        TruncSeries {
            field: self.field.clone(),
            precision: self.precision,
            terms: self.terms.iter().map(|&(e, a)| (e, fq.mul(a, c))).collect(),
        }
    }

    /// Multiply by the monomial c * u^e.
    pub fn mul_monomial(&self, e: u64, c: u64) -> TruncSeries {
        if c == 0 {
            return TruncSeries::zero(self.field.clone(), self.precision);
        }
        let fq = &self.field;
        let terms = self
            .terms
            .iter()
            .filter(|&&(ea, _)| ea + e < self.precision)
            .map(|&(ea, a)| (ea + e, fq.mul(a, c)))
            .collect();
        TruncSeries {
            field: self.field.clone(),
            precision: self.precision,
            terms,
        }
    }

    /// Small integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Result<TruncSeries> {
        let mut acc = TruncSeries::one(self.field.clone(), self.precision);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Restrict to a lower precision (information is only discarded).
    pub fn truncated(&self, precision: u64) -> Result<TruncSeries> {
        if precision > self.precision {
            return Err(Error::precision(format!(
                "cannot raise precision from {} to {} without recomputation",
                self.precision, precision
            )));
        }
        let terms = self
            .terms
            .iter()
            .copied()
            .take_while(|&(e, _)| e < precision)
            .collect();
        Ok(TruncSeries {
            field: self.field.clone(),
            precision,
            terms,
        })
    }
}

/// Apply the semilinear operator sigma `times` times: coefficients are raised
/// to the p^times power and u is sent to u^{p^times}. The output keeps the
/// input precision.
pub fn frobenius_sigma(s: &TruncSeries, times: u32) -> TruncSeries {
    let fq = s.field.clone();
    let p = fq.p();
    // p^times as u128 to detect exponent overflow past the precision window.
    let mut mult: u128 = 1;
    for _ in 0..times {
        mult = mult.saturating_mul(p as u128);
    }
    let terms = s
        .terms
        .iter()
        .filter_map(|&(e, c)| {
            let e2 = (e as u128).checked_mul(mult)?;
            if e2 < s.precision as u128 {
                Some((e2 as u64, fq.frobenius_iter(c, times)))
            } else {
                None
            }
        })
        .collect();
    TruncSeries {
        field: s.field.clone(),
        precision: s.precision,
        terms,
    }
}

/// u-adic valuation of a truncated series.
pub fn valuation(s: &TruncSeries) -> Valuation {
    match s.leading() {
        Some((e, _)) => Valuation::Finite(e),
        None => Valuation::Infinity,
    }
}

/// Wire form of a series: dense coefficients, least degree first, plus the
/// field parameters. Used by fixtures and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesRepr {
    pub p: u64,
    pub f: u32,
    pub precision: u64,
    pub coeffs: Vec<u64>,
}

impl TruncSeries {
    pub fn to_repr(&self) -> SeriesRepr {
        let len = self.terms.last().map(|&(e, _)| e + 1).unwrap_or(0);
        let mut coeffs = vec![0u64; len as usize];
        for &(e, c) in &self.terms {
            coeffs[e as usize] = c;
        }
        SeriesRepr {
            p: self.field.p(),
            f: self.field.f(),
            precision: self.precision,
            coeffs,
        }
    }

    pub fn from_repr(repr: &SeriesRepr) -> Result<TruncSeries> {
        let field = Fq::canonical(repr.p, repr.f)?;
        TruncSeries::from_dense(field, repr.precision, &repr.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_modulus_f2_over_f2() {
        let spec = make_field(2, 2).unwrap();
        assert_eq!(spec.modulus, vec![1, 1, 1]); // x^2 + x + 1
    }

    #[test]
    fn canonical_modulus_scan_is_lex_smallest() {
        // Over F_3, degree 2: x^2 (m=0) and x^2+1? x^2+1 has no root mod 3
        // (0,1,1) -> actually 1^2+1=2, 2^2+1=2, 0^2+1=1: irreducible.
        let spec = make_field(3, 2).unwrap();
        assert_eq!(spec.modulus, vec![1, 0, 1]);
        // Degree 3 over F_2: x^3+x+1 encodes m=3; smaller m are reducible.
        let spec = make_field(2, 3).unwrap();
        assert_eq!(spec.modulus, vec![1, 1, 0, 1]);
    }

    #[test]
    fn field_axioms_small() {
        for (p, f) in [(2, 1), (3, 1), (2, 2), (3, 2), (5, 2), (2, 4)] {
            let fq = Fq::canonical(p, f).unwrap();
            let q = fq.q();
            for a in 0..q {
                if a != 0 {
                    assert_eq!(fq.mul(a, fq.inv(a).unwrap()), 1, "inverse in F_{q}");
                }
                assert_eq!(fq.add(a, fq.neg(a)), 0);
                // Frobenius is the identity on F_p and a field automorphism.
                assert_eq!(fq.frobenius_iter(a, f), a, "a^(p^f) = a");
            }
            for a in 0..q.min(16) {
                for b in 0..q.min(16) {
                    assert_eq!(
                        fq.frobenius(fq.mul(a, b)),
                        fq.mul(fq.frobenius(a), fq.frobenius(b))
                    );
                    assert_eq!(
                        fq.frobenius(fq.add(a, b)),
                        fq.add(fq.frobenius(a), fq.frobenius(b))
                    );
                }
            }
        }
    }

    #[test]
    fn root_p_inverts_frobenius() {
        let fq = Fq::canonical(5, 4).unwrap();
        for a in [0u64, 1, 2, 7, 123, 624] {
            assert_eq!(fq.root_p(fq.frobenius(a)), a);
            assert_eq!(fq.frobenius(fq.root_p(a)), a);
        }
    }

    #[test]
    fn series_mul_and_valuation() {
        let fq = Fq::canonical(5, 1).unwrap();
        let a = TruncSeries::from_dense(fq.clone(), 20, &[0, 2, 1]).unwrap(); // 2u + u^2
        let b = TruncSeries::from_dense(fq.clone(), 20, &[3, 0, 0, 4]).unwrap(); // 3 + 4u^3
        let ab = a.mul(&b).unwrap();
        assert_eq!(valuation(&ab), Valuation::Finite(1));
        // (2u + u^2)(3 + 4u^3) = 6u + 3u^2 + 8u^4 + 4u^5
        assert_eq!(ab.coeff(1), 1); // 6 mod 5
        assert_eq!(ab.coeff(2), 3);
        assert_eq!(ab.coeff(4), 3); // 8 mod 5
        assert_eq!(ab.coeff(5), 4);
    }

    #[test]
    fn sigma_scales_valuation_by_p() {
        let fq = Fq::canonical(3, 2).unwrap();
        let s = TruncSeries::from_dense(fq.clone(), 100, &[0, 0, 5, 7]).unwrap();
        let t = frobenius_sigma(&s, 1);
        assert_eq!(valuation(&t), Valuation::Finite(6));
        assert_eq!(t.precision(), s.precision());
        let t2 = frobenius_sigma(&s, 2);
        assert_eq!(valuation(&t2), Valuation::Finite(18));
    }

    #[test]
    fn dense_roundtrip() {
        let fq = Fq::canonical(2, 2).unwrap();
        let s = TruncSeries::from_dense(fq, 50, &[1, 0, 3, 0, 2]).unwrap();
        let repr = s.to_repr();
        let back = TruncSeries::from_repr(&repr).unwrap();
        assert_eq!(back.terms(), s.terms());
        assert_eq!(back.precision(), 50);
    }

    #[test]
    fn precision_violations_error() {
        let fq = Fq::canonical(2, 1).unwrap();
        assert!(TruncSeries::from_dense(fq.clone(), 3, &[0, 0, 0, 1]).is_err());
        let s = TruncSeries::one(fq, 3);
        assert!(s.truncated(5).is_err());
    }
}
