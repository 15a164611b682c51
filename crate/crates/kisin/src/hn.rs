//! Harder-Narasimhan invariants of finite Kisin modules: degree, rank,
//! slope, the semistability predicate, and convex slope polygons.
//!
//! Degree is normalized as v_u(det A)/e, an exact rational; the slope of a
//! rank-h module is degree/h. A module is semistable when every saturated
//! submodule has slope greater than or equal to the module slope; the
//! filtration polygon is convex with strictly increasing segment slopes.

use num::{BigInt, BigRational, Signed, Zero};

use crate::kisin_core::FiniteKisinModule;
use crate::line_solver::submodule_valuations;
use crate::{Error, Result};

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// An exact (degree, rank) pair, the additive invariant of the slope
/// formalism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeRank {
    pub degree: BigRational,
    pub rank: u64,
}

impl DegreeRank {
    pub fn new(degree: BigRational, rank: u64) -> Result<DegreeRank> {
        if rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if degree.is_negative() {
            return Err(Error::invalid("degree must be nonnegative"));
        }
        Ok(DegreeRank { degree, rank })
    }

    pub fn slope(&self) -> BigRational {
        self.degree.clone() / BigRational::from_integer(BigInt::from(self.rank))
    }
}

/// Convex piecewise-linear polygon of (rank, degree) breakpoints starting at
/// (0, 0), with strictly increasing segment slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HNPolygon {
    breakpoints: Vec<(u64, BigRational)>,
}

impl HNPolygon {
    /// Build a polygon from successive (degree, rank) increments. Adjacent
    /// increments of equal slope are merged into one segment; a strict slope
    /// decrease is a convexity violation and is rejected.
    pub fn from_increments(increments: &[DegreeRank]) -> Result<HNPolygon> {
        if increments.is_empty() {
            return Err(Error::invalid("polygon needs at least one increment"));
        }
        let mut segments: Vec<(u64, BigRational)> = Vec::new();
        for inc in increments {
            let slope = inc.slope();
            match segments.last_mut() {
                Some((width, degree)) => {
                    let prev_slope =
                        degree.clone() / BigRational::from_integer(BigInt::from(*width));
                    if prev_slope == slope {
                        *width += inc.rank;
                        *degree += inc.degree.clone();
                    } else if prev_slope > slope {
                        return Err(Error::invalid(format!(
                            "convexity violation: segment slope {} followed by {}",
                            prev_slope, slope
                        )));
                    } else {
                        segments.push((inc.rank, inc.degree.clone()));
                    }
                }
                None => segments.push((inc.rank, inc.degree.clone())),
            }
        }
        let mut breakpoints = vec![(0u64, BigRational::zero())];
        for (width, degree) in segments {
            let (r, d) = breakpoints.last().cloned().unwrap();
            breakpoints.push((r + width, d + degree));
        }
        Ok(HNPolygon { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(u64, BigRational)] {
        &self.breakpoints
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// (width, slope) of each segment, in order of strictly increasing slope.
    pub fn segments(&self) -> Vec<(u64, BigRational)> {
        self.breakpoints
            .windows(2)
            .map(|w| {
                let width = w[1].0 - w[0].0;
                let rise = w[1].1.clone() - w[0].1.clone();
                (width, rise / BigRational::from_integer(BigInt::from(width)))
            })
            .collect()
    }

    /// Endpoint (total rank, total degree).
    pub fn endpoint(&self) -> (u64, BigRational) {
        self.breakpoints.last().cloned().unwrap()
    }
}

/// Exact degree and rank of a module: (v_u(det A)/e, h).
pub fn degree_rank(m: &FiniteKisinModule) -> Result<DegreeRank> {
    let v = m.det_valuation_finite()?;
    DegreeRank::new(ratio(v, m.eisenstein_degree), m.rank as u64)
}

/// Slope (v_u(det A)/e)/h as an exact rational.
pub fn slope(m: &FiniteKisinModule) -> Result<BigRational> {
    let v = m.det_valuation_finite()?;
    Ok(ratio(v, m.eisenstein_degree * m.rank as u64))
}

/// A destabilizing witness: a saturated submodule (identified by its corank
/// and line valuation) whose slope is strictly below the module slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnstableWitness {
    pub corank: usize,
    pub mu: u64,
    pub submodule_slope: BigRational,
}

#[derive(Debug, Clone)]
pub struct SemistabilityReport {
    pub semistable: bool,
    pub slope: BigRational,
    pub certificate: Option<UnstableWitness>,
}

/// Check semistability by enumerating saturated submodules at every corank:
/// true iff each submodule slope is at least the module slope. Returns the
/// first violating (corank, mu) as a certificate otherwise. Rank-1 modules
/// are vacuously semistable.
pub fn is_semistable(m: &FiniteKisinModule) -> Result<SemistabilityReport> {
    let module_slope = slope(m)?;
    let h = m.rank;
    let e = m.eisenstein_degree;
    for corank in 1..h {
        for mu in submodule_valuations(m, corank)? {
            let sub_slope = ratio(mu, e * (h - corank) as u64);
            if sub_slope < module_slope {
                return Ok(SemistabilityReport {
                    semistable: false,
                    slope: module_slope,
                    certificate: Some(UnstableWitness {
                        corank,
                        mu,
                        submodule_slope: sub_slope,
                    }),
                });
            }
        }
    }
    Ok(SemistabilityReport {
        semistable: true,
        slope: module_slope,
        certificate: None,
    })
}

/// Validated convex polygon from increments; see [`HNPolygon::from_increments`].
pub fn hn_polygon(increments: &[DegreeRank]) -> Result<HNPolygon> {
    HNPolygon::from_increments(increments)
}

/// Slope polygon of a module, built from its saturated-submodule valuations:
/// the lower convex hull of (rank, minimal degree) over all enumerated
/// submodules together with (0,0) and (h, deg). For a semistable module this
/// is the single segment of slope deg/h.
pub fn module_polygon(m: &FiniteKisinModule) -> Result<HNPolygon> {
    let h = m.rank;
    let e = m.eisenstein_degree;
    let v = m.det_valuation_finite()?;
    let mut points: Vec<(u64, BigRational)> = vec![(0, BigRational::zero())];
    for corank in 1..h {
        let rank = (h - corank) as u64;
        if let Some(min_mu) = submodule_valuations(m, corank)?.into_iter().min() {
            points.push((rank, ratio(min_mu, e)));
        }
    }
    points.push((h as u64, ratio(v, e)));

    // Lower convex hull by a monotone scan (points already sorted by rank).
    let mut hull: Vec<(u64, BigRational)> = Vec::new();
    for pt in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // Keep b only if it lies strictly below segment a--pt.
            let lhs = (b.1.clone() - a.1.clone())
                * BigRational::from_integer(BigInt::from(pt.0 - a.0));
            let rhs = (pt.1.clone() - a.1.clone())
                * BigRational::from_integer(BigInt::from(b.0 - a.0));
            if lhs < rhs {
                break;
            }
            hull.pop();
        }
        hull.push(pt);
    }

    let increments: Vec<DegreeRank> = hull
        .windows(2)
        .map(|w| DegreeRank::new(w[1].1.clone() - w[0].1.clone(), w[1].0 - w[0].0))
        .collect::<Result<_>>()?;
    HNPolygon::from_increments(&increments)
}

/// Slopes of the stable quotients at the given pi-power levels k (1..=h):
/// level k corresponds to the corank-k saturated submodule whose line
/// valuation equals v_u(det A)(h-k)/h; the quotient has rank k and degree
/// (v_u(det A) - mu)/e. Errors if a level's expected valuation is absent.
pub fn stable_quotient_slopes(
    m: &FiniteKisinModule,
    pi_powers: &[u32],
) -> Result<Vec<BigRational>> {
    let h = m.rank as u64;
    let e = m.eisenstein_degree;
    let v = m.det_valuation_finite()?;
    let mut out = Vec::with_capacity(pi_powers.len());
    for &k in pi_powers {
        let k = k as u64;
        if k == 0 || k > h {
            return Err(Error::invalid(format!(
                "pi-power level must lie in 1..={h}, got {k}"
            )));
        }
        if k == h {
            out.push(ratio(v, e * h));
            continue;
        }
        let num = (v as u128) * ((h - k) as u128);
        if num % (h as u128) != 0 {
            return Err(Error::invalid(format!(
                "level {k}: expected valuation {v}*{}/{h} is not integral",
                h - k
            )));
        }
        let target = (num / h as u128) as u64;
        let vals = submodule_valuations(m, k as usize)?;
        if !vals.contains(&target) {
            return Err(Error::invalid(format!(
                "level {k}: no enumerated line attains valuation {target} (found {vals:?})"
            )));
        }
        out.push(ratio(v - target, e * k));
    }
    Ok(out)
}
