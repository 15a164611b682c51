//! Shipped CM module presets: the ramified level-matched presentations from
//! the Lubin-Tate engine and the unramified cyclic presentations, wrapped
//! with their field data, dimension, and default working precisions.

use std::sync::Arc;

use crate::algebra::{Fq, TruncSeries};
use crate::cm_combinatorics::CMTypeLocal;
use crate::kisin_core::FiniteKisinModule;
use crate::lubin_tate::{ramified_frobenius_matrix, RamifiedPreset};
use crate::{Error, Result};

/// Names accepted by the command line and the test suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    /// Totally ramified quadratic presentation at level 2; e = 2p(p-1).
    H2Level2,
    /// Totally ramified cyclic quartic presentation; e = 4p^3(p-1);
    /// needs p = 1 mod 4 or p = 2.
    H4Cyclic,
    /// Unramified cyclic presentation, h = 2, phi = {1}.
    UnramH2,
    /// Unramified cyclic presentation, h = 3, phi = {1}.
    UnramH3,
    /// Unramified cyclic presentation, h = 4, phi = {1, 2}.
    UnramH4,
}

impl PresetName {
    pub fn parse(s: &str) -> Result<PresetName> {
        match s {
            "h2-level2" => Ok(PresetName::H2Level2),
            "h4-cyclic" => Ok(PresetName::H4Cyclic),
            "unram-h2" => Ok(PresetName::UnramH2),
            "unram-h3" => Ok(PresetName::UnramH3),
            "unram-h4" => Ok(PresetName::UnramH4),
            other => Err(Error::invalid(format!(
                "unknown preset '{other}'; expected one of {}",
                PresetName::ALL_NAMES.join(", ")
            ))),
        }
    }

    pub const ALL_NAMES: [&'static str; 5] =
        ["h2-level2", "h4-cyclic", "unram-h2", "unram-h3", "unram-h4"];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::H2Level2 => "h2-level2",
            PresetName::H4Cyclic => "h4-cyclic",
            PresetName::UnramH2 => "unram-h2",
            PresetName::UnramH3 => "unram-h3",
            PresetName::UnramH4 => "unram-h4",
        }
    }

    fn phi(&self) -> Vec<u32> {
        match self {
            PresetName::H2Level2 | PresetName::UnramH2 | PresetName::UnramH3 => vec![1],
            PresetName::H4Cyclic | PresetName::UnramH4 => vec![1, 2],
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            PresetName::H2Level2 | PresetName::UnramH2 => 2,
            PresetName::UnramH3 => 3,
            PresetName::H4Cyclic | PresetName::UnramH4 => 4,
        }
    }

    pub fn is_ramified(&self) -> bool {
        matches!(self, PresetName::H2Level2 | PresetName::H4Cyclic)
    }
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<PresetName> {
        PresetName::parse(s)
    }
}

/// A built preset with its headline invariants.
#[derive(Debug, Clone)]
pub struct PresetModule {
    pub name: PresetName,
    pub module: FiniteKisinModule,
    pub p: u64,
    pub h: u32,
    /// Dimension d; the module slope is (h-d)/h.
    pub d: u32,
    pub e: u64,
    pub ramified: bool,
}

/// Unramified cyclic presentation over F_{p^h}[[u]] with e = 1: basis vector
/// i maps to u * e_{i+1} when i lies in phi and to e_{i+1} otherwise
/// (indices cyclic mod h). Default precision 2(h-d)(p^h-1)/(p-1) + 1 covers
/// every wedge power and the f-fold composed isotypic blocks.
pub fn unramified_cyclic(cm: &CMTypeLocal, precision: Option<u64>) -> Result<FiniteKisinModule> {
    let h = cm.h;
    let p = cm.p;
    let fq = Fq::canonical(p, h)?;
    let h_minus_d = (h - cm.dimension()) as u64;
    let default_precision = 2 * h_minus_d * ((p.pow(h) - 1) / (p - 1)) + 1;
    let precision = precision.unwrap_or(default_precision);
    let hs = h as usize;
    let mut rows = vec![vec![TruncSeries::zero(fq.clone(), precision); hs]; hs];
    for i in 0..hs {
        let col = (i + 1) % hs;
        let exponent = u64::from(cm.phi.contains(&(i as u32 + 1)));
        rows[i][col] = TruncSeries::monomial(fq.clone(), precision, exponent, 1);
    }
    FiniteKisinModule::new(fq, rows, 1)
}

fn canonical_fq(p: u64, f: u32) -> Result<Arc<Fq>> {
    Fq::canonical(p, f)
}

/// Build a preset module for the given prime, with an optional precision
/// override (the defaults are sized so that every wedge power stays above
/// the line-solver's precision gate).
pub fn build(name: PresetName, p: u64, precision: Option<u64>) -> Result<PresetModule> {
    let h = name.height();
    let phi = name.phi();
    let d = h - phi.len() as u32;
    if name.is_ramified() {
        let preset = match name {
            PresetName::H2Level2 => RamifiedPreset::h2_level2(p)?,
            PresetName::H4Cyclic => RamifiedPreset::h4_cyclic(p)?,
            _ => unreachable!(),
        };
        let phi_ref: Vec<u32> = phi.clone();
        let module = ramified_frobenius_matrix(&preset, &phi_ref, precision)?;
        Ok(PresetModule {
            name,
            module,
            p,
            h,
            d,
            e: preset.e,
            ramified: true,
        })
    } else {
        // Sanity check the field construction early for clearer errors.
        canonical_fq(p, h)?;
        let cm = CMTypeLocal::new(h, phi, p)?;
        let module = unramified_cyclic(&cm, precision)?;
        Ok(PresetModule {
            name,
            module,
            p,
            h,
            d,
            e: 1,
            ramified: false,
        })
    }
}

/// The preset/prime pairs exercised by the verification suite.
pub fn shipped_presets() -> Vec<(PresetName, u64)> {
    vec![
        (PresetName::H2Level2, 2),
        (PresetName::H2Level2, 3),
        (PresetName::H2Level2, 5),
        (PresetName::H4Cyclic, 2),
        (PresetName::H4Cyclic, 5),
        (PresetName::UnramH2, 3),
        (PresetName::UnramH3, 2),
        (PresetName::UnramH4, 2),
    ]
}
