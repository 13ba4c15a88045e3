//! Unit conversions between atomic units and the human units accepted in
//! configuration files (eV, fs, Å, W/cm², amu).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hartree per electronvolt (inverse of 27.211386245988 eV/hartree).
pub const EV_PER_HARTREE: f64 = 27.211386245988;
/// Femtoseconds per atomic unit of time.
pub const FS_PER_AU_TIME: f64 = 0.02418884254;
/// Bohr per ångström.
pub const BOHR_PER_ANGSTROM: f64 = 1.8897259886;
/// Intensity (W/cm²) of a field with amplitude 1 au.
pub const INTENSITY_AU_W_CM2: f64 = 3.50944758e16;
/// Electron masses per unified atomic mass unit.
pub const ME_PER_AMU: f64 = 1822.888486;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
    Length,
    Mass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Hartree,
    ElectronVolt,
    AuTime,
    Femtosecond,
    Bohr,
    Angstrom,
    ElectronMass,
    Amu,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Hartree | Unit::ElectronVolt => Dimension::Energy,
            Unit::AuTime | Unit::Femtosecond => Dimension::Time,
            Unit::Bohr | Unit::Angstrom => Dimension::Length,
            Unit::ElectronMass | Unit::Amu => Dimension::Mass,
        }
    }

    /// Size of one of this unit expressed in atomic units.
    fn in_atomic_units(self) -> f64 {
        match self {
            Unit::Hartree | Unit::AuTime | Unit::Bohr | Unit::ElectronMass => 1.0,
            Unit::ElectronVolt => 1.0 / EV_PER_HARTREE,
            Unit::Femtosecond => 1.0 / FS_PER_AU_TIME,
            Unit::Angstrom => BOHR_PER_ANGSTROM,
            Unit::Amu => ME_PER_AMU,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Hartree => "hartree",
            Unit::ElectronVolt => "eV",
            Unit::AuTime => "au_time",
            Unit::Femtosecond => "fs",
            Unit::Bohr => "bohr",
            Unit::Angstrom => "angstrom",
            Unit::ElectronMass => "me",
            Unit::Amu => "amu",
        };
        f.write_str(s)
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "hartree" | "ha" | "au_energy" => Unit::Hartree,
            "ev" => Unit::ElectronVolt,
            "au_time" => Unit::AuTime,
            "fs" => Unit::Femtosecond,
            "bohr" | "au_length" => Unit::Bohr,
            "angstrom" | "a" => Unit::Angstrom,
            "me" | "au_mass" => Unit::ElectronMass,
            "amu" | "u" => Unit::Amu,
            other => return Err(Error::Unit(format!("unknown unit `{other}`"))),
        })
    }
}

/// Linear conversion between two units of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::Unit(format!(
            "cannot convert {from} ({:?}) to {to} ({:?})",
            from.dimension(),
            to.dimension()
        )));
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.in_atomic_units() / to.in_atomic_units())
}

pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / EV_PER_HARTREE
}

pub fn hartree_to_ev(h: f64) -> f64 {
    h * EV_PER_HARTREE
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs / FS_PER_AU_TIME
}

pub fn au_to_fs(t: f64) -> f64 {
    t * FS_PER_AU_TIME
}

/// Peak field amplitude (au) of a laser with cycle-averaged-free peak
/// intensity `intensity` in W/cm².
pub fn field_amplitude_from_intensity(intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::Unit(format!(
            "intensity must be finite and non-negative, got {intensity}"
        )));
    }
    Ok((intensity / INTENSITY_AU_W_CM2).sqrt())
}
