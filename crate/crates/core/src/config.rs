//! Run configuration: parsing, validation, unit resolution and the canonical
//! echo written next to every result.
//!
//! The document is TOML with the sections `system`, `cavity`, `laser`,
//! `atom`, `molecule`, `grid` and `propagation`. Every dimensional key
//! carries its unit as a suffix (`omega_c_ev`, `tau_fs`, ...); most
//! quantities may alternatively be given in atomic units with an `_au`
//! suffix, which is what the canonical echo uses. Unknown keys and
//! sections are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::RGrid;
use crate::potential::{morse_curve, tabulated_curve_file, Morse, PotentialCurve};
use crate::units::{self, BOHR_PER_ANGSTROM, ME_PER_AMU};

/// Tolerated mismatch between the vertical Franck-Condon gap and ω_c.
pub const FC_GAP_WARN_EV: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Composition {
    AtomMoleculeCavity,
    MoleculeCavity,
}

impl Composition {
    pub fn as_str(self) -> &'static str {
        match self {
            Composition::AtomMoleculeCavity => "atom-molecule-cavity",
            Composition::MoleculeCavity => "molecule-cavity",
        }
    }
}

impl FromStr for Composition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atom-molecule-cavity" => Ok(Composition::AtomMoleculeCavity),
            "molecule-cavity" => Ok(Composition::MoleculeCavity),
            other => Err(Error::config(
                "system.composition",
                format!("expected `atom-molecule-cavity` or `molecule-cavity`, got `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// RK4 while the pulse is on, exact eigen-propagation afterwards.
    TwoPhase,
    /// RK4 for the whole run.
    UniformStepping,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::TwoPhase => "two-phase",
            Strategy::UniformStepping => "uniform-stepping",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-phase" => Ok(Strategy::TwoPhase),
            "uniform-stepping" => Ok(Strategy::UniformStepping),
            other => Err(Error::config(
                "propagation.strategy",
                format!("expected `two-phase` or `uniform-stepping`, got `{other}`"),
            )),
        }
    }
}

/// Laser pulse `E(t) = E0 sin²(π(t−t0)/T) cos(ω_L (t−t0))`, atomic units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserParams {
    pub e0: f64,
    pub omega_l: f64,
    pub duration: f64,
    pub t_start: f64,
}

impl LaserParams {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }
}

/// Cavity mode, atomic units. `kappa = 0` is a lossless cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams {
    pub omega_c: f64,
    pub g: f64,
    pub kappa: f64,
    pub n_max: usize,
}

impl CavityParams {
    /// Photon lifetime 1/κ (infinite for a lossless cavity).
    pub fn tau(&self) -> f64 {
        if self.kappa == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.kappa
        }
    }

    /// Quality factor ω_c/κ.
    pub fn q_factor(&self) -> f64 {
        if self.kappa == 0.0 {
            f64::INFINITY
        } else {
            self.omega_c / self.kappa
        }
    }
}

/// Three-level atom; levels in hartree, dipoles in atomic units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomParams {
    pub levels: [f64; 3],
    pub d12: f64,
    pub d13: f64,
    pub d23: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    Morse(Morse),
    Table(PathBuf),
}

impl CurveSpec {
    pub fn sample(&self, grid: &RGrid) -> Result<PotentialCurve> {
        match self {
            CurveSpec::Morse(m) => morse_curve(*m, grid),
            CurveSpec::Table(p) => tabulated_curve_file(p, grid),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DipoleSpec {
    Constant(f64),
    Table(PathBuf),
}

impl DipoleSpec {
    pub fn sample(&self, grid: &RGrid) -> Result<PotentialCurve> {
        match self {
            DipoleSpec::Constant(v) => Ok(PotentialCurve::constant(grid, *v)),
            DipoleSpec::Table(p) => tabulated_curve_file(p, grid),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoleculeParams {
    /// reduced mass in electron masses
    pub mass: f64,
    pub ground: CurveSpec,
    pub excited: CurveSpec,
    pub dipole: DipoleSpec,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<RGrid> {
        RGrid::new(self.r_min, self.r_max, self.points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationSchedule {
    pub t_end: f64,
    pub dt_pulse: f64,
    /// simulated time between observable snapshots
    pub output_interval: f64,
    pub strategy: Strategy,
    /// highest vibrational level reported in the ν-projection
    pub nu_max: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub composition: Composition,
    pub cavity: CavityParams,
    pub laser: LaserParams,
    pub atom: Option<AtomParams>,
    pub molecule: MoleculeParams,
    pub grid: GridSpec,
    pub schedule: PropagationSchedule,
}

// ---------------------------------------------------------------------------
// raw document

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    composition: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    omega_c_ev: Option<f64>,
    omega_c_au: Option<f64>,
    g_rel: Option<f64>,
    g_au: Option<f64>,
    kappa_au: Option<f64>,
    tau_fs: Option<f64>,
    tau_au: Option<f64>,
    q_factor: Option<f64>,
    n_max: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaser {
    intensity_w_cm2: Option<f64>,
    e0_au: Option<f64>,
    omega_l_ev: Option<f64>,
    omega_l_au: Option<f64>,
    duration_fs: Option<f64>,
    duration_au: Option<f64>,
    t_start_fs: Option<f64>,
    t_start_au: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    a1_ev: Option<f64>,
    a1_au: Option<f64>,
    a2_ev: Option<f64>,
    a2_au: Option<f64>,
    a3_ev: Option<f64>,
    a3_au: Option<f64>,
    d12_au: Option<f64>,
    d13_au: Option<f64>,
    d23_au: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMolecule {
    mass_me: Option<f64>,
    mass_amu: Option<f64>,

    ground_file: Option<String>,
    ground_de_ev: Option<f64>,
    ground_de_au: Option<f64>,
    ground_a_inv_bohr: Option<f64>,
    ground_re_bohr: Option<f64>,
    ground_re_angstrom: Option<f64>,
    ground_offset_ev: Option<f64>,
    ground_offset_au: Option<f64>,

    excited_file: Option<String>,
    excited_de_ev: Option<f64>,
    excited_de_au: Option<f64>,
    excited_a_inv_bohr: Option<f64>,
    excited_re_bohr: Option<f64>,
    excited_re_angstrom: Option<f64>,
    excited_offset_ev: Option<f64>,
    excited_offset_au: Option<f64>,

    dipole_au: Option<f64>,
    dipole_file: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    r_min_bohr: Option<f64>,
    r_max_bohr: Option<f64>,
    points: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    t_end_fs: Option<f64>,
    t_end_au: Option<f64>,
    dt_pulse_au: Option<f64>,
    output_interval_fs: Option<f64>,
    output_interval_au: Option<f64>,
    strategy: Option<String>,
    nu_max: Option<i64>,
}

const SECTIONS: [&str; 7] = ["system", "cavity", "laser", "atom", "molecule", "grid", "propagation"];

/// Groups of keys that name the same quantity; at most one member of a
/// group may appear. Used by validation and by sweep overrides.
pub const EXCLUSIVE_GROUPS: &[&[&str]] = &[
    &["cavity.omega_c_ev", "cavity.omega_c_au"],
    &["cavity.g_rel", "cavity.g_au"],
    &["cavity.kappa_au", "cavity.tau_fs", "cavity.tau_au", "cavity.q_factor"],
    &["laser.intensity_w_cm2", "laser.e0_au"],
    &["laser.omega_l_ev", "laser.omega_l_au"],
    &["laser.duration_fs", "laser.duration_au"],
    &["laser.t_start_fs", "laser.t_start_au"],
    &["atom.a1_ev", "atom.a1_au"],
    &["atom.a2_ev", "atom.a2_au"],
    &["atom.a3_ev", "atom.a3_au"],
    &["molecule.mass_me", "molecule.mass_amu"],
    &["molecule.ground_de_ev", "molecule.ground_de_au"],
    &["molecule.ground_re_bohr", "molecule.ground_re_angstrom"],
    &["molecule.ground_offset_ev", "molecule.ground_offset_au"],
    &["molecule.excited_de_ev", "molecule.excited_de_au"],
    &["molecule.excited_re_bohr", "molecule.excited_re_angstrom"],
    &["molecule.excited_offset_ev", "molecule.excited_offset_au"],
    &["molecule.dipole_au", "molecule.dipole_file"],
    &["propagation.t_end_fs", "propagation.t_end_au"],
    &["propagation.output_interval_fs", "propagation.output_interval_au"],
];

fn section<T: DeserializeOwned + Default>(doc: &toml::Table, name: &str) -> Result<(T, bool)> {
    match doc.get(name) {
        None => Ok((T::default(), false)),
        Some(toml::Value::Table(t)) => {
            let v = toml::Value::Table(t.clone())
                .try_into::<T>()
                .map_err(|e| Error::config(name, e.to_string().trim().to_string()))?;
            Ok((v, true))
        }
        Some(_) => Err(Error::config(name, "expected a section")),
    }
}

/// Pick the one supplied member of a pair of alternatives, converting to
/// atomic units.
fn one_of(
    key: &str,
    human: Option<f64>,
    human_key: &str,
    to_au: impl Fn(f64) -> f64,
    au: Option<f64>,
    au_key: &str,
) -> Result<Option<f64>> {
    match (human, au) {
        (Some(_), Some(_)) => Err(Error::config(
            key,
            format!("give either `{human_key}` or `{au_key}`, not both"),
        )),
        (Some(h), None) => Ok(Some(to_au(h))),
        (None, Some(a)) => Ok(Some(a)),
        (None, None) => Ok(None),
    }
}

fn required(key: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::config(key, "missing required key"))
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("non-finite value {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be non-negative, got {v}")))
    }
}

fn resolve_path(base: Option<&Path>, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path,
    }
}

#[allow(clippy::too_many_arguments)]
fn curve_spec(
    prefix: &str,
    base: Option<&Path>,
    file: &Option<String>,
    de_ev: Option<f64>,
    de_au: Option<f64>,
    a: Option<f64>,
    re_bohr: Option<f64>,
    re_ang: Option<f64>,
    off_ev: Option<f64>,
    off_au: Option<f64>,
) -> Result<CurveSpec> {
    let key = |s: &str| format!("molecule.{prefix}_{s}");
    let morse_given = [de_ev, de_au, a, re_bohr, re_ang, off_ev, off_au]
        .iter()
        .any(Option::is_some);
    if let Some(f) = file {
        if morse_given {
            return Err(Error::config(
                key("file"),
                "a tabulated curve excludes the Morse parameters",
            ));
        }
        return Ok(CurveSpec::Table(resolve_path(base, f)));
    }
    let de = one_of(&key("de"), de_ev, "de_ev", units::ev_to_hartree, de_au, "de_au")?;
    let re = one_of(
        &key("re"),
        re_ang,
        "re_angstrom",
        |v| v * BOHR_PER_ANGSTROM,
        re_bohr,
        "re_bohr",
    )?;
    let offset = one_of(
        &key("offset"),
        off_ev,
        "offset_ev",
        units::ev_to_hartree,
        off_au,
        "offset_au",
    )?
    .unwrap_or(0.0);
    let m = Morse {
        de: positive(&key("de_ev"), required(&key("de_ev"), de)?)?,
        a: positive(&key("a_inv_bohr"), required(&key("a_inv_bohr"), a)?)?,
        re: positive(&key("re_bohr"), required(&key("re_bohr"), re)?)?,
        offset: finite(&key("offset_ev"), offset)?,
    };
    Ok(CurveSpec::Morse(m))
}

/// Parse and validate a configuration document. Relative table paths are
/// resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<SimulationConfig> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string().trim().to_string()))?;
    for k in doc.keys() {
        if !SECTIONS.contains(&k.as_str()) {
            return Err(Error::config(k.as_str(), "unknown section"));
        }
    }
    let (system, _) = section::<RawSystem>(&doc, "system")?;
    let (cav, _) = section::<RawCavity>(&doc, "cavity")?;
    let (las, _) = section::<RawLaser>(&doc, "laser")?;
    let (atom, atom_present) = section::<RawAtom>(&doc, "atom")?;
    let (mol, _) = section::<RawMolecule>(&doc, "molecule")?;
    let (grid, _) = section::<RawGrid>(&doc, "grid")?;
    let (prop, _) = section::<RawPropagation>(&doc, "propagation")?;

    let composition: Composition = system
        .composition
        .as_deref()
        .ok_or_else(|| Error::config("system.composition", "missing required key"))?
        .parse()?;

    // cavity
    let omega_c = positive(
        "cavity.omega_c_ev",
        required(
            "cavity.omega_c_ev",
            one_of(
                "cavity.omega_c",
                cav.omega_c_ev,
                "omega_c_ev",
                units::ev_to_hartree,
                cav.omega_c_au,
                "omega_c_au",
            )?,
        )?,
    )?;
    let g = non_negative(
        "cavity.g_rel",
        required(
            "cavity.g_rel",
            one_of("cavity.g", cav.g_rel, "g_rel", |v| v * omega_c, cav.g_au, "g_au")?,
        )?,
    )?;
    let loss: Vec<(&str, f64)> = [
        ("kappa_au", cav.kappa_au),
        ("tau_fs", cav.tau_fs),
        ("tau_au", cav.tau_au),
        ("q_factor", cav.q_factor),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.map(|v| (k, v)))
    .collect();
    let kappa = match loss.as_slice() {
        [] => {
            return Err(Error::config(
                "cavity.kappa_au",
                "missing required key (one of kappa_au, tau_fs, tau_au, q_factor)",
            ))
        }
        [(k, v)] => {
            let key = format!("cavity.{k}");
            match *k {
                "kappa_au" => non_negative(&key, *v)?,
                "tau_fs" => 1.0 / positive(&key, units::fs_to_au(*v))?,
                "tau_au" => 1.0 / positive(&key, *v)?,
                _ => omega_c / positive(&key, *v)?,
            }
        }
        many => {
            let names: Vec<&str> = many.iter().map(|(k, _)| *k).collect();
            return Err(Error::config(
                "cavity",
                format!("loss given more than once ({}); supply exactly one", names.join(", ")),
            ));
        }
    };
    let n_max = cav.n_max.unwrap_or(2);
    if n_max < 1 {
        return Err(Error::config("cavity.n_max", format!("must be >= 1, got {n_max}")));
    }
    let cavity = CavityParams {
        omega_c,
        g,
        kappa,
        n_max: n_max as usize,
    };

    // laser
    let e0 = non_negative(
        "laser.intensity_w_cm2",
        match (las.intensity_w_cm2, las.e0_au) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "laser",
                    "give either `intensity_w_cm2` or `e0_au`, not both",
                ))
            }
            (Some(i), None) => units::field_amplitude_from_intensity(i)
                .map_err(|e| Error::config("laser.intensity_w_cm2", e.to_string()))?,
            (None, Some(e)) => e,
            (None, None) => return Err(Error::config("laser.intensity_w_cm2", "missing required key")),
        },
    )?;
    let omega_l = positive(
        "laser.omega_l_ev",
        required(
            "laser.omega_l_ev",
            one_of(
                "laser.omega_l",
                las.omega_l_ev,
                "omega_l_ev",
                units::ev_to_hartree,
                las.omega_l_au,
                "omega_l_au",
            )?,
        )?,
    )?;
    let duration = positive(
        "laser.duration_fs",
        required(
            "laser.duration_fs",
            one_of(
                "laser.duration",
                las.duration_fs,
                "duration_fs",
                units::fs_to_au,
                las.duration_au,
                "duration_au",
            )?,
        )?,
    )?;
    let t_start = non_negative(
        "laser.t_start_fs",
        one_of(
            "laser.t_start",
            las.t_start_fs,
            "t_start_fs",
            units::fs_to_au,
            las.t_start_au,
            "t_start_au",
        )?
        .unwrap_or(0.0),
    )?;
    let laser = LaserParams {
        e0,
        omega_l,
        duration,
        t_start,
    };

    // atom
    let atom = match composition {
        Composition::MoleculeCavity => {
            if atom_present {
                return Err(Error::config(
                    "atom",
                    "section not allowed for composition `molecule-cavity`",
                ));
            }
            None
        }
        Composition::AtomMoleculeCavity => {
            let lvl = |k: &str, ev: Option<f64>, au: Option<f64>| {
                one_of(
                    &format!("atom.{k}"),
                    ev,
                    &format!("{k}_ev"),
                    units::ev_to_hartree,
                    au,
                    &format!("{k}_au"),
                )
            };
            let a1 = finite("atom.a1_ev", lvl("a1", atom.a1_ev, atom.a1_au)?.unwrap_or(0.0))?;
            let a2 = finite("atom.a2_ev", required("atom.a2_ev", lvl("a2", atom.a2_ev, atom.a2_au)?)?)?;
            let a3 = finite("atom.a3_ev", required("atom.a3_ev", lvl("a3", atom.a3_ev, atom.a3_au)?)?)?;
            if !(a1 < a2 && a2 < a3) {
                return Err(Error::config(
                    "atom",
                    format!("levels must satisfy a1 < a2 < a3, got {a1}, {a2}, {a3} hartree"),
                ));
            }
            Some(AtomParams {
                levels: [a1, a2, a3],
                d12: finite("atom.d12_au", atom.d12_au.unwrap_or(0.0))?,
                d13: finite("atom.d13_au", required("atom.d13_au", atom.d13_au)?)?,
                d23: finite("atom.d23_au", required("atom.d23_au", atom.d23_au)?)?,
            })
        }
    };

    // molecule
    let mass = positive(
        "molecule.mass_me",
        required(
            "molecule.mass_me",
            one_of(
                "molecule.mass",
                mol.mass_amu,
                "mass_amu",
                |v| v * ME_PER_AMU,
                mol.mass_me,
                "mass_me",
            )?,
        )?,
    )?;
    let ground = curve_spec(
        "ground",
        base_dir,
        &mol.ground_file,
        mol.ground_de_ev,
        mol.ground_de_au,
        mol.ground_a_inv_bohr,
        mol.ground_re_bohr,
        mol.ground_re_angstrom,
        mol.ground_offset_ev,
        mol.ground_offset_au,
    )?;
    let excited = curve_spec(
        "excited",
        base_dir,
        &mol.excited_file,
        mol.excited_de_ev,
        mol.excited_de_au,
        mol.excited_a_inv_bohr,
        mol.excited_re_bohr,
        mol.excited_re_angstrom,
        mol.excited_offset_ev,
        mol.excited_offset_au,
    )?;
    let dipole = match (mol.dipole_au, &mol.dipole_file) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "molecule.dipole_au",
                "give either `dipole_au` or `dipole_file`, not both",
            ))
        }
        (Some(v), None) => DipoleSpec::Constant(finite("molecule.dipole_au", v)?),
        (None, Some(f)) => DipoleSpec::Table(resolve_path(base_dir, f)),
        (None, None) => return Err(Error::config("molecule.dipole_au", "missing required key")),
    };
    let molecule = MoleculeParams {
        mass,
        ground,
        excited,
        dipole,
    };

    // grid
    let points = grid.points.unwrap_or(256);
    if points < 4 || !(points as u64).is_power_of_two() {
        return Err(Error::config(
            "grid.points",
            format!("must be a power of two >= 4, got {points}"),
        ));
    }
    let grid = GridSpec {
        r_min: finite("grid.r_min_bohr", grid.r_min_bohr.unwrap_or(4.0))?,
        r_max: finite("grid.r_max_bohr", grid.r_max_bohr.unwrap_or(14.0))?,
        points: points as usize,
    };
    if !(grid.r_max > grid.r_min) {
        return Err(Error::config("grid.r_max_bohr", "must exceed r_min_bohr"));
    }

    // schedule
    let t_end = positive(
        "propagation.t_end_fs",
        one_of(
            "propagation.t_end",
            prop.t_end_fs,
            "t_end_fs",
            units::fs_to_au,
            prop.t_end_au,
            "t_end_au",
        )?
        .unwrap_or_else(|| units::fs_to_au(5000.0)),
    )?;
    let dt_pulse = positive("propagation.dt_pulse_au", prop.dt_pulse_au.unwrap_or(0.05))?;
    if dt_pulse * omega_l >= 0.25 {
        return Err(Error::config(
            "propagation.dt_pulse_au",
            format!(
                "carrier not resolved: dt * omega_L = {:.4} must stay below 0.25",
                dt_pulse * omega_l
            ),
        ));
    }
    let output_interval = positive(
        "propagation.output_interval_fs",
        one_of(
            "propagation.output_interval",
            prop.output_interval_fs,
            "output_interval_fs",
            units::fs_to_au,
            prop.output_interval_au,
            "output_interval_au",
        )?
        .unwrap_or_else(|| units::fs_to_au(1.0)),
    )?;
    let strategy: Strategy = prop.strategy.as_deref().unwrap_or("two-phase").parse()?;
    let nu_max = prop.nu_max.unwrap_or(10);
    if nu_max < 0 || (nu_max as usize + 1) > grid.points / 4 {
        return Err(Error::config(
            "propagation.nu_max",
            format!("must lie in [0, {}], got {nu_max}", grid.points / 4 - 1),
        ));
    }
    let schedule = PropagationSchedule {
        t_end,
        dt_pulse,
        output_interval,
        strategy,
        nu_max: nu_max as usize,
    };

    let cfg = SimulationConfig {
        composition,
        cavity,
        laser,
        atom,
        molecule,
        grid,
        schedule,
    };
    // resolves file references and reports the resonance condition
    let gap = cfg.franck_condon_gap()?;
    if let Some(w) = resonance_warning(gap, cfg.cavity.omega_c) {
        log::warn!("{w}");
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent())
}

/// Message when the vertical gap misses ω_c by more than [`FC_GAP_WARN_EV`].
pub fn resonance_warning(gap: f64, omega_c: f64) -> Option<String> {
    let dev = units::hartree_to_ev(gap - omega_c);
    (dev.abs() > FC_GAP_WARN_EV).then(|| {
        format!(
            "vertical Franck-Condon gap {:.4} eV deviates from omega_c = {:.4} eV by {:+.4} eV",
            units::hartree_to_ev(gap),
            units::hartree_to_ev(omega_c),
            dev
        )
    })
}

impl SimulationConfig {
    pub fn build_grid(&self) -> Result<RGrid> {
        self.grid.build()
    }

    /// Vertical excitation energy V_A − V_X at the ground-curve minimum.
    pub fn franck_condon_gap(&self) -> Result<f64> {
        let grid = self.build_grid()?;
        let vx = self.molecule.ground.sample(&grid)?;
        let va = self.molecule.excited.sample(&grid)?;
        self.molecule.dipole.sample(&grid)?;
        let i = vx.argmin();
        Ok(va.values[i] - vx.values[i])
    }

    /// Canonical, fully resolved document in atomic units. Parsing the echo
    /// yields an identical configuration.
    pub fn canonical_echo(&self) -> String {
        let mut s = String::new();
        let f = |v: f64| format!("{v:?}");
        let _ = writeln!(s, "# resolved configuration, atomic units");
        let _ = writeln!(s, "[system]\ncomposition = \"{}\"\n", self.composition.as_str());
        let c = &self.cavity;
        let _ = writeln!(s, "[cavity]");
        let _ = writeln!(s, "omega_c_au = {}", f(c.omega_c));
        let _ = writeln!(s, "g_au = {}", f(c.g));
        let _ = writeln!(s, "kappa_au = {}", f(c.kappa));
        let _ = writeln!(s, "# tau_au = {}, q_factor = {}", f(c.tau()), f(c.q_factor()));
        let _ = writeln!(s, "n_max = {}\n", c.n_max);
        let l = &self.laser;
        let _ = writeln!(s, "[laser]");
        let _ = writeln!(s, "e0_au = {}", f(l.e0));
        let _ = writeln!(s, "omega_l_au = {}", f(l.omega_l));
        let _ = writeln!(s, "duration_au = {}", f(l.duration));
        let _ = writeln!(s, "t_start_au = {}\n", f(l.t_start));
        if let Some(a) = &self.atom {
            let _ = writeln!(s, "[atom]");
            for (i, v) in a.levels.iter().enumerate() {
                let _ = writeln!(s, "a{}_au = {}", i + 1, f(*v));
            }
            let _ = writeln!(s, "d12_au = {}", f(a.d12));
            let _ = writeln!(s, "d13_au = {}", f(a.d13));
            let _ = writeln!(s, "d23_au = {}\n", f(a.d23));
        }
        let m = &self.molecule;
        let _ = writeln!(s, "[molecule]");
        let _ = writeln!(s, "mass_me = {}", f(m.mass));
        for (name, spec) in [("ground", &m.ground), ("excited", &m.excited)] {
            match spec {
                CurveSpec::Morse(p) => {
                    let _ = writeln!(s, "{name}_de_au = {}", f(p.de));
                    let _ = writeln!(s, "{name}_a_inv_bohr = {}", f(p.a));
                    let _ = writeln!(s, "{name}_re_bohr = {}", f(p.re));
                    let _ = writeln!(s, "{name}_offset_au = {}", f(p.offset));
                }
                CurveSpec::Table(p) => {
                    let _ = writeln!(s, "{name}_file = {:?}", p.display().to_string());
                }
            }
        }
        match &m.dipole {
            DipoleSpec::Constant(v) => {
                let _ = writeln!(s, "dipole_au = {}\n", f(*v));
            }
            DipoleSpec::Table(p) => {
                let _ = writeln!(s, "dipole_file = {:?}\n", p.display().to_string());
            }
        }
        let g = &self.grid;
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "r_min_bohr = {}", f(g.r_min));
        let _ = writeln!(s, "r_max_bohr = {}", f(g.r_max));
        let _ = writeln!(s, "points = {}\n", g.points);
        let p = &self.schedule;
        let _ = writeln!(s, "[propagation]");
        let _ = writeln!(s, "t_end_au = {}", f(p.t_end));
        let _ = writeln!(s, "dt_pulse_au = {}", f(p.dt_pulse));
        let _ = writeln!(s, "output_interval_au = {}", f(p.output_interval));
        let _ = writeln!(s, "strategy = \"{}\"", p.strategy.as_str());
        let _ = writeln!(s, "nu_max = {}", p.nu_max);
        s
    }
}

/// Set `path` (`section.key`) to `value` in a parsed document, removing any
/// other member of the key's exclusivity group.
pub fn apply_override(doc: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let (sec, key) = path
        .split_once('.')
        .ok_or_else(|| Error::config(path, "parameter path must look like `section.key`"))?;
    if !SECTIONS.contains(&sec) {
        return Err(Error::config(path, "unknown section"));
    }
    let table = doc
        .entry(sec.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| Error::config(sec, "expected a section"))?;
    if let Some(group) = EXCLUSIVE_GROUPS.iter().find(|g| g.contains(&path)) {
        for other in group.iter() {
            if let Some((_, k)) = other.split_once('.') {
                table.remove(k);
            }
        }
    }
    table.insert(key.to_string(), value);
    Ok(())
}

/// Parse `text`, apply `path = value`, and validate the result.
pub fn parse_with_override(
    text: &str,
    base_dir: Option<&Path>,
    path: &str,
    value: f64,
) -> Result<SimulationConfig> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string().trim().to_string()))?;
    let v = if matches!(path, "cavity.n_max" | "grid.points" | "propagation.nu_max") {
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    apply_override(&mut doc, path, v)?;
    parse_config(&toml::to_string(&doc).map_err(|e| Error::config(path, e.to_string()))?, base_dir)
}

/// Reference configuration of the Ne–cavity–Na₂ system. Atomic dipoles
/// and the molecular transition dipole are model assumptions.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

/// Atom removed, laser tuned to the molecular transition.
pub const ATOMLESS_CONFIG: &str = include_str!("../../../configs/noatom.toml");
