//! Command-line front end: runs, sweeps, static analyses and the
//! representation cross-check, with all file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cavdyn::config::{apply_override, parse_config, Composition, SimulationConfig};
use cavdyn::observables::{diagnostics, DiagnosticSeries, DiagnosticsSummary};
use cavdyn::polariton::{locate_avoided_crossings, polariton_surfaces, DIABATIC_LABELS};
use cavdyn::propagator::TrajectoryRecord;
use cavdyn::units::{au_to_fs, hartree_to_ev};
use cavdyn::vibrational::CurveTag;
use cavdyn::xspace::{default_x_grid, oracle_propagate_model};
use cavdyn::{propagate, Error, HamiltonianModel, Result};
use clap::{Args, Parser, Subcommand};
use log::{error, info};
use serde::Serialize;

/// Environment variable controlling log verbosity (`error` … `trace`).
pub const LOG_ENV: &str = "CAVDYN_LOG";
pub const META_SCHEMA: &str = "cavdyn-run/1";

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cavdyn", version, about = "Atom–molecule–cavity wavepacket dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// TOML configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Override a parameter, e.g. `--set cavity.g_rel=0.003` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one propagation
    Propagate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one propagation per parameter value
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Parameter path, e.g. `cavity.g_rel` or `cavity.tau_fs`
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Members run concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List vibrational levels of both curves
    Levels {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Levels per curve (default: nu_max + 1)
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export polariton curves and avoided crossings
    Surfaces {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Avoided-crossing table (default: beside `--out`)
        #[arg(long)]
        crossings: Option<PathBuf>,
    },
    /// Fock-basis run versus the x-grid oracle
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 50.0)]
        t_end_fs: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the resolved configuration
    PrintConfig {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parse arguments, execute, and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Propagate { cfg, out } => {
            let config = load(&cfg)?;
            run_member(&config, &out)?;
            Ok(())
        }
        Command::Sweep {
            cfg,
            param,
            values,
            out,
            jobs,
        } => sweep(&cfg, &param, &values, &out, jobs),
        Command::Levels { cfg, count, out } => levels(&load(&cfg)?, count, out.as_deref()),
        Command::Surfaces { cfg, out, crossings } => surfaces(&load(&cfg)?, &out, crossings.as_deref()),
        Command::Compare { cfg, t_end_fs, out } => compare(&load(&cfg)?, t_end_fs, &out),
        Command::PrintConfig { cfg } => {
            print!("{}", load(&cfg)?.canonical_echo());
            Ok(())
        }
    }
}

const INTEGER_KEYS: [&str; 3] = ["cavity.n_max", "grid.points", "propagation.nu_max"];

fn override_value(key: &str, raw: &str) -> toml::Value {
    if INTEGER_KEYS.contains(&key) {
        if let Ok(i) = raw.parse::<i64>() {
            return toml::Value::Integer(i);
        }
    }
    match raw.parse::<f64>() {
        Ok(f) => toml::Value::Float(f),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Read a configuration file and apply `key=value` overrides.
pub fn load_with_overrides(path: &Path, overrides: &[(String, toml::Value)]) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent();
    if overrides.is_empty() {
        return parse_config(&text, base);
    }
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string().trim().to_string()))?;
    for (k, v) in overrides {
        apply_override(&mut doc, k, v.clone())?;
    }
    let text = toml::to_string(&doc).map_err(|e| Error::config("<document>", e.to_string()))?;
    parse_config(&text, base)
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, toml::Value)>> {
    raw.iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::config(s.as_str(), "override must look like `section.key=value`"))?;
            let k = k.trim();
            Ok((k.to_string(), override_value(k, v.trim())))
        })
        .collect()
}

fn load(args: &ConfigArgs) -> Result<SimulationConfig> {
    load_with_overrides(&args.config, &parse_overrides(&args.overrides)?)
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Locale-independent decimal with 12 significant digits, trailing zeros
/// trimmed; scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_zeros(&s)
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Column names of populations.csv.
pub fn population_header(composition: Composition, nu_count: usize) -> Vec<String> {
    let mut h = vec!["t_fs".to_string()];
    match composition {
        Composition::AtomMoleculeCavity => {
            h.extend(["p_G_A1", "p_G_A2", "p_G_A3", "p_E_A2"].map(String::from))
        }
        Composition::MoleculeCavity => h.extend(["p_G", "p_E"].map(String::from)),
    }
    h.extend(["p_photon_state", "n_photon_expect", "norm_total"].map(String::from));
    h.extend((0..nu_count).map(|k| format!("p_nu{k}")));
    h
}

pub fn populations_csv(rec: &TrajectoryRecord) -> String {
    let nu = rec.snapshots.first().map_or(0, |s| s.nu_excited.populations.len());
    let mut s = population_header(rec.composition, nu).join(",");
    s.push('\n');
    for snap in &rec.snapshots {
        let p = &snap.populations;
        let mut row = vec![fmt_num(au_to_fs(snap.t))];
        row.extend(p.channels.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(p.photon_state));
        row.push(fmt_num(p.n_expect));
        row.push(fmt_num(p.norm));
        row.extend(snap.nu_excited.populations.iter().map(|v| fmt_num(*v)));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Vibrational populations of the initial channel's n = 0 block on the
/// ground-curve ladder; populations.csv carries the excited-curve ladder.
pub fn nu_ground_csv(rec: &TrajectoryRecord) -> String {
    let nu = rec.snapshots.first().map_or(0, |s| s.nu_ground.populations.len());
    let mut h = vec!["t_fs".to_string()];
    h.extend((0..nu).map(|k| format!("p_nu{k}")));
    let mut s = h.join(",");
    s.push('\n');
    for snap in &rec.snapshots {
        let mut row = vec![fmt_num(au_to_fs(snap.t))];
        row.extend(snap.nu_ground.populations.iter().map(|v| fmt_num(*v)));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Columns of a populations.csv file by header name.
#[derive(Clone, Debug)]
pub struct PopulationTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl PopulationTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Table("empty populations file".into()))?
            .split(',')
            .map(|h| h.trim().to_string())
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Table(format!("row {} has {} cells", i + 2, cells.len())));
            }
            for (c, cell) in cells.iter().enumerate() {
                let v = cell
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Table(format!("row {}: bad number {cell:?}", i + 2)))?;
                columns[c].push(v);
            }
        }
        Ok(Self { header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&Vec<f64>> {
        self.header.iter().position(|h| h == name).map(|i| &self.columns[i])
    }

    fn require(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)
            .cloned()
            .ok_or_else(|| Error::Table(format!("missing column {name}")))
    }

    /// Diagnostic inputs; `pulse_end_fs` comes from the run's configuration.
    pub fn series(&self, pulse_end_fs: f64) -> Result<DiagnosticSeries> {
        let molecule = if self.column("p_E_A2").is_some() { "p_E_A2" } else { "p_E" };
        Ok(DiagnosticSeries {
            t_fs: self.require("t_fs")?,
            pulse_end_fs,
            p_molecule: self.require(molecule)?,
            p_atom: self.column("p_G_A3").cloned(),
            p_photon: self.require("p_photon_state")?,
            n_expect: self.require("n_photon_expect")?,
            norm: self.require("norm_total")?,
        })
    }
}

/// Diagnostics recomputed from a run directory's files.
pub fn summary_from_dir(dir: &Path) -> Result<DiagnosticsSummary> {
    let cfg = cavdyn::load_config(&dir.join("resolved.cfg"))?;
    let table = PopulationTable::parse(&std::fs::read_to_string(dir.join("populations.csv"))?)?;
    Ok(diagnostics(&table.series(au_to_fs(cfg.laser.t_end()))?))
}

#[derive(Serialize)]
struct DiagnosticsJson {
    exchange_period_fs: Option<f64>,
    peak_molecular_population: f64,
    peak_molecular_time_fs: f64,
    decay_time_fs: Option<f64>,
    decay_rate_per_fs: Option<f64>,
    photon_molecule_ratio: Option<f64>,
    corr_molecule_photon: Option<f64>,
    corr_molecule_atom: Option<f64>,
    max_norm_deviation: f64,
}

impl From<&DiagnosticsSummary> for DiagnosticsJson {
    fn from(d: &DiagnosticsSummary) -> Self {
        Self {
            exchange_period_fs: d.exchange_period_fs,
            peak_molecular_population: d.peak_molecular_population,
            peak_molecular_time_fs: d.peak_molecular_time_fs,
            decay_time_fs: d.decay_time_fs,
            decay_rate_per_fs: d.decay_rate_per_fs,
            photon_molecule_ratio: d.photon_molecule_ratio,
            corr_molecule_photon: d.corr_molecule_photon,
            corr_molecule_atom: d.corr_molecule_atom,
            max_norm_deviation: d.max_norm_deviation,
        }
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    schema: &'static str,
    version: &'static str,
    composition: &'static str,
    channels: &'a [String],
    n_max: usize,
    dimension: usize,
    pulse_end_fs: f64,
    kappa_au: f64,
    snapshots: usize,
    rk4_steps: usize,
    field_free_method: &'static str,
    eigen_residual: Option<f64>,
    wall_clock_s: f64,
    diagnostics: DiagnosticsJson,
}

/// Propagate and write populations.csv, nu_ground.csv, resolved.cfg and
/// meta.json.
pub fn run_member(config: &SimulationConfig, out: &Path) -> Result<DiagnosticsSummary> {
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("resolved.cfg"), config.canonical_echo().as_bytes())?;
    let rec = propagate(config)?;
    write_atomic(&out.join("populations.csv"), populations_csv(&rec).as_bytes())?;
    write_atomic(&out.join("nu_ground.csv"), nu_ground_csv(&rec).as_bytes())?;
    let diag = rec.diagnostics();
    let meta = RunMeta {
        schema: META_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        composition: rec.composition.as_str(),
        channels: &rec.channel_labels,
        n_max: rec.n_max,
        dimension: rec.meta.dim,
        pulse_end_fs: au_to_fs(rec.pulse_end),
        kappa_au: rec.kappa,
        snapshots: rec.snapshots.len(),
        rk4_steps: rec.meta.rk4_steps,
        field_free_method: rec.meta.field_free.as_str(),
        eigen_residual: rec.meta.eigen_residual,
        wall_clock_s: rec.meta.wall_clock_s,
        diagnostics: (&diag).into(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    write_atomic(&out.join("meta.json"), json.as_bytes())?;
    info!("wrote {}", out.display());
    Ok(diag)
}

pub const SUMMARY_COLUMNS: [&str; 13] = [
    "member",
    "param",
    "value",
    "status",
    "exchange_period_fs",
    "peak_molecular_population",
    "peak_molecular_time_fs",
    "decay_time_fs",
    "decay_rate_per_fs",
    "photon_molecule_ratio",
    "corr_molecule_photon",
    "corr_molecule_atom",
    "max_norm_deviation",
];

pub fn summary_row(member: &str, param: &str, value: f64, status: &str, d: Option<&DiagnosticsSummary>) -> String {
    let mut cells = vec![member.to_string(), param.to_string(), fmt_num(value), status.to_string()];
    match d {
        Some(d) => cells.extend([
            fmt_opt(d.exchange_period_fs),
            fmt_num(d.peak_molecular_population),
            fmt_num(d.peak_molecular_time_fs),
            fmt_opt(d.decay_time_fs),
            fmt_opt(d.decay_rate_per_fs),
            fmt_opt(d.photon_molecule_ratio),
            fmt_opt(d.corr_molecule_photon),
            fmt_opt(d.corr_molecule_atom),
            fmt_num(d.max_norm_deviation),
        ]),
        None => cells.extend(std::iter::repeat_n(String::new(), 9)),
    }
    cells.join(",")
}

/// Directory name of sweep member `index`.
pub fn member_name(index: usize, param: &str, value: f64) -> String {
    let key = param.rsplit('.').next().unwrap_or(param);
    format!("{index:02}_{key}_{}", fmt_num(value))
}

fn sweep(cfg: &ConfigArgs, param: &str, values: &[f64], out: &Path, jobs: usize) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config("values", "no sweep values given"));
    }
    for (i, a) in values.iter().enumerate() {
        if values[..i].contains(a) {
            return Err(Error::config("values", format!("duplicate sweep value {a}")));
        }
    }
    let base = parse_overrides(&cfg.overrides)?;
    // resolve every member before running anything
    let configs: Vec<SimulationConfig> = values
        .iter()
        .map(|&v| {
            let mut o = base.clone();
            o.push((param.to_string(), override_value(param, &fmt_num(v))));
            load_with_overrides(&cfg.config, &o)
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(out)?;
    let names: Vec<String> = values.iter().enumerate().map(|(i, &v)| member_name(i, param, v)).collect();
    let status: Mutex<Vec<Option<std::result::Result<(), String>>>> = Mutex::new(vec![None; values.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(values.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let r = run_member(&configs[i], &out.join(&names[i])).map(|_| ());
                if let Err(e) = &r {
                    error!("sweep member {} failed: {e}", names[i]);
                }
                status.lock().expect("status lock")[i] = Some(r.map_err(|e| e.to_string()));
            });
        }
    });
    let status = status.into_inner().expect("status lock");
    let mut text = SUMMARY_COLUMNS.join(",");
    text.push('\n');
    let mut failures = 0;
    for (i, st) in status.iter().enumerate() {
        let row = match st {
            Some(Ok(())) => match summary_from_dir(&out.join(&names[i])) {
                Ok(d) => summary_row(&names[i], param, values[i], "ok", Some(&d)),
                Err(e) => {
                    failures += 1;
                    summary_row(&names[i], param, values[i], &format!("error: {}", csv_safe(&e.to_string())), None)
                }
            },
            Some(Err(e)) => {
                failures += 1;
                summary_row(&names[i], param, values[i], &format!("error: {}", csv_safe(e)), None)
            }
            None => {
                failures += 1;
                summary_row(&names[i], param, values[i], "not run", None)
            }
        };
        text.push_str(&row);
        text.push('\n');
    }
    write_atomic(&out.join("summary.csv"), text.as_bytes())?;
    if failures > 0 {
        return Err(Error::Numerical(format!("{failures} of {} sweep members failed", values.len())));
    }
    Ok(())
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn levels(config: &SimulationConfig, count: Option<usize>, out: Option<&Path>) -> Result<()> {
    let model = HamiltonianModel::from_config(config)?;
    let count = count.unwrap_or(config.schedule.nu_max + 1);
    let mut s = String::from("curve,nu,energy_hartree,energy_ev,spacing_ev\n");
    for (name, tag) in [("ground", CurveTag::Ground), ("excited", CurveTag::Excited)] {
        let ladder = model.ladder(tag, count)?;
        for (nu, e) in ladder.energies.iter().enumerate() {
            let spacing = if nu > 0 {
                fmt_num(hartree_to_ev(e - ladder.energies[nu - 1]))
            } else {
                String::new()
            };
            let _ = writeln!(s, "{name},{nu},{},{},{spacing}", fmt_num(*e), fmt_num(hartree_to_ev(*e)));
        }
    }
    match out {
        Some(p) => write_atomic(p, s.as_bytes()),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

const BRANCHES: [&str; 3] = ["lower", "middle", "upper"];

fn surfaces(config: &SimulationConfig, out: &Path, crossings: Option<&Path>) -> Result<()> {
    let model = HamiltonianModel::from_config(config)?;
    let curves = polariton_surfaces(&model)?;
    let mut header = vec!["R_bohr".to_string()];
    header.extend(BRANCHES.iter().map(|b| format!("E_{b}")));
    for b in BRANCHES {
        header.extend(DIABATIC_LABELS.iter().map(|d| format!("comp_{b}_{d}")));
    }
    let mut s = header.join(",");
    s.push('\n');
    for i in 0..curves.len() {
        let mut row = vec![fmt_num(curves.r[i])];
        row.extend(curves.energies[i].iter().map(|v| fmt_num(*v)));
        for k in 0..3 {
            row.extend(curves.compositions[i][k].iter().map(|v| fmt_num(*v)));
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    write_atomic(out, s.as_bytes())?;

    let mut c = String::from("R_star_bohr,gap_hartree,gap_ev,branch_lower,branch_upper");
    for b in ["lower", "upper"] {
        for d in DIABATIC_LABELS {
            let _ = write!(c, ",comp_{b}_{d}");
        }
    }
    c.push('\n');
    for x in locate_avoided_crossings(&curves) {
        let mut row = vec![
            fmt_num(x.r_star),
            fmt_num(x.gap),
            fmt_num(hartree_to_ev(x.gap)),
            BRANCHES[x.branches.0].to_string(),
            BRANCHES[x.branches.1].to_string(),
        ];
        row.extend(x.composition_lower.iter().chain(&x.composition_upper).map(|v| fmt_num(*v)));
        let _ = writeln!(c, "{}", row.join(","));
    }
    let path = crossings
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_file_name("crossings.csv"));
    write_atomic(&path, c.as_bytes())
}

fn compare(config: &SimulationConfig, t_end_fs: f64, out: &Path) -> Result<()> {
    let model = HamiltonianModel::from_config(config)?;
    let mut short = config.clone();
    short.schedule.t_end = cavdyn::units::fs_to_au(t_end_fs);
    short.schedule.strategy = cavdyn::Strategy::UniformStepping;
    let x = default_x_grid(model.cavity.omega_c)?;
    let oracle = oracle_propagate_model(&model, &x, t_end_fs, short.schedule.output_interval, short.schedule.dt_pulse)?;
    let fock = cavdyn::propagator::propagate_model(&model, &short.schedule, short.canonical_echo())?;
    let labels = &fock.channel_labels;
    let mut header = vec!["t_fs".to_string()];
    for l in labels {
        let l = l.replace(',', "_");
        header.push(format!("fock_p_{l}"));
        header.push(format!("x_p_{l}"));
    }
    header.extend(["fock_n_photon_expect", "x_n_photon_expect", "max_abs_diff"].map(String::from));
    let mut s = header.join(",");
    s.push('\n');
    let mut worst: f64 = 0.0;
    for (a, b) in fock.snapshots.iter().zip(&oracle) {
        let mut row = vec![fmt_num(au_to_fs(a.t))];
        let mut diff: f64 = 0.0;
        for (pa, pb) in a.populations.channels.iter().zip(&b.populations.channels) {
            row.push(fmt_num(*pa));
            row.push(fmt_num(*pb));
            diff = diff.max((pa - pb).abs());
        }
        row.push(fmt_num(a.populations.n_expect));
        row.push(fmt_num(b.populations.n_expect));
        row.push(fmt_num(diff));
        worst = worst.max(diff);
        let _ = writeln!(s, "{}", row.join(","));
    }
    write_atomic(&out.join("compare.csv"), s.as_bytes())?;
    write_atomic(&out.join("resolved.cfg"), short.canonical_echo().as_bytes())?;
    println!("max |p_fock - p_x| over {t_end_fs} fs: {worst:.3e}");
    Ok(())
}
