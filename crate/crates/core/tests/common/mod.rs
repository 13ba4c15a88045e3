#![allow(dead_code)]

use cavdyn::config::{parse_config, ATOMLESS_CONFIG, DEFAULT_CONFIG};
use cavdyn::units::fs_to_au;
use cavdyn::{SimulationConfig, Strategy};
use num_complex::Complex64 as C64;

pub fn default_config() -> SimulationConfig {
    parse_config(DEFAULT_CONFIG, None).unwrap()
}

pub fn atomless_config() -> SimulationConfig {
    parse_config(ATOMLESS_CONFIG, None).unwrap()
}

/// Coarser R grid over the same window; dynamics stay qualitatively intact
/// and the runs are an order of magnitude cheaper.
pub fn coarse(mut cfg: SimulationConfig, points: usize) -> SimulationConfig {
    cfg.grid.points = points;
    cfg
}

pub fn with_pulse(mut cfg: SimulationConfig, duration_fs: f64, t_end_fs: f64) -> SimulationConfig {
    cfg.laser.duration = fs_to_au(duration_fs);
    cfg.schedule.t_end = fs_to_au(t_end_fs);
    cfg
}

pub fn uniform(mut cfg: SimulationConfig) -> SimulationConfig {
    cfg.schedule.strategy = Strategy::UniformStepping;
    cfg
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_amp_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

type M2 = [[C64; 2]; 2];

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `exp(−i A)` for Hermitian `A` via the Pauli decomposition.
fn expm_herm(a: &M2) -> M2 {
    let s = 0.5 * (a[0][0] + a[1][1]).re;
    let z = 0.5 * (a[0][0] - a[1][1]).re;
    let (x, y) = (a[0][1].re, -a[0][1].im);
    let th = (x * x + y * y + z * z).sqrt();
    let (c, sn) = (th.cos(), if th > 0.0 { th.sin() / th } else { 1.0 });
    let ph = C64::from_polar(1.0, -s);
    let i = C64::new(0.0, 1.0);
    [
        [ph * (c - i * sn * z), ph * (-i * sn * C64::new(x, -y))],
        [ph * (-i * sn * C64::new(x, y)), ph * (c + i * sn * z)],
    ]
}

/// Two-level system `H = diag(e1, e3) − E(t) d σx`, from `c = (1, 0)` at 0,
/// integrated with the commutator-free fourth-order Magnus scheme
/// (two exponentials per step, Gauss–Legendre nodes). Returns `|c|²` at
/// every multiple of `interval` up to `t_end`.
pub fn two_level_magnus(
    e1: f64,
    e3: f64,
    d: f64,
    field: impl Fn(f64) -> f64,
    t_end: f64,
    interval: f64,
    substeps: usize,
) -> Vec<[f64; 2]> {
    let sq = 3f64.sqrt();
    let (c1, c2) = (0.5 - sq / 6.0, 0.5 + sq / 6.0);
    let (a1, a2) = (0.25 + sq / 6.0, 0.25 - sq / 6.0);
    let h = |t: f64| -> M2 {
        let off = C64::new(-field(t) * d, 0.0);
        [[C64::new(e1, 0.0), off], [off, C64::new(e3, 0.0)]]
    };
    let comb = |x: &M2, y: &M2, p: f64, q: f64, dt: f64| -> M2 {
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = (x[i][j] * p + y[i][j] * q) * dt;
            }
        }
        m
    };
    let mut c = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let n_out = (t_end / interval * (1.0 + 1e-12)).floor() as usize;
    let mut out = vec![[1.0, 0.0]];
    let dt = interval / substeps as f64;
    for k in 0..n_out {
        for s in 0..substeps {
            let t = k as f64 * interval + s as f64 * dt;
            let (h1, h2) = (h(t + c1 * dt), h(t + c2 * dt));
            // the later factor leans on the later node
            let u = mat_mul(&expm_herm(&comb(&h1, &h2, a2, a1, dt)), &expm_herm(&comb(&h1, &h2, a1, a2, dt)));
            c = [u[0][0] * c[0] + u[0][1] * c[1], u[1][0] * c[0] + u[1][1] * c[1]];
        }
        out.push([c[0].norm_sqr(), c[1].norm_sqr()]);
    }
    out
}

/// Avoided crossings of the shipped configuration:
/// (branches, R* in bohr, gap in hartree).
pub const PINNED_CROSSINGS: [((usize, usize), f64, f64); 3] = [
    ((0, 1), 5.7987779505, 9.105865e-5),
    ((1, 2), 5.7297252148, 1.642582e-3),
    ((1, 2), 8.6093750006, 1.298120e-3),
];
