//! Populations, vibrational projections and trajectory diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::system::ChannelBasis;
use crate::vibrational::VibrationalLadder;

/// Populations at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationSnapshot {
    /// per channel, summed over Fock levels
    pub channels: Vec<f64>,
    /// per (channel, n), indexed `channel * (n_max + 1) + n`
    pub breakdown: Vec<f64>,
    pub n_expect: f64,
    /// population of |G,A2,1⟩ (|G,1⟩ without the atom)
    pub photon_state: f64,
    pub norm: f64,
}

impl PopulationSnapshot {
    pub fn fock(&self, basis: &ChannelBasis, channel: usize, n: usize) -> f64 {
        self.breakdown[basis.block_index(channel, n)]
    }
}

/// Grid-quadrature populations of every channel and Fock level.
pub fn channel_populations(amplitudes: &[C64], basis: &ChannelBasis, dr: f64) -> PopulationSnapshot {
    let ng = basis.n_grid;
    let breakdown: Vec<f64> = amplitudes
        .chunks(ng)
        .map(|b| b.iter().map(C64::norm_sqr).sum::<f64>() * dr)
        .collect();
    let nf = basis.n_fock();
    let channels = breakdown.chunks(nf).map(|c| c.iter().sum()).collect();
    let n_expect = breakdown
        .iter()
        .enumerate()
        .map(|(b, p)| (b % nf) as f64 * p)
        .sum();
    let (pc, pn) = basis.photon_state();
    PopulationSnapshot {
        channels,
        photon_state: breakdown[basis.block_index(pc, pn)],
        norm: breakdown.iter().sum(),
        n_expect,
        breakdown,
    }
}

/// Populations of ladder levels in the n = 0 block of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct NuProjection {
    pub populations: Vec<f64>,
    /// channel population not accounted for by the ladder
    pub residual: f64,
}

pub fn vibrational_projection(
    amplitudes: &[C64],
    basis: &ChannelBasis,
    channel: usize,
    ladder: &VibrationalLadder,
) -> Result<NuProjection> {
    if ladder.grid_len() != basis.n_grid {
        return Err(Error::Dimension {
            expected: basis.n_grid,
            got: ladder.grid_len(),
        });
    }
    let dr = ladder.spacing;
    let block = &amplitudes[basis.block(channel, 0)];
    let populations: Vec<f64> = ladder
        .states
        .iter()
        .map(|phi| {
            let ov: C64 = phi.iter().zip(block).map(|(p, a)| a * *p).sum::<C64>() * dr;
            ov.norm_sqr()
        })
        .collect();
    let channel_pop: f64 = (0..basis.n_fock())
        .map(|n| amplitudes[basis.block(channel, n)].iter().map(C64::norm_sqr).sum::<f64>())
        .sum::<f64>()
        * dr;
    Ok(NuProjection {
        residual: channel_pop - populations.iter().sum::<f64>(),
        populations,
    })
}

/// Time series needed for [`diagnostics`]; every field is also a column of
/// the populations CSV, so summaries can be recomputed from files.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub t_fs: Vec<f64>,
    pub pulse_end_fs: f64,
    pub p_molecule: Vec<f64>,
    /// excited atom |G,A3⟩; absent without the atom
    pub p_atom: Option<Vec<f64>>,
    pub p_photon: Vec<f64>,
    pub n_expect: Vec<f64>,
    pub norm: Vec<f64>,
}

impl DiagnosticSeries {
    /// Excited-state population: atom + molecule + photonic state. Loss
    /// only removes this part; the ground channel keeps its population.
    pub fn excited_population(&self) -> Vec<f64> {
        (0..self.t_fs.len())
            .map(|i| {
                self.p_molecule[i]
                    + self.p_photon[i]
                    + self.p_atom.as_ref().map_or(0.0, |a| a[i])
            })
            .collect()
    }

    fn post_pulse_start(&self) -> usize {
        self.t_fs.partition_point(|&t| t < self.pulse_end_fs)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsSummary {
    /// dominant post-pulse period of the molecular population
    pub exchange_period_fs: Option<f64>,
    pub peak_molecular_population: f64,
    pub peak_molecular_time_fs: f64,
    /// time at which the excited population first falls to 1/e of its
    /// value at the end of the pulse
    pub decay_time_fs: Option<f64>,
    /// mean logarithmic decay rate of the excited population after the pulse
    pub decay_rate_per_fs: Option<f64>,
    /// ⟨p_photon⟩ / ⟨p_molecule⟩ over snapshots with p_molecule > 0.01
    pub photon_molecule_ratio: Option<f64>,
    /// post-pulse Pearson correlations
    pub corr_molecule_photon: Option<f64>,
    pub corr_molecule_atom: Option<f64>,
    pub max_norm_deviation: f64,
}

/// Threshold on p_molecule for the photon/molecule ratio.
pub const RATIO_MASK: f64 = 0.01;
const MIN_POST_PULSE: usize = 100;
const ZERO_PAD: usize = 16;

pub fn diagnostics(series: &DiagnosticSeries) -> DiagnosticsSummary {
    let start = series.post_pulse_start();
    let post_t = &series.t_fs[start..];
    let post_mol = &series.p_molecule[start..];

    let (peak_i, peak) = series
        .p_molecule
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });

    let mask: Vec<usize> = (0..series.t_fs.len())
        .filter(|&i| series.p_molecule[i] > RATIO_MASK)
        .collect();
    let photon_molecule_ratio = (!mask.is_empty()).then(|| {
        let ph: f64 = mask.iter().map(|&i| series.p_photon[i]).sum();
        let mo: f64 = mask.iter().map(|&i| series.p_molecule[i]).sum();
        ph / mo
    });

    let excited = series.excited_population();
    let (decay_time_fs, decay_rate_per_fs) = if start < excited.len() {
        decay_measures(post_t, &excited[start..])
    } else {
        (None, None)
    };

    DiagnosticsSummary {
        exchange_period_fs: (post_t.len() >= MIN_POST_PULSE)
            .then(|| dominant_period(post_t, post_mol))
            .flatten(),
        peak_molecular_population: if peak.is_finite() { peak } else { 0.0 },
        peak_molecular_time_fs: series.t_fs.get(peak_i).copied().unwrap_or(0.0),
        decay_time_fs,
        decay_rate_per_fs,
        photon_molecule_ratio,
        corr_molecule_photon: pearson(post_mol, &series.p_photon[start..]),
        corr_molecule_atom: series
            .p_atom
            .as_ref()
            .and_then(|a| pearson(post_mol, &a[start..])),
        max_norm_deviation: series.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max),
    }
}

/// Period of the strongest nonzero frequency of a uniformly sampled series:
/// mean removed, Hann window, zero padding, parabolic peak refinement. The
/// search starts past the first minimum of the spectrum so the leakage of
/// the zero-frequency component cannot win.
pub fn dominant_period(t: &[f64], y: &[f64]) -> Option<f64> {
    let n = y.len();
    if n < 8 {
        return None;
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let mean = y.iter().sum::<f64>() / n as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(spread > 1e-12) || !(dt > 0.0) {
        return None;
    }
    let len = (n * ZERO_PAD).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for (i, v) in y.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = C64::new((v - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm()).collect();
    let mut k = 1;
    while k + 1 < mag.len() && mag[k + 1] <= mag[k] {
        k += 1;
    }
    let (kmax, _) = mag[k..]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let kmax = kmax + k;
    if kmax == 0 || kmax + 1 >= mag.len() {
        return None;
    }
    let (a, b, c) = (mag[kmax - 1], mag[kmax], mag[kmax + 1]);
    let den = a - 2.0 * b + c;
    let shift = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    let freq = (kmax as f64 + shift) / (len as f64 * dt);
    (freq > 0.0).then(|| 1.0 / freq)
}

/// 1/e crossing time (linear interpolation) and mean log-decay rate of a
/// series starting at the reference instant.
pub fn decay_measures(t: &[f64], p: &[f64]) -> (Option<f64>, Option<f64>) {
    if t.len() < 2 || !(p[0] > 0.0) {
        return (None, None);
    }
    let thr = p[0] / std::f64::consts::E;
    let mut crossing = None;
    for i in 1..p.len() {
        if p[i] <= thr {
            let f = (p[i - 1] - thr) / (p[i - 1] - p[i]);
            crossing = Some(t[i - 1] + f * (t[i] - t[i - 1]));
            break;
        }
    }
    let last = p.len() - 1;
    let rate = (p[last] > 0.0 && t[last] > t[0]).then(|| -(p[last] / p[0]).ln() / (t[last] - t[0]));
    (crossing, rate)
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Worst snapshot-wise violation of `d‖ψ‖²/dt = −κ⟨n̂⟩`, using the
/// trapezoidal average of ⟨n̂⟩ over each interval. Times in atomic units.
pub fn decay_identity_violation(t_au: &[f64], norm: &[f64], n_expect: &[f64], kappa: f64) -> f64 {
    (1..t_au.len())
        .map(|i| {
            let dt = t_au[i] - t_au[i - 1];
            let lhs = (norm[i] - norm[i - 1]) / dt;
            (lhs + kappa * 0.5 * (n_expect[i] + n_expect[i - 1])).abs()
        })
        .fold(0.0, f64::max)
}
