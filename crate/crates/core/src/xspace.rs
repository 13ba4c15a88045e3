//! Cross-check propagator with the photon mode on a displacement grid x
//! instead of Fock states. Validation only: short horizons, small boxes.

use num_complex::Complex64 as C64;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::grid::{Kinetic, UniformGrid};
use crate::observables::{channel_populations, PopulationSnapshot};
use crate::propagator::{advance_framed, output_times, Rk4};
use crate::system::{envelope_field, initial_state, ChannelBasis, Frame, HamiltonianModel, WavefunctionState};
use crate::units::fs_to_au;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Longest horizon accepted by [`oracle_propagate`], in femtoseconds.
pub const MAX_ORACLE_FS: f64 = 200.0;
/// Boundary amplitude allowed relative to the peak.
pub const BOUNDARY_LIMIT: f64 = 1e-8;
pub const DEFAULT_X_POINTS: usize = 64;
/// Half-width of the default box in units of `1/√ω_c`.
pub const DEFAULT_X_HALF_WIDTH: f64 = 8.0;

pub fn default_x_grid(omega_c: f64) -> Result<UniformGrid> {
    let l = DEFAULT_X_HALF_WIDTH / omega_c.sqrt();
    UniformGrid::new(-l, l, DEFAULT_X_POINTS)
}

/// Oscillator eigenfunctions `h_0 … h_{count−1}` of frequency ω sampled on
/// the grid, by the three-term recurrence.
pub fn hermite_functions(x: &UniformGrid, omega: f64, count: usize) -> Vec<Vec<f64>> {
    let pts = x.points();
    let s = omega.sqrt();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let norm = (omega / std::f64::consts::PI).powf(0.25);
    out.push(pts.iter().map(|&x| norm * (-0.5 * omega * x * x).exp()).collect());
    for n in 0..count - 1 {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = (0..pts.len())
            .map(|i| {
                let prev = if n > 0 { out[n - 1][i] } else { 0.0 };
                a * s * pts[i] * out[n][i] - b * prev
            })
            .collect();
        out.push(next);
    }
    out
}

/// Amplitudes over (channel, x, R), flattened row-major; norm is
/// `Δx ΔR Σ |ψ|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct XGridState {
    pub amplitudes: Vec<C64>,
    pub n_channels: usize,
    pub x: UniformGrid,
    pub n_grid: usize,
    pub t: f64,
}

impl XGridState {
    pub fn index(&self, channel: usize, ix: usize, r: usize) -> usize {
        (channel * self.x.len() + ix) * self.n_grid + r
    }

    pub fn norm_sqr(&self, dr: f64) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum::<f64>() * dr * self.x.spacing()
    }

    /// Largest amplitude on the two x-edges relative to the global peak.
    pub fn boundary_ratio(&self) -> f64 {
        let nx = self.x.len();
        let mut edge: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for c in 0..self.n_channels {
            for ix in 0..nx {
                let row = &self.amplitudes[self.index(c, ix, 0)..self.index(c, ix, 0) + self.n_grid];
                let m = row.iter().map(|a| a.norm()).fold(0.0, f64::max);
                peak = peak.max(m);
                if ix == 0 || ix == nx - 1 {
                    edge = edge.max(m);
                }
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }
}

/// Expand Fock components in Hermite functions of frequency ω_c.
pub fn fock_to_x(state: &WavefunctionState, basis: &ChannelBasis, omega_c: f64, x: &UniformGrid) -> Result<XGridState> {
    let h = hermite_functions(x, omega_c, basis.n_fock());
    check_resolved(&h, x)?;
    let (nc, nx, ng) = (basis.n_channels(), x.len(), basis.n_grid);
    let mut out = vec![ZERO; nc * nx * ng];
    for c in 0..nc {
        for (n, hn) in h.iter().enumerate() {
            let src = &state.amplitudes[basis.block(c, n)];
            for (ix, hv) in hn.iter().enumerate() {
                let o = (c * nx + ix) * ng;
                for (dst, s) in out[o..o + ng].iter_mut().zip(src) {
                    *dst += s * *hv;
                }
            }
        }
    }
    Ok(XGridState {
        amplitudes: out,
        n_channels: nc,
        x: x.clone(),
        n_grid: ng,
        t: state.t,
    })
}

/// Project onto the lowest `n_max + 1` Hermite functions.
pub fn x_to_fock(state: &XGridState, basis: &ChannelBasis, omega_c: f64) -> Result<WavefunctionState> {
    let h = hermite_functions(&state.x, omega_c, basis.n_fock());
    check_resolved(&h, &state.x)?;
    let (nx, ng, dx) = (state.x.len(), state.n_grid, state.x.spacing());
    let mut out = WavefunctionState::zeros(basis);
    out.t = state.t;
    for c in 0..basis.n_channels() {
        for (n, hn) in h.iter().enumerate() {
            let dst = basis.block(c, n);
            for (ix, hv) in hn.iter().enumerate() {
                let o = (c * nx + ix) * ng;
                for (d, s) in out.amplitudes[dst.clone()].iter_mut().zip(&state.amplitudes[o..o + ng]) {
                    *d += s * (*hv * dx);
                }
            }
        }
    }
    Ok(out)
}

fn check_resolved(h: &[Vec<f64>], x: &UniformGrid) -> Result<()> {
    let dx = x.spacing();
    for (n, hn) in h.iter().enumerate() {
        let norm: f64 = hn.iter().map(|v| v * v).sum::<f64>() * dx;
        let edge = hn[0].abs().max(hn[hn.len() - 1].abs());
        let peak = hn.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if (norm - 1.0).abs() > 1e-10 || edge > 1e-10 * peak {
            return Err(Error::Numerical(format!(
                "x-grid does not resolve oscillator state {n} (norm {norm:.3e}, edge ratio {:.3e})",
                edge / peak
            )));
        }
    }
    Ok(())
}

/// Hamiltonian action in the (channel, x, R) representation.
struct XHamiltonian<'a> {
    model: &'a HamiltonianModel,
    x: UniformGrid,
    kin_r: Kinetic,
    kin_x: Kinetic,
    col: Vec<C64>,
    col_out: Vec<C64>,
    transposed: Vec<C64>,
    /// ½ ω_c² x² − ½ ω_c
    osc_potential: Vec<f64>,
    /// g √(2ω_c) x
    cavity_field: Vec<f64>,
}

impl<'a> XHamiltonian<'a> {
    fn new(model: &'a HamiltonianModel, x: &UniformGrid) -> Self {
        let w = model.cavity.omega_c;
        Self {
            kin_r: Kinetic::new(&model.grid, model.mass),
            kin_x: Kinetic::new(x, 1.0),
            col: vec![ZERO; x.len()],
            col_out: vec![ZERO; x.len()],
            transposed: vec![ZERO; x.len() * model.grid.len()],
            osc_potential: x.points().iter().map(|&v| 0.5 * w * w * v * v - 0.5 * w).collect(),
            cavity_field: x
                .points()
                .iter()
                .map(|&v| model.cavity.g * (2.0 * w).sqrt() * v)
                .collect(),
            x: x.clone(),
            model,
        }
    }

    fn frame(&self) -> Frame {
        let nx = self.x.len();
        let energies = self
            .model
            .diabatic
            .iter()
            .flat_map(|v| {
                let m = v.iter().copied().fold(f64::INFINITY, f64::min);
                std::iter::repeat(m).take(nx)
            })
            .collect();
        Frame { energies }
    }

    /// Framed `−i (H − D) ψ`, as for the Fock-basis propagator.
    fn derivative(&mut self, t: f64, psi: &[C64], out: &mut [C64], frame: &Frame) {
        let m = self.model;
        let (nx, ng) = (self.x.len(), m.grid.len());
        let nc = m.basis.n_channels();
        // the oscillator part carries the loss: (1 − iκ/2ω_c) H_osc
        let osc_factor = C64::new(1.0, -0.5 * m.cavity.kappa / m.cavity.omega_c);
        for c in 0..nc {
            let shift = frame.energies[c * nx];
            let o = c * nx * ng;
            let (src, dst) = (&psi[o..o + nx * ng], &mut out[o..o + nx * ng]);
            // R kinetic, all x points in one batch
            dst.copy_from_slice(src);
            self.kin_r.apply_in_place(dst);
            for ix in 0..nx {
                let osc = osc_factor * self.osc_potential[ix];
                let row = ix * ng..(ix + 1) * ng;
                for ((d, v), s) in dst[row.clone()].iter_mut().zip(&m.diabatic[c]).zip(&src[row]) {
                    *d += (osc + (v - shift)) * s;
                }
            }
            // x kinetic on the transposed block
            for ix in 0..nx {
                for r in 0..ng {
                    self.transposed[r * nx + ix] = src[ix * ng + r];
                }
            }
            self.kin_x.apply_in_place(&mut self.transposed);
            for ix in 0..nx {
                for r in 0..ng {
                    dst[ix * ng + r] += osc_factor * self.transposed[r * nx + ix];
                }
            }
        }
        let field = envelope_field(t, &m.laser);
        for cp in &m.couplings {
            for (to, from) in [(cp.a, cp.b), (cp.b, cp.a)] {
                let phase = C64::from_polar(1.0, (frame.energies[to * nx] - frame.energies[from * nx]) * t);
                for ix in 0..nx {
                    let mut f = 0.0;
                    if cp.laser {
                        f -= field;
                    }
                    if cp.cavity {
                        f += self.cavity_field[ix];
                    }
                    if f == 0.0 {
                        continue;
                    }
                    let coef = phase * f;
                    let (so, dout) = ((from * nx + ix) * ng, (to * nx + ix) * ng);
                    for r in 0..ng {
                        out[dout + r] += coef * (cp.dipole[r] * psi[so + r]);
                    }
                }
            }
        }
        for v in out.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    }

    /// `H_osc ψ / ω_c` summed into ⟨n̂⟩ with quadrature weights.
    fn n_expect(&mut self, psi: &[C64], nc: usize, dr: f64) -> f64 {
        let (nx, ng) = (self.x.len(), self.model.grid.len());
        let mut acc = 0.0;
        for c in 0..nc {
            for r in 0..ng {
                for ix in 0..nx {
                    self.col[ix] = psi[(c * nx + ix) * ng + r];
                }
                self.kin_x.apply(&self.col, &mut self.col_out);
                for ix in 0..nx {
                    let h = self.col_out[ix] + self.osc_potential[ix] * self.col[ix];
                    acc += (self.col[ix].conj() * h).re;
                }
            }
        }
        acc * dr * self.x.spacing() / self.model.cavity.omega_c
    }
}

/// Populations of an x-grid state. Channel populations and the norm are
/// exact quadratures; ⟨n̂⟩ uses the oscillator operator; the Fock breakdown
/// and the photonic-state population come from Hermite projections.
pub fn x_populations(state: &XGridState, model: &HamiltonianModel) -> Result<PopulationSnapshot> {
    let mut xh = XHamiltonian::new(model, &state.x);
    snapshot(&mut xh, state)
}

fn snapshot(xh: &mut XHamiltonian, state: &XGridState) -> Result<PopulationSnapshot> {
    let model = xh.model;
    let dr = model.grid.spacing();
    let fock = x_to_fock(state, &model.basis, model.cavity.omega_c)?;
    let mut pop = channel_populations(&fock.amplitudes, &model.basis, dr);
    let nx = state.x.len();
    let ng = state.n_grid;
    let scale = dr * state.x.spacing();
    pop.channels = (0..state.n_channels)
        .map(|c| {
            state.amplitudes[c * nx * ng..(c + 1) * nx * ng]
                .iter()
                .map(C64::norm_sqr)
                .sum::<f64>()
                * scale
        })
        .collect();
    pop.norm = pop.channels.iter().sum();
    pop.n_expect = xh.n_expect(&state.amplitudes, state.n_channels, dr);
    Ok(pop)
}

/// One oracle output row.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSnapshot {
    pub t: f64,
    pub populations: PopulationSnapshot,
    pub boundary_ratio: f64,
}

/// Propagate the configured system in the x representation up to `t_end_fs`
/// (at most [`MAX_ORACLE_FS`]), recording on the configured output stride.
pub fn oracle_propagate(config: &SimulationConfig, t_end_fs: f64) -> Result<Vec<OracleSnapshot>> {
    let model = HamiltonianModel::from_config(config)?;
    let x = default_x_grid(model.cavity.omega_c)?;
    oracle_propagate_model(&model, &x, t_end_fs, config.schedule.output_interval, config.schedule.dt_pulse)
}

pub fn oracle_propagate_model(
    model: &HamiltonianModel,
    x: &UniformGrid,
    t_end_fs: f64,
    output_interval: f64,
    dt: f64,
) -> Result<Vec<OracleSnapshot>> {
    if !(t_end_fs > 0.0 && t_end_fs <= MAX_ORACLE_FS) {
        return Err(Error::config(
            "t_end",
            format!("oracle horizon must be in (0, {MAX_ORACLE_FS}] fs, got {t_end_fs}"),
        ));
    }
    let psi0 = initial_state(model)?;
    let mut state = fock_to_x(&psi0, &model.basis, model.cavity.omega_c, x)?;
    let mut xh = XHamiltonian::new(model, x);
    let frame = xh.frame();
    let mut rk = Rk4::new(state.amplitudes.len());
    let times = output_times(fs_to_au(t_end_fs), output_interval);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &tn in &times {
        advance_framed(&mut rk, &frame, model.grid.len(), &mut state.amplitudes, t, tn, dt, |tt, y, o| {
            xh.derivative(tt, y, o, &frame)
        });
        t = tn;
        state.t = t;
        let boundary_ratio = state.boundary_ratio();
        if boundary_ratio > BOUNDARY_LIMIT {
            return Err(Error::Numerical(format!(
                "x-box too small: boundary amplitude ratio {boundary_ratio:.3e} at t = {t:.1}"
            )));
        }
        out.push(OracleSnapshot {
            t,
            populations: snapshot(&mut xh, &state)?,
            boundary_ratio,
        });
    }
    Ok(out)
}
