//! Time evolution: fourth-order Runge–Kutta while the laser is on, exact
//! exponentiation of the constant Hamiltonian afterwards.

use std::collections::VecDeque;
use std::time::Instant;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};
use log::{debug, info, warn};
use num_complex::Complex64 as C64;

use crate::config::{Composition, PropagationSchedule, SimulationConfig, Strategy};
use crate::error::{Error, Result};
use crate::grid::kinetic_matrix;
use crate::observables::{
    channel_populations, diagnostics, vibrational_projection, DiagnosticSeries, DiagnosticsSummary,
    NuProjection, PopulationSnapshot,
};
use crate::system::{initial_state, Frame, HamiltonianModel, HamiltonianWorkspace, WavefunctionState};
use crate::units::au_to_fs;
use crate::vibrational::{CurveTag, VibrationalLadder};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative norm growth that aborts a run.
pub const NORM_GROWTH_LIMIT: f64 = 1e-6;
/// Accepted ‖H − SΛS⁻¹‖ / ‖H‖ for the non-Hermitian eigendecomposition.
pub const EIGEN_RESIDUAL_LIMIT: f64 = 1e-9;
const SNAPSHOT_CHUNK: usize = 256;

/// Classical RK4 with caller-supplied right-hand side.
#[derive(Debug)]
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![ZERO; dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advance `y` from `t` to `t + h` for `dy/dt = f(t, y)`.
    pub fn step(&mut self, y: &mut [C64], t: f64, h: f64, mut f: impl FnMut(f64, &[C64], &mut [C64])) {
        let half = 0.5 * h;
        f(t, y, &mut self.k1);
        for ((o, a), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *o = a + k * half;
        }
        f(t + half, &self.tmp, &mut self.k2);
        for ((o, a), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *o = a + k * half;
        }
        f(t + half, &self.tmp, &mut self.k3);
        for ((o, a), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *o = a + k * h;
        }
        f(t + h, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]) * w;
        }
    }
}

/// Number of equal steps no longer than `dt_max` covering `[t0, t1]`.
pub fn step_count(t0: f64, t1: f64, dt_max: f64) -> usize {
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return 0;
    }
    ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// RK4 in the interaction frame `y = e^{iDt} ψ`; `rhs` must evaluate the
/// framed derivative. Takes and returns the lab-frame state.
pub fn advance_framed(
    rk: &mut Rk4,
    frame: &Frame,
    block_len: usize,
    psi: &mut [C64],
    t0: f64,
    t1: f64,
    dt_max: f64,
    mut rhs: impl FnMut(f64, &[C64], &mut [C64]),
) -> usize {
    let n = step_count(t0, t1, dt_max);
    if n == 0 {
        return 0;
    }
    let h = (t1 - t0) / n as f64;
    frame.rotate(psi, block_len, t0, 1.0);
    for k in 0..n {
        rk.step(psi, t0 + k as f64 * h, h, &mut rhs);
    }
    frame.rotate(psi, block_len, t1, -1.0);
    n
}

/// Explicit stepper for one model, owning its scratch space.
#[derive(Debug)]
pub struct Propagator<'a> {
    pub model: &'a HamiltonianModel,
    frame: Frame,
    ws: HamiltonianWorkspace,
    rk: Rk4,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a HamiltonianModel) -> Self {
        Self {
            frame: Frame {
                energies: model.block_reference_energies(),
            },
            ws: model.workspace(),
            rk: Rk4::new(model.dim()),
            model,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// One RK4 step of length `dt` (negative steps run backwards).
    pub fn step(&mut self, state: &WavefunctionState, dt: f64) -> WavefunctionState {
        let mut out = state.clone();
        self.advance(&mut out.amplitudes, state.t, state.t + dt, dt.abs());
        out.t = state.t + dt;
        out
    }

    /// Integrate from `t0` to `t1` with steps no longer than `dt_max`.
    pub fn advance(&mut self, psi: &mut [C64], t0: f64, t1: f64, dt_max: f64) -> usize {
        let model = self.model;
        let ws = &mut self.ws;
        let frame = &self.frame;
        advance_framed(
            &mut self.rk,
            frame,
            model.basis.n_grid,
            psi,
            t0,
            t1,
            dt_max,
            |t, y, out| model.derivative(ws, t, y, out, Some(frame)),
        )
    }
}

/// One RK4 step of the Schrödinger equation for `model`.
pub fn step(state: &WavefunctionState, dt: f64, model: &HamiltonianModel) -> WavefunctionState {
    Propagator::new(model).step(state, dt)
}

/// Channel parities making the field-free Hamiltonian block diagonal in
/// `(parity + n) mod 2`; `None` if the coupling graph has an odd cycle.
pub fn channel_parities(model: &HamiltonianModel) -> Option<Vec<usize>> {
    let nc = model.basis.n_channels();
    let mut parity: Vec<Option<usize>> = vec![None; nc];
    let edges: Vec<(usize, usize)> = model
        .couplings
        .iter()
        .filter(|c| c.cavity)
        .map(|c| (c.a, c.b))
        .collect();
    for root in 0..nc {
        if parity[root].is_some() {
            continue;
        }
        parity[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let pu = parity[u]?;
            for &(a, b) in &edges {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                match parity[v] {
                    None => {
                        parity[v] = Some(1 - pu);
                        queue.push_back(v);
                    }
                    Some(pv) if pv == pu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    parity.into_iter().collect()
}

/// Block indices of each invariant sector of the field-free Hamiltonian.
pub fn field_free_sectors(model: &HamiltonianModel) -> Vec<Vec<usize>> {
    let basis = &model.basis;
    let all: Vec<usize> = (0..basis.n_blocks()).collect();
    match channel_parities(model) {
        None => vec![all],
        Some(p) => {
            let mut s = vec![Vec::new(), Vec::new()];
            for b in all {
                let (c, n) = basis.block_labels(b);
                s[(p[c] + n) % 2].push(b);
            }
            s.retain(|v| !v.is_empty());
            s
        }
    }
}

/// Dense field-free Hamiltonian restricted to the given blocks.
pub fn field_free_matrix(model: &HamiltonianModel, blocks: &[usize]) -> Mat<c64> {
    let basis = &model.basis;
    let ng = basis.n_grid;
    let dim = blocks.len() * ng;
    let t = kinetic_matrix(&model.grid, model.mass);
    let mut h = Mat::<c64>::zeros(dim, dim);
    let (g, kappa) = (model.cavity.g, model.cavity.kappa);
    for (bi, &b) in blocks.iter().enumerate() {
        let (c, n) = basis.block_labels(b);
        let o = bi * ng;
        for i in 0..ng {
            for j in 0..ng {
                h[(o + i, o + j)] = c64::new(t[i * ng + j], 0.0);
            }
        }
        for (i, v) in model.block_potential(c, n).enumerate() {
            h[(o + i, o + i)] += c64::new(v, -0.5 * kappa * n as f64);
        }
    }
    for cp in model.couplings.iter().filter(|c| c.cavity) {
        for (bi, &b1) in blocks.iter().enumerate() {
            for (bj, &b2) in blocks.iter().enumerate() {
                let (c1, n1) = basis.block_labels(b1);
                let (c2, n2) = basis.block_labels(b2);
                let linked = (c1, c2) == (cp.a, cp.b) || (c1, c2) == (cp.b, cp.a);
                if !linked || n1.abs_diff(n2) != 1 {
                    continue;
                }
                let amp = g * (n1.max(n2) as f64).sqrt();
                for (r, d) in cp.dipole.iter().enumerate() {
                    h[(bi * ng + r, bj * ng + r)] += c64::new(amp * d, 0.0);
                }
            }
        }
    }
    h
}

#[derive(Debug)]
enum SectorEigen {
    Real {
        vectors: Mat<f64>,
        values: Vec<f64>,
    },
    Complex {
        vectors: Mat<c64>,
        inverse: Mat<c64>,
        values: Vec<c64>,
    },
}

#[derive(Debug)]
struct Sector {
    /// global state indices in sector order
    indices: Vec<usize>,
    eigen: SectorEigen,
}

/// Spectral representation of the field-free Hamiltonian; evaluates
/// `e^{−iHτ} ψ` for any τ.
#[derive(Debug)]
pub struct FieldFreeEvolver {
    sectors: Vec<Sector>,
    dim: usize,
    /// largest relative reconstruction residual (0 for the Hermitian case)
    pub residual: f64,
}

impl FieldFreeEvolver {
    pub fn new(model: &HamiltonianModel) -> Result<Self> {
        let ng = model.basis.n_grid;
        let lossless = model.cavity.kappa == 0.0;
        let mut sectors = Vec::new();
        let mut worst: f64 = 0.0;
        for blocks in field_free_sectors(model) {
            let indices: Vec<usize> = blocks.iter().flat_map(|&b| b * ng..(b + 1) * ng).collect();
            let h = field_free_matrix(model, &blocks);
            let n = indices.len();
            let eigen = if lossless {
                let hr = Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)].re);
                let evd = hr
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|e| Error::Numerical(format!("field-free eigensolver failed: {e:?}")))?;
                let s = evd.S();
                SectorEigen::Real {
                    values: (0..n).map(|k| s[k]).collect(),
                    vectors: evd.U().to_owned(),
                }
            } else {
                let evd = h
                    .eigen()
                    .map_err(|e| Error::Numerical(format!("field-free eigensolver failed: {e:?}")))?;
                let vectors = evd.U().to_owned();
                let s = evd.S();
                let values: Vec<c64> = (0..n).map(|k| s[k]).collect();
                let inverse = vectors.partial_piv_lu().inverse();
                let mut sl = vectors.clone();
                for (k, lam) in values.iter().enumerate() {
                    for i in 0..n {
                        sl[(i, k)] *= lam;
                    }
                }
                let recon = &sl * &inverse;
                let diff = (&recon - &h).norm_l2();
                let rel = diff / h.norm_l2();
                let cond = vectors.norm_l2() * inverse.norm_l2();
                debug!("sector of dimension {n}: residual {rel:.3e}, eigenvector condition ≤ {cond:.3e}");
                if !(rel <= EIGEN_RESIDUAL_LIMIT) {
                    return Err(Error::Numerical(format!(
                        "eigendecomposition residual {rel:.3e} exceeds {EIGEN_RESIDUAL_LIMIT:e} \
                         (eigenvector condition estimate {cond:.3e})"
                    )));
                }
                worst = worst.max(rel);
                SectorEigen::Complex {
                    vectors,
                    inverse,
                    values,
                }
            };
            sectors.push(Sector { indices, eigen });
        }
        Ok(Self {
            sectors,
            dim: model.dim(),
            residual: worst,
        })
    }

    fn coefficients(&self, sector: &Sector, psi: &[C64]) -> Vec<C64> {
        let x: Vec<C64> = sector.indices.iter().map(|&i| psi[i]).collect();
        let n = x.len();
        match &sector.eigen {
            SectorEigen::Real { vectors, .. } => (0..n)
                .map(|k| (0..n).map(|i| x[i] * vectors[(i, k)]).sum())
                .collect(),
            SectorEigen::Complex { inverse, .. } => (0..n)
                .map(|k| (0..n).map(|i| inverse[(k, i)] * x[i]).sum())
                .collect(),
        }
    }

    /// `e^{−iHτ} ψ`.
    pub fn evolve(&self, psi: &[C64], tau: f64) -> Vec<C64> {
        let mut out = Vec::new();
        self.evolve_many(psi, &[tau], |_, s| {
            out = s.to_vec();
            Ok(())
        })
        .expect("sink does not fail");
        out
    }

    /// Call `sink(j, e^{−iHτ_j} ψ)` for every τ_j in order.
    pub fn evolve_many(
        &self,
        psi: &[C64],
        taus: &[f64],
        mut sink: impl FnMut(usize, &[C64]) -> Result<()>,
    ) -> Result<()> {
        let coeffs: Vec<Vec<C64>> = self.sectors.iter().map(|s| self.coefficients(s, psi)).collect();
        let mut states: Vec<Vec<C64>> = Vec::new();
        for (chunk_i, chunk) in taus.chunks(SNAPSHOT_CHUNK).enumerate() {
            let m = chunk.len();
            states.resize_with(m, || vec![ZERO; self.dim]);
            for (sector, c) in self.sectors.iter().zip(&coeffs) {
                let n = c.len();
                match &sector.eigen {
                    SectorEigen::Real { vectors, values } => {
                        let mut re = Mat::<f64>::zeros(n, m);
                        let mut im = Mat::<f64>::zeros(n, m);
                        for (j, &tau) in chunk.iter().enumerate() {
                            for k in 0..n {
                                let v = c[k] * C64::from_polar(1.0, -values[k] * tau);
                                re[(k, j)] = v.re;
                                im[(k, j)] = v.im;
                            }
                        }
                        let yr = vectors * &re;
                        let yi = vectors * &im;
                        for (j, st) in states.iter_mut().enumerate().take(m) {
                            for (i, &g) in sector.indices.iter().enumerate() {
                                st[g] = C64::new(yr[(i, j)], yi[(i, j)]);
                            }
                        }
                    }
                    SectorEigen::Complex { vectors, values, .. } => {
                        let mut e = Mat::<c64>::zeros(n, m);
                        for (j, &tau) in chunk.iter().enumerate() {
                            for k in 0..n {
                                e[(k, j)] = c[k] * (values[k] * C64::new(0.0, -tau)).exp();
                            }
                        }
                        let y = vectors * &e;
                        for (j, st) in states.iter_mut().enumerate().take(m) {
                            for (i, &g) in sector.indices.iter().enumerate() {
                                st[g] = y[(i, j)];
                            }
                        }
                    }
                }
            }
            for (j, st) in states.iter().enumerate().take(m) {
                sink(chunk_i * SNAPSHOT_CHUNK + j, st)?;
            }
        }
        Ok(())
    }
}

/// `e^{−iHτ} ψ` with the field-free Hamiltonian; the state must lie after
/// the pulse.
pub fn field_free_propagate(
    state: &WavefunctionState,
    duration: f64,
    model: &HamiltonianModel,
) -> Result<WavefunctionState> {
    if state.t < model.pulse_end() {
        return Err(Error::Numerical(format!(
            "field-free propagation requested at t = {} before the pulse ends at {}",
            state.t,
            model.pulse_end()
        )));
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    let ev = FieldFreeEvolver::new(model)?;
    Ok(WavefunctionState {
        amplitudes: ev.evolve(&state.amplitudes, duration),
        t: state.t + duration,
    })
}

/// Observables recorded at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// atomic units
    pub t: f64,
    pub populations: PopulationSnapshot,
    /// V_A ladder in the n = 0 block of the excited-molecule channel
    pub nu_excited: NuProjection,
    /// V_X ladder in the n = 0 block of the initial channel
    pub nu_ground: NuProjection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldFreeMethod {
    /// no field-free phase (uniform stepping or horizon inside the pulse)
    None,
    Eigen,
    /// eigendecomposition rejected; stepped instead
    SteppingFallback,
}

impl FieldFreeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Eigen => "eigen",
            Self::SteppingFallback => "stepping-fallback",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetadata {
    pub config_echo: String,
    pub wall_clock_s: f64,
    pub rk4_steps: usize,
    pub field_free: FieldFreeMethod,
    pub eigen_residual: Option<f64>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub composition: Composition,
    pub channel_labels: Vec<String>,
    pub n_max: usize,
    pub kappa: f64,
    /// atomic units
    pub pulse_end: f64,
    pub snapshots: Vec<Snapshot>,
    pub meta: RunMetadata,
}

impl TrajectoryRecord {
    pub fn times_fs(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| au_to_fs(s.t)).collect()
    }

    pub fn channel_series(&self, channel: usize) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.populations.channels[channel]).collect()
    }

    pub fn molecule_channel(&self) -> usize {
        self.channel_labels.len() - 1
    }

    pub fn atom_channel(&self) -> Option<usize> {
        (self.composition == Composition::AtomMoleculeCavity).then_some(2)
    }

    pub fn series(&self) -> DiagnosticSeries {
        let col = |f: fn(&PopulationSnapshot) -> f64| -> Vec<f64> {
            self.snapshots.iter().map(|s| f(&s.populations)).collect()
        };
        DiagnosticSeries {
            t_fs: self.times_fs(),
            pulse_end_fs: au_to_fs(self.pulse_end),
            p_molecule: self.channel_series(self.molecule_channel()),
            p_atom: self.atom_channel().map(|c| self.channel_series(c)),
            p_photon: col(|p| p.photon_state),
            n_expect: col(|p| p.n_expect),
            norm: col(|p| p.norm),
        }
    }

    pub fn diagnostics(&self) -> DiagnosticsSummary {
        diagnostics(&self.series())
    }
}

/// Output times `0, Δ, 2Δ, …` up to and including `t_end`.
pub fn output_times(t_end: f64, interval: f64) -> Vec<f64> {
    let n = (t_end / interval * (1.0 + 1e-12)).floor() as usize;
    (0..=n).map(|k| k as f64 * interval).collect()
}

struct Recorder<'m> {
    model: &'m HamiltonianModel,
    excited: VibrationalLadder,
    ground: VibrationalLadder,
    snapshots: Vec<Snapshot>,
    /// growth beyond the previous snapshot aborts the run
    last_norm: f64,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, psi: &[C64]) -> Result<()> {
        let basis = &self.model.basis;
        let populations = channel_populations(psi, basis, self.model.grid.spacing());
        if !populations.norm.is_finite() || populations.norm > self.last_norm * (1.0 + NORM_GROWTH_LIMIT) {
            return Err(Error::Numerical(format!(
                "norm grew to {:.9} at t = {:.3} fs",
                populations.norm,
                au_to_fs(t)
            )));
        }
        self.last_norm = populations.norm;
        let nu_excited = vibrational_projection(psi, basis, self.model.molecule_channel(), &self.excited)?;
        let nu_ground = vibrational_projection(psi, basis, self.model.ground_channel(), &self.ground)?;
        self.snapshots.push(Snapshot {
            t,
            populations,
            nu_excited,
            nu_ground,
        });
        Ok(())
    }
}

/// Run `config` from the initial state to the end of its schedule.
pub fn propagate(config: &SimulationConfig) -> Result<TrajectoryRecord> {
    let model = HamiltonianModel::from_config(config)?;
    propagate_model(&model, &config.schedule, config.canonical_echo())
}

/// Run an already assembled model under `schedule`.
pub fn propagate_model(
    model: &HamiltonianModel,
    schedule: &PropagationSchedule,
    config_echo: String,
) -> Result<TrajectoryRecord> {
    let start = Instant::now();
    let psi0 = initial_state(model)?;
    let count = schedule.nu_max + 1;
    let mut rec = Recorder {
        model,
        excited: model.ladder(CurveTag::Excited, count)?,
        ground: model.ladder(CurveTag::Ground, count)?,
        snapshots: Vec::new(),
        last_norm: psi0.norm_sqr(&model.grid),
    };
    let times = output_times(schedule.t_end, schedule.output_interval);
    let pulse_end = model.pulse_end();
    let step_until = match schedule.strategy {
        Strategy::UniformStepping => schedule.t_end,
        Strategy::TwoPhase => pulse_end.min(schedule.t_end),
    };

    let mut prop = Propagator::new(model);
    let mut psi = psi0.amplitudes;
    let mut t = 0.0;
    let mut steps = 0;
    rec.record(0.0, &psi)?;
    let mut next = 1;
    while next < times.len() && times[next] <= step_until {
        steps += prop.advance(&mut psi, t, times[next], schedule.dt_pulse);
        t = times[next];
        rec.record(t, &psi)?;
        next += 1;
    }
    if t < step_until {
        steps += prop.advance(&mut psi, t, step_until, schedule.dt_pulse);
        t = step_until;
    }
    info!("stepping phase done at t = {:.3} fs after {steps} steps", au_to_fs(t));

    let mut method = FieldFreeMethod::None;
    let mut residual = None;
    if next < times.len() {
        match FieldFreeEvolver::new(model) {
            Ok(ev) => {
                method = FieldFreeMethod::Eigen;
                residual = Some(ev.residual);
                let taus: Vec<f64> = times[next..].iter().map(|&s| s - t).collect();
                ev.evolve_many(&psi, &taus, |j, state| rec.record(t + taus[j], state))?;
            }
            Err(e) if e.is_numerical() => {
                warn!("{e}; continuing with explicit steps");
                method = FieldFreeMethod::SteppingFallback;
                for &tn in &times[next..] {
                    steps += prop.advance(&mut psi, t, tn, schedule.dt_pulse);
                    t = tn;
                    rec.record(t, &psi)?;
                }
            }
            Err(e) => return Err(e),
        }
    }

    Ok(TrajectoryRecord {
        composition: model.composition,
        channel_labels: model.basis.channels.iter().map(|c| c.label.clone()).collect(),
        n_max: model.basis.n_max,
        kappa: model.cavity.kappa,
        pulse_end,
        snapshots: rec.snapshots,
        meta: RunMetadata {
            config_echo,
            wall_clock_s: start.elapsed().as_secs_f64(),
            rk4_steps: steps,
            field_free: method,
            eigen_residual: residual,
            dim: model.dim(),
        },
    })
}
