//! State-space layout and the matrix-free action of the time-dependent,
//! possibly non-Hermitian, atom–molecule–cavity Hamiltonian.
//!
//! Basis: diabatic channel ⊗ photon Fock level ⊗ R-grid point. The photon
//! mode enters through `√(2ω_c) x = a + a†` and `(n + ½) ω_c` with the
//! zero-point term dropped; loss is `−(i/2) κ n̂`. No rotating-wave
//! approximation is made.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::config::{AtomParams, CavityParams, Composition, LaserParams, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::{Kinetic, RGrid};
use crate::potential::PotentialCurve;
use crate::vibrational::{vibrational_eigenstates, CurveTag, VibrationalLadder};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Electronic part of a diabatic channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Molecular {
    Ground,
    Excited,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    /// e.g. `G,A1`
    pub label: String,
    pub molecular: Molecular,
    /// atomic level index (0-based) or `None` in the atomless model
    pub atomic: Option<usize>,
}

/// Ordered channels × Fock levels × grid points, flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelBasis {
    pub channels: Vec<Channel>,
    pub n_max: usize,
    pub n_grid: usize,
}

impl ChannelBasis {
    pub fn new(composition: Composition, n_max: usize, n_grid: usize) -> Self {
        let ch = |label: &str, molecular, atomic| Channel {
            label: label.to_string(),
            molecular,
            atomic,
        };
        let channels = match composition {
            Composition::AtomMoleculeCavity => vec![
                ch("G,A1", Molecular::Ground, Some(0)),
                ch("G,A2", Molecular::Ground, Some(1)),
                ch("G,A3", Molecular::Ground, Some(2)),
                ch("E,A2", Molecular::Excited, Some(1)),
            ],
            Composition::MoleculeCavity => vec![
                ch("G", Molecular::Ground, None),
                ch("E", Molecular::Excited, None),
            ],
        };
        Self {
            channels,
            n_max,
            n_grid,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_fock(&self) -> usize {
        self.n_max + 1
    }

    pub fn n_blocks(&self) -> usize {
        self.n_channels() * self.n_fock()
    }

    pub fn dim(&self) -> usize {
        self.n_blocks() * self.n_grid
    }

    pub fn block_index(&self, channel: usize, n: usize) -> usize {
        channel * self.n_fock() + n
    }

    /// (channel, Fock level) of a block index.
    pub fn block_labels(&self, block: usize) -> (usize, usize) {
        (block / self.n_fock(), block % self.n_fock())
    }

    pub fn block(&self, channel: usize, n: usize) -> Range<usize> {
        let b = self.block_index(channel, n) * self.n_grid;
        b..b + self.n_grid
    }

    pub fn index(&self, channel: usize, n: usize, r: usize) -> usize {
        self.block_index(channel, n) * self.n_grid + r
    }

    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let r = index % self.n_grid;
        let (c, n) = self.block_labels(index / self.n_grid);
        (c, n, r)
    }

    /// (channel, Fock level) of the designated photonic state: |G,A2,1⟩ or |G,1⟩.
    pub fn photon_state(&self) -> (usize, usize) {
        match self.n_channels() {
            4 => (1, 1),
            _ => (0, 1),
        }
    }

    pub fn channel_by_label(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label == label)
    }
}

pub fn build_basis(config: &SimulationConfig) -> ChannelBasis {
    ChannelBasis::new(config.composition, config.cavity.n_max, config.grid.points)
}

/// One nonzero off-diagonal entry pair of the electronic coupling matrix.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    /// transition dipole on the grid
    pub dipole: Vec<f64>,
    /// `−d E(t)` term present
    pub laser: bool,
    /// `g d (a + a†)` term present
    pub cavity: bool,
}

/// Laser field `E(t)`; exactly zero outside `[t_start, t_start + T]`.
pub fn envelope_field(t: f64, laser: &LaserParams) -> f64 {
    let tau = t - laser.t_start;
    if tau <= 0.0 || tau >= laser.duration {
        return 0.0;
    }
    let s = (PI * tau / laser.duration).sin();
    laser.e0 * s * s * (laser.omega_l * tau).cos()
}

/// Everything needed to apply H(t); immutable after construction.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    pub composition: Composition,
    pub basis: ChannelBasis,
    pub grid: RGrid,
    pub mass: f64,
    pub ground_curve: PotentialCurve,
    pub excited_curve: PotentialCurve,
    pub dipole_curve: PotentialCurve,
    pub atom: Option<AtomParams>,
    /// per-channel diagonal potential including the atomic level
    pub diabatic: Vec<Vec<f64>>,
    pub couplings: Vec<Coupling>,
    pub cavity: CavityParams,
    pub laser: LaserParams,
}

impl HamiltonianModel {
    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        let grid = config.build_grid()?;
        let ground = config.molecule.ground.sample(&grid)?;
        let excited = config.molecule.excited.sample(&grid)?;
        let dipole = config.molecule.dipole.sample(&grid)?;
        Self::assemble(config, grid, ground, excited, dipole)
    }

    /// Build from already sampled curves (used by tests and analysis tools).
    pub fn assemble(
        config: &SimulationConfig,
        grid: RGrid,
        ground_curve: PotentialCurve,
        excited_curve: PotentialCurve,
        dipole_curve: PotentialCurve,
    ) -> Result<Self> {
        let basis = ChannelBasis::new(config.composition, config.cavity.n_max, grid.len());
        for c in [&ground_curve, &excited_curve, &dipole_curve] {
            if c.values.len() != grid.len() {
                return Err(Error::Dimension {
                    expected: grid.len(),
                    got: c.values.len(),
                });
            }
        }
        let levels = config.atom.map(|a| a.levels);
        let diabatic = basis
            .channels
            .iter()
            .map(|ch| {
                let base = match ch.molecular {
                    Molecular::Ground => &ground_curve.values,
                    Molecular::Excited => &excited_curve.values,
                };
                let shift = match (ch.atomic, levels) {
                    (Some(i), Some(l)) => l[i],
                    _ => 0.0,
                };
                base.iter().map(|v| v + shift).collect()
            })
            .collect();
        let n = grid.len();
        let constant = |v: f64| vec![v; n];
        let couplings = match (config.composition, config.atom) {
            (Composition::AtomMoleculeCavity, Some(atom)) => {
                let mut c = vec![
                    Coupling {
                        a: 0,
                        b: 2,
                        dipole: constant(atom.d13),
                        laser: true,
                        cavity: true,
                    },
                    Coupling {
                        a: 1,
                        b: 2,
                        dipole: constant(atom.d23),
                        laser: true,
                        cavity: true,
                    },
                    Coupling {
                        a: 1,
                        b: 3,
                        dipole: dipole_curve.values.clone(),
                        laser: true,
                        cavity: true,
                    },
                ];
                if atom.d12 != 0.0 {
                    c.push(Coupling {
                        a: 0,
                        b: 1,
                        dipole: constant(atom.d12),
                        laser: true,
                        cavity: true,
                    });
                }
                c
            }
            (Composition::MoleculeCavity, _) => vec![Coupling {
                a: 0,
                b: 1,
                dipole: dipole_curve.values.clone(),
                laser: true,
                cavity: true,
            }],
            (Composition::AtomMoleculeCavity, None) => {
                return Err(Error::config("atom", "atom parameters required"))
            }
        };
        Ok(Self {
            composition: config.composition,
            basis,
            grid,
            mass: config.molecule.mass,
            ground_curve,
            excited_curve,
            dipole_curve,
            atom: config.atom,
            diabatic,
            couplings,
            cavity: config.cavity,
            laser: config.laser,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn ground_channel(&self) -> usize {
        0
    }

    /// Channel holding the excited molecule (|E,A2⟩ or |E⟩).
    pub fn molecule_channel(&self) -> usize {
        self.basis.n_channels() - 1
    }

    /// Channel holding the laser-pumped atom (|G,A3⟩), if any.
    pub fn atom_channel(&self) -> Option<usize> {
        match self.composition {
            Composition::AtomMoleculeCavity => Some(2),
            Composition::MoleculeCavity => None,
        }
    }

    pub fn photon_state(&self) -> (usize, usize) {
        self.basis.photon_state()
    }

    pub fn pulse_end(&self) -> f64 {
        self.laser.t_end()
    }

    /// Diagonal energy of block (channel, n) without kinetic energy.
    pub fn block_potential(&self, channel: usize, n: usize) -> impl Iterator<Item = f64> + '_ {
        let photon = n as f64 * self.cavity.omega_c;
        self.diabatic[channel].iter().map(move |v| v + photon)
    }

    /// Constant reference energy per block (minimum of the diagonal
    /// potential), the natural interaction-frame shift.
    pub fn block_reference_energies(&self) -> Vec<f64> {
        (0..self.basis.n_blocks())
            .map(|b| {
                let (c, n) = self.basis.block_labels(b);
                self.block_potential(c, n).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Same model with the cavity term of the coupling between channels
    /// `a` and `b` switched off.
    pub fn without_cavity_coupling(&self, a: usize, b: usize) -> Self {
        let mut m = self.clone();
        for c in &mut m.couplings {
            if (c.a, c.b) == (a, b) || (c.a, c.b) == (b, a) {
                c.cavity = false;
            }
        }
        m
    }

    pub fn workspace(&self) -> HamiltonianWorkspace {
        HamiltonianWorkspace::new(self)
    }

    /// Vibrational ladder of the ground (V_X) or excited (V_A) curve.
    pub fn ladder(&self, tag: CurveTag, count: usize) -> Result<VibrationalLadder> {
        let curve = match tag {
            CurveTag::Excited => &self.excited_curve,
            _ => &self.ground_curve,
        };
        let mut l = vibrational_eigenstates(curve, self.mass, &self.grid, count)?;
        l.tag = tag;
        Ok(l)
    }
}

/// Diagonal interaction frame: block b evolves as `exp(−i D_b t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub energies: Vec<f64>,
}

impl Frame {
    /// Multiply each block of `state` by `exp(sign · i D_b t)`.
    pub fn rotate(&self, state: &mut [C64], n_grid: usize, t: f64, sign: f64) {
        for (b, block) in state.chunks_mut(n_grid).enumerate() {
            let p = C64::from_polar(1.0, sign * self.energies[b] * t);
            block.iter_mut().for_each(|v| *v *= p);
        }
    }
}

/// Scratch space and FFT plans for applying H; one per thread.
#[derive(Debug)]
pub struct HamiltonianWorkspace {
    kinetic: Kinetic,
}

impl HamiltonianWorkspace {
    pub fn new(model: &HamiltonianModel) -> Self {
        Self {
            kinetic: Kinetic::new(&model.grid, model.mass),
        }
    }
}

#[inline]
fn axpy_dipole(out: &mut [C64], coef: C64, dipole: &[f64], src: &[C64]) {
    for ((o, d), s) in out.iter_mut().zip(dipole).zip(src) {
        *o += coef * (*d * s);
    }
}

impl HamiltonianModel {
    /// `out = H(t) psi`, or in an interaction frame
    /// `out = e^{iDt} (H(t) − D) e^{−iDt} psi`.
    pub fn apply(
        &self,
        ws: &mut HamiltonianWorkspace,
        t: f64,
        psi: &[C64],
        out: &mut [C64],
        frame: Option<&Frame>,
    ) {
        let basis = &self.basis;
        let ng = basis.n_grid;
        let nf = basis.n_fock();
        debug_assert_eq!(psi.len(), basis.dim());
        debug_assert_eq!(out.len(), basis.dim());
        let kappa = self.cavity.kappa;
        let omega_c = self.cavity.omega_c;

        for c in 0..basis.n_channels() {
            for n in 0..nf {
                let b = basis.block_index(c, n);
                let r = b * ng..(b + 1) * ng;
                let (src, dst) = (&psi[r.clone()], &mut out[r]);
                ws.kinetic.apply(src, dst);
                let shift = frame.map_or(0.0, |f| f.energies[b]);
                let diag_const = C64::new(n as f64 * omega_c - shift, -0.5 * kappa * n as f64);
                for ((o, v), s) in dst.iter_mut().zip(&self.diabatic[c]).zip(src) {
                    *o += (diag_const + v) * s;
                }
            }
        }

        let field = envelope_field(t, &self.laser);
        // phase factor for amplitude moving from block `from` into block `to`
        let phase = |to: usize, from: usize| -> C64 {
            match frame {
                None => C64::new(1.0, 0.0),
                Some(f) => C64::from_polar(1.0, (f.energies[to] - f.energies[from]) * t),
            }
        };
        let g = self.cavity.g;
        for cp in &self.couplings {
            let d = &cp.dipole;
            for (x, y) in [(cp.a, cp.b), (cp.b, cp.a)] {
                for n in 0..nf {
                    let to = basis.block_index(x, n);
                    let dst_r = to * ng..(to + 1) * ng;
                    if cp.laser && field != 0.0 {
                        let from = basis.block_index(y, n);
                        let coef = -field * phase(to, from);
                        let (src, dst) = split_src_dst(psi, out, from * ng, dst_r.clone());
                        axpy_dipole(dst, coef, d, src);
                    }
                    if cp.cavity && g != 0.0 {
                        // ⟨n|a†|n−1⟩ = √n, ⟨n|a|n+1⟩ = √(n+1)
                        if n > 0 {
                            let from = basis.block_index(y, n - 1);
                            let coef = g * (n as f64).sqrt() * phase(to, from);
                            let (src, dst) = split_src_dst(psi, out, from * ng, dst_r.clone());
                            axpy_dipole(dst, coef, d, src);
                        }
                        if n + 1 < nf {
                            let from = basis.block_index(y, n + 1);
                            let coef = g * ((n + 1) as f64).sqrt() * phase(to, from);
                            let (src, dst) = split_src_dst(psi, out, from * ng, dst_r.clone());
                            axpy_dipole(dst, coef, d, src);
                        }
                    }
                }
            }
        }
    }

    /// `−i H(t) psi` (or its framed counterpart), the Schrödinger right-hand side.
    pub fn derivative(
        &self,
        ws: &mut HamiltonianWorkspace,
        t: f64,
        psi: &[C64],
        out: &mut [C64],
        frame: Option<&Frame>,
    ) {
        self.apply(ws, t, psi, out, frame);
        for v in out.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    }
}

fn split_src_dst<'a>(
    psi: &'a [C64],
    out: &'a mut [C64],
    src_start: usize,
    dst: Range<usize>,
) -> (&'a [C64], &'a mut [C64]) {
    let len = dst.len();
    (&psi[src_start..src_start + len], &mut out[dst])
}

/// Amplitudes over (channel, Fock level, grid point) at time `t`. Values are
/// wavefunction samples: the squared norm is `ΔR Σ |ψ|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefunctionState {
    pub amplitudes: Vec<C64>,
    pub t: f64,
}

impl WavefunctionState {
    pub fn zeros(basis: &ChannelBasis) -> Self {
        Self {
            amplitudes: vec![ZERO; basis.dim()],
            t: 0.0,
        }
    }

    pub fn norm_sqr(&self, grid: &RGrid) -> f64 {
        grid.norm_sqr(&self.amplitudes)
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Place a real grid function in block (channel, n).
    pub fn set_block(&mut self, basis: &ChannelBasis, channel: usize, n: usize, values: &[f64]) {
        for (a, v) in self.amplitudes[basis.block(channel, n)].iter_mut().zip(values) {
            *a = C64::new(*v, 0.0);
        }
    }
}

/// `H(t) ψ` for a state of matching dimension.
pub fn apply_hamiltonian(
    state: &WavefunctionState,
    t: f64,
    model: &HamiltonianModel,
) -> Result<Vec<C64>> {
    if state.amplitudes.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: state.amplitudes.len(),
        });
    }
    let mut out = vec![ZERO; model.dim()];
    model.apply(&mut model.workspace(), t, &state.amplitudes, &mut out, None);
    Ok(out)
}

/// Vibrational ground state of V_X in the system ground channel, vacuum.
pub fn initial_state(model: &HamiltonianModel) -> Result<WavefunctionState> {
    let ladder = model.ladder(CurveTag::Ground, 1)?;
    let mut state = WavefunctionState::zeros(&model.basis);
    state.set_block(&model.basis, model.ground_channel(), 0, &ladder.states[0]);
    let norm = state.norm_sqr(&model.grid).sqrt();
    state.amplitudes.iter_mut().for_each(|a| *a /= norm);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, DEFAULT_CONFIG};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_model() -> HamiltonianModel {
        HamiltonianModel::from_config(&parse_config(DEFAULT_CONFIG, None).unwrap()).unwrap()
    }

    fn random_state(dim: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn basis_dimensions_and_index_map() {
        let b = ChannelBasis::new(Composition::AtomMoleculeCavity, 1, 256);
        assert_eq!(b.dim(), 2048);
        let b2 = ChannelBasis::new(Composition::MoleculeCavity, 2, 128);
        assert_eq!(b2.dim(), 768);
        let b3 = ChannelBasis::new(Composition::AtomMoleculeCavity, 2, 16);
        for i in 0..b3.dim() {
            let (c, n, r) = b3.decompose(i);
            assert_eq!(b3.index(c, n, r), i);
        }
        assert_eq!(b3.channel_by_label("E,A2"), Some(3));
    }

    #[test]
    fn envelope_values() {
        let l = LaserParams {
            e0: 0.01,
            omega_l: 0.7,
            duration: 4000.0,
            t_start: 100.0,
        };
        assert_eq!(envelope_field(100.0, &l), 0.0);
        assert_eq!(envelope_field(4100.0, &l), 0.0);
        assert_eq!(envelope_field(50.0, &l), 0.0);
        assert_eq!(envelope_field(5000.0, &l), 0.0);
        let mid = envelope_field(2100.0, &l);
        assert!((mid - 0.01 * (0.7f64 * 2000.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn cavity_matrix_element() {
        let m = default_model();
        let b = &m.basis;
        let ng = b.n_grid;
        // unit amplitude at one grid point of |G,A2,1>, read <G,A3,0| H there
        let mut psi = vec![ZERO; m.dim()];
        let r = 100;
        psi[b.index(1, 1, r)] = C64::new(1.0, 0.0);
        let out = {
            let mut o = vec![ZERO; m.dim()];
            // after the pulse: only cavity couplings act off-diagonally
            m.apply(&mut m.workspace(), m.pulse_end() + 1.0, &psi, &mut o, None);
            o
        };
        let d23 = m.atom.unwrap().d23;
        let got = out[b.index(2, 0, r)];
        assert!((got - C64::new(m.cavity.g * d23, 0.0)).norm() < 1e-15);
        // zero entries of the coupling matrix
        for rr in 0..ng {
            assert_eq!(out[b.index(0, 0, rr)], ZERO);
            assert_eq!(out[b.index(3, 1, rr)], ZERO);
        }
    }

    #[test]
    fn hermitian_without_loss() {
        let m = default_model();
        let phi = random_state(m.dim(), 1);
        let psi = random_state(m.dim(), 2);
        let mut ws = m.workspace();
        for t in [0.0, 0.37 * m.laser.duration, 0.5 * m.laser.duration, 2.0 * m.laser.duration] {
            let mut hphi = vec![ZERO; m.dim()];
            let mut hpsi = vec![ZERO; m.dim()];
            m.apply(&mut ws, t, &phi, &mut hphi, None);
            m.apply(&mut ws, t, &psi, &mut hpsi, None);
            let a = m.grid.inner(&phi, &hpsi);
            let b = m.grid.inner(&hphi, &psi);
            assert!((a - b).norm() < 1e-12 * a.norm(), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn loss_is_anti_hermitian_on_photons() {
        let mut cfg = parse_config(DEFAULT_CONFIG, None).unwrap();
        cfg.cavity.kappa = 4e-4;
        cfg.cavity.g = 0.0;
        let m = HamiltonianModel::from_config(&cfg).unwrap();
        let mut psi = vec![ZERO; m.dim()];
        let i = m.basis.index(1, 2, 40);
        psi[i] = C64::new(1.0, 0.0);
        let out = apply_hamiltonian(&WavefunctionState { amplitudes: psi, t: 0.0 }, 1e6, &m).unwrap();
        assert!((out[i].im + 0.5 * 4e-4 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn framed_apply_matches_rotated_lab_apply() {
        let m = default_model();
        let frame = Frame {
            energies: m.block_reference_energies(),
        };
        let y = random_state(m.dim(), 5);
        let t = 0.41 * m.laser.duration;
        let ng = m.basis.n_grid;
        let mut ws = m.workspace();
        let mut framed = vec![ZERO; m.dim()];
        m.apply(&mut ws, t, &y, &mut framed, Some(&frame));
        // e^{iDt}(H - D)e^{-iDt} y computed the long way
        let mut psi = y.clone();
        frame.rotate(&mut psi, ng, t, -1.0);
        let mut h = vec![ZERO; m.dim()];
        m.apply(&mut ws, t, &psi, &mut h, None);
        for (b, block) in h.chunks_mut(ng).enumerate() {
            for (hv, pv) in block.iter_mut().zip(&psi[b * ng..(b + 1) * ng]) {
                *hv -= frame.energies[b] * pv;
            }
        }
        frame.rotate(&mut h, ng, t, 1.0);
        let err = h.iter().zip(&framed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = h.iter().map(|a| a.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13 * scale, "{err}");
    }

    #[test]
    fn initial_state_properties() {
        let m = default_model();
        let s = initial_state(&m).unwrap();
        assert!((s.norm_sqr(&m.grid) - 1.0).abs() < 1e-14);
        let g = m.basis.block(0, 0);
        let outside: f64 = s
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !g.contains(i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert_eq!(outside, 0.0);
        // energy expectation = ν=0 level of V_X plus A1
        let h = apply_hamiltonian(&s, 0.0, &m).unwrap();
        let e = m.grid.inner(&s.amplitudes, &h);
        let ladder = m.ladder(CurveTag::Ground, 1).unwrap();
        let a1 = m.atom.unwrap().levels[0];
        assert!((e.re - (ladder.energies[0] + a1)).abs() < 1e-12);
        assert!(e.im.abs() < 1e-15);
    }

    #[test]
    fn atomless_model_layout() {
        let cfg = parse_config(crate::config::ATOMLESS_CONFIG, None).unwrap();
        let m = HamiltonianModel::from_config(&cfg).unwrap();
        assert_eq!(m.basis.n_channels(), 2);
        assert_eq!(m.couplings.len(), 1);
        assert_eq!(m.photon_state(), (0, 1));
        assert_eq!(m.diabatic[0], m.ground_curve.values);
    }

    #[test]
    fn dimension_mismatch() {
        let m = default_model();
        let s = WavefunctionState {
            amplitudes: vec![ZERO; 10],
            t: 0.0,
        };
        assert!(apply_hamiltonian(&s, 0.0, &m).is_err());
    }
}
