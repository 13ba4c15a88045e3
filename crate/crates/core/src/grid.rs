//! Periodic Fourier grid for one coordinate and its spectral kinetic operator.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid with the conjugate momentum lattice in FFT
/// (wrap-around) order. Used for the internuclear coordinate R and, in the
/// displacement-coordinate oracle, for the photon coordinate x.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    points: Vec<f64>,
    momenta: Vec<f64>,
}

pub type RGrid = UniformGrid;

impl UniformGrid {
    /// `n` points with spacing `(max - min) / n`; `max` itself is the periodic
    /// image of `min` and is not sampled.
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::config("grid", format!("empty interval [{min}, {max}]")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::config(
                "grid.points",
                format!("point count must be a power of two >= 4, got {n}"),
            ));
        }
        let dx = (max - min) / n as f64;
        let points = (0..n).map(|i| min + i as f64 * dx).collect();
        let dk = 2.0 * PI / (max - min);
        let momenta = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect();
        Ok(Self {
            min,
            max,
            points,
            momenta,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.len() as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// Index of the grid point closest to `r` (clamped to the grid).
    pub fn nearest_index(&self, r: f64) -> usize {
        let i = ((r - self.min) / self.spacing()).round();
        i.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Grid-quadrature inner product ⟨a|b⟩.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * self.spacing()
    }

    pub fn norm_sqr(&self, a: &[C64]) -> f64 {
        a.iter().map(|x| x.norm_sqr()).sum::<f64>() * self.spacing()
    }

    /// Same grid with twice the point density over the same interval.
    pub fn refined(&self) -> Self {
        Self::new(self.min, self.max, 2 * self.len()).expect("refining a valid grid")
    }
}

impl fmt::Display for UniformGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x {}", self.min, self.max, self.len())
    }
}

/// Reusable spectral kinetic operator `-(1/2m) d²/dx²` for one grid and mass.
#[derive(Clone)]
pub struct Kinetic {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// k²/2m with the 1/n normalisation of the inverse transform folded in.
    multiplier: Vec<f64>,
    scratch: Vec<C64>,
    buf: Vec<C64>,
}

impl fmt::Debug for Kinetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kinetic").field("n", &self.multiplier.len()).finish()
    }
}

impl Kinetic {
    pub fn new(grid: &UniformGrid, mass: f64) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let multiplier = grid
            .momenta()
            .iter()
            .map(|k| k * k / (2.0 * mass) / n as f64)
            .collect();
        Self {
            forward,
            inverse,
            multiplier,
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
            buf: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.multiplier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplier.is_empty()
    }

    /// Largest eigenvalue of the operator, k_max²/2m.
    pub fn max_energy(&self) -> f64 {
        let n = self.len() as f64;
        self.multiplier.iter().fold(0.0f64, |a, &b| a.max(b * n))
    }

    /// `out = T psi`.
    pub fn apply(&mut self, psi: &[C64], out: &mut [C64]) {
        debug_assert_eq!(psi.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        out.copy_from_slice(psi);
        self.apply_in_place(out);
    }

    /// Also accepts several back-to-back vectors; each is transformed
    /// separately.
    pub fn apply_in_place(&mut self, data: &mut [C64]) {
        debug_assert_eq!(data.len() % self.len(), 0);
        self.forward.process_with_scratch(data, &mut self.scratch);
        for chunk in data.chunks_exact_mut(self.multiplier.len()) {
            for (v, m) in chunk.iter_mut().zip(&self.multiplier) {
                *v *= m;
            }
        }
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// `out += factor * T psi`.
    pub fn apply_add(&mut self, psi: &[C64], factor: C64, out: &mut [C64]) {
        let mut buf = std::mem::take(&mut self.buf);
        buf.copy_from_slice(psi);
        self.apply_in_place(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += factor * b;
        }
        self.buf = buf;
    }

    /// First column of the (real, symmetric, circulant) kinetic matrix:
    /// `T[i][j] = column[(i - j) mod n]`.
    pub fn circulant_column(&mut self) -> Vec<f64> {
        let n = self.len();
        let mut e0 = vec![C64::new(0.0, 0.0); n];
        e0[0] = C64::new(1.0, 0.0);
        self.apply_in_place(&mut e0);
        e0.iter().map(|c| c.re).collect()
    }
}

/// `-(1/2m) d²psi/dx²` evaluated spectrally on a periodic grid.
pub fn apply_kinetic(psi: &[C64], mass: f64, grid: &UniformGrid) -> Result<Vec<C64>> {
    if psi.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: psi.len(),
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    Kinetic::new(grid, mass).apply(psi, &mut out);
    Ok(out)
}

/// Dense kinetic matrix, row-major, `n x n`.
pub fn kinetic_matrix(grid: &UniformGrid, mass: f64) -> Vec<f64> {
    let n = grid.len();
    let col = Kinetic::new(grid, mass).circulant_column();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = (i + n - j) % n;
            let e = (n - d) % n;
            // average the two symmetric entries to remove FFT round-off asymmetry
            m[i * n + j] = 0.5 * (col[d] + col[e]);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn grid_layout() {
        let g = UniformGrid::new(4.0, 14.0, 256).unwrap();
        assert_eq!(g.len(), 256);
        assert!((g.spacing() - 10.0 / 256.0).abs() < 1e-15);
        assert_eq!(g.points()[0], 4.0);
        let k = g.momenta();
        assert_eq!(k[0], 0.0);
        assert!((k[1] + k[255]).abs() < 1e-12);
        assert!(k[128] < 0.0);
        assert!(UniformGrid::new(0.0, 1.0, 100).is_err());
        assert!(UniformGrid::new(1.0, 0.0, 64).is_err());
    }

    #[test]
    fn plane_wave_is_eigenfunction() {
        let g = UniformGrid::new(-3.0, 5.0, 64).unwrap();
        let mass = 7.5;
        let k = g.momenta()[5];
        let psi: Vec<C64> = g.points().iter().map(|&x| C64::from_polar(1.0, k * x)).collect();
        let out = apply_kinetic(&psi, mass, &g).unwrap();
        let e = k * k / (2.0 * mass);
        for (o, p) in out.iter().zip(&psi) {
            assert!((o - p * e).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_is_annihilated() {
        let g = UniformGrid::new(0.0, 1.0, 32).unwrap();
        let out = apply_kinetic(&vec![c(2.0, -1.0); 32], 3.0, &g).unwrap();
        assert!(out.iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn length_mismatch() {
        let g = UniformGrid::new(0.0, 1.0, 32).unwrap();
        assert!(matches!(
            apply_kinetic(&[c(1.0, 0.0); 16], 1.0, &g),
            Err(Error::Dimension { expected: 32, got: 16 })
        ));
    }

    #[test]
    fn matches_finite_difference_on_smooth_function() {
        // oracle: fourth-order central difference of an analytic Gaussian
        // wavepacket, evaluated with a small step directly from the formula
        let g = UniformGrid::new(-10.0, 10.0, 256).unwrap();
        let mass = 2.0;
        let f = |x: f64| C64::from_polar((-(x - 0.7) * (x - 0.7) / 2.0).exp(), 1.3 * x);
        let psi: Vec<C64> = g.points().iter().map(|&x| f(x)).collect();
        let out = apply_kinetic(&psi, mass, &g).unwrap();
        let h = 1e-3;
        let mut max_err: f64 = 0.0;
        let mut max_ref: f64 = 0.0;
        for (i, &x) in g.points().iter().enumerate() {
            let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h);
            let reference = -d2 / (2.0 * mass);
            max_err = max_err.max((out[i] - reference).norm());
            max_ref = max_ref.max(reference.norm());
        }
        assert!(max_err / max_ref < 1e-6, "relative error {}", max_err / max_ref);
    }

    #[test]
    fn hermitian_on_random_vectors() {
        let g = UniformGrid::new(0.0, 6.0, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rand_vec = || -> Vec<C64> {
            (0..128).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        };
        let phi = rand_vec();
        let psi = rand_vec();
        let tphi = apply_kinetic(&phi, 1.7, &g).unwrap();
        let tpsi = apply_kinetic(&psi, 1.7, &g).unwrap();
        let lhs = g.inner(&phi, &tpsi);
        let rhs = g.inner(&tphi, &psi);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn dense_matrix_agrees_with_fft() {
        let g = UniformGrid::new(0.0, 3.0, 16).unwrap();
        let m = kinetic_matrix(&g, 1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi: Vec<C64> = (0..16).map(|_| c(rng.gen(), rng.gen())).collect();
        let fft = apply_kinetic(&psi, 1.3, &g).unwrap();
        for i in 0..16 {
            let dense: C64 = (0..16).map(|j| psi[j] * m[i * 16 + j]).sum();
            assert!((dense - fft[i]).norm() < 1e-12);
            assert_eq!(m[i * 16 + (i + 3) % 16], m[((i + 3) % 16) * 16 + i]);
        }
    }
}
