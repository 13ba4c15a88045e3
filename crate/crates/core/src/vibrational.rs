//! Vibrational eigenstates of a single potential curve by dense
//! diagonalization of the Fourier-grid Hamiltonian.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::grid::{kinetic_matrix, Kinetic, RGrid};
use crate::potential::PotentialCurve;

/// Which diabatic curve a ladder belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveTag {
    Ground,
    Excited,
    Other,
}

/// Lowest vibrational levels of one curve. Eigenfunctions are real,
/// normalised under grid quadrature (`Σ φ² ΔR = 1`), and have a positive
/// value at their leftmost antinode.
#[derive(Clone, Debug)]
pub struct VibrationalLadder {
    pub tag: CurveTag,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub spacing: f64,
}

impl VibrationalLadder {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn grid_len(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// Largest `‖(T+V)φ_ν − E_ν φ_ν‖` over the ladder (grid-quadrature norm).
    pub fn max_residual(&self, curve: &PotentialCurve, mass: f64, grid: &RGrid) -> f64 {
        use num_complex::Complex64 as C64;
        let mut kin = Kinetic::new(grid, mass);
        let mut out = vec![C64::new(0.0, 0.0); grid.len()];
        let mut worst: f64 = 0.0;
        for (e, phi) in self.energies.iter().zip(&self.states) {
            let psi: Vec<C64> = phi.iter().map(|&v| C64::new(v, 0.0)).collect();
            kin.apply(&psi, &mut out);
            let r: f64 = out
                .iter()
                .zip(phi)
                .zip(&curve.values)
                .map(|((t, p), v)| (t + C64::new((v - e) * p, 0.0)).norm_sqr())
                .sum::<f64>()
                * grid.spacing();
            worst = worst.max(r.sqrt());
        }
        worst
    }
}

/// Lowest `count` eigenpairs of `T + V` on the grid.
pub fn vibrational_eigenstates(
    curve: &PotentialCurve,
    mass: f64,
    grid: &RGrid,
    count: usize,
) -> Result<VibrationalLadder> {
    let n = grid.len();
    if curve.values.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: curve.values.len(),
        });
    }
    if count == 0 || count > n / 4 {
        return Err(Error::Numerical(format!(
            "requested {count} vibrational states but a {n}-point grid resolves at most {}",
            n / 4
        )));
    }
    let t = kinetic_matrix(grid, mass);
    let h = Mat::<f64>::from_fn(n, n, |i, j| {
        t[i * n + j] + if i == j { curve.values[i] } else { 0.0 }
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("vibrational eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let dr = grid.spacing();
    let norm = 1.0 / dr.sqrt();
    let mut energies = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for k in 0..count {
        energies.push(s[k]);
        let mut phi: Vec<f64> = (0..n).map(|i| u[(i, k)] * norm).collect();
        fix_sign(&mut phi);
        states.push(phi);
    }
    Ok(VibrationalLadder {
        tag: CurveTag::Other,
        energies,
        states,
        spacing: dr,
    })
}

/// Solve on `grid` and on a grid of twice the density; fail if any of the
/// requested energies moves by more than `tolerance`.
pub fn vibrational_eigenstates_checked(
    curve_fn: impl Fn(&RGrid) -> Result<PotentialCurve>,
    mass: f64,
    grid: &RGrid,
    count: usize,
    tolerance: f64,
) -> Result<VibrationalLadder> {
    let coarse = vibrational_eigenstates(&curve_fn(grid)?, mass, grid, count)?;
    let fine_grid = grid.refined();
    let fine = vibrational_eigenstates(&curve_fn(&fine_grid)?, mass, &fine_grid, count)?;
    for (v, (a, b)) in coarse.energies.iter().zip(&fine.energies).enumerate() {
        if (a - b).abs() > tolerance {
            return Err(Error::Numerical(format!(
                "level {v} not converged: {a} vs {b} on the refined grid"
            )));
        }
    }
    Ok(coarse)
}

/// Make the first local maximum of |φ| (ignoring the noise floor) positive.
fn fix_sign(phi: &mut [f64]) {
    let peak = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-3 * peak;
    let n = phi.len();
    let mut idx = None;
    for i in 0..n {
        let here = phi[i].abs();
        if here < floor {
            continue;
        }
        let left = if i > 0 { phi[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { phi[i + 1].abs() } else { 0.0 };
        if here >= left && here >= right {
            idx = Some(i);
            break;
        }
    }
    if let Some(i) = idx {
        if phi[i] < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
