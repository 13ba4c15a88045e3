//! Adiabatic curves of the one-excitation manifold
//! {|G,A3,0⟩, |G,A2,1⟩, |E,A2,0⟩} and their avoided crossings.

use faer::{Mat, Side};

use crate::config::Composition;
use crate::error::{Error, Result};
use crate::system::HamiltonianModel;

pub type Matrix3 = [[f64; 3]; 3];

/// Diabatic labels in matrix order.
pub const DIABATIC_LABELS: [&str; 3] = ["G_A3_0", "G_A2_1", "E_A2_0"];

/// Potential matrix of the manifold at one R.
pub fn one_excitation_matrix(
    v_x: f64,
    v_a: f64,
    dipole: f64,
    levels: [f64; 3],
    d23: f64,
    omega_c: f64,
    g: f64,
) -> Matrix3 {
    let (a2, a3) = (levels[1], levels[2]);
    [
        [v_x + a3, g * d23, 0.0],
        [g * d23, v_x + a2 + omega_c, g * dipole],
        [0.0, g * dipole, v_a + a2],
    ]
}

/// Ascending eigenvalues and squared eigenvector components
/// (`composition[k][j]`: weight of diabat j in branch k).
pub fn diagonalize(m: &Matrix3) -> ([f64; 3], Matrix3) {
    if m[0][1] == 0.0 && m[0][2] == 0.0 && m[1][2] == 0.0 {
        // uncoupled: the diabats themselves, bit for bit
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
        let mut e = [0.0; 3];
        let mut c = [[0.0; 3]; 3];
        for (k, &j) in order.iter().enumerate() {
            e[k] = m[j][j];
            c[k][j] = 1.0;
        }
        return (e, c);
    }
    let a = Mat::<f64>::from_fn(3, 3, |i, j| m[i][j]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .expect("3x3 symmetric eigenproblem");
    let (s, u) = (evd.S(), evd.U());
    let mut e = [0.0; 3];
    let mut c = [[0.0; 3]; 3];
    for k in 0..3 {
        e[k] = s[k];
        let norm: f64 = (0..3).map(|j| u[(j, k)] * u[(j, k)]).sum();
        for j in 0..3 {
            c[k][j] = u[(j, k)] * u[(j, k)] / norm;
        }
    }
    (e, c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolaritonCurves {
    pub r: Vec<f64>,
    pub matrices: Vec<Matrix3>,
    /// lower, middle, upper
    pub energies: Vec<[f64; 3]>,
    pub compositions: Vec<Matrix3>,
}

impl PolaritonCurves {
    pub fn from_matrices(r: Vec<f64>, matrices: Vec<Matrix3>) -> Self {
        let (energies, compositions) = matrices.iter().map(diagonalize).unzip();
        Self {
            r,
            matrices,
            energies,
            compositions,
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Matrix linearly interpolated between grid points.
    pub fn matrix_at(&self, r: f64) -> Matrix3 {
        let n = self.r.len();
        let i = match self.r.partition_point(|&x| x <= r) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let f = (r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        let (a, b) = (&self.matrices[i], &self.matrices[i + 1]);
        let mut m = [[0.0; 3]; 3];
        for (j, row) in m.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = a[j][k] + f * (b[j][k] - a[j][k]);
            }
        }
        m
    }
}

pub fn polariton_surfaces(model: &HamiltonianModel) -> Result<PolaritonCurves> {
    let atom = match (model.composition, model.atom) {
        (Composition::AtomMoleculeCavity, Some(a)) => a,
        _ => {
            return Err(Error::config(
                "composition",
                "polariton surfaces need the atom-molecule-cavity composition",
            ))
        }
    };
    let matrices = (0..model.grid.len())
        .map(|i| {
            one_excitation_matrix(
                model.ground_curve.values[i],
                model.excited_curve.values[i],
                model.dipole_curve.values[i],
                atom.levels,
                atom.d23,
                model.cavity.omega_c,
                model.cavity.g,
            )
        })
        .collect();
    Ok(PolaritonCurves::from_matrices(model.grid.points().to_vec(), matrices))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AvoidedCrossing {
    pub r_star: f64,
    pub gap: f64,
    /// adjacent branch indices (0 = lower)
    pub branches: (usize, usize),
    pub composition_lower: [f64; 3],
    pub composition_upper: [f64; 3],
}

fn gap_at(curves: &PolaritonCurves, r: f64, k: usize) -> f64 {
    let (e, _) = diagonalize(&curves.matrix_at(r));
    e[k + 1] - e[k]
}

/// Interior local minima of each adjacent-branch gap. The grid minimum is
/// moved to the vertex of the parabola through its neighbours and then
/// polished by golden-section search on the interpolated matrix.
pub fn locate_avoided_crossings(curves: &PolaritonCurves) -> Vec<AvoidedCrossing> {
    let n = curves.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for k in 0..2 {
        let gap: Vec<f64> = curves.energies.iter().map(|e| e[k + 1] - e[k]).collect();
        for i in 1..n - 1 {
            if !(gap[i] < gap[i - 1] && gap[i] <= gap[i + 1]) {
                continue;
            }
            let (x0, x1, x2) = (curves.r[i - 1], curves.r[i], curves.r[i + 1]);
            let (y0, y1, y2) = (gap[i - 1], gap[i], gap[i + 1]);
            let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
            let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
            let guess = if den != 0.0 { x1 - 0.5 * num / den } else { x1 };
            let r_star = golden_min(|r| gap_at(curves, r, k), x0, x2, guess.clamp(x0, x2));
            let (e, c) = diagonalize(&curves.matrix_at(r_star));
            out.push(AvoidedCrossing {
                r_star,
                gap: e[k + 1] - e[k],
                branches: (k, k + 1),
                composition_lower: c[k],
                composition_upper: c[k + 1],
            });
        }
    }
    out
}

/// Minimum of a unimodal function on `[a, b]`; `hint` is returned when it
/// beats the bracketed search.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, hint: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let best = 0.5 * (a + b);
    if f(hint) < f(best) {
        hint
    } else {
        best
    }
}
