//! Potential-energy and dipole curves sampled on the R grid.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RGrid;

/// Morse oscillator `D_e (1 - exp(-a (R - r_e)))² + offset`, atomic units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Morse {
    pub de: f64,
    pub a: f64,
    pub re: f64,
    pub offset: f64,
}

impl Morse {
    pub fn eval(&self, r: f64) -> f64 {
        let y = 1.0 - (-self.a * (r - self.re)).exp();
        self.de * y * y + self.offset
    }

    /// Harmonic frequency `a sqrt(2 D_e / m)`.
    pub fn omega(&self, mass: f64) -> f64 {
        self.a * (2.0 * self.de / mass).sqrt()
    }

    /// Closed-form bound-state energy of level `v` (relative to the same zero
    /// as `eval`).
    pub fn level(&self, mass: f64, v: usize) -> f64 {
        let w = self.omega(mass);
        let x = v as f64 + 0.5;
        self.offset + w * x - w * w / (4.0 * self.de) * x * x
    }

    fn validate(&self) -> Result<()> {
        if !(self.de > 0.0 && self.a > 0.0 && self.re > 0.0) || !self.offset.is_finite() {
            return Err(Error::config(
                "molecule",
                format!("Morse parameters must be positive: {self:?}"),
            ));
        }
        Ok(())
    }
}

/// Where a sampled curve came from.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveSource {
    Morse(Morse),
    Table(PathBuf),
    Constant(f64),
    Inline,
}

impl fmt::Display for CurveSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSource::Morse(m) => write!(
                f,
                "morse(de={}, a={}, re={}, offset={})",
                m.de, m.a, m.re, m.offset
            ),
            CurveSource::Table(p) => write!(f, "table({})", p.display()),
            CurveSource::Constant(v) => write!(f, "constant({v})"),
            CurveSource::Inline => f.write_str("inline"),
        }
    }
}

/// Real function of R sampled on the grid (potential in hartree, or a dipole
/// in atomic units).
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialCurve {
    pub values: Vec<f64>,
    pub source: CurveSource,
}

impl PotentialCurve {
    pub fn from_fn(grid: &RGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.points().iter().map(|&r| f(r)).collect(),
            source: CurveSource::Inline,
        }
    }

    pub fn constant(grid: &RGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            source: CurveSource::Constant(value),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
            .0
    }

    /// Linear interpolation between grid samples.
    pub fn interpolate(&self, grid: &RGrid, r: f64) -> f64 {
        let x = (r - grid.min) / grid.spacing();
        let n = self.values.len();
        if x <= 0.0 {
            return self.values[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= n {
            return self.values[n - 1];
        }
        let t = x - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

pub fn morse_curve(params: Morse, grid: &RGrid) -> Result<PotentialCurve> {
    params.validate()?;
    Ok(PotentialCurve {
        values: grid.points().iter().map(|&r| params.eval(r)).collect(),
        source: CurveSource::Morse(params),
    })
}

/// Boundary condition of the interpolating cubic spline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SplineBoundary {
    /// Zero second derivative at both ends.
    Natural,
    /// Continuous third derivative at the second and penultimate knots;
    /// reproduces cubic polynomials exactly.
    #[default]
    NotAKnot,
}

/// Interpolating cubic spline through strictly increasing knots.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64], boundary: SplineBoundary) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Table("abscissa and ordinate lengths differ".into()));
        }
        if n < 4 {
            return Err(Error::Table(format!("need at least 4 samples, got {n}")));
        }
        if let Some(w) = x.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Table(format!(
                "abscissae must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        // tridiagonal system sub[i] m[i-1] + diag[i] m[i] + sup[i] m[i+1] = rhs[i]
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let m = match boundary {
            SplineBoundary::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
                solve_tridiagonal(&sub, &diag, &sup, &rhs)
            }
            SplineBoundary::NotAKnot => {
                // third derivative continuous at x[1] and x[n-2]:
                // m0 = ((h0+h1) m1 - h0 m2) / h1, substituted into row 1,
                // and the mirror image at the right end
                let (h0, h1) = (h[0], h[1]);
                diag[1] += h0 * (h0 + h1) / h1;
                sup[1] -= h0 * h0 / h1;
                let (ha, hb) = (h[n - 3], h[n - 2]);
                diag[n - 2] += hb * (ha + hb) / ha;
                sub[n - 2] -= hb * hb / ha;
                let inner = 1..n - 1;
                let mut sub_i = sub[inner.clone()].to_vec();
                let mut sup_i = sup[inner.clone()].to_vec();
                sub_i[0] = 0.0;
                *sup_i.last_mut().unwrap() = 0.0;
                let mid = solve_tridiagonal(&sub_i, &diag[inner.clone()], &sup_i, &rhs[inner]);
                let mut m = vec![0.0; n];
                m[1..n - 1].copy_from_slice(&mid);
                m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
                m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;
                m
            }
        };
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= r) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - r) / h;
        let b = (r - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Parse the two-column text format: `R value` per line, `#` comments.
pub fn parse_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::Table(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Table(format!("line {}: `{s}`: {e}", lineno + 1)))
        };
        xs.push(parse(cols[0])?);
        ys.push(parse(cols[1])?);
    }
    Ok((xs, ys))
}

/// Spline-interpolate tabulated samples onto the grid.
pub fn tabulated_curve(text: &str, grid: &RGrid) -> Result<PotentialCurve> {
    let (xs, ys) = parse_table(text)?;
    let spline = CubicSpline::new(&xs, &ys, SplineBoundary::default())?;
    let lo = xs[0];
    let hi = *xs.last().unwrap();
    let last = *grid.points().last().unwrap();
    let tol = 1e-9 * (1.0 + grid.max.abs());
    if lo > grid.min + tol || hi < last - tol {
        return Err(Error::Table(format!(
            "samples cover [{lo}, {hi}] but the grid spans [{}, {last}]",
            grid.min
        )));
    }
    Ok(PotentialCurve {
        values: grid.points().iter().map(|&r| spline.eval(r)).collect(),
        source: CurveSource::Inline,
    })
}

pub fn tabulated_curve_file(path: &Path, grid: &RGrid) -> Result<PotentialCurve> {
    let text = std::fs::read_to_string(path)?;
    let mut curve = tabulated_curve(&text, grid)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    curve.source = CurveSource::Table(path.to_path_buf());
    Ok(curve)
}
