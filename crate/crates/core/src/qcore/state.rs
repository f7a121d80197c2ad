use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Complex amplitudes on a [`Grid`], in units of 1/√length.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        grid.check_len(amplitudes.len())?;
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::param("amplitudes", "non-finite amplitude"));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = grid.positions().into_iter().map(f).collect();
        Self::new(grid.clone(), amps)
    }

    /// Builds a state from unitary momentum amplitudes (FFT ordering).
    pub fn from_momentum(grid: &Grid, momentum: &[Complex64]) -> Result<Self> {
        grid.check_len(momentum.len())?;
        Self::new(grid.clone(), grid.to_position(momentum))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self {
            grid: self.grid.clone(),
            amplitudes,
        }
    }

    /// `Σ|ψ|²·dx`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq() == 0.0
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.with_amplitudes(self.amplitudes.iter().map(|a| a * c).collect())
    }

    /// `⟨self|other⟩ = Σ conj(self)·other·dx`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(inner_raw(&self.amplitudes, &other.amplitudes) * self.grid.dx())
    }

    /// Position probability density `|ψ(x)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Unitary momentum amplitudes in FFT ordering.
    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        self.grid.to_momentum(&self.amplitudes)
    }

    /// Momentum probability density `|φ(p)|²` in FFT ordering.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.momentum_amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }

    /// Norm-weighted position mean and standard deviation.
    pub fn position_moments(&self) -> Result<(f64, f64)> {
        let n2 = self.norm_sq();
        if n2 == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let dx = self.grid.dx();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (j, a) in self.amplitudes.iter().enumerate() {
            let x = self.grid.x(j);
            let w = a.norm_sqr() * dx;
            m1 += w * x;
            m2 += w * x * x;
        }
        let mean = m1 / n2;
        Ok((mean, (m2 / n2 - mean * mean).max(0.0).sqrt()))
    }

    /// Norm-weighted momentum mean and standard deviation.
    pub fn momentum_moments(&self) -> Result<(f64, f64)> {
        let dens = self.momentum_density();
        let dp = self.grid.dp();
        let total: f64 = dens.iter().sum::<f64>() * dp;
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for (k, d) in dens.iter().enumerate() {
            let p = self.grid.p(k);
            m1 += d * dp * p;
            m2 += d * dp * p * p;
        }
        let mean = m1 / total;
        Ok((mean, (m2 / total - mean * mean).max(0.0).sqrt()))
    }

    /// Writes `x,re,im` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (j, a) in self.amplitudes.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.grid.x(j)),
                fmt_f64(a.re),
                fmt_f64(a.im)
            )?;
        }
        Ok(())
    }

    /// Reads a state written by [`WaveFunction::write_csv`]. The grid is
    /// reconstructed from the `x` column, which must be uniform.
    pub fn read_csv<R: BufRead>(input: R, hbar: f64) -> Result<Self> {
        let mut xs = Vec::new();
        let mut amps = Vec::new();
        for (line_no, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('x')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!(
                    "state CSV line {}: expected 3 fields, got {}",
                    line_no + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| {
                    Error::Config(format!("state CSV line {}: {e}", line_no + 1))
                })
            };
            xs.push(parse(fields[0])?);
            amps.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
        }
        if xs.len() < 2 {
            return Err(Error::Config("state CSV has fewer than two rows".into()));
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (j, x) in xs.iter().enumerate() {
            if (x - (xs[0] + j as f64 * dx)).abs() > 1e-9 * dx.abs().max(1.0) {
                return Err(Error::Config(format!("state CSV x column is not uniform at row {j}")));
            }
        }
        let grid = Grid::new(xs.len(), xs[0], xs[0] + xs.len() as f64 * dx, hbar)?;
        Self::new(grid, amps)
    }
}

pub(crate) fn inner_raw(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Packet envelope shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(-(x-c)²/4σ²)`; `σ` is the position standard deviation.
    Gaussian { sigma: f64 },
    /// `exp(-1/(1-u²))` for `|u| < 1`, `u = (x-c)/half_width`; exactly zero
    /// outside `(c - half_width, c + half_width)`.
    Bump { half_width: f64 },
}

impl Envelope {
    /// Characteristic width used for spacing rules (σ for Gaussians,
    /// half-width for bumps).
    pub fn width(&self) -> f64 {
        match *self {
            Envelope::Gaussian { sigma } => sigma,
            Envelope::Bump { half_width } => half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let w = self.width();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::param("envelope", format!("width must be positive, got {w}")));
        }
        Ok(())
    }

    /// Unnormalized real envelope value at offset `u = x - center`.
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Envelope::Gaussian { sigma } => (-u * u / (4.0 * sigma * sigma)).exp(),
            Envelope::Bump { half_width } => {
                let s = u / half_width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s * s)).exp()
                }
            }
        }
    }

    /// Builds a normalized packet `envelope(x-center)·e^{i·momentum·x/ħ}·e^{i·phase}`.
    pub fn packet(&self, grid: &Grid, center: f64, momentum: f64, phase: f64) -> Result<WaveFunction> {
        self.validate()?;
        if !(center.is_finite() && momentum.is_finite() && phase.is_finite()) {
            return Err(Error::param("packet", "non-finite center, momentum or phase"));
        }
        if center < grid.x_min() || center >= grid.x_max() {
            return Err(Error::param(
                "center",
                format!("{center} outside box [{}, {})", grid.x_min(), grid.x_max()),
            ));
        }
        let leak = self.edge_leakage(grid, center);
        if leak > 1e-12 {
            log::warn!(
                "packet at {center} leaks {leak:.2e} of its norm past the box edges; \
                 periodic wrap-around will contaminate results"
            );
        }
        let hbar = grid.hbar();
        let psi = WaveFunction::from_fn(grid, |x| {
            Complex64::from_polar(self.value(x - center), momentum * x / hbar + phase)
        })?;
        psi.normalized()
    }

    /// Fraction of the continuum norm lying beyond the box edges.
    pub fn edge_leakage(&self, grid: &Grid, center: f64) -> f64 {
        let left = center - grid.x_min();
        let right = grid.x_max() - center;
        match *self {
            Envelope::Gaussian { sigma } => {
                let t = |d: f64| 0.5 * erfc(d / (2.0f64.sqrt() * sigma));
                t(left) + t(right)
            }
            Envelope::Bump { half_width } => {
                if left.min(right) >= half_width {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Normalized Gaussian packet with position spread `sigma`.
pub fn gaussian_packet(
    grid: &Grid,
    center: f64,
    sigma: f64,
    momentum: f64,
    phase: f64,
) -> Result<WaveFunction> {
    Envelope::Gaussian { sigma }.packet(grid, center, momentum, phase)
}

/// Normalized compact-support bump packet.
pub fn bump_packet(
    grid: &Grid,
    center: f64,
    half_width: f64,
    momentum: f64,
    phase: f64,
) -> Result<WaveFunction> {
    Envelope::Bump { half_width }.packet(grid, center, momentum, phase)
}

/// `c1·ψ1 + c2·ψ2`, optionally renormalized.
///
/// An unnormalized zero result is returned as-is (check
/// [`WaveFunction::is_zero`]); requesting normalization of a zero result is
/// an error.
pub fn superpose(
    c1: Complex64,
    psi1: &WaveFunction,
    c2: Complex64,
    psi2: &WaveFunction,
    normalize: bool,
) -> Result<WaveFunction> {
    if psi1.grid != psi2.grid {
        return Err(Error::GridMismatch);
    }
    let amps = psi1
        .amplitudes
        .iter()
        .zip(&psi2.amplitudes)
        .map(|(a, b)| c1 * a + c2 * b)
        .collect();
    let out = psi1.with_amplitudes(amps);
    if out.is_zero() {
        log::warn!("superposition cancelled to the zero vector");
    }
    if normalize {
        out.normalized()
    } else {
        Ok(out)
    }
}

/// Analytic position spread of a Gaussian packet after free evolution for
/// time `t`.
pub fn free_gaussian_width(sigma: f64, t: f64, mass: f64, hbar: f64) -> f64 {
    let tau = hbar * t / (2.0 * mass * sigma * sigma);
    sigma * (1.0 + tau * tau).sqrt()
}
