use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic 1D lattice `x_j = x_min + j·dx`, `j = 0..n`, with its
/// conjugate momentum lattice `p_k = k·dp`, `k ∈ [-n/2, n/2)`.
///
/// FFT plans are shared behind `Arc`, so cloning a grid is cheap and the
/// grid can be handed to worker threads freely.
#[derive(Clone)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    hbar: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.hbar == other.hbar
    }
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n_points: usize, x_min: f64, x_max: f64, hbar: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "box [{x_min}, {x_max}) has non-positive width"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar must be positive, got {hbar}")));
        }
        if !n_points.is_power_of_two() {
            log::debug!("grid size {n_points} is not a power of two; FFTs will be slower");
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_points,
            x_min,
            x_max,
            hbar,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.width() / self.n_points as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.width()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed momentum index of FFT slot `k`.
    pub fn momentum_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Momentum of FFT slot `k`.
    pub fn p(&self, k: usize) -> f64 {
        self.momentum_index(k) as f64 * self.dp()
    }

    /// Momentum lattice in FFT ordering.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// Number of grid steps in `length`, rejecting lengths that are not an
    /// integer multiple of `dx`.
    pub fn steps_for_length(&self, length: f64) -> Result<i64> {
        let dx = self.dx();
        let steps = length / dx;
        let rounded = steps.round();
        if !steps.is_finite() || (steps - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
            return Err(Error::IncommensurateLength { length, dx });
        }
        Ok(rounded as i64)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: len,
            });
        }
        Ok(())
    }

    /// Unnormalized in-place DFT, `X_k = Σ_j x_j e^{-2πi jk/n}`.
    pub(crate) fn fft_in_place(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Unnormalized in-place inverse DFT.
    pub(crate) fn ifft_in_place(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }

    /// Applies a momentum-diagonal multiplier (FFT ordering) to position
    /// amplitudes.
    pub(crate) fn apply_momentum_diagonal(
        &self,
        amplitudes: &[Complex64],
        multiplier: &[Complex64],
    ) -> Vec<Complex64> {
        let mut work = amplitudes.to_vec();
        self.fft_in_place(&mut work);
        let scale = 1.0 / self.n_points as f64;
        for (w, m) in work.iter_mut().zip(multiplier) {
            *w *= m * scale;
        }
        self.ifft_in_place(&mut work);
        work
    }

    /// Position amplitudes to unitary momentum amplitudes (FFT ordering),
    /// `φ(p_k) = dx/√(2πħ) Σ_j ψ(x_j) e^{-i p_k x_j/ħ}`.
    pub fn to_momentum(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let mut work = amplitudes.to_vec();
        self.fft_in_place(&mut work);
        let scale = self.dx() / (2.0 * PI * self.hbar).sqrt();
        for (k, w) in work.iter_mut().enumerate() {
            let phase = Complex64::from_polar(scale, -self.p(k) * self.x_min / self.hbar);
            *w *= phase;
        }
        work
    }

    /// Inverse of [`Grid::to_momentum`].
    pub fn to_position(&self, momentum: &[Complex64]) -> Vec<Complex64> {
        let scale = self.dp() / (2.0 * PI * self.hbar).sqrt();
        let mut work: Vec<Complex64> = momentum
            .iter()
            .enumerate()
            .map(|(k, &m)| m * Complex64::from_polar(scale, self.p(k) * self.x_min / self.hbar))
            .collect();
        self.ifft_in_place(&mut work);
        work
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_spacings() {
        let g = Grid::new(1024, -50.0, 50.0, 1.0).unwrap();
        assert!((g.dx() - 0.09765625).abs() < 1e-15);
        assert!((g.dp() - 2.0 * PI / 100.0).abs() < 1e-15);
        assert!((g.dp() - 0.06283).abs() < 1e-5);

        let g = Grid::new(8, 0.0, 8.0, 1.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert!((g.dp() - 2.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(7, 0.0, 1.0, 1.0).is_err());
        assert!(Grid::new(6, 0.0, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 1.0, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 0.0, 1.0, 0.0).is_err());
        assert!(Grid::new(8, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn momentum_lattice_span() {
        let g = Grid::new(16, -4.0, 4.0, 1.0).unwrap();
        let p = g.momenta();
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + PI / g.dx()).abs() < 1e-12);
        assert!((hi - (PI / g.dx() - g.dp())).abs() < 1e-12);
    }

    #[test]
    fn steps_for_length_requires_integer_multiples() {
        let g = Grid::new(64, 0.0, 8.0, 1.0).unwrap();
        assert_eq!(g.steps_for_length(1.0).unwrap(), 8);
        assert_eq!(g.steps_for_length(-0.25).unwrap(), -2);
        assert!(g.steps_for_length(0.1).is_err());
    }
}
