use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{two_time_density, TwoStateVector};
use crate::error::{Error, Result};
use crate::qcore::{evolve_free, superpose, Envelope, Grid, WaveFunction};

pub const BRANCH_OVERLAP_TOL: f64 = 1e-10;
const MIN_FRINGES: f64 = 10.0;

/// Two identical packets at `∓L/2` moving toward each other with momenta
/// `±p₀`, the right one carrying the relative phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub envelope: Envelope,
    pub length: f64,
    pub p0: f64,
    pub phi: f64,
    pub mass: f64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub hbar: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            envelope: Envelope::Gaussian { sigma: 2.0 },
            length: 20.0,
            p0: std::f64::consts::FRAC_PI_2,
            phi: 1.0,
            mass: 1.0,
            n_points: 1024,
            x_min: -32.0,
            x_max: 32.0,
            hbar: 1.0,
        }
    }
}

impl ExperimentSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_points, self.x_min, self.x_max, self.hbar)
    }

    /// `T = mL/(2p₀)`.
    pub fn meeting_time(&self) -> f64 {
        self.mass * self.length / (2.0 * self.p0)
    }

    /// Fringe period `πħ/p₀`.
    pub fn fringe_period(&self) -> f64 {
        std::f64::consts::PI * self.hbar / self.p0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("L", self.length), ("p0", self.p0), ("mass", self.mass), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::param("phi", "must be finite"));
        }
        let w = self.envelope.width();
        let limit = match self.envelope {
            Envelope::Gaussian { .. } => self.length / 5.0,
            Envelope::Bump { .. } => self.length / 2.0,
        };
        if !(w > 0.0 && w <= limit) {
            return Err(Error::param(
                "sigma",
                format!("envelope width {w} must be in (0, {limit}] for disjoint branches"),
            ));
        }
        if self.p0 * self.length / self.hbar < MIN_FRINGES {
            return Err(Error::param(
                "p0",
                format!("p0·L/ħ = {} leaves too few fringes (< {MIN_FRINGES})", self.p0 * self.length / self.hbar),
            ));
        }
        Ok(())
    }
}

/// Built experiment: states at `t = 0` and at the meeting time `T`.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub grid: Grid,
    pub left: WaveFunction,
    pub right: WaveFunction,
    pub pre: WaveFunction,
    pub post: WaveFunction,
    pub meeting_time: f64,
    pub pre_at_t: WaveFunction,
    pub post_at_t: WaveFunction,
    /// `|⟨left|right⟩|` of the unit branches.
    pub branch_overlap: f64,
    /// `∫|left||right| dx`, the overlap of the two humps.
    pub hump_overlap: f64,
}

pub fn build_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    spec.validate()?;
    let grid = spec.grid()?;
    let half = spec.length / 2.0;
    let left = spec.envelope.packet(&grid, -half, spec.p0, 0.0)?;
    let right = spec.envelope.packet(&grid, half, -spec.p0, spec.phi)?;
    let branch_overlap = left.inner(&right)?.norm();
    if branch_overlap >= BRANCH_OVERLAP_TOL {
        return Err(Error::BranchesOverlap { overlap: branch_overlap });
    }
    let hump_overlap = left
        .amplitudes()
        .iter()
        .zip(right.amplitudes())
        .map(|(a, b)| a.norm() * b.norm())
        .sum::<f64>()
        * grid.dx();
    let one = Complex64::new(1.0, 0.0);
    let pre = superpose(one, &left, one, &right, true)?;
    let post = left.clone();
    let t = spec.meeting_time();
    let pre_at_t = evolve_free(&pre, spec.mass, t)?;
    let post_at_t = evolve_free(&post, spec.mass, t)?;
    Ok(Experiment {
        spec: *spec,
        grid,
        left,
        right,
        pre,
        post,
        meeting_time: t,
        pre_at_t,
        post_at_t,
        branch_overlap,
        hump_overlap,
    })
}

impl Experiment {
    /// Two-state vector at the meeting time.
    pub fn two_state(&self) -> Result<TwoStateVector> {
        TwoStateVector::new(&self.pre_at_t, &self.post_at_t)
    }

    pub fn density_at_t(&self) -> Vec<f64> {
        self.pre_at_t.density()
    }

    pub fn two_time_density_at_t(&self) -> Result<Vec<Complex64>> {
        Ok(two_time_density(&self.two_state()?))
    }

    /// Fringe-free envelope `|Ψ₂(x, T)|²` of a unit branch at `T`.
    pub fn envelope_at_t(&self) -> Vec<f64> {
        self.post_at_t.density()
    }

    /// `2|Ψ₂(x,T)|²cos²(p₀x/ħ − φ/2)`.
    pub fn predicted_density(&self) -> Vec<f64> {
        let s = &self.spec;
        self.grid
            .positions()
            .iter()
            .zip(self.envelope_at_t())
            .map(|(&x, e)| 2.0 * e * (s.p0 * x / s.hbar - s.phi / 2.0).cos().powi(2))
            .collect()
    }

    /// Position spread of a branch at `T`.
    pub fn sigma_at_t(&self) -> Result<f64> {
        Ok(self.post_at_t.position_moments()?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_setup() {
        let e = build_experiment(&ExperimentSpec::default()).unwrap();
        assert!(e.branch_overlap < 1e-10);
        let tsv = e.two_state().unwrap();
        assert!((tsv.post_selection_probability() - 0.5).abs() < 1e-6);
        // density at T: the two branches share an envelope exactly by symmetry
        let rho = e.density_at_t();
        let want = e.predicted_density();
        let peak = want.iter().cloned().fold(0.0, f64::max);
        let err = rho.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3 * peak, "{err}");
        // Re of the two-time density traces the same fringes
        let rtt = e.two_time_density_at_t().unwrap();
        let err = rtt.iter().zip(&want).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3 * peak, "{err}");
        let total: Complex64 = rtt.iter().sum::<Complex64>() * e.grid.dx();
        assert!((total - 1.0).norm() < 1e-10);
    }

    #[test]
    fn rejects_wide_packets() {
        let spec = ExperimentSpec {
            envelope: Envelope::Gaussian { sigma: 5.0 },
            ..ExperimentSpec::default()
        };
        assert!(build_experiment(&spec).is_err());
        let spec = ExperimentSpec {
            p0: 0.1,
            ..ExperimentSpec::default()
        };
        assert!(build_experiment(&spec).is_err());
    }
}
