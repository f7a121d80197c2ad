//! Two-state vectors, weak values, two-time densities and the weak-measurement
//! ensemble of the pre/post-selected double-slit experiment.

mod ensemble;
mod experiment;
mod pointer;

pub use ensemble::{
    default_windows, estimate_fringe_shift, fringe_spacing, run_ensemble, EnsembleConfig, EnsembleResult,
    FringeEstimate, WindowStats,
};
pub use experiment::{build_experiment, Experiment, ExperimentSpec};
pub use pointer::{pointer_distribution, PointerDistribution, PointerModel};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::state::inner_raw;
use crate::qcore::{Grid, LinearOperator, WaveFunction};

pub const MIN_OVERLAP: f64 = 1e-12;

/// Pre-selected state `|pre⟩` with post-selected `⟨post|`.
#[derive(Debug, Clone)]
pub struct TwoStateVector {
    pre: WaveFunction,
    post: WaveFunction,
    overlap: Complex64,
}

impl TwoStateVector {
    /// Both states are normalized; `|⟨post|pre⟩|` must exceed [`MIN_OVERLAP`].
    pub fn new(pre: &WaveFunction, post: &WaveFunction) -> Result<Self> {
        if pre.grid() != post.grid() {
            return Err(Error::GridMismatch);
        }
        let pre = pre.normalized()?;
        let post = post.normalized()?;
        let overlap = post.inner(&pre)?;
        if overlap.norm() <= MIN_OVERLAP {
            return Err(Error::VanishingOverlap { overlap: overlap.norm() });
        }
        Ok(Self { pre, post, overlap })
    }

    pub fn pre(&self) -> &WaveFunction {
        &self.pre
    }

    pub fn post(&self) -> &WaveFunction {
        &self.post
    }

    pub fn grid(&self) -> &Grid {
        self.pre.grid()
    }

    /// `⟨post|pre⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    /// Post-selection probability `|⟨post|pre⟩|²`.
    pub fn post_selection_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }

    /// `⟨post|Π|pre⟩` for the window projector.
    pub fn window_element(&self, window: &Window) -> Complex64 {
        let (lo, hi) = (window.lo, window.hi);
        inner_raw(&self.post.amplitudes()[lo..hi], &self.pre.amplitudes()[lo..hi]) * self.grid().dx()
    }
}

/// `⟨post|A|pre⟩ / ⟨post|pre⟩`.
pub fn weak_value(tsv: &TwoStateVector, a: &LinearOperator) -> Result<Complex64> {
    let image = a.apply_to(&tsv.pre)?;
    Ok(tsv.post.inner(&image)? / tsv.overlap)
}

/// `ρ(x) = ⟨x|pre⟩⟨post|x⟩ / ⟨post|pre⟩`, so that `ρ(x_j)·dx` is the weak
/// value of the projector onto cell `j`.
pub fn two_time_density(tsv: &TwoStateVector) -> Vec<Complex64> {
    tsv.pre
        .amplitudes()
        .iter()
        .zip(tsv.post.amplitudes())
        .map(|(a, b)| a * b.conj() / tsv.overlap)
        .collect()
}

/// Position window `Π` covering grid indices `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn new(grid: &Grid, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > grid.n_points() {
            return Err(Error::param(
                "window",
                format!("index range {lo}..{hi} invalid for {} points", grid.n_points()),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    /// Mean of the grid positions inside the window.
    pub fn center(&self, grid: &Grid) -> f64 {
        grid.x(self.lo) + 0.5 * (self.len() - 1) as f64 * grid.dx()
    }

    pub fn width(&self, grid: &Grid) -> f64 {
        self.len() as f64 * grid.dx()
    }

    pub fn projector(&self, grid: &Grid) -> LinearOperator {
        let values = (0..grid.n_points())
            .map(|j| {
                if (self.lo..self.hi).contains(&j) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        LinearOperator::diag_position_values(values)
    }
}
