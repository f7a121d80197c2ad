//! Modular momentum: harmonics `⟨e^{inpL/ħ}⟩`, folded momentum
//! distributions, the complete-uncertainty test, the nonlocal equation of
//! motion of `e^{ipL/ħ}` and its classical (Poisson-bracket) counterpart.
//!
//! The modular period used throughout is `h/L = 2πħ/L`, the period of
//! `e^{ipL/ħ}` in `p`.

mod classical;
mod dynamics;
mod polynomial;

pub use classical::{classical_modular_drift, ClassicalDrift, ClassicalEnsemble};
pub use dynamics::{eom_residual, modular_rate, modular_trace, EomResidual, ModularTracePoint};
pub use polynomial::{moment_operator_apply, polynomial_phase_insensitivity, Ordering, PhaseInsensitivity};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::operator::cyclic_shift;
use crate::qcore::state::inner_raw;
use crate::qcore::{Grid, LinearOperator, WaveFunction};

/// Slit separation `L` on a given grid.
///
/// `L` is an exact multiple of `dx` and the box holds a whole number of
/// periods `L`, so the momentum lattice folds evenly onto `[0, 2πħ/L)`.
/// Any momentum decomposes as `p = p_mod + N·(2πħ/L)` with integer `N`.
#[derive(Debug, Clone)]
pub struct ModularSpec {
    grid: Grid,
    length: f64,
    steps: i64,
    cells: usize,
}

impl ModularSpec {
    pub fn new(grid: &Grid, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::param("L", format!("must be positive, got {length}")));
        }
        let steps = grid.steps_for_length(length)?;
        let n = grid.n_points() as i64;
        if n % steps != 0 {
            return Err(Error::IncommensurateBinning(format!(
                "box width {} is not an integer multiple of L = {length}",
                grid.width()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            length,
            steps,
            cells: (n / steps) as usize,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid steps in `L`.
    pub fn steps(&self) -> i64 {
        self.steps
    }

    /// Modular period `2πħ/L`.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.grid.hbar() / self.length
    }

    /// Momentum lattice points per modular period (= box width / L).
    pub fn residues(&self) -> usize {
        self.cells
    }

    /// `e^{inpL/ħ}` as an exact shift operator.
    pub fn operator(&self, n: i64) -> LinearOperator {
        LinearOperator::shift(&self.grid, n * self.steps)
    }
}

fn check_grid(psi: &WaveFunction, spec: &ModularSpec) -> Result<()> {
    if psi.grid() != &spec.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `⟨e^{inpL/ħ}⟩` via an exact cyclic shift by `n·k` grid steps.
pub fn mod_expect(psi: &WaveFunction, spec: &ModularSpec, n: i64) -> Result<Complex64> {
    check_grid(psi, spec)?;
    let n2 = psi.norm_sq();
    if n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let total = n * spec.steps;
    let np = spec.grid.n_points() as i64;
    if total.abs() >= np {
        log::warn!("harmonic n = {n} shifts by {total} steps, wrapping the periodic box of {np} points");
    }
    let shifted = cyclic_shift(psi.amplitudes(), total);
    Ok(inner_raw(psi.amplitudes(), &shifted) * spec.grid.dx() / n2)
}

/// Momentum probability folded onto the modular period.
#[derive(Debug, Clone, Serialize)]
pub struct FoldedDistribution {
    pub period: f64,
    /// `n_bins + 1` edges over `[0, period]`.
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    /// Mass per lattice residue `p_mod = r·dp`, `r = 0..residues`.
    pub residue_masses: Vec<f64>,
}

impl FoldedDistribution {
    pub fn n_bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `a_n = Σ_r mass_r·e^{inΦ_r}` with `Φ_r = 2π r / residues`, the
    /// Fourier coefficient that equals `⟨e^{inpL/ħ}⟩`.
    pub fn fourier_coefficient(&self, n: i64) -> Complex64 {
        let k = self.residue_masses.len() as f64;
        self.residue_masses
            .iter()
            .enumerate()
            .map(|(r, m)| Complex64::from_polar(*m, 2.0 * PI * (n as f64) * (r as f64) / k))
            .sum()
    }

    /// Largest `|mass − 1/n_bins|`.
    pub fn max_uniform_deviation(&self) -> f64 {
        let u = 1.0 / self.n_bins() as f64;
        self.masses.iter().map(|m| (m - u).abs()).fold(0.0, f64::max)
    }
}

pub fn folded_distribution(psi: &WaveFunction, spec: &ModularSpec, n_bins: usize) -> Result<FoldedDistribution> {
    check_grid(psi, spec)?;
    let k = spec.residues();
    if n_bins == 0 || k % n_bins != 0 {
        return Err(Error::IncommensurateBinning(format!(
            "{n_bins} bins do not divide the {k} lattice momenta per period"
        )));
    }
    let grid = &spec.grid;
    let dens = psi.momentum_density();
    let dp = grid.dp();
    let mut residue = vec![0.0; k];
    for (slot, d) in dens.iter().enumerate() {
        let r = grid.momentum_index(slot).rem_euclid(k as i64) as usize;
        residue[r] += d * dp;
    }
    let total: f64 = residue.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    for m in residue.iter_mut() {
        *m /= total;
    }
    let per_bin = k / n_bins;
    let masses = residue.chunks(per_bin).map(|c| c.iter().sum()).collect();
    let period = spec.period();
    let edges = (0..=n_bins).map(|b| period * b as f64 / n_bins as f64).collect();
    Ok(FoldedDistribution {
        period,
        edges,
        masses,
        residue_masses: residue,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Harmonic {
    pub n: i64,
    pub value: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompleteUncertaintyReport {
    pub harmonics: Vec<Harmonic>,
    pub max_magnitude: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `|⟨e^{inpL/ħ}⟩| < tol` for `n = 1..=n_max`.
pub fn complete_uncertainty_check(
    psi: &WaveFunction,
    spec: &ModularSpec,
    n_max: i64,
    tol: f64,
) -> Result<CompleteUncertaintyReport> {
    if n_max < 1 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    if n_max >= spec.residues() as i64 {
        return Err(Error::param(
            "n_max",
            format!(
                "harmonic {} of a box holding {} periods is the identity; widen the box",
                spec.residues(),
                spec.residues()
            ),
        ));
    }
    let harmonics = (1..=n_max)
        .map(|n| mod_expect(psi, spec, n).map(|value| Harmonic { n, value }))
        .collect::<Result<Vec<_>>>()?;
    let max_magnitude = harmonics.iter().map(|h| h.value.norm()).fold(0.0, f64::max);
    Ok(CompleteUncertaintyReport {
        harmonics,
        max_magnitude,
        tol,
        passed: max_magnitude < tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SpreadBound {
    Evaluated {
        delta_p: f64,
        bound: f64,
        satisfied: bool,
    },
    /// The folded distribution is not uniform, so the bound does not apply.
    PremiseNotMet { max_deviation: f64 },
}

pub const SPREAD_PREMISE_TOL: f64 = 1e-6;

/// `Δp ≥ ħ/L` for states whose modular momentum is completely uncertain.
pub fn spread_bound_check(psi: &WaveFunction, spec: &ModularSpec) -> Result<SpreadBound> {
    let folded = folded_distribution(psi, spec, spec.residues())?;
    let dev = folded.max_uniform_deviation();
    if dev >= SPREAD_PREMISE_TOL {
        return Ok(SpreadBound::PremiseNotMet { max_deviation: dev });
    }
    let (_, delta_p) = psi.momentum_moments()?;
    let bound = spec.grid.hbar() / spec.length;
    Ok(SpreadBound::Evaluated {
        delta_p,
        bound,
        satisfied: delta_p >= bound,
    })
}
