use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::state::inner_raw;
use crate::qcore::{evolve_free, superpose, Envelope, Grid, LinearOperator, WaveFunction};

/// Operator ordering for `x^m p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Fully symmetrized: `2^{-m} Σ_k C(m,k) x^k p^n x^{m-k}`.
    Weyl,
    /// The literal product `x^m p^n` (not Hermitian in general).
    Literal,
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn x_pow(grid: &Grid, v: &[Complex64], power: u32) -> Vec<Complex64> {
    if power == 0 {
        return v.to_vec();
    }
    v.iter()
        .enumerate()
        .map(|(j, a)| a * grid.x(j).powi(power as i32))
        .collect()
}

fn p_pow(grid: &Grid, v: &[Complex64], power: u32) -> Vec<Complex64> {
    if power == 0 {
        return v.to_vec();
    }
    LinearOperator::diag_momentum(grid, |p| Complex64::new(p.powi(power as i32), 0.0)).apply(v)
}

/// Applies the ordered monomial `x^m p^n` to raw amplitudes.
pub fn moment_operator_apply(grid: &Grid, v: &[Complex64], m: u32, n: u32, ordering: Ordering) -> Vec<Complex64> {
    match ordering {
        Ordering::Literal => x_pow(grid, &p_pow(grid, v, n), m),
        Ordering::Weyl => {
            let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
            let norm = 0.5f64.powi(m as i32);
            for k in 0..=m {
                let term = x_pow(grid, &p_pow(grid, &x_pow(grid, v, m - k), n), k);
                let c = binomial(m, k) * norm;
                for (o, t) in out.iter_mut().zip(term) {
                    *o += c * t;
                }
            }
            out
        }
    }
}

fn moment(psi: &WaveFunction, m: u32, n: u32, ordering: Ordering) -> Complex64 {
    let image = moment_operator_apply(psi.grid(), psi.amplitudes(), m, n, ordering);
    inner_raw(psi.amplitudes(), &image) / inner_raw(psi.amplitudes(), psi.amplitudes())
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseInsensitivity {
    pub max_deviation: f64,
    /// `|⟨ψ₁(t)|ψ₂(t)⟩|` of the unit-norm branches.
    pub branch_overlap: f64,
    /// `(φa, φb, ⟨x^m p^n⟩_φa, ⟨x^m p^n⟩_φb)` per pair.
    pub pairs: Vec<(f64, f64, Complex64, Complex64)>,
}

pub const BRANCH_OVERLAP_TOL: f64 = 1e-10;

/// Largest change of `⟨x^m p^n⟩` under a change of the relative phase of two
/// disjoint, freely evolving branches `ψ₁ + e^{iφ}ψ₂` centred at `∓L/2`.
#[allow(clippy::too_many_arguments)]
pub fn polynomial_phase_insensitivity(
    grid: &Grid,
    envelope: Envelope,
    length: f64,
    m: u32,
    n: u32,
    phi_pairs: &[(f64, f64)],
    t: f64,
    mass: f64,
    ordering: Ordering,
) -> Result<PhaseInsensitivity> {
    if m > 4 || n > 4 {
        return Err(Error::param("m, n", format!("powers must be at most 4, got m = {m}, n = {n}")));
    }
    if !(length > 0.0) {
        return Err(Error::param("L", "must be positive"));
    }
    let left = envelope.packet(grid, -length / 2.0, 0.0, 0.0)?;
    let right = envelope.packet(grid, length / 2.0, 0.0, 0.0)?;
    let (left, right) = if t != 0.0 {
        (evolve_free(&left, mass, t)?, evolve_free(&right, mass, t)?)
    } else {
        (left, right)
    };
    let overlap = left.inner(&right)?.norm() / (left.norm() * right.norm());
    if overlap >= BRANCH_OVERLAP_TOL {
        return Err(Error::BranchesOverlap { overlap });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut pairs = Vec::with_capacity(phi_pairs.len());
    let mut max_deviation: f64 = 0.0;
    for &(a, b) in phi_pairs {
        let psi_a = superpose(one, &left, Complex64::from_polar(1.0, a), &right, false)?;
        let psi_b = superpose(one, &left, Complex64::from_polar(1.0, b), &right, false)?;
        let va = moment(&psi_a, m, n, ordering);
        let vb = moment(&psi_b, m, n, ordering);
        max_deviation = max_deviation.max((va - vb).norm());
        pairs.push((a, b, va, vb));
    }
    Ok(PhaseInsensitivity {
        max_deviation,
        branch_overlap: overlap,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weyl_of_xp_is_symmetrized_product() {
        let g = Grid::new(256, -16.0, 16.0, 1.0).unwrap();
        let psi = Envelope::Gaussian { sigma: 1.0 }.packet(&g, 0.5, 1.0, 0.0).unwrap();
        let v = psi.amplitudes();
        let weyl = moment_operator_apply(&g, v, 1, 1, Ordering::Weyl);
        let xp = moment_operator_apply(&g, v, 1, 1, Ordering::Literal);
        let px = p_pow(&g, &x_pow(&g, v, 1), 1);
        for j in 0..v.len() {
            assert!((weyl[j] - 0.5 * (xp[j] + px[j])).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_moment_is_phase_blind() {
        let g = Grid::new(512, -32.0, 32.0, 1.0).unwrap();
        let r = polynomial_phase_insensitivity(
            &g,
            Envelope::Bump { half_width: 6.0 },
            16.0,
            0,
            0,
            &[(0.0, PI)],
            0.0,
            1.0,
            Ordering::Weyl,
        )
        .unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn mean_position_is_phase_blind() {
        let g = Grid::new(512, -32.0, 32.0, 1.0).unwrap();
        let r = polynomial_phase_insensitivity(
            &g,
            Envelope::Gaussian { sigma: 0.8 },
            16.0,
            1,
            0,
            &[(0.0, PI)],
            0.0,
            1.0,
            Ordering::Weyl,
        )
        .unwrap();
        assert!(r.max_deviation < 1e-10, "{}", r.max_deviation);
    }

    #[test]
    fn overlapping_branches_rejected() {
        let g = Grid::new(512, -32.0, 32.0, 1.0).unwrap();
        let r = polynomial_phase_insensitivity(
            &g,
            Envelope::Gaussian { sigma: 3.0 },
            8.0,
            1,
            1,
            &[(0.0, 1.0)],
            0.0,
            1.0,
            Ordering::Weyl,
        );
        assert!(matches!(r, Err(Error::BranchesOverlap { .. })));
        assert!(polynomial_phase_insensitivity(
            &g,
            Envelope::Gaussian { sigma: 1.0 },
            16.0,
            5,
            0,
            &[(0.0, 1.0)],
            0.0,
            1.0,
            Ordering::Weyl
        )
        .is_err());
    }
}
