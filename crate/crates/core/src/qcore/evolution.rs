use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::state::WaveFunction;
use crate::error::{Error, Result};

/// Real potential `V(x)` with an analytic derivative where one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    /// `½·stiffness·(x − center)²`.
    Harmonic { stiffness: f64, center: f64 },
    /// `slope·x`; constant force `−slope`.
    Linear { slope: f64 },
    /// Flat plateau of `height` on `[start + ramp, end − ramp]`, zero outside
    /// `[start, end]`, joined by quintic smoothstep ramps of width `ramp`.
    /// The force vanishes identically off the two ramps.
    Plateau {
        start: f64,
        end: f64,
        ramp: f64,
        height: f64,
    },
    /// Grid samples with no analytic form.
    Sampled(Vec<f64>),
}

fn smootherstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0)
    } else {
        let v = s * s * s * (s * (6.0 * s - 15.0) + 10.0);
        let d = 30.0 * s * s * (s - 1.0) * (s - 1.0);
        (v, d)
    }
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Plateau { start, end, ramp, height } => {
                if !(ramp > &0.0 && end - start >= 2.0 * ramp && height.is_finite()) {
                    return Err(Error::param(
                        "potential",
                        "plateau needs ramp > 0 and end − start ≥ 2·ramp",
                    ));
                }
            }
            Potential::Harmonic { stiffness, center } => {
                if !(stiffness.is_finite() && center.is_finite()) {
                    return Err(Error::param("potential", "non-finite harmonic parameters"));
                }
            }
            Potential::Linear { slope } => {
                if !slope.is_finite() {
                    return Err(Error::param("potential", "non-finite slope"));
                }
            }
            Potential::Free | Potential::Sampled(_) => {}
        }
        Ok(())
    }

    /// `V(x)`. For [`Potential::Sampled`] use [`Hamiltonian::potential_samples`].
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Harmonic { stiffness, center } => 0.5 * stiffness * (x - center).powi(2),
            Potential::Linear { slope } => slope * x,
            Potential::Plateau { start, end, ramp, height } => {
                let (up, _) = smootherstep((x - start) / ramp);
                let (down, _) = smootherstep((end - x) / ramp);
                height * up * down
            }
            Potential::Sampled(_) => f64::NAN,
        }
    }

    /// `dV/dx`, or `None` for sampled potentials.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        Some(match *self {
            Potential::Free => 0.0,
            Potential::Harmonic { stiffness, center } => stiffness * (x - center),
            Potential::Linear { slope } => slope,
            Potential::Plateau { start, end, ramp, height } => {
                let (up, dup) = smootherstep((x - start) / ramp);
                let (down, ddown) = smootherstep((end - x) / ramp);
                height * (dup * down - up * ddown) / ramp
            }
            Potential::Sampled(_) => return None,
        })
    }
}

/// `H = p²/2m + V(x)` on a grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    mass: f64,
    potential: Potential,
    samples: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(grid: &Grid, mass: f64, potential: Potential) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param("mass", format!("must be positive, got {mass}")));
        }
        potential.validate()?;
        let samples = match &potential {
            Potential::Sampled(v) => {
                grid.check_len(v.len())?;
                v.clone()
            }
            p => grid.positions().into_iter().map(|x| p.value(x)).collect(),
        };
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "potential",
                format!("non-finite value at x = {}", grid.x(j)),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            mass,
            potential,
            samples,
        })
    }

    pub fn free(grid: &Grid, mass: f64) -> Result<Self> {
        Self::new(grid, mass, Potential::Free)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn potential_samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn is_free(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    /// Kinetic energy `p_k²/2m` in FFT ordering.
    pub fn kinetic_samples(&self) -> Vec<f64> {
        self.grid
            .momenta()
            .into_iter()
            .map(|p| p * p / (2.0 * self.mass))
            .collect()
    }
}

/// Strang-split propagator for one step of signed length `dt`:
/// `e^{-iV dt/2ħ}·e^{-iT dt/ħ}·e^{-iV dt/2ħ}`.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    grid: Grid,
    half_potential: Vec<Complex64>,
    full_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    free: bool,
}

impl SplitOperator {
    /// `dt` may be negative (backward step).
    pub fn new(hamiltonian: &Hamiltonian, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::param("dt", format!("must be finite and non-zero, got {dt}")));
        }
        let hbar = hamiltonian.grid.hbar();
        let phase = |e: f64, t: f64| Complex64::from_polar(1.0, -e * t / hbar);
        let scale = 1.0 / hamiltonian.grid.n_points() as f64;
        Ok(Self {
            grid: hamiltonian.grid.clone(),
            half_potential: hamiltonian.samples.iter().map(|&v| phase(v, dt / 2.0)).collect(),
            full_potential: hamiltonian.samples.iter().map(|&v| phase(v, dt)).collect(),
            kinetic: hamiltonian
                .kinetic_samples()
                .into_iter()
                .map(|k| phase(k, dt) * scale)
                .collect(),
            free: hamiltonian.is_free(),
        })
    }

    /// Advances `n_steps` steps. Adjacent half potential kicks are fused.
    pub fn propagate(&self, psi: &WaveFunction, n_steps: usize) -> Result<WaveFunction> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut work = psi.amplitudes().to_vec();
        if n_steps == 0 {
            return Ok(psi.clone());
        }
        if !self.free {
            mul_in_place(&mut work, &self.half_potential);
        }
        for step in 0..n_steps {
            self.grid.fft_in_place(&mut work);
            mul_in_place(&mut work, &self.kinetic);
            self.grid.ifft_in_place(&mut work);
            if !self.free {
                let kick = if step + 1 == n_steps {
                    &self.half_potential
                } else {
                    &self.full_potential
                };
                mul_in_place(&mut work, kick);
            }
        }
        Ok(psi.with_amplitudes(work))
    }
}

fn mul_in_place(v: &mut [Complex64], m: &[Complex64]) {
    for (a, b) in v.iter_mut().zip(m) {
        *a *= b;
    }
}

/// Second-order split-operator evolution of `psi` for `n_steps` steps of `dt`.
pub fn evolve(psi: &WaveFunction, hamiltonian: &Hamiltonian, dt: f64, n_steps: usize) -> Result<WaveFunction> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    SplitOperator::new(hamiltonian, dt)?.propagate(psi, n_steps)
}

/// Free evolution over time `t` (exact on the lattice: a single kinetic
/// phase in momentum space). Negative `t` runs backward.
pub fn evolve_free(psi: &WaveFunction, mass: f64, t: f64) -> Result<WaveFunction> {
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let h = Hamiltonian::free(psi.grid(), mass)?;
    SplitOperator::new(&h, t)?.propagate(psi, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::operator::{expectation, LinearOperator};
    use crate::qcore::state::gaussian_packet;

    #[test]
    fn plateau_force_vanishes_off_ramps() {
        let v = Potential::Plateau { start: 0.0, end: 10.0, ramp: 2.0, height: 3.0 };
        for x in [-5.0, -0.0, 2.0, 5.0, 8.0, 10.0, 15.0] {
            assert_eq!(v.derivative(x).unwrap(), 0.0, "x = {x}");
        }
        assert_eq!(v.value(5.0), 3.0);
        assert_eq!(v.value(-1.0), 0.0);
        let h = 1e-6;
        for x in [0.5, 1.3, 8.7] {
            let fd = (v.value(x + h) - v.value(x - h)) / (2.0 * h);
            assert!((fd - v.derivative(x).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn hamiltonian_validation() {
        let g = Grid::new(64, -8.0, 8.0, 1.0).unwrap();
        assert!(Hamiltonian::new(&g, 0.0, Potential::Free).is_err());
        assert!(Hamiltonian::new(&g, 1.0, Potential::Sampled(vec![0.0; 3])).is_err());
        let mut bad = vec![0.0; 64];
        bad[3] = f64::INFINITY;
        assert!(Hamiltonian::new(&g, 1.0, Potential::Sampled(bad)).is_err());
        assert!(evolve(
            &gaussian_packet(&g, 0.0, 1.0, 0.0, 0.0).unwrap(),
            &Hamiltonian::free(&g, 1.0).unwrap(),
            -0.1,
            1
        )
        .is_err());
    }

    #[test]
    fn free_ehrenfest() {
        let g = Grid::new(1024, -64.0, 64.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, -5.0, 1.0, 2.0, 0.0).unwrap();
        let h = Hamiltonian::free(&g, 1.0).unwrap();
        let out = evolve(&psi, &h, 1e-2, 300).unwrap();
        let x = expectation(&out, &LinearOperator::position(&g)).unwrap().re;
        assert!((x - (-5.0 + 2.0 * 3.0)).abs() < 1e-6, "{x}");
    }

    #[test]
    fn free_evolution_keeps_momentum_density() {
        let g = Grid::new(256, -32.0, 32.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 3.0, 1.3, -1.0, 0.2).unwrap();
        let before = psi.momentum_density();
        let after = evolve(&psi, &Hamiltonian::free(&g, 1.0).unwrap(), 1e-3, 2000)
            .unwrap()
            .momentum_density();
        let dev = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn norm_drift_over_many_steps() {
        let g = Grid::new(256, -20.0, 20.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 1.0, 1.0, 0.5, 0.0).unwrap();
        let h = Hamiltonian::new(&g, 1.0, Potential::Harmonic { stiffness: 1.0, center: 0.0 }).unwrap();
        let out = evolve(&psi, &h, 1e-3, 10_000).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12, "{}", out.norm() - 1.0);
    }

    #[test]
    fn backward_step_inverts_forward() {
        let g = Grid::new(128, -16.0, 16.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 1.0, 1.0, 0.5, 0.0).unwrap();
        let h = Hamiltonian::new(&g, 1.0, Potential::Harmonic { stiffness: 1.0, center: 0.0 }).unwrap();
        let fwd = SplitOperator::new(&h, 0.01).unwrap().propagate(&psi, 10).unwrap();
        let back = SplitOperator::new(&h, -0.01).unwrap().propagate(&fwd, 10).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
