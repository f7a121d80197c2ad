use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::Potential;

/// Equal-weight classical phase-space ensemble.
#[derive(Debug, Clone)]
pub struct ClassicalEnsemble {
    particles: Vec<(f64, f64)>,
    mass: f64,
}

impl ClassicalEnsemble {
    pub const MIN_STATISTICAL_SIZE: usize = 1000;

    pub fn new(particles: Vec<(f64, f64)>, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param("mass", format!("must be positive, got {mass}")));
        }
        if particles.is_empty() {
            return Err(Error::param("particles", "empty ensemble"));
        }
        if particles.iter().any(|(x, p)| !(x.is_finite() && p.is_finite())) {
            return Err(Error::param("particles", "non-finite coordinate"));
        }
        if particles.len() < Self::MIN_STATISTICAL_SIZE {
            log::warn!(
                "classical ensemble of {} particles is below the statistical minimum of {}",
                particles.len(),
                Self::MIN_STATISTICAL_SIZE
            );
        }
        Ok(Self { particles, mass })
    }

    /// Samples the positive Wigner function of a Gaussian packet: independent
    /// normals with `σ_x = sigma` and `σ_p = ħ/(2σ)`, one stream per packet.
    pub fn from_gaussian_packets(
        packets: &[(f64, f64)],
        sigma: f64,
        hbar: f64,
        mass: f64,
        per_packet: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(sigma > 0.0 && hbar > 0.0) {
            return Err(Error::param("sigma", "sigma and hbar must be positive"));
        }
        let sigma_p = hbar / (2.0 * sigma);
        let mut particles = Vec::with_capacity(packets.len() * per_packet);
        for (i, &(center, momentum)) in packets.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let nx = Normal::new(center, sigma).expect("positive sigma");
            let np = Normal::new(momentum, sigma_p).expect("positive sigma_p");
            for _ in 0..per_packet {
                particles.push((nx.sample(&mut rng), np.sample(&mut rng)));
            }
        }
        Self::new(particles, mass)
    }

    pub fn particles(&self) -> &[(f64, f64)] {
        &self.particles
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDrift {
    pub times: Vec<f64>,
    /// Ensemble mean of `e^{i2πp/p₀}` (with `p₀ = h/L`) after each step.
    pub values: Vec<Complex64>,
    /// Poisson-bracket rate `−i(2π/p₀)⟨V'(x)·e^{i2πp/p₀}⟩` at each record.
    pub poisson_rate: Vec<Complex64>,
    /// `max_t |⟨e^{i2πp/p₀}⟩(t) − ⟨e^{i2πp/p₀}⟩(0)|`.
    pub max_drift: f64,
}

fn modular_average(particles: &[(f64, f64)], scale: f64) -> Complex64 {
    let n = particles.len() as f64;
    particles
        .iter()
        .map(|&(_, p)| Complex64::from_polar(1.0, scale * p))
        .sum::<Complex64>()
        / n
}

fn poisson_rate(particles: &[(f64, f64)], potential: &Potential, scale: f64) -> Result<Complex64> {
    let n = particles.len() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, p) in particles {
        let force = potential.derivative(x).ok_or(Error::NoForce)?;
        acc += Complex64::from_polar(force, scale * p);
    }
    Ok(-Complex64::i() * scale * acc / n)
}

/// Leapfrog (kick-drift-kick) evolution of the ensemble, tracking the
/// classical modular phase factor `⟨e^{ipL/ħ}⟩ = ⟨e^{i2πp/p₀}⟩`.
pub fn classical_modular_drift(
    ensemble: &ClassicalEnsemble,
    potential: &Potential,
    length: f64,
    hbar: f64,
    dt: f64,
    n_steps: usize,
) -> Result<ClassicalDrift> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(length > 0.0 && hbar > 0.0) {
        return Err(Error::param("L", "L and hbar must be positive"));
    }
    potential.validate()?;
    let force = |x: f64| potential.derivative(x).map(|d| -d).ok_or(Error::NoForce);
    let scale = length / hbar;
    let m = ensemble.mass;
    let mut particles = ensemble.particles.clone();

    let first = modular_average(&particles, scale);
    let mut times = vec![0.0];
    let mut values = vec![first];
    let mut rates = vec![poisson_rate(&particles, potential, scale)?];
    let mut max_drift: f64 = 0.0;

    for step in 1..=n_steps {
        for (x, p) in particles.iter_mut() {
            *p += 0.5 * dt * force(*x)?;
            *x += dt * *p / m;
            *p += 0.5 * dt * force(*x)?;
        }
        let v = modular_average(&particles, scale);
        max_drift = max_drift.max((v - first).norm());
        times.push(step as f64 * dt);
        values.push(v);
        rates.push(poisson_rate(&particles, potential, scale)?);
    }
    Ok(ClassicalDrift {
        times,
        values,
        poisson_rate: rates,
        max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_motion_keeps_modular_phase() {
        let ens = ClassicalEnsemble::from_gaussian_packets(&[(0.0, 0.3)], 1.0, 1.0, 1.0, 2000, 7).unwrap();
        let d = classical_modular_drift(&ens, &Potential::Free, 16.0, 1.0, 1e-2, 200).unwrap();
        assert!(d.max_drift < 1e-12, "{}", d.max_drift);
        assert_eq!(d.values.len(), 201);
    }

    #[test]
    fn linear_potential_rotates_at_known_rate() {
        let len = 4.0;
        let slope = 0.05;
        // wide packet: |⟨e^{ipL}⟩| stays well away from zero
        let ens = ClassicalEnsemble::from_gaussian_packets(&[(0.0, 0.0)], 8.0, 1.0, 1.0, 5000, 3).unwrap();
        let dt = 1e-2;
        let n = 500;
        let d = classical_modular_drift(&ens, &Potential::Linear { slope }, len, 1.0, dt, n).unwrap();
        let ratio = d.values[n] / d.values[0];
        let rate = -ratio.arg() / (n as f64 * dt);
        let p0 = 2.0 * PI / len;
        let want = 2.0 * PI * slope / p0;
        assert!((rate - want).abs() < 0.01 * want, "{rate} vs {want}");
        // Poisson-bracket rate agrees with the finite difference of the trace
        let fd = (d.values[2] - d.values[0]) / (2.0 * dt);
        assert!((fd - d.poisson_rate[1]).norm() < 1e-4 * d.poisson_rate[1].norm().max(1e-3));
    }

    #[test]
    fn sampled_potential_has_no_force() {
        let ens = ClassicalEnsemble::from_gaussian_packets(&[(0.0, 0.0)], 1.0, 1.0, 1.0, 10, 1).unwrap();
        assert!(matches!(
            classical_modular_drift(&ens, &Potential::Sampled(vec![0.0; 4]), 1.0, 1.0, 0.1, 1),
            Err(Error::NoForce)
        ));
    }

    #[test]
    fn deterministic_sampling() {
        let a = ClassicalEnsemble::from_gaussian_packets(&[(-5.0, 1.0), (5.0, -1.0)], 1.0, 1.0, 1.0, 100, 9).unwrap();
        let b = ClassicalEnsemble::from_gaussian_packets(&[(-5.0, 1.0), (5.0, -1.0)], 1.0, 1.0, 1.0, 100, 9).unwrap();
        assert_eq!(a.particles(), b.particles());
        assert_eq!(a.len(), 200);
    }
}
