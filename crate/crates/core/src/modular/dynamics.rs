use num_complex::Complex64;
use serde::Serialize;

use super::{mod_expect, ModularSpec};
use crate::error::{Error, Result};
use crate::qcore::operator::cyclic_shift;
use crate::qcore::{Hamiltonian, SplitOperator, WaveFunction};

/// `(i/ħ)⟨[V(x) − V(x+L)]·e^{ipL/ħ}⟩`, the commutator side of the
/// Heisenberg equation for `e^{ipL/ħ}`.
pub fn modular_rate(psi: &WaveFunction, h: &Hamiltonian, spec: &ModularSpec) -> Result<Complex64> {
    if psi.grid() != spec.grid() || h.grid() != spec.grid() {
        return Err(Error::GridMismatch);
    }
    let n2 = psi.norm_sq();
    if n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let v = h.potential_samples();
    let k = spec.steps();
    let shifted = cyclic_shift(psi.amplitudes(), k);
    let v_shifted: Vec<f64> = {
        let n = v.len();
        let k = k.rem_euclid(n as i64) as usize;
        (0..n).map(|j| v[(j + k) % n]).collect()
    };
    let sum: Complex64 = psi
        .amplitudes()
        .iter()
        .zip(&shifted)
        .enumerate()
        .map(|(j, (a, b))| a.conj() * (v[j] - v_shifted[j]) * b)
        .sum();
    let hbar = spec.grid().hbar();
    Ok(Complex64::i() / hbar * sum * spec.grid().dx() / n2)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EomResidual {
    /// Centered finite difference of `⟨e^{ipL/ħ}⟩` through ±dt evolution.
    pub finite_difference: Complex64,
    /// Commutator prediction.
    pub commutator: Complex64,
    pub residual: f64,
}

/// Compares `d/dt⟨e^{ipL/ħ}⟩` (centered difference through the propagator)
/// with the commutator prediction at `psi`.
pub fn eom_residual(psi: &WaveFunction, h: &Hamiltonian, spec: &ModularSpec, dt: f64) -> Result<EomResidual> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let forward = SplitOperator::new(h, dt)?.propagate(psi, 1)?;
    let backward = SplitOperator::new(h, -dt)?.propagate(psi, 1)?;
    let fd = (mod_expect(&forward, spec, 1)? - mod_expect(&backward, spec, 1)?) / (2.0 * dt);
    let commutator = modular_rate(psi, h, spec)?;
    Ok(EomResidual {
        finite_difference: fd,
        commutator,
        residual: (fd - commutator).norm(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModularTracePoint {
    pub t: f64,
    pub value: Complex64,
    pub rate: Complex64,
}

/// Records `⟨e^{ipL/ħ}⟩` and its commutator rate every `record_every` steps.
pub fn modular_trace(
    psi: &WaveFunction,
    h: &Hamiltonian,
    spec: &ModularSpec,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Vec<ModularTracePoint>> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let every = record_every.max(1);
    let stepper = SplitOperator::new(h, dt)?;
    let mut state = psi.clone();
    let mut out = Vec::with_capacity(n_steps / every + 2);
    let mut done = 0;
    loop {
        out.push(ModularTracePoint {
            t: done as f64 * dt,
            value: mod_expect(&state, spec, 1)?,
            rate: modular_rate(&state, h, spec)?,
        });
        if done >= n_steps {
            break;
        }
        let chunk = every.min(n_steps - done);
        state = stepper.propagate(&state, chunk)?;
        done += chunk;
    }
    Ok(out)
}
