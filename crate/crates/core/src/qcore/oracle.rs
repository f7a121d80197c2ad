//! Brute-force dense matrices built straight from operator definitions.
//!
//! Nothing here goes through the FFT path used by [`LinearOperator::apply`]
//! or the split-operator propagator: momentum-diagonal operators use an
//! explicit DFT matrix and propagators come from a Hermitian
//! eigendecomposition. That keeps these matrices usable as ground truth.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::evolution::Hamiltonian;
use super::grid::Grid;
use super::operator::{LinearOperator, OperatorKind};
use super::state::WaveFunction;
use crate::error::{Error, Result};

pub const ORACLE_CAP: usize = 512;

fn check_cap(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        return Err(Error::OracleTooLarge { n, cap: ORACLE_CAP });
    }
    Ok(())
}

/// Unitary DFT matrix `F_{kj} = e^{-2πi jk/n}/√n`.
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, j| {
        let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(s, angle)
    })
}

fn momentum_diagonal(n: usize, values: &[Complex64]) -> DMatrix<Complex64> {
    let f = dft_matrix(n);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
    f.adjoint() * d * f
}

/// Dense matrix of a grid operator.
pub fn dense_operator(op: &LinearOperator) -> Result<DMatrix<Complex64>> {
    let n = op.dim();
    check_cap(n)?;
    Ok(match op.kind() {
        OperatorKind::DiagPosition(values) => DMatrix::from_diagonal(&DVector::from_column_slice(values)),
        OperatorKind::DiagMomentum { values, .. } => momentum_diagonal(n, values),
        OperatorKind::Shift(k) => {
            let k = k.rem_euclid(n as i64) as usize;
            let mut m = DMatrix::zeros(n, n);
            for r in 0..n {
                m[(r, (r + k) % n)] = Complex64::new(1.0, 0.0);
            }
            m
        }
        OperatorKind::Dense(m) => m.clone(),
        OperatorKind::Product(factors) => {
            let mut acc = DMatrix::identity(n, n);
            for f in factors {
                acc *= dense_operator(f)?;
            }
            acc
        }
        OperatorKind::Sum(terms) => {
            let mut acc = DMatrix::zeros(n, n);
            for (c, t) in terms {
                acc += dense_operator(t)? * *c;
            }
            acc
        }
    })
}

/// Dense discrete Hamiltonian `F†·diag(p²/2m)·F + diag(V)`.
pub fn dense_hamiltonian(h: &Hamiltonian) -> Result<DMatrix<Complex64>> {
    let n = h.grid().n_points();
    check_cap(n)?;
    let kin: Vec<Complex64> = h
        .kinetic_samples()
        .into_iter()
        .map(|k| Complex64::new(k, 0.0))
        .collect();
    let mut m = momentum_diagonal(n, &kin);
    for (j, v) in h.potential_samples().iter().enumerate() {
        m[(j, j)] += Complex64::new(*v, 0.0);
    }
    Ok(m)
}

/// Exact propagator `e^{-iHt/ħ}` of the discrete Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    grid: Grid,
    energies: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl ExactPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let mut m = dense_hamiltonian(h)?;
        // symmetrize away rounding so the Hermitian solver sees an exact Hermitian input
        let adj = m.adjoint();
        m = (m + adj) * Complex64::new(0.5, 0.0);
        let eig = m.symmetric_eigen();
        Ok(Self {
            grid: h.grid().clone(),
            energies: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let hbar = self.grid.hbar();
        let phases = DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| Complex64::from_polar(1.0, -e * t / hbar)),
        );
        &self.eigenvectors * DMatrix::from_diagonal(&phases) * self.eigenvectors.adjoint()
    }

    pub fn apply(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let hbar = self.grid.hbar();
        let v = DVector::from_column_slice(psi.amplitudes());
        let mut coeffs = self.eigenvectors.adjoint() * v;
        for (c, e) in coeffs.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t / hbar);
        }
        let out = &self.eigenvectors * coeffs;
        WaveFunction::new(self.grid.clone(), out.iter().cloned().collect())
    }
}

/// Dense ground truth for either an operator or a Hamiltonian.
pub enum OracleInput<'a> {
    Operator(&'a LinearOperator),
    Hamiltonian(&'a Hamiltonian),
}

pub fn dense_oracle(input: OracleInput<'_>) -> Result<DMatrix<Complex64>> {
    match input {
        OracleInput::Operator(op) => dense_operator(op),
        OracleInput::Hamiltonian(h) => dense_hamiltonian(h),
    }
}
