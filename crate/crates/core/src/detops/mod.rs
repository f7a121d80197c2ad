//! Deterministic operators: Hermitian operators having the system's state as
//! an eigenstate, full state-adapted bases of them, and the two-slit σ trio.

mod sigma;

pub use sigma::{PhaseCheck, SigmaTrio, SubspaceAlgebra};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

pub const UNIT_NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

/// Unit vector in `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteState {
    amplitudes: Vec<Complex64>,
}

impl FiniteState {
    /// Rejects vectors that are not unit norm within [`UNIT_NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::param("amplitudes", "empty state"));
        }
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::param("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Haar-random state from complex normal components.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn hermiticity_residual(a: &DMatrix<Complex64>) -> f64 {
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

fn check_operator(a: &DMatrix<Complex64>, dim: usize) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.nrows(),
        });
    }
    let residual = hermiticity_residual(a);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// `‖A·v − ⟨v|A|v⟩·v‖` and `⟨v|A|v⟩`.
fn eigen_residual(a: &DMatrix<Complex64>, v: &DVector<Complex64>) -> (f64, f64) {
    let av = a * v;
    let value = v.dotc(&av).re;
    ((av - v * Complex64::new(value, 0.0)).norm(), value)
}

/// Tests `A|v⟩ = a|v⟩`. Returns the eigenvalue `⟨v|A|v⟩` only when the
/// residual is below `tol`.
pub fn is_deterministic(a: &DMatrix<Complex64>, state: &FiniteState, tol: f64) -> Result<(bool, Option<f64>)> {
    check_operator(a, state.dim())?;
    let (residual, value) = eigen_residual(a, &state.vector());
    if residual < tol {
        Ok((true, Some(value)))
    } else {
        Ok((false, None))
    }
}

/// Orthonormal basis of the complement of `v` (Gram–Schmidt over the
/// standard basis, most-orthogonal candidates first).
fn complement_basis(v: &DVector<Complex64>) -> Vec<DVector<Complex64>> {
    let dim = v.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()));
    let mut basis = vec![v.clone()];
    for i in order {
        let mut e = DVector::<Complex64>::zeros(dim);
        e[i] = Complex64::new(1.0, 0.0);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&e);
                e -= b * c;
            }
        }
        let n = e.norm();
        if n > 1e-8 {
            basis.push(e / Complex64::new(n, 0.0));
        }
        if basis.len() == dim {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn outer(a: &DVector<Complex64>, b: &DVector<Complex64>) -> DMatrix<Complex64> {
    a * b.adjoint()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeterministicReport {
    pub dim: usize,
    pub count: usize,
    /// `max_i ‖A_i v − a_i v‖`.
    pub max_eigen_residual: f64,
    /// `max_{i<j} ‖(A_iA_j − A_jA_i) v‖`.
    pub max_commutator_residual: f64,
    /// `max_{i,j} ‖A_iA_j v − a_ia_j v‖`.
    pub max_closure_residual: f64,
    /// Smallest eigenvalue of the Hilbert–Schmidt Gram matrix.
    pub min_gram_eigenvalue: f64,
    pub independent: bool,
}

/// State with a list of Hermitian operators it is an eigenstate of.
#[derive(Debug, Clone)]
pub struct DeterministicSet {
    state: FiniteState,
    operators: Vec<DMatrix<Complex64>>,
    eigenvalues: Vec<f64>,
}

impl DeterministicSet {
    pub fn state(&self) -> &FiniteState {
        &self.state
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn report(&self) -> DeterministicReport {
        let v = self.state.vector();
        let images: Vec<DVector<Complex64>> = self.operators.iter().map(|a| a * &v).collect();
        let mut eig: f64 = 0.0;
        for (av, &a) in images.iter().zip(&self.eigenvalues) {
            eig = eig.max((av - &v * Complex64::new(a, 0.0)).norm());
        }
        let mut comm: f64 = 0.0;
        let mut closure: f64 = 0.0;
        for (i, ai) in self.operators.iter().enumerate() {
            for (j, aj) in self.operators.iter().enumerate() {
                let ij = ai * &images[j];
                let target = self.eigenvalues[i] * self.eigenvalues[j];
                closure = closure.max((&ij - &v * Complex64::new(target, 0.0)).norm());
                if i < j {
                    let ji = aj * &images[i];
                    comm = comm.max((ij - ji).norm());
                }
            }
        }
        let k = self.operators.len();
        let gram = DMatrix::<f64>::from_fn(k, k, |i, j| {
            self.operators[i]
                .iter()
                .zip(self.operators[j].iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        });
        let min_gram = gram.symmetric_eigenvalues().min();
        DeterministicReport {
            dim: self.state.dim(),
            count: k,
            max_eigen_residual: eig,
            max_commutator_residual: comm,
            max_closure_residual: closure,
            min_gram_eigenvalue: min_gram,
            independent: min_gram > 1e-10,
        }
    }
}

/// `(dim−1)²+1` linearly independent Hermitian operators with `state` as
/// eigenvector: the projector onto the state (eigenvalue 1) and a Hermitian
/// basis of operators on its orthogonal complement (eigenvalue 0).
pub fn deterministic_basis(state: &FiniteState) -> Result<DeterministicSet> {
    let dim = state.dim();
    if dim < 2 {
        return Err(Error::param("dim", format!("must be at least 2, got {dim}")));
    }
    let v = state.vector();
    let u = complement_basis(&v);
    debug_assert_eq!(u.len(), dim - 1);

    let mut operators = vec![outer(&v, &v)];
    let mut eigenvalues = vec![1.0];
    let i = Complex64::i();
    for j in 0..u.len() {
        operators.push(outer(&u[j], &u[j]));
        eigenvalues.push(0.0);
        for k in (j + 1)..u.len() {
            let jk = outer(&u[j], &u[k]);
            let kj = outer(&u[k], &u[j]);
            operators.push(&jk + &kj);
            operators.push((jk - kj) * i);
            eigenvalues.push(0.0);
            eigenvalues.push(0.0);
        }
    }
    Ok(DeterministicSet {
        state: state.clone(),
        operators,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_cases() {
        let v = FiniteState::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(is_deterministic(&id, &v, 1e-12).unwrap(), (true, Some(1.0)));
        let sx = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(is_deterministic(&sx, &v, 1e-10).unwrap(), (false, None));
        let w = DVector::from_column_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let pw = outer(&w, &w);
        assert_eq!(is_deterministic(&pw, &v, 1e-12).unwrap(), (true, Some(0.0)));
    }

    #[test]
    fn rejects_non_hermitian() {
        let v = FiniteState::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(is_deterministic(&a, &v, 1e-10), Err(Error::NotHermitian { .. })));
        assert!(FiniteState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let one = FiniteState::new(vec![c(1.0, 0.0)]).unwrap();
        assert!(deterministic_basis(&one).is_err());
    }

    #[test]
    fn counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (dim, want) in [(2, 2), (3, 5), (4, 10)] {
            let s = FiniteState::random(dim, &mut rng).unwrap();
            let set = deterministic_basis(&s).unwrap();
            assert_eq!(set.len(), want);
            for a in set.operators() {
                assert!(is_deterministic(a, &s, 1e-10).unwrap().0);
            }
        }
    }

    #[test]
    fn bell_state_has_ten() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = FiniteState::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        let r = deterministic_basis(&s).unwrap().report();
        assert_eq!(r.count, 10);
        assert!(r.independent);
        assert!(r.max_eigen_residual < 1e-12);
    }

    proptest! {
        #[test]
        fn basis_is_deterministic_closed_and_independent(dim in 2usize..=6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = FiniteState::random(dim, &mut rng).unwrap();
            let r = deterministic_basis(&s).unwrap().report();
            prop_assert_eq!(r.count, (dim - 1).pow(2) + 1);
            prop_assert!(r.max_eigen_residual < 1e-10);
            prop_assert!(r.max_commutator_residual < 1e-10);
            prop_assert!(r.max_closure_residual < 1e-9);
            prop_assert!(r.independent, "{}", r.min_gram_eigenvalue);
        }
    }
}
