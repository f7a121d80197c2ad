use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::Grid;
use super::state::{inner_raw, WaveFunction};
use crate::error::{Error, Result};

/// How a [`LinearOperator`] acts on amplitude vectors.
#[derive(Debug, Clone)]
pub enum OperatorKind {
    /// Multiplication by `f(x_j)`.
    DiagPosition(Vec<Complex64>),
    /// Multiplication by `g(p_k)` in momentum space (FFT ordering).
    DiagMomentum { grid: Grid, values: Vec<Complex64> },
    /// `(Tψ)_j = ψ_{(j+k) mod n}`, i.e. `e^{ipL/ħ}` with `L = k·dx`.
    Shift(i64),
    Dense(DMatrix<Complex64>),
    /// `A_0·A_1·…·A_m`; the rightmost factor acts first.
    Product(Vec<LinearOperator>),
    Sum(Vec<(Complex64, LinearOperator)>),
}

/// Linear operator on grid states (or on plain `dim`-vectors for dense
/// operators).
#[derive(Debug, Clone)]
pub struct LinearOperator {
    kind: OperatorKind,
    dim: usize,
    hermitian: bool,
}

const HERMITIAN_TEST_SEED: u64 = 0x5eed_4e51_7a11;
const HERMITIAN_TEST_STATES: usize = 4;

impl LinearOperator {
    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared Hermiticity. See [`LinearOperator::verify_hermitian`].
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::shift(grid, 0)
    }

    pub fn position(grid: &Grid) -> Self {
        Self::diag_position(grid, |x| Complex64::new(x, 0.0)).declared_hermitian()
    }

    pub fn momentum(grid: &Grid) -> Self {
        Self::diag_momentum(grid, |p| Complex64::new(p, 0.0)).declared_hermitian()
    }

    pub fn diag_position(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values: Vec<Complex64> = grid.positions().into_iter().map(f).collect();
        let hermitian = values.iter().all(|v| v.im == 0.0);
        Self {
            dim: values.len(),
            kind: OperatorKind::DiagPosition(values),
            hermitian,
        }
    }

    pub fn diag_position_values(values: Vec<Complex64>) -> Self {
        let hermitian = values.iter().all(|v| v.im == 0.0);
        Self {
            dim: values.len(),
            kind: OperatorKind::DiagPosition(values),
            hermitian,
        }
    }

    pub fn diag_momentum(grid: &Grid, g: impl Fn(f64) -> Complex64) -> Self {
        let values: Vec<Complex64> = grid.momenta().into_iter().map(g).collect();
        let hermitian = values.iter().all(|v| v.im == 0.0);
        Self {
            dim: values.len(),
            kind: OperatorKind::DiagMomentum {
                grid: grid.clone(),
                values,
            },
            hermitian,
        }
    }

    /// Exact cyclic shift by `k` grid steps.
    pub fn shift(grid: &Grid, k: i64) -> Self {
        let n = grid.n_points() as i64;
        let k = k.rem_euclid(n);
        Self {
            dim: grid.n_points(),
            kind: OperatorKind::Shift(k),
            hermitian: k == 0 || 2 * k == n,
        }
    }

    /// `e^{ipL/ħ}`: translation `ψ(x) → ψ(x+L)`. `L` must be an integer
    /// multiple of `dx`.
    pub fn translation(grid: &Grid, length: f64) -> Result<Self> {
        Ok(Self::shift(grid, grid.steps_for_length(length)?))
    }

    pub fn dense(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        Ok(Self {
            dim: matrix.nrows(),
            kind: OperatorKind::Dense(matrix),
            hermitian: false,
        })
    }

    /// Product in written order: `product([A, B])` is `A·B`.
    pub fn product(factors: Vec<LinearOperator>) -> Result<Self> {
        let dim = common_dim(factors.iter())?;
        Ok(Self {
            dim,
            kind: OperatorKind::Product(factors),
            hermitian: false,
        })
    }

    pub fn sum(terms: Vec<(Complex64, LinearOperator)>) -> Result<Self> {
        let dim = common_dim(terms.iter().map(|(_, op)| op))?;
        let hermitian = terms.iter().all(|(c, op)| c.im == 0.0 && op.hermitian);
        Ok(Self {
            dim,
            kind: OperatorKind::Sum(terms),
            hermitian,
        })
    }

    pub fn scaled(self, c: Complex64) -> Self {
        let dim = self.dim;
        let hermitian = self.hermitian && c.im == 0.0;
        Self {
            dim,
            kind: OperatorKind::Sum(vec![(c, self)]),
            hermitian,
        }
    }

    /// Marks the operator Hermitian without checking.
    pub fn declared_hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    /// Verifies Hermiticity on a fixed seeded set of random states and, on
    /// success, sets the flag.
    pub fn assert_hermitian(mut self, tol: f64) -> Result<Self> {
        let residual = self.hermiticity_residual();
        if residual >= tol {
            return Err(Error::NotHermitian { residual });
        }
        self.hermitian = true;
        Ok(self)
    }

    /// `max |⟨u|A v⟩ − conj(⟨v|A u⟩)|` over the fixed random test set,
    /// relative to the largest `|⟨u|A v⟩|` seen.
    pub fn hermiticity_residual(&self) -> f64 {
        let states = random_test_states(self.dim, HERMITIAN_TEST_STATES, HERMITIAN_TEST_SEED);
        let images: Vec<Vec<Complex64>> = states.iter().map(|s| self.apply(s)).collect();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for (i, u) in states.iter().enumerate() {
            for (j, v) in states.iter().enumerate() {
                let uav = inner_raw(u, &images[j]);
                let vau = inner_raw(v, &images[i]);
                scale = scale.max(uav.norm());
                worst = worst.max((uav - vau.conj()).norm());
            }
        }
        worst / scale
    }

    /// Applies the operator to a raw amplitude vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "operator dimension mismatch");
        match &self.kind {
            OperatorKind::DiagPosition(values) => {
                v.iter().zip(values).map(|(a, f)| a * f).collect()
            }
            OperatorKind::DiagMomentum { grid, values } => grid.apply_momentum_diagonal(v, values),
            OperatorKind::Shift(k) => cyclic_shift(v, *k),
            OperatorKind::Dense(m) => {
                let n = self.dim;
                (0..n)
                    .map(|r| (0..n).map(|c| m[(r, c)] * v[c]).sum())
                    .collect()
            }
            OperatorKind::Product(factors) => {
                let mut out = v.to_vec();
                for f in factors.iter().rev() {
                    out = f.apply(&out);
                }
                out
            }
            OperatorKind::Sum(terms) => {
                let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
                for (c, op) in terms {
                    for (o, a) in out.iter_mut().zip(op.apply(v)) {
                        *o += c * a;
                    }
                }
                out
            }
        }
    }

    pub fn apply_to(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        if psi.amplitudes().len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: psi.amplitudes().len(),
            });
        }
        if let OperatorKind::DiagMomentum { grid, .. } = &self.kind {
            if grid != psi.grid() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(psi.with_amplitudes(self.apply(psi.amplitudes())))
    }
}

fn common_dim<'a>(mut ops: impl Iterator<Item = &'a LinearOperator>) -> Result<usize> {
    let first = ops
        .next()
        .ok_or_else(|| Error::param("operator", "empty product or sum"))?;
    let dim = first.dim;
    for op in ops {
        if op.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: op.dim,
            });
        }
    }
    Ok(dim)
}

pub(crate) fn cyclic_shift(v: &[Complex64], k: i64) -> Vec<Complex64> {
    let n = v.len();
    let k = k.rem_euclid(n as i64) as usize;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v[k..]);
    out.extend_from_slice(&v[..k]);
    out
}

pub(crate) fn random_test_states(dim: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect()
}

/// `⟨bra|A|ket⟩ = Σ conj(bra)·(A ket)·dx`.
pub fn matrix_element(bra: &WaveFunction, op: &LinearOperator, ket: &WaveFunction) -> Result<Complex64> {
    let image = op.apply_to(ket)?;
    bra.inner(&image)
}

/// `⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn expectation(psi: &WaveFunction, op: &LinearOperator) -> Result<Complex64> {
    let n2 = psi.norm_sq();
    if n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(matrix_element(psi, op, psi)? / n2)
}
