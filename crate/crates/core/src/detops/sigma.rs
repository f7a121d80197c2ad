use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::operator::random_test_states;
use crate::qcore::state::inner_raw;
use crate::qcore::{superpose, Envelope, Grid, LinearOperator, WaveFunction};

const HERMITIAN_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Spin-like observables for two slits separated by `L`:
/// `σ₁ = C − i·S·sq`, `σ₂ = S + i·C·sq`, `σ₃ = sq`, with `C = cos(pL/ħ)`,
/// `S = sin(pL/ħ)` and `sq(x) = sign(sin(πx/L))`.
#[derive(Debug, Clone)]
pub struct SigmaTrio {
    grid: Grid,
    length: f64,
    cos: LinearOperator,
    sin: LinearOperator,
    sq: LinearOperator,
    sigma: [LinearOperator; 3],
}

impl SigmaTrio {
    /// Requires `L = k·dx`, a box of whole periods of `sq` (width a multiple
    /// of `2L`) and no grid point on a node of `sin(πx/L)`.
    pub fn new(grid: &Grid, length: f64) -> Result<Self> {
        let k = grid.steps_for_length(length)?;
        let n = grid.n_points() as i64;
        if k <= 0 || n % (2 * k) != 0 {
            return Err(Error::param(
                "L",
                format!("box of {n} points is not a whole number of 2L = {} steps", 2 * k),
            ));
        }
        let mut signs = Vec::with_capacity(grid.n_points());
        for x in grid.positions() {
            let r = x / length;
            if (r - r.round()).abs() * length < 1e-6 * grid.dx() {
                return Err(Error::NodeOnGrid { x });
            }
            signs.push(c((std::f64::consts::PI * r).sin().signum(), 0.0));
        }
        let sq = LinearOperator::diag_position_values(signs);
        let half = c(0.5, 0.0);
        let cos = LinearOperator::sum(vec![
            (half, LinearOperator::shift(grid, k)),
            (half, LinearOperator::shift(grid, -k)),
        ])?
        .declared_hermitian();
        let sin = LinearOperator::sum(vec![
            (c(0.0, -0.5), LinearOperator::shift(grid, k)),
            (c(0.0, 0.5), LinearOperator::shift(grid, -k)),
        ])?
        .declared_hermitian();
        let sigma1 = LinearOperator::sum(vec![
            (c(1.0, 0.0), cos.clone()),
            (c(0.0, -1.0), LinearOperator::product(vec![sin.clone(), sq.clone()])?),
        ])?
        .assert_hermitian(HERMITIAN_TOL)?;
        let sigma2 = LinearOperator::sum(vec![
            (c(1.0, 0.0), sin.clone()),
            (c(0.0, 1.0), LinearOperator::product(vec![cos.clone(), sq.clone()])?),
        ])?
        .assert_hermitian(HERMITIAN_TOL)?;
        Ok(Self {
            grid: grid.clone(),
            length,
            sigma: [sigma1, sigma2, sq.clone()],
            cos,
            sin,
            sq,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sigma1(&self) -> &LinearOperator {
        &self.sigma[0]
    }

    pub fn sigma2(&self) -> &LinearOperator {
        &self.sigma[1]
    }

    pub fn sigma3(&self) -> &LinearOperator {
        &self.sigma[2]
    }

    pub fn cos(&self) -> &LinearOperator {
        &self.cos
    }

    pub fn sin(&self) -> &LinearOperator {
        &self.sin
    }

    pub fn square_wave(&self) -> &LinearOperator {
        &self.sq
    }

    /// `C − S·sq`, the first observable with the products in written order.
    /// Its `S·sq` part is anti-Hermitian.
    pub fn literal_sigma1(&self) -> Result<LinearOperator> {
        LinearOperator::sum(vec![
            (c(1.0, 0.0), self.cos.clone()),
            (c(-1.0, 0.0), LinearOperator::product(vec![self.sin.clone(), self.sq.clone()])?),
        ])
    }

    /// `max ‖(C·sq + sq·C)ψ‖` over `count` seeded random unit states.
    pub fn anticommutator_residual(&self, count: usize, seed: u64) -> f64 {
        let mut worst: f64 = 0.0;
        for s in random_test_states(self.grid.n_points(), count, seed) {
            let norm = inner_raw(&s, &s).re.sqrt();
            let a = self.cos.apply(&self.sq.apply(&s));
            let b = self.sq.apply(&self.cos.apply(&s));
            let r = a.iter().zip(&b).map(|(x, y)| (x + y).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r / norm);
        }
        worst
    }

    /// Centres `(x₁, x₁+L)` of two branches with `sq = +1` on the left and
    /// `−1` on the right, nearest the middle of the box.
    pub fn branch_centers(&self) -> (f64, f64) {
        let l = self.length;
        let mid = 0.5 * (self.grid.x_min() + self.grid.x_max());
        let m = ((mid - l) / (2.0 * l)).round();
        let left = l / 2.0 + 2.0 * l * m;
        (left, left + l)
    }

    pub fn branches(&self, envelope: Envelope) -> Result<(WaveFunction, WaveFunction)> {
        let (a, b) = self.branch_centers();
        Ok((envelope.packet(&self.grid, a, 0.0, 0.0)?, envelope.packet(&self.grid, b, 0.0, 0.0)?))
    }

    /// `(ψ₁ + e^{iα}ψ₂)/√2` on the standard branches.
    pub fn phase_state(&self, envelope: Envelope, alpha: f64) -> Result<WaveFunction> {
        let (a, b) = self.branches(envelope)?;
        superpose(c(1.0, 0.0), &a, Complex64::from_polar(1.0, alpha), &b, true)
    }

    /// `(σ₁cos α + σ₂sin α)`.
    pub fn phase_operator(&self, alpha: f64) -> Result<LinearOperator> {
        LinearOperator::sum(vec![
            (c(alpha.cos(), 0.0), self.sigma[0].clone()),
            (c(alpha.sin(), 0.0), self.sigma[1].clone()),
        ])
    }

    /// `‖(σ₁cos α + σ₂sin α)Ψ_β − Ψ_β‖`.
    pub fn phase_residual(&self, envelope: Envelope, alpha: f64, beta: f64) -> Result<f64> {
        let psi = self.phase_state(envelope, beta)?;
        let image = self.phase_operator(alpha)?.apply(psi.amplitudes());
        let diff: Vec<Complex64> = image.iter().zip(psi.amplitudes()).map(|(a, b)| a - b).collect();
        Ok((inner_raw(&diff, &diff).re * self.grid.dx()).sqrt())
    }

    /// Checks that `Ψ_α` is an eigenstate of `σ₁cos α + σ₂sin α` with
    /// eigenvalue 1.
    pub fn phase_deterministic_check(&self, envelope: Envelope, alpha: f64) -> Result<PhaseCheck> {
        let psi = self.phase_state(envelope, alpha)?;
        let image = self.phase_operator(alpha)?.apply(psi.amplitudes());
        let dx = self.grid.dx();
        let eigenvalue = inner_raw(psi.amplitudes(), &image) * dx;
        let diff: Vec<Complex64> = image.iter().zip(psi.amplitudes()).map(|(a, b)| a - b).collect();
        Ok(PhaseCheck {
            alpha,
            eigenvalue,
            residual: (inner_raw(&diff, &diff).re * dx).sqrt(),
        })
    }

    /// 2×2 restrictions onto `span{left, right}` (orthonormalized in that
    /// order).
    pub fn restrict_to(&self, left: &WaveFunction, right: &WaveFunction) -> Result<SubspaceAlgebra> {
        if left.grid() != &self.grid || right.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let dx = self.grid.dx();
        let e1 = left.normalized()?;
        let overlap = e1.inner(right)?;
        let rest: Vec<Complex64> = right
            .amplitudes()
            .iter()
            .zip(e1.amplitudes())
            .map(|(b, a)| b - overlap * a)
            .collect();
        let e2 = WaveFunction::new(self.grid.clone(), rest)?.normalized()?;
        let basis = [e1.amplitudes().to_vec(), e2.amplitudes().to_vec()];

        let mut sigma = [Matrix2::<Complex64>::zeros(); 3];
        let mut leakage = [0.0f64; 3];
        for (s, op) in self.sigma.iter().enumerate() {
            for (j, ej) in basis.iter().enumerate() {
                let image = op.apply(ej);
                let mut inside = image.clone();
                for (i, ei) in basis.iter().enumerate() {
                    let m = inner_raw(ei, &image) * dx;
                    sigma[s][(i, j)] = m;
                    for (o, e) in inside.iter_mut().zip(ei) {
                        *o -= m * e;
                    }
                }
                let out = (inner_raw(&inside, &inside).re * dx).sqrt();
                leakage[s] = leakage[s].max(out);
            }
        }
        Ok(SubspaceAlgebra::new(sigma, leakage, overlap.norm()))
    }
}

/// Result of the relative-phase eigen-check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseCheck {
    pub alpha: f64,
    pub eigenvalue: Complex64,
    pub residual: f64,
}

/// The σ trio restricted to a two-dimensional subspace.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceAlgebra {
    pub sigma: [[[Complex64; 2]; 2]; 3],
    /// Norm of the part of `σ_i e_j` leaving the subspace, max over `j`.
    pub leakage: [f64; 3],
    /// `|⟨left|right⟩|` of the normalized inputs.
    pub branch_overlap: f64,
    pub hermiticity_residual: f64,
    /// `max_i ‖σ_i² − 1‖`.
    pub involution_residual: f64,
    /// `max ‖[σ_i, σ_j] − 2iε_{ijk}σ_k‖` over cyclic `(i, j, k)`.
    pub commutator_residual: f64,
}

fn max_abs(m: &Matrix2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl SubspaceAlgebra {
    fn new(m: [Matrix2<Complex64>; 3], leakage: [f64; 3], branch_overlap: f64) -> Self {
        let id = Matrix2::<Complex64>::identity();
        let two_i = c(0.0, 2.0);
        let herm = m.iter().map(|s| max_abs(&(s - s.adjoint()))).fold(0.0, f64::max);
        let inv = m.iter().map(|s| max_abs(&(s * s - id))).fold(0.0, f64::max);
        let comm = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
            .iter()
            .map(|&(i, j, k)| max_abs(&(m[i] * m[j] - m[j] * m[i] - m[k] * two_i)))
            .fold(0.0, f64::max);
        let arr = |s: &Matrix2<Complex64>| [[s[(0, 0)], s[(0, 1)]], [s[(1, 0)], s[(1, 1)]]];
        Self {
            sigma: [arr(&m[0]), arr(&m[1]), arr(&m[2])],
            leakage,
            branch_overlap,
            hermiticity_residual: herm,
            involution_residual: inv,
            commutator_residual: comm,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.hermiticity_residual
            .max(self.involution_residual)
            .max(self.commutator_residual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::dense_operator;
    use std::f64::consts::PI;

    fn grid(n: usize, half: f64) -> Grid {
        let dx = 2.0 * half / n as f64;
        Grid::new(n, -half + dx / 2.0, half + dx / 2.0, 1.0).unwrap()
    }

    #[test]
    fn construction_checks() {
        let g = Grid::new(256, -16.0, 16.0, 1.0).unwrap();
        assert!(matches!(SigmaTrio::new(&g, 4.0), Err(Error::NodeOnGrid { .. })));
        let g = grid(256, 16.0);
        assert!(SigmaTrio::new(&g, 4.0).is_ok());
        // 32 / 12 is not whole
        assert!(SigmaTrio::new(&grid(256, 16.0), 6.0).is_err());
    }

    #[test]
    fn cos_anticommutes_with_square_wave_dense() {
        let g = grid(128, 16.0);
        let t = SigmaTrio::new(&g, 4.0).unwrap();
        let cm = dense_operator(t.cos()).unwrap();
        let sm = dense_operator(t.square_wave()).unwrap();
        let anti = &cm * &sm + &sm * &cm;
        assert!(anti.iter().all(|z| z.norm() < 1e-14));
        assert!(t.anticommutator_residual(4, 11) < 1e-10);
        let s1 = dense_operator(t.sigma1()).unwrap();
        assert!((&s1 - s1.adjoint()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn literal_first_observable_is_not_hermitian() {
        let g = grid(128, 16.0);
        let t = SigmaTrio::new(&g, 4.0).unwrap();
        let lit = dense_operator(&t.literal_sigma1().unwrap()).unwrap();
        let anti = (&lit - lit.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(anti > 0.5, "{anti}");
    }

    #[test]
    fn two_packet_algebra_is_su2() {
        let g = grid(512, 32.0);
        let t = SigmaTrio::new(&g, 16.0).unwrap();
        let (a, b) = t.branches(Envelope::Bump { half_width: 7.0 }).unwrap();
        let alg = t.restrict_to(&a, &b).unwrap();
        assert!(alg.max_residual() < 1e-8, "{alg:?}");
        assert!(alg.leakage.iter().all(|&l| l < 1e-12), "{:?}", alg.leakage);
        // σ₃ on the left packet is deterministic with +1
        let s3 = t.sigma3().apply(a.amplitudes());
        assert!(s3.iter().zip(a.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-15));
    }

    #[test]
    fn relative_phase_is_deterministic() {
        let g = grid(512, 32.0);
        let t = SigmaTrio::new(&g, 16.0).unwrap();
        let env = Envelope::Bump { half_width: 7.0 };
        for k in 0..16 {
            let alpha = 2.0 * PI * k as f64 / 16.0;
            let r = t.phase_deterministic_check(env, alpha).unwrap();
            assert!(r.residual < 1e-6, "{alpha}: {}", r.residual);
            assert!((r.eigenvalue - 1.0).norm() < 1e-12);
        }
        let (alpha, beta) = (0.3, 1.0);
        let r = t.phase_residual(env, alpha, beta).unwrap();
        // 2×2: Ψ_β ↦ (e^{i(β−α)}, e^{iα})/√2
        let d = [Complex64::from_polar(1.0, beta - alpha) - 1.0, Complex64::from_polar(1.0, alpha) - Complex64::from_polar(1.0, beta)];
        let want = ((d[0].norm_sqr() + d[1].norm_sqr()) / 2.0).sqrt();
        assert!((r - want).abs() < 1e-12, "{r} vs {want}");
    }
}
