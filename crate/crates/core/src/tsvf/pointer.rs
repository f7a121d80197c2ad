use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::TwoStateVector;
use crate::error::{Error, Result};
use crate::qcore::operator::random_test_states;
use crate::qcore::state::inner_raw;
use crate::qcore::LinearOperator;

const PROJECTOR_TOL: f64 = 1e-10;
const TABLE_NODES: usize = 4097;
const TABLE_HALF_WIDTH: f64 = 10.0;

/// Impulsive von Neumann pointer: `Π = 1` shifts a Gaussian pointer of
/// spread `sigma_q` (centred at 0) by exactly `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerModel {
    pub g: f64,
    pub sigma_q: f64,
}

impl PointerModel {
    pub const WEAK_RATIO: f64 = 0.5;

    pub fn new(g: f64, sigma_q: f64) -> Result<Self> {
        let m = Self { g, sigma_q };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_q.is_finite() && self.sigma_q > 0.0) {
            return Err(Error::param("sigma_q", format!("must be positive, got {}", self.sigma_q)));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::param("g", format!("must be non-negative, got {}", self.g)));
        }
        if self.g / self.sigma_q > Self::WEAK_RATIO {
            log::warn!(
                "coupling g/sigma_q = {} is outside the weak regime (<= {})",
                self.g / self.sigma_q,
                Self::WEAK_RATIO
            );
        }
        Ok(())
    }

    /// `e^{-g²/8σ²}`, the overlap of the shifted and unshifted pointers.
    pub fn shift_overlap(&self) -> f64 {
        (-self.g * self.g / (8.0 * self.sigma_q * self.sigma_q)).exp()
    }
}

/// Exact pointer law after coupling to `Π` and post-selecting: the joint
/// amplitude is `f(q) = a·χ(q) + b·χ(q−g)` with `a = ⟨post|pre⟩ − ⟨post|Π|pre⟩`,
/// `b = ⟨post|Π|pre⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct PointerDistribution {
    pub model: PointerModel,
    pub a: Complex64,
    pub b: Complex64,
    /// `∫|f|² dq`.
    pub probability: f64,
    /// Conditional mean reading.
    pub mean: f64,
    /// First-order reading `g·Re(b/(a+b))`.
    pub weak_mean: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

fn phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

impl PointerDistribution {
    pub fn from_elements(overlap: Complex64, element: Complex64, model: PointerModel) -> Result<Self> {
        model.validate()?;
        let a = overlap - element;
        let b = element;
        let g = model.g;
        let s = model.sigma_q;
        let cross = (a.conj() * b).re * model.shift_overlap();
        let probability = a.norm_sqr() + b.norm_sqr() + 2.0 * cross;
        if !(probability > 0.0) {
            return Err(Error::VanishingOverlap { overlap: probability.max(0.0).sqrt() });
        }
        let mean = (g * b.norm_sqr() + g * cross) / probability;
        let weak_mean = g * (b / overlap).re;

        let lo = g.min(0.0) - TABLE_HALF_WIDTH * s;
        let hi = g.max(0.0) + TABLE_HALF_WIDTH * s;
        let h = (hi - lo) / (TABLE_NODES - 1) as f64;
        let nodes: Vec<f64> = (0..TABLE_NODES).map(|i| lo + i as f64 * h).collect();
        let raw: Vec<f64> = nodes
            .iter()
            .map(|&q| a.norm_sqr() * phi(q / s) + b.norm_sqr() * phi((q - g) / s) + 2.0 * cross * phi((q - 0.5 * g) / s))
            .collect();
        let (first, last) = (raw[0], raw[TABLE_NODES - 1]);
        let mut cdf: Vec<f64> = raw.iter().map(|v| (v - first) / (last - first)).collect();
        // enforce monotonicity against roundoff
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        Ok(Self {
            model,
            a,
            b,
            probability,
            mean,
            weak_mean,
            nodes,
            cdf,
        })
    }

    /// Conditional density `|f(q)|² / ∫|f|²`.
    pub fn pdf(&self, q: f64) -> f64 {
        let s = self.model.sigma_q;
        let chi = |u: f64| (-u * u / (4.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).powf(0.25);
        let f = self.a * chi(q) + self.b * chi(q - self.model.g);
        f.norm_sqr() / self.probability
    }

    /// Tabulated pointer grid and its CDF.
    pub fn table(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.cdf)
    }

    /// Inverse-CDF sample for `u ∈ [0, 1)`, linear between table nodes.
    pub fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u);
        if i == 0 {
            return self.nodes[0];
        }
        if i >= self.cdf.len() {
            return self.nodes[self.nodes.len() - 1];
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (q0, q1) = (self.nodes[i - 1], self.nodes[i]);
        if c1 > c0 {
            q0 + (u - c0) / (c1 - c0) * (q1 - q0)
        } else {
            q0
        }
    }
}

/// Pointer law for a general projector; `projector` must be Hermitian and
/// idempotent.
pub fn pointer_distribution(
    tsv: &TwoStateVector,
    projector: &LinearOperator,
    model: PointerModel,
) -> Result<PointerDistribution> {
    let herm = projector.hermiticity_residual();
    if herm > PROJECTOR_TOL {
        return Err(Error::NotProjector { residual: herm });
    }
    let mut worst: f64 = 0.0;
    for v in random_test_states(projector.dim(), 3, 0x5eed) {
        let pv = projector.apply(&v);
        let ppv = projector.apply(&pv);
        let d: Vec<Complex64> = ppv.iter().zip(&pv).map(|(x, y)| x - y).collect();
        worst = worst.max(inner_raw(&d, &d).re.sqrt() / inner_raw(&v, &v).re.sqrt());
    }
    if worst > PROJECTOR_TOL {
        return Err(Error::NotProjector { residual: worst });
    }
    let image = projector.apply_to(tsv.pre())?;
    let element = tsv.post().inner(&image)?;
    PointerDistribution::from_elements(tsv.overlap(), element, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{gaussian_packet, Grid};
    use crate::tsvf::Window;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn moments(d: &PointerDistribution) -> (f64, f64) {
        // midpoint quadrature oracle
        let s = d.model.sigma_q;
        let (lo, hi) = (-12.0 * s, d.model.g + 12.0 * s);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for i in 0..n {
            let q = lo + (i as f64 + 0.5) * h;
            let p = d.pdf(q);
            m0 += p * h;
            m1 += q * p * h;
        }
        (m0, m1)
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let m = PointerModel::new(0.4, 1.0).unwrap();
        let d = PointerDistribution::from_elements(c(0.6, 0.2), c(0.1, -0.3), m).unwrap();
        let (m0, m1) = moments(&d);
        assert!((m0 - 1.0).abs() < 1e-9);
        assert!((m1 - d.mean).abs() < 1e-9);
        // sampling at CDF midpoints reproduces the mean
        let k = 20_000;
        let est: f64 = (0..k).map(|i| d.sample((i as f64 + 0.5) / k as f64)).sum::<f64>() / k as f64;
        assert!((est - d.mean).abs() < 1e-3, "{est} vs {}", d.mean);
    }

    #[test]
    fn limiting_cases() {
        let m = PointerModel::new(0.3, 1.0).unwrap();
        let none = PointerDistribution::from_elements(c(0.7, 0.0), c(0.0, 0.0), m).unwrap();
        assert_eq!(none.mean, 0.0);
        assert!((none.probability - 0.49).abs() < 1e-15);
        let full = PointerDistribution::from_elements(c(0.7, 0.1), c(0.7, 0.1), m).unwrap();
        assert!((full.mean - 0.3).abs() < 1e-15);
        assert!((full.pdf(0.3 + 0.2) - none.pdf(0.2)).abs() < 1e-14);
    }

    #[test]
    fn weak_limit_and_projector_check() {
        let g = Grid::new(256, -16.0, 16.0, 1.0).unwrap();
        let pre = gaussian_packet(&g, 0.0, 1.0, 1.0, 0.0).unwrap();
        let post = gaussian_packet(&g, 0.5, 1.5, 0.0, 0.0).unwrap();
        let tsv = TwoStateVector::new(&pre, &post).unwrap();
        let w = Window::new(&g, 120, 136).unwrap();
        let m = PointerModel::new(1e-4, 1.0).unwrap();
        let d = pointer_distribution(&tsv, &w.projector(&g), m).unwrap();
        assert!((d.mean - d.weak_mean).abs() < 1e-6 * m.g);
        let not_proj = w.projector(&g).scaled(c(2.0, 0.0));
        assert!(matches!(
            pointer_distribution(&tsv, &not_proj, m),
            Err(Error::NotProjector { .. })
        ));
        let eig = pointer_distribution(
            &TwoStateVector::new(&pre, &pre).unwrap(),
            &crate::qcore::LinearOperator::identity(&g),
            m,
        )
        .unwrap();
        assert!((eig.mean - m.g).abs() < 1e-15);
    }
}
