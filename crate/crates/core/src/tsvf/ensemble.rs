use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PointerDistribution, PointerModel, TwoStateVector, Window};
use crate::error::{Error, Result};
use crate::qcore::Grid;

pub const MIN_STATISTICAL_TRIALS: usize = 1000;
pub const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Trials `M` per window.
    pub trials: usize,
    pub windows: Vec<Window>,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be positive"));
        }
        if self.windows.is_empty() {
            return Err(Error::param("windows", "no windows"));
        }
        let mut sorted = self.windows.clone();
        sorted.sort_by_key(|w| w.lo);
        for w in &sorted {
            Window::new(grid, w.lo, w.hi)?;
        }
        for pair in sorted.windows(2) {
            if pair[1].lo < pair[0].hi {
                return Err(Error::param(
                    "windows",
                    format!("windows {:?} and {:?} overlap", pair[0], pair[1]),
                ));
            }
        }
        if self.trials < MIN_STATISTICAL_TRIALS {
            log::warn!(
                "{} trials per window is below the statistical minimum of {MIN_STATISTICAL_TRIALS}",
                self.trials
            );
        }
        Ok(())
    }
}

/// Contiguous windows of `period / per_period` (rounded to whole cells),
/// covering `center ± half_span`.
pub fn default_windows(grid: &Grid, center: f64, half_span: f64, period: f64, per_period: usize) -> Result<Vec<Window>> {
    if per_period == 0 || !(period > 0.0) || !(half_span > 0.0) {
        return Err(Error::param("windows", "period, span and per_period must be positive"));
    }
    let cells = (period / per_period as f64 / grid.dx()).round() as usize;
    if cells == 0 {
        return Err(Error::InsufficientSampling(format!(
            "window width {} is below one grid cell {}",
            period / per_period as f64,
            grid.dx()
        )));
    }
    let width = cells as f64 * grid.dx();
    if ((period / per_period as f64) - width).abs() > 1e-9 * width {
        log::warn!("window width rounded to {width} (grid cells of {})", grid.dx());
    }
    let j0 = ((center - grid.x_min()) / grid.dx()).round() as i64;
    let count = (half_span / width).ceil() as i64;
    let mut out = Vec::with_capacity(2 * count as usize);
    for k in -count..count {
        let lo = j0 + k * cells as i64;
        let hi = lo + cells as i64;
        if lo < 0 || hi > grid.n_points() as i64 {
            return Err(Error::param("windows", "span exceeds the box"));
        }
        out.push(Window {
            lo: lo as usize,
            hi: hi as usize,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowStats {
    pub window: Window,
    pub center: f64,
    pub width: f64,
    pub trials: usize,
    pub post_selected: usize,
    pub mean_reading: f64,
    pub std_error: f64,
    /// Exact post-selection probability.
    pub probability: f64,
    /// Exact conditional mean reading.
    pub exact_mean: f64,
    /// `g·Re⟨Π⟩_w`, the two-time-density prediction.
    pub weak_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub seed: u64,
    pub pointer: PointerModel,
    pub windows: Vec<WindowStats>,
    pub trials: usize,
    pub post_selected: usize,
    pub post_selection_rate: f64,
    /// χ²/dof of the mean readings against `g·Re⟨Π⟩_w`.
    pub chi2_per_dof: f64,
    /// χ²/dof against the exact conditional means.
    pub chi2_exact_per_dof: f64,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn run_window(
    tsv: &TwoStateVector,
    pointer: PointerModel,
    window: Window,
    index: usize,
    trials: usize,
    seed: u64,
) -> Result<WindowStats> {
    let grid = tsv.grid();
    let element = tsv.window_element(&window);
    let dist = PointerDistribution::from_elements(tsv.overlap(), element, pointer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        // two draws per trial keep every trial on a fixed counter position
        let u_select = uniform(&mut rng);
        let u_read = uniform(&mut rng);
        if u_select < dist.probability {
            let q = dist.sample(u_read);
            n += 1;
            sum += q;
            sum_sq += q * q;
        }
    }
    let (mean, se) = if n > 1 {
        let mean = sum / n as f64;
        let var = (sum_sq - n as f64 * mean * mean) / (n - 1) as f64;
        (mean, (var.max(0.0) / n as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(WindowStats {
        window,
        center: window.center(grid),
        width: window.width(grid),
        trials,
        post_selected: n,
        mean_reading: mean,
        std_error: se,
        probability: dist.probability,
        exact_mean: dist.mean,
        weak_mean: dist.weak_mean,
    })
}

/// Monte Carlo of the weak-measurement protocol: in each window, each trial
/// is post-selected with the exact probability and, if kept, yields a pointer
/// reading drawn from the exact conditional law. Window `i` uses ChaCha8
/// stream `i` of `seed`; results do not depend on the thread count.
pub fn run_ensemble(tsv: &TwoStateVector, pointer: PointerModel, config: &EnsembleConfig) -> Result<EnsembleResult> {
    pointer.validate()?;
    config.validate(tsv.grid())?;
    let windows = config
        .windows
        .par_iter()
        .enumerate()
        .map(|(i, &w)| run_window(tsv, pointer, w, i, config.trials, config.seed))
        .collect::<Result<Vec<_>>>()?;

    let trials = windows.iter().map(|w| w.trials).sum::<usize>();
    let post_selected = windows.iter().map(|w| w.post_selected).sum::<usize>();
    let chi2 = |reference: fn(&WindowStats) -> f64| {
        let mut total = 0.0;
        let mut dof = 0usize;
        for w in &windows {
            if w.std_error > 0.0 {
                total += ((w.mean_reading - reference(w)) / w.std_error).powi(2);
                dof += 1;
            }
        }
        if dof == 0 {
            f64::NAN
        } else {
            total / dof as f64
        }
    };
    Ok(EnsembleResult {
        seed: config.seed,
        pointer,
        trials,
        post_selected,
        post_selection_rate: post_selected as f64 / trials as f64,
        chi2_per_dof: chi2(|w| w.weak_mean),
        chi2_exact_per_dof: chi2(|w| w.exact_mean),
        windows,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FringeEstimate {
    /// Phase `φ` of the fringe pattern `1 + cos(2p₀x/ħ − φ)`.
    pub phase: f64,
    /// Displacement of the maxima, `phase·ħ/(2p₀)`, folded into
    /// `(−πħ/2p₀, πħ/2p₀]`.
    pub delta: f64,
    /// Modulation depth `2|F|/Σ n_i`.
    pub visibility: f64,
    /// `√(2/Σw)/V`, the large-sample phase spread for inverse-variance
    /// weights.
    pub phase_std: Option<f64>,
}

/// For uniform samples whose spacing divides `period`, the central index
/// range spanning a whole number of periods; otherwise the full range.
fn whole_periods(xs: &[f64], period: f64) -> (usize, usize) {
    let n = xs.len();
    let step = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let uniform = xs.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < 1e-9 * step.abs());
    let per = period / step.abs();
    if !uniform || (per - per.round()).abs() > 1e-9 * per || per.round() < 1.0 {
        return (0, n);
    }
    let per = per.round() as usize;
    let keep = (n / per) * per;
    if keep == 0 {
        return (0, n);
    }
    let lo = (n - keep) / 2;
    (lo, lo + keep)
}

/// Single-frequency Fourier estimate of the fringe phase of `values`
/// divided by the fringe-free `envelope`, sampled at `xs`. Uniform samples
/// are trimmed symmetrically to a whole number of fringe periods. With
/// `weights` (inverse variances of the normalized values) the Fourier sum is
/// weighted and a phase standard deviation is reported.
pub fn estimate_fringe_shift(
    xs: &[f64],
    values: &[f64],
    envelope: &[f64],
    weights: Option<&[f64]>,
    p0: f64,
    hbar: f64,
) -> Result<FringeEstimate> {
    if xs.len() != values.len() || xs.len() != envelope.len() || weights.is_some_and(|w| w.len() != xs.len()) {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: values.len().min(envelope.len()),
        });
    }
    let period = std::f64::consts::PI * hbar / p0;
    if xs.len() < 2 {
        return Err(Error::InsufficientSampling("fewer than two samples".into()));
    }
    let max_step = xs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    if max_step * MIN_SAMPLES_PER_PERIOD > period * (1.0 + 1e-12) {
        return Err(Error::InsufficientSampling(format!(
            "sample spacing {max_step} gives fewer than {MIN_SAMPLES_PER_PERIOD} samples per fringe period {period}"
        )));
    }
    let (lo, hi) = whole_periods(xs, period);
    // (x, normalized value, weight)
    let samples: Vec<(f64, f64, f64)> = (lo..hi)
        .filter(|&i| envelope[i] > 0.0 && values[i].is_finite())
        .map(|i| (xs[i], values[i] / envelope[i], weights.map_or(1.0, |w| w[i])))
        .filter(|s| s.2.is_finite() && s.2 > 0.0)
        .collect();
    if samples.is_empty() {
        return Err(Error::InsufficientSampling("envelope vanishes at every sample".into()));
    }
    let total_w: f64 = samples.iter().map(|s| s.2).sum();
    let mean = samples.iter().map(|s| s.1 * s.2).sum::<f64>() / total_w;
    let k = 2.0 * p0 / hbar;
    let f: Complex64 = samples
        .iter()
        .map(|&(x, n, w)| w * (n - mean) * Complex64::from_polar(1.0, k * x))
        .sum();
    let phase = f.arg();
    let mut delta = phase / k;
    let half = period / 2.0;
    if delta <= -half {
        delta += period;
    } else if delta > half {
        delta -= period;
    }
    let visibility = 2.0 * f.norm() / (mean * total_w);
    Ok(FringeEstimate {
        phase,
        delta,
        visibility,
        phase_std: weights.map(|_| (2.0 / total_w).sqrt() / (visibility * mean)),
    })
}

/// Mean spacing between local maxima of `values` on a uniform grid `xs`
/// (parabolic peak refinement); `None` with fewer than two maxima.
pub fn fringe_spacing(xs: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len().min(xs.len());
    if n < 3 {
        return None;
    }
    let h = xs[1] - xs[0];
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let off = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            peaks.push(xs[i] + off * h);
        }
    }
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}
