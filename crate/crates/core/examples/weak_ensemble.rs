//! Monte Carlo weak position measurements on a pre- and post-selected
//! ensemble. The mean pointer readings trace Re of the two-time density.

use modqm::tsvf::{
    build_experiment, default_windows, estimate_fringe_shift, run_ensemble, EnsembleConfig, ExperimentSpec,
    PointerModel,
};

fn main() -> modqm::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let spec = ExperimentSpec::default();
    let e = build_experiment(&spec)?;
    let tsv = e.two_state()?;
    let pointer = PointerModel::new(0.1, 1.0)?;
    let windows = default_windows(&e.grid, 0.0, 2.0 * e.sigma_at_t()?, spec.fringe_period(), 16)?;
    let result = run_ensemble(&tsv, pointer, &EnsembleConfig { trials, windows: windows.clone(), seed: 42 })?;
    println!(
        "{} windows x {trials} trials: post-selection rate {:.4}, chi2/dof {:.3}",
        windows.len(),
        result.post_selection_rate,
        result.chi2_per_dof
    );
    let post = e.envelope_at_t();
    let env: Vec<f64> = windows.iter().map(|w| 0.1 * post[w.lo..w.hi].iter().sum::<f64>() * e.grid.dx()).collect();
    let xs: Vec<f64> = result.windows.iter().map(|w| w.center).collect();
    let means: Vec<f64> = result.windows.iter().map(|w| w.mean_reading).collect();
    let weights: Vec<f64> = result.windows.iter().zip(&env).map(|(w, e)| (e / w.std_error).powi(2)).collect();
    let f = estimate_fringe_shift(&xs, &means, &env, Some(&weights), spec.p0, spec.hbar)?;
    println!("recovered phi {:.3} +- {:.3} (true {})", f.phase, f.phase_std.unwrap_or(f64::NAN), spec.phi);
    for w in result.windows.iter().step_by(8) {
        println!("x = {:>7.3}: mean {:>10.3e} +- {:.1e}, exact {:>10.3e}", w.center, w.mean_reading, w.std_error, w.exact_mean);
    }
    Ok(())
}
