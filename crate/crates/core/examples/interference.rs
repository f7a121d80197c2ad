//! Two packets meeting at the midpoint: the density at the meeting time shows
//! fringes of period pi*hbar/p0 shifted by the relative phase.

use modqm::tsvf::{build_experiment, estimate_fringe_shift, fringe_spacing, ExperimentSpec};

fn main() -> modqm::Result<()> {
    for phi in [0.0, 1.0, 2.0] {
        let spec = ExperimentSpec { phi, ..ExperimentSpec::default() };
        let e = build_experiment(&spec)?;
        let xs = e.grid.positions();
        let rho = e.density_at_t();
        let env: Vec<f64> = e.envelope_at_t().iter().map(|v| 2.0 * v).collect();
        let reach = 2.0 * e.sigma_at_t()?;
        let idx: Vec<usize> = (0..xs.len()).filter(|&j| xs[j].abs() <= reach).collect();
        let cx: Vec<f64> = idx.iter().map(|&j| xs[j]).collect();
        let cv: Vec<f64> = idx.iter().map(|&j| rho[j]).collect();
        let ce: Vec<f64> = idx.iter().map(|&j| env[j]).collect();
        let flat: Vec<f64> = cv.iter().zip(&ce).map(|(v, e)| v / e).collect();
        let fringe = estimate_fringe_shift(&cx, &cv, &ce, None, spec.p0, spec.hbar)?;
        println!(
            "phi = {phi:.2}: T = {:.3}, spacing = {:.5} (pi*hbar/p0 = {:.5}), delta = {:.5}, recovered phi = {:.5}, visibility = {:.4}",
            e.meeting_time,
            fringe_spacing(&cx, &flat).unwrap_or(f64::NAN),
            spec.fringe_period(),
            fringe.delta,
            fringe.phase,
            fringe.visibility,
        );
    }
    Ok(())
}
