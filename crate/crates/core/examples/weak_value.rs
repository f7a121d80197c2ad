//! Weak values and the two-time density for the interference setup, plus
//! phase blindness of polynomial moments.

use std::f64::consts::PI;

use modqm::modular::{polynomial_phase_insensitivity, Ordering};
use modqm::qcore::{Envelope, Grid, LinearOperator};
use modqm::tsvf::{build_experiment, two_time_density, weak_value, ExperimentSpec};

fn main() -> modqm::Result<()> {
    let e = build_experiment(&ExperimentSpec::default())?;
    let tsv = e.two_state()?;
    println!("post-selection probability {:.6}", tsv.post_selection_probability());
    println!("weak value of 1: {}", weak_value(&tsv, &LinearOperator::identity(&e.grid))?);
    println!("weak value of x: {:.6}", weak_value(&tsv, &LinearOperator::position(&e.grid))?);
    println!("weak value of p: {:.6}", weak_value(&tsv, &LinearOperator::momentum(&e.grid))?);
    let rho = two_time_density(&tsv);
    let xs = e.grid.positions();
    for j in (500..524).step_by(3) {
        println!("x = {:>7.3}: rho_tt = {:.4} {:+.4}i", xs[j], rho[j].re, rho[j].im);
    }

    let grid = Grid::new(1024, -32.0, 32.0, 1.0)?;
    for (m, n) in [(1, 1), (2, 1), (3, 3)] {
        let r = polynomial_phase_insensitivity(
            &grid,
            Envelope::Gaussian { sigma: 1.0 },
            20.0,
            m,
            n,
            &[(0.0, PI)],
            1.0,
            1.0,
            Ordering::Weyl,
        )?;
        println!("<x^{m} p^{n}> change between phases 0 and pi: {:.2e}", r.max_deviation);
    }
    Ok(())
}
