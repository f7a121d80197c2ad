//! Modular-momentum harmonics of a two-packet state and of a single compact
//! packet, with the folded momentum distribution and the spread bound.

use num_complex::Complex64;

use modqm::modular::{complete_uncertainty_check, folded_distribution, mod_expect, spread_bound_check, ModularSpec};
use modqm::qcore::{bump_packet, superpose, Grid};

fn main() -> modqm::Result<()> {
    let grid = Grid::new(1024, -32.0, 32.0, 1.0)?;
    let spec = ModularSpec::new(&grid, 16.0)?;
    let a = bump_packet(&grid, -8.0, 6.0, 0.0, 0.0)?;
    let b = bump_packet(&grid, 8.0, 6.0, 0.0, 0.0)?;
    for phi in [0.0, 0.7, std::f64::consts::PI] {
        let psi = superpose(Complex64::new(1.0, 0.0), &a, Complex64::from_polar(1.0, phi), &b, true)?;
        let v = mod_expect(&psi, &spec, 1)?;
        println!("phi = {phi:.3}: <e^(ipL/hbar)> = {:.6} {:+.6}i, |.| = {:.6}, arg = {:.6}", v.re, v.im, v.norm(), v.arg());
    }

    let fine = ModularSpec::new(&grid, 4.0)?;
    let local = bump_packet(&grid, 0.0, 1.9, 0.6, 0.0)?;
    let report = complete_uncertainty_check(&local, &fine, 10, 1e-10)?;
    println!("compact packet: max harmonic n = 1..10 is {:.2e}", report.max_magnitude);
    let folded = folded_distribution(&local, &fine, 16)?;
    println!("folded distribution sup deviation from uniform: {:.2e}", folded.max_uniform_deviation());
    println!("spread bound: {:?}", spread_bound_check(&local, &fine)?);
    Ok(())
}
