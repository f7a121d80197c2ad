//! Strang split-operator evolution in a harmonic well, checked against exact
//! diagonalisation on a small grid.

use modqm::qcore::{evolve, gaussian_packet, ExactPropagator, Grid, Hamiltonian, Potential};

fn main() -> modqm::Result<()> {
    let grid = Grid::new(256, -16.0, 16.0, 1.0)?;
    let h = Hamiltonian::new(&grid, 1.0, Potential::Harmonic { stiffness: 1.0, center: 0.0 })?;
    let psi = gaussian_packet(&grid, 2.0, 0.8, 0.5, 0.0)?;
    let exact = ExactPropagator::new(&h)?;
    let t = 2.0;
    let reference = exact.apply(&psi, t)?;

    println!("{:>8} {:>14}", "dt", "max |err|");
    for steps in [50usize, 100, 200, 400, 800] {
        let dt = t / steps as f64;
        let out = evolve(&psi, &h, dt, steps)?;
        let err = out
            .amplitudes()
            .iter()
            .zip(reference.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!("{dt:>8.4} {err:>14.4e}");
    }
    let (x, sx) = reference.position_moments()?;
    println!("<x>(T) = {x:.6}, sigma_x(T) = {sx:.6}");
    Ok(())
}
