//! A plateau potential far from both packets changes the modular momentum
//! while a matched classical ensemble feels no force at all.

use num_complex::Complex64;

use modqm::modular::{classical_modular_drift, eom_residual, modular_trace, ClassicalEnsemble, ModularSpec};
use modqm::qcore::{superpose, Envelope, Grid, Hamiltonian, Potential};

fn main() -> modqm::Result<()> {
    let grid = Grid::new(1024, -48.0, 48.0, 1.0)?;
    let length = 24.0;
    let spec = ModularSpec::new(&grid, length)?;
    let env = Envelope::Gaussian { sigma: 1.0 };
    let a = env.packet(&grid, -12.0, 0.0, 0.0)?;
    let b = env.packet(&grid, 12.0, 0.0, 0.0)?;
    let psi = superpose(Complex64::new(1.0, 0.0), &a, Complex64::from_polar(1.0, 0.4), &b, true)?;
    let barrier = Potential::Plateau { start: 2.0, end: 30.0, ramp: 4.0, height: 1.0 };
    let h = Hamiltonian::new(&grid, 1.0, barrier.clone())?;

    for dt in [1e-4, 5e-5] {
        let r = eom_residual(&psi, &h, &spec, dt)?;
        println!("dt = {dt:.0e}: finite difference vs commutator residual {:.3e}", r.residual);
    }

    let (dt, steps) = (1e-3, 1000);
    let trace = modular_trace(&psi, &h, &spec, dt, steps, 100)?;
    let ens = ClassicalEnsemble::from_gaussian_packets(&[(-12.0, 0.0), (12.0, 0.0)], 1.0, 1.0, 1.0, 10_000, 1)?;
    let classical = classical_modular_drift(&ens, &barrier, length, 1.0, dt, steps)?;
    println!("{:>6} {:>12} {:>12}", "t", "|dq|", "|dc|");
    for (k, pt) in trace.iter().enumerate() {
        let i = (k * 100).min(classical.values.len() - 1);
        println!(
            "{:>6.2} {:>12.4e} {:>12.4e}",
            pt.t,
            (pt.value - trace[0].value).norm(),
            (classical.values[i] - classical.values[0]).norm()
        );
    }
    Ok(())
}
