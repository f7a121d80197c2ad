//! Pauli-like operators built from translations by L and the square wave
//! sign(sin(pi x/L)), acting on two separated branches.

use std::f64::consts::PI;

use modqm::detops::SigmaTrio;
use modqm::qcore::{Envelope, Grid};

fn main() -> modqm::Result<()> {
    let dx = 64.0 / 512.0;
    let grid = Grid::new(512, -32.0 + dx / 2.0, 32.0 + dx / 2.0, 1.0)?;
    let trio = SigmaTrio::new(&grid, 16.0)?;
    let env = Envelope::Bump { half_width: 7.0 };
    let (left, right) = trio.branches(env)?;
    let algebra = trio.restrict_to(&left, &right)?;
    for (k, s) in algebra.sigma.iter().enumerate() {
        println!("sigma{} on the branches: [[{:.3}, {:.3}], [{:.3}, {:.3}]]", k + 1, s[0][0], s[0][1], s[1][0], s[1][1]);
    }
    println!("largest algebra residual {:.2e}", algebra.max_residual());
    println!("anticommutator residual {:.2e}", trio.anticommutator_residual(4, 9));
    let literal = trio.literal_sigma1()?;
    println!("literal C - S*sq hermiticity residual {:.3}", literal.hermiticity_residual());
    for k in 0..8 {
        let alpha = 2.0 * PI * k as f64 / 8.0;
        let c = trio.phase_deterministic_check(env, alpha)?;
        println!("alpha = {alpha:.3}: eigenvalue {:.6}, residual {:.1e}", c.eigenvalue, c.residual);
    }
    println!("mismatched phase (0.3 vs 1.0) residual {:.6}", trio.phase_residual(env, 0.3, 1.0)?);
    Ok(())
}
