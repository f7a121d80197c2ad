//! Deterministic operators for random states: (d-1)^2 + 1 independent
//! Hermitian operators each having the state as an eigenvector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use modqm::detops::{deterministic_basis, is_deterministic, FiniteState};

fn main() -> modqm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in 2..=6 {
        let state = FiniteState::random(dim, &mut rng)?;
        let set = deterministic_basis(&state)?;
        let r = set.report();
        println!(
            "d = {dim}: {} operators, eigen residual {:.1e}, commutator residual {:.1e}, min Gram eigenvalue {:.3}",
            r.count, r.max_eigen_residual, r.max_commutator_residual, r.min_gram_eigenvalue
        );
        let (ok, value) = is_deterministic(&set.operators()[0], &state, 1e-10)?;
        println!("        first operator deterministic: {ok}, eigenvalue {value:?}");
    }
    Ok(())
}
