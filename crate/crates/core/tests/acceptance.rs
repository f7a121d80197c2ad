//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use modqm::detops::{deterministic_basis, FiniteState, SigmaTrio};
use modqm::modular::{
    classical_modular_drift, complete_uncertainty_check, eom_residual, folded_distribution, mod_expect,
    modular_trace, polynomial_phase_insensitivity, ClassicalEnsemble, ModularSpec, Ordering,
};
use modqm::qcore::{bump_packet, superpose, Envelope, Grid, Hamiltonian, LinearOperator, Potential, WaveFunction};
use modqm::tsvf::{
    build_experiment, estimate_fringe_shift, fringe_spacing, two_time_density, weak_value, ExperimentSpec,
    TwoStateVector, Window,
};

type Check = Result<(bool, String), String>;

fn c1() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn wrap(a: f64) -> f64 {
    let a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn modular_expectation() -> Check {
    let start = Instant::now();
    // dx = 0.1, L = 200 dx
    let grid = Grid::new(1000, -50.0, 50.0, 1.0).map_err(err)?;
    let length = 20.0;
    let spec = ModularSpec::new(&grid, length).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut worst_bump: f64 = 0.0;
    for phi in [0.0, PI / 2.0, PI, 1.234] {
        for (env, slot) in [
            (Envelope::Gaussian { sigma: length / 10.0 }, &mut worst),
            (Envelope::Bump { half_width: 0.45 * length }, &mut worst_bump),
        ] {
            let a = env.packet(&grid, -length / 2.0, 0.0, 0.0).map_err(err)?;
            let b = env.packet(&grid, length / 2.0, 0.0, 0.0).map_err(err)?;
            let psi = superpose(c1(), &a, Complex64::from_polar(1.0, phi), &b, true).map_err(err)?;
            let v = mod_expect(&psi, &spec, 1).map_err(err)?;
            *slot = slot.max((v - Complex64::from_polar(0.5, phi)).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-6 && secs < 1.0,
        format!("gaussian max|err| = {worst:.3e} (tol 1e-6), bump max|err| = {worst_bump:.3e}, {secs:.2}s"),
    ))
}

fn fringe_pattern() -> Check {
    let start = Instant::now();
    let spec = ExperimentSpec {
        phi: 1.0,
        ..ExperimentSpec::default()
    };
    let e = build_experiment(&spec).map_err(err)?;
    let xs = e.grid.positions();
    let rho = e.density_at_t();
    let env: Vec<f64> = e.envelope_at_t().iter().map(|v| 2.0 * v).collect();
    let reach = 2.0 * e.sigma_at_t().map_err(err)?;
    let idx: Vec<usize> = (0..xs.len()).filter(|&j| xs[j].abs() <= reach).collect();
    let cx: Vec<f64> = idx.iter().map(|&j| xs[j]).collect();
    let cv: Vec<f64> = idx.iter().map(|&j| rho[j]).collect();
    let ce: Vec<f64> = idx.iter().map(|&j| env[j]).collect();
    let normalized: Vec<f64> = cv.iter().zip(&ce).map(|(v, e)| v / e).collect();
    let spacing = fringe_spacing(&cx, &normalized).ok_or("no fringe maxima")?;
    let fringe = estimate_fringe_shift(&cx, &cv, &ce, None, spec.p0, spec.hbar).map_err(err)?;
    let period = PI * spec.hbar / spec.p0;
    let spacing_err = (spacing - period).abs() / period;
    let delta_ref = spec.hbar * spec.phi / spec.p0;
    let delta_err = (fringe.delta - delta_ref).abs() / delta_ref;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        spacing_err < 0.01 && delta_err < 0.01 && secs < 5.0,
        format!(
            "spacing rel err {spacing_err:.2e}; delta = {:.6} vs hbar*phi/p0 = {delta_ref:.6} (rel err {delta_err:.3}); \
             recovered phi = {:.6}; {secs:.2}s",
            fringe.delta, fringe.phase
        ),
    ))
}

fn complete_uncertainty() -> Check {
    let grid = Grid::new(1024, -32.0, 32.0, 1.0).map_err(err)?;
    let spec = ModularSpec::new(&grid, 4.0).map_err(err)?;
    let psi = bump_packet(&grid, 0.3, 1.9, 0.8, 0.0).map_err(err)?;
    let rep = complete_uncertainty_check(&psi, &spec, 10, 1e-10).map_err(err)?;
    let dev = folded_distribution(&psi, &spec, 16).map_err(err)?.max_uniform_deviation();
    Ok((
        rep.passed && dev < 1e-6,
        format!("max harmonic n=1..10 {:.3e} (tol 1e-10), folded sup-dev {dev:.3e} (tol 1e-6)", rep.max_magnitude),
    ))
}

struct RemoteSetup {
    grid: Grid,
    spec: ModularSpec,
    psi: WaveFunction,
    barrier: Potential,
    harmonic: Potential,
}

fn remote_setup() -> Result<RemoteSetup, String> {
    let grid = Grid::new(1024, -48.0, 48.0, 1.0).map_err(err)?;
    let length = 24.0;
    let spec = ModularSpec::new(&grid, length).map_err(err)?;
    let env = Envelope::Gaussian { sigma: 1.0 };
    let a = env.packet(&grid, -length / 2.0, 0.0, 0.0).map_err(err)?;
    let b = env.packet(&grid, length / 2.0, 0.0, 0.0).map_err(err)?;
    let psi = superpose(c1(), &a, Complex64::from_polar(1.0, 0.4), &b, true).map_err(err)?;
    Ok(RemoteSetup {
        grid,
        spec,
        psi,
        barrier: Potential::Plateau {
            start: 2.0,
            end: 30.0,
            ramp: 4.0,
            height: 1.0,
        },
        harmonic: Potential::Harmonic {
            stiffness: 0.01,
            center: 2.0,
        },
    })
}

fn modular_eom() -> Check {
    let s = remote_setup()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, pot) in [("barrier", &s.barrier), ("harmonic", &s.harmonic)] {
        let h = Hamiltonian::new(&s.grid, 1.0, pot.clone()).map_err(err)?;
        let r1 = eom_residual(&s.psi, &h, &s.spec, 1e-4).map_err(err)?;
        let r2 = eom_residual(&s.psi, &h, &s.spec, 5e-5).map_err(err)?;
        let ratio = r1.residual / r2.residual;
        ok &= r1.residual < 1e-7 && (ratio - 4.0).abs() <= 0.8;
        parts.push(format!(
            "{name}: residual {:.3e}, ratio {ratio:.3}, rate |{:.3e}|",
            r1.residual,
            r1.commutator.norm()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn nonlocal_contrast() -> Check {
    let s = remote_setup()?;
    let h = Hamiltonian::new(&s.grid, 1.0, s.barrier.clone()).map_err(err)?;
    let (dt, steps) = (1e-3, 1000);
    let trace = modular_trace(&s.psi, &h, &s.spec, dt, steps, 10).map_err(err)?;
    let quantum = trace.iter().map(|p| (p.value - trace[0].value).norm()).fold(0.0, f64::max);
    let ens = ClassicalEnsemble::from_gaussian_packets(&[(-12.0, 0.0), (12.0, 0.0)], 1.0, 1.0, 1.0, 10_000, 42)
        .map_err(err)?;
    let classical = classical_modular_drift(&ens, &s.barrier, 24.0, 1.0, dt, steps).map_err(err)?;
    Ok((
        quantum > 0.1 && classical.max_drift < 1e-10,
        format!("quantum drift {quantum:.4} (> 0.1), classical drift {:.3e} (< 1e-10)", classical.max_drift),
    ))
}

fn polynomial_blindness() -> Check {
    let grid = Grid::new(1024, -32.0, 32.0, 1.0).map_err(err)?;
    let pairs = [(0.0, 1.0), (0.5, 2.5), (1.234, PI)];
    let mut worst: f64 = 0.0;
    for t in [0.0, 1.0] {
        for m in 0..=3 {
            for n in 0..=3 {
                let r = polynomial_phase_insensitivity(
                    &grid,
                    Envelope::Gaussian { sigma: 1.0 },
                    20.0,
                    m,
                    n,
                    &pairs,
                    t,
                    1.0,
                    Ordering::Weyl,
                )
                .map_err(err)?;
                worst = worst.max(r.max_deviation);
            }
        }
    }
    Ok((worst < 1e-8, format!("max |dev| over m,n <= 3, t in {{0, 1}}: {worst:.3e} (tol 1e-8)")))
}

fn deterministic_sets() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for dim in 2..=6usize {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        rng.set_stream(dim as u64);
        let mut eig: f64 = 0.0;
        let mut comm: f64 = 0.0;
        let mut counts_ok = true;
        let mut count = 0;
        for _ in 0..100 {
            let state = FiniteState::random(dim, &mut rng).map_err(err)?;
            let r = deterministic_basis(&state).map_err(err)?.report();
            count = r.count;
            counts_ok &= r.count == (dim - 1).pow(2) + 1 && r.independent;
            eig = eig.max(r.max_eigen_residual);
            comm = comm.max(r.max_commutator_residual);
        }
        ok &= counts_ok && eig < 1e-10 && comm < 1e-10;
        parts.push(format!("d={dim}: count {count}, eig {eig:.1e}, comm {comm:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn sigma_algebra() -> Check {
    let dx = 64.0 / 512.0;
    let grid = Grid::new(512, -32.0 + dx / 2.0, 32.0 + dx / 2.0, 1.0).map_err(err)?;
    let trio = SigmaTrio::new(&grid, 16.0).map_err(err)?;
    let env = Envelope::Bump { half_width: 7.0 };
    let (left, right) = trio.branches(env).map_err(err)?;
    let algebra = trio.restrict_to(&left, &right).map_err(err)?;
    let mut phase: f64 = 0.0;
    for k in 0..16 {
        let c = trio.phase_deterministic_check(env, 2.0 * PI * k as f64 / 16.0).map_err(err)?;
        phase = phase.max(c.residual);
    }
    let anti = trio.anticommutator_residual(8, 42);
    let comm = algebra.commutator_residual.max(algebra.max_residual());
    Ok((
        comm < 1e-8 && phase < 1e-6 && anti < 1e-10,
        format!("commutators {comm:.3e} (1e-8), alpha sweep {phase:.3e} (1e-6), anticommutator {anti:.3e} (1e-10)"),
    ))
}

fn run_cli(dir: &Path, extra: &[&str]) -> Result<i32, String> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_modqm"))
        .args(["weak-ensemble", "--threads", "1", "--out"])
        .arg(dir)
        .args(extra)
        .output()
        .map_err(err)?;
    out.status.code().ok_or_else(|| "killed by signal".to_string())
}

fn weak_ensemble(dir: &Path) -> Check {
    let start = Instant::now();
    let code = run_cli(dir, &["--seed", "42"])?;
    let secs = start.elapsed().as_secs_f64();
    let text = std::fs::read_to_string(dir.join("weak_ensemble.json")).map_err(err)?;
    let v: Value = serde_json::from_str(&text).map_err(err)?;
    let get = |k: &str| v[k].as_f64().ok_or(format!("missing {k}"));
    let rate = get("post_selection_rate")?;
    let chi2 = get("chi2_per_dof")?;
    let phi = get("recovered_phi")?;
    let phi_std = get("phi_std")?;
    let phi_err = wrap(phi - 1.0).abs();
    let ok = (rate - 0.5).abs() <= 0.005 && (0.5..=2.0).contains(&chi2) && phi_err <= 0.05 && secs < 300.0;
    Ok((
        ok,
        format!(
            "rate {rate:.5} (0.5 +- 0.005), chi2/dof {chi2:.3} ([0.5, 2]), phi {phi:.4} err {phi_err:.4} (0.05; \
             statistical std {phi_std:.3}), exit {code}, {secs:.1}s"
        ),
    ))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

fn weak_value_laws() -> Check {
    let grid = Grid::new(64, -8.0, 8.0, 1.0).map_err(err)?;
    let dx = grid.dx();
    let n = grid.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut identity: f64 = 0.0;
    let mut eigen: f64 = 0.0;
    let mut completeness: f64 = 0.0;
    let mut pointwise: f64 = 0.0;
    for _ in 0..20 {
        let pre = WaveFunction::new(grid.clone(), random_vector(&mut rng, n)).map_err(err)?.normalized().map_err(err)?;
        let post = WaveFunction::new(grid.clone(), random_vector(&mut rng, n)).map_err(err)?.normalized().map_err(err)?;
        let tsv = TwoStateVector::new(&pre, &post).map_err(err)?;
        identity = identity.max((weak_value(&tsv, &LinearOperator::identity(&grid)).map_err(err)? - 1.0).norm());

        // a|pre><pre| + Q M Q with Q the complement
        let v = nalgebra::DVector::from_vec(pre.amplitudes().to_vec());
        let p = &v * v.adjoint() * Complex64::new(dx, 0.0);
        let q = DMatrix::<Complex64>::identity(n, n) - &p;
        let r = DMatrix::from_vec(n, n, random_vector(&mut rng, n * n));
        let m = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let a = 1.7;
        let op = p * Complex64::new(a, 0.0) + &q * m * &q;
        let op = LinearOperator::dense(op).map_err(err)?;
        eigen = eigen.max((weak_value(&tsv, &op).map_err(err)? - a).norm());

        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..8 {
            let w = Window::new(&grid, 8 * k, 8 * k + 8).map_err(err)?;
            total += weak_value(&tsv, &w.projector(&grid)).map_err(err)?;
        }
        completeness = completeness.max((total - 1.0).norm());

        let rho = two_time_density(&tsv);
        for (j, r) in rho.iter().enumerate() {
            let w = Window::new(&grid, j, j + 1).map_err(err)?;
            let wv = weak_value(&tsv, &w.projector(&grid)).map_err(err)?;
            pointwise = pointwise.max((wv - r * dx).norm());
        }
    }
    Ok((
        identity < 1e-12 && eigen < 1e-10 && completeness < 1e-10 && pointwise < 1e-12,
        format!(
            "identity {identity:.1e}, eigenoperator {eigen:.1e}, completeness {completeness:.1e}, \
             density vs projectors {pointwise:.1e}"
        ),
    ))
}

fn spread_bound() -> Check {
    let grid = Grid::new(1024, -32.0, 32.0, 1.0).map_err(err)?;
    let length = 4.0;
    let spec = ModularSpec::new(&grid, length).map_err(err)?;
    let bound = grid.hbar() / length;
    let mut tested = 0;
    let mut min_ratio = f64::INFINITY;
    let mut ok = true;
    for i in 0..24 {
        let half = 0.4 + 1.55 * i as f64 / 23.0;
        let center = -6.0 + 0.5 * i as f64;
        let momentum = -3.0 + 0.25 * i as f64;
        let psi = bump_packet(&grid, center, half, momentum, 0.0).map_err(err)?;
        if !complete_uncertainty_check(&psi, &spec, 10, 1e-8).map_err(err)?.passed {
            continue;
        }
        tested += 1;
        let (_, dp) = psi.momentum_moments().map_err(err)?;
        ok &= dp >= bound;
        min_ratio = min_ratio.min(dp / bound);
    }
    Ok((
        ok && tested >= 20,
        format!("{tested} completely uncertain states, min dp/(hbar/L) = {min_ratio:.3}"),
    ))
}

fn determinism(first: &Path) -> Check {
    let second = tempfile::tempdir().map_err(err)?;
    run_cli(second.path(), &["--seed", "42"])?;
    let mut names: Vec<_> = std::fs::read_dir(first)
        .map_err(err)?
        .filter_map(|e| e.ok().map(|e| e.file_name()))
        .collect();
    names.sort();
    let mut same = !names.is_empty();
    for name in &names {
        let a = std::fs::read(first.join(name)).map_err(err)?;
        let b = std::fs::read(second.path().join(name)).map_err(err)?;
        same &= a == b;
    }
    Ok((same, format!("{} files compared byte for byte", names.len())))
}

fn main() {
    let scratch = tempfile::tempdir().expect("tempdir");
    let ensemble_dir = scratch.path().join("ensemble");
    let checks: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("modular_expectation", Box::new(modular_expectation)),
        ("fringe_pattern", Box::new(fringe_pattern)),
        ("complete_uncertainty", Box::new(complete_uncertainty)),
        ("modular_eom_residual", Box::new(modular_eom)),
        ("nonlocal_contrast", Box::new(nonlocal_contrast)),
        ("polynomial_phase_blindness", Box::new(polynomial_blindness)),
        ("deterministic_sets", Box::new(deterministic_sets)),
        ("sigma_algebra", Box::new(sigma_algebra)),
        ("weak_ensemble", Box::new(|| weak_ensemble(&ensemble_dir))),
        ("weak_value_laws", Box::new(weak_value_laws)),
        ("spread_bound", Box::new(spread_bound)),
        ("ensemble_determinism", Box::new(|| determinism(&ensemble_dir))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        match check() {
            Ok((true, detail)) => println!("PASS {name}: {detail}"),
            Ok((false, detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: error: {e}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
