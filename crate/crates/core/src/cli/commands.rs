use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::Params;
use crate::detops::{deterministic_basis, FiniteState, SigmaTrio};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_json};
use crate::modular::{
    classical_modular_drift, complete_uncertainty_check, eom_residual, folded_distribution, mod_expect,
    modular_trace, spread_bound_check, ClassicalEnsemble, ModularSpec,
};
use crate::qcore::{superpose, Envelope, Grid, Hamiltonian, LinearOperator, Potential, WaveFunction};
use crate::tsvf::{
    build_experiment, default_windows, estimate_fringe_shift, fringe_spacing, run_ensemble, two_time_density,
    weak_value, EnsembleConfig, ExperimentSpec, PointerModel, TwoStateVector, Window,
};

pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn envelope(p: &mut Params, default_shape: &str, default_width: f64) -> Result<Envelope> {
    let shape = p.string("envelope", default_shape)?;
    let width = p.f64("sigma", default_width)?;
    match shape.as_str() {
        "gaussian" => Ok(Envelope::Gaussian { sigma: width }),
        "bump" => Ok(Envelope::Bump { half_width: width }),
        other => Err(Error::Config(format!("envelope must be gaussian or bump, got {other:?}"))),
    }
}

fn experiment_spec(p: &mut Params) -> Result<ExperimentSpec> {
    let d = ExperimentSpec::default();
    Ok(ExperimentSpec {
        n_points: p.usize("n_points", d.n_points)?,
        x_min: p.f64("x_min", d.x_min)?,
        x_max: p.f64("x_max", d.x_max)?,
        hbar: p.f64("hbar", d.hbar)?,
        envelope: envelope(p, "gaussian", d.envelope.width())?,
        length: p.f64("L", d.length)?,
        p0: p.f64("p0", d.p0)?,
        phi: p.f64("phi", d.phi)?,
        mass: p.f64("mass", d.mass)?,
    })
}

fn grid(p: &mut Params, n: usize, x_min: f64, x_max: f64) -> Result<Grid> {
    let n = p.usize("n_points", n)?;
    let x_min = p.f64("x_min", x_min)?;
    let x_max = p.f64("x_max", x_max)?;
    let hbar = p.f64("hbar", 1.0)?;
    Grid::new(n, x_min, x_max, hbar)
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

pub fn interfere(mut p: Params, out: &Path) -> Result<Outcome> {
    let spec = experiment_spec(&mut p)?;
    let spacing_tol = p.f64("spacing_tol", 0.01)?;
    let phi_tol = p.f64("phi_tol", 0.01)?;
    let span = p.f64("span_sigmas", 2.0)?;
    let config = p.finish()?;

    let e = build_experiment(&spec)?;
    let tsv = e.two_state()?;
    create_out(out)?;
    let xs = e.grid.positions();
    let rho0 = e.pre.density();
    let rho_t = e.density_at_t();
    let predicted = e.predicted_density();
    let env: Vec<f64> = e.envelope_at_t().iter().map(|v| 2.0 * v).collect();
    let rtt = two_time_density(&tsv);

    let f0 = out.join("interfere_density_t0.csv");
    write_csv(&f0, &["x", "density"], xs.iter().zip(&rho0).map(|(&x, &r)| [x, r]))?;
    let f1 = out.join("interfere_density_T.csv");
    write_csv(
        &f1,
        &["x", "density", "predicted", "envelope", "re_two_time", "im_two_time"],
        (0..xs.len()).map(|j| [xs[j], rho_t[j], predicted[j], env[j], rtt[j].re, rtt[j].im]),
    )?;

    let sigma_t = e.sigma_at_t()?;
    let central: Vec<usize> = (0..xs.len()).filter(|&j| xs[j].abs() <= span * sigma_t).collect();
    let cx: Vec<f64> = central.iter().map(|&j| xs[j]).collect();
    let cv: Vec<f64> = central.iter().map(|&j| rho_t[j]).collect();
    let ce: Vec<f64> = central.iter().map(|&j| env[j]).collect();
    let normalized: Vec<f64> = cv.iter().zip(&ce).map(|(v, e)| v / e).collect();
    let spacing = fringe_spacing(&cx, &normalized)
        .ok_or_else(|| Error::InsufficientSampling("fewer than two fringe maxima in the central region".into()))?;
    let fringe = estimate_fringe_shift(&cx, &cv, &ce, None, spec.p0, spec.hbar)?;
    let period = spec.fringe_period();
    let spacing_err = (spacing - period).abs() / period;
    let phi_err = wrap_angle(fringe.phase - spec.phi).abs();
    let passed = spacing_err <= spacing_tol && phi_err <= phi_tol;

    let f2 = out.join("interfere_metrics.json");
    write_json(
        &f2,
        &json!({
            "command": "interfere",
            "config": config,
            "meeting_time": e.meeting_time,
            "branch_overlap": e.branch_overlap,
            "hump_overlap": e.hump_overlap,
            "post_selection_probability": tsv.post_selection_probability(),
            "sigma_at_t": sigma_t,
            "fringe_period_expected": period,
            "fringe_spacing": spacing,
            "spacing_rel_error": spacing_err,
            "recovered_phi": fringe.phase,
            "phi_error": phi_err,
            "delta": fringe.delta,
            "delta_hbar_phi_over_p0": spec.hbar * spec.phi / spec.p0,
            "visibility": fringe.visibility,
            "passed": passed,
        }),
    )?;
    Ok(Outcome {
        passed,
        files: vec![f0, f1, f2],
    })
}

pub fn weak_ensemble(mut p: Params, out: &Path) -> Result<Outcome> {
    let spec = experiment_spec(&mut p)?;
    let g = p.f64("g", 0.1)?;
    let sigma_q = p.f64("sigma_q", 1.0)?;
    let trials = p.usize("trials", 200_000)?;
    let seed = p.u64("seed", 42)?;
    let per_period = p.usize("windows_per_period", 16)?;
    let span = p.f64("span_sigmas", 2.0)?;
    let phi_tol = p.f64("phi_tol", 0.05)?;
    let rate_tol = p.f64("rate_tol", 0.005)?;
    let chi2_min = p.f64("chi2_min", 0.5)?;
    let chi2_max = p.f64("chi2_max", 2.0)?;
    let config = p.finish()?;

    let pointer = PointerModel::new(g, sigma_q)?;
    let e = build_experiment(&spec)?;
    let tsv = e.two_state()?;
    let sigma_t = e.sigma_at_t()?;
    let windows = default_windows(&e.grid, 0.0, span * sigma_t, spec.fringe_period(), per_period)?;
    let cfg = EnsembleConfig {
        trials,
        windows: windows.clone(),
        seed,
    };
    let result = run_ensemble(&tsv, pointer, &cfg)?;

    let post_density = e.envelope_at_t();
    let env: Vec<f64> = windows
        .iter()
        .map(|w| g * post_density[w.lo..w.hi].iter().sum::<f64>() * e.grid.dx())
        .collect();
    let centers: Vec<f64> = result.windows.iter().map(|w| w.center).collect();
    let means: Vec<f64> = result.windows.iter().map(|w| w.mean_reading).collect();
    // inverse variances of mean/envelope
    let weights: Vec<f64> = result
        .windows
        .iter()
        .zip(&env)
        .map(|(w, e)| (e / w.std_error).powi(2))
        .collect();
    let fringe = if g > 0.0 {
        Some(estimate_fringe_shift(&centers, &means, &env, Some(&weights), spec.p0, spec.hbar)?)
    } else {
        None
    };
    let phi_err = fringe.map(|f| wrap_angle(f.phase - spec.phi).abs());
    let rate_ok = (result.post_selection_rate - 0.5).abs() <= rate_tol;
    let chi2_ok = result.chi2_per_dof >= chi2_min && result.chi2_per_dof <= chi2_max;
    let phi_ok = phi_err.is_some_and(|d| d <= phi_tol);
    let passed = rate_ok && chi2_ok && phi_ok;

    create_out(out)?;
    let f0 = out.join("weak_ensemble_histogram.csv");
    write_csv(
        &f0,
        &["center", "width", "trials", "post_selected", "mean_reading", "std_error", "exact_mean", "two_time_reference"],
        result.windows.iter().map(|w| {
            [
                w.center,
                w.width,
                w.trials as f64,
                w.post_selected as f64,
                w.mean_reading,
                w.std_error,
                w.exact_mean,
                w.weak_mean,
            ]
        }),
    )?;
    let f1 = out.join("weak_ensemble.json");
    write_json(
        &f1,
        &json!({
            "command": "weak-ensemble",
            "config": config,
            "experiment": spec,
            "pointer": pointer,
            "seed": seed,
            "n_windows": windows.len(),
            "trials_total": result.trials,
            "post_selected_total": result.post_selected,
            "post_selection_rate": result.post_selection_rate,
            "post_selection_probability": tsv.post_selection_probability(),
            "chi2_per_dof": result.chi2_per_dof,
            "chi2_exact_per_dof": result.chi2_exact_per_dof,
            "recovered_phi": fringe.map(|f| f.phase),
            "phi_error": phi_err,
            "phi_std": fringe.and_then(|f| f.phase_std),
            "delta": fringe.map(|f| f.delta),
            "checks": {"rate": rate_ok, "chi2": chi2_ok, "phi": phi_ok},
            "passed": passed,
            "windows": result.windows,
        }),
    )?;
    Ok(Outcome {
        passed,
        files: vec![f0, f1],
    })
}

pub fn modular(mut p: Params, out: &Path) -> Result<Outcome> {
    let grid = grid(&mut p, 1024, -48.0, 48.0)?;
    let length = p.f64("L", 24.0)?;
    let sigma = p.f64("sigma", 1.0)?;
    let phi = p.f64("phi", 0.4)?;
    let mass = p.f64("mass", 1.0)?;
    let n_max = p.usize("n_max", 2)? as i64;
    let loc_width = p.f64("localized_half_width", 0.45 * length)?;
    let loc_momentum = p.f64("localized_momentum", 0.3)?;
    let barrier = Potential::Plateau {
        start: p.f64("barrier_start", 2.0)?,
        end: p.f64("barrier_end", 30.0)?,
        ramp: p.f64("barrier_ramp", 4.0)?,
        height: p.f64("barrier_height", 1.0)?,
    };
    let harmonic = Potential::Harmonic {
        stiffness: p.f64("harmonic_stiffness", 0.01)?,
        center: p.f64("harmonic_center", 2.0)?,
    };
    let t_final = p.f64("t_final", 1.0)?;
    let dt = p.f64("dt", 1e-3)?;
    let record_every = p.usize("record_every", 10)?;
    let eom_dt = p.f64("eom_dt", 1e-4)?;
    let particles = p.usize("classical_particles", 20_000)?;
    let seed = p.u64("seed", 42)?;
    let eq5_tol = p.f64("eq5_tol", 1e-6)?;
    let harmonic_tol = p.f64("harmonic_tol", 1e-10)?;
    let uniform_tol = p.f64("uniform_tol", 1e-6)?;
    let eom_tol = p.f64("eom_tol", 1e-7)?;
    let ratio_tol = p.f64("ratio_tol", 0.2)?;
    let quantum_min = p.f64("quantum_drift_min", 0.1)?;
    let classical_max = p.f64("classical_drift_max", 1e-10)?;
    let config = p.finish()?;
    if !(dt > 0.0 && t_final > 0.0) {
        return Err(Error::Config("dt and t_final must be positive".into()));
    }

    let spec = ModularSpec::new(&grid, length)?;
    let hbar = grid.hbar();
    let env = Envelope::Gaussian { sigma };
    let a = env.packet(&grid, -length / 2.0, 0.0, 0.0)?;
    let b = env.packet(&grid, length / 2.0, 0.0, 0.0)?;
    let two = superpose(Complex64::new(1.0, 0.0), &a, Complex64::from_polar(1.0, phi), &b, true)?;
    let harmonics: Vec<(i64, Complex64)> = (1..=n_max)
        .map(|n| mod_expect(&two, &spec, n).map(|v| (n, v)))
        .collect::<Result<_>>()?;
    let eq5_err = (harmonics[0].1 - Complex64::from_polar(0.5, phi)).norm();

    let localized = Envelope::Bump { half_width: loc_width }.packet(&grid, 0.0, loc_momentum, 0.0)?;
    let cu = complete_uncertainty_check(&localized, &spec, spec.residues() as i64 - 1, harmonic_tol)?;
    let folded = folded_distribution(&localized, &spec, spec.residues())?;
    let uniform_dev = folded.max_uniform_deviation();
    let spread = spread_bound_check(&localized, &spec)?;

    let h_barrier = Hamiltonian::new(&grid, mass, barrier.clone())?;
    let h_harm = Hamiltonian::new(&grid, mass, harmonic)?;
    let eom = |h: &Hamiltonian| -> Result<(f64, f64)> {
        let r1 = eom_residual(&two, h, &spec, eom_dt)?.residual;
        let r2 = eom_residual(&two, h, &spec, eom_dt / 2.0)?.residual;
        Ok((r1, r1 / r2))
    };
    let (barrier_res, barrier_ratio) = eom(&h_barrier)?;
    let (harm_res, harm_ratio) = eom(&h_harm)?;

    let n_steps = (t_final / dt).round() as usize;
    let trace = modular_trace(&two, &h_barrier, &spec, dt, n_steps, record_every)?;
    let quantum_drift = trace.iter().map(|pt| (pt.value - trace[0].value).norm()).fold(0.0, f64::max);
    let ens = ClassicalEnsemble::from_gaussian_packets(
        &[(-length / 2.0, 0.0), (length / 2.0, 0.0)],
        sigma,
        hbar,
        mass,
        particles / 2,
        seed,
    )?;
    let classical = classical_modular_drift(&ens, &barrier, length, hbar, dt, n_steps)?;

    let ratio_ok = |r: f64| (r - 4.0).abs() <= 4.0 * ratio_tol;
    let checks = json!({
        "eq5": eq5_err < eq5_tol,
        "complete_uncertainty": cu.passed,
        "uniform_folded": uniform_dev < uniform_tol,
        "eom_barrier": barrier_res < eom_tol && ratio_ok(barrier_ratio),
        "eom_harmonic": harm_res < eom_tol && ratio_ok(harm_ratio),
        "quantum_drift": quantum_drift > quantum_min,
        "classical_drift": classical.max_drift < classical_max,
    });
    let passed = checks.as_object().is_some_and(|m| m.values().all(|v| v == &Value::Bool(true)));

    create_out(out)?;
    let f0 = out.join("modular_harmonics.csv");
    write_csv(
        &f0,
        &["n", "re", "im", "magnitude"],
        harmonics.iter().map(|(n, v)| [*n as f64, v.re, v.im, v.norm()]),
    )?;
    let f1 = out.join("modular_folded.csv");
    write_csv(
        &f1,
        &["bin_center", "mass"],
        folded.bin_centers().into_iter().zip(folded.masses.iter()).map(|(c, &m)| [c, m]),
    )?;
    let f2 = out.join("modular_eom_trace.csv");
    write_csv(
        &f2,
        &["t", "re", "im", "rate_re", "rate_im"],
        trace.iter().map(|pt| [pt.t, pt.value.re, pt.value.im, pt.rate.re, pt.rate.im]),
    )?;
    let f3 = out.join("modular_classical.csv");
    write_csv(
        &f3,
        &["t", "re", "im"],
        classical.times.iter().zip(&classical.values).step_by(record_every.max(1)).map(|(&t, v)| [t, v.re, v.im]),
    )?;
    let f4 = out.join("modular.json");
    write_json(
        &f4,
        &json!({
            "command": "modular",
            "config": config,
            "period": spec.period(),
            "residues": spec.residues(),
            "eq5_error": eq5_err,
            "complete_uncertainty": cu,
            "folded_max_deviation": uniform_dev,
            "spread_bound": spread,
            "eom": {
                "barrier_residual": barrier_res,
                "barrier_ratio": barrier_ratio,
                "harmonic_residual": harm_res,
                "harmonic_ratio": harm_ratio,
            },
            "quantum_drift": quantum_drift,
            "classical_drift": classical.max_drift,
            "checks": checks,
            "passed": passed,
        }),
    )?;
    Ok(Outcome {
        passed,
        files: vec![f0, f1, f2, f3, f4],
    })
}

pub fn detops(mut p: Params, out: &Path) -> Result<Outcome> {
    let dims_text = p.string("dims", "2,3,4,5,6")?;
    let states = p.usize("states", 100)?;
    let seed = p.u64("seed", 42)?;
    let dx = 64.0 / 512.0;
    let grid = grid(&mut p, 512, -32.0 + dx / 2.0, 32.0 + dx / 2.0)?;
    let length = p.f64("L", 16.0)?;
    let env = envelope(&mut p, "bump", 7.0)?;
    let alpha_points = p.usize("alpha_points", 16)?;
    let eigen_tol = p.f64("eigen_tol", 1e-10)?;
    let sigma_tol = p.f64("sigma_tol", 1e-8)?;
    let phase_tol = p.f64("phase_tol", 1e-6)?;
    let anti_tol = p.f64("anticommutator_tol", 1e-10)?;
    let config = p.finish()?;
    let dims: Vec<usize> = dims_text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("dims: cannot parse {dims_text:?}")))?;

    let mut sets = Vec::new();
    let mut sets_ok = true;
    for &dim in &dims {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(dim as u64);
        let mut worst = [0.0f64; 3];
        let mut min_gram = f64::INFINITY;
        let mut count = 0;
        for _ in 0..states {
            let s = FiniteState::random(dim, &mut rng)?;
            let r = deterministic_basis(&s)?.report();
            count = r.count;
            worst[0] = worst[0].max(r.max_eigen_residual);
            worst[1] = worst[1].max(r.max_commutator_residual);
            worst[2] = worst[2].max(r.max_closure_residual);
            min_gram = min_gram.min(r.min_gram_eigenvalue);
        }
        let expected = (dim - 1).pow(2) + 1;
        let ok = count == expected && worst[0] < eigen_tol && worst[1] < eigen_tol && min_gram > 1e-10;
        sets_ok &= ok;
        sets.push(json!({
            "dim": dim,
            "count": count,
            "expected_count": expected,
            "states": states,
            "max_eigen_residual": worst[0],
            "max_commutator_residual": worst[1],
            "max_closure_residual": worst[2],
            "min_gram_eigenvalue": min_gram,
            "passed": ok,
        }));
    }

    let trio = SigmaTrio::new(&grid, length)?;
    let (left, right) = trio.branches(env)?;
    let algebra = trio.restrict_to(&left, &right)?;
    let anti = trio.anticommutator_residual(8, seed);
    let sweep: Vec<_> = (0..alpha_points)
        .map(|k| trio.phase_deterministic_check(env, 2.0 * PI * k as f64 / alpha_points as f64))
        .collect::<Result<_>>()?;
    let worst_phase = sweep.iter().map(|c| c.residual).fold(0.0, f64::max);
    let mismatched: Vec<Value> = [(0.3, 1.0), (1.0, 2.5), (2.5, 0.3)]
        .iter()
        .map(|&(a, b)| {
            trio.phase_residual(env, a, b).map(|r| {
                json!({"alpha": a, "beta": b, "residual": r, "two_by_two": (2.0 * (1.0 - (a - b).cos())).sqrt()})
            })
        })
        .collect::<Result<_>>()?;
    let sigma_ok = algebra.max_residual() < sigma_tol && worst_phase < phase_tol && anti < anti_tol;
    let passed = sets_ok && sigma_ok;

    create_out(out)?;
    let f0 = out.join("detops_sets.json");
    write_json(&f0, &json!({"command": "detops", "config": config, "sets": sets, "passed": sets_ok}))?;
    let f1 = out.join("detops_sigma.json");
    write_json(
        &f1,
        &json!({
            "command": "detops",
            "config": config,
            "subspace": algebra,
            "anticommutator_residual": anti,
            "max_phase_residual": worst_phase,
            "mismatched_phase": mismatched,
            "passed": sigma_ok,
        }),
    )?;
    let f2 = out.join("detops_alpha_sweep.csv");
    write_csv(
        &f2,
        &["alpha", "residual", "eigenvalue_re", "eigenvalue_im"],
        sweep.iter().map(|c| [c.alpha, c.residual, c.eigenvalue.re, c.eigenvalue.im]),
    )?;
    Ok(Outcome {
        passed,
        files: vec![f0, f1, f2],
    })
}

fn read_state(path: &str, hbar: f64) -> Result<WaveFunction> {
    let file = File::open(path).map_err(|e| Error::Config(format!("cannot open {path}: {e}")))?;
    WaveFunction::read_csv(BufReader::new(file), hbar)
}

pub fn weak_value_cmd(mut p: Params, out: &Path) -> Result<Outcome> {
    let pre = p.optional_string("pre")?;
    let post = p.optional_string("post")?;
    let hbar = p.f64("hbar", 1.0)?;
    let operator = p.string("operator", "identity")?;
    let (lo, hi) = if operator == "window" {
        (p.usize("window_lo", 0)?, p.usize("window_hi", 0)?)
    } else {
        (0, 0)
    };
    let config = p.finish()?;
    let (pre, post) = match (pre, post) {
        (Some(a), Some(b)) => (read_state(&a, hbar)?, read_state(&b, hbar)?),
        _ => return Err(Error::Config("weak-value needs pre=PATH and post=PATH".into())),
    };
    let tsv = TwoStateVector::new(&pre, &post)?;
    let grid = tsv.grid().clone();
    let op = match operator.as_str() {
        "identity" => LinearOperator::identity(&grid),
        "position" => LinearOperator::position(&grid),
        "momentum" => LinearOperator::momentum(&grid),
        "window" => Window::new(&grid, lo, hi)?.projector(&grid),
        other => {
            return Err(Error::Config(format!(
                "operator must be identity, position, momentum or window, got {other:?}"
            )))
        }
    };
    let wv = weak_value(&tsv, &op)?;
    let rho = two_time_density(&tsv);

    create_out(out)?;
    let f0 = out.join("weak_value.json");
    write_json(
        &f0,
        &json!({
            "command": "weak-value",
            "config": config,
            "overlap": tsv.overlap(),
            "post_selection_probability": tsv.post_selection_probability(),
            "weak_value": wv,
        }),
    )?;
    let f1 = out.join("two_time_density.csv");
    let xs = grid.positions();
    write_csv(&f1, &["x", "re", "im"], xs.iter().zip(&rho).map(|(&x, r)| [x, r.re, r.im]))?;
    Ok(Outcome {
        passed: true,
        files: vec![f0, f1],
    })
}
