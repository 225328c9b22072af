use num_complex::Complex64;
use qvdp::measurement::{run_measured_evolution, MeasurementSchedule};
use qvdp::sde_core::{limit_cycle_radius, Ensemble, IntegratorConfig, OscillatorParams, VdpModel};

fn noise_free_radius(p: OscillatorParams, a0: Complex64, dt: f64, t: f64) -> f64 {
    let mut ens = Ensemble::from_fn(1, 0, |_, _| a0).unwrap();
    ens.advance(&VdpModel::noise_free(p), dt, (t / dt).round() as u64);
    ens.states()[0].norm()
}

/// Euler–Maruyama shifts the attractor by O(dt); a two-step Richardson
/// extrapolation removes that term and exposes the continuous-time radius.
#[test]
fn attractor_radius_from_any_start() {
    let p = OscillatorParams::reference();
    let target = limit_cycle_radius(&p).unwrap() / 2.0;
    for a0 in [Complex64::new(1.0, 0.0), Complex64::new(0.05, -0.02), Complex64::from_polar(6.0, 2.0)] {
        let coarse = noise_free_radius(p, a0, 1e-4, 500.0);
        let fine = noise_free_radius(p, a0, 5e-5, 500.0);
        let extrapolated = 2.0 * fine - coarse;
        assert!((extrapolated - target).abs() < 1e-6, "{a0}: {extrapolated} vs {target}");
    }
}

#[test]
fn dashed_parameter_radius() {
    let p = OscillatorParams::new(1.0, 0.005, 0.01).unwrap();
    assert!((limit_cycle_radius(&p).unwrap() - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
    let coarse = noise_free_radius(p, Complex64::new(0.3, 0.0), 1e-4, 500.0);
    let fine = noise_free_radius(p, Complex64::new(0.3, 0.0), 5e-5, 500.0);
    assert!((2.0 * fine - coarse - 1.25f64.sqrt()).abs() < 1e-6);
}

/// Snapshots are taken before a collapse at the same step. Right after the
/// collapse every trajectory sits at the sampled point plus vacuum noise, so
/// the ensemble Q variance is back to 1.
#[test]
fn collapse_restores_coherent_width() {
    let p = OscillatorParams::reference();
    let sched = MeasurementSchedule::new(20.0, 20.0).unwrap();
    let cfg = IntegratorConfig::new(0.005, 100, 99);
    let center = Complex64::new(limit_cycle_radius(&p).unwrap() / 2.0, 0.0);
    let run = run_measured_evolution(&VdpModel::new(p), &sched, &cfg, center, 40_000, &[20.0]).unwrap();
    assert_eq!(run.collapses.len(), 1);
    let var_q = |s: &[Complex64]| {
        let n = s.len() as f64;
        let m = s.iter().map(|a| 2.0 * a.re).sum::<f64>() / n;
        s.iter().map(|a| (2.0 * a.re - m).powi(2)).sum::<f64>() / n
    };
    let before = var_q(&run.snapshots[0].states);
    let after = var_q(run.final_ensemble.states());
    assert!(before > 1.5, "phase diffusion widens the cloud, got {before}");
    // standard error of a sample variance: sqrt(2/N)
    assert!((after - 1.0).abs() < 5.0 * (2.0f64 / 40_000.0).sqrt(), "{after}");
}
