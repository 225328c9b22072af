//! Experiment drivers. Each returns its output files in memory; the runner
//! writes them.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;

use num_complex::Complex64;
use serde_json::json;

use super::config::{Experiment, ExperimentConfig};
use crate::coupled::{
    self, run_coupled, stationary_baseline, sync_measure, CoupledModel, CoupledParams, PhaseTrace, SyncResult,
    INITIAL_THETA_MINUS, SYNC_BINS,
};
use crate::error::{Error, Result};
use crate::fock::{
    dichotomic_project, survival_experiment, symmetric_axis, target_state, wigner_from_density, DensityMatrix,
    FockModel, Outcome, SurvivalCurve, SurvivalStart,
};
use crate::measurement::{run_measured_evolution_with_progress, MeasurementSchedule};
use crate::phase_space::{angles_of, circular_spread_of_angles, wigner_histogram, PhaseDistribution};
use crate::rng::derive_seed;
use crate::sde_core::{limit_cycle_radius, IntegratorConfig, OscillatorParams, VdpModel};
use crate::spectral::{critical_interval, fourier_q, peak_normalized, threshold_ratio, SpectralSeries};

/// Upper bound on the relaxation time of the Fock steady state.
const STEADY_MAX_TIME: f64 = 20_000.0;

/// One file produced by an experiment, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    fn csv(name: impl Into<String>, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Self {
        let mut bytes = Vec::new();
        write(&mut bytes).expect("writing to memory cannot fail");
        Self { name: name.into(), bytes }
    }

    fn json(name: impl Into<String>, value: &serde_json::Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        Self { name: name.into(), bytes }
    }
}

/// Stderr progress sink.
#[derive(Debug, Clone, Copy, Default)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    pub fn line(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("[qvdp] {}", msg.as_ref());
        }
    }
}

pub fn oscillator(cfg: &ExperimentConfig) -> Result<OscillatorParams> {
    OscillatorParams::new(cfg.f64("omega_m"), cfg.f64("kappa1"), cfg.f64("kappa2"))
}

pub fn coupled_params(cfg: &ExperimentConfig) -> Result<CoupledParams> {
    let w = cfg.f64("omega_m");
    CoupledParams::new(w, w - cfg.f64("delta_omega"), cfg.f64("kappa1"), cfg.f64("kappa2"), cfg.f64("mu"))
}

/// Whole steps per recording interval.
fn stride(record_dt: f64, dt: f64) -> Result<u64> {
    let k = (record_dt / dt).round();
    if !(k >= 1.0) || ((k * dt) - record_dt).abs() > 1e-9 * record_dt.max(1.0) {
        return Err(Error::Argument(format!("record_dt = {record_dt} is not a positive multiple of dt = {dt}")));
    }
    Ok(k as u64)
}

fn schedule(delta_t: f64, total_time: f64) -> Result<MeasurementSchedule> {
    if delta_t.is_infinite() {
        MeasurementSchedule::unmeasured(total_time)
    } else {
        MeasurementSchedule::new(delta_t, total_time)
    }
}

fn label(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

pub fn run(cfg: &ExperimentConfig, progress: Progress) -> Result<Vec<OutputFile>> {
    match cfg.experiment {
        Experiment::WignerPanels => wigner_panels(cfg, progress).map(|r| r.files),
        Experiment::ZenoSpectrum => zeno_spectrum(cfg, progress).map(|r| r.files),
        Experiment::ThresholdScan => threshold_scan(cfg, progress).map(|r| r.files),
        Experiment::DichotomicSurvival => dichotomic_survival(cfg, progress).map(|r| r.files),
        Experiment::CoupledSync => coupled_sync(cfg, progress).map(|r| r.files),
        Experiment::SyncScan => sync_scan(cfg, progress).map(|r| r.files),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSummary {
    pub delta_t: f64,
    pub time: f64,
    pub circular_spread: f64,
    pub mean_radius: f64,
}

pub struct WignerPanels {
    pub panels: Vec<PanelSummary>,
    pub files: Vec<OutputFile>,
}

/// Phase-space histograms for each measurement interval at each snapshot time.
pub fn wigner_panels(cfg: &ExperimentConfig, progress: Progress) -> Result<WignerPanels> {
    let params = oscillator(cfg)?;
    let model = VdpModel::new(params);
    let center = Complex64::new(limit_cycle_radius(&params)?, 0.0);
    let times = cfg.floats("times");
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let (h, extent, n_traj, dt) = (cfg.f64("h"), cfg.f64("extent"), cfg.usize("n_traj"), cfg.f64("dt"));
    let mut panels = Vec::new();
    let mut files = Vec::new();
    for (row, &delta_t) in cfg.floats("delta_ts").iter().enumerate() {
        let sched = schedule(delta_t, t_end)?;
        let icfg = IntegratorConfig::new(dt, stride(1.0, dt)?, derive_seed(cfg.u64("seed"), row as u64));
        progress.line(format!("wigner-panels: delta_t={} ({} measurements)", label(delta_t), sched.n()));
        let mut on_collapse = |rec: &crate::measurement::CollapseRecord<Complex64>| {
            progress.line(format!("  collapse at t={:.3}", rec.time));
        };
        let run = run_measured_evolution_with_progress(&model, &sched, &icfg, center, n_traj, times, Some(&mut on_collapse))?;
        for snap in &run.snapshots {
            let hist = wigner_histogram(&snap.states, h, extent)?;
            let name = format!("wigner_dt{}_t{}.csv", label(delta_t), label(snap.time.round()));
            let meta = [("delta_t", label(delta_t)), ("time", format!("{}", snap.time))];
            files.push(OutputFile::csv(name, |w| {
                for (k, v) in &meta {
                    writeln!(w, "# {k}={v}")?;
                }
                hist.write_csv(w)
            }));
            let n = snap.states.len() as f64;
            panels.push(PanelSummary {
                delta_t,
                time: snap.time,
                circular_spread: circular_spread_of_angles(&angles_of(&snap.states)),
                mean_radius: snap.states.iter().map(|a| a.norm()).sum::<f64>() / n,
            });
        }
    }
    files.push(OutputFile::csv("panels.csv", |w| {
        writeln!(w, "# kind=wigner_panel_summary")?;
        writeln!(w, "delta_t,time,circular_spread,mean_radius")?;
        for p in &panels {
            writeln!(w, "{},{:.6},{:.9},{:.9}", label(p.delta_t), p.time, p.circular_spread, p.mean_radius)?;
        }
        Ok(())
    }));
    Ok(WignerPanels { panels, files })
}

pub struct ZenoSpectrum {
    pub n_c: f64,
    /// `(n, spectrum)` in the order of `n_values`.
    pub spectra: Vec<(u64, SpectralSeries)>,
    pub files: Vec<OutputFile>,
}

/// Spectrum of the ensemble-mean quadrature for each measurement count.
pub fn zeno_spectrum(cfg: &ExperimentConfig, progress: Progress) -> Result<ZenoSpectrum> {
    let params = oscillator(cfg)?;
    let model = VdpModel::new(params);
    let center = Complex64::new(limit_cycle_radius(&params)?, 0.0);
    let (dt, total, record_dt) = (cfg.f64("dt"), cfg.f64("total_time"), cfg.f64("record_dt"));
    let crit = critical_interval(&params, total)?;
    let icfg = IntegratorConfig::new(dt, stride(record_dt, dt)?, cfg.u64("seed"));
    let mut spectra = Vec::new();
    for &n in cfg.ints("n_values") {
        progress.line(format!("zeno-spectrum: n={n}"));
        let sched = MeasurementSchedule::with_count(n, total)?;
        let run = run_measured_evolution_with_progress(&model, &sched, &icfg, center, cfg.usize("n_traj"), &[], None)?;
        spectra.push((n, fourier_q(&run.mean_q(), record_dt)?));
    }
    let r = limit_cycle_radius(&params)?;
    let spectrum = OutputFile::csv("spectrum.csv", |w| {
        writeln!(w, "# kind=zeno_spectrum")?;
        writeln!(w, "# total_time={total}")?;
        writeln!(w, "n,omega,magnitude")?;
        for (n, s) in &spectra {
            for (o, m) in s.frequencies.iter().zip(&s.magnitudes) {
                writeln!(w, "{n},{o:.9},{m:.9e}")?;
            }
        }
        Ok(())
    });
    let peaks = OutputFile::csv("peaks.csv", |w| {
        writeln!(w, "# kind=zeno_peaks")?;
        writeln!(w, "# n_c={:.6}", crit.n_c)?;
        writeln!(w, "# delta_t_c={:.9}", crit.delta_t_c)?;
        writeln!(w, "n,peak,peak_normalized")?;
        for (n, s) in &spectra {
            let peak = s.magnitude_at(params.omega_m);
            writeln!(w, "{n},{peak:.9e},{:.9e}", peak / r)?;
        }
        Ok(())
    });
    Ok(ZenoSpectrum { n_c: crit.n_c, spectra, files: vec![spectrum, peaks] })
}

/// `(κ2/κ1, mean Q_n, standard deviation of Q_n)`.
pub type ThresholdPoint = (f64, f64, f64);

pub struct ThresholdScan {
    pub threshold: f64,
    pub points: Vec<ThresholdPoint>,
    pub files: Vec<OutputFile>,
}

/// Normalized single-trajectory peak at `ω_m` against `κ2/κ1` for a fixed
/// measurement interval.
pub fn threshold_scan(cfg: &ExperimentConfig, progress: Progress) -> Result<ThresholdScan> {
    let base = oscillator(cfg)?;
    let (dt, delta_t, total, record_dt) = (cfg.f64("dt"), cfg.f64("delta_t"), cfg.f64("total_time"), cfg.f64("record_dt"));
    let threshold = threshold_ratio(base.omega_m, delta_t)?;
    let sched = MeasurementSchedule::new(delta_t, total)?;
    let repeats = cfg.u64("repeats").max(1);
    let mut points = Vec::new();
    for (i, &ratio) in cfg.floats("ratios").iter().enumerate() {
        progress.line(format!("threshold-scan: kappa2/kappa1={ratio:e}"));
        let params = OscillatorParams::new(base.omega_m, base.kappa1, ratio * base.kappa1)?;
        let model = VdpModel::new(params);
        let center = Complex64::new(limit_cycle_radius(&params)?, 0.0);
        let mut q = Vec::with_capacity(repeats as usize);
        for rep in 0..repeats {
            let seed = derive_seed(derive_seed(cfg.u64("seed"), i as u64), rep);
            let icfg = IntegratorConfig::new(dt, stride(record_dt, dt)?, seed);
            let run = run_measured_evolution_with_progress(&model, &sched, &icfg, center, 1, &[], None)?;
            q.push(peak_normalized(&fourier_q(&run.mean_q(), record_dt)?, &params)?);
        }
        let m = q.len() as f64;
        let mean = q.iter().sum::<f64>() / m;
        let sd = if q.len() > 1 { (q.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt() } else { 0.0 };
        points.push((ratio, mean, sd));
    }
    let file = OutputFile::csv("scan.csv", |w| {
        writeln!(w, "# kind=threshold_scan")?;
        writeln!(w, "# delta_t={delta_t}")?;
        writeln!(w, "# threshold_ratio={threshold:.9e}")?;
        writeln!(w, "kappa_ratio,q_n,q_n_std")?;
        for (r, m, s) in &points {
            writeln!(w, "{r:.9e},{m:.9e},{s:.9e}")?;
        }
        Ok(())
    });
    Ok(ThresholdScan { threshold, points, files: vec![file] })
}

pub struct DichotomicSurvival {
    pub steady: DensityMatrix,
    pub coherent: SurvivalCurve,
    pub complement: SurvivalCurve,
    /// `(start, n, P_t1)` at `total_time`.
    pub stay: Vec<(SurvivalStart, u64, f64)>,
    pub wigner_min: f64,
    pub files: Vec<OutputFile>,
}

fn start_label(s: SurvivalStart) -> &'static str {
    match s {
        SurvivalStart::Coherent => "m1",
        SurvivalStart::Complement => "m2",
    }
}

/// Survival curves after each dichotomic outcome, stay probabilities under
/// `n` repeated measurements and the Wigner function after the complement
/// outcome.
pub fn dichotomic_survival(cfg: &ExperimentConfig, progress: Progress) -> Result<DichotomicSurvival> {
    let params = oscillator(cfg)?;
    let model = FockModel::new(params, cfg.usize("dim"))?;
    let fock_dt = cfg.f64("fock_dt");
    let total = cfg.f64("total_time");
    progress.line("dichotomic-survival: relaxing to the steady state");
    let steady = model.steady_state(cfg.f64("steady_dt"), STEADY_MAX_TIME)?;
    let stay_grid: Vec<f64> = cfg.ints("n_values").iter().map(|&n| total / n as f64).collect();
    let mut curves = Vec::new();
    let mut stay = Vec::new();
    for start in [SurvivalStart::Coherent, SurvivalStart::Complement] {
        progress.line(format!("dichotomic-survival: survival from {}", start_label(start)));
        curves.push(survival_experiment(&model, &steady, start, cfg.floats("delta_ts"), fock_dt)?);
        let at_n = survival_experiment(&model, &steady, start, &stay_grid, fock_dt)?;
        for &n in cfg.ints("n_values") {
            let dt_n = total / n as f64;
            let k = at_n
                .delta_t
                .iter()
                .position(|&t| (t - dt_n).abs() < 1e-12)
                .expect("grid point present");
            stay.push((start, n, at_n.p1[k].powf(n as f64)));
        }
    }
    let complement = curves.pop().expect("two curves");
    let coherent = curves.pop().expect("two curves");

    progress.line("dichotomic-survival: Wigner function after the complement outcome");
    let alpha0 = target_state(&steady, 0.0, &params);
    let (post, prob) = dichotomic_project(&steady, alpha0, Outcome::Complement)?;
    let axis = symmetric_axis(cfg.f64("extent"), cfg.f64("h"));
    let grid = wigner_from_density(&post, &axis, &axis);
    let wigner_min = grid.min();

    let mut files = Vec::new();
    for (start, curve) in [(SurvivalStart::Coherent, &coherent), (SurvivalStart::Complement, &complement)] {
        files.push(OutputFile::csv(format!("survival_{}.csv", start_label(start)), |w| curve.write_csv(w)));
    }
    files.push(OutputFile::csv("stay.csv", |w| {
        writeln!(w, "# kind=stay_probability")?;
        writeln!(w, "# total_time={total}")?;
        writeln!(w, "start,n,p_stay")?;
        for (s, n, p) in &stay {
            writeln!(w, "{},{n},{p:.12}", start_label(*s))?;
        }
        Ok(())
    }));
    files.push(OutputFile::csv("wigner_m2.csv", |w| grid.write_csv(w)));
    files.push(OutputFile::json(
        "summary.json",
        &json!({
            "dim": model.dim(),
            "steady_mean_number": steady.mean_number(),
            "steady_residual": model.residual(&steady),
            "top_population": steady.population(model.dim() - 1),
            "complement_probability": prob,
            "c_m1": coherent.c_m,
            "c_m2": complement.c_m,
            "wigner_m2_min": wigner_min,
            "wigner_guard_exceeded": grid.guard_exceeded,
        }),
    ));
    Ok(DichotomicSurvival { steady, coherent, complement, stay, wigner_min, files })
}

fn pair_config(cfg: &ExperimentConfig, seed: u64) -> Result<IntegratorConfig> {
    let dt = cfg.f64("dt");
    Ok(IntegratorConfig::new(dt, stride(cfg.f64("record_dt"), dt)?, seed))
}

/// Unmeasured reference run; returns the trace and its stationary level of
/// `W(0)` and `W(π)`.
pub fn sync_baseline(cfg: &ExperimentConfig, progress: Progress) -> Result<(PhaseTrace, f64)> {
    let model = CoupledModel::new(coupled_params(cfg)?);
    progress.line("coupled: unmeasured reference run");
    let sched = MeasurementSchedule::unmeasured(cfg.f64("baseline_time"))?;
    let icfg = pair_config(cfg, derive_seed(cfg.u64("seed"), u64::MAX))?;
    let (trace, _) = run_coupled(&model, &sched, &icfg, cfg.usize("n_traj"), INITIAL_THETA_MINUS, SYNC_BINS, None)?;
    let level = stationary_baseline(&trace, cfg.f64("baseline_from"))?;
    Ok((trace, level))
}

/// `repetitions` independent measured runs at one interval.
pub fn sync_repetitions(cfg: &ExperimentConfig, delta_t: f64, progress: Progress) -> Result<Vec<PhaseTrace>> {
    let model = CoupledModel::new(coupled_params(cfg)?);
    let sched = schedule(delta_t, cfg.f64("total_time"))?;
    let mut traces = Vec::new();
    for rep in 0..cfg.u64("repetitions") {
        progress.line(format!("coupled: delta_t={} repetition {}", label(delta_t), rep + 1));
        let icfg = pair_config(cfg, derive_seed(cfg.u64("seed"), rep))?;
        let (trace, _) = run_coupled(&model, &sched, &icfg, cfg.usize("n_traj"), INITIAL_THETA_MINUS, SYNC_BINS, None)?;
        traces.push(trace);
    }
    Ok(traces)
}

/// Time-and-repetition average of the `θ_−` density.
pub fn averaged_distribution(traces: &[PhaseTrace]) -> Result<PhaseDistribution> {
    let per_rep = traces.iter().map(|t| t.averaged_from(0.0)).collect::<Result<Vec<_>>>()?;
    PhaseDistribution::average(&per_rep)
}

/// Repetition-averaged trace on the common time grid.
fn mean_trace(traces: &[PhaseTrace]) -> Result<PhaseTrace> {
    let first = traces.first().ok_or_else(|| Error::State("no repetitions".into()))?;
    let dists = (0..first.times.len())
        .map(|k| PhaseDistribution::average(&traces.iter().map(|t| t.dists[k].clone()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseTrace { times: first.times.clone(), dists })
}

pub struct CoupledSync {
    pub sync: SyncResult,
    pub averaged: PhaseDistribution,
    pub files: Vec<OutputFile>,
}

fn mode_mass(d: &PhaseDistribution) -> (f64, f64) {
    let mode = d.mode();
    (mode, d.mass_near(mode, FRAC_PI_4))
}

pub fn coupled_sync(cfg: &ExperimentConfig, progress: Progress) -> Result<CoupledSync> {
    let p = coupled_params(cfg)?;
    let delta_t = cfg.f64("delta_t");
    let (base_trace, level) = sync_baseline(cfg, progress)?;
    let traces = sync_repetitions(cfg, delta_t, progress)?;
    let sync = sync_measure(&traces, Some(level))?;
    let averaged = averaged_distribution(&traces)?;
    let (mode, mass) = mode_mass(&averaged);
    let mean = mean_trace(&traces)?;
    let files = vec![
        OutputFile::csv("trace.csv", |w| mean.write_csv(w)),
        OutputFile::csv("baseline_trace.csv", |w| base_trace.write_csv(w)),
        OutputFile::csv("sync.csv", |w| {
            writeln!(w, "# kind=sync_repetitions")?;
            writeln!(w, "# s_l={level:.9e}")?;
            writeln!(w, "repetition,s_i,s_i_over_s_l")?;
            for (i, s) in sync.s_i.iter().enumerate() {
                writeln!(w, "{i},{s:.9e},{:.9e}", s / level)?;
            }
            Ok(())
        }),
        OutputFile::csv("averaged.csv", |w| {
            writeln!(w, "# kind=phase_difference_average")?;
            writeln!(w, "bin,theta,density")?;
            for (k, (c, v)) in averaged.bin_centers().iter().zip(&averaged.density).enumerate() {
                writeln!(w, "{k},{c:.6},{v:.9e}")?;
            }
            Ok(())
        }),
        OutputFile::json(
            "summary.json",
            &json!({
                "delta_t": delta_t,
                "kuramoto_coefficient": coupled::kuramoto_coefficient(&p),
                "linearized_coefficient": coupled::linearized_coefficient(&p),
                "s": sync.s,
                "s_l": level,
                "ratio": sync.ratio,
                "sigma": sync.sigma,
                "mode": mode,
                "mode_mass_quarter_pi": mass,
            }),
        ),
    ];
    Ok(CoupledSync { sync, averaged, files })
}

/// `(Δt, S/S_l, σ)` rows.
pub type SyncScanRow = (f64, f64, f64);

pub struct SyncScan {
    pub rows: Vec<SyncScanRow>,
    pub files: Vec<OutputFile>,
}

pub fn sync_scan(cfg: &ExperimentConfig, progress: Progress) -> Result<SyncScan> {
    let (_, level) = sync_baseline(cfg, progress)?;
    let mut rows = Vec::new();
    for &delta_t in cfg.floats("delta_ts") {
        let traces = sync_repetitions(cfg, delta_t, progress)?;
        let r = sync_measure(&traces, Some(level))?;
        rows.push((delta_t, r.ratio.unwrap_or(f64::NAN), r.sigma));
    }
    let file = OutputFile::csv("scan.csv", |w| {
        writeln!(w, "# kind=sync_scan")?;
        writeln!(w, "# s_l={level:.9e}")?;
        writeln!(w, "delta_t,ratio,sigma")?;
        for (d, r, s) in &rows {
            writeln!(w, "{},{r:.9e},{s:.9e}", label(*d))?;
        }
        Ok(())
    });
    Ok(SyncScan { rows, files: vec![file] })
}

/// Pre-run checks for [`validate`](super::validate); returns violations and
/// informational lines.
pub fn check(cfg: &ExperimentConfig) -> (Vec<String>, Vec<String>) {
    let mut bad = Vec::new();
    let mut info = Vec::new();
    let e = cfg.experiment;
    let omega_max = match e {
        Experiment::CoupledSync | Experiment::SyncScan => match coupled_params(cfg) {
            Ok(p) => {
                let m = CoupledModel::new(p);
                crate::sde_core::LangevinModel::omega_max(&m)
            }
            Err(err) => {
                bad.push(err.to_string());
                cfg.f64("omega_m")
            }
        },
        _ => {
            if let Err(err) = oscillator(cfg) {
                bad.push(err.to_string());
            }
            cfg.f64("omega_m")
        }
    };
    if cfg.has("dt") {
        let dt = cfg.f64("dt");
        if let Err(err) = IntegratorConfig::new(dt, 1, 0).validate(omega_max) {
            bad.push(err.to_string());
        }
        let mut intervals: Vec<f64> = Vec::new();
        if cfg.has("delta_t") {
            intervals.push(cfg.f64("delta_t"));
        }
        if cfg.has("delta_ts") {
            intervals.extend(cfg.floats("delta_ts"));
        }
        if e == Experiment::ZenoSpectrum {
            let t = cfg.f64("total_time");
            intervals.extend(cfg.ints("n_values").iter().filter(|&&n| n > 0).map(|&n| t / n as f64));
        }
        for d in intervals {
            if !(d > 0.0) {
                bad.push(format!("measurement interval {d} must be positive"));
            } else if d < dt * (1.0 - 1e-9) {
                bad.push(format!("measurement interval {d} is shorter than dt = {dt}"));
            }
        }
        if cfg.has("record_dt") {
            if let Err(err) = stride(cfg.f64("record_dt"), dt) {
                bad.push(err.to_string());
            }
        }
    }
    if cfg.has("n_traj") && cfg.u64("n_traj") == 0 {
        bad.push("n_traj must be at least 1".into());
    }
    if e == Experiment::DichotomicSurvival {
        let dim = cfg.usize("dim");
        if let Ok(p) = oscillator(cfg) {
            let n_s = p.steady_occupation();
            if n_s >= dim as f64 / 4.0 {
                bad.push(format!("steady occupation {n_s:.3} violates the truncation guard |alpha|^2 < dim/4 = {}", dim / 4));
            }
        }
        let r = cfg.f64("extent") / 2.0;
        if 2.0 * r * r >= dim as f64 / 4.0 {
            info.push(format!("Wigner grid corners exceed the truncation guard for dim = {dim}"));
        }
        let fock_dt = cfg.f64("fock_dt");
        let t = cfg.f64("total_time");
        for &d in cfg.floats("delta_ts").iter().chain(cfg.ints("n_values").iter().map(|&n| t / n as f64).collect::<Vec<_>>().iter()) {
            let k = (d / fock_dt).round();
            if !(k >= 1.0) || (k * fock_dt - d).abs() > 1e-9 * d.max(1.0) {
                bad.push(format!("survival interval {d} is not a positive multiple of fock_dt = {fock_dt}"));
            }
        }
        let bytes = dim * dim * 16 * 8;
        info.push(format!("memory estimate: {:.1} MiB", bytes as f64 / (1 << 20) as f64));
    } else {
        let per = std::mem::size_of::<crate::rng::StreamRng>()
            + match e {
                Experiment::CoupledSync | Experiment::SyncScan => 2 * std::mem::size_of::<Complex64>(),
                _ => std::mem::size_of::<Complex64>(),
            };
        let n = if cfg.has("n_traj") { cfg.usize("n_traj") } else { 1 };
        let snapshots = if e == Experiment::WignerPanels { cfg.floats("times").len() } else { 0 };
        let bytes = n * per + n * snapshots * std::mem::size_of::<Complex64>();
        info.push(format!("memory estimate: {:.1} MiB ({n} trajectories, {snapshots} snapshots)", bytes as f64 / (1 << 20) as f64));
    }
    (bad, info)
}
