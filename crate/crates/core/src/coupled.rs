//! Two coherently coupled van der Pol oscillators.
//!
//! Each pair `(α₁, α₂)` follows
//! `α̇_j = (−iω_j + κ1)α_j − 2κ2(|α_j|² − 1)α_j + iμα_{3−j} + noise`
//! with independent vacuum noises on the two modes. Synchronisation is read
//! from the distribution of the phase difference `θ_− = θ₁ − θ₂`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{run_protocol, CollapseRecord, MeasurementSchedule, OnCollapse, ProtocolObserver};
use crate::phase_space::{phase_distribution, wrap_angle, PhaseDistribution};
use crate::rng::{self, StreamRng};
use crate::sde_core::{drift, Ensemble, IntegratorConfig, LangevinModel, OscillatorParams, StepTerms};

/// Phase bins used for `W(0)` and `W(π)`.
pub const SYNC_BINS: usize = 64;

pub type Pair = [Complex64; 2];
pub type PairEnsemble = Ensemble<Pair>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledParams {
    pub omega1: f64,
    pub omega2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu: f64,
}

impl CoupledParams {
    pub fn new(omega1: f64, omega2: f64, kappa1: f64, kappa2: f64, mu: f64) -> Result<Self> {
        let p = Self { omega1, omega2, kappa1, kappa2, mu };
        p.validate()?;
        Ok(p)
    }

    /// Shared rates of the reference oscillator, `ω₁ = 1`, `ω₂ = 1 − Δω`.
    pub fn with_detuning(delta_omega: f64, mu: f64) -> Result<Self> {
        let r = OscillatorParams::reference();
        Self::new(r.omega_m, r.omega_m - delta_omega, r.kappa1, r.kappa2, mu)
    }

    pub fn validate(&self) -> Result<()> {
        self.osc(0).validate()?;
        self.osc(1).validate()?;
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Domain(format!("coupling must be non-negative, got {}", self.mu)));
        }
        Ok(())
    }

    /// Single-oscillator parameters of mode `j` (0 or 1).
    pub fn osc(&self, j: usize) -> OscillatorParams {
        let omega_m = if j == 0 { self.omega1 } else { self.omega2 };
        OscillatorParams { omega_m, kappa1: self.kappa1, kappa2: self.kappa2 }
    }

    pub fn delta_omega(&self) -> f64 {
        self.omega1 - self.omega2
    }

    /// Uncoupled limit-cycle amplitude `I₀ = sqrt(κ1/2κ2 + 1)`.
    pub fn i0(&self) -> f64 {
        (self.kappa1 / (2.0 * self.kappa2) + 1.0).sqrt()
    }

    pub fn noise_amplitude(&self) -> f64 {
        (3.0 * self.kappa1 + 2.0 * self.kappa2).sqrt()
    }
}

/// Deterministic part of the pair update.
#[inline]
pub fn pair_drift(pair: &Pair, p: &CoupledParams) -> Pair {
    let i = Complex64::new(0.0, p.mu);
    [
        drift(pair[0], &p.osc(0)) + i * pair[1],
        drift(pair[1], &p.osc(1)) + i * pair[0],
    ]
}

/// One Euler–Maruyama step given the two noise increments.
#[inline]
pub fn pair_increment(pair: &mut Pair, p: &CoupledParams, terms: StepTerms, zeta: [Complex64; 2], dt: f64) {
    let mut next = *pair;
    if terms.drift {
        let d = pair_drift(pair, p);
        next[0] += d[0] * dt;
        next[1] += d[1] * dt;
    }
    if terms.noise {
        let s = p.noise_amplitude();
        next[0] += s * zeta[0];
        next[1] += s * zeta[1];
    }
    *pair = next;
}

#[derive(Debug, Clone, Copy)]
pub struct CoupledModel {
    pub params: CoupledParams,
    pub terms: StepTerms,
}

impl CoupledModel {
    pub fn new(params: CoupledParams) -> Self {
        Self { params, terms: StepTerms::default() }
    }

    pub fn noise_free(params: CoupledParams) -> Self {
        Self { params, terms: StepTerms { drift: true, noise: false } }
    }
}

impl LangevinModel for CoupledModel {
    type State = Pair;

    fn omega_max(&self) -> f64 {
        self.params.omega1.abs().max(self.params.omega2.abs()) + self.params.mu
    }

    #[inline]
    fn step(&self, pair: &mut Pair, dt: f64, rng: &mut StreamRng) {
        let z1 = rng::complex_normal(rng, dt);
        let z2 = rng::complex_normal(rng, dt);
        pair_increment(pair, &self.params, self.terms, [z1, z2], dt);
    }
}

/// Amplitudes and phases of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub i1: f64,
    pub i2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// An amplitude was exactly zero and its phase was set to 0.
    pub degenerate: bool,
}

pub fn to_polar(pair: &Pair) -> PolarState {
    let degenerate = pair[0] == Complex64::new(0.0, 0.0) || pair[1] == Complex64::new(0.0, 0.0);
    let theta1 = wrap_angle(pair[0].arg());
    let theta2 = wrap_angle(pair[1].arg());
    PolarState {
        i1: pair[0].norm(),
        i2: pair[1].norm(),
        theta1,
        theta2,
        theta_plus: wrap_angle(theta1 + theta2),
        theta_minus: wrap_angle(theta1 - theta2),
        degenerate,
    }
}

pub fn from_polar(s: &PolarState) -> Pair {
    [Complex64::from_polar(s.i1, s.theta1), Complex64::from_polar(s.i2, s.theta2)]
}

/// `θ_− = arg(α₁ α₂*)` in `[0, 2π)`.
#[inline]
pub fn phase_difference(pair: &Pair) -> f64 {
    wrap_angle((pair[0] * pair[1].conj()).arg())
}

/// `c_k = μ²/(2(2κ1 + 8κ2))`, the washboard coefficient of the reduced
/// equation `θ̇_− = −Δω − 2c_k sin 2θ_−`.
pub fn kuramoto_coefficient(p: &CoupledParams) -> f64 {
    p.mu * p.mu / (2.0 * (2.0 * p.kappa1 + 8.0 * p.kappa2))
}

/// Washboard coefficient obtained by linearising the full pair equations
/// about `I₀`: `μ²/(2κ1 + 4κ2)`.
pub fn linearized_coefficient(p: &CoupledParams) -> f64 {
    p.mu * p.mu / (2.0 * p.kappa1 + 4.0 * p.kappa2)
}

/// Stationary amplitude shifts `(δI₁, δI₂)` with `δI₁ = μI₀ sin θ_−/(2κ1 + 8κ2)`
/// and `δI₂ = −δI₁`.
pub fn stationary_amplitude_shift(p: &CoupledParams, theta_minus: f64) -> (f64, f64) {
    let d = p.mu * p.i0() * theta_minus.sin() / (2.0 * p.kappa1 + 8.0 * p.kappa2);
    (d, -d)
}

/// Variance per unit time of the `θ_−` noise at `I_j = I₀`: each mode
/// contributes `(3κ1 + 2κ2)/(2I₀²)`.
pub fn reduced_noise_rate(p: &CoupledParams) -> f64 {
    (3.0 * p.kappa1 + 2.0 * p.kappa2) / (p.i0() * p.i0())
}

/// Stable root of `Δω = −2c sin 2θ` on the `cos 2θ > 0` branch, in `(−π/4, π/4)`.
pub fn locked_phase(delta_omega: f64, c: f64) -> Option<f64> {
    if c <= 0.0 || delta_omega.abs() > 2.0 * c {
        return None;
    }
    Some(0.5 * (-delta_omega / (2.0 * c)).asin())
}

/// Euler(–Maruyama) step of `θ̇_− = −Δω − 2c_k sin 2θ_− + N`; with `rng` the
/// noise has variance [`reduced_noise_rate`]`·dt`.
pub fn reduced_phase_step(theta: f64, p: &CoupledParams, dt: f64, rng: Option<&mut StreamRng>) -> f64 {
    let c = kuramoto_coefficient(p);
    let mut next = theta + (-p.delta_omega() - 2.0 * c * (2.0 * theta).sin()) * dt;
    if let Some(r) = rng {
        next += (reduced_noise_rate(p) * dt).sqrt() * rng::standard_normal(r);
    }
    next
}

/// Distance between two angles modulo `π`, in `[0, π/2]`.
pub fn distance_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Coherent two-mode cloud with both amplitudes at `I₀`, `θ₂ = 0` and
/// `θ₁ = theta_minus`.
pub fn init_pairs(p: &CoupledParams, theta_minus: f64, n_pairs: usize, seed: u64) -> Result<PairEnsemble> {
    let i0 = p.i0();
    let center = [Complex64::from_polar(i0, theta_minus), Complex64::new(i0, 0.0)];
    Ensemble::from_fn(n_pairs, seed, |_, r| {
        let z1 = rng::complex_normal(r, 0.5);
        let z2 = rng::complex_normal(r, 0.5);
        [center[0] + z1, center[1] + z2]
    })
}

/// Draw one pair index and restart every pair around it with fresh vacuum
/// noise on both modes.
pub fn joint_heterodyne_collapse(ens: &mut PairEnsemble, control: &mut StreamRng) -> Result<CollapseRecord<Pair>> {
    crate::measurement::collapse_on_sample(ens, control)
}

pub fn phase_differences(pairs: &[Pair]) -> Vec<f64> {
    pairs.iter().map(phase_difference).collect()
}

/// `θ_−` densities on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub times: Vec<f64>,
    pub dists: Vec<PhaseDistribution>,
}

impl PhaseTrace {
    /// `max[W(0), W(π)]` at each time.
    pub fn sync_series(&self) -> Vec<f64> {
        self.dists.iter().map(|d| d.density_at(0.0).max(d.density_at(PI))).collect()
    }

    /// Time-averaged distribution over samples with `t ≥ from`.
    pub fn averaged_from(&self, from: f64) -> Result<PhaseDistribution> {
        let sel: Vec<PhaseDistribution> = self
            .times
            .iter()
            .zip(&self.dists)
            .filter(|(t, _)| **t >= from - 1e-9)
            .map(|(_, d)| d.clone())
            .collect();
        PhaseDistribution::average(&sel)
    }

    /// Long format `time,bin,theta,density`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# kind=phase_difference_trace")?;
        writeln!(w, "time,bin,theta,density")?;
        for (t, d) in self.times.iter().zip(&self.dists) {
            for (k, (c, v)) in d.bin_centers().iter().zip(&d.density).enumerate() {
                writeln!(w, "{t:.6},{k},{c:.6},{v:.9e}")?;
            }
        }
        Ok(())
    }
}

/// `Sᵢ = (1/T)∫ max[W(0)_t, W(π)_t] dt`, the integral taken as the mean over
/// uniformly spaced samples.
pub fn sync_value(trace: &PhaseTrace) -> Result<f64> {
    let s = trace.sync_series();
    if s.is_empty() {
        return Err(Error::State("empty phase trace".into()));
    }
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Common stationary level of `W(0)` and `W(π)` over samples with `t ≥ from`.
pub fn stationary_baseline(trace: &PhaseTrace, from: f64) -> Result<f64> {
    let vals: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.dists)
        .filter(|(t, _)| **t >= from - 1e-9)
        .map(|(_, d)| 0.5 * (d.density_at(0.0) + d.density_at(PI)))
        .collect();
    if vals.is_empty() {
        return Err(Error::State(format!("no samples after t = {from}")));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    pub s_i: Vec<f64>,
    pub s: f64,
    pub s_l: Option<f64>,
    /// `S/S_l` when a baseline is given.
    pub ratio: Option<f64>,
    /// Sample standard deviation of `Sᵢ/S_l` (or of `Sᵢ` without baseline).
    pub sigma: f64,
}

pub fn sync_measure(traces: &[PhaseTrace], baseline: Option<f64>) -> Result<SyncResult> {
    if traces.is_empty() {
        return Err(Error::Argument("need at least one repetition".into()));
    }
    let s_i = traces.iter().map(sync_value).collect::<Result<Vec<f64>>>()?;
    let m = s_i.len() as f64;
    let s = s_i.iter().sum::<f64>() / m;
    let scale = baseline.unwrap_or(1.0);
    if !(scale > 0.0) {
        return Err(Error::Argument(format!("baseline must be positive, got {scale}")));
    }
    let sigma = if s_i.len() > 1 {
        (s_i.iter().map(|v| (v / scale - s / scale).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SyncResult { s_i, s, s_l: baseline, ratio: baseline.map(|b| s / b), sigma })
}

struct TraceObserver<'a> {
    n_bins: usize,
    trace: PhaseTrace,
    error: Option<Error>,
    progress: Option<OnCollapse<'a, Pair>>,
}

impl ProtocolObserver<Pair> for TraceObserver<'_> {
    fn record(&mut self, ens: &PairEnsemble) {
        match phase_distribution(&phase_differences(ens.states()), self.n_bins) {
            Ok(d) => {
                self.trace.times.push(ens.time());
                self.trace.dists.push(d);
            }
            Err(e) => self.error = Some(e),
        }
    }

    fn collapsed(&mut self, rec: &CollapseRecord<Pair>) {
        if let Some(p) = self.progress.as_mut() {
            p(rec);
        }
    }
}

/// Run one repetition from `θ_− = theta_minus` and record the `θ_−` density
/// every `cfg.record_stride` steps.
pub fn run_coupled(
    model: &CoupledModel,
    schedule: &MeasurementSchedule,
    cfg: &IntegratorConfig,
    n_pairs: usize,
    theta_minus: f64,
    n_bins: usize,
    progress: Option<OnCollapse<'_, Pair>>,
) -> Result<(PhaseTrace, PairEnsemble)> {
    let mut ens = init_pairs(&model.params, theta_minus, n_pairs, cfg.seed)?;
    let mut obs = TraceObserver {
        n_bins,
        trace: PhaseTrace { times: Vec::new(), dists: Vec::new() },
        error: None,
        progress,
    };
    run_protocol(&mut ens, model, cfg, schedule, &[], &mut obs)?;
    if let Some(e) = obs.error {
        return Err(e);
    }
    Ok((obs.trace, ens))
}

/// Initial phase difference used by the synchronisation experiments.
pub const INITIAL_THETA_MINUS: f64 = FRAC_PI_2;
