//! Semiclassical Langevin dynamics of a single van der Pol oscillator.
//!
//! The Wigner function is sampled by an ensemble of complex amplitudes, each
//! obeying
//!
//! ```text
//! dα = [(−iω_m + κ1)α − 2κ2(|α|² − 1)α] dt + sqrt(3κ1 + 2κ2) dζ,
//! E[dζ] = 0,  E[|dζ|²] = dt,  E[dζ²] = 0,
//! ```
//!
//! integrated with Euler–Maruyama. The ensemble container is generic over the
//! per-trajectory state so the coupled two-mode model reuses it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Upper bound on `ω_m·dt` accepted by [`IntegratorConfig::validate`].
pub const MAX_OMEGA_DT: f64 = 0.05;

/// Trajectories per parallel work item. Fixed so chunking never depends on the
/// worker count.
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub omega_m: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl OscillatorParams {
    pub fn new(omega_m: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        let p = Self { omega_m, kappa1, kappa2 };
        p.validate()?;
        Ok(p)
    }

    /// `κ1/ω_m = 0.1`, `κ2/ω_m = 0.005` with `ω_m = 1`.
    pub fn reference() -> Self {
        Self { omega_m: 1.0, kappa1: 0.1, kappa2: 0.005 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0) || !self.omega_m.is_finite() {
            return Err(Error::Domain(format!("omega_m must be positive, got {}", self.omega_m)));
        }
        if !(self.kappa1 >= 0.0) || !self.kappa1.is_finite() {
            return Err(Error::Domain(format!("kappa1 must be non-negative, got {}", self.kappa1)));
        }
        if !(self.kappa2 > 0.0) || !self.kappa2.is_finite() {
            return Err(Error::Domain(format!("kappa2 must be positive, got {}", self.kappa2)));
        }
        Ok(())
    }

    /// Amplitude of the vacuum input noise, `sqrt(3κ1 + 2κ2)`.
    pub fn noise_amplitude(&self) -> f64 {
        (3.0 * self.kappa1 + 2.0 * self.kappa2).sqrt()
    }

    /// Steady-state `|α_s|² = κ1/(2κ2) + 1`.
    pub fn steady_occupation(&self) -> f64 {
        self.kappa1 / (2.0 * self.kappa2) + 1.0
    }
}

/// Radius `r = 2·sqrt(κ1/(2κ2) + 1)` of the classical limit cycle in the
/// `(Q, P)` plane. The amplitude radius is `r/2`.
pub fn limit_cycle_radius(params: &OscillatorParams) -> Result<f64> {
    if !(params.kappa2 > 0.0) {
        return Err(Error::Domain(format!(
            "limit cycle radius needs kappa2 > 0, got {}",
            params.kappa2
        )));
    }
    Ok(2.0 * params.steady_occupation().sqrt())
}

/// Deterministic part of the Langevin equation.
#[inline]
pub fn drift(alpha: Complex64, params: &OscillatorParams) -> Complex64 {
    let linear = Complex64::new(params.kappa1, -params.omega_m);
    linear * alpha - 2.0 * params.kappa2 * (alpha.norm_sqr() - 1.0) * alpha
}

/// `Q = α + α*`.
#[inline]
pub fn quadrature_q(alpha: Complex64) -> f64 {
    2.0 * alpha.re
}

/// `P = i(α* − α) = 2·Im α`.
#[inline]
pub fn quadrature_p(alpha: Complex64) -> f64 {
    2.0 * alpha.im
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub record_stride: u64,
    pub seed: u64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, record_stride: u64, seed: u64) -> Self {
        Self { dt, record_stride, seed }
    }

    /// Checks `dt > 0`, `record_stride ≥ 1` and the accuracy guard `ω·dt ≤ 0.05`.
    pub fn validate(&self, omega_max: f64) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Argument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.record_stride == 0 {
            return Err(Error::Argument("record_stride must be at least 1".into()));
        }
        if omega_max * self.dt > MAX_OMEGA_DT + 1e-12 {
            return Err(Error::Argument(format!(
                "omega*dt = {} exceeds the accuracy guard {MAX_OMEGA_DT}",
                omega_max * self.dt
            )));
        }
        Ok(())
    }

    /// Number of whole steps covering `duration`, rounded to the nearest step.
    pub fn steps_for(&self, duration: f64) -> u64 {
        (duration / self.dt).round().max(0.0) as u64
    }
}

/// A model advanced one Euler–Maruyama step at a time on a single trajectory.
pub trait LangevinModel: Sync {
    type State: Copy + Send + Sync;

    /// Largest angular frequency of the model, for the `ω·dt` guard.
    fn omega_max(&self) -> f64;

    fn step(&self, state: &mut Self::State, dt: f64, rng: &mut StreamRng);
}

/// Which parts of the Langevin equation are active. Noise is always drawn so
/// the random streams advance identically whatever the switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepTerms {
    pub drift: bool,
    pub noise: bool,
}

impl Default for StepTerms {
    fn default() -> Self {
        Self { drift: true, noise: true }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VdpModel {
    pub params: OscillatorParams,
    pub terms: StepTerms,
}

impl VdpModel {
    pub fn new(params: OscillatorParams) -> Self {
        Self { params, terms: StepTerms::default() }
    }

    pub fn noise_free(params: OscillatorParams) -> Self {
        Self { params, terms: StepTerms { drift: true, noise: false } }
    }

    pub fn diffusion_only(params: OscillatorParams) -> Self {
        Self { params, terms: StepTerms { drift: false, noise: true } }
    }
}

impl LangevinModel for VdpModel {
    type State = Complex64;

    fn omega_max(&self) -> f64 {
        self.params.omega_m
    }

    #[inline]
    fn step(&self, alpha: &mut Complex64, dt: f64, rng: &mut StreamRng) {
        let zeta = rng::complex_normal(rng, dt);
        let mut next = *alpha;
        if self.terms.drift {
            next += drift(*alpha, &self.params) * dt;
        }
        if self.terms.noise {
            next += self.params.noise_amplitude() * zeta;
        }
        *alpha = next;
    }
}

/// N trajectories with one random stream each.
#[derive(Debug, Clone)]
pub struct Ensemble<S> {
    states: Vec<S>,
    rngs: Vec<StreamRng>,
    time: f64,
    seed: u64,
}

pub type TrajectoryEnsemble = Ensemble<Complex64>;

impl<S: Copy + Send + Sync> Ensemble<S> {
    /// Builds `n` trajectories; `init` receives trajectory `j`'s own stream.
    pub fn from_fn(n: usize, seed: u64, mut init: impl FnMut(usize, &mut StreamRng) -> S) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("ensemble needs at least one trajectory".into()));
        }
        let mut rngs: Vec<StreamRng> = (0..n).map(|j| rng::trajectory_stream(seed, j as u64)).collect();
        let states = rngs.iter_mut().enumerate().map(|(j, r)| init(j, r)).collect();
        Ok(Self { states, rngs, time: 0.0, seed })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// Mutable access to states together with their streams.
    pub fn states_and_streams_mut(&mut self) -> (&mut [S], &mut [StreamRng]) {
        (&mut self.states, &mut self.rngs)
    }

    /// Advance every trajectory by `n_steps` steps of size `dt`.
    ///
    /// Work is split into fixed-size chunks; each trajectory only touches its
    /// own stream, so the result does not depend on the rayon pool size.
    pub fn advance<M: LangevinModel<State = S>>(&mut self, model: &M, dt: f64, n_steps: u64) {
        if n_steps == 0 {
            return;
        }
        self.states
            .par_chunks_mut(CHUNK)
            .zip(self.rngs.par_chunks_mut(CHUNK))
            .for_each(|(states, rngs)| {
                for (s, r) in states.iter_mut().zip(rngs.iter_mut()) {
                    for _ in 0..n_steps {
                        model.step(s, dt, r);
                    }
                }
            });
        self.time += n_steps as f64 * dt;
    }

    /// Rigidly replace every state (used by global collapses).
    pub fn map_states(&mut self, mut f: impl FnMut(usize, &S, &mut StreamRng) -> S) {
        for (j, (s, r)) in self.states.iter_mut().zip(self.rngs.iter_mut()).enumerate() {
            *s = f(j, s, r);
        }
    }
}

/// Coherent-state initial ensemble: `α^j = center + Z^j` with `E|Z|² = 0.5`.
pub fn init_coherent(center: Complex64, n_traj: usize, seed: u64) -> Result<TrajectoryEnsemble> {
    Ensemble::from_fn(n_traj, seed, |_, r| center + rng::complex_normal(r, 0.5))
}

/// Ensemble moments at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub time: f64,
    pub mean_amp: Complex64,
    /// `⟨(α − ⟨α⟩)²⟩`, the complex second central moment.
    pub var_amp: Complex64,
    pub mean_q: f64,
    pub mean_p: f64,
    /// `⟨|α|⟩`, the mean distance from the origin.
    pub mean_radius: f64,
}

impl EnsembleStats {
    /// Sequential reduction in trajectory order.
    pub fn of(time: f64, states: &[Complex64]) -> Self {
        let n = states.len() as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut radius = 0.0;
        for a in states {
            sum += a;
            radius += a.norm();
        }
        let mean = sum / n;
        let mut var = Complex64::new(0.0, 0.0);
        for a in states {
            let d = a - mean;
            var += d * d;
        }
        Self {
            time,
            mean_amp: mean,
            var_amp: var / n,
            mean_q: quadrature_q(mean),
            mean_p: quadrature_p(mean),
            mean_radius: radius / n,
        }
    }
}

/// Advance `duration` (rounded to whole steps), recording statistics at the
/// start and every `record_stride` steps.
pub fn evolve<M: LangevinModel<State = Complex64>>(
    ens: &mut TrajectoryEnsemble,
    model: &M,
    cfg: &IntegratorConfig,
    duration: f64,
) -> Result<Vec<EnsembleStats>> {
    cfg.validate(model.omega_max())?;
    if !(duration >= 0.0) {
        return Err(Error::Argument(format!("duration must be non-negative, got {duration}")));
    }
    let total = cfg.steps_for(duration);
    let mut out = vec![EnsembleStats::of(ens.time(), ens.states())];
    let mut done = 0;
    while done < total {
        let chunk = cfg.record_stride.min(total - done);
        ens.advance(model, cfg.dt, chunk);
        done += chunk;
        if done.is_multiple_of(cfg.record_stride) {
            out.push(EnsembleStats::of(ens.time(), ens.states()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference() -> OscillatorParams {
        OscillatorParams::reference()
    }

    #[test]
    fn radius_examples() {
        let gain_free = OscillatorParams::new(1.0, 0.0, 0.3).unwrap();
        assert_eq!(limit_cycle_radius(&gain_free).unwrap(), 2.0);
        assert_abs_diff_eq!(limit_cycle_radius(&reference()).unwrap(), 2.0 * 11f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(limit_cycle_radius(&reference()).unwrap(), 6.63325, epsilon = 1e-5);
        let weak = OscillatorParams::new(1.0, 0.005, 0.01).unwrap();
        assert_abs_diff_eq!(limit_cycle_radius(&weak).unwrap(), 2.23607, epsilon = 1e-5);
    }

    #[test]
    fn radius_rejects_non_positive_kappa2() {
        let p = OscillatorParams { omega_m: 1.0, kappa1: 0.1, kappa2: 0.0 };
        assert!(matches!(limit_cycle_radius(&p), Err(Error::Domain(_))));
        assert!(OscillatorParams::new(1.0, 0.1, -1.0).is_err());
        assert!(OscillatorParams::new(0.0, 0.1, 0.1).is_err());
        assert!(OscillatorParams::new(1.0, -0.1, 0.1).is_err());
    }

    #[test]
    fn drift_examples() {
        let p = reference();
        assert_eq!(drift(Complex64::new(0.0, 0.0), &p), Complex64::new(0.0, 0.0));
        let d = drift(Complex64::new(1.0, 0.0), &p);
        assert_abs_diff_eq!(d.re, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.im, -1.0, epsilon = 1e-15);
        for p in [reference(), OscillatorParams::new(2.0, 0.3, 0.02).unwrap()] {
            let a = Complex64::new(p.steady_occupation().sqrt(), 0.0);
            let radial = (a.conj() * drift(a, &p)).re;
            assert_abs_diff_eq!(radial, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_amplitude_reference() {
        assert_abs_diff_eq!(reference().noise_amplitude(), 0.31f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(reference().noise_amplitude(), 0.55678, epsilon = 1e-5);
    }

    #[test]
    fn config_guard() {
        assert!(IntegratorConfig::new(0.005, 1, 0).validate(1.0).is_ok());
        assert!(IntegratorConfig::new(0.05, 1, 0).validate(1.0).is_ok());
        assert!(IntegratorConfig::new(0.06, 1, 0).validate(1.0).is_err());
        assert!(IntegratorConfig::new(0.0, 1, 0).validate(1.0).is_err());
        assert!(IntegratorConfig::new(0.01, 0, 0).validate(1.0).is_err());
    }

    #[test]
    fn noise_increment_normalisation() {
        // |ζ|²/dt averaged over many increments is 1 within 3 standard errors.
        let dt = 0.005;
        let mut r = rng::trajectory_stream(3, 0);
        let n = 400_000;
        let samples: Vec<f64> = (0..n).map(|_| rng::complex_normal(&mut r, dt).norm_sqr() / dt).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        // |ζ|²/dt is Exp(1): unit standard deviation
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn init_coherent_moments() {
        let center = Complex64::new(11f64.sqrt(), 0.0);
        let n = 1_000_000;
        let ens = init_coherent(center, n, 99).unwrap();
        let dev: Vec<Complex64> = ens.states().iter().map(|a| a - center).collect();
        let mean_re = dev.iter().map(|d| d.re).sum::<f64>() / n as f64;
        let mean_im = dev.iter().map(|d| d.im).sum::<f64>() / n as f64;
        let var_re = dev.iter().map(|d| (d.re - mean_re).powi(2)).sum::<f64>() / n as f64;
        assert!((var_re - 0.25).abs() < 0.001, "var {var_re}");
        assert!(mean_re.abs() < 0.003 && mean_im.abs() < 0.003);
        let stats = EnsembleStats::of(0.0, ens.states());
        // circular cloud: the complex second moment vanishes
        assert!(stats.var_amp.norm() < 0.004, "{}", stats.var_amp);
    }

    #[test]
    fn init_rejects_empty() {
        assert!(matches!(init_coherent(Complex64::new(1.0, 0.0), 0, 1), Err(Error::Argument(_))));
        let one = init_coherent(Complex64::new(1.0, 0.0), 1, 1).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn stats_quadrature_convention() {
        let s = EnsembleStats::of(0.0, &[Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0)]);
        assert_abs_diff_eq!(s.mean_q, 2.0 * s.mean_amp.re, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_p, 2.0 * s.mean_amp.im, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_q, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_p, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_duration_is_identity() {
        let mut ens = init_coherent(Complex64::new(2.0, 0.0), 16, 5).unwrap();
        let before = ens.states().to_vec();
        let cfg = IntegratorConfig::new(0.005, 10, 5);
        let stats = evolve(&mut ens, &VdpModel::new(reference()), &cfg, 0.0).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(ens.states(), &before[..]);
    }

    #[test]
    fn noise_free_limit_cycle_is_invariant() {
        let p = reference();
        let dt = 1e-4;
        let r2 = p.steady_occupation().sqrt();
        let mut ens = Ensemble::from_fn(1, 0, |_, _| Complex64::new(r2, 0.0)).unwrap();
        let model = VdpModel::noise_free(p);
        for _ in 0..100 {
            ens.advance(&model, dt, 100);
            // EM drifts off the circle by O(ω²dt/κ2) in |α|
            assert!((ens.states()[0].norm() - r2).abs() < 50.0 * dt);
        }
    }

    #[test]
    fn noise_free_approach_is_monotone() {
        let p = reference();
        let mut ens = Ensemble::from_fn(1, 0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let model = VdpModel::noise_free(p);
        let mut last = 1.0;
        for _ in 0..600 {
            ens.advance(&model, 1e-3, 100);
            let r = ens.states()[0].norm();
            assert!(r >= last - 1e-12);
            last = r;
        }
        assert!((last - 11f64.sqrt()).abs() < 0.01, "{last}");
    }

    #[test]
    fn diffusion_only_variance_growth() {
        let p = reference();
        let n = 100_000;
        let t = 2.0;
        let mut ens = Ensemble::from_fn(n, 17, |_, _| Complex64::new(0.0, 0.0)).unwrap();
        ens.advance(&VdpModel::diffusion_only(p), 0.01, 200);
        let var = ens.states().iter().map(|a| a.re * a.re).sum::<f64>() / n as f64;
        let expect = (3.0 * p.kappa1 + 2.0 * p.kappa2) / 2.0 * t;
        // variance estimator of a Gaussian has relative std sqrt(2/n)
        let se = expect * (2.0 / n as f64).sqrt();
        assert!((var - expect).abs() < 3.0 * se, "{var} vs {expect}");
    }

    #[test]
    fn result_independent_of_pool_size() {
        let p = reference();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let mut ens = init_coherent(Complex64::new(3.0, 0.0), 3000, 8).unwrap();
                let cfg = IntegratorConfig::new(0.005, 7, 8);
                let stats = evolve(&mut ens, &VdpModel::new(p), &cfg, 1.0).unwrap();
                (ens.states().to_vec(), stats)
            })
        };
        let (a, sa) = run(1);
        let (b, sb) = run(4);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
