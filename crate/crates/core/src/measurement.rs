//! Repeated ideal heterodyne measurements on a trajectory ensemble.
//!
//! A measurement returns one phase-space point, drawn by picking an ensemble
//! member uniformly at random. The post-measurement state is the coherent
//! state centred on that point, so every trajectory restarts at the sampled
//! amplitude plus fresh vacuum noise `Z^j` with `E|Z|² = 0.5`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::sde_core::{Ensemble, EnsembleStats, IntegratorConfig, LangevinModel, TrajectoryEnsemble, VdpModel};

/// Control-stream tag used for sampling measurement outcomes.
const OUTCOME_STREAM: u16 = 0;

/// Evenly spaced measurements at `k·Δt`, `k = 1..=n`, `n = ⌊t/Δt⌋`.
/// An infinite `delta_t` means no measurement at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    pub delta_t: f64,
    pub total_time: f64,
}

impl MeasurementSchedule {
    pub fn new(delta_t: f64, total_time: f64) -> Result<Self> {
        if !(delta_t > 0.0) {
            return Err(Error::Schedule(format!("delta_t must be positive, got {delta_t}")));
        }
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return Err(Error::Schedule(format!("total_time must be finite and non-negative, got {total_time}")));
        }
        Ok(Self { delta_t, total_time })
    }

    pub fn unmeasured(total_time: f64) -> Result<Self> {
        Self::new(f64::INFINITY, total_time)
    }

    /// Schedule with `n` measurements over `total_time` (`n = 0` is unmeasured).
    pub fn with_count(n: u64, total_time: f64) -> Result<Self> {
        if n == 0 {
            Self::unmeasured(total_time)
        } else {
            Self::new(total_time / n as f64, total_time)
        }
    }

    pub fn n(&self) -> u64 {
        if self.delta_t.is_infinite() {
            0
        } else {
            (self.total_time / self.delta_t + 1e-9).floor() as u64
        }
    }

    /// Integration steps at which measurements happen.
    pub fn collapse_steps(&self, dt: f64) -> Result<Vec<u64>> {
        if self.n() == 0 {
            return Ok(Vec::new());
        }
        if self.delta_t < dt * (1.0 - 1e-9) {
            return Err(Error::Schedule(format!(
                "measurement interval {} is shorter than the time step {dt}",
                self.delta_t
            )));
        }
        let total = (self.total_time / dt).round() as u64;
        Ok((1..=self.n())
            .map(|k| (k as f64 * self.delta_t / dt).round() as u64)
            .filter(|&s| s <= total)
            .collect())
    }
}

/// Callback invoked after each collapse.
pub type OnCollapse<'a, S> = &'a mut dyn FnMut(&CollapseRecord<S>);

/// Outcome of one heterodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseRecord<S> {
    pub time: f64,
    pub sampled_center: S,
    pub sampled_index: usize,
}

/// States that can be re-centred as a (multi-mode) coherent state.
pub trait Recentre: Copy {
    /// A draw from the coherent state centred on `center`.
    fn around(center: &Self, rng: &mut StreamRng) -> Self;
}

impl Recentre for Complex64 {
    #[inline]
    fn around(center: &Self, rng: &mut StreamRng) -> Self {
        center + rng::complex_normal(rng, 0.5)
    }
}

impl Recentre for [Complex64; 2] {
    #[inline]
    fn around(center: &Self, rng: &mut StreamRng) -> Self {
        let z1 = rng::complex_normal(rng, 0.5);
        let z2 = rng::complex_normal(rng, 0.5);
        [center[0] + z1, center[1] + z2]
    }
}

/// Sample one member uniformly and restart the whole ensemble around it.
pub fn collapse_on_sample<S: Recentre + Send + Sync>(
    ens: &mut Ensemble<S>,
    control: &mut StreamRng,
) -> Result<CollapseRecord<S>> {
    if ens.is_empty() {
        return Err(Error::State("cannot measure an empty ensemble".into()));
    }
    let k = rng::uniform_index(control, ens.len());
    let center = ens.states()[k];
    ens.map_states(|_, _, r| S::around(&center, r));
    Ok(CollapseRecord { time: ens.time(), sampled_center: center, sampled_index: k })
}

/// Single-mode heterodyne collapse.
pub fn heterodyne_collapse(
    ens: &mut TrajectoryEnsemble,
    control: &mut StreamRng,
) -> Result<CollapseRecord<Complex64>> {
    collapse_on_sample(ens, control)
}

/// Callbacks fired while a protocol runs. At a step carrying several events the
/// order is record, snapshot, collapse, so records and snapshots always see the
/// pre-measurement ensemble.
pub trait ProtocolObserver<S> {
    fn record(&mut self, _ens: &Ensemble<S>) {}
    fn snapshot(&mut self, _index: usize, _ens: &Ensemble<S>) {}
    fn collapsed(&mut self, _rec: &CollapseRecord<S>) {}
}

/// Alternate free evolution and heterodyne collapses according to `schedule`.
///
/// Records fire every `cfg.record_stride` steps starting at step 0; snapshots
/// fire at the steps nearest `snapshot_times`.
pub fn run_protocol<M, O>(
    ens: &mut Ensemble<M::State>,
    model: &M,
    cfg: &IntegratorConfig,
    schedule: &MeasurementSchedule,
    snapshot_times: &[f64],
    observer: &mut O,
) -> Result<Vec<CollapseRecord<M::State>>>
where
    M: LangevinModel,
    M::State: Recentre,
    O: ProtocolObserver<M::State>,
{
    cfg.validate(model.omega_max())?;
    let total = cfg.steps_for(schedule.total_time);
    let collapses = schedule.collapse_steps(cfg.dt)?;
    let mut snaps: Vec<(u64, usize)> = snapshot_times
        .iter()
        .enumerate()
        .map(|(i, &t)| (cfg.steps_for(t), i))
        .filter(|&(s, _)| s <= total)
        .collect();
    snaps.sort();

    let t0 = ens.time();
    let mut control = rng::control_stream(cfg.seed, OUTCOME_STREAM);
    let mut records = Vec::with_capacity(collapses.len());
    let mut next_collapse = 0;
    let mut next_snap = 0;
    let mut step = 0u64;
    loop {
        if step.is_multiple_of(cfg.record_stride) {
            observer.record(ens);
        }
        while next_snap < snaps.len() && snaps[next_snap].0 == step {
            observer.snapshot(snaps[next_snap].1, ens);
            next_snap += 1;
        }
        while next_collapse < collapses.len() && collapses[next_collapse] == step {
            let rec = collapse_on_sample(ens, &mut control)?;
            observer.collapsed(&rec);
            records.push(rec);
            next_collapse += 1;
        }
        if step >= total {
            break;
        }
        let mut target = (step / cfg.record_stride + 1) * cfg.record_stride;
        if let Some(&c) = collapses.get(next_collapse) {
            target = target.min(c);
        }
        if let Some(&(s, _)) = snaps.get(next_snap) {
            target = target.min(s);
        }
        target = target.min(total);
        ens.advance(model, cfg.dt, target - step);
        step = target;
        ens.set_time(t0 + step as f64 * cfg.dt);
    }
    Ok(records)
}

/// Full ensemble at a requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub states: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct MeasuredRun {
    pub stats: Vec<EnsembleStats>,
    pub collapses: Vec<CollapseRecord<Complex64>>,
    /// One entry per requested snapshot time, in request order.
    pub snapshots: Vec<Snapshot>,
    pub final_ensemble: TrajectoryEnsemble,
}

impl MeasuredRun {
    /// `⟨Q⟩(t)` at record resolution.
    pub fn mean_q(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.mean_q).collect()
    }
}

struct SingleModeObserver<'a> {
    stats: Vec<EnsembleStats>,
    snapshots: Vec<Option<Snapshot>>,
    progress: Option<OnCollapse<'a, Complex64>>,
}

impl ProtocolObserver<Complex64> for SingleModeObserver<'_> {
    fn record(&mut self, ens: &TrajectoryEnsemble) {
        self.stats.push(EnsembleStats::of(ens.time(), ens.states()));
    }

    fn snapshot(&mut self, index: usize, ens: &TrajectoryEnsemble) {
        self.snapshots[index] = Some(Snapshot { time: ens.time(), states: ens.states().to_vec() });
    }

    fn collapsed(&mut self, rec: &CollapseRecord<Complex64>) {
        if let Some(p) = self.progress.as_mut() {
            p(rec);
        }
    }
}

/// Start from the coherent state `|init_center⟩` sampled by `n_traj`
/// trajectories and run the measured protocol.
pub fn run_measured_evolution(
    model: &VdpModel,
    schedule: &MeasurementSchedule,
    cfg: &IntegratorConfig,
    init_center: Complex64,
    n_traj: usize,
    snapshot_times: &[f64],
) -> Result<MeasuredRun> {
    run_measured_evolution_with_progress(model, schedule, cfg, init_center, n_traj, snapshot_times, None)
}

pub fn run_measured_evolution_with_progress(
    model: &VdpModel,
    schedule: &MeasurementSchedule,
    cfg: &IntegratorConfig,
    init_center: Complex64,
    n_traj: usize,
    snapshot_times: &[f64],
    progress: Option<OnCollapse<'_, Complex64>>,
) -> Result<MeasuredRun> {
    let mut ens = crate::sde_core::init_coherent(init_center, n_traj, cfg.seed)?;
    let mut obs = SingleModeObserver { stats: Vec::new(), snapshots: vec![None; snapshot_times.len()], progress };
    let collapses = run_protocol(&mut ens, model, cfg, schedule, snapshot_times, &mut obs)?;
    let snapshots = obs
        .snapshots
        .into_iter()
        .zip(snapshot_times)
        .map(|(s, &t)| s.ok_or_else(|| Error::Schedule(format!("snapshot time {t} lies beyond the run"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasuredRun { stats: obs.stats, collapses, snapshots, final_ensemble: ens })
}
