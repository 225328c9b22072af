//! Exact branch: Lindblad evolution in a truncated Fock basis, the dichotomic
//! coherent-state POVM and Wigner evaluation.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::phase_space::write_grid_csv;
use crate::rng;
use crate::sde_core::OscillatorParams;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_DIM: usize = 50;
pub const DEFAULT_DT: f64 = 1e-3;
/// Per-step trace drift that is silently renormalised.
pub const TRACE_RENORM_TOL: f64 = 1e-9;
/// Per-step trace drift treated as a failed step.
pub const TRACE_DRIFT_MAX: f64 = 1e-6;
/// Population allowed in the highest retained level before flagging overflow.
pub const TOP_POPULATION_MAX: f64 = 1e-6;
/// `‖dρ/dt‖_F` at which integration is considered stationary.
pub const STEADY_TOL: f64 = 1e-9;
/// Smallest branch probability that can be renormalised.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_FLOOR: f64 = -1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Annihilation operator truncated to `dim` levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator.
pub fn number(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| Complex64::new(n as f64, 0.0)))
}

/// Parity `(−1)^{a†a}`.
pub fn parity(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)))
}

fn check_guard(alpha: Complex64, dim: usize) -> Result<()> {
    if alpha.norm_sqr() >= dim as f64 / 4.0 {
        return Err(Error::Truncation(format!(
            "|alpha|^2 = {:.4} exceeds dim/4 = {} for displacement",
            alpha.norm_sqr(),
            dim as f64 / 4.0
        )));
    }
    Ok(())
}

/// `D(α) = exp(α a† − α* a)` in the truncated basis.
pub fn displacement(alpha: Complex64, dim: usize) -> Result<CMatrix> {
    check_guard(alpha, dim)?;
    let a = annihilation(dim);
    let gen = a.adjoint() * alpha - a * alpha.conj();
    Ok(gen.exp())
}

/// `D(α)|0⟩`.
pub fn coherent_vector(alpha: Complex64, dim: usize) -> Result<CVector> {
    Ok(displacement(alpha, dim)?.column(0).into_owned())
}

/// Truncated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix after checking shape, Hermiticity and trace.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::State(format!("density matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        let rho = DensityMatrix { m };
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::State(format!("matrix is not Hermitian (error {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::State(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    fn from_matrix_unchecked(m: CMatrix) -> Self {
        DensityMatrix { m }
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::State("zero state vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Ok(DensityMatrix { m: &v * v.adjoint() })
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Truncation(format!("level {n} outside a {dim}-level space")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(n, n)] = C1;
        Ok(DensityMatrix { m })
    }

    /// Coherent state built with the truncated displacement.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        DensityMatrix::pure(&coherent_vector(alpha, dim)?)
    }

    /// Diagonal state with Poisson populations of the given mean, renormalised
    /// after truncation.
    pub fn poisson_diagonal(mean: f64, dim: usize) -> Result<Self> {
        if !(mean >= 0.0) {
            return Err(Error::Argument(format!("mean occupation must be non-negative, got {mean}")));
        }
        let mut p = vec![0.0; dim];
        let mut log_term = -mean;
        for (n, pn) in p.iter_mut().enumerate() {
            if n > 0 {
                log_term += mean.ln() - (n as f64).ln();
            }
            *pn = if mean == 0.0 { (n == 0) as u8 as f64 } else { log_term.exp() };
        }
        let total: f64 = p.iter().sum();
        let diag = CVector::from_iterator(dim, p.iter().map(|x| Complex64::new(x / total, 0.0)));
        Ok(DensityMatrix { m: CMatrix::from_diagonal(&diag) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn population(&self, n: usize) -> f64 {
        self.m[(n, n)].re
    }

    pub fn mean_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.m[(n, n)].re).sum()
    }

    /// `Tr(ρ a)`.
    pub fn mean_amplitude(&self) -> Complex64 {
        (1..self.dim()).map(|n| (n as f64).sqrt() * self.m[(n, n - 1)]).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_pure(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.m * psi)[(0, 0)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.m - self.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Hermiticity, trace and positivity checks.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::State(format!("lost Hermiticity (error {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::State(format!("trace {tr} differs from 1")));
        }
        let ev = self.min_eigenvalue();
        if ev < POSITIVITY_FLOOR {
            return Err(Error::State(format!("negative eigenvalue {ev:.3e}")));
        }
        Ok(())
    }

    /// Copy into a larger (zero-padded) or equal truncation.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::Argument(format!("cannot embed a {}-level state in {dim} levels", self.dim())));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.m);
        Ok(DensityMatrix { m })
    }

    fn hermitize(&mut self) {
        let adj = self.m.adjoint();
        self.m = (&self.m + adj) * Complex64::new(0.5, 0.0);
    }
}

/// `dρ/dt = −i[ω a†a, ρ] + κ1 L[a†]ρ + κ2 L[a²]ρ` with precomputed
/// elementwise coefficients.
#[derive(Debug, Clone)]
pub struct FockModel {
    pub params: OscillatorParams,
    dim: usize,
    decay: Vec<Complex64>,
    gain_up: Vec<f64>,
    gain_down: Vec<f64>,
}

impl FockModel {
    pub fn new(params: OscillatorParams, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim < 3 {
            return Err(Error::Argument(format!("need at least 3 levels, got {dim}")));
        }
        let (w, k1, k2) = (params.omega_m, params.kappa1, params.kappa2);
        // truncated a a† has a zero in its last diagonal entry
        let aad = |n: usize| if n + 1 < dim { (n + 1) as f64 } else { 0.0 };
        let nn1 = |n: usize| (n * n.saturating_sub(1)) as f64;
        let mut decay = Vec::with_capacity(dim * dim);
        let mut gain_up = Vec::with_capacity(dim * dim);
        let mut gain_down = Vec::with_capacity(dim * dim);
        // column-major: index = n·dim + m for element (m, n)
        for n in 0..dim {
            for m in 0..dim {
                decay.push(Complex64::new(
                    -k1 * (aad(m) + aad(n)) - k2 * (nn1(m) + nn1(n)),
                    -w * (m as f64 - n as f64),
                ));
                gain_up.push(2.0 * k1 * ((m * n) as f64).sqrt());
                gain_down.push(if m + 2 < dim && n + 2 < dim {
                    2.0 * k2 * (((m + 1) * (m + 2) * (n + 1) * (n + 2)) as f64).sqrt()
                } else {
                    0.0
                });
            }
        }
        Ok(FockModel { params, dim, decay, gain_up, gain_down })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `dρ/dt` into `out`.
    pub fn liouvillian(&self, rho: &CMatrix, out: &mut CMatrix) {
        let d = self.dim;
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        for n in 0..d {
            for m in 0..d {
                let i = n * d + m;
                let mut v = self.decay[i] * src[i];
                if m > 0 && n > 0 {
                    v += src[i - d - 1] * self.gain_up[i];
                }
                if m + 2 < d && n + 2 < d {
                    v += src[i + 2 * d + 2] * self.gain_down[i];
                }
                dst[i] = v;
            }
        }
    }

    /// `‖dρ/dt‖_F`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        self.liouvillian(&rho.m, &mut out);
        out.norm()
    }

    /// One RK4 step with trace and truncation checks.
    pub fn lindblad_step(&self, rho: &mut DensityMatrix, dt: f64) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::Argument(format!("state has {} levels, model {}", rho.dim(), self.dim)));
        }
        let d = self.dim;
        let tr0 = rho.trace();
        let mut k1 = CMatrix::zeros(d, d);
        let mut k2 = CMatrix::zeros(d, d);
        let mut k3 = CMatrix::zeros(d, d);
        let mut k4 = CMatrix::zeros(d, d);
        let h = Complex64::new(dt, 0.0);
        let half = Complex64::new(0.5 * dt, 0.0);
        self.liouvillian(&rho.m, &mut k1);
        self.liouvillian(&(&rho.m + &k1 * half), &mut k2);
        self.liouvillian(&(&rho.m + &k2 * half), &mut k3);
        self.liouvillian(&(&rho.m + &k3 * h), &mut k4);
        let sixth = Complex64::new(dt / 6.0, 0.0);
        rho.m += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;
        let tr = rho.trace();
        let drift = (tr - tr0).abs();
        if !drift.is_finite() || drift > TRACE_DRIFT_MAX {
            return Err(Error::StepSize(format!("trace drift {drift:.3e} in one step of dt={dt}")));
        }
        if drift > 0.0 {
            rho.m /= Complex64::new(tr / tr0, 0.0);
        }
        let top = rho.population(d - 1);
        if top > TOP_POPULATION_MAX {
            return Err(Error::Truncation(format!(
                "population {top:.3e} in level {} exceeds {TOP_POPULATION_MAX:e}",
                d - 1
            )));
        }
        Ok(())
    }

    /// Integrate for `round(duration/dt)` steps.
    pub fn evolve(&self, rho: &mut DensityMatrix, duration: f64, dt: f64) -> Result<()> {
        for _ in 0..steps(duration, dt)? {
            self.lindblad_step(rho, dt)?;
        }
        Ok(())
    }

    /// Stationary state reached from Poisson populations around the
    /// semiclassical occupation.
    pub fn steady_state(&self, dt: f64, max_time: f64) -> Result<DensityMatrix> {
        let mut rho = DensityMatrix::poisson_diagonal(self.params.steady_occupation(), self.dim)?;
        let check_every = ((1.0 / dt).round() as u64).max(1);
        let max_steps = steps(max_time, dt)?;
        let mut k = 0;
        while k < max_steps {
            for _ in 0..check_every {
                self.lindblad_step(&mut rho, dt)?;
            }
            k += check_every;
            if self.residual(&rho) < STEADY_TOL {
                rho.hermitize();
                return Ok(rho);
            }
        }
        Err(Error::State(format!(
            "no steady state within t = {max_time} (residual {:.3e})",
            self.residual(&rho)
        )))
    }
}

fn steps(duration: f64, dt: f64) -> Result<u64> {
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::Argument(format!("invalid duration {duration} or step {dt}")));
    }
    Ok((duration / dt).round() as u64)
}

/// Rotating target amplitude `sqrt(Tr(ρ_s a†a))·e^{−iω_m t}`.
pub fn target_state(rho_steady: &DensityMatrix, t: f64, params: &OscillatorParams) -> Complex64 {
    Complex64::from_polar(rho_steady.mean_number().sqrt(), -params.omega_m * t)
}

/// `P₁ = ⟨0|D†(α) ρ D(α)|0⟩`.
pub fn dichotomic_probability(rho: &DensityMatrix, alpha: Complex64) -> Result<f64> {
    Ok(rho.expectation_pure(&coherent_vector(alpha, rho.dim())?).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Projection onto `|α⟩`.
    Coherent,
    /// Projection onto the complement `I − |α⟩⟨α|`.
    Complement,
}

impl Outcome {
    pub fn label(self) -> u8 {
        match self {
            Outcome::Coherent => 1,
            Outcome::Complement => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DichotomicResult {
    pub outcome: Outcome,
    pub state: DensityMatrix,
    pub p1: f64,
}

/// Post-measurement state for a given outcome, with that outcome's probability.
pub fn dichotomic_project(rho: &DensityMatrix, alpha: Complex64, outcome: Outcome) -> Result<(DensityMatrix, f64)> {
    let dim = rho.dim();
    let d = displacement(alpha, dim)?;
    let shifted = d.adjoint() * &rho.m * &d;
    let p1 = shifted[(0, 0)].re.clamp(0.0, 1.0);
    let mut post = match outcome {
        Outcome::Coherent => {
            let mut m = CMatrix::zeros(dim, dim);
            m[(0, 0)] = C1;
            m
        }
        Outcome::Complement => {
            let mut m = shifted;
            m.row_mut(0).fill(C0);
            m.column_mut(0).fill(C0);
            m
        }
    };
    let p = match outcome {
        Outcome::Coherent => p1,
        Outcome::Complement => 1.0 - p1,
    };
    if p < PROBABILITY_FLOOR {
        return Err(Error::Renormalization(format!(
            "outcome {} has probability {p:.3e}",
            outcome.label()
        )));
    }
    if outcome == Outcome::Complement {
        let tr = post.trace().re;
        post /= Complex64::new(tr, 0.0);
    }
    let mut out = DensityMatrix::from_matrix_unchecked(&d * post * d.adjoint());
    out.hermitize();
    Ok((out, p))
}

/// Sample an outcome with probability `P₁` and return the collapsed state.
pub fn dichotomic_measure<R: Rng + ?Sized>(rho: &DensityMatrix, alpha: Complex64, rng: &mut R) -> Result<DichotomicResult> {
    let p1 = dichotomic_probability(rho, alpha)?;
    let outcome = if rng::uniform(rng) < p1 { Outcome::Coherent } else { Outcome::Complement };
    let (state, _) = dichotomic_project(rho, alpha, outcome)?;
    Ok(DichotomicResult { outcome, state, p1 })
}

/// The state left by the previous measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalStart {
    /// `ρ_m1`: the coherent target state.
    Coherent,
    /// `ρ_m2`: the complement projection of the stationary state.
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub delta_t: Vec<f64>,
    pub p1: Vec<f64>,
    /// Slope of `P₁ = 1 − c_m Δt` over the smallest five points with `P₁ > 0.9`.
    pub c_m: Option<f64>,
}

impl SurvivalCurve {
    /// `[P₁(Δt)]^{t/Δt}` for every grid point.
    pub fn stay_probabilities(&self, total_time: f64) -> Vec<(f64, f64)> {
        self.delta_t
            .iter()
            .zip(&self.p1)
            .map(|(&dt, &p)| {
                let n = (total_time / dt).round();
                (n, p.powf(n))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# kind=survival")?;
        if let Some(c) = self.c_m {
            writeln!(w, "# c_m={c}")?;
        }
        writeln!(w, "delta_t,p1")?;
        for (t, p) in self.delta_t.iter().zip(&self.p1) {
            writeln!(w, "{t:.6},{p:.12}")?;
        }
        Ok(())
    }
}

/// Least-squares `c` in `P₁ = 1 − cΔt` over the fit window.
pub fn fit_linear_decay(delta_t: &[f64], p1: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = delta_t
        .iter()
        .zip(p1)
        .filter(|(_, &p)| p > 0.9)
        .map(|(&t, &p)| (t, p))
        .take(5)
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let num: f64 = pts.iter().map(|(t, p)| t * (1.0 - p)).sum();
    let den: f64 = pts.iter().map(|(t, _)| t * t).sum();
    Some(num / den)
}

/// Evolve from the chosen post-measurement state and record `P₁` against the
/// rotating target at each grid interval (which must be multiples of `dt`).
pub fn survival_experiment(
    model: &FockModel,
    steady: &DensityMatrix,
    start: SurvivalStart,
    delta_t: &[f64],
    dt: f64,
) -> Result<SurvivalCurve> {
    let mut grid: Vec<f64> = delta_t.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut marks = Vec::with_capacity(grid.len());
    for &t in &grid {
        if !(t > 0.0) {
            return Err(Error::Argument(format!("survival interval must be positive, got {t}")));
        }
        let k = (t / dt).round();
        if ((k * dt) - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Argument(format!("interval {t} is not a multiple of dt = {dt}")));
        }
        marks.push(k as u64);
    }
    let alpha0 = target_state(steady, 0.0, &model.params);
    let mut rho = match start {
        SurvivalStart::Coherent => DensityMatrix::coherent(alpha0, model.dim())?,
        SurvivalStart::Complement => dichotomic_project(steady, alpha0, Outcome::Complement)?.0,
    };
    let mut p1 = Vec::with_capacity(grid.len());
    let mut step = 0;
    for (&mark, &t) in marks.iter().zip(&grid) {
        while step < mark {
            model.lindblad_step(&mut rho, dt)?;
            step += 1;
        }
        p1.push(dichotomic_probability(&rho, target_state(steady, t, &model.params))?);
    }
    let c_m = fit_linear_decay(&grid, &p1);
    Ok(SurvivalCurve { delta_t: grid, p1, c_m })
}

/// Signed Wigner function on a `(Q, P)` grid, normalised over `d²α`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row-major, `Q` slowest.
    pub values: Vec<f64>,
    /// Some grid point has `|α|² ≥ dim/4`.
    pub guard_exceeded: bool,
}

impl WignerGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let meta = [
            ("kind", "wigner_fock".to_string()),
            ("normalization", "d2alpha".to_string()),
            ("guard_exceeded", self.guard_exceeded.to_string()),
        ];
        write_grid_csv(w, &meta, &self.qs, &self.ps, &self.values)
    }
}

/// `W(β) = (2/π) Tr[ρ D(β) Π D†(β)]` with `β = (Q + iP)/2`, from closed-form
/// matrix elements of `D(2β)` in terms of associated Laguerre polynomials.
pub fn wigner_from_density(rho: &DensityMatrix, qs: &[f64], ps: &[f64]) -> WignerGrid {
    let dim = rho.dim();
    let mut log_fact = vec![0.0; dim + 1];
    for k in 1..=dim {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    let mut values = Vec::with_capacity(qs.len() * ps.len());
    let mut guard_exceeded = false;
    let mut lag = vec![0.0; dim];
    for &q in qs {
        for &p in ps {
            let beta = Complex64::new(q, p) * 0.5;
            guard_exceeded |= beta.norm_sqr() >= dim as f64 / 4.0;
            let big = beta * 2.0;
            let x = big.norm_sqr();
            let ln_abs = if x > 0.0 { 0.5 * x.ln() } else { f64::NEG_INFINITY };
            let phase = big.arg();
            let mut w = 0.0;
            // ⟨m+k|D(A)|m⟩ = sqrt(m!/(m+k)!) A^k e^{−x/2} L_m^{(k)}(x)
            for k in 0..dim {
                laguerre_column(k, x, &mut lag[..dim - k]);
                let unit = Complex64::from_polar(1.0, k as f64 * phase);
                for m in 0..dim - k {
                    let n = m + k;
                    let log_pref = 0.5 * (log_fact[m] - log_fact[n]) - 0.5 * x
                        + if k == 0 { 0.0 } else { k as f64 * ln_abs };
                    let d_nm = unit * (log_pref.exp() * lag[m]);
                    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
                    // ρ_{mn}(−1)^m ⟨n|D|m⟩
                    let mut term = rho.m[(m, n)] * d_nm * sign_m;
                    if k > 0 {
                        // ⟨m|D(A)|n⟩ = sqrt(m!/n!) (−A*)^k e^{−x/2} L_m^{(k)}(x)
                        let d_mn = unit.conj() * (log_pref.exp() * lag[m]) * if k % 2 == 0 { 1.0 } else { -1.0 };
                        let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
                        term += rho.m[(n, m)] * d_mn * sign_n;
                    }
                    w += term.re;
                }
            }
            values.push(2.0 / PI * w);
        }
    }
    WignerGrid { qs: qs.to_vec(), ps: ps.to_vec(), values, guard_exceeded }
}

/// `L_m^{(k)}(x)` for `m = 0..out.len()`.
fn laguerre_column(k: usize, x: f64, out: &mut [f64]) {
    let a = k as f64;
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 1.0 + a - x;
    }
    for m in 1..out.len().saturating_sub(1) {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0 + a - x) * out[m] - (mf + a) * out[m - 1]) / (mf + 1.0);
    }
}

/// Symmetric grid `−extent..=extent` with spacing `h`.
pub fn symmetric_axis(extent: f64, h: f64) -> Vec<f64> {
    let k = (extent / h).round() as i64;
    (-k..=k).map(|i| i as f64 * h).collect()
}
