//! Fourier analysis of the mean coordinate and the measurement threshold.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sde_core::{limit_cycle_radius, OscillatorParams};

/// Relative tolerance on sample spacing accepted by [`fourier_q_timed`].
pub const UNIFORMITY_TOL: f64 = 1e-9;

/// `|Q(ω)|` on the one-sided grid `ω_m = m·2π/(K·dt)`, `m = 0..=K/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl SpectralSeries {
    pub fn spacing(&self) -> f64 {
        self.frequencies.get(1).map_or(0.0, |w| w - self.frequencies[0])
    }

    /// Index of the grid point closest to `omega`.
    pub fn nearest(&self, omega: f64) -> usize {
        let dw = self.spacing();
        if dw <= 0.0 {
            return 0;
        }
        ((omega / dw).round().max(0.0) as usize).min(self.frequencies.len() - 1)
    }

    pub fn magnitude_at(&self, omega: f64) -> f64 {
        self.magnitudes[self.nearest(omega)]
    }

    /// Largest magnitude with `|ω − omega| ≤ rel·omega`.
    pub fn peak_near(&self, omega: f64, rel: f64) -> f64 {
        let (lo, hi) = (omega * (1.0 - rel), omega * (1.0 + rel));
        self.frequencies
            .iter()
            .zip(&self.magnitudes)
            .filter(|(w, _)| (lo..=hi).contains(*w))
            .map(|(_, m)| *m)
            .fold(self.magnitude_at(omega), f64::max)
    }

    /// Median magnitude over `ω ∈ [lo, hi]`.
    pub fn median_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let mut v: Vec<f64> = self
            .frequencies
            .iter()
            .zip(&self.magnitudes)
            .filter(|(w, _)| (lo..=hi).contains(*w))
            .map(|(_, m)| *m)
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }

    pub fn max_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.frequencies
            .iter()
            .zip(&self.magnitudes)
            .filter(|(w, _)| (lo..=hi).contains(*w))
            .map(|(_, m)| *m)
            .reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# kind=spectrum")?;
        writeln!(w, "omega,magnitude")?;
        for (f, m) in self.frequencies.iter().zip(&self.magnitudes) {
            writeln!(w, "{f:.9},{m:.9e}")?;
        }
        Ok(())
    }
}

/// Rectangle-rule transform `|Σ_k x_k e^{−iω t_k} dt| / √(2π)` with `t_k = k·dt`,
/// evaluated on the natural DFT grid.
pub fn fourier_q(series: &[f64], dt_record: f64) -> Result<SpectralSeries> {
    if series.len() < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {}", series.len())));
    }
    if !(dt_record > 0.0) || !dt_record.is_finite() {
        return Err(Error::Argument(format!("sampling interval must be positive, got {dt_record}")));
    }
    let k = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    let scale = dt_record / (2.0 * PI).sqrt();
    let dw = 2.0 * PI / (k as f64 * dt_record);
    let half = k / 2;
    Ok(SpectralSeries {
        frequencies: (0..=half).map(|m| m as f64 * dw).collect(),
        magnitudes: buf[..=half].iter().map(|c| c.norm() * scale).collect(),
    })
}

/// As [`fourier_q`], taking explicit sample times that must be uniformly spaced.
pub fn fourier_q_timed(times: &[f64], values: &[f64]) -> Result<SpectralSeries> {
    if times.len() != values.len() {
        return Err(Error::Argument("times and values differ in length".into()));
    }
    if times.len() < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {}", times.len())));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > UNIFORMITY_TOL * dt.abs().max(1.0) {
            return Err(Error::Argument(format!("non-uniform sampling at index {i}")));
        }
    }
    fourier_q(values, dt)
}

/// Peak at the grid point nearest `ω_m`, divided by the limit-cycle diameter.
pub fn peak_normalized(series: &SpectralSeries, params: &OscillatorParams) -> Result<f64> {
    Ok(series.magnitude_at(params.omega_m) / limit_cycle_radius(params)?)
}

/// Pointwise mean of spectra sharing one grid.
pub fn mean_spectrum(spectra: &[SpectralSeries]) -> Result<SpectralSeries> {
    let first = spectra.first().ok_or_else(|| Error::State("no spectra to average".into()))?;
    let mut acc = vec![0.0; first.magnitudes.len()];
    for s in spectra {
        if s.frequencies != first.frequencies {
            return Err(Error::Argument("spectra are on different grids".into()));
        }
        for (a, m) in acc.iter_mut().zip(&s.magnitudes) {
            *a += m;
        }
    }
    let n = spectra.len() as f64;
    Ok(SpectralSeries {
        frequencies: first.frequencies.clone(),
        magnitudes: acc.into_iter().map(|a| a / n).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalInterval {
    pub delta_t_c: f64,
    pub n_c: f64,
}

/// `Δt_c = (3π/ω_m)·sqrt(2κ2/(κ1 + 2κ2))` and `n_c = t/Δt_c`.
pub fn critical_interval(params: &OscillatorParams, total_time: f64) -> Result<CriticalInterval> {
    let g = params.kappa1 + 2.0 * params.kappa2;
    if !(g > 0.0) || !(params.omega_m > 0.0) || params.kappa2 < 0.0 {
        return Err(Error::Domain(format!(
            "critical interval undefined for omega_m={}, kappa1={}, kappa2={}",
            params.omega_m, params.kappa1, params.kappa2
        )));
    }
    let delta_t_c = 3.0 * PI / params.omega_m * (2.0 * params.kappa2 / g).sqrt();
    Ok(CriticalInterval { delta_t_c, n_c: total_time / delta_t_c })
}

/// The ratio `κ2/κ1` at which `Δt_c` equals `delta_t`.
pub fn threshold_ratio(omega_m: f64, delta_t: f64) -> Result<f64> {
    let s = (omega_m * delta_t / (3.0 * PI)).powi(2);
    if !(s > 0.0) || s >= 1.0 {
        return Err(Error::Domain(format!("no threshold ratio for omega_m*delta_t={}", omega_m * delta_t)));
    }
    Ok(s / (2.0 * (1.0 - s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn direct(series: &[f64], dt: f64, omega: f64) -> f64 {
        let s: Complex64 = series
            .iter()
            .enumerate()
            .map(|(k, &x)| x * Complex64::from_polar(1.0, -omega * k as f64 * dt))
            .sum();
        s.norm() * dt / (2.0 * PI).sqrt()
    }

    #[test]
    fn matches_direct_sum() {
        let dt = 0.05;
        let x: Vec<f64> = (0..301).map(|k| (0.37 * k as f64).sin() + 0.01 * (k % 7) as f64).collect();
        let s = fourier_q(&x, dt).unwrap();
        assert_eq!(s.frequencies.len(), 151);
        for (w, m) in s.frequencies.iter().zip(&s.magnitudes) {
            assert_relative_eq!(*m, direct(&x, dt, *w), epsilon = 1e-10, max_relative = 1e-9);
        }
        let top = *s.frequencies.last().unwrap();
        assert!(top <= PI / dt && top > PI / dt - s.spacing());
    }

    #[test]
    fn constant_series() {
        let s = fourier_q(&[2.5; 64], 0.1).unwrap();
        assert_relative_eq!(s.magnitudes[0], 2.5 * 6.4 / (2.0 * PI).sqrt(), max_relative = 1e-12);
        for m in &s.magnitudes[1..] {
            assert!(*m < 1e-12);
        }
    }

    #[test]
    fn cosine_on_grid() {
        let (k, dt, a) = (1000, 0.1, 3.0);
        let t = k as f64 * dt;
        let w0 = 2.0 * PI * 17.0 / t;
        let x: Vec<f64> = (0..k).map(|i| a * (w0 * i as f64 * dt).cos()).collect();
        let s = fourier_q(&x, dt).unwrap();
        let peak = s.nearest(w0);
        assert_eq!(peak, 17);
        assert_relative_eq!(s.magnitudes[peak], a * t / (2.0 * (2.0 * PI).sqrt()), max_relative = 1e-10);
        for (i, m) in s.magnitudes.iter().enumerate() {
            if i != peak {
                assert!(*m < 0.01 * s.magnitudes[peak]);
            }
        }
    }

    #[test]
    fn parseval_one_sided() {
        let dt = 0.2;
        for k in [500usize, 501] {
            let x: Vec<f64> = (0..k).map(|i| ((i * i) % 13) as f64 - 6.0 + (0.3 * i as f64).cos()).collect();
            let s = fourier_q(&x, dt).unwrap();
            let dw = s.spacing();
            let m2: Vec<f64> = s.magnitudes.iter().map(|m| m * m).collect();
            let last = m2.len() - 1;
            let mut lhs = m2[0] + 2.0 * m2[1..last].iter().sum::<f64>();
            lhs += if k % 2 == 0 { m2[last] } else { 2.0 * m2[last] };
            let rhs = x.iter().map(|v| v * v).sum::<f64>() * dt;
            assert_relative_eq!(lhs * dw, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn triangle_inequality() {
        let dt = 0.1;
        let x: Vec<f64> = (0..256).map(|i| (0.2 * i as f64).sin()).collect();
        let y: Vec<f64> = (0..256).map(|i| ((i % 5) as f64).sqrt()).collect();
        let (a, b) = (1.7, 0.4);
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fz) = (fourier_q(&x, dt).unwrap(), fourier_q(&y, dt).unwrap(), fourier_q(&z, dt).unwrap());
        for i in 0..fz.magnitudes.len() {
            assert!(fz.magnitudes[i] <= a * fx.magnitudes[i] + b * fy.magnitudes[i] + 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(fourier_q(&[1.0], 0.1), Err(Error::Argument(_))));
        assert!(matches!(fourier_q(&[1.0, 2.0], 0.0), Err(Error::Argument(_))));
        assert!(matches!(
            fourier_q_timed(&[0.0, 0.1, 0.25], &[1.0, 2.0, 3.0]),
            Err(Error::Argument(_))
        ));
        let t: Vec<f64> = (0..10).map(|i| 3.0 + 0.1 * i as f64).collect();
        let s = fourier_q_timed(&t, &[1.0; 10]).unwrap();
        assert_relative_eq!(s.magnitudes[0], 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn peak_normalized_values() {
        let p = OscillatorParams::reference();
        let r = limit_cycle_radius(&p).unwrap();
        let z = fourier_q(&[0.0; 100], 0.1).unwrap();
        assert_eq!(peak_normalized(&z, &p).unwrap(), 0.0);
        // ω_m = 1 lands on the grid when t = 2π·m
        let dt = 2.0 * PI / 100.0;
        let k = 3000;
        let x: Vec<f64> = (0..k).map(|i| r * (i as f64 * dt).cos()).collect();
        let s = fourier_q(&x, dt).unwrap();
        let t = k as f64 * dt;
        assert_relative_eq!(peak_normalized(&s, &p).unwrap(), t / (2.0 * (2.0 * PI).sqrt()), max_relative = 1e-9);
    }

    #[test]
    fn critical_interval_reference() {
        let c = critical_interval(&OscillatorParams::reference(), 600.0).unwrap();
        // 3π·sqrt(0.01/0.11)
        assert_relative_eq!(c.delta_t_c, 2.841_7, epsilon = 1e-4);
        assert_relative_eq!(c.n_c, 211.14, epsilon = 0.01);
        let tiny = OscillatorParams { omega_m: 1.0, kappa1: 0.1, kappa2: 1e-14 };
        assert!(critical_interval(&tiny, 600.0).unwrap().delta_t_c < 1e-5);
        let bad = OscillatorParams { omega_m: 1.0, kappa1: 0.0, kappa2: 0.0 };
        assert!(matches!(critical_interval(&bad, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_ratio_inverts_critical_interval() {
        let x = threshold_ratio(1.0, 0.3).unwrap();
        assert_relative_eq!(x, 5.0712e-4, max_relative = 1e-4);
        let p = OscillatorParams { omega_m: 1.0, kappa1: 0.1, kappa2: 0.1 * x };
        assert_relative_eq!(critical_interval(&p, 1.0).unwrap().delta_t_c, 0.3, max_relative = 1e-12);
        assert!(threshold_ratio(1.0, 3.0 * PI).is_err());
    }

    #[test]
    fn threshold_monotonicity() {
        let k1s = [0.01, 0.05, 0.1, 0.5];
        let k2s = [1e-4, 1e-3, 5e-3, 2e-2];
        let dtc = |k1: f64, k2: f64| {
            critical_interval(&OscillatorParams { omega_m: 1.0, kappa1: k1, kappa2: k2 }, 1.0).unwrap().delta_t_c
        };
        for &k1 in &k1s {
            for w in k2s.windows(2) {
                assert!(dtc(k1, w[1]) > dtc(k1, w[0]));
            }
        }
        for &k2 in &k2s {
            for w in k1s.windows(2) {
                assert!(dtc(w[1], k2) < dtc(w[0], k2));
            }
        }
    }

    #[test]
    fn window_helpers() {
        let s = SpectralSeries { frequencies: vec![0.0, 1.0, 2.0, 3.0], magnitudes: vec![4.0, 1.0, 3.0, 2.0] };
        assert_eq!(s.median_in(0.0, 3.0), Some(2.5));
        assert_eq!(s.median_in(1.0, 3.0), Some(2.0));
        assert_eq!(s.max_in(1.0, 3.0), Some(3.0));
        assert_eq!(s.peak_near(1.0, 1.0), 4.0);
        assert_eq!(s.peak_near(1.0, 0.01), 1.0);
        let m = mean_spectrum(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(m, s);
    }
}
