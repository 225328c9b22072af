//! Phase-space and phase densities estimated from trajectory samples.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sde_core::{quadrature_p, quadrature_q};

/// Default pixel side in quadrature units.
pub const DEFAULT_BIN_SIDE: f64 = 0.1;

/// Mean resultant lengths below this are treated as a uniform distribution.
pub const RESULTANT_FLOOR: f64 = 1e-6;

/// Value returned by [`circular_spread`] for (numerically) uniform densities.
pub fn spread_cap() -> f64 {
    (-2.0 * RESULTANT_FLOOR.ln()).sqrt()
}

/// Counts of samples in square `(Q, P)` pixels.
///
/// Pixel centres sit on the lattice `(i·h, j·h)`, `|i|, |j| ≤ half_bins`; a
/// sample belongs to the pixel with `Q ∈ (Q_c − h/2, Q_c + h/2]` and likewise
/// for `P`. Samples outside the grid are dropped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerHistogram {
    pub h: f64,
    pub half_bins: usize,
    /// Row-major: row index runs over `Q`, column over `P`.
    pub counts: Vec<u64>,
    pub n_total: u64,
    pub dropped: u64,
}

impl WignerHistogram {
    pub fn side(&self) -> usize {
        2 * self.half_bins + 1
    }

    /// Pixel centres along either axis.
    pub fn centers(&self) -> Vec<f64> {
        let k = self.half_bins as i64;
        (-k..=k).map(|i| i as f64 * self.h).collect()
    }

    /// Outer edge of the grid, `(half_bins + 1/2)·h`.
    pub fn extent(&self) -> f64 {
        (self.half_bins as f64 + 0.5) * self.h
    }

    /// `N_{Q,P}/(N h²)` per pixel.
    pub fn density(&self) -> Vec<f64> {
        let norm = 1.0 / (self.n_total as f64 * self.h * self.h);
        self.counts.iter().map(|&c| c as f64 * norm).collect()
    }

    pub fn index(&self, iq: usize, ip: usize) -> usize {
        iq * self.side() + ip
    }

    /// Integrated density over the grid (the in-range fraction).
    pub fn mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.n_total as f64
    }

    /// Sum counts into coarser pixels of side `factor·h` (odd `factor`).
    pub fn coarsen(&self, factor: usize) -> Result<WignerHistogram> {
        if factor == 0 || factor.is_multiple_of(2) {
            return Err(Error::Argument(format!("coarsening factor must be odd, got {factor}")));
        }
        let half = factor / 2;
        let new_half = (self.half_bins - half) / factor;
        let side = 2 * new_half + 1;
        let mut counts = vec![0u64; side * side];
        let off = self.half_bins as i64;
        let mut kept = 0;
        for iq in 0..side {
            for ip in 0..side {
                let cq = (iq as i64 - new_half as i64) * factor as i64;
                let cp = (ip as i64 - new_half as i64) * factor as i64;
                let mut sum = 0;
                for dq in -(half as i64)..=(half as i64) {
                    for dp in -(half as i64)..=(half as i64) {
                        let q = (cq + dq + off) as usize;
                        let p = (cp + dp + off) as usize;
                        sum += self.counts[self.index(q, p)];
                    }
                }
                kept += sum;
                counts[iq * side + ip] = sum;
            }
        }
        let total_in = self.counts.iter().sum::<u64>();
        Ok(WignerHistogram {
            h: self.h * factor as f64,
            half_bins: new_half,
            counts,
            n_total: self.n_total,
            dropped: self.dropped + (total_in - kept),
        })
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let meta = [
            ("kind", "wigner_histogram".to_string()),
            ("h", format!("{}", self.h)),
            ("extent", format!("{}", self.extent())),
            ("n_total", self.n_total.to_string()),
            ("dropped", self.dropped.to_string()),
        ];
        let c = self.centers();
        write_grid_csv(w, &meta, &c, &c, &self.density())
    }
}

/// Pixel index of `x` along one axis, if inside the grid.
#[inline]
fn pixel(x: f64, h: f64, half: i64) -> Option<usize> {
    let k = (x / h - 0.5).ceil() as i64;
    if k.abs() <= half {
        Some((k + half) as usize)
    } else {
        None
    }
}

/// Histogram of `(Q, P)` samples with pixel side `h`, covering at least
/// `[-extent, extent]` on both axes.
pub fn wigner_histogram(states: &[Complex64], h: f64, extent: f64) -> Result<WignerHistogram> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Argument(format!("pixel side must be positive, got {h}")));
    }
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::Argument(format!("extent must be positive, got {extent}")));
    }
    if states.is_empty() {
        return Err(Error::State("no samples to histogram".into()));
    }
    let half = (extent / h - 0.5).ceil().max(0.0) as usize;
    let side = 2 * half + 1;
    let mut counts = vec![0u64; side * side];
    let mut dropped = 0;
    for a in states {
        match (pixel(quadrature_q(*a), h, half as i64), pixel(quadrature_p(*a), h, half as i64)) {
            (Some(iq), Some(ip)) => counts[iq * side + ip] += 1,
            _ => dropped += 1,
        }
    }
    Ok(WignerHistogram { h, half_bins: half, counts, n_total: states.len() as u64, dropped })
}

/// Density scaled so that its maximum is 1.
pub fn normalized(hist: &WignerHistogram) -> Result<Vec<f64>> {
    normalize_max(&hist.density())
}

/// Scale a non-negative grid to unit maximum.
pub fn normalize_max(values: &[f64]) -> Result<Vec<f64>> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::State("cannot normalise a grid without positive values".into()));
    }
    Ok(values.iter().map(|v| v / max).collect())
}

/// Long-format grid CSV: `#`-prefixed `key=value` metadata, then `q,p,value`
/// rows with `q` varying slowest.
pub fn write_grid_csv<W: Write>(
    w: &mut W,
    meta: &[(&str, String)],
    qs: &[f64],
    ps: &[f64],
    values: &[f64],
) -> io::Result<()> {
    assert_eq!(values.len(), qs.len() * ps.len());
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "q,p,value")?;
    for (iq, q) in qs.iter().enumerate() {
        for (ip, p) in ps.iter().enumerate() {
            writeln!(w, "{q:.6},{p:.6},{:.9e}", values[iq * ps.len() + ip])?;
        }
    }
    Ok(())
}

/// Wrap an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Phase `θ = arg α` in `[0, 2π)`, counterclockwise in the `(Re α, Im α)` plane.
pub fn angles_of(states: &[Complex64]) -> Vec<f64> {
    states.iter().map(|a| wrap_angle(a.im.atan2(a.re))).collect()
}

/// Circular density over bins centred at `k·2π/n_bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub density: Vec<f64>,
}

impl PhaseDistribution {
    pub fn n_bins(&self) -> usize {
        self.density.len()
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.n_bins() as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.n_bins()).map(|k| k as f64 * w).collect()
    }

    /// Bin holding `theta`.
    pub fn bin_of(&self, theta: f64) -> usize {
        (wrap_angle(theta) / self.bin_width()).round() as usize % self.n_bins()
    }

    /// Per-radian density in the bin containing `theta`.
    pub fn density_at(&self, theta: f64) -> f64 {
        self.density[self.bin_of(theta)]
    }

    /// `Σ density·w·e^{iθ_k}`: first trigonometric moment.
    pub fn moment(&self, harmonic: u32) -> Complex64 {
        let w = self.bin_width();
        self.density
            .iter()
            .enumerate()
            .map(|(k, d)| d * w * Complex64::from_polar(1.0, harmonic as f64 * k as f64 * w))
            .sum()
    }

    pub fn mean_resultant_length(&self) -> f64 {
        self.moment(1).norm()
    }

    /// Probability mass within `±half_width` of `center` (whole bins by centre).
    pub fn mass_near(&self, center: f64, half_width: f64) -> f64 {
        let w = self.bin_width();
        self.density
            .iter()
            .enumerate()
            .filter(|(k, _)| circular_distance(*k as f64 * w, center) <= half_width + 1e-12)
            .map(|(_, d)| d * w)
            .sum()
    }

    /// Centre of the most populated bin.
    pub fn mode(&self) -> f64 {
        let (k, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &d)| if d > acc.1 { (k, d) } else { acc });
        k as f64 * self.bin_width()
    }

    /// Pointwise average of distributions with identical binning.
    pub fn average(dists: &[PhaseDistribution]) -> Result<PhaseDistribution> {
        let first = dists.first().ok_or_else(|| Error::State("nothing to average".into()))?;
        let n = first.n_bins();
        let mut acc = vec![0.0; n];
        for d in dists {
            if d.n_bins() != n {
                return Err(Error::Argument("distributions have different binning".into()));
            }
            for (a, v) in acc.iter_mut().zip(&d.density) {
                *a += v;
            }
        }
        let m = dists.len() as f64;
        Ok(PhaseDistribution { density: acc.into_iter().map(|a| a / m).collect() })
    }

    pub fn normalization(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Normalised density of `angles` over `n_bins` bins.
pub fn phase_distribution(angles: &[f64], n_bins: usize) -> Result<PhaseDistribution> {
    if n_bins < 8 {
        return Err(Error::Argument(format!("need at least 8 phase bins, got {n_bins}")));
    }
    if angles.is_empty() {
        return Err(Error::State("no angles to bin".into()));
    }
    let w = TAU / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &t in angles {
        counts[(wrap_angle(t) / w).round() as usize % n_bins] += 1;
    }
    let norm = 1.0 / (angles.len() as f64 * w);
    Ok(PhaseDistribution { density: counts.into_iter().map(|c| c as f64 * norm).collect() })
}

/// Circular standard deviation `sqrt(−2 ln R)`; capped at [`spread_cap`] for
/// uniform densities.
pub fn circular_spread(dist: &PhaseDistribution) -> f64 {
    spread_from_resultant(dist.mean_resultant_length())
}

pub fn spread_from_resultant(r: f64) -> f64 {
    if r <= RESULTANT_FLOOR {
        spread_cap()
    } else {
        (-2.0 * r.min(1.0).ln()).sqrt()
    }
}

/// Circular spread computed straight from samples, without binning.
pub fn circular_spread_of_angles(angles: &[f64]) -> f64 {
    let n = angles.len() as f64;
    let s: Complex64 = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).sum();
    spread_from_resultant((s / n).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_bin_histogram() {
        let states = vec![Complex64::new(0.51, -0.26); 1000];
        let h = 0.1;
        let hist = wigner_histogram(&states, h, 2.0).unwrap();
        let d = hist.density();
        let max = d.iter().cloned().fold(0.0, f64::max);
        assert_abs_diff_eq!(max, 1.0 / (h * h), epsilon = 1e-9);
        assert_eq!(d.iter().filter(|&&v| v > 0.0).count(), 1);
        let idx = d.iter().position(|&v| v > 0.0).unwrap();
        let c = hist.centers();
        // Q = 1.02, P = -0.52
        assert_abs_diff_eq!(c[idx / hist.side()], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[idx % hist.side()], -0.5, epsilon = 1e-12);
        let n = normalized(&hist).unwrap();
        assert_eq!(n[idx], 1.0);
    }

    #[test]
    fn pixel_edges_are_half_open_from_below() {
        let h = 0.5;
        // Q = 0.25 lies on the upper edge of the pixel centred at 0
        assert_eq!(pixel(0.25, h, 4), Some(4));
        assert_eq!(pixel(0.2500001, h, 4), Some(5));
        assert_eq!(pixel(-0.25, h, 4), Some(3));
    }

    #[test]
    fn histogram_errors() {
        let s = [Complex64::new(0.0, 0.0)];
        assert!(matches!(wigner_histogram(&s, 0.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(wigner_histogram(&s, -1.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(wigner_histogram(&[], 0.1, 1.0), Err(Error::State(_))));
        let empty = WignerHistogram { h: 1.0, half_bins: 0, counts: vec![0], n_total: 1, dropped: 1 };
        assert!(matches!(normalized(&empty), Err(Error::State(_))));
    }

    #[test]
    fn mass_plus_dropped_is_one() {
        let mut r = rng::trajectory_stream(1, 0);
        let states: Vec<Complex64> = (0..10_000).map(|_| rng::complex_normal(&mut r, 8.0)).collect();
        let hist = wigner_histogram(&states, 0.2, 3.0).unwrap();
        assert!(hist.dropped > 0);
        let mass = hist.density().iter().sum::<f64>() * hist.h * hist.h;
        assert_abs_diff_eq!(mass + hist.dropped as f64 / hist.n_total as f64, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_sample_histogram() {
        let r = 2.0 * 11f64.sqrt();
        let ens = crate::sde_core::init_coherent(Complex64::new(r / 2.0, 0.0), 1_000_000, 5).unwrap();
        let h = 0.1;
        let hist = wigner_histogram(ens.states(), h, 1.5 * r).unwrap();
        let d = hist.density();
        let imax = (0..d.len()).max_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap()).unwrap();
        let c = hist.centers();
        assert!((c[imax / hist.side()] - r).abs() < h * 1.0 + 1e-9);
        assert!(c[imax % hist.side()].abs() < h + 1e-9);
        // Gaussian with unit quadrature variance: peak density 1/(2π)
        let q_var = ens.states().iter().map(|a| (2.0 * a.re - r).powi(2)).sum::<f64>() / ens.len() as f64;
        assert!((q_var - 1.0).abs() < 0.005);
        assert!((d[imax] - 1.0 / TAU).abs() < 0.02, "{}", d[imax]);
    }

    #[test]
    fn refinement_consistency() {
        let mut r = rng::trajectory_stream(2, 0);
        let coarse_s: Vec<Complex64> = (0..200_000).map(|_| rng::complex_normal(&mut r, 1.0)).collect();
        let fine_s: Vec<Complex64> = (0..400_000).map(|_| rng::complex_normal(&mut r, 1.0)).collect();
        let coarse = wigner_histogram(&coarse_s, 0.3, 3.0).unwrap();
        let fine = wigner_histogram(&fine_s, 0.1, 3.1).unwrap().coarsen(3).unwrap();
        assert_eq!(coarse.side(), fine.side());
        let (dc, df) = (coarse.density(), fine.density());
        for (i, (a, b)) in dc.iter().zip(&df).enumerate() {
            let sigma = ((a / (200_000.0 * 0.09)) + (b / (400_000.0 * 0.09))).sqrt();
            assert!((a - b).abs() < 5.0 * sigma + 1e-9, "pixel {i}: {a} vs {b}");
        }
    }

    #[test]
    fn phase_distribution_spike() {
        let d = phase_distribution(&[1.0; 100], 32).unwrap();
        let max = d.density.iter().cloned().fold(0.0, f64::max);
        assert_abs_diff_eq!(max, 32.0 / TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(d.normalization(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(circular_spread(&d), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn phase_distribution_uniform() {
        let mut r = rng::trajectory_stream(3, 0);
        let n = 1_000_000;
        let angles: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r) * TAU).collect();
        let d = phase_distribution(&angles, 64).unwrap();
        let p = 1.0 / 64.0;
        let se = (p * (1.0 - p) / n as f64).sqrt() / (TAU / 64.0);
        for v in &d.density {
            assert!((v - 1.0 / TAU).abs() < 3.5 * se, "{v}");
        }
        assert_abs_diff_eq!(d.normalization(), 1.0, epsilon = 1e-12);
        let exact = PhaseDistribution { density: vec![1.0 / TAU; 64] };
        assert_eq!(circular_spread(&exact), spread_cap());
    }

    #[test]
    fn phase_distribution_errors() {
        assert!(matches!(phase_distribution(&[], 16), Err(Error::State(_))));
        assert!(matches!(phase_distribution(&[0.0], 4), Err(Error::Argument(_))));
    }

    #[test]
    fn bins_are_centred_on_zero_and_pi() {
        let d = phase_distribution(&[-0.01, 0.01, PI - 0.01, PI + 0.01], 64).unwrap();
        assert_abs_diff_eq!(d.density_at(0.0), 2.0 / 4.0 / d.bin_width(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.density_at(PI), 2.0 / 4.0 / d.bin_width(), epsilon = 1e-12);
    }

    fn bessel_i(order: u32, x: f64) -> f64 {
        // power series, ample for x = 4
        let mut sum = 0.0;
        let mut fact_k = 1.0;
        for k in 0..60u32 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_kn: f64 = (1..=(k + order)).map(|i| i as f64).product();
            sum += (x / 2.0).powi((2 * k + order) as i32) / (fact_k * fact_kn);
        }
        sum
    }

    #[test]
    fn von_mises_resultant_matches_bessel_ratio() {
        // rejection sampler against a uniform envelope
        let kappa = 4.0;
        let mut r = rng::trajectory_stream(4, 0);
        let mut angles = Vec::new();
        while angles.len() < 400_000 {
            let t = rng::uniform(&mut r) * TAU;
            if rng::uniform(&mut r) < (kappa * (t.cos() - 1.0)).exp() {
                angles.push(t);
            }
        }
        let d = phase_distribution(&angles, 128).unwrap();
        let analytic = bessel_i(1, kappa) / bessel_i(0, kappa);
        assert_abs_diff_eq!(analytic, 0.8635, epsilon = 1e-3);
        let got = d.mean_resultant_length();
        assert!((got / analytic - 1.0).abs() < 0.02, "{got} vs {analytic}");
        let spread = circular_spread(&d);
        assert!((spread - (-2.0 * analytic.ln()).sqrt()).abs() < 0.03);
    }

    #[test]
    fn mass_near_and_mode() {
        let d = phase_distribution(&[0.1, 0.1, 0.2, 3.0], 64).unwrap();
        assert!((d.mass_near(0.1, PI / 4.0) - 0.75).abs() < 1e-12);
        assert!((d.mode() - 0.1).abs() < d.bin_width());
    }

    #[test]
    fn wrap_angle_range() {
        for t in [-10.0, -TAU, -1e-18, 0.0, PI, TAU, 13.0] {
            let w = wrap_angle(t);
            assert!((0.0..TAU).contains(&w), "{t} -> {w}");
        }
    }
}
