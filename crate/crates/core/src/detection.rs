//! Photon-counting detector models: wavelength-dependent quantum efficiency,
//! dark counts, optional non-paralyzable dead time, and Poisson shot noise.
//!
//! The shipped presets are documented stand-ins shaped by published behavior:
//! a superconducting nanowire detector (broadband, QE decaying exponentially
//! with wavelength, calibrated to 12% at 900 nm and 5% at 1200 nm, low dark
//! rate) and a silicon avalanche photodiode (40% flat below 1000 nm, rolling
//! off linearly to zero at the 1100 nm silicon edge).

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

use crate::interferometry::{Interferogram, InterferogramKind, InterferometryError};
use crate::qpm::Spectrum;
use crate::rng::{sample_poisson, CounterRng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectionError {
    #[error("quantum efficiency must lie in [0, 1]; got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("support range is empty or reversed: [{lo}, {hi}] nm")]
    EmptySupport { lo: f64, hi: f64 },
    #[error("tabulated curve needs at least two ascending wavelengths")]
    InvalidTable,
    #[error("dark rate must be non-negative, got {0}")]
    NegativeDarkRate(f64),
    #[error("dead time must be non-negative, got {0}")]
    NegativeDeadTime(f64),
    #[error("counting window must be positive, got {0} s")]
    NonPositiveWindow(f64),
    #[error("interferogram: {0}")]
    Interferogram(#[from] InterferometryError),
}

/// Wavelength-dependent quantum efficiency with hard support edges: outside
/// the support the detector is blind.
#[derive(Debug, Clone, PartialEq)]
pub enum QeCurve {
    Flat {
        value: f64,
        support_nm: (f64, f64),
    },
    /// `qe_ref · exp(−(λ − λ_ref)/decay)`, monotone non-increasing in λ.
    ExponentialDecay {
        qe_ref: f64,
        lambda_ref_nm: f64,
        decay_nm: f64,
        support_nm: (f64, f64),
    },
    /// Linear interpolation between (λ, η) nodes; support is the node hull.
    Tabulated {
        wavelengths_nm: Vec<f64>,
        values: Vec<f64>,
    },
}

impl QeCurve {
    pub fn flat(value: f64, support_nm: (f64, f64)) -> Result<Self, DetectionError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(DetectionError::EfficiencyOutOfRange(value));
        }
        check_support(support_nm)?;
        Ok(QeCurve::Flat { value, support_nm })
    }

    pub fn exponential_decay(
        qe_ref: f64,
        lambda_ref_nm: f64,
        decay_nm: f64,
        support_nm: (f64, f64),
    ) -> Result<Self, DetectionError> {
        check_support(support_nm)?;
        if !(0.0..=1.0).contains(&qe_ref) || decay_nm <= 0.0 {
            return Err(DetectionError::EfficiencyOutOfRange(qe_ref));
        }
        // peak efficiency sits at the short-wavelength support edge
        let peak = qe_ref * ((lambda_ref_nm - support_nm.0) / decay_nm).exp();
        if peak > 1.0 {
            return Err(DetectionError::EfficiencyOutOfRange(peak));
        }
        Ok(QeCurve::ExponentialDecay {
            qe_ref,
            lambda_ref_nm,
            decay_nm,
            support_nm,
        })
    }

    pub fn tabulated(wavelengths_nm: Vec<f64>, values: Vec<f64>) -> Result<Self, DetectionError> {
        if wavelengths_nm.len() < 2
            || wavelengths_nm.len() != values.len()
            || !wavelengths_nm.windows(2).all(|w| w[1] > w[0])
        {
            return Err(DetectionError::InvalidTable);
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(DetectionError::EfficiencyOutOfRange(v));
            }
        }
        Ok(QeCurve::Tabulated {
            wavelengths_nm,
            values,
        })
    }

    pub fn support_nm(&self) -> (f64, f64) {
        match self {
            QeCurve::Flat { support_nm, .. } | QeCurve::ExponentialDecay { support_nm, .. } => {
                *support_nm
            }
            QeCurve::Tabulated { wavelengths_nm, .. } => (
                wavelengths_nm[0],
                *wavelengths_nm.last().expect("validated table"),
            ),
        }
    }

    /// η(λ); zero outside the support.
    pub fn at(&self, lambda_nm: f64) -> f64 {
        let (lo, hi) = self.support_nm();
        if lambda_nm < lo || lambda_nm > hi {
            return 0.0;
        }
        match self {
            QeCurve::Flat { value, .. } => *value,
            QeCurve::ExponentialDecay {
                qe_ref,
                lambda_ref_nm,
                decay_nm,
                ..
            } => qe_ref * (-(lambda_nm - lambda_ref_nm) / decay_nm).exp(),
            QeCurve::Tabulated {
                wavelengths_nm,
                values,
            } => {
                let mut lo_i = 0;
                let mut hi_i = wavelengths_nm.len() - 1;
                while hi_i - lo_i > 1 {
                    let mid = (lo_i + hi_i) / 2;
                    if wavelengths_nm[mid] <= lambda_nm {
                        lo_i = mid;
                    } else {
                        hi_i = mid;
                    }
                }
                let t = (lambda_nm - wavelengths_nm[lo_i])
                    / (wavelengths_nm[hi_i] - wavelengths_nm[lo_i]);
                values[lo_i] * (1.0 - t) + values[hi_i] * t
            }
        }
    }
}

fn check_support((lo, hi): (f64, f64)) -> Result<(), DetectionError> {
    if !(hi > lo) {
        return Err(DetectionError::EmptySupport { lo, hi });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorName {
    Sspd,
    Spad,
    Ideal,
    Custom,
}

impl DetectorName {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorName::Sspd => "sspd",
            DetectorName::Spad => "spad",
            DetectorName::Ideal => "ideal",
            DetectorName::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub name: DetectorName,
    pub qe: QeCurve,
    pub dark_rate_cps: f64,
    pub dead_time_s: f64,
}

impl DetectorModel {
    pub fn new(
        name: DetectorName,
        qe: QeCurve,
        dark_rate_cps: f64,
        dead_time_s: f64,
    ) -> Result<Self, DetectionError> {
        if dark_rate_cps < 0.0 {
            return Err(DetectionError::NegativeDarkRate(dark_rate_cps));
        }
        if dead_time_s < 0.0 {
            return Err(DetectionError::NegativeDeadTime(dead_time_s));
        }
        Ok(Self {
            name,
            qe,
            dark_rate_cps,
            dead_time_s,
        })
    }

    /// Superconducting nanowire preset: exponential QE through 12% at 900 nm
    /// and 5% at 1200 nm, support 400–1600 nm, 10 cps dark rate.
    pub fn sspd() -> Self {
        let decay = 300.0 / (0.12f64 / 0.05).ln();
        Self {
            name: DetectorName::Sspd,
            qe: QeCurve::exponential_decay(0.12, 900.0, decay, (400.0, 1600.0))
                .expect("preset curve is valid"),
            dark_rate_cps: 10.0,
            dead_time_s: 0.0,
        }
    }

    /// Silicon avalanche photodiode preset: flat 40% below 1000 nm, linear to
    /// zero at the 1100 nm silicon edge, 50 cps dark rate.
    pub fn spad() -> Self {
        Self {
            name: DetectorName::Spad,
            qe: QeCurve::tabulated(
                alloc::vec![400.0, 1000.0, 1100.0],
                alloc::vec![0.40, 0.40, 0.0],
            )
            .expect("preset curve is valid"),
            dark_rate_cps: 50.0,
            dead_time_s: 0.0,
        }
    }

    /// Unit-efficiency noiseless detector over a wide band.
    pub fn ideal() -> Self {
        Self {
            name: DetectorName::Ideal,
            qe: QeCurve::flat(1.0, (200.0, 3000.0)).expect("preset curve is valid"),
            dark_rate_cps: 0.0,
            dead_time_s: 0.0,
        }
    }
}

/// A photon-count measurement and the Poisson mean that generated it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub counts: u64,
    pub window_s: f64,
    pub expected_rate_cps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRate {
    pub counts_per_s: f64,
    /// Set when the source and detector supports do not overlap: the rate is
    /// dark counts only.
    pub no_signal: bool,
}

/// Detected rate for a spectral photon flux in photons/s/nm:
/// `∫ Φ(λ) η(λ) dλ + dark`, trapezoid over the wavelength axis.
pub fn effective_rate(spectral_flux: &Spectrum, detector: &DetectorModel) -> EffectiveRate {
    let n = spectral_flux.len();
    // spectra are stored on an ascending frequency grid; wavelength descends
    let mut lambda: Vec<f64> = (0..n).map(|i| spectral_flux.wavelength_nm_at(i)).collect();
    let mut flux: Vec<f64> = spectral_flux.density().to_vec();
    lambda.reverse();
    flux.reverse();

    let (lo, hi) = detector.qe.support_nm();
    let overlap = n >= 2 && lambda[0] <= hi && lambda[n - 1] >= lo;
    if !overlap {
        return EffectiveRate {
            counts_per_s: detector.dark_rate_cps,
            no_signal: true,
        };
    }
    let mut acc = 0.0;
    for i in 1..n {
        let y0 = flux[i - 1] * detector.qe.at(lambda[i - 1]);
        let y1 = flux[i] * detector.qe.at(lambda[i]);
        acc += 0.5 * (y0 + y1) * (lambda[i] - lambda[i - 1]);
    }
    EffectiveRate {
        counts_per_s: acc + detector.dark_rate_cps,
        no_signal: false,
    }
}

/// Poisson counts over a window. With a non-zero dead time the mean rate is
/// first reduced by the non-paralyzable factor `1/(1 + rate·dead_time)`.
pub fn sample_counts(
    rate_cps: f64,
    window_s: f64,
    dead_time_s: f64,
    rng: &mut CounterRng,
) -> Result<CountRecord, DetectionError> {
    if window_s <= 0.0 {
        return Err(DetectionError::NonPositiveWindow(window_s));
    }
    if dead_time_s < 0.0 {
        return Err(DetectionError::NegativeDeadTime(dead_time_s));
    }
    let rate = rate_cps.max(0.0);
    let effective = if dead_time_s > 0.0 {
        rate / (1.0 + rate * dead_time_s)
    } else {
        rate
    };
    let counts = sample_poisson(rng, effective * window_s);
    Ok(CountRecord {
        counts,
        window_s,
        expected_rate_cps: effective,
    })
}

/// Convert an ideal intensity trace into photon counts.
///
/// The ideal trace already carries the detector's spectral response (it is
/// synthesized with η(ω) inside the source integral), so the counting stage
/// applies only a scalar brightness factor: `flux_scale` (photons/s per
/// intensity unit) times the support-averaged quantum efficiency, plus dark
/// counts. Each grid position draws from its own `(seed, scan, point)`
/// substream, making the result independent of evaluation order.
pub fn count_interferogram(
    ideal: &Interferogram,
    detector: &DetectorModel,
    flux_scale: f64,
    window_s: f64,
    seed: u64,
    scan_index: u64,
) -> Result<Interferogram, DetectionError> {
    if ideal.kind != InterferogramKind::IdealIntensity {
        return Err(DetectionError::Interferogram(InterferometryError::WrongKind));
    }
    if window_s <= 0.0 {
        return Err(DetectionError::NonPositiveWindow(window_s));
    }
    let qe_bar = support_averaged_qe(&detector.qe);
    let mut clamped = 0usize;
    let mut values = Vec::with_capacity(ideal.len());
    for (point, &v) in ideal.values().iter().enumerate() {
        let intensity = if v < 0.0 {
            clamped += 1;
            0.0
        } else {
            v
        };
        let rate = flux_scale * intensity * qe_bar + detector.dark_rate_cps;
        let effective = if detector.dead_time_s > 0.0 {
            rate / (1.0 + rate * detector.dead_time_s)
        } else {
            rate
        };
        let mut rng = CounterRng::substream(seed, &[scan_index, point as u64]);
        values.push(sample_poisson(&mut rng, effective * window_s) as f64);
    }
    let mut notes = ideal.notes.clone();
    if clamped > 0 {
        notes.push(format!("clamped {clamped} negative ideal samples to zero"));
    }
    Ok(ideal.replace_values(values, window_s, InterferogramKind::PhotonCounts, notes))
}

fn support_averaged_qe(qe: &QeCurve) -> f64 {
    let (lo, hi) = qe.support_nm();
    let n = 256;
    let mut acc = 0.0;
    for i in 0..=n {
        let lambda = lo + (hi - lo) * i as f64 / n as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * qe.at(lambda);
    }
    acc / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometry::{DisplacementGrid, SampleResponse};
    use crate::qpm::Normalization;
    use crate::units::omega_from_wavelength_nm;
    use approx::assert_relative_eq;

    fn flat_flux(lo_nm: f64, hi_nm: f64, per_nm: f64, points: usize) -> Spectrum {
        let omega: Vec<f64> = (0..points)
            .rev()
            .map(|i| omega_from_wavelength_nm(lo_nm + (hi_nm - lo_nm) * i as f64 / (points - 1) as f64))
            .collect();
        Spectrum::new(omega, alloc::vec![per_nm; points], Normalization::Raw, "flat").unwrap()
    }

    /// Unit-area source for interferogram synthesis: keeps ideal intensities
    /// O(1) so flux scales read as photon rates.
    fn unit_source(lo_nm: f64, hi_nm: f64, points: usize) -> Spectrum {
        let mut s = flat_flux(lo_nm, hi_nm, 1.0, points);
        s.renormalize(Normalization::UnitArea).unwrap();
        s
    }

    #[test]
    fn exponential_preset_is_monotone_non_increasing() {
        let qe = DetectorModel::sspd().qe;
        let mut last = f64::INFINITY;
        let mut lambda = 400.0;
        while lambda <= 1600.0 {
            let v = qe.at(lambda);
            assert!(v <= last + 1e-15);
            assert!((0.0..=1.0).contains(&v));
            last = v;
            lambda += 10.0;
        }
    }

    #[test]
    fn sspd_preset_matches_calibration_band() {
        let qe = DetectorModel::sspd().qe;
        assert_relative_eq!(qe.at(900.0), 0.12, max_relative = 1e-12);
        assert_relative_eq!(qe.at(1200.0), 0.05, max_relative = 1e-12);
        let mut lambda = 900.0;
        while lambda <= 1200.0 {
            let v = qe.at(lambda);
            assert!((0.05 - 1e-12..=0.12 + 1e-12).contains(&v), "qe({lambda}) = {v}");
            lambda += 5.0;
        }
    }

    #[test]
    fn spad_preset_dies_at_silicon_edge() {
        let qe = DetectorModel::spad().qe;
        assert_eq!(qe.support_nm().1, 1100.0);
        assert_eq!(qe.at(1150.0), 0.0);
        assert_relative_eq!(qe.at(700.0), 0.40, max_relative = 1e-12);
        assert_relative_eq!(qe.at(1050.0), 0.20, max_relative = 1e-12);
    }

    #[test]
    fn ideal_detector_rate_is_total_flux() {
        let flux = flat_flux(800.0, 1000.0, 2.0, 101);
        let rate = effective_rate(&flux, &DetectorModel::ideal());
        assert!(!rate.no_signal);
        assert_relative_eq!(rate.counts_per_s, 400.0, max_relative = 1e-9);
    }

    #[test]
    fn blind_detector_reports_dark_only() {
        let flux = flat_flux(2000.0, 2500.0, 1.0, 21);
        let mut det = DetectorModel::spad();
        det.dark_rate_cps = 7.5;
        let rate = effective_rate(&flux, &det);
        assert!(rate.no_signal);
        assert_eq!(rate.counts_per_s, 7.5);
    }

    #[test]
    fn spad_cutoff_collects_less_than_sspd_at_matched_qe() {
        // both curves pinned to the same efficiency at the 900 nm calibration
        // point; the silicon cutoff then strictly loses signal on a source
        // that extends to 1500 nm
        let flux = flat_flux(700.0, 1500.0, 1.0, 801);
        let sspd = DetectorModel::new(DetectorName::Sspd, DetectorModel::sspd().qe, 0.0, 0.0).unwrap();
        let level = sspd.qe.at(900.0);
        let spad = DetectorModel::new(
            DetectorName::Spad,
            QeCurve::tabulated(
                alloc::vec![400.0, 1000.0, 1100.0],
                alloc::vec![level, level, 0.0],
            )
            .unwrap(),
            0.0,
            0.0,
        )
        .unwrap();
        let r_sspd = effective_rate(&flux, &sspd).counts_per_s;
        let r_spad = effective_rate(&flux, &spad).counts_per_s;
        assert!(
            r_spad < r_sspd,
            "spad {r_spad} should integrate less than sspd {r_sspd}"
        );
    }

    #[test]
    fn zero_rate_always_counts_zero() {
        let mut rng = CounterRng::new(3);
        for _ in 0..50 {
            assert_eq!(sample_counts(0.0, 0.5, 0.0, &mut rng).unwrap().counts, 0);
        }
    }

    #[test]
    fn dead_time_reduces_mean_by_nonparalyzable_factor() {
        let record = sample_counts(1000.0, 1.0, 1e-4, &mut CounterRng::new(1)).unwrap();
        assert_relative_eq!(record.expected_rate_cps, 1000.0 / 1.1, max_relative = 1e-12);
    }

    #[test]
    fn counting_is_reproducible_and_order_independent() {
        let n = 64usize;
        let grid = DisplacementGrid {
            start_um: 0.0,
            step_um: 0.05,
            points: n,
        };
        let source = unit_source(900.0, 1100.0, 201);
        let ideal = crate::interferometry::ideal_interferogram(
            &source,
            &DetectorModel::ideal().qe,
            &SampleResponse::mirror_at(1.5, 0.6).unwrap(),
            &grid,
            1.0,
        )
        .unwrap();
        let a = count_interferogram(&ideal, &DetectorModel::sspd(), 2e3, 0.3, 99, 0).unwrap();
        let b = count_interferogram(&ideal, &DetectorModel::sspd(), 2e3, 0.3, 99, 0).unwrap();
        assert_eq!(a.values(), b.values());
        // per-point substreams: sampling point k alone reproduces trace[k]
        for k in [0usize, 7, 63] {
            let mut rng = CounterRng::substream(99, &[0, k as u64]);
            let qe_bar = support_averaged_qe(&DetectorModel::sspd().qe);
            let rate = 2e3 * ideal.values()[k].max(0.0) * qe_bar + 10.0;
            assert_eq!(sample_poisson(&mut rng, rate * 0.3) as f64, a.values()[k]);
        }
    }

    #[test]
    fn two_seeds_differ_but_agree_statistically() {
        let n = 512usize;
        let grid = DisplacementGrid {
            start_um: 0.0,
            step_um: 0.05,
            points: n,
        };
        let source = unit_source(900.0, 1100.0, 201);
        let ideal = crate::interferometry::ideal_interferogram(
            &source,
            &DetectorModel::ideal().qe,
            &SampleResponse::mirror_at(1.0, 0.5).unwrap(),
            &grid,
            1.0,
        )
        .unwrap();
        let det = DetectorModel::ideal();
        let a = count_interferogram(&ideal, &det, 1e3, 0.5, 1, 0).unwrap();
        let b = count_interferogram(&ideal, &det, 1e3, 0.5, 2, 0).unwrap();
        assert_ne!(a.values(), b.values());
        // chi-square on paired Poisson differences: (a-b)^2/(a+b) ~ 1 per dof
        let mut chi2 = 0.0;
        let mut dof = 0.0;
        for (&x, &y) in a.values().iter().zip(b.values()) {
            if x + y > 0.0 {
                chi2 += (x - y) * (x - y) / (x + y);
                dof += 1.0;
            }
        }
        let z = (chi2 - dof) / (2.0 * dof).sqrt();
        assert!(z.abs() < 3.3, "chi-square z-score {z}");
    }

    #[test]
    fn large_flux_counts_converge_to_ideal_shape() {
        let n = 256usize;
        let grid = DisplacementGrid {
            start_um: 0.0,
            step_um: 0.05,
            points: n,
        };
        let source = unit_source(900.0, 1100.0, 201);
        let ideal = crate::interferometry::ideal_interferogram(
            &source,
            &DetectorModel::ideal().qe,
            &SampleResponse::mirror_at(3.0, 0.8).unwrap(),
            &grid,
            1.0,
        )
        .unwrap();
        let det = DetectorModel::ideal();
        let flux = 1e7;
        let counts = count_interferogram(&ideal, &det, flux, 1.0, 7, 0).unwrap();
        let min_expected = ideal
            .values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            * flux;
        let bound = 3.0 / min_expected.sqrt();
        let ideal_max = ideal.values().iter().cloned().fold(0.0, f64::max);
        let counts_max = counts.values().iter().cloned().fold(0.0, f64::max);
        for (&c, &i) in counts.values().iter().zip(ideal.values()) {
            let dev = (c / counts_max - i / ideal_max).abs();
            assert!(dev <= bound, "normalized deviation {dev} > {bound}");
        }
    }

    #[test]
    fn zero_flux_zero_dark_counts_nothing() {
        let grid = DisplacementGrid {
            start_um: 0.0,
            step_um: 0.05,
            points: 32,
        };
        let source = unit_source(900.0, 1100.0, 51);
        let ideal = crate::interferometry::ideal_interferogram(
            &source,
            &DetectorModel::ideal().qe,
            &SampleResponse::mirror_at(1.0, 0.5).unwrap(),
            &grid,
            1.0,
        )
        .unwrap();
        let det = DetectorModel::ideal();
        let counts = count_interferogram(&ideal, &det, 0.0, 0.5, 5, 0).unwrap();
        assert!(counts.values().iter().all(|&v| v == 0.0));
    }
}
