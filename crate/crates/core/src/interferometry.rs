//! Michelson interferogram synthesis and analysis for coherence-domain
//! imaging.
//!
//! Sign and factor conventions (the usual source of bugs, so spelled out
//! once): displacement `x` is the reference-arm position in µm; a sample
//! interface at one-way optical depth `d` produces fringes centered at
//! `x = d`; the round trip is folded into the fringe phase `2ω(x − d)/c`. The
//! synthesized ideal intensity for a source density S(ω), detector quantum
//! efficiency η(ω), reference power reflectance R and interface amplitude
//! reflectances r_i is
//!
//! ```text
//! I(x) = ∫ S(ω) η(ω) [ R + Σ r_i² + 2√R Σ r_i cos(2ω(x − d_i)/c)
//!                        + 2 Σ_{i<j} r_i r_j cos(2ω(d_i − d_j)/c) ] dω
//! ```
//!
//! The inter-interface cross terms do not depend on `x` and only shift the
//! background level. Envelopes come from the magnitude of the analytic signal
//! after mean removal; spectra are re-estimated from interferograms by the
//! discrete Fourier transform, mapping fringe spatial frequency `f` to
//! wavelength `λ = 2/f`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

use crate::detection::QeCurve;
use crate::fft::{analytic_signal, fft};
use crate::qpm::{Normalization, QpmError, Spectrum};
use crate::units::SPEED_OF_LIGHT_UM_PER_S;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterferometryError {
    #[error("interface depths must be non-negative and non-decreasing")]
    UnorderedInterfaces,
    #[error("amplitude reflectance {0} outside [-1, 1]")]
    ReflectanceOutOfRange(f64),
    #[error("pellicle index must exceed 1, got {0}")]
    InvalidPellicleIndex(f64),
    #[error("pellicle thickness must be non-negative, got {0} um")]
    InvalidPellicleThickness(f64),
    #[error("displacement grid must be uniform: step {found} at index {index}, expected {expected}")]
    NonUniformGrid {
        index: usize,
        found: f64,
        expected: f64,
    },
    #[error("displacement grid needs at least {needed} points, got {got}")]
    GridTooShort { needed: usize, got: usize },
    #[error("source spectrum needs at least two grid points, got {0}")]
    SourceGridTooShort(usize),
    #[error("step {step_um} um undersamples fringes at {center_nm} nm; need step <= {required_um} um")]
    Undersampled {
        step_um: f64,
        center_nm: f64,
        required_um: f64,
    },
    #[error("envelope has no peak above the detection threshold")]
    NoEnvelopePeak,
    #[error("record holds photon counts; expected ideal intensity")]
    WrongKind,
    #[error("spectrum: {0}")]
    Spectrum(#[from] QpmError),
}

/// One partial reflector of the sample arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    /// One-way optical path from the sample's front reference plane, µm.
    pub optical_depth_um: f64,
    /// Field reflection coefficient, signed.
    pub amplitude_reflectance: f64,
}

/// Ordered stack of partial reflectors. Power passivity (Σ r² ≤ 1) is noted,
/// not enforced, to keep synthetic phantoms flexible.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResponse {
    interfaces: Vec<Interface>,
    pub notes: Vec<String>,
}

impl SampleResponse {
    pub fn new(interfaces: Vec<Interface>) -> Result<Self, InterferometryError> {
        for pair in interfaces.windows(2) {
            if pair[1].optical_depth_um < pair[0].optical_depth_um {
                return Err(InterferometryError::UnorderedInterfaces);
            }
        }
        if let Some(first) = interfaces.first() {
            if first.optical_depth_um < 0.0 {
                return Err(InterferometryError::UnorderedInterfaces);
            }
        }
        let mut notes = Vec::new();
        let mut power = 0.0;
        for i in &interfaces {
            let r = i.amplitude_reflectance;
            if !((-1.0..=1.0).contains(&r)) {
                return Err(InterferometryError::ReflectanceOutOfRange(r));
            }
            power += r * r;
        }
        if power > 1.0 {
            notes.push(format!("sum of power reflectances {power:.3} exceeds 1 (non-passive sample)"));
        }
        Ok(Self { interfaces, notes })
    }

    /// Single reflector, e.g. a mirror.
    pub fn mirror_at(depth_um: f64, amplitude_reflectance: f64) -> Result<Self, InterferometryError> {
        Self::new(alloc::vec![Interface {
            optical_depth_um: depth_um,
            amplitude_reflectance,
        }])
    }

    pub fn empty() -> Self {
        Self {
            interfaces: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    /// Same stack with every depth offset by `delta_um`.
    pub fn shifted(&self, delta_um: f64) -> Result<Self, InterferometryError> {
        Self::new(
            self.interfaces
                .iter()
                .map(|i| Interface {
                    optical_depth_um: i.optical_depth_um + delta_um,
                    amplitude_reflectance: i.amplitude_reflectance,
                })
                .collect(),
        )
    }
}

/// Thin membrane of index n and physical thickness L: a front Fresnel
/// reflection r₁ = (1−n)/(1+n) at depth 0 and a back reflection at optical
/// depth n·L attenuated by the front transmission 1 − r₁².
pub fn pellicle_response(n: f64, thickness_um: f64) -> Result<SampleResponse, InterferometryError> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(InterferometryError::InvalidPellicleIndex(n));
    }
    if !(thickness_um >= 0.0) {
        return Err(InterferometryError::InvalidPellicleThickness(thickness_um));
    }
    let r1 = (1.0 - n) / (1.0 + n);
    let r2 = (n - 1.0) / (n + 1.0) * (1.0 - r1 * r1);
    SampleResponse::new(alloc::vec![
        Interface {
            optical_depth_um: 0.0,
            amplitude_reflectance: r1,
        },
        Interface {
            optical_depth_um: n * thickness_um,
            amplitude_reflectance: r2,
        },
    ])
}

/// Uniform reference-arm displacement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementGrid {
    pub start_um: f64,
    pub step_um: f64,
    pub points: usize,
}

impl DisplacementGrid {
    pub fn positions(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start_um + i as f64 * self.step_um)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferogramKind {
    IdealIntensity,
    PhotonCounts,
}

/// Detector record (or ideal intensity) versus reference-arm displacement on a
/// uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    displacement_um: Vec<f64>,
    values: Vec<f64>,
    step_um: f64,
    /// Accumulation window per point, seconds; zero for ideal traces.
    pub window_s: f64,
    pub kind: InterferogramKind,
    pub notes: Vec<String>,
}

impl Interferogram {
    /// Validate an externally assembled record (uniform grid, counts kind
    /// requires non-negative integers).
    pub fn from_samples(
        displacement_um: Vec<f64>,
        values: Vec<f64>,
        window_s: f64,
        kind: InterferogramKind,
    ) -> Result<Self, InterferometryError> {
        if displacement_um.len() < 2 {
            return Err(InterferometryError::GridTooShort {
                needed: 2,
                got: displacement_um.len(),
            });
        }
        let step = displacement_um[1] - displacement_um[0];
        if !(step > 0.0) {
            return Err(InterferometryError::NonUniformGrid {
                index: 1,
                found: step,
                expected: f64::NAN,
            });
        }
        for (i, pair) in displacement_um.windows(2).enumerate() {
            let found = pair[1] - pair[0];
            if (found - step).abs() > 1e-9 * step.max(1.0) {
                return Err(InterferometryError::NonUniformGrid {
                    index: i + 1,
                    found,
                    expected: step,
                });
            }
        }
        if kind == InterferogramKind::PhotonCounts
            && values.iter().any(|&v| v < 0.0 || v.fract() != 0.0)
        {
            return Err(InterferometryError::WrongKind);
        }
        Ok(Self {
            displacement_um,
            values,
            step_um: step,
            window_s,
            kind,
            notes: Vec::new(),
        })
    }

    pub fn displacement_um(&self) -> &[f64] {
        &self.displacement_um
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step_um(&self) -> f64 {
        self.step_um
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn replace_values(
        &self,
        values: Vec<f64>,
        window_s: f64,
        kind: InterferogramKind,
        notes: Vec<String>,
    ) -> Self {
        Self {
            displacement_um: self.displacement_um.clone(),
            values,
            step_um: self.step_um,
            window_s,
            kind,
            notes,
        }
    }
}

/// Synthesize the ideal (noise-free) interferogram of `sample` illuminated by
/// `source` through a detector with quantum efficiency `qe`; see the module
/// docs for the exact model. `reference_reflectance` is the reference-arm
/// power reflectance R (1.0 for a perfect mirror).
pub fn ideal_interferogram(
    source: &Spectrum,
    qe: &QeCurve,
    sample: &SampleResponse,
    grid: &DisplacementGrid,
    reference_reflectance: f64,
) -> Result<Interferogram, InterferometryError> {
    if grid.points < 2 {
        return Err(InterferometryError::GridTooShort {
            needed: 2,
            got: grid.points,
        });
    }
    let omega = source.omega_grid();
    let n = omega.len();
    if n < 2 {
        return Err(InterferometryError::SourceGridTooShort(n));
    }
    // quadrature weights: trapezoid over the source grid, folded with S*eta
    let mut weighted = Vec::with_capacity(n);
    for i in 0..n {
        let lambda_nm = source.wavelength_nm_at(i);
        let w = source.density()[i] * qe.at(lambda_nm);
        let dw = match i {
            0 => 0.5 * (omega[1] - omega[0]),
            _ if i == n - 1 => 0.5 * (omega[n - 1] - omega[n - 2]),
            _ => 0.5 * (omega[i + 1] - omega[i - 1]),
        };
        weighted.push(w * dw);
    }
    let total_power: f64 = weighted.iter().sum();

    let interfaces = sample.interfaces();
    let r_sum_sq: f64 = interfaces
        .iter()
        .map(|i| i.amplitude_reflectance * i.amplitude_reflectance)
        .sum();
    let sqrt_r_ref = reference_reflectance.max(0.0).sqrt();

    // x-independent inter-interface interference
    let mut cross_dc = 0.0;
    for a in 0..interfaces.len() {
        for b in a + 1..interfaces.len() {
            let ra = interfaces[a].amplitude_reflectance;
            let rb = interfaces[b].amplitude_reflectance;
            let dd = interfaces[a].optical_depth_um - interfaces[b].optical_depth_um;
            let mut acc = 0.0;
            for (i, &wt) in weighted.iter().enumerate() {
                acc += wt * (2.0 * omega[i] * dd / SPEED_OF_LIGHT_UM_PER_S).cos();
            }
            cross_dc += 2.0 * ra * rb * acc;
        }
    }
    let dc = (reference_reflectance + r_sum_sq) * total_power + cross_dc;

    let positions = grid.positions();
    let mut values = Vec::with_capacity(positions.len());
    for &x in &positions {
        let mut fringes = 0.0;
        for interface in interfaces {
            let delta = x - interface.optical_depth_um;
            let mut acc = 0.0;
            for (i, &wt) in weighted.iter().enumerate() {
                acc += wt * (2.0 * omega[i] * delta / SPEED_OF_LIGHT_UM_PER_S).cos();
            }
            fringes += 2.0 * sqrt_r_ref * interface.amplitude_reflectance * acc;
        }
        values.push(dc + fringes);
    }

    let mut notes = sample.notes.clone();
    if interfaces.is_empty() {
        notes.push(String::from("sample has no interfaces; trace is background only"));
    }
    Ok(Interferogram {
        displacement_um: positions,
        values,
        step_um: grid.step_um,
        window_s: 0.0,
        kind: InterferogramKind::IdealIntensity,
        notes,
    })
}

/// A detected fringe packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePeak {
    /// Half-max-lobe centroid, µm.
    pub position_um: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    pub envelope: Vec<f64>,
    /// Peaks sorted by descending height.
    pub peaks: Vec<EnvelopePeak>,
    /// FWHM of the tallest peak by linear interpolation, µm.
    pub fwhm_main_um: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Source center wavelength used for the fringe-sampling check, nm.
    pub center_wavelength_nm: f64,
    /// Local maxima below this fraction of the global envelope maximum are
    /// ignored.
    pub peak_threshold: f64,
}

impl EnvelopeOptions {
    pub fn new(center_wavelength_nm: f64) -> Self {
        Self {
            center_wavelength_nm,
            peak_threshold: 0.25,
        }
    }
}

/// Fringe envelope by magnitude of the analytic signal after mean removal.
///
/// Requires at least four samples per fringe period (λ_c/2 in displacement) at
/// the source center wavelength. Peak positions are refined as centroids over
/// each peak's half-max lobe, which is far more stable against photon noise
/// than the raw arg-max sample.
pub fn envelope(
    interferogram: &Interferogram,
    options: &EnvelopeOptions,
) -> Result<EnvelopeResult, InterferometryError> {
    let fringe_period_um = options.center_wavelength_nm * 1e-3 / 2.0;
    let required = fringe_period_um / 4.0;
    if interferogram.step_um > required {
        return Err(InterferometryError::Undersampled {
            step_um: interferogram.step_um,
            center_nm: options.center_wavelength_nm,
            required_um: required,
        });
    }
    let values = interferogram.values();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let centered: Vec<f64> = values.iter().map(|&v| v - mean).collect();
    let envelope: Vec<f64> = analytic_signal(&centered).iter().map(|c| c.norm()).collect();

    let max = envelope.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(InterferometryError::NoEnvelopePeak);
    }
    let threshold = options.peak_threshold * max;
    let x = interferogram.displacement_um();
    let mut peaks = Vec::new();
    for i in 1..envelope.len() - 1 {
        if envelope[i] >= envelope[i - 1] && envelope[i] > envelope[i + 1] && envelope[i] >= threshold {
            peaks.push(refine_peak(x, &envelope, i));
        }
    }
    if peaks.is_empty() {
        // monotone or plateaued record; fall back to the global maximum
        let idx = envelope
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite envelope"))
            .map(|(i, _)| i)
            .expect("non-empty envelope");
        peaks.push(refine_peak(x, &envelope, idx));
    }
    peaks.sort_by(|a, b| b.height.partial_cmp(&a.height).expect("finite heights"));
    // suppress duplicate detections inside one half-max lobe
    let mut deduped: Vec<EnvelopePeak> = Vec::new();
    for p in peaks {
        let lobe = half_width_at(&envelope, x, p.position_um).max(interferogram.step_um);
        if deduped
            .iter()
            .all(|q| (q.position_um - p.position_um).abs() > lobe)
        {
            deduped.push(p);
        }
    }

    let fwhm_main_um = fwhm_around(
        x,
        &envelope,
        nearest_index(x, deduped[0].position_um),
    );
    Ok(EnvelopeResult {
        envelope,
        peaks: deduped,
        fwhm_main_um,
        notes: interferogram.notes.clone(),
    })
}

fn nearest_index(x: &[f64], pos: f64) -> usize {
    let step = x[1] - x[0];
    let idx = ((pos - x[0]) / step).round() as isize;
    idx.clamp(0, x.len() as isize - 1) as usize
}

/// Centroid of the half-max lobe around a local maximum. The walk is purely
/// threshold-based so that photon-noise wiggles on a jagged lobe top neither
/// stop it early nor skew it: whichever local maximum of the lobe seeded the
/// refinement, the window is re-anchored to the lobe's tallest sample and the
/// centroid covers the full half-max extent.
fn refine_peak(x: &[f64], envelope: &[f64], idx: usize) -> EnvelopePeak {
    let mut half = envelope[idx] / 2.0;
    let (mut lo, mut hi) = (idx, idx);
    // two passes: the first finds the lobe, the second re-walks from its true
    // maximum so the threshold is the lobe's, not the seed sample's
    for _ in 0..2 {
        lo = idx;
        while lo > 0 && envelope[lo - 1] >= half {
            lo -= 1;
        }
        hi = idx;
        while hi < envelope.len() - 1 && envelope[hi + 1] >= half {
            hi += 1;
        }
        let tallest = envelope[lo..=hi].iter().cloned().fold(0.0, f64::max);
        if tallest / 2.0 == half {
            break;
        }
        half = tallest / 2.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in lo..=hi {
        num += x[i] * envelope[i];
        den += envelope[i];
    }
    EnvelopePeak {
        position_um: if den > 0.0 { num / den } else { x[idx] },
        height: envelope[lo..=hi].iter().cloned().fold(0.0, f64::max),
    }
}

fn half_width_at(envelope: &[f64], x: &[f64], pos: f64) -> f64 {
    let idx = nearest_index(x, pos);
    0.5 * fwhm_around(x, envelope, idx)
}

/// FWHM of the peak containing `idx`, linear interpolation at the crossings.
fn fwhm_around(x: &[f64], envelope: &[f64], idx: usize) -> f64 {
    let half = envelope[idx] / 2.0;
    let mut l = idx;
    while l > 0 && envelope[l] >= half {
        l -= 1;
    }
    let left = if envelope[l] >= half {
        x[0]
    } else {
        x[l] + (half - envelope[l]) / (envelope[l + 1] - envelope[l]) * (x[l + 1] - x[l])
    };
    let mut r = idx;
    while r < envelope.len() - 1 && envelope[r] >= half {
        r += 1;
    }
    let right = if envelope[r] >= half {
        x[x.len() - 1]
    } else {
        x[r - 1] + (half - envelope[r - 1]) / (envelope[r] - envelope[r - 1]) * (x[r] - x[r - 1])
    };
    right - left
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// Apply a Hann window before the transform (reduces leakage, slightly
    /// broadens lines).
    pub hann_window: bool,
    /// Output wavelength range, nm; derived from the sampling when absent.
    pub wavelength_range_nm: Option<(f64, f64)>,
    /// Number of output samples; defaults to half the record length.
    pub output_points: Option<usize>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            hann_window: true,
            wavelength_range_nm: None,
            output_points: None,
        }
    }
}

/// Estimate the source spectral density from an interferogram.
///
/// The record is mean-removed, optionally Hann-windowed, transformed, and the
/// transform magnitude at fringe spatial frequency f (cycles per µm of
/// displacement) is assigned to wavelength λ = 2/f; the factor 2 is the
/// interferometric round trip. The magnitude (not its square) estimates the
/// density because the interferogram is already an autocorrelation-domain
/// record of the field. Output is resampled onto a uniform wavelength grid and
/// peak-normalized.
pub fn estimate_spectrum(
    interferogram: &Interferogram,
    options: &EstimateOptions,
) -> Result<Spectrum, InterferometryError> {
    let values = interferogram.values();
    let n = values.len();
    if n < 8 {
        return Err(InterferometryError::GridTooShort { needed: 8, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut centered: Vec<f64> = values.iter().map(|&v| v - mean).collect();

    // leakage heuristic: significant fringe energy still present at the record
    // edges
    let edge = (n / 20).max(2);
    let edge_rms = {
        let mut acc = 0.0;
        for &v in centered.iter().take(edge).chain(centered.iter().rev().take(edge)) {
            acc += v * v;
        }
        (acc / (2 * edge) as f64).sqrt()
    };
    let total_rms = (centered.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let leaky = total_rms > 0.0 && edge_rms > 0.25 * total_rms;

    if options.hann_window {
        for (i, v) in centered.iter_mut().enumerate() {
            let w = 0.5
                * (1.0
                    - (2.0 * core::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            *v *= w;
        }
    }
    let buf: Vec<num_complex::Complex64> = centered
        .iter()
        .map(|&v| num_complex::Complex64::new(v, 0.0))
        .collect();
    let spec = fft(&buf);

    // positive-frequency bins: f_k = k / (n * step); wavelength 2/f
    let step = interferogram.step_um();
    let mut lambda_nm: Vec<f64> = Vec::new();
    let mut magnitude: Vec<f64> = Vec::new();
    for (k, bin) in spec.iter().enumerate().take(n / 2 + 1).skip(1) {
        let f = k as f64 / (n as f64 * step);
        lambda_nm.push(2.0 / f * 1e3);
        magnitude.push(bin.norm());
    }
    // lambda is descending in k; flip ascending
    lambda_nm.reverse();
    magnitude.reverse();

    let (lo, hi) = options.wavelength_range_nm.unwrap_or_else(|| {
        // default: resolvable range away from DC, capped at 8x the fringe
        // sampling limit
        let min_l = lambda_nm[0];
        (min_l, (min_l * 8.0).min(*lambda_nm.last().expect("non-empty")))
    });
    let points = options.output_points.unwrap_or(n / 2).max(8);
    let mut out_lambda = Vec::with_capacity(points);
    let mut out_density = Vec::with_capacity(points);
    for i in 0..points {
        let l = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        out_lambda.push(l);
        out_density.push(linear_sample(&lambda_nm, &magnitude, l));
    }
    // ascending wavelength corresponds to descending frequency
    let omega_grid: Vec<f64> = out_lambda
        .iter()
        .rev()
        .map(|&nm| crate::units::omega_from_wavelength_nm(nm))
        .collect();
    out_density.reverse();
    let mut spectrum = Spectrum::new(omega_grid, out_density, Normalization::PeakOne, "estimated")?;
    if leaky {
        spectrum
            .notes
            .push(String::from("record shorter than several coherence lengths; leakage likely"));
    }
    Ok(spectrum)
}

fn linear_sample(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let mut lo = 0;
    let mut hi = xs.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] * (1.0 - t) + ys[hi] * t
}
