//! Down-conversion spectra of quasi-phase-matched structures.
//!
//! The power spectral density of collinear SPDC is
//!
//! ```text
//! S(ω_s) ∝ | ∫₀ᴸ d(z) · exp(−j Δk(ω_s) z) dz |²
//! ```
//!
//! with the phase mismatch
//!
//! ```text
//! Δk(ω_s) = [n(ω_p,T)·ω_p − n(ω_s,T)·ω_s − n(ω_i,T)·ω_i] / c ,   ω_i = ω_p − ω_s.
//! ```
//!
//! `phase_mismatch` evaluates the telescoped rearrangement
//! `[(n_p−n_s)·ω_s + (n_p−n_i)·ω_i] / c`, which subtracts nearby indices
//! before multiplying by large frequencies and collapses to exactly zero for a
//! frequency-independent index. The integral over the piecewise-constant
//! poling profile has a closed form per segment; summing those with
//! compensated accumulation keeps 5030-segment structures accurate on dense
//! wavelength grids.

use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

use crate::grating::{GratingError, GratingRealization, GratingSpec};
use crate::material::{DispersionModel, MaterialError};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::units::{omega_from_wavelength_nm, wavelength_nm_from_omega, SPEED_OF_LIGHT_UM_PER_S};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QpmError {
    #[error("material: {0}")]
    Material(#[from] MaterialError),
    #[error("grating: {0}")]
    Grating(#[from] GratingError),
    #[error("signal frequency {omega_s} rad/s outside (0, omega_p = {omega_p})")]
    SignalOutsidePump { omega_s: f64, omega_p: f64 },
    #[error("pump wavelength must be positive, got {0} nm")]
    InvalidPumpWavelength(f64),
    #[error("frequency grid must be strictly increasing")]
    GridNotMonotone,
    #[error("grid and density lengths differ: {grid} vs {density}")]
    LengthMismatch { grid: usize, density: usize },
    #[error("spectral density must be finite and non-negative")]
    NegativeDensity,
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("cannot normalize an all-zero spectrum")]
    AllZeroSpectrum,
    #[error("spectrum has no defined peak width")]
    UndefinedWidth,
    #[error(
        "grating realized at {grating_c} C but spectrum requested at {requested_c} C; \
         re-realize the structure at the evaluation temperature"
    )]
    TemperatureMismatch { grating_c: f64, requested_c: f64 },
    #[error("no feasible grating inside the search bounds")]
    InfeasibleSearch,
}

/// Pump laser description. Only the vacuum wavelength enters the physics; the
/// power tag is carried through to output metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    vacuum_wavelength_nm: f64,
    pub power_tag: Option<String>,
}

impl PumpConfig {
    pub const DEFAULT_WAVELENGTH_NM: f64 = 532.0;

    pub fn new(vacuum_wavelength_nm: f64) -> Result<Self, QpmError> {
        if !(vacuum_wavelength_nm > 0.0) || !vacuum_wavelength_nm.is_finite() {
            return Err(QpmError::InvalidPumpWavelength(vacuum_wavelength_nm));
        }
        Ok(Self {
            vacuum_wavelength_nm,
            power_tag: None,
        })
    }

    pub fn vacuum_wavelength_nm(&self) -> f64 {
        self.vacuum_wavelength_nm
    }

    /// ω_p = 2πc / λ_p.
    pub fn omega_p(&self) -> f64 {
        omega_from_wavelength_nm(self.vacuum_wavelength_nm)
    }
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self::new(Self::DEFAULT_WAVELENGTH_NM).expect("default pump wavelength is valid")
    }
}

/// Δk(ω_s) in rad/µm.
pub fn phase_mismatch(
    dispersion: &DispersionModel,
    pump: &PumpConfig,
    omega_s: f64,
    temperature_c: f64,
) -> Result<f64, QpmError> {
    let omega_p = pump.omega_p();
    if !(omega_s > 0.0 && omega_s < omega_p) {
        return Err(QpmError::SignalOutsidePump { omega_s, omega_p });
    }
    let omega_i = omega_p - omega_s;
    let n_p = dispersion.refractive_index(omega_p, temperature_c)?;
    let n_s = dispersion.refractive_index(omega_s, temperature_c)?;
    let n_i = dispersion.refractive_index(omega_i, temperature_c)?;
    // Telescoped: exact zero for constant n, and symmetric under signal-idler
    // exchange because the two products commute in the final sum.
    Ok(((n_p - n_s) * omega_s + (n_p - n_i) * omega_i) / SPEED_OF_LIGHT_UM_PER_S)
}

/// ∫₀ᴸ d(z)·exp(−j Δk z) dz in µm, summed segment by segment in closed form.
///
/// Each constant-sign segment of width w starting at z₀ contributes
/// `sign · e^{−jΔk z₀} · w · E(θ)` with θ = Δk·w and
/// `E(θ) = (1 − e^{−jθ})/(jθ)`; below |θ| = 10⁻⁶ the series
/// `1 − jθ/2 − θ²/6 + jθ³/24` avoids the cancellation in `1 − e^{−jθ}`.
pub fn qpm_integral(grating: &GratingRealization, delta_k_per_um: f64) -> Complex64 {
    let mut sum_re = 0.0f64;
    let mut sum_im = 0.0f64;
    let mut comp_re = 0.0f64;
    let mut comp_im = 0.0f64;
    for segment in grating.segments() {
        let w = segment.width_um;
        let theta = delta_k_per_um * w;
        let e = if theta.abs() < 1e-6 {
            Complex64::new(1.0 - theta * theta / 6.0, -theta / 2.0 + theta * theta * theta / 24.0)
        } else {
            let (s, c) = libm::sincos(theta);
            // (1 − e^{−jθ})/(jθ) = (s − j(c − 1))/θ... expanded directly:
            Complex64::new(s / theta, (c - 1.0) / theta)
        };
        let phase = delta_k_per_um * segment.start_um;
        let (sp, cp) = libm::sincos(phase);
        let rot = Complex64::new(cp, -sp);
        let contribution = rot * e * (segment.sign as f64 * w);
        kahan(&mut sum_re, &mut comp_re, contribution.re);
        kahan(&mut sum_im, &mut comp_im, contribution.im);
    }
    Complex64::new(sum_re, sum_im)
}

#[inline]
fn kahan(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// How a sampled spectral density is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    /// Maximum sample equals 1.
    PeakOne,
    /// Trapezoidal area over the frequency grid equals 1.
    UnitArea,
}

/// Sampled power spectral density over a strictly increasing angular-frequency
/// grid, in arbitrary units unless stated otherwise by the producer.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    omega_grid: Vec<f64>,
    density: Vec<f64>,
    normalization: Normalization,
    pub label: String,
    pub notes: Vec<String>,
}

impl Spectrum {
    pub fn new(
        omega_grid: Vec<f64>,
        density: Vec<f64>,
        normalization: Normalization,
        label: &str,
    ) -> Result<Self, QpmError> {
        if omega_grid.is_empty() {
            return Err(QpmError::EmptySpectrum);
        }
        if omega_grid.len() != density.len() {
            return Err(QpmError::LengthMismatch {
                grid: omega_grid.len(),
                density: density.len(),
            });
        }
        if !omega_grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(QpmError::GridNotMonotone);
        }
        if density.iter().any(|&d| !d.is_finite() || d < 0.0) {
            return Err(QpmError::NegativeDensity);
        }
        let mut spectrum = Self {
            omega_grid,
            density,
            normalization: Normalization::Raw,
            label: String::from(label),
            notes: Vec::new(),
        };
        spectrum.renormalize(normalization)?;
        Ok(spectrum)
    }

    /// Gaussian density in angular frequency, parameterized by center
    /// wavelength and FWHM in nm. This is the superluminescent-diode source
    /// model: the fringe envelope of such a source is exactly Gaussian with
    /// FWHM `(2 ln2/π)·λ₀²/Δλ`.
    pub fn gaussian(
        center_nm: f64,
        fwhm_nm: f64,
        omega_grid: Vec<f64>,
        label: &str,
    ) -> Result<Self, QpmError> {
        let omega_0 = omega_from_wavelength_nm(center_nm);
        let fwhm_omega = omega_0 * fwhm_nm / center_nm;
        let sigma = fwhm_omega / (8.0 * core::f64::consts::LN_2).sqrt();
        let density = omega_grid
            .iter()
            .map(|&w| {
                let d = (w - omega_0) / sigma;
                (-0.5 * d * d).exp()
            })
            .collect();
        Self::new(omega_grid, density, Normalization::PeakOne, label)
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.omega_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_grid.is_empty()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn wavelength_nm_at(&self, index: usize) -> f64 {
        wavelength_nm_from_omega(self.omega_grid[index])
    }

    /// Density-weighted mean frequency expressed as a wavelength; used to pick
    /// fringe-sampling requirements downstream.
    pub fn centroid_wavelength_nm(&self) -> Result<f64, QpmError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&w, &d) in self.omega_grid.iter().zip(&self.density) {
            num += w * d;
            den += d;
        }
        if den <= 0.0 {
            return Err(QpmError::AllZeroSpectrum);
        }
        Ok(wavelength_nm_from_omega(num / den))
    }

    pub fn renormalize(&mut self, normalization: Normalization) -> Result<(), QpmError> {
        match normalization {
            Normalization::Raw => {}
            Normalization::PeakOne => {
                let max = self.density.iter().cloned().fold(0.0, f64::max);
                if max <= 0.0 {
                    return Err(QpmError::AllZeroSpectrum);
                }
                for d in &mut self.density {
                    *d /= max;
                }
            }
            Normalization::UnitArea => {
                let area = trapezoid(&self.omega_grid, &self.density);
                if area <= 0.0 {
                    return Err(QpmError::AllZeroSpectrum);
                }
                for d in &mut self.density {
                    *d /= area;
                }
            }
        }
        self.normalization = normalization;
        Ok(())
    }

    /// Multiply the density pointwise (e.g. by a quantum-efficiency curve
    /// sampled on the same grid); the result is marked raw.
    pub fn weighted(&self, weight: impl Fn(f64) -> f64) -> Result<Self, QpmError> {
        let density = self
            .omega_grid
            .iter()
            .zip(&self.density)
            .map(|(&w, &d)| d * weight(wavelength_nm_from_omega(w)))
            .collect();
        Spectrum::new(self.omega_grid.clone(), density, Normalization::Raw, &self.label)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut area = 0.0;
    for i in 1..x.len() {
        area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    area
}

/// S(ω) = |∫ d(z) e^{−jΔk(ω) z} dz|² sampled on `omega_grid` (strictly
/// increasing). The grating must have been realized at the same temperature
/// the dispersion is evaluated at.
pub fn spdc_spectrum(
    dispersion: &DispersionModel,
    pump: &PumpConfig,
    grating: &GratingRealization,
    omega_grid: &[f64],
    temperature_c: f64,
    normalization: Normalization,
) -> Result<Spectrum, QpmError> {
    if (grating.temperature_c() - temperature_c).abs() > 1e-9 {
        return Err(QpmError::TemperatureMismatch {
            grating_c: grating.temperature_c(),
            requested_c: temperature_c,
        });
    }
    let mut density = Vec::with_capacity(omega_grid.len());
    for &omega_s in omega_grid {
        let dk = phase_mismatch(dispersion, pump, omega_s, temperature_c)?;
        density.push(qpm_integral(grating, dk).norm_sqr());
    }
    Spectrum::new(omega_grid.to_vec(), density, normalization, "spdc")
}

/// Spectral density over a (temperature, wavelength) plane, normalized to a
/// single global maximum, mirroring brightness-image figures.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightnessMap {
    pub temperatures_c: Vec<f64>,
    pub wavelengths_nm: Vec<f64>,
    /// Row-major: `values[t_idx * wavelengths.len() + l_idx]`.
    pub values: Vec<f64>,
    pub normalization_note: String,
}

impl BrightnessMap {
    pub fn value(&self, t_idx: usize, l_idx: usize) -> f64 {
        self.values[t_idx * self.wavelengths_nm.len() + l_idx]
    }

    pub fn row(&self, t_idx: usize) -> &[f64] {
        let n = self.wavelengths_nm.len();
        &self.values[t_idx * n..(t_idx + 1) * n]
    }
}

/// Evaluate the SPDC spectrum of `spec` at every temperature in `temperatures_c`
/// over `wavelengths_nm` (strictly increasing, in nm). One global maximum
/// normalizes the whole map; an all-zero map is left raw and noted.
pub fn temperature_sweep(
    dispersion: &DispersionModel,
    pump: &PumpConfig,
    spec: &GratingSpec,
    temperatures_c: &[f64],
    wavelengths_nm: &[f64],
) -> Result<BrightnessMap, QpmError> {
    if temperatures_c.is_empty() || wavelengths_nm.is_empty() {
        return Err(QpmError::EmptySpectrum);
    }
    if !wavelengths_nm.windows(2).all(|w| w[1] > w[0]) {
        return Err(QpmError::GridNotMonotone);
    }
    // ascending wavelength corresponds to descending frequency
    let omega_grid: Vec<f64> = wavelengths_nm
        .iter()
        .rev()
        .map(|&nm| omega_from_wavelength_nm(nm))
        .collect();
    let n_l = wavelengths_nm.len();
    let mut values = Vec::with_capacity(temperatures_c.len() * n_l);
    for &t in temperatures_c {
        let grating = spec.realize(t)?;
        let spectrum = spdc_spectrum(dispersion, pump, &grating, &omega_grid, t, Normalization::Raw)?;
        values.extend(spectrum.density().iter().rev());
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    let normalization_note = if max > 0.0 {
        for v in &mut values {
            *v /= max;
        }
        String::from("global-max = 1")
    } else {
        String::from("all-zero map left raw")
    };
    Ok(BrightnessMap {
        temperatures_c: temperatures_c.to_vec(),
        wavelengths_nm: wavelengths_nm.to_vec(),
        values,
        normalization_note,
    })
}

/// Full width at half maximum of the highest peak, with linear interpolation
/// between bracketing samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwhmResult {
    pub fwhm_rad_s: f64,
    pub fwhm_nm: f64,
    /// Midpoint of the half-maximum crossings.
    pub center_rad_s: f64,
    pub center_nm: f64,
    pub peak_value: f64,
    /// Set when density elsewhere also reaches half of the global maximum,
    /// i.e. the width describes only the tallest peak of a multimodal
    /// spectrum.
    pub multimodal: bool,
    /// Set when a half-max crossing ran off the grid edge and the width is a
    /// lower bound.
    pub clipped: bool,
}

pub fn spectral_fwhm(spectrum: &Spectrum) -> Result<FwhmResult, QpmError> {
    let omega = spectrum.omega_grid();
    let density = spectrum.density();
    let (peak_idx, &peak_value) = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite density"))
        .expect("non-empty spectrum");
    if peak_value <= 0.0 {
        return Err(QpmError::UndefinedWidth);
    }
    let half = 0.5 * peak_value;

    let mut clipped = false;
    // contiguous run of samples >= half around the peak
    let mut l = peak_idx;
    while l > 0 && density[l] >= half {
        l -= 1;
    }
    let (run_lo, omega_left) = if density[l] >= half {
        clipped = true;
        (0, omega[0])
    } else {
        (
            l + 1,
            interp_crossing(omega[l], density[l], omega[l + 1], density[l + 1], half),
        )
    };
    let mut r = peak_idx;
    while r < density.len() - 1 && density[r] >= half {
        r += 1;
    }
    let (run_hi, omega_right) = if density[r] >= half {
        clipped = true;
        (density.len() - 1, omega[density.len() - 1])
    } else {
        (
            r - 1,
            interp_crossing(omega[r - 1], density[r - 1], omega[r], density[r], half),
        )
    };

    // any sample at or above the half level outside the main run belongs to a
    // second peak
    let multimodal = density
        .iter()
        .enumerate()
        .any(|(i, &d)| d >= half && (i < run_lo || i > run_hi));

    let lambda_left = wavelength_nm_from_omega(omega_left);
    let lambda_right = wavelength_nm_from_omega(omega_right);
    Ok(FwhmResult {
        fwhm_rad_s: omega_right - omega_left,
        fwhm_nm: lambda_left - lambda_right,
        center_rad_s: 0.5 * (omega_left + omega_right),
        center_nm: 0.5 * (lambda_left + lambda_right),
        peak_value,
        multimodal,
        clipped,
    })
}

fn interp_crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return x0;
    }
    x0 + (level - y0) / (y1 - y0) * (x1 - x0)
}

/// Maximal intervals of the frequency grid where the density stays at or above
/// half of the global maximum, with linearly interpolated edges. Returns an
/// empty list for an all-zero spectrum.
pub fn half_max_intervals(spectrum: &Spectrum) -> Vec<(f64, f64)> {
    let omega = spectrum.omega_grid();
    let density = spectrum.density();
    let max = density.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let half = 0.5 * max;
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..density.len() {
        let above = density[i] >= half;
        if above && start.is_none() {
            let edge = if i == 0 {
                omega[0]
            } else {
                interp_crossing(omega[i - 1], density[i - 1], omega[i], density[i], half)
            };
            start = Some(edge);
        }
        if !above {
            if let Some(s) = start.take() {
                let edge = interp_crossing(omega[i - 1], density[i - 1], omega[i], density[i], half);
                intervals.push((s, edge));
            }
        }
    }
    if let Some(s) = start {
        intervals.push((s, omega[omega.len() - 1]));
    }
    intervals
}

/// Target metrics for the design search, in nm, at a fixed operating
/// temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignObjective {
    pub target_center_nm: f64,
    pub target_fwhm_nm: f64,
    pub temperature_c: f64,
    /// Weight on squared center error (nm²); default 1.
    pub center_weight: f64,
    /// Weight on squared FWHM error (nm²); default 1.
    pub fwhm_weight: f64,
}

impl DesignObjective {
    pub fn new(target_center_nm: f64, target_fwhm_nm: f64, temperature_c: f64) -> Self {
        Self {
            target_center_nm,
            target_fwhm_nm,
            temperature_c,
            center_weight: 1.0,
            fwhm_weight: 1.0,
        }
    }
}

/// Box bounds on the two chirp parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignBounds {
    pub b1_um: (f64, f64),
    pub zeta_per_um: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub n_periods: u32,
    pub expansion: crate::material::ThermalExpansion,
    /// Wavelength grid for metric evaluation: (lo_nm, hi_nm, step_nm).
    pub wavelength_grid_nm: (f64, f64, f64),
    /// Coarse scan resolution per dimension.
    pub coarse_steps: usize,
    pub simplex: SimplexOptions,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            n_periods: crate::grating::GratingPreset::PERIOD_COUNT,
            expansion: crate::material::ThermalExpansion::rigid(),
            wavelength_grid_nm: (700.0, 1600.0, 1.0),
            coarse_steps: 7,
            simplex: SimplexOptions {
                max_iterations: 120,
                tolerance: 1e-8,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub spec: GratingSpec,
    pub achieved_center_nm: f64,
    pub achieved_fwhm_nm: f64,
    pub objective_value: f64,
    pub evaluations: usize,
}

/// Search (b1, ζ) for a grating whose spectrum matches the target center and
/// FWHM: a coarse grid scan over the feasible region followed by Nelder–Mead
/// refinement from the best cell. Deterministic for a fixed configuration.
pub fn design_search(
    dispersion: &DispersionModel,
    pump: &PumpConfig,
    objective: &DesignObjective,
    bounds: &DesignBounds,
    options: &DesignOptions,
) -> Result<DesignResult, QpmError> {
    let (b1_lo, b1_hi) = bounds.b1_um;
    let (z_lo, z_hi) = bounds.zeta_per_um;
    if !(b1_lo > 0.0) || b1_lo > b1_hi || z_lo > z_hi {
        return Err(QpmError::InfeasibleSearch);
    }
    let (l_lo, l_hi, l_step) = options.wavelength_grid_nm;
    let n_points = ((l_hi - l_lo) / l_step).floor() as usize + 1;
    let omega_grid: Vec<f64> = (0..n_points)
        .rev()
        .map(|i| omega_from_wavelength_nm(l_lo + i as f64 * l_step))
        .collect();

    let mut evaluations = 0usize;
    let mut metrics_of = |b1: f64, zeta: f64| -> Option<(f64, f64, f64)> {
        let spec = GratingSpec::new(b1, zeta, options.n_periods, options.expansion).ok()?;
        let grating = spec.realize(objective.temperature_c).ok()?;
        let spectrum = spdc_spectrum(
            dispersion,
            pump,
            &grating,
            &omega_grid,
            objective.temperature_c,
            Normalization::Raw,
        )
        .ok()?;
        evaluations += 1;
        let fwhm = spectral_fwhm(&spectrum).ok()?;
        let dc = fwhm.center_nm - objective.target_center_nm;
        let dw = fwhm.fwhm_nm - objective.target_fwhm_nm;
        let cost = objective.center_weight * dc * dc + objective.fwhm_weight * dw * dw;
        Some((cost, fwhm.center_nm, fwhm.fwhm_nm))
    };

    // coarse scan
    let steps = options.coarse_steps.max(1);
    let mut best: Option<(f64, f64, f64)> = None; // (cost, b1, zeta)
    for i in 0..=steps {
        let b1 = b1_lo + (b1_hi - b1_lo) * i as f64 / steps as f64;
        for j in 0..=steps {
            let zeta = z_lo + (z_hi - z_lo) * j as f64 / steps as f64;
            if let Some((cost, _, _)) = metrics_of(b1, zeta) {
                if best.map_or(true, |(c, _, _)| cost < c) {
                    best = Some((cost, b1, zeta));
                }
            }
        }
    }
    let (_, b1_start, z_start) = best.ok_or(QpmError::InfeasibleSearch)?;

    // local refinement; a frozen zeta range degenerates to a 1-D search
    const PENALTY: f64 = 1e18;
    let fixed_zeta = z_lo == z_hi;
    let refined = if fixed_zeta {
        let res = nelder_mead(
            |x| metrics_of(x[0], z_lo).map_or(PENALTY, |(c, _, _)| c),
            &[b1_start],
            &[(b1_hi - b1_lo).max(1e-9) / (steps as f64 * 2.0)],
            &[b1_lo],
            &[b1_hi],
            &options.simplex,
        );
        (res.position[0], z_lo)
    } else {
        let res = nelder_mead(
            |x| metrics_of(x[0], x[1]).map_or(PENALTY, |(c, _, _)| c),
            &[b1_start, z_start],
            &[
                (b1_hi - b1_lo).max(1e-9) / (steps as f64 * 2.0),
                (z_hi - z_lo).max(1e-12) / (steps as f64 * 2.0),
            ],
            &[b1_lo, z_lo],
            &[b1_hi, z_hi],
            &options.simplex,
        );
        (res.position[0], res.position[1])
    };

    let (cost, center, fwhm) =
        metrics_of(refined.0, refined.1).ok_or(QpmError::InfeasibleSearch)?;
    let spec = GratingSpec::new(refined.0, refined.1, options.n_periods, options.expansion)?;
    Ok(DesignResult {
        spec,
        achieved_center_nm: center,
        achieved_fwhm_nm: fwhm,
        objective_value: cost,
        evaluations,
    })
}
