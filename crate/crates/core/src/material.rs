//! Temperature-dependent refractive index and thermal expansion of the
//! nonlinear medium.
//!
//! Dispersion is pluggable data rather than hard-coded physics: a model is
//! either a constant index, a thermo-optic Sellmeier coefficient set, or a
//! table interpolated bilinearly in (wavelength, temperature). Every model
//! carries explicit validity ranges and refuses to extrapolate silently.
//!
//! The Sellmeier form used here is
//!
//! ```text
//! n²(λ, T) = a + (b + b_t·θ²) / (λ² − (c + c_t·θ²)²) + e / (λ² − f²) + d·λ²
//! ```
//!
//! with λ in µm and θ = T + 273.15 the absolute temperature. This covers the
//! common single-pole fits (set `e = d = b_t = c_t = 0`) as well as published
//! two-pole thermo-optic fits for ferroelectric oxides such as stoichiometric
//! lithium tantalate.

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

use crate::units::wavelength_um_from_omega;

/// Reference temperature for thermal expansion, °C.
pub const REFERENCE_TEMPERATURE_C: f64 = 25.0;

/// Axis named by an out-of-range error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeAxis {
    WavelengthUm,
    TemperatureC,
}

impl core::fmt::Display for RangeAxis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RangeAxis::WavelengthUm => write!(f, "wavelength (um)"),
            RangeAxis::TemperatureC => write!(f, "temperature (C)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("{axis} = {value} outside valid range [{lo}, {hi}]")]
    OutOfRange {
        axis: RangeAxis,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("refractive index evaluation produced n^2 = {n_squared} <= 0 at lambda = {wavelength_um} um")]
    NonPhysicalIndex { wavelength_um: f64, n_squared: f64 },
    #[error("constant index must be >= 1, got {0}")]
    ConstantIndexBelowUnity(f64),
    #[error("invalid index table: {0}")]
    InvalidTable(&'static str),
    #[error("invalid range: low bound {lo} exceeds high bound {hi}")]
    EmptyRange { lo: f64, hi: f64 },
}

/// Thermo-optic Sellmeier coefficients; see the module docs for the form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// Thermo-optic factor on the first pole strength, per K².
    pub b_t: f64,
    /// Thermo-optic factor on the first pole position, per K².
    pub c_t: f64,
}

impl SellmeierCoefficients {
    fn n_squared(&self, lambda_um: f64, temperature_c: f64) -> f64 {
        let theta2 = (temperature_c + 273.15) * (temperature_c + 273.15);
        let l2 = lambda_um * lambda_um;
        let pole1 = self.c + self.c_t * theta2;
        self.a + (self.b + self.b_t * theta2) / (l2 - pole1 * pole1) + self.e / (l2 - self.f * self.f)
            + self.d * l2
    }
}

/// Rectangular index table sampled on a (temperature, wavelength) grid,
/// interpolated bilinearly and exact at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    wavelengths_um: Vec<f64>,
    temperatures_c: Vec<f64>,
    /// Row-major, `index[t_idx * wavelengths.len() + l_idx]`.
    index: Vec<f64>,
}

impl IndexTable {
    pub fn new(
        wavelengths_um: Vec<f64>,
        temperatures_c: Vec<f64>,
        index: Vec<f64>,
    ) -> Result<Self, MaterialError> {
        if wavelengths_um.len() < 2 || temperatures_c.len() < 2 {
            return Err(MaterialError::InvalidTable("need at least a 2x2 grid"));
        }
        if index.len() != wavelengths_um.len() * temperatures_c.len() {
            return Err(MaterialError::InvalidTable("value count does not match grid"));
        }
        if !strictly_increasing(&wavelengths_um) || !strictly_increasing(&temperatures_c) {
            return Err(MaterialError::InvalidTable("grid axes must be strictly increasing"));
        }
        if index.iter().any(|&n| !n.is_finite() || n <= 0.0) {
            return Err(MaterialError::InvalidTable("index values must be finite and positive"));
        }
        Ok(Self {
            wavelengths_um,
            temperatures_c,
            index,
        })
    }

    fn at(&self, lambda_um: f64, temperature_c: f64) -> f64 {
        let (i, u) = bracket(&self.temperatures_c, temperature_c);
        let (j, v) = bracket(&self.wavelengths_um, lambda_um);
        let nl = self.wavelengths_um.len();
        let q00 = self.index[i * nl + j];
        let q01 = self.index[i * nl + j + 1];
        let q10 = self.index[(i + 1) * nl + j];
        let q11 = self.index[(i + 1) * nl + j + 1];
        (1.0 - u) * ((1.0 - v) * q00 + v * q01) + u * ((1.0 - v) * q10 + v * q11)
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Bracketing interval index and interpolation weight for `x` in a sorted grid.
/// Callers have already range-checked `x`.
fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    let mut i = match grid.binary_search_by(|g| g.partial_cmp(&x).expect("finite grid")) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    if i >= last {
        i = last - 1;
    }
    let u = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, u)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionKind {
    Constant { index: f64 },
    Sellmeier(SellmeierCoefficients),
    Tabulated(IndexTable),
}

/// Temperature-dependent refractive index model with explicit validity ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    kind: DispersionKind,
    valid_wavelength_um: (f64, f64),
    valid_temperature_c: (f64, f64),
}

impl DispersionModel {
    /// Wavelength- and temperature-independent index. Mostly useful for tests:
    /// the phase mismatch telescopes to exactly zero for this model.
    pub fn constant(index: f64) -> Result<Self, MaterialError> {
        if !(index >= 1.0) {
            return Err(MaterialError::ConstantIndexBelowUnity(index));
        }
        Ok(Self {
            kind: DispersionKind::Constant { index },
            valid_wavelength_um: (0.0, f64::INFINITY),
            valid_temperature_c: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    pub fn sellmeier(
        coefficients: SellmeierCoefficients,
        valid_wavelength_um: (f64, f64),
        valid_temperature_c: (f64, f64),
    ) -> Result<Self, MaterialError> {
        check_range_order(valid_wavelength_um)?;
        check_range_order(valid_temperature_c)?;
        Ok(Self {
            kind: DispersionKind::Sellmeier(coefficients),
            valid_wavelength_um,
            valid_temperature_c,
        })
    }

    /// Tabulated model; validity is the table hull.
    pub fn tabulated(table: IndexTable) -> Result<Self, MaterialError> {
        let valid_wavelength_um = (
            table.wavelengths_um[0],
            *table.wavelengths_um.last().expect("validated"),
        );
        let valid_temperature_c = (
            table.temperatures_c[0],
            *table.temperatures_c.last().expect("validated"),
        );
        Ok(Self {
            kind: DispersionKind::Tabulated(table),
            valid_wavelength_um,
            valid_temperature_c,
        })
    }

    pub fn kind(&self) -> &DispersionKind {
        &self.kind
    }

    pub fn valid_wavelength_um(&self) -> (f64, f64) {
        self.valid_wavelength_um
    }

    pub fn valid_temperature_c(&self) -> (f64, f64) {
        self.valid_temperature_c
    }

    /// n(ω, T). Errors on any query outside the validity ranges; never
    /// extrapolates.
    pub fn refractive_index(
        &self,
        omega_rad_s: f64,
        temperature_c: f64,
    ) -> Result<f64, MaterialError> {
        let lambda_um = wavelength_um_from_omega(omega_rad_s);
        self.refractive_index_at_wavelength(lambda_um, temperature_c)
    }

    /// Same as [`refractive_index`](Self::refractive_index), keyed by vacuum
    /// wavelength in µm.
    pub fn refractive_index_at_wavelength(
        &self,
        lambda_um: f64,
        temperature_c: f64,
    ) -> Result<f64, MaterialError> {
        let (wlo, whi) = self.valid_wavelength_um;
        if !(lambda_um >= wlo && lambda_um <= whi) {
            return Err(MaterialError::OutOfRange {
                axis: RangeAxis::WavelengthUm,
                value: lambda_um,
                lo: wlo,
                hi: whi,
            });
        }
        let (tlo, thi) = self.valid_temperature_c;
        if !(temperature_c >= tlo && temperature_c <= thi) {
            return Err(MaterialError::OutOfRange {
                axis: RangeAxis::TemperatureC,
                value: temperature_c,
                lo: tlo,
                hi: thi,
            });
        }
        match &self.kind {
            DispersionKind::Constant { index } => Ok(*index),
            DispersionKind::Sellmeier(coeffs) => {
                let n2 = coeffs.n_squared(lambda_um, temperature_c);
                if n2 <= 0.0 || !n2.is_finite() {
                    return Err(MaterialError::NonPhysicalIndex {
                        wavelength_um: lambda_um,
                        n_squared: n2,
                    });
                }
                Ok(n2.sqrt())
            }
            DispersionKind::Tabulated(table) => Ok(table.at(lambda_um, temperature_c)),
        }
    }
}

fn check_range_order((lo, hi): (f64, f64)) -> Result<(), MaterialError> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(MaterialError::EmptyRange { lo, hi });
    }
    Ok(())
}

/// Quadratic thermal expansion about the 25 °C reference:
/// `scale_factor(T) = 1 + α(T − 25) + β(T − 25)²`.
///
/// The scale factor is exactly 1 at the reference temperature, so a structure
/// realized at 25 °C is reproduced bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalExpansion {
    pub alpha_per_c: f64,
    pub beta_per_c2: f64,
    valid_temperature_c: (f64, f64),
}

impl ThermalExpansion {
    pub fn new(
        alpha_per_c: f64,
        beta_per_c2: f64,
        valid_temperature_c: (f64, f64),
    ) -> Result<Self, MaterialError> {
        check_range_order(valid_temperature_c)?;
        Ok(Self {
            alpha_per_c,
            beta_per_c2,
            valid_temperature_c,
        })
    }

    /// Material that does not expand at all; valid at any temperature.
    pub fn rigid() -> Self {
        Self {
            alpha_per_c: 0.0,
            beta_per_c2: 0.0,
            valid_temperature_c: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn valid_temperature_c(&self) -> (f64, f64) {
        self.valid_temperature_c
    }

    /// f(T) = 1 + α(T−25) + β(T−25)².
    pub fn scale_factor(&self, temperature_c: f64) -> Result<f64, MaterialError> {
        let (lo, hi) = self.valid_temperature_c;
        if !(temperature_c >= lo && temperature_c <= hi) {
            return Err(MaterialError::OutOfRange {
                axis: RangeAxis::TemperatureC,
                value: temperature_c,
                lo,
                hi,
            });
        }
        let dt = temperature_c - REFERENCE_TEMPERATURE_C;
        Ok(1.0 + self.alpha_per_c * dt + self.beta_per_c2 * dt * dt)
    }
}
