//! Realized poling profiles of linearly chirped periodically poled structures.
//!
//! A structure is generated from the first period length `b1`, the chirp
//! parameter `zeta` and the period count `N` through the recursion
//! `1/b_k = 1/b1 − (k−1)·zeta`. Each period splits into two equal-width
//! domains of opposite nonlinear-coefficient sign (50% duty cycle), so the
//! profile `d(z)` integrates to zero over every full period. Temperature
//! enters as a uniform multiplicative stretch of every realized period width,
//! modeling physical expansion of a structure fabricated at 25 °C.

use alloc::vec::Vec;

use crate::material::{MaterialError, ThermalExpansion};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GratingError {
    #[error("first period length must be positive, got {0} um")]
    NonPositiveFirstPeriod(f64),
    #[error("need at least one period")]
    NoPeriods,
    #[error("period {k} has non-positive length: 1/b1 - (k-1)*zeta = {inverse_um} per um")]
    NonPositivePeriod { k: u32, inverse_um: f64 },
    #[error("thermal expansion: {0}")]
    Expansion(#[from] MaterialError),
}

/// The three structures fabricated on one substrate in the reference
/// experiments; all have N = 2515 periods and L ≈ 2 cm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GratingPreset {
    /// b1 = 7.95 µm, ζ = 0.
    Unchirped,
    /// b1 = 7.85 µm, ζ = 1.26×10⁻⁶ µm⁻¹.
    Medium,
    /// b1 = 7.5 µm, ζ = 6.24×10⁻⁶ µm⁻¹.
    Maximum,
}

impl GratingPreset {
    pub const PERIOD_COUNT: u32 = 2515;

    pub fn parameters(self) -> (f64, f64) {
        match self {
            GratingPreset::Unchirped => (7.95, 0.0),
            GratingPreset::Medium => (7.85, 1.26e-6),
            GratingPreset::Maximum => (7.5, 6.24e-6),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GratingPreset::Unchirped => "unchirped",
            GratingPreset::Medium => "medium",
            GratingPreset::Maximum => "max",
        }
    }
}

/// Generative parameters of a linearly chirped poling structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingSpec {
    b1_um: f64,
    zeta_per_um: f64,
    n_periods: u32,
    expansion: ThermalExpansion,
}

impl GratingSpec {
    /// Validates that every period the recursion will generate has positive
    /// length; a violating `(b1, zeta, N)` combination is rejected here rather
    /// than at realization time.
    pub fn new(
        b1_um: f64,
        zeta_per_um: f64,
        n_periods: u32,
        expansion: ThermalExpansion,
    ) -> Result<Self, GratingError> {
        if !(b1_um > 0.0) {
            return Err(GratingError::NonPositiveFirstPeriod(b1_um));
        }
        if n_periods == 0 {
            return Err(GratingError::NoPeriods);
        }
        // 1/b_k decreases with k only for zeta > 0, so the last period is the
        // binding one; for zeta <= 0 every inverse exceeds 1/b1 > 0.
        if zeta_per_um > 0.0 {
            let spec = Self {
                b1_um,
                zeta_per_um,
                n_periods,
                expansion,
            };
            for (k, inv) in spec.inverse_lengths().enumerate() {
                if inv <= 0.0 {
                    return Err(GratingError::NonPositivePeriod {
                        k: k as u32 + 1,
                        inverse_um: inv,
                    });
                }
            }
            return Ok(spec);
        }
        Ok(Self {
            b1_um,
            zeta_per_um,
            n_periods,
            expansion,
        })
    }

    pub fn preset(preset: GratingPreset, expansion: ThermalExpansion) -> Self {
        let (b1, zeta) = preset.parameters();
        Self::new(b1, zeta, GratingPreset::PERIOD_COUNT, expansion)
            .expect("preset parameters are valid")
    }

    pub fn b1_um(&self) -> f64 {
        self.b1_um
    }

    pub fn zeta_per_um(&self) -> f64 {
        self.zeta_per_um
    }

    pub fn n_periods(&self) -> u32 {
        self.n_periods
    }

    pub fn expansion(&self) -> &ThermalExpansion {
        &self.expansion
    }

    fn inverse_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        let inv_b1 = 1.0 / self.b1_um;
        let zeta = self.zeta_per_um;
        (0..self.n_periods).map(move |k| inv_b1 - k as f64 * zeta)
    }

    /// Period widths b_k(T) for k = 1..N, each strictly positive and scaled by
    /// the thermal expansion factor relative to fabrication at 25 °C.
    pub fn period_lengths(&self, temperature_c: f64) -> Result<Vec<f64>, GratingError> {
        let scale = self.expansion.scale_factor(temperature_c)?;
        let mut lengths = Vec::with_capacity(self.n_periods as usize);
        for (k, inv) in self.inverse_lengths().enumerate() {
            if inv <= 0.0 {
                return Err(GratingError::NonPositivePeriod {
                    k: k as u32 + 1,
                    inverse_um: inv,
                });
            }
            lengths.push(scale / inv);
        }
        Ok(lengths)
    }

    /// Realize the full segment layout at the given temperature.
    pub fn realize(&self, temperature_c: f64) -> Result<GratingRealization, GratingError> {
        let lengths = self.period_lengths(temperature_c)?;
        let mut segments = Vec::with_capacity(2 * lengths.len());
        let mut cursor = 0.0f64;
        let mut kahan_c = 0.0f64;
        for &b in &lengths {
            let half = 0.5 * b;
            segments.push(Segment {
                start_um: cursor,
                width_um: half,
                sign: 1,
            });
            let mid = kahan_add(&mut cursor, &mut kahan_c, half);
            segments.push(Segment {
                start_um: mid,
                width_um: half,
                sign: -1,
            });
            kahan_add(&mut cursor, &mut kahan_c, half);
        }
        Ok(GratingRealization {
            segments,
            total_length_um: cursor,
            temperature_c,
        })
    }
}

/// Compensated accumulation; returns the updated sum.
fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) -> f64 {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
    *sum
}

/// Starting positions a_k = a_{k−1} + b_{k−1} with a_1 = 0 (prefix sums).
pub fn starting_positions(lengths: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lengths.len());
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    for &b in lengths {
        out.push(acc);
        kahan_add(&mut acc, &mut comp, b);
    }
    out
}

/// One constant-sign domain of the realized structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_um: f64,
    pub width_um: f64,
    /// +1 or −1.
    pub sign: i8,
}

/// Immutable realized poling layout d(z) at a fixed temperature: contiguous
/// alternating-sign segments, two equal-width segments per period.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingRealization {
    segments: Vec<Segment>,
    total_length_um: f64,
    temperature_c: f64,
}

impl GratingRealization {
    /// Assemble from raw segments. Intended for tests and synthetic layouts;
    /// checks contiguity only.
    pub fn from_segments(segments: Vec<Segment>, temperature_c: f64) -> Self {
        let total = segments
            .last()
            .map(|s| s.start_um + s.width_um)
            .unwrap_or(0.0);
        Self {
            segments,
            total_length_um: total,
            temperature_c,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length_um(&self) -> f64 {
        self.total_length_um
    }

    pub fn temperature_c(&self) -> f64 {
        self.temperature_c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rigid() -> ThermalExpansion {
        ThermalExpansion::rigid()
    }

    #[test]
    fn unchirped_periods_are_constant_and_sum_to_length() {
        let spec = GratingSpec::new(7.95, 0.0, 2515, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        assert_eq!(lengths.len(), 2515);
        assert!(lengths.iter().all(|&b| b == 7.95));
        let total: f64 = spec.realize(25.0).unwrap().total_length_um();
        assert_relative_eq!(total, 2515.0 * 7.95, max_relative = 1e-13);
        // ~2 cm
        assert!(total > 19_900.0 && total < 20_300.0);
    }

    #[test]
    fn maximum_chirp_matches_independent_recursion() {
        // Frozen from an independent evaluation of the recursion and sum.
        let spec = GratingSpec::new(7.5, 6.24e-6, 2515, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        assert_relative_eq!(lengths[2514], 8.500078427390, max_relative = 1e-11);
        let total = spec.realize(25.0).unwrap().total_length_um();
        assert_relative_eq!(total, 20067.674673053, max_relative = 1e-11);
    }

    #[test]
    fn medium_chirp_matches_independent_recursion() {
        let spec = GratingSpec::new(7.85, 1.26e-6, 2515, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        assert_relative_eq!(lengths[2514], 8.050175453523, max_relative = 1e-11);
        let total = spec.realize(25.0).unwrap().total_length_um();
        assert_relative_eq!(total, 19992.358712902, max_relative = 1e-11);
    }

    #[test]
    fn non_positive_period_is_rejected_naming_k() {
        let err = GratingSpec::new(2.0, 0.6, 2, rigid()).unwrap_err();
        match err {
            GratingError::NonPositivePeriod { k, inverse_um } => {
                assert_eq!(k, 2);
                assert!((inverse_um - (0.5 - 0.6)).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn starting_positions_are_prefix_sums() {
        assert_eq!(starting_positions(&[7.95, 7.95]), alloc::vec![0.0, 7.95]);
        assert_eq!(starting_positions(&[]), alloc::vec![]);
    }

    #[test]
    fn last_start_plus_length_telescopes_to_total() {
        let spec = GratingSpec::new(7.5, 6.24e-6, 2515, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        let starts = starting_positions(&lengths);
        let total = spec.realize(25.0).unwrap().total_length_um();
        assert_relative_eq!(
            starts.last().unwrap() + lengths.last().unwrap(),
            total,
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_period_realization() {
        let spec = GratingSpec::new(8.0, 0.0, 1, rigid()).unwrap();
        let real = spec.realize(25.0).unwrap();
        assert_eq!(
            real.segments(),
            &[
                Segment {
                    start_um: 0.0,
                    width_um: 4.0,
                    sign: 1
                },
                Segment {
                    start_um: 4.0,
                    width_um: 4.0,
                    sign: -1
                },
            ]
        );
        assert_eq!(real.total_length_um(), 8.0);
    }

    #[test]
    fn unchirped_preset_has_5030_equal_segments() {
        let real = GratingSpec::preset(GratingPreset::Unchirped, rigid())
            .realize(25.0)
            .unwrap();
        assert_eq!(real.segments().len(), 5030);
        assert!(real.segments().iter().all(|s| s.width_um == 3.975));
    }

    #[test]
    fn realization_is_contiguous_with_paired_signs() {
        let real = GratingSpec::preset(GratingPreset::Maximum, rigid())
            .realize(25.0)
            .unwrap();
        let segs = real.segments();
        for pair in segs.chunks(2) {
            assert_eq!(pair[0].sign, 1);
            assert_eq!(pair[1].sign, -1);
            // equal half-widths, so d(z) integrates to zero over the period
            assert_eq!(pair[0].width_um, pair[1].width_um);
        }
        for w in segs.windows(2) {
            assert_relative_eq!(
                w[0].start_um + w[0].width_um,
                w[1].start_um,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn positive_chirp_gives_strictly_increasing_widths() {
        let spec = GratingSpec::new(7.5, 6.24e-6, 2515, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        assert!(lengths.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn thermal_expansion_scales_every_width_uniformly() {
        let expansion = ThermalExpansion::new(1.6e-5, 7e-9, (0.0, 300.0)).unwrap();
        let spec = GratingSpec::new(7.5, 6.24e-6, 2515, expansion).unwrap();
        let cold = spec.realize(25.0).unwrap();
        let hot = spec.realize(80.0).unwrap();
        let f = expansion.scale_factor(80.0).unwrap();
        for (c, h) in cold.segments().iter().zip(hot.segments()) {
            assert_relative_eq!(h.width_um, c.width_um * f, max_relative = 1e-13);
        }
        assert_relative_eq!(
            hot.total_length_um(),
            cold.total_length_um() * f,
            max_relative = 1e-12
        );
    }

    #[test]
    fn negative_chirp_is_accepted_and_decreasing() {
        let spec = GratingSpec::new(8.0, -1e-6, 100, rigid()).unwrap();
        let lengths = spec.period_lengths(25.0).unwrap();
        assert!(lengths.windows(2).all(|w| w[1] < w[0]));
        assert!(lengths.iter().all(|&b| b > 0.0));
    }
}
