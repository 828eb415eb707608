//! Shared fixtures for unit tests.

use crate::material::{DispersionModel, SellmeierCoefficients, ThermalExpansion};

/// Published thermo-optic Sellmeier fit for stoichiometric LiTaO3
/// (extraordinary index), used as a literature stand-in by tests that need a
/// realistic dispersion curve. The CLI ships the same numbers as a material
/// definition file.
pub fn slt_coefficients() -> SellmeierCoefficients {
    SellmeierCoefficients {
        a: 4.502483,
        b: 0.007294,
        c: 0.185087,
        d: -0.02357,
        e: 0.073423,
        f: 0.199595,
        b_t: 3.483933e-8,
        c_t: 1.607839e-8,
    }
}

pub fn slt_model() -> DispersionModel {
    DispersionModel::sellmeier(slt_coefficients(), (0.4, 4.0), (10.0, 250.0)).unwrap()
}

pub fn slt_expansion() -> ThermalExpansion {
    ThermalExpansion::new(1.6e-5, 7e-9, (10.0, 250.0)).unwrap()
}
