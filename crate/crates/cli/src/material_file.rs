//! Material definition files: dispersion and thermal expansion as data.
//!
//! ```text
//! kind = sellmeier                # constant | sellmeier | tabulated
//! coefficients = a:4.5, b:0.007, c:0.185, d:-0.024, e:0.073, f:0.2, b_t:3.5e-8, c_t:1.6e-8
//! valid_wavelength_um = [0.4, 4.0]
//! valid_temperature_c = [10, 250]
//! alpha = 1.6e-5                  # thermal expansion, 1/C
//! beta = 7e-9                     # thermal expansion, 1/C^2
//! ```
//!
//! `kind = constant` takes `coefficients = n:<index>`; `kind = tabulated`
//! takes `table_wavelengths_um`, `table_temperatures_c` and a `table_index`
//! list (one row per temperature, wavelengths varying fastest) instead of
//! `coefficients`.

use std::collections::BTreeMap;
use std::path::Path;

use cdi_core::material::{
    DispersionModel, IndexTable, SellmeierCoefficients, ThermalExpansion,
};

use crate::textio::{
    parse_document, parse_f64, parse_list, parse_named_list, reject_unknown_keys, Entry,
    ParseError,
};

#[derive(Debug)]
pub enum MaterialFileError {
    Io(std::io::Error),
    Parse(ParseError),
    Invalid(String),
}

impl std::fmt::Display for MaterialFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaterialFileError::Io(e) => write!(f, "io: {e}"),
            MaterialFileError::Parse(e) => write!(f, "{e}"),
            MaterialFileError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for MaterialFileError {}

impl From<ParseError> for MaterialFileError {
    fn from(e: ParseError) -> Self {
        MaterialFileError::Parse(e)
    }
}

/// Dispersion model plus expansion coefficients, as loaded from one file.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub dispersion: DispersionModel,
    pub expansion: ThermalExpansion,
}

pub fn load_material(path: &Path) -> Result<Material, MaterialFileError> {
    let text = std::fs::read_to_string(path).map_err(MaterialFileError::Io)?;
    parse_material(&text)
}

pub fn parse_material(text: &str) -> Result<Material, MaterialFileError> {
    let doc = parse_document(text)?;
    if let Some((name, section)) = doc.sections.iter().next() {
        let line = section.values().next().map(|e| e.line).unwrap_or(0);
        return Err(MaterialFileError::Parse(ParseError {
            line,
            message: format!("material files have no sections, found `[{name}]`"),
        }));
    }
    reject_unknown_keys(
        &doc.top,
        &[
            "kind",
            "coefficients",
            "valid_wavelength_um",
            "valid_temperature_c",
            "alpha",
            "beta",
            "table_wavelengths_um",
            "table_temperatures_c",
            "table_index",
        ],
        "material file",
    )?;

    let kind = required(&doc.top, "kind")?;
    let valid_wavelength = range_field(&doc.top, "valid_wavelength_um")?;
    let valid_temperature = range_field(&doc.top, "valid_temperature_c")?;
    let alpha = parse_f64(required(&doc.top, "alpha")?, "alpha")?;
    let beta = parse_f64(required(&doc.top, "beta")?, "beta")?;

    let dispersion = match kind.value.as_str() {
        "constant" => {
            let coeffs = named_coefficients(&doc.top)?;
            let n = *coeffs
                .get("n")
                .ok_or_else(|| MaterialFileError::Invalid("constant kind needs `n` in coefficients".into()))?;
            DispersionModel::constant(n)
                .map_err(|e| MaterialFileError::Invalid(e.to_string()))?
        }
        "sellmeier" => {
            let coeffs = named_coefficients(&doc.top)?;
            let get = |name: &str| -> Result<f64, MaterialFileError> {
                coeffs.get(name).copied().ok_or_else(|| {
                    MaterialFileError::Invalid(format!("sellmeier kind needs coefficient `{name}`"))
                })
            };
            let sellmeier = SellmeierCoefficients {
                a: get("a")?,
                b: get("b")?,
                c: get("c")?,
                d: get("d")?,
                e: get("e")?,
                f: get("f")?,
                b_t: get("b_t")?,
                c_t: get("c_t")?,
            };
            DispersionModel::sellmeier(sellmeier, valid_wavelength, valid_temperature)
                .map_err(|e| MaterialFileError::Invalid(e.to_string()))?
        }
        "tabulated" => {
            let wavelengths = list_field(&doc.top, "table_wavelengths_um")?;
            let temperatures = list_field(&doc.top, "table_temperatures_c")?;
            let index = list_field(&doc.top, "table_index")?;
            let table = IndexTable::new(wavelengths, temperatures, index)
                .map_err(|e| MaterialFileError::Invalid(e.to_string()))?;
            DispersionModel::tabulated(table)
                .map_err(|e| MaterialFileError::Invalid(e.to_string()))?
        }
        other => {
            return Err(MaterialFileError::Invalid(format!(
                "unknown kind `{other}`; expected constant, sellmeier or tabulated"
            )))
        }
    };
    let expansion = ThermalExpansion::new(alpha, beta, valid_temperature)
        .map_err(|e| MaterialFileError::Invalid(e.to_string()))?;
    Ok(Material {
        dispersion,
        expansion,
    })
}

fn required<'a>(
    map: &'a BTreeMap<String, Entry>,
    key: &str,
) -> Result<&'a Entry, MaterialFileError> {
    map.get(key)
        .ok_or_else(|| MaterialFileError::Invalid(format!("missing required field `{key}`")))
}

fn range_field(map: &BTreeMap<String, Entry>, key: &str) -> Result<(f64, f64), MaterialFileError> {
    let list = list_field(map, key)?;
    if list.len() != 2 {
        return Err(MaterialFileError::Invalid(format!(
            "`{key}` must be a two-element range [lo, hi]"
        )));
    }
    Ok((list[0], list[1]))
}

fn list_field(map: &BTreeMap<String, Entry>, key: &str) -> Result<Vec<f64>, MaterialFileError> {
    Ok(parse_list(required(map, key)?, key)?)
}

fn named_coefficients(
    map: &BTreeMap<String, Entry>,
) -> Result<BTreeMap<String, f64>, MaterialFileError> {
    let entry = required(map, "coefficients")?;
    let pairs = parse_named_list(entry, "coefficients")?;
    Ok(pairs.into_iter().collect())
}
