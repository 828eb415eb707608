//! Run configurations: one experiment per file, strictly validated.
//!
//! ```text
//! experiment = bscan        # spectrum | sweep | ascan | bscan | pellicle | design
//! material = materials/slt.mat
//! seed = 42                 # required for photon-counting experiments
//! flux_scale = 2e5          # photons/s of total source flux (unit-area source)
//!
//! [grating]
//! preset = max              # or b1_um / zeta_per_um / n_periods
//! temperature_c = 80
//!
//! [source]
//! kind = spdc               # spdc | gaussian | tabulated
//!
//! [detector]
//! preset = sspd             # sspd | spad | ideal, or file = qe.csv
//!
//! [protocol]
//! z_range_um = 70
//! z_step_um = 0.1
//! dwell_s = 0.5
//! x_range_um = 800
//! x_step_um = 5
//!
//! [sample]
//! kind = mirror             # mirror | pellicle | onion
//! depth_um = 35
//! reflectance = 0.9
//! ```
//!
//! Unknown keys are fatal and come back with a nearest-spelling suggestion;
//! every numeric field name carries its unit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cdi_core::grating::{GratingPreset, GratingSpec};
use cdi_core::material::ThermalExpansion;

use crate::textio::{
    parse_document, parse_f64, parse_u64, reject_unknown_keys, Document, Entry, ParseError,
};

#[derive(Debug)]
pub enum ConfigError {
    Parse(ParseError),
    Validation { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(e) => write!(f, "{e}"),
            ConfigError::Validation { field, message } => write!(f, "`{field}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<ParseError> for ConfigError {
    fn from(e: ParseError) -> Self {
        ConfigError::Parse(e)
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectrum,
    Sweep,
    AScan,
    BScan,
    Pellicle,
    Design,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Sweep => "sweep",
            Experiment::AScan => "ascan",
            Experiment::BScan => "bscan",
            Experiment::Pellicle => "pellicle",
            Experiment::Design => "design",
        }
    }

    /// Experiments that sample photon counts and therefore need a seed.
    pub fn uses_counts(&self) -> bool {
        matches!(self, Experiment::AScan | Experiment::BScan | Experiment::Pellicle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GratingConfig {
    Preset(GratingPreset),
    Custom {
        b1_um: f64,
        zeta_per_um: f64,
        n_periods: u32,
    },
}

impl GratingConfig {
    pub fn describe(&self) -> String {
        match self {
            GratingConfig::Preset(p) => format!("preset `{}`", p.name()),
            GratingConfig::Custom {
                b1_um,
                zeta_per_um,
                n_periods,
            } => format!("custom (b1 = {b1_um} um, zeta = {zeta_per_um} /um, N = {n_periods})"),
        }
    }

    pub fn to_spec(&self, expansion: ThermalExpansion) -> Result<GratingSpec, ConfigError> {
        match self {
            GratingConfig::Preset(p) => Ok(GratingSpec::preset(*p, expansion)),
            GratingConfig::Custom {
                b1_um,
                zeta_per_um,
                n_periods,
            } => GratingSpec::new(*b1_um, *zeta_per_um, *n_periods, expansion)
                .map_err(|e| invalid("[grating]", e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceConfig {
    Spdc,
    Gaussian { center_nm: f64, fwhm_nm: f64 },
    Tabulated { file: PathBuf },
}

impl SourceConfig {
    pub fn describe(&self) -> String {
        match self {
            SourceConfig::Spdc => "spdc".to_string(),
            SourceConfig::Gaussian { center_nm, fwhm_nm } => {
                format!("gaussian (center {center_nm} nm, fwhm {fwhm_nm} nm)")
            }
            SourceConfig::Tabulated { file } => format!("tabulated ({})", file.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorConfig {
    Preset(String),
    Tabulated { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub wavelength_min_nm: f64,
    pub wavelength_max_nm: f64,
    pub wavelength_step_nm: f64,
    pub temperature_min_c: f64,
    pub temperature_max_c: f64,
    pub temperature_step_c: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            wavelength_min_nm: 700.0,
            wavelength_max_nm: 1500.0,
            wavelength_step_nm: 0.5,
            temperature_min_c: 25.0,
            temperature_max_c: 200.0,
            temperature_step_c: 2.5,
        }
    }
}

impl GridConfig {
    pub fn wavelengths_nm(&self) -> Vec<f64> {
        let n = ((self.wavelength_max_nm - self.wavelength_min_nm) / self.wavelength_step_nm
            + 1e-9) as usize
            + 1;
        (0..n)
            .map(|i| self.wavelength_min_nm + i as f64 * self.wavelength_step_nm)
            .collect()
    }

    pub fn temperatures_c(&self) -> Vec<f64> {
        let n = ((self.temperature_max_c - self.temperature_min_c) / self.temperature_step_c
            + 1e-9) as usize
            + 1;
        (0..n)
            .map(|i| self.temperature_min_c + i as f64 * self.temperature_step_c)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub z_range_um: f64,
    pub z_step_um: f64,
    pub dwell_s: f64,
    pub x_range_um: f64,
    pub x_step_um: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        // reference imaging protocol: 70 um depth at 100 nm steps, 800 um
        // across at 5 um steps
        Self {
            z_range_um: 70.0,
            z_step_um: 0.1,
            dwell_s: 0.5,
            x_range_um: 800.0,
            x_step_um: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleConfig {
    Mirror { depth_um: f64, reflectance: f64 },
    Pellicle {
        index: f64,
        thickness_um: f64,
        depth_um: f64,
    },
    Onion { membrane_reflectance: f64 },
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig::Mirror {
            depth_um: 35.0,
            reflectance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub target_center_nm: f64,
    pub target_fwhm_nm: f64,
    pub temperature_c: f64,
    pub b1_min_um: f64,
    pub b1_max_um: f64,
    pub zeta_min_per_um: f64,
    pub zeta_max_per_um: f64,
    pub n_periods: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub material_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub flux_scale: f64,
    pub reference_reflectance: f64,
    pub grating: GratingConfig,
    pub grating_temperature_c: f64,
    pub source: SourceConfig,
    pub detector: DetectorConfig,
    pub grid: GridConfig,
    pub protocol: ProtocolConfig,
    pub sample: SampleConfig,
    pub design: Option<DesignConfig>,
}

const TOP_KEYS: &[&str] = &[
    "experiment",
    "material",
    "seed",
    "flux_scale",
    "reference_reflectance",
];
const SECTIONS: &[&str] = &[
    "grating", "source", "detector", "grid", "protocol", "sample", "design",
];

/// Parse and validate a run configuration; `base_dir` anchors relative paths.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let doc = parse_document(text)?;
    reject_unknown_keys(&doc.top, TOP_KEYS, "top level")?;
    for (name, section) in &doc.sections {
        if !SECTIONS.contains(&name.as_str()) {
            let line = section.values().next().map(|e| e.line).unwrap_or(0);
            return Err(ConfigError::Parse(ParseError {
                line,
                message: format!("unknown section `[{name}]`"),
            }));
        }
    }

    let experiment = match required(&doc.top, "experiment")?.value.as_str() {
        "spectrum" => Experiment::Spectrum,
        "sweep" => Experiment::Sweep,
        "ascan" => Experiment::AScan,
        "bscan" => Experiment::BScan,
        "pellicle" => Experiment::Pellicle,
        "design" => Experiment::Design,
        other => {
            return Err(invalid(
                "experiment",
                format!("unknown experiment `{other}`; expected spectrum, sweep, ascan, bscan, pellicle or design"),
            ))
        }
    };

    let material_path = doc
        .top
        .get("material")
        .map(|e| resolve_path(&e.value, base_dir));
    let seed = doc
        .top
        .get("seed")
        .map(|e| parse_u64(e, "seed"))
        .transpose()?;
    let flux_scale = doc
        .top
        .get("flux_scale")
        .map(|e| parse_f64(e, "flux_scale"))
        .transpose()?
        .unwrap_or(2e5);
    let reference_reflectance = doc
        .top
        .get("reference_reflectance")
        .map(|e| parse_f64(e, "reference_reflectance"))
        .transpose()?
        .unwrap_or(1.0);

    let (grating, grating_temperature_c) = parse_grating(&doc)?;
    let source = parse_source(&doc, base_dir)?;
    let detector = parse_detector(&doc, base_dir)?;
    let grid = parse_grid(&doc)?;
    let protocol = parse_protocol(&doc)?;
    let sample = parse_sample(&doc)?;
    let design = parse_design(&doc)?;

    let config = RunConfig {
        experiment,
        material_path,
        seed,
        flux_scale,
        reference_reflectance,
        grating,
        grating_temperature_c,
        source,
        detector,
        grid,
        protocol,
        sample,
        design,
    };
    validate(&config)?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid("config", e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    let needs_material = matches!(config.experiment, Experiment::Sweep | Experiment::Design)
        || (config.source == SourceConfig::Spdc
            && matches!(
                config.experiment,
                Experiment::Spectrum | Experiment::AScan | Experiment::BScan | Experiment::Pellicle
            ));
    if needs_material && config.material_path.is_none() {
        return Err(invalid(
            "material",
            "required for experiments that evaluate the nonlinear structure",
        ));
    }
    if let Some(path) = &config.material_path {
        if !path.exists() {
            return Err(invalid(
                "material",
                format!("file not found: {}", path.display()),
            ));
        }
    }
    if config.experiment.uses_counts() && config.seed.is_none() {
        return Err(invalid(
            "seed",
            "photon-counting experiments need an explicit seed",
        ));
    }
    if config.experiment == Experiment::Design && config.design.is_none() {
        return Err(invalid("[design]", "the design experiment needs a [design] section"));
    }
    if !(config.flux_scale >= 0.0) {
        return Err(invalid("flux_scale", "must be non-negative"));
    }
    if !(config.reference_reflectance >= 0.0) {
        return Err(invalid("reference_reflectance", "must be non-negative"));
    }
    // surface grating invariants now, with a throwaway rigid expansion;
    // the material file's expansion only rescales widths and cannot break
    // positivity
    config.grating.to_spec(ThermalExpansion::rigid())?;
    let g = &config.grid;
    if !(g.wavelength_min_nm > 0.0)
        || g.wavelength_max_nm <= g.wavelength_min_nm
        || !(g.wavelength_step_nm > 0.0)
    {
        return Err(invalid("[grid]", "wavelength range must be positive and ascending"));
    }
    if g.temperature_max_c < g.temperature_min_c || !(g.temperature_step_c > 0.0) {
        return Err(invalid("[grid]", "temperature range must be ascending with positive step"));
    }
    let p = &config.protocol;
    cdi_core::scan::ScanProtocol::new(
        p.z_range_um,
        p.z_step_um,
        p.dwell_s,
        p.x_range_um,
        p.x_step_um,
    )
    .map_err(|e| invalid("[protocol]", e.to_string()))?;
    match &config.sample {
        SampleConfig::Mirror { reflectance, .. } if !(-1.0..=1.0).contains(reflectance) => {
            return Err(invalid("[sample] reflectance", "must lie in [-1, 1]"));
        }
        SampleConfig::Pellicle { index, .. } if !(*index >= 1.0) => {
            return Err(invalid("[sample] index", "must be >= 1"));
        }
        SampleConfig::Onion {
            membrane_reflectance,
        } if !(0.0..=1.0).contains(membrane_reflectance) => {
            return Err(invalid("[sample] membrane_reflectance", "must lie in [0, 1]"));
        }
        _ => {}
    }
    if let Some(d) = &config.design {
        if !(d.b1_min_um > 0.0) || d.b1_max_um < d.b1_min_um || d.zeta_max_per_um < d.zeta_min_per_um
        {
            return Err(invalid("[design]", "bounds must be non-empty with positive b1"));
        }
        // corners must satisfy the grating invariant somewhere; fully
        // infeasible boxes fail at run time with an infeasible-search error
        if d.n_periods == 0 {
            return Err(invalid("[design] n_periods", "must be at least 1"));
        }
    }
    Ok(())
}

fn parse_grating(doc: &Document) -> Result<(GratingConfig, f64), ConfigError> {
    let Some(section) = doc.sections.get("grating") else {
        return Ok((GratingConfig::Preset(GratingPreset::Maximum), 80.0));
    };
    reject_unknown_keys(
        section,
        &["preset", "b1_um", "zeta_per_um", "n_periods", "temperature_c"],
        "[grating]",
    )?;
    let temperature_c = section
        .get("temperature_c")
        .map(|e| parse_f64(e, "temperature_c"))
        .transpose()?
        .unwrap_or(80.0);
    if let Some(preset) = section.get("preset") {
        if section.contains_key("b1_um") || section.contains_key("zeta_per_um") {
            return Err(invalid(
                "[grating]",
                "give either `preset` or custom parameters, not both",
            ));
        }
        let preset = match preset.value.as_str() {
            "unchirped" => GratingPreset::Unchirped,
            "medium" => GratingPreset::Medium,
            "max" => GratingPreset::Maximum,
            other => {
                return Err(invalid(
                    "[grating] preset",
                    format!("unknown preset `{other}`; expected unchirped, medium or max"),
                ))
            }
        };
        return Ok((GratingConfig::Preset(preset), temperature_c));
    }
    let b1_um = parse_f64(required_in(section, "b1_um", "[grating]")?, "b1_um")?;
    let zeta_per_um = parse_f64(
        required_in(section, "zeta_per_um", "[grating]")?,
        "zeta_per_um",
    )?;
    let n_periods = parse_u64(
        required_in(section, "n_periods", "[grating]")?,
        "n_periods",
    )? as u32;
    Ok((
        GratingConfig::Custom {
            b1_um,
            zeta_per_um,
            n_periods,
        },
        temperature_c,
    ))
}

fn parse_source(doc: &Document, base_dir: &Path) -> Result<SourceConfig, ConfigError> {
    let Some(section) = doc.sections.get("source") else {
        return Ok(SourceConfig::Spdc);
    };
    reject_unknown_keys(section, &["kind", "center_nm", "fwhm_nm", "file"], "[source]")?;
    match required_in(section, "kind", "[source]")?.value.as_str() {
        "spdc" => Ok(SourceConfig::Spdc),
        // superluminescent-diode shorthand: 930 nm center, 70 nm FWHM
        "sld930" => Ok(SourceConfig::Gaussian {
            center_nm: 930.0,
            fwhm_nm: 70.0,
        }),
        "gaussian" => {
            let center_nm = parse_f64(
                required_in(section, "center_nm", "[source]")?,
                "center_nm",
            )?;
            let fwhm_nm = parse_f64(required_in(section, "fwhm_nm", "[source]")?, "fwhm_nm")?;
            if !(center_nm > 0.0 && fwhm_nm > 0.0) {
                return Err(invalid("[source]", "center_nm and fwhm_nm must be positive"));
            }
            Ok(SourceConfig::Gaussian { center_nm, fwhm_nm })
        }
        "tabulated" => {
            let file = required_in(section, "file", "[source]")?;
            Ok(SourceConfig::Tabulated {
                file: resolve_path(&file.value, base_dir),
            })
        }
        other => Err(invalid(
            "[source] kind",
            format!("unknown kind `{other}`; expected spdc, gaussian, sld930 or tabulated"),
        )),
    }
}

fn parse_detector(doc: &Document, base_dir: &Path) -> Result<DetectorConfig, ConfigError> {
    let Some(section) = doc.sections.get("detector") else {
        return Ok(DetectorConfig::Preset("sspd".to_string()));
    };
    reject_unknown_keys(section, &["preset", "file"], "[detector]")?;
    if let Some(file) = section.get("file") {
        return Ok(DetectorConfig::Tabulated {
            file: resolve_path(&file.value, base_dir),
        });
    }
    let preset = required_in(section, "preset", "[detector]")?;
    match preset.value.as_str() {
        "sspd" | "spad" | "ideal" => Ok(DetectorConfig::Preset(preset.value.clone())),
        other => Err(invalid(
            "[detector] preset",
            format!("unknown preset `{other}`; expected sspd, spad or ideal"),
        )),
    }
}

fn parse_grid(doc: &Document) -> Result<GridConfig, ConfigError> {
    let mut grid = GridConfig::default();
    let Some(section) = doc.sections.get("grid") else {
        return Ok(grid);
    };
    reject_unknown_keys(
        section,
        &[
            "wavelength_min_nm",
            "wavelength_max_nm",
            "wavelength_step_nm",
            "temperature_min_c",
            "temperature_max_c",
            "temperature_step_c",
        ],
        "[grid]",
    )?;
    for (key, slot) in [
        ("wavelength_min_nm", &mut grid.wavelength_min_nm),
        ("wavelength_max_nm", &mut grid.wavelength_max_nm),
        ("wavelength_step_nm", &mut grid.wavelength_step_nm),
        ("temperature_min_c", &mut grid.temperature_min_c),
        ("temperature_max_c", &mut grid.temperature_max_c),
        ("temperature_step_c", &mut grid.temperature_step_c),
    ] {
        if let Some(entry) = section.get(key) {
            *slot = parse_f64(entry, key)?;
        }
    }
    Ok(grid)
}

fn parse_protocol(doc: &Document) -> Result<ProtocolConfig, ConfigError> {
    let mut protocol = ProtocolConfig::default();
    let Some(section) = doc.sections.get("protocol") else {
        return Ok(protocol);
    };
    reject_unknown_keys(
        section,
        &["z_range_um", "z_step_um", "dwell_s", "x_range_um", "x_step_um"],
        "[protocol]",
    )?;
    for (key, slot) in [
        ("z_range_um", &mut protocol.z_range_um),
        ("z_step_um", &mut protocol.z_step_um),
        ("dwell_s", &mut protocol.dwell_s),
        ("x_range_um", &mut protocol.x_range_um),
        ("x_step_um", &mut protocol.x_step_um),
    ] {
        if let Some(entry) = section.get(key) {
            *slot = parse_f64(entry, key)?;
        }
    }
    Ok(protocol)
}

fn parse_sample(doc: &Document) -> Result<SampleConfig, ConfigError> {
    let Some(section) = doc.sections.get("sample") else {
        return Ok(SampleConfig::default());
    };
    reject_unknown_keys(
        section,
        &[
            "kind",
            "depth_um",
            "reflectance",
            "index",
            "thickness_um",
            "membrane_reflectance",
        ],
        "[sample]",
    )?;
    match required_in(section, "kind", "[sample]")?.value.as_str() {
        "mirror" => Ok(SampleConfig::Mirror {
            depth_um: section
                .get("depth_um")
                .map(|e| parse_f64(e, "depth_um"))
                .transpose()?
                .unwrap_or(35.0),
            reflectance: section
                .get("reflectance")
                .map(|e| parse_f64(e, "reflectance"))
                .transpose()?
                .unwrap_or(1.0),
        }),
        "pellicle" => Ok(SampleConfig::Pellicle {
            index: section
                .get("index")
                .map(|e| parse_f64(e, "index"))
                .transpose()?
                .unwrap_or(1.5),
            thickness_um: section
                .get("thickness_um")
                .map(|e| parse_f64(e, "thickness_um"))
                .transpose()?
                .unwrap_or(2.0),
            depth_um: section
                .get("depth_um")
                .map(|e| parse_f64(e, "depth_um"))
                .transpose()?
                .unwrap_or(35.0),
        }),
        "onion" => Ok(SampleConfig::Onion {
            membrane_reflectance: section
                .get("membrane_reflectance")
                .map(|e| parse_f64(e, "membrane_reflectance"))
                .transpose()?
                .unwrap_or(0.2),
        }),
        other => Err(invalid(
            "[sample] kind",
            format!("unknown kind `{other}`; expected mirror, pellicle or onion"),
        )),
    }
}

fn parse_design(doc: &Document) -> Result<Option<DesignConfig>, ConfigError> {
    let Some(section) = doc.sections.get("design") else {
        return Ok(None);
    };
    reject_unknown_keys(
        section,
        &[
            "target_center_nm",
            "target_fwhm_nm",
            "temperature_c",
            "b1_min_um",
            "b1_max_um",
            "zeta_min_per_um",
            "zeta_max_per_um",
            "n_periods",
        ],
        "[design]",
    )?;
    let get = |key: &str| -> Result<f64, ConfigError> {
        Ok(parse_f64(required_in(section, key, "[design]")?, key)?)
    };
    Ok(Some(DesignConfig {
        target_center_nm: get("target_center_nm")?,
        target_fwhm_nm: get("target_fwhm_nm")?,
        temperature_c: section
            .get("temperature_c")
            .map(|e| parse_f64(e, "temperature_c"))
            .transpose()?
            .unwrap_or(80.0),
        b1_min_um: get("b1_min_um")?,
        b1_max_um: get("b1_max_um")?,
        zeta_min_per_um: get("zeta_min_per_um")?,
        zeta_max_per_um: get("zeta_max_per_um")?,
        n_periods: section
            .get("n_periods")
            .map(|e| parse_u64(e, "n_periods"))
            .transpose()?
            .unwrap_or(2515) as u32,
    }))
}

fn required<'a>(map: &'a BTreeMap<String, Entry>, key: &str) -> Result<&'a Entry, ConfigError> {
    map.get(key)
        .ok_or_else(|| invalid(key, "missing required field"))
}

fn required_in<'a>(
    map: &'a BTreeMap<String, Entry>,
    key: &str,
    scope: &str,
) -> Result<&'a Entry, ConfigError> {
    map.get(key)
        .ok_or_else(|| invalid(&format!("{scope} {key}"), "missing required field"))
}

fn resolve_path(value: &str, base_dir: &Path) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base_dir.join(p)
    }
}
