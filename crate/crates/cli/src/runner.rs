//! Experiment execution: build the physics objects a validated configuration
//! describes, run the named experiment, and emit artifacts plus a manifest.
//!
//! Artifacts are written atomically (temp file + rename). If anything fails
//! mid-run, partial outputs are removed and the manifest, always written
//! last, records the failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cdi_core::detection::{DetectorModel, DetectorName, QeCurve};
use cdi_core::grating::GratingSpec;
use cdi_core::interferometry::{
    pellicle_response, EnvelopeResult, Interferogram, SampleResponse,
};
use cdi_core::qpm::{
    design_search, spdc_spectrum, DesignBounds, DesignObjective, DesignOptions, Normalization,
    Spectrum,
};
use cdi_core::scan::{
    b_scan_column, default_onion_phantom, Acquisition, BScanMeta, SamplePhantom, ScanProtocol,
};
use cdi_core::units::omega_from_wavelength_nm;

use crate::config::{
    DetectorConfig, Experiment, RunConfig, SampleConfig, SourceConfig,
};
use crate::manifest::{fnv1a_64, write_atomic, RunManifest};
use crate::material_file::{load_material, Material};
use crate::parallel::map_indexed;

#[derive(Debug)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for RunError {}

fn run_err(context: &str, e: impl std::fmt::Display) -> RunError {
    RunError(format!("{context}: {e}"))
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub failed: bool,
}

/// Execute a validated configuration. Never panics on expected failures: the
/// outcome carries the failure text for the exit status and the manifest.
pub fn run(
    config: &RunConfig,
    config_path: &str,
    config_text: &str,
    out_dir: &Path,
    threads: usize,
) -> std::io::Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        config_path: config_path.to_string(),
        config_fnv1a: fnv1a_64(config_text.as_bytes()),
        config_echo: config_text.to_string(),
        ..RunManifest::default()
    };
    manifest.note_resolved("threads", threads.to_string());
    let started = Instant::now();

    let mut written: Vec<PathBuf> = Vec::new();
    let result = execute(config, out_dir, threads, &mut manifest, &mut written);
    manifest.timings.push(("total".to_string(), started.elapsed()));

    let failed = match result {
        Ok(()) => false,
        Err(e) => {
            for path in &written {
                std::fs::remove_file(path).ok();
            }
            manifest.artifacts.clear();
            manifest.failure = Some(e.0);
            true
        }
    };
    let manifest_path = out_dir.join("manifest.txt");
    write_atomic(&manifest_path, manifest.render().as_bytes())?;
    Ok(RunOutcome {
        manifest,
        manifest_path,
        failed,
    })
}

fn execute(
    config: &RunConfig,
    out_dir: &Path,
    threads: usize,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let material = config
        .material_path
        .as_ref()
        .map(|path| load_material(path).map_err(|e| run_err("material file", e)))
        .transpose()?;
    if let Some(path) = &config.material_path {
        manifest.note_resolved("material", path.display().to_string());
    }

    match config.experiment {
        Experiment::Spectrum => experiment_spectrum(config, &material, out_dir, manifest, written),
        Experiment::Sweep => experiment_sweep(config, &material, out_dir, threads, manifest, written),
        Experiment::AScan | Experiment::Pellicle => {
            experiment_a_scan(config, &material, out_dir, manifest, written)
        }
        Experiment::BScan => experiment_b_scan(config, &material, out_dir, threads, manifest, written),
        Experiment::Design => experiment_design(config, &material, out_dir, manifest, written),
    }
}

fn grating_spec(config: &RunConfig, material: &Option<Material>) -> Result<GratingSpec, RunError> {
    let expansion = material
        .as_ref()
        .map(|m| m.expansion)
        .unwrap_or_else(cdi_core::material::ThermalExpansion::rigid);
    config
        .grating
        .to_spec(expansion)
        .map_err(|e| run_err("grating", e))
}

fn build_detector(config: &RunConfig) -> Result<DetectorModel, RunError> {
    match &config.detector {
        DetectorConfig::Preset(name) => Ok(match name.as_str() {
            "sspd" => DetectorModel::sspd(),
            "spad" => DetectorModel::spad(),
            _ => DetectorModel::ideal(),
        }),
        DetectorConfig::Tabulated { file } => {
            let (wavelengths, values) =
                read_two_column_csv(file).map_err(|e| run_err("detector file", e))?;
            let qe = QeCurve::tabulated(wavelengths, values)
                .map_err(|e| run_err("detector file", e))?;
            DetectorModel::new(DetectorName::Custom, qe, 0.0, 0.0)
                .map_err(|e| run_err("detector", e))
        }
    }
}

/// Source spectral density on the configured wavelength grid, unit-area
/// normalized so `flux_scale` reads as the total photon rate.
fn build_source(
    config: &RunConfig,
    material: &Option<Material>,
) -> Result<(Spectrum, String), RunError> {
    let omega_grid: Vec<f64> = config
        .grid
        .wavelengths_nm()
        .iter()
        .rev()
        .map(|&nm| omega_from_wavelength_nm(nm))
        .collect();
    let (mut spectrum, label) = match &config.source {
        SourceConfig::Spdc => {
            let material = material
                .as_ref()
                .ok_or_else(|| RunError("spdc source needs a material".to_string()))?;
            let spec = grating_spec(config, &Some(material.clone()))?;
            let temperature = config.grating_temperature_c;
            let grating = spec
                .realize(temperature)
                .map_err(|e| run_err("grating", e))?;
            let pump = cdi_core::qpm::PumpConfig::default();
            let spectrum = spdc_spectrum(
                &material.dispersion,
                &pump,
                &grating,
                &omega_grid,
                temperature,
                Normalization::Raw,
            )
            .map_err(|e| run_err("spdc spectrum", e))?;
            let label = format!("spdc({}, {} C)", config.grating.describe(), temperature);
            (spectrum, label)
        }
        SourceConfig::Gaussian { center_nm, fwhm_nm } => {
            let label = format!("gaussian({center_nm} nm, {fwhm_nm} nm)");
            let spectrum = Spectrum::gaussian(*center_nm, *fwhm_nm, omega_grid, &label)
                .map_err(|e| run_err("gaussian source", e))?;
            (spectrum, label)
        }
        SourceConfig::Tabulated { file } => {
            let (wavelengths, densities) =
                read_two_column_csv(file).map_err(|e| run_err("source file", e))?;
            let mut pairs: Vec<(f64, f64)> = wavelengths
                .into_iter()
                .map(omega_from_wavelength_nm)
                .zip(densities)
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequencies"));
            let (omega, density): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let label = format!("tabulated({})", file.display());
            let spectrum = Spectrum::new(omega, density, Normalization::Raw, &label)
                .map_err(|e| run_err("source file", e))?;
            (spectrum, label)
        }
    };
    spectrum
        .renormalize(Normalization::UnitArea)
        .map_err(|e| run_err("source normalization", e))?;
    spectrum.label = label.clone();
    Ok((spectrum, label))
}

fn experiment_spectrum(
    config: &RunConfig,
    material: &Option<Material>,
    out_dir: &Path,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let (mut spectrum, label) = build_source(config, material)?;
    spectrum
        .renormalize(Normalization::PeakOne)
        .map_err(|e| run_err("normalization", e))?;
    manifest.note_resolved("source", &label);
    manifest.push_warnings("source", &spectrum.notes);
    // emit on the configured wavelength grid rather than round-tripping
    // through the frequency axis
    let csv = spectrum_csv(&spectrum, Some(&config.grid.wavelengths_nm()));
    emit(out_dir, "spectrum.csv", csv.as_bytes(), manifest, written)
}

fn experiment_sweep(
    config: &RunConfig,
    material: &Option<Material>,
    out_dir: &Path,
    threads: usize,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let material = material
        .as_ref()
        .ok_or_else(|| RunError("sweep needs a material".to_string()))?;
    let spec = grating_spec(config, &Some(material.clone()))?;
    manifest.note_resolved("grating", config.grating.describe());
    let wavelengths = config.grid.wavelengths_nm();
    let temperatures = config.grid.temperatures_c();
    let omega_grid: Vec<f64> = wavelengths
        .iter()
        .rev()
        .map(|&nm| omega_from_wavelength_nm(nm))
        .collect();
    let pump = cdi_core::qpm::PumpConfig::default();

    // one spectrum per temperature row, fanned out deterministically
    let rows: Vec<Vec<f64>> = map_indexed(temperatures.len(), threads, |t_idx| {
        let t = temperatures[t_idx];
        let grating = spec.realize(t).map_err(|e| run_err("grating", e))?;
        let spectrum = spdc_spectrum(
            &material.dispersion,
            &pump,
            &grating,
            &omega_grid,
            t,
            Normalization::Raw,
        )
        .map_err(|e| run_err("sweep", e))?;
        let mut row: Vec<f64> = spectrum.density().to_vec();
        row.reverse(); // ascending wavelength
        Ok::<_, RunError>(row)
    })?;

    let mut values: Vec<f64> = Vec::with_capacity(temperatures.len() * wavelengths.len());
    for row in rows {
        values.extend(row);
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in &mut values {
            *v /= max;
        }
        manifest.note_resolved("normalization", "global-max = 1");
    } else {
        manifest.warnings.push("sweep: all-zero map left raw".to_string());
    }

    let mut csv = String::from("temperature_c");
    for nm in &wavelengths {
        let _ = write!(csv, ",{nm}");
    }
    csv.push('\n');
    for (t_idx, t) in temperatures.iter().enumerate() {
        let _ = write!(csv, "{t}");
        for l_idx in 0..wavelengths.len() {
            let _ = write!(csv, ",{}", values[t_idx * wavelengths.len() + l_idx]);
        }
        csv.push('\n');
    }
    emit(out_dir, "sweep.csv", csv.as_bytes(), manifest, written)?;

    let pgm = crate::pgm::encode_p5_16(&values, temperatures.len(), wavelengths.len());
    emit(out_dir, "sweep.pgm", &pgm, manifest, written)
}

fn build_sample(config: &RunConfig) -> Result<(SampleResponse, String), RunError> {
    match &config.sample {
        SampleConfig::Mirror {
            depth_um,
            reflectance,
        } => Ok((
            SampleResponse::mirror_at(*depth_um, *reflectance)
                .map_err(|e| run_err("sample", e))?,
            format!("mirror(depth {depth_um} um, r {reflectance})"),
        )),
        SampleConfig::Pellicle {
            index,
            thickness_um,
            depth_um,
        } => {
            let response = pellicle_response(*index, *thickness_um)
                .map_err(|e| run_err("sample", e))?
                .shifted(*depth_um)
                .map_err(|e| run_err("sample", e))?;
            Ok((
                response,
                format!("pellicle(n {index}, L {thickness_um} um, depth {depth_um} um)"),
            ))
        }
        SampleConfig::Onion { .. } => Err(RunError(
            "onion phantom applies to bscan only; use mirror or pellicle here".to_string(),
        )),
    }
}

fn experiment_a_scan(
    config: &RunConfig,
    material: &Option<Material>,
    out_dir: &Path,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let (source, label) = build_source(config, material)?;
    let detector = build_detector(config)?;
    manifest.note_resolved("source", &label);
    manifest.note_resolved("detector", detector.name.as_str());
    let (sample, sample_label) = match config.experiment {
        // the pellicle experiment pins the sample kind regardless of [sample]
        Experiment::Pellicle => {
            let (index, thickness_um, depth_um) = match config.sample {
                SampleConfig::Pellicle {
                    index,
                    thickness_um,
                    depth_um,
                } => (index, thickness_um, depth_um),
                _ => (1.5, 2.0, 35.0),
            };
            let response = pellicle_response(index, thickness_um)
                .map_err(|e| run_err("sample", e))?
                .shifted(depth_um)
                .map_err(|e| run_err("sample", e))?;
            (
                response,
                format!("pellicle(n {index}, L {thickness_um} um, depth {depth_um} um)"),
            )
        }
        _ => build_sample(config)?,
    };
    manifest.note_resolved("sample", &sample_label);
    manifest.push_warnings("sample", &sample.notes);

    let protocol = protocol_of(config)?;
    let seed = config.seed.expect("validated: counts experiments carry a seed");
    let acquisition = Acquisition {
        source,
        detector,
        flux_scale: config.flux_scale,
        reference_reflectance: config.reference_reflectance,
    };
    let scan = cdi_core::scan::a_scan(&acquisition, &sample, &protocol, seed, 0)
        .map_err(|e| run_err("a-scan", e))?;
    manifest.push_warnings("interferogram", &scan.interferogram.notes);

    let csv = interferogram_csv(&scan.interferogram, Some(&scan.envelope));
    emit(out_dir, "ascan.csv", csv.as_bytes(), manifest, written)?;
    let meta = envelope_meta(config, &acquisition, &scan.envelope, scan.duration_s, seed)?;
    emit(out_dir, "ascan_meta.txt", meta.as_bytes(), manifest, written)
}

fn experiment_b_scan(
    config: &RunConfig,
    material: &Option<Material>,
    out_dir: &Path,
    threads: usize,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let (source, label) = build_source(config, material)?;
    let detector = build_detector(config)?;
    manifest.note_resolved("source", &label);
    manifest.note_resolved("detector", detector.name.as_str());
    let phantom = match &config.sample {
        SampleConfig::Onion {
            membrane_reflectance,
        } => default_onion_phantom(*membrane_reflectance).map_err(|e| run_err("phantom", e))?,
        _ => {
            let (response, sample_label) = build_sample(config)?;
            SamplePhantom::uniform(&sample_label, response)
        }
    };
    manifest.note_resolved("phantom", phantom.name());

    let protocol = protocol_of(config)?;
    let seed = config.seed.expect("validated: counts experiments carry a seed");
    let acquisition = Acquisition {
        source,
        detector,
        flux_scale: config.flux_scale,
        reference_reflectance: config.reference_reflectance,
    };

    let columns: Vec<Vec<f64>> = map_indexed(protocol.x_points(), threads, |x_idx| {
        b_scan_column(&acquisition, &phantom, &protocol, seed, x_idx)
            .map_err(|e| run_err(&format!("b-scan column {x_idx}"), e))
    })?;
    let scan = cdi_core::scan::BScan {
        x_positions_um: protocol.x_positions(),
        z_positions_um: protocol.z_positions(),
        image: columns.into_iter().flatten().collect(),
        meta: BScanMeta {
            seed,
            protocol,
            source_label: acquisition.source.label.clone(),
            detector_name: acquisition.detector.name.as_str().to_string(),
            phantom_name: phantom.name().to_string(),
        },
    };

    emit(
        out_dir,
        "bscan.csv",
        bscan_long_csv(&scan).as_bytes(),
        manifest,
        written,
    )?;
    // graymap: rows are depth, columns transverse position
    let (nx, nz) = (scan.x_positions_um.len(), scan.z_positions_um.len());
    let mut transposed = vec![0.0f64; nx * nz];
    for x_idx in 0..nx {
        for z_idx in 0..nz {
            transposed[z_idx * nx + x_idx] = scan.value(x_idx, z_idx);
        }
    }
    let pgm = crate::pgm::encode_p5_16(&transposed, nz, nx);
    emit(out_dir, "bscan.pgm", &pgm, manifest, written)?;
    let meta = bscan_meta_text(config, &scan);
    emit(out_dir, "bscan_meta.txt", meta.as_bytes(), manifest, written)
}

fn experiment_design(
    config: &RunConfig,
    material: &Option<Material>,
    out_dir: &Path,
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let material = material
        .as_ref()
        .ok_or_else(|| RunError("design needs a material".to_string()))?;
    let d = config.design.as_ref().expect("validated: design block present");
    let pump = cdi_core::qpm::PumpConfig::default();
    let objective = DesignObjective::new(d.target_center_nm, d.target_fwhm_nm, d.temperature_c);
    let bounds = DesignBounds {
        b1_um: (d.b1_min_um, d.b1_max_um),
        zeta_per_um: (d.zeta_min_per_um, d.zeta_max_per_um),
    };
    let options = DesignOptions {
        n_periods: d.n_periods,
        expansion: material.expansion,
        wavelength_grid_nm: (
            config.grid.wavelength_min_nm,
            config.grid.wavelength_max_nm,
            config.grid.wavelength_step_nm.max(1.0),
        ),
        ..DesignOptions::default()
    };
    let result = design_search(&material.dispersion, &pump, &objective, &bounds, &options)
        .map_err(|e| run_err("design search", e))?;
    let mut text = String::new();
    let _ = writeln!(text, "b1_um = {}", result.spec.b1_um());
    let _ = writeln!(text, "zeta_per_um = {}", result.spec.zeta_per_um());
    let _ = writeln!(text, "n_periods = {}", result.spec.n_periods());
    let _ = writeln!(text, "achieved_center_nm = {}", result.achieved_center_nm);
    let _ = writeln!(text, "achieved_fwhm_nm = {}", result.achieved_fwhm_nm);
    let _ = writeln!(text, "target_center_nm = {}", d.target_center_nm);
    let _ = writeln!(text, "target_fwhm_nm = {}", d.target_fwhm_nm);
    let _ = writeln!(text, "objective_value_nm2 = {}", result.objective_value);
    let _ = writeln!(text, "evaluations = {}", result.evaluations);
    manifest.note_resolved(
        "design",
        format!(
            "b1 = {} um, zeta = {} /um",
            result.spec.b1_um(),
            result.spec.zeta_per_um()
        ),
    );
    emit(out_dir, "design.txt", text.as_bytes(), manifest, written)
}

fn protocol_of(config: &RunConfig) -> Result<ScanProtocol, RunError> {
    let p = &config.protocol;
    ScanProtocol::new(p.z_range_um, p.z_step_um, p.dwell_s, p.x_range_um, p.x_step_um)
        .map_err(|e| run_err("protocol", e))
}

fn emit(
    out_dir: &Path,
    name: &str,
    bytes: &[u8],
    manifest: &mut RunManifest,
    written: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let path = out_dir.join(name);
    write_atomic(&path, bytes).map_err(|e| run_err(&format!("writing {name}"), e))?;
    manifest.record_artifact(&path, bytes);
    written.push(path);
    Ok(())
}

fn spectrum_csv(spectrum: &Spectrum, wavelengths_nm: Option<&[f64]>) -> String {
    let mut csv = String::from("wavelength_nm,density\n");
    // frequency grid ascends, so iterate backwards for ascending wavelength
    for i in (0..spectrum.len()).rev() {
        let nm = match wavelengths_nm {
            Some(grid) => grid[grid.len() - 1 - i],
            None => spectrum.wavelength_nm_at(i),
        };
        let _ = writeln!(csv, "{nm},{}", spectrum.density()[i]);
    }
    csv
}

fn interferogram_csv(ig: &Interferogram, env: Option<&EnvelopeResult>) -> String {
    let mut csv = String::from(match env {
        Some(_) => "displacement_um,value,envelope\n",
        None => "displacement_um,value\n",
    });
    for (i, (&x, &v)) in ig.displacement_um().iter().zip(ig.values()).enumerate() {
        match env {
            Some(e) => {
                let _ = writeln!(csv, "{x},{v},{}", e.envelope[i]);
            }
            None => {
                let _ = writeln!(csv, "{x},{v}");
            }
        }
    }
    csv
}

fn envelope_meta(
    config: &RunConfig,
    acquisition: &Acquisition,
    env: &EnvelopeResult,
    duration_s: f64,
    seed: u64,
) -> Result<String, RunError> {
    let mut text = String::new();
    let _ = writeln!(text, "tool_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "seed = {seed}");
    let _ = writeln!(text, "flux_scale = {}", config.flux_scale);
    let _ = writeln!(text, "duration_s = {duration_s}");
    let center = acquisition
        .detected_center_wavelength_nm()
        .map_err(|e| run_err("envelope meta", e))?;
    let _ = writeln!(text, "detected_center_nm = {center}");
    let _ = writeln!(text, "fwhm_main_um = {}", env.fwhm_main_um);
    for (i, peak) in env.peaks.iter().enumerate() {
        let _ = writeln!(
            text,
            "peak_{i} = position_um:{}, height:{}",
            peak.position_um, peak.height
        );
    }
    for (i, note) in env.notes.iter().enumerate() {
        let _ = writeln!(text, "note_{i} = {note}");
    }
    Ok(text)
}

fn bscan_long_csv(scan: &cdi_core::scan::BScan) -> String {
    let mut csv = String::from("x_um,z_um,value\n");
    for (x_idx, &x) in scan.x_positions_um.iter().enumerate() {
        for (z_idx, &z) in scan.z_positions_um.iter().enumerate() {
            let _ = writeln!(csv, "{x},{z},{}", scan.value(x_idx, z_idx));
        }
    }
    csv
}

fn bscan_meta_text(config: &RunConfig, scan: &cdi_core::scan::BScan) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "tool_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "seed = {}", scan.meta.seed);
    let _ = writeln!(text, "source = {}", scan.meta.source_label);
    let _ = writeln!(text, "detector = {}", scan.meta.detector_name);
    let _ = writeln!(text, "phantom = {}", scan.meta.phantom_name);
    let _ = writeln!(text, "flux_scale = {}", config.flux_scale);
    let p = &scan.meta.protocol;
    let _ = writeln!(text, "z_range_um = {}", p.z_range_um);
    let _ = writeln!(text, "z_step_um = {}", p.z_step_um);
    let _ = writeln!(text, "dwell_s = {}", p.dwell_s);
    let _ = writeln!(text, "x_range_um = {}", p.x_range_um);
    let _ = writeln!(text, "x_step_um = {}", p.x_step_um);
    let _ = writeln!(text, "columns = {}", scan.x_positions_um.len());
    let _ = writeln!(text, "rows = {}", scan.z_positions_um.len());
    text
}

/// Two-column numeric CSV (optional header line tolerated).
fn read_two_column_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (x, y) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
        match (x.trim().parse::<f64>(), y.trim().parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                a.push(x);
                b.push(y);
            }
            _ if idx == 0 => continue, // header
            _ => return Err(format!("line {}: expected two numbers", idx + 1)),
        }
    }
    if a.len() < 2 {
        return Err("need at least two data rows".to_string());
    }
    Ok((a, b))
}

/// Text for the `presets` subcommand.
pub fn presets_text() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gratings (N = 2515):");
    let _ = writeln!(out, "  unchirped  b1 = 7.95 um, zeta = 0");
    let _ = writeln!(out, "  medium     b1 = 7.85 um, zeta = 1.26e-6 /um");
    let _ = writeln!(out, "  max        b1 = 7.5 um,  zeta = 6.24e-6 /um");
    let _ = writeln!(out, "detectors:");
    let _ = writeln!(
        out,
        "  sspd   exponential QE (12% at 900 nm, 5% at 1200 nm), support 400-1600 nm, 10 cps dark"
    );
    let _ = writeln!(
        out,
        "  spad   40% below 1000 nm, linear to 0 at 1100 nm, 50 cps dark"
    );
    let _ = writeln!(out, "  ideal  unit QE, 200-3000 nm, no dark counts");
    let _ = writeln!(out, "sources:");
    let _ = writeln!(out, "  spdc             down-conversion from the configured grating");
    let _ = writeln!(out, "  gaussian         center_nm/fwhm_nm in [source]");
    let _ = writeln!(out, "  sld930           gaussian shorthand: 930 nm center, 70 nm fwhm");
    let _ = writeln!(out, "  tabulated        two-column CSV (wavelength_nm, density)");
    out
}
