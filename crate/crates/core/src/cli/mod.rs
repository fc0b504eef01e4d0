//! Command-line front end.
//!
//! Every subcommand reads its inputs, runs one library stage, writes its
//! outputs atomically (temp file + rename) and prints a one-line summary to
//! standard output. `pipeline` chains the same stage functions, so its result
//! is byte-identical to running the subcommands by hand.
//!
//! Exit codes: 0 success, 1 domain or I/O error, 2 usage or input-format error.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::debloom::{apply_debloom, detect_pseudo_light, fit_bloom_model, BloomModel, PseudoPixelPolicy};
use crate::desat::{
    apply_desaturation, detect_saturated, fit_saturation_model, select_saturation_samples, LogModel,
    SampleSelectionPolicy,
};
use crate::econ::{
    evaluate, fit_gdp_model, index_to_base, predict_gdp, read_series_csv, write_series_csv,
    AnnualSeries, EvaluationReport, GdpModel, GdpModelFile,
};
use crate::error::Error;
use crate::intercal::{apply_intercalibration, fit_intercalibration_detailed, PowerModel};
use crate::raster::{
    extract_pairs, mean_of_lights, read_grid, read_mask, sum_of_lights, write_grid, write_mask, Grid,
    PixelMask,
};
use crate::synth::SynthDocument;

use config::{LightStatistic, PipelineConfig};
use svg::ScatterPlot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ntlkit", version, about = "Nighttime-light correction and sum-of-lights regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit and apply power-law intercalibration over an invariant-region mask.
    Intercalibrate(IntercalibrateArgs),
    /// Replace saturated cells using a log model of radiance-calibrated data.
    Desaturate(DesaturateArgs),
    /// Fit the blooming response on pseudo light pixels and subtract it.
    Debloom(DebloomArgs),
    /// Print the sum (or mean) of lights of a grid.
    Sol(SolArgs),
    /// Regress GDP on an annual light statistic.
    Regress(RegressArgs),
    /// Predict GDP from a saved model.
    Predict(PredictArgs),
    /// Divide a series by its base-year value.
    Index(IndexArgs),
    /// Render a synthetic scene.
    Synth(SynthArgs),
    /// Run the configured correction chain end to end.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IntercalibrateArgs {
    #[arg(long)]
    pub pending: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the fitted `{"a","b"}` model here.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesaturateArgs {
    #[arg(long)]
    pub ntl: PathBuf,
    #[arg(long)]
    pub radiance: PathBuf,
    #[arg(long, default_value_t = crate::desat::SATURATION_DN)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.9)]
    pub quantile: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub min_radiance: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DebloomArgs {
    #[arg(long)]
    pub grid: PathBuf,
    /// Moving-window Chebyshev radius in pixels (5 is a reasonable start).
    #[arg(long)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.0)]
    pub background_max: f64,
    #[arg(long, default_value_t = 10.0)]
    pub pseudo_max: f64,
    #[arg(long, default_value_t = 5)]
    pub min_bg_neighbors: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Write the detected pseudo light pixels as a 0/1 mask.
    #[arg(long)]
    pub pseudo_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LightStatistic::Sum)]
    pub statistic: LightStatistic,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub lights: PathBuf,
    #[arg(long)]
    pub gdp: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Fit on years up to this one and score the later years.
    #[arg(long)]
    pub train_until: Option<i32>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub light: f64,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub base_year: i32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides `bloom.radius`.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Overrides `saturation.quantile`.
    #[arg(long)]
    pub quantile: Option<f64>,
    /// Overrides `saturation.threshold`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Overrides `lights_statistic`.
    #[arg(long, value_enum)]
    pub statistic: Option<LightStatistic>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_parse() => EXIT_USAGE,
            Error::InvalidParameter { .. } => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

/// Runs a parsed command and returns its summary line.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Intercalibrate(a) => cmd_intercalibrate(a),
        Command::Desaturate(a) => cmd_desaturate(a),
        Command::Debloom(a) => cmd_debloom(a),
        Command::Sol(a) => cmd_sol(a),
        Command::Regress(a) => cmd_regress(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Index(a) => cmd_index(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

// ---------------------------------------------------------------- file I/O

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn load_grid(path: &Path) -> CliResult<Grid<f64>> {
    read_grid(&read_text(path)?).map_err(|e| with_path(e, path))
}

fn load_mask(path: &Path) -> CliResult<PixelMask> {
    read_mask(&read_text(path)?).map_err(|e| with_path(e, path))
}

fn load_series(path: &Path) -> CliResult<AnnualSeries<f64>> {
    read_series_csv(&read_text(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

/// Writes through a temp file in the destination directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io_err = |source: std::io::Error| -> CliError {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    write_atomic(path, &json_bytes(value))
}

fn log_run(what: &str, outputs: &[&Path]) {
    let list: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
    eprintln!("ntlkit {} {}: wrote {}", env!("CARGO_PKG_VERSION"), what, list.join(", "));
}

// ---------------------------------------------------------------- stages

/// Intercalibration stage shared by `intercalibrate` and `pipeline`.
pub struct IntercalibrationOutput {
    pub grid: Grid<f64>,
    pub model: PowerModel<f64>,
    pub r2: f64,
    pub n: usize,
}

pub fn stage_intercalibrate(
    pending: &Grid<f64>,
    reference: &Grid<f64>,
    mask: &PixelMask,
) -> CliResult<IntercalibrationOutput> {
    let pairs = extract_pairs(pending, reference, mask)?;
    let fit = fit_intercalibration_detailed(&pairs)?;
    let grid = apply_intercalibration(pending, &fit.model)?;
    Ok(IntercalibrationOutput {
        grid,
        model: fit.model,
        r2: fit.log_fit.r2,
        n: fit.log_fit.n,
    })
}

pub struct DesaturationOutput {
    pub grid: Grid<f64>,
    pub model: LogModel<f64>,
    pub saturated: usize,
    pub samples: usize,
}

pub fn stage_desaturate(
    ntl: &Grid<f64>,
    radiance: &Grid<f64>,
    threshold: f64,
    policy: &SampleSelectionPolicy<f64>,
) -> CliResult<DesaturationOutput> {
    let sat = detect_saturated(ntl, threshold);
    let samples = select_saturation_samples(ntl, radiance, &sat, policy)?;
    let model = fit_saturation_model(&samples)?;
    let grid = apply_desaturation(ntl, radiance, &sat, &model)?;
    Ok(DesaturationOutput {
        grid,
        model,
        saturated: sat.count(),
        samples: samples.len(),
    })
}

pub struct DebloomOutput {
    pub grid: Grid<f64>,
    pub model: BloomModel<f64>,
    pub pseudo: PixelMask,
}

pub fn stage_debloom(
    grid: &Grid<f64>,
    policy: &PseudoPixelPolicy<f64>,
    radius: usize,
) -> CliResult<DebloomOutput> {
    let pseudo = detect_pseudo_light(grid, policy)?;
    let model = fit_bloom_model(grid, &pseudo, radius, policy.pseudo_max_dn)?;
    let out = apply_debloom(grid, &model)?;
    Ok(DebloomOutput {
        grid: out,
        model,
        pseudo,
    })
}

pub fn light_statistic(grid: &Grid<f64>, mask: Option<&PixelMask>, stat: LightStatistic) -> CliResult<f64> {
    Ok(match stat {
        LightStatistic::Sum => sum_of_lights(grid, mask)?,
        LightStatistic::Mean => mean_of_lights(grid, mask)?,
    })
}

/// Fits on years `<= train_until` (all when `None`) and scores the later
/// aligned years, or the training years when nothing is held out.
pub fn regression_report(
    lights: &AnnualSeries<f64>,
    gdp: &AnnualSeries<f64>,
    train_until: Option<i32>,
) -> CliResult<(GdpModel<f64>, EvaluationReport<f64>)> {
    let (train, held_out) = match train_until {
        Some(y) => (lights.until(y), lights.after(y)),
        None => (lights.clone(), AnnualSeries::new()),
    };
    let model = fit_gdp_model(&train, gdp)?;
    let scored = if held_out.years().any(|y| gdp.get(y).is_some()) {
        held_out
    } else {
        train
    };
    let report = evaluate(&model, &scored, gdp)?;
    Ok((model, report))
}

fn regression_svg(lights: &AnnualSeries<f64>, gdp: &AnnualSeries<f64>, model: &GdpModel<f64>) -> CliResult<String> {
    let points: Vec<(f64, f64)> = crate::econ::align(lights, gdp)?
        .into_iter()
        .map(|(_, l, g)| (l, g))
        .collect();
    Ok(ScatterPlot {
        title: "GDP vs light intensity",
        x_label: "light statistic",
        y_label: "GDP",
        points: &points,
        line: Some((model.beta0(), model.beta1())),
    }
    .render())
}

// ---------------------------------------------------------------- commands

fn cmd_intercalibrate(a: &IntercalibrateArgs) -> CliResult<String> {
    let pending = load_grid(&a.pending)?;
    let reference = load_grid(&a.reference)?;
    let mask = load_mask(&a.mask)?;
    let out = stage_intercalibrate(&pending, &reference, &mask)?;
    write_atomic(&a.out, write_grid(&out.grid).as_bytes())?;
    if let Some(p) = &a.model_out {
        write_json(p, &out.model)?;
    }
    log_run("intercalibrate", &[&a.out]);
    Ok(format!(
        "intercalibration: a={} b={} r2={} pairs={}",
        out.model.a, out.model.b, out.r2, out.n
    ))
}

fn cmd_desaturate(a: &DesaturateArgs) -> CliResult<String> {
    let ntl = load_grid(&a.ntl)?;
    let radiance = load_grid(&a.radiance)?;
    let policy = SampleSelectionPolicy {
        max_abs_diff_quantile: a.quantile,
        min_radiance: a.min_radiance,
    };
    let out = stage_desaturate(&ntl, &radiance, a.threshold, &policy)?;
    write_atomic(&a.out, write_grid(&out.grid).as_bytes())?;
    if let Some(p) = &a.model_out {
        write_json(p, &out.model)?;
    }
    log_run("desaturate", &[&a.out]);
    Ok(format!(
        "desaturation: a={} b={} samples={} saturated={}",
        out.model.a, out.model.b, out.samples, out.saturated
    ))
}

fn cmd_debloom(a: &DebloomArgs) -> CliResult<String> {
    let grid = load_grid(&a.grid)?;
    let policy = PseudoPixelPolicy {
        background_max: a.background_max,
        pseudo_max_dn: a.pseudo_max,
        min_background_neighbors: a.min_bg_neighbors,
    };
    let out = stage_debloom(&grid, &policy, a.radius)?;
    write_atomic(&a.out, write_grid(&out.grid).as_bytes())?;
    if let Some(p) = &a.model_out {
        write_json(p, &out.model)?;
    }
    if let Some(p) = &a.pseudo_out {
        write_atomic(p, write_mask(&out.pseudo).as_bytes())?;
    }
    log_run("debloom", &[&a.out]);
    Ok(format!(
        "deblooming: a={} b={} radius={} pseudo={}",
        out.model.a,
        out.model.b,
        out.model.radius,
        out.pseudo.count()
    ))
}

fn cmd_sol(a: &SolArgs) -> CliResult<String> {
    let grid = load_grid(&a.grid)?;
    let mask = a.mask.as_deref().map(load_mask).transpose()?;
    Ok(light_statistic(&grid, mask.as_ref(), a.statistic)?.to_string())
}

fn cmd_regress(a: &RegressArgs) -> CliResult<String> {
    let lights = load_series(&a.lights)?;
    let gdp = load_series(&a.gdp)?;
    let (model, report) = regression_report(&lights, &gdp, a.train_until)?;
    write_atomic(&a.out, report.to_csv().as_bytes())?;
    if let Some(p) = &a.model_out {
        write_json(p, &model.to_file())?;
    }
    if let Some(p) = &a.svg {
        write_atomic(p, regression_svg(&lights, &gdp, &model)?.as_bytes())?;
    }
    log_run("regress", &[&a.out]);
    Ok(format!(
        "regression: beta0={} beta1={} r2={} mse={} years={}",
        model.beta0(),
        model.beta1(),
        model.r2(),
        report.mse,
        model.training_years.len()
    ))
}

fn cmd_predict(a: &PredictArgs) -> CliResult<String> {
    if !a.light.is_finite() {
        return Err(CliError::usage("--light must be finite"));
    }
    let file: GdpModelFile<f64> = serde_json::from_str(&read_text(&a.model)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.model.display())))?;
    let model = GdpModel::from(file);
    Ok(predict_gdp(&model, a.light).to_string())
}

fn cmd_index(a: &IndexArgs) -> CliResult<String> {
    let series = load_series(&a.series)?;
    let indexed = index_to_base(&series, a.base_year)?;
    write_atomic(&a.out, write_series_csv(&indexed).as_bytes())?;
    log_run("index", &[&a.out]);
    Ok(format!("index: base_year={} years={}", a.base_year, indexed.len()))
}

fn load_synth(path: &Path) -> CliResult<SynthDocument> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_synth(a: &SynthArgs) -> CliResult<String> {
    let doc = load_synth(&a.spec)?;
    let grid: Grid<f64> = doc.render()?;
    write_atomic(&a.out, write_grid(&grid).as_bytes())?;
    log_run("synth", &[&a.out]);
    Ok(format!(
        "synth: {}x{} sources={} sum={}",
        grid.ncols(),
        grid.nrows(),
        doc.scene.sources.len(),
        sum_of_lights(&grid, None)?
    ))
}

#[derive(Debug, Default, Serialize)]
struct PipelineSummary {
    intercalibration: Option<PowerModel<f64>>,
    saturation: Option<LogModel<f64>>,
    bloom: Option<BloomModel<f64>>,
    lights_statistic: LightStatistic,
    light_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gdp_model: Option<GdpModelFile<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse: Option<f64>,
}

fn load_config(a: &PipelineArgs) -> CliResult<PipelineConfig> {
    let mut cfg = PipelineConfig::from_json(&read_text(&a.config)?)
        .map_err(|m| CliError::usage(format!("{}: {m}", a.config.display())))?;
    let base = a
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    // Flag paths are relative to the working directory, not the config.
    if let Some(d) = &a.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(r) = a.radius {
        cfg.bloom
            .as_mut()
            .ok_or_else(|| CliError::usage("--radius given but config has no bloom section"))?
            .radius = r;
    }
    if let Some(q) = a.quantile {
        cfg.saturation
            .as_mut()
            .ok_or_else(|| CliError::usage("--quantile given but config has no saturation section"))?
            .quantile = q;
    }
    if let Some(t) = a.threshold {
        cfg.saturation
            .as_mut()
            .ok_or_else(|| CliError::usage("--threshold given but config has no saturation section"))?
            .threshold = t;
    }
    if let Some(s) = a.statistic {
        cfg.lights_statistic = s;
    }
    cfg.validate().map_err(CliError::usage)?;
    Ok(cfg)
}

fn cmd_pipeline(a: &PipelineArgs) -> CliResult<String> {
    let cfg = load_config(a)?;
    let out_dir = &cfg.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|source| {
        CliError::from(Error::Io {
            path: out_dir.clone(),
            source,
        })
    })?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut emit = |name: &str, contents: &[u8]| -> CliResult<()> {
        let p = out_dir.join(name);
        write_atomic(&p, contents)?;
        written.push(p);
        Ok(())
    };

    let mut grid = match (&cfg.pending, &cfg.synth) {
        (Some(p), _) => load_grid(p)?,
        (None, Some(doc)) => {
            let text = write_grid(&doc.render::<f64>()?);
            emit("input.asc", text.as_bytes())?;
            read_grid(&text)?
        }
        (None, None) => unreachable!("validated"),
    };

    let mut summary = PipelineSummary {
        lights_statistic: cfg.lights_statistic,
        ..Default::default()
    };
    let mut stages: Vec<String> = Vec::new();

    if let Some(s) = cfg.intercalibration.as_ref().filter(|s| s.enabled) {
        let reference = load_grid(&s.reference)?;
        let mask = load_mask(&s.mask)?;
        let out = stage_intercalibrate(&grid, &reference, &mask)?;
        let text = write_grid(&out.grid);
        emit("intercalibrated.asc", text.as_bytes())?;
        emit("intercalibration_model.json", json_bytes(&out.model).as_slice())?;
        stages.push(format!("intercalibration a={} b={}", out.model.a, out.model.b));
        summary.intercalibration = Some(out.model);
        grid = read_grid(&text)?;
    }

    if let Some(s) = cfg.saturation.as_ref().filter(|s| s.enabled) {
        let radiance = load_grid(&s.radiance)?;
        let policy = SampleSelectionPolicy {
            max_abs_diff_quantile: s.quantile,
            min_radiance: s.min_radiance,
        };
        let out = stage_desaturate(&grid, &radiance, s.threshold, &policy)?;
        let text = write_grid(&out.grid);
        emit("desaturated.asc", text.as_bytes())?;
        emit("saturation_model.json", json_bytes(&out.model).as_slice())?;
        stages.push(format!("saturation a={} b={}", out.model.a, out.model.b));
        summary.saturation = Some(out.model);
        grid = read_grid(&text)?;
    }

    if let Some(s) = cfg.bloom.as_ref().filter(|s| s.enabled) {
        let policy = PseudoPixelPolicy {
            background_max: s.background_max,
            pseudo_max_dn: s.pseudo_max,
            min_background_neighbors: s.min_bg_neighbors,
        };
        let out = stage_debloom(&grid, &policy, s.radius)?;
        let text = write_grid(&out.grid);
        emit("debloomed.asc", text.as_bytes())?;
        emit("pseudo_mask.asc", write_mask(&out.pseudo).as_bytes())?;
        emit("bloom_model.json", json_bytes(&out.model).as_slice())?;
        stages.push(format!(
            "bloom a={} b={} pseudo={}",
            out.model.a,
            out.model.b,
            out.pseudo.count()
        ));
        summary.bloom = Some(out.model);
        grid = read_grid(&text)?;
    }

    emit("corrected.asc", write_grid(&grid).as_bytes())?;
    let lights_mask = cfg.lights_mask.as_deref().map(load_mask).transpose()?;
    summary.light_value = light_statistic(&grid, lights_mask.as_ref(), cfg.lights_statistic)?;

    if let Some(e) = &cfg.econometrics {
        let mut lights = match &e.lights {
            Some(p) => load_series(p)?,
            None => AnnualSeries::new(),
        };
        if let Some(year) = e.year {
            if lights.get(year).is_some() {
                return Err(CliError::usage(format!(
                    "econometrics.year {year} already present in the lights series"
                )));
            }
            lights.insert(year, summary.light_value)?;
        }
        let gdp = load_series(&e.gdp)?;
        let (model, report) = regression_report(&lights, &gdp, e.train_until)?;
        emit("regression_report.csv", report.to_csv().as_bytes())?;
        emit("gdp_model.json", json_bytes(&model.to_file()).as_slice())?;
        if e.svg {
            emit("regression.svg", regression_svg(&lights, &gdp, &model)?.as_bytes())?;
        }
        if let Some(base) = e.base_year {
            emit("lights_indexed.csv", write_series_csv(&index_to_base(&lights, base)?).as_bytes())?;
            emit("gdp_indexed.csv", write_series_csv(&index_to_base(&gdp, base)?).as_bytes())?;
        }
        stages.push(format!("gdp beta0={} beta1={} mse={}", model.beta0(), model.beta1(), report.mse));
        summary.gdp_model = Some(model.to_file());
        summary.mse = Some(report.mse);
    }

    emit("summary.json", json_bytes(&summary).as_slice())?;
    let refs: Vec<&Path> = written.iter().map(PathBuf::as_path).collect();
    log_run("pipeline", &refs);

    let stat_name = match cfg.lights_statistic {
        LightStatistic::Sum => "sum_of_lights",
        LightStatistic::Mean => "mean_light",
    };
    stages.push(format!("{stat_name}={}", summary.light_value));
    Ok(format!("pipeline: {}", stages.join("; ")))
}

fn json_bytes<S: Serialize>(value: &S) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("models serialize");
    text.push('\n');
    text.into_bytes()
}
