//! Argument parsing and dispatch for the `recolour` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use recolour::batch::{edit_batch, read_manifest, BatchOptions};
use recolour::io::{load_image, load_json, save_image, save_json, OutputFormat};
use recolour::{apply_model, edit_primary_colour, EditReport, EditRequest, RgbColor};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "recolour", version, about = "Replace the primary colour of product images")]
struct Cli {
    /// Log per-stage details to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recolour one image.
    Edit {
        input: PathBuf,
        /// Target primary colour as #RRGGBB.
        #[arg(long, value_parser = parse_hex)]
        target: String,
        /// Output image; defaults to <input>_recoloured.png (or .jpg for JPEG input).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the JSON edit report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        flags: EditFlags,
    },
    /// Recolour every row of a CSV manifest with header `input,target,output`.
    Batch {
        manifest: PathBuf,
        /// Directory for per-entry JSON reports.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        flags: EditFlags,
    },
    /// Re-apply the model stored in an edit report.
    Apply {
        input: PathBuf,
        /// Report written by a previous `edit --report`.
        #[arg(long)]
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Args)]
struct EditFlags {
    /// Run the gradient-preserving clean-up pass.
    #[arg(long)]
    regrain: bool,
    /// Upper bound on the number of palette colours.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    max_clusters: u32,
    /// Side of the square thumbnail used for parameter estimation.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(8..))]
    thumbnail: u32,
    /// Minimum a*b* chroma for a palette colour to count as the primary.
    #[arg(long, default_value_t = 10.0)]
    chroma_floor: f64,
}

fn parse_hex(s: &str) -> Result<String, String> {
    let valid = s.len() == 7 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_hexdigit());
    if valid {
        Ok(s.to_ascii_uppercase())
    } else {
        Err(format!("'{s}' is not a colour of the form #RRGGBB"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Batch,
    Apply,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub target_hex: Option<String>,
    pub manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub regrain: bool,
    pub max_clusters: usize,
    pub thumbnail: usize,
    pub chroma_floor: f64,
    pub report: Option<PathBuf>,
    pub jobs: usize,
    pub verbose: bool,
}

impl CliConfig {
    fn empty(mode: Mode, verbose: bool) -> Self {
        Self {
            mode,
            input: None,
            output: None,
            target_hex: None,
            manifest: None,
            model: None,
            regrain: false,
            max_clusters: 5,
            thumbnail: 32,
            chroma_floor: 10.0,
            report: None,
            jobs: 0,
            verbose,
        }
    }

    fn with_flags(mut self, flags: EditFlags) -> Self {
        self.regrain = flags.regrain;
        self.max_clusters = flags.max_clusters as usize;
        self.thumbnail = flags.thumbnail as usize;
        self.chroma_floor = flags.chroma_floor;
        self
    }

    /// Edit request for the given target; every other field comes from the flags.
    pub fn request(&self, target: RgbColor) -> EditRequest {
        let mut req = EditRequest::new(target);
        req.enable_regrain = self.regrain;
        req.max_clusters = self.max_clusters;
        req.thumbnail_size = self.thumbnail;
        req.chroma_floor = self.chroma_floor;
        req
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Help or version output requested; not a failure.
    Info(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Info(s) | CliError::Usage(s) => s,
        }
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} '{}' does not exist", path.display())))
    }
}

pub fn parse_args<I, S>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let text = e.render().to_string();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(text),
            _ => CliError::Usage(text),
        }
    })?;

    let config = match cli.command {
        Command::Edit {
            input,
            target,
            output,
            report,
            flags,
        } => {
            require_file(&input, "input")?;
            let mut c = CliConfig::empty(Mode::Single, cli.verbose).with_flags(flags);
            c.output = Some(output.unwrap_or_else(|| default_output(&input)));
            c.input = Some(input);
            c.target_hex = Some(target);
            c.report = report;
            c
        }
        Command::Batch {
            manifest,
            report,
            jobs,
            flags,
        } => {
            require_file(&manifest, "manifest")?;
            let mut c = CliConfig::empty(Mode::Batch, cli.verbose).with_flags(flags);
            c.manifest = Some(manifest);
            c.report = report;
            c.jobs = jobs;
            c
        }
        Command::Apply { input, model, output } => {
            require_file(&input, "input")?;
            require_file(&model, "model")?;
            let mut c = CliConfig::empty(Mode::Apply, cli.verbose);
            c.input = Some(input);
            c.model = Some(model);
            c.output = Some(output);
            c
        }
    };
    Ok(config)
}

/// `<dir>/<stem>_recoloured.png`, or `.jpg` when the input is a JPEG.
pub fn default_output(input: &Path) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    let ext = match OutputFormat::for_path(input) {
        OutputFormat::Jpeg => "jpg",
        OutputFormat::Png => "png",
    };
    input.with_file_name(format!("{stem}_recoloured.{ext}"))
}

fn run_single(config: &CliConfig) -> recolour::Result<()> {
    let input = config.input.as_deref().expect("validated");
    let output = config.output.as_deref().expect("validated");
    let hex = config.target_hex.as_deref().expect("validated");
    let target = RgbColor::from_hex(hex).ok_or_else(|| recolour::Error::InvalidHex(hex.to_string()))?;

    let img = load_image::<f64>(input)?;
    let (out, report) = edit_primary_colour(&img, &config.request(target))?;
    save_image(output, &out)?;
    if let Some(path) = &config.report {
        save_json(path, &report)?;
    }
    log::info!(
        "{} -> {}: primary {} of {}, ΔE_max {}, {:.0} ms",
        input.display(),
        output.display(),
        report.primary_index,
        report.palette.len(),
        report.model.delta_e_max,
        report.timings.total_ms
    );
    Ok(())
}

fn run_apply(config: &CliConfig) -> recolour::Result<()> {
    let input = config.input.as_deref().expect("validated");
    let report: EditReport = load_json(config.model.as_deref().expect("validated"))?;
    let img = load_image::<f64>(input)?;
    let out = apply_model(&img, &report.model, report.regrain.as_ref())?;
    save_image(config.output.as_deref().expect("validated"), &out)
}

fn run_batch(config: &CliConfig) -> recolour::Result<bool> {
    let entries = read_manifest(config.manifest.as_deref().expect("validated"))?;
    if let Some(dir) = &config.report {
        std::fs::create_dir_all(dir).map_err(|source| recolour::Error::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let options = BatchOptions {
        // The target is replaced per entry.
        request: config.request(RgbColor::default()),
        jobs: config.jobs,
        report_dir: config.report.clone(),
    };
    let records = edit_batch(&entries, &options)?;
    let mut failures = 0;
    for record in &records {
        if let Err(e) = &record.outcome {
            failures += 1;
            eprintln!("error: {}: {e}", record.entry.input.display());
        }
    }
    log::info!("{} of {} entries succeeded", records.len() - failures, records.len());
    Ok(failures == 0)
}

pub fn run(config: &CliConfig) -> i32 {
    let result = match config.mode {
        Mode::Single => run_single(config).map(|()| true),
        Mode::Apply => run_apply(config).map(|()| true),
        Mode::Batch => run_batch(config),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
