//! Command-line front end.
//!
//! Every command computes its full output in memory before touching the
//! filesystem, and files are written through a temporary sibling that is
//! renamed into place, so a failing run leaves no partial CSV behind.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{load_config, load_config_file, RunConfig, FIG3A_PRESET, FIG4_PRESET, DEFAULTS_PRESET};
use crate::csvio::{
    peak_records, read_spectrum_records, records_to_series, spectrum_records, to_deg, to_khz, write_amplitude_trajectory,
    write_density_trajectory, write_peaks, write_records, CompareRecord, SpectrumRecord,
};
use crate::dynamics::{evolve_density, evolve_two_level, AmplitudePair};
use crate::error::{Error, Result};
use crate::scan::peaks::find_peaks_xy;
use crate::scan::recipes::{fig3a, fig4, fig5b, Series};
use crate::scan::{phase_scan, spectrum, Model};
use crate::spin::{pumped_initial_state, zeeman_splitting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "zeeman-cep", version, about = "Phase-controlled one-/three-photon rf excitation of a spin-1 Zeeman manifold")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (directory for `figure`); overrides the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Upper bound on worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Overrides the config's model.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "perturbative")]
    Perturbative,
    #[value(name = "two_level_ode")]
    TwoLevelOde,
    #[value(name = "three_level_dm")]
    ThreeLevelDm,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Perturbative => Model::Perturbative,
            ModelArg::TwoLevelOde => Model::TwoLevelOde,
            ModelArg::ThreeLevelDm => Model::ThreeLevelDm,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time trajectory at one splitting (three-level unless two_level_ode is selected).
    Simulate(OmegaArg),
    /// One spectrum per configured φ₂.
    Spectrum,
    /// Signal against φ₂ at fixed splitting.
    PhaseScan(PhaseScanArgs),
    /// Peaks of every spectrum in a spectrum CSV.
    Peaks {
        /// Spectrum CSV as written by `spectrum` or `figure`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Per-point relative difference between two models on the configured grid.
    Compare {
        #[arg(long, value_enum)]
        model_a: ModelArg,
        #[arg(long, value_enum)]
        model_b: ModelArg,
    },
    /// Canned figure reproduction; writes one CSV per family into `--out`.
    Figure {
        #[arg(value_enum)]
        which: FigureArg,
    },
}

#[derive(Debug, Args)]
struct OmegaArg {
    /// Zeeman splitting in kHz; defaults to the config's system splitting.
    #[arg(long)]
    omega_khz: Option<f64>,
}

#[derive(Debug, Args)]
struct PhaseScanArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Comma-separated φ₂ values in degrees; default 0, 5, …, 360.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phases_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig3a,
    Fig4,
    Fig5b,
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run_command<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_USAGE,
        _ if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn load(cli: &Cli, preset: &str) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(p) => load_config_file(p)?,
        None => load_config(preset)?,
    };
    Ok(match cli.model {
        Some(m) => cfg.with_model(m.into()),
        None => cfg,
    })
}

fn jobs(cli: &Cli) -> Option<usize> {
    cli.jobs.map(|j| j as usize)
}

fn khz(f: f64) -> Result<f64> {
    if f > 0.0 && f.is_finite() {
        Ok(TAU * 1e3 * f)
    } else {
        Err(Error::Domain(format!("--omega-khz must be positive, got {f}")))
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => {
            let cfg = load(cli, DEFAULTS_PRESET)?;
            let omega = match a.omega_khz {
                Some(f) => khz(f)?,
                None => zeeman_splitting(&cfg.system),
            };
            let mut buf = Vec::new();
            if cfg.grid.model == Model::TwoLevelOde {
                let tr = evolve_two_level(omega, &cfg.pulse, &cfg.integrator, &AmplitudePair::ground())?;
                write_amplitude_trajectory(&tr, &mut buf)?;
            } else {
                let sys = cfg.system.with_splitting(omega)?;
                let tr = evolve_density(&sys, &cfg.pulse, &cfg.integrator, &pumped_initial_state())?;
                write_density_trajectory(&tr, &mut buf)?;
            }
            emit(&buf, output(cli, &cfg).as_deref(), stdout)
        }
        Command::Spectrum => {
            let cfg = load(cli, DEFAULTS_PRESET)?;
            let spectra = spectrum(&cfg.grid, &cfg.pulse, &cfg.system, &cfg.integrator, jobs(cli))?;
            report_gaps(spectra.iter(), stderr);
            let mut buf = Vec::new();
            write_records(&spectrum_records(&spectra), &mut buf)?;
            emit(&buf, output(cli, &cfg).as_deref(), stdout)
        }
        Command::PhaseScan(a) => {
            let cfg = load(cli, DEFAULTS_PRESET)?;
            let omega = match a.omega.omega_khz {
                Some(f) => khz(f)?,
                None => zeeman_splitting(&cfg.system),
            };
            let phis_deg: Vec<f64> = match &a.phases_deg {
                Some(v) => v.clone(),
                None => (0..=72).map(|k| 5.0 * k as f64).collect(),
            };
            if phis_deg.iter().any(|d| !d.is_finite()) {
                return Err(Error::Domain("--phases-deg values must be finite".into()));
            }
            let phis: Vec<f64> = phis_deg.iter().map(|d| d.to_radians()).collect();
            let scan = phase_scan(&phis, omega, &cfg.pulse, &cfg.system, cfg.grid.model, &cfg.integrator, jobs(cli))?;
            let recs: Vec<SpectrumRecord> = scan
                .points
                .iter()
                .zip(&phis_deg)
                .map(|(&(_, v), &d)| SpectrumRecord {
                    omega_khz: to_khz(omega),
                    signal: v,
                    model: scan.model,
                    phi1_deg: cfg.document.pulse.phi1_deg,
                    phi2_deg: d,
                })
                .collect();
            if let Some(f) = scan.fit {
                let _ = writeln!(
                    stderr,
                    "fit: offset={:e} amplitude={:e} phi0_deg={} rms_residual={:e}",
                    f.offset,
                    f.amplitude,
                    f.phase.to_degrees().rem_euclid(360.0),
                    f.rms_residual
                );
            }
            let mut buf = Vec::new();
            write_records(&recs, &mut buf)?;
            emit(&buf, output(cli, &cfg).as_deref(), stdout)
        }
        Command::Peaks { input } => {
            let cfg = load(cli, DEFAULTS_PRESET)?;
            let file = std::fs::File::open(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let records = read_spectrum_records(file)?;
            let mut out = Vec::new();
            for (model, phi1, phi2, samples) in records_to_series(&records)? {
                let (x, y): (Vec<f64>, Vec<f64>) =
                    samples.iter().filter_map(|s| s.signal.map(|v| (s.omega, v))).unzip();
                let peaks = find_peaks_xy(&x, &y, cfg.peaks.min_height_frac, cfg.peaks.smooth_window)?;
                out.extend(peak_records(model, phi1, phi2, &peaks));
            }
            let mut buf = Vec::new();
            write_peaks(&out, &mut buf)?;
            emit(&buf, output(cli, &cfg).as_deref(), stdout)
        }
        Command::Compare { model_a, model_b } => {
            let cfg = load(cli, DEFAULTS_PRESET)?;
            let run_model = |m: Model| {
                let g = crate::scan::ScanGrid { model: m, ..cfg.grid.clone() };
                spectrum(&g, &cfg.pulse, &cfg.system, &cfg.integrator, jobs(cli))
            };
            let a = run_model((*model_a).into())?;
            let b = run_model((*model_b).into())?;
            report_gaps(a.iter().chain(&b), stderr);
            let mut recs = Vec::new();
            let mut max_diff: f64 = 0.0;
            for (sa, sb) in a.iter().zip(&b) {
                for (x, y) in sa.samples.iter().zip(&sb.samples) {
                    let (va, vb) = (x.signal.unwrap_or(f64::NAN), y.signal.unwrap_or(f64::NAN));
                    let d = rel_diff(va, vb);
                    if d.is_finite() {
                        max_diff = max_diff.max(d);
                    }
                    recs.push(CompareRecord {
                        omega_khz: to_khz(x.omega),
                        phi2_deg: to_deg(sa.phi2()),
                        signal_a: va,
                        signal_b: vb,
                        rel_diff: d,
                    });
                }
            }
            let mut buf = Vec::new();
            write_records(&recs, &mut buf)?;
            emit(&buf, output(cli, &cfg).as_deref(), stdout)?;
            let _ = writeln!(
                stderr,
                "max_rel_diff={max_diff:e} model_a={} model_b={} points={}",
                Model::from(*model_a),
                Model::from(*model_b),
                recs.len()
            );
            Ok(())
        }
        Command::Figure { which } => {
            let preset = match which {
                FigureArg::Fig3a => FIG3A_PRESET,
                FigureArg::Fig4 | FigureArg::Fig5b => FIG4_PRESET,
            };
            let cfg = load(cli, preset)?;
            let (name, family) = match which {
                FigureArg::Fig3a => ("fig3a", fig3a(&cfg.pulse, &cfg.system, &cfg.grid, &cfg.integrator, jobs(cli))?),
                FigureArg::Fig4 => ("fig4", fig4(&cfg.pulse, &cfg.system, &cfg.grid, &cfg.integrator, jobs(cli))?),
                FigureArg::Fig5b => ("fig5b", fig5b(&cfg.pulse, &cfg.system, &cfg.grid, &cfg.integrator, jobs(cli))?),
            };
            report_gaps(family.iter().map(|s| &s.spectrum), stderr);
            let dir = output(cli, &cfg).unwrap_or_else(|| PathBuf::from("."));
            write_family(name, &family, &dir, stderr)
        }
    }
}

fn output(cli: &Cli, cfg: &RunConfig) -> Option<PathBuf> {
    cli.out.clone().or_else(|| cfg.output.clone())
}

/// |a − b| / max(|a|, |b|), zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

fn report_gaps<'a>(spectra: impl Iterator<Item = &'a crate::scan::Spectrum>, stderr: &mut dyn Write) {
    for s in spectra {
        for (w, e) in &s.gaps {
            let _ = writeln!(stderr, "warning: no value at {} kHz: {e}", w / TAU / 1e3);
        }
    }
}

fn emit(buf: &[u8], path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, buf),
        None => {
            stdout.write_all(buf)?;
            Ok(())
        }
    }
}

/// Writes through `<path>.tmp` and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let res = std::fs::write(&tmp, data).and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// `fig3a` writes one file per series; phase families go into one file.
fn write_family(name: &str, family: &[Series], dir: &Path, stderr: &mut dyn Write) -> Result<()> {
    let files: Vec<(PathBuf, Vec<u8>)> = if name == "fig3a" {
        family
            .iter()
            .map(|s| {
                let mut buf = Vec::new();
                write_records(&spectrum_records(std::slice::from_ref(&s.spectrum)), &mut buf)?;
                Ok((dir.join(format!("{name}_{}.csv", s.label)), buf))
            })
            .collect::<Result<_>>()?
    } else {
        let spectra: Vec<_> = family.iter().map(|s| s.spectrum.clone()).collect();
        let mut buf = Vec::new();
        write_records(&spectrum_records(&spectra), &mut buf)?;
        vec![(dir.join(format!("{name}.csv")), buf)]
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (path, buf) in &files {
        if let Err(e) = write_atomic(path, buf) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path.clone());
    }
    for p in &written {
        let _ = writeln!(stderr, "wrote {}", p.display());
    }
    Ok(())
}
