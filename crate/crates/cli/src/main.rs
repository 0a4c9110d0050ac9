use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use pmet::config::{build_system, read_record, to_record, ConfigRecord};
use pmet::fock::{overlap_matrix, DisplacementParam};
use pmet::harness::{
    config_hash, emit_to, run_sweep, validate_suite, with_workers, write_marcus_csv, write_overlap_csv,
    write_rate_csv, write_sidecar, write_sweep_csv, RunMetadata, SweepOptions, SweepSpec,
};
use pmet::marcus::marcus_from_spec;
use pmet::{pmet_rate, CavityMode, PathwayMode, PmetError, PolePolicy, RateOptions, Result, SystemSpec};

#[derive(Parser)]
#[command(name = "pmet", version, about = "Polariton-mediated electron-transfer rates for donor-bridge-acceptor systems")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cavity-free superexchange rate as a single CSV row.
    Marcus(Common),
    /// Cavity rate: a summary row followed by one row per photon channel.
    Rate(RateArgs),
    /// Rates along the axis given in the config.
    Sweep(RateArgs),
    /// Displacement-operator matrix in the Fock basis.
    Overlap(OverlapArgs),
    /// Oracle and reduction self-checks; exits nonzero if any fails.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// JSON system description.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when omitted. A `<out>.meta.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Resonant,
    Offres,
}

impl From<ModeArg> for CavityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Resonant => CavityMode::Resonant,
            ModeArg::Offres => CavityMode::OffResonant,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PathwayArg {
    Total,
    Direct,
    Bridge,
}

impl From<PathwayArg> for PathwayMode {
    fn from(p: PathwayArg) -> Self {
        match p {
            PathwayArg::Total => PathwayMode::Total,
            PathwayArg::Direct => PathwayMode::DirectOnly,
            PathwayArg::Bridge => PathwayMode::BridgeOnly,
        }
    }
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    common: Common,
    /// Expected cavity regime; the config must agree.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Amplitude entering the rate; overrides the config's `pathway`.
    #[arg(long, value_enum)]
    pathway: Option<PathwayArg>,
    /// Drop channels that sit on a photon-shifted resonance instead of failing.
    #[arg(long)]
    skip_poles: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Db,
    Ba,
    Da,
}

#[derive(Args)]
struct OverlapArgs {
    /// Displacement `d`; alternative to --config/--which.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["config", "which"])]
    d: Option<f64>,
    /// Take the displacement from this system.
    #[arg(long, requires = "which")]
    config: Option<PathBuf>,
    /// Which overlap of the configured system.
    #[arg(long, value_enum)]
    which: Option<Which>,
    /// Matrix dimension.
    #[arg(long, default_value_t = 10)]
    size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Also check the cavity-free reduction of this system.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(path: &Path) -> Result<(ConfigRecord, SystemSpec)> {
    let rec = read_record(path)?;
    let spec = build_system(&rec)?;
    Ok((rec, spec))
}

fn check_mode(spec: &SystemSpec, mode: Option<ModeArg>) -> Result<()> {
    match mode {
        Some(m) => spec
            .require_mode(m.into())
            .map_err(|e| PmetError::config("mode", e.to_string())),
        None => Ok(()),
    }
}

fn sidecar(out: Option<&Path>, metadata: &RunMetadata) -> Result<()> {
    if let Some(path) = out {
        let meta = write_sidecar(path, metadata)?;
        info!("wrote {} and {}", path.display(), meta.display());
    }
    Ok(())
}

fn record_hash(spec: &SystemSpec, extra: &[(&str, &str)]) -> String {
    let mut rec = to_record(spec);
    for (k, v) in extra {
        rec.insert((*k).into(), (*v).into());
    }
    config_hash(&rec)
}

fn cmd_marcus(args: Common) -> Result<()> {
    let (_, spec) = load(&args.config)?;
    let result = marcus_from_spec(&spec)?;
    emit_to(args.out.as_deref(), |w| write_marcus_csv(&result, w))?;
    sidecar(args.out.as_deref(), &RunMetadata::new("marcus", record_hash(&spec, &[])))
}

fn pole_policy(skip: bool) -> PolePolicy {
    if skip {
        PolePolicy::Skip
    } else {
        PolePolicy::Abort
    }
}

fn cmd_rate(args: RateArgs) -> Result<()> {
    let (rec, spec) = load(&args.common.config)?;
    check_mode(&spec, args.mode)?;
    let pathway = match (args.pathway, rec.get("pathway").and_then(|v| v.as_str())) {
        (Some(p), _) => p.into(),
        (None, Some(s)) => s.parse()?,
        (None, None) => PathwayMode::Total,
    };
    let opts = RateOptions { pathway, poles: pole_policy(args.skip_poles) };
    let result = with_workers(args.workers, || pmet_rate(&spec, opts))??;
    if result.skipped_poles > 0 {
        warn!("{} channels excluded at resonance poles", result.skipped_poles);
    }
    info!("rate {:e} s^-1 at {}", result.total_rate, result.truncation_used);
    let out = args.common.out.as_deref();
    emit_to(out, |w| write_rate_csv(&result, w))?;
    sidecar(out, &RunMetadata::new("rate", record_hash(&spec, &[("pathway", pathway.as_str())])))
}

fn cmd_sweep(args: RateArgs) -> Result<()> {
    let rec = read_record(&args.common.config)?;
    let mut sweep = SweepSpec::from_record(&rec)?;
    check_mode(&sweep.base, args.mode)?;
    if let Some(p) = args.pathway {
        sweep.pathway = p.into();
    }
    let opts = SweepOptions { poles: pole_policy(args.skip_poles), workers: args.workers };
    let result = run_sweep(&sweep, opts)?;
    let out = args.common.out.as_deref();
    emit_to(out, |w| write_sweep_csv(&result, w))?;
    sidecar(out, &result.metadata)
}

fn cmd_overlap(args: OverlapArgs) -> Result<()> {
    let d = match (args.d, &args.config, args.which) {
        (Some(d), _, _) => DisplacementParam::new(d)?,
        (None, Some(path), Some(which)) => {
            let (_, spec) = load(path)?;
            let all = spec.displacements()?;
            match which {
                Which::Db => all.db,
                Which::Ba => all.ba,
                Which::Da => all.da,
            }
        }
        _ => return Err(PmetError::config("d", "give either --d or --config with --which")),
    };
    let matrix = overlap_matrix(d, args.size)?;
    emit_to(args.out.as_deref(), |w| write_overlap_csv(&matrix, w))?;
    let hash = config_hash(&[("d".to_string(), d.value().into()), ("size".to_string(), args.size.into())]
        .into_iter()
        .collect());
    sidecar(args.out.as_deref(), &RunMetadata::new("overlap", hash))
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let spec = match &args.config {
        Some(path) => Some(load(path)?.1),
        None => None,
    };
    let outcomes = validate_suite(spec.as_ref());
    let mut ok = true;
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        ok &= o.passed;
    }
    println!("{} of {} checks passed", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Marcus(a) => cmd_marcus(a).map(|_| true),
        Command::Rate(a) => cmd_rate(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Overlap(a) => cmd_overlap(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
