use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uvnlos::scenario::{self, RunConfig, RunOutput};
use uvnlos::{Error, Execution};

/// NLOS ultraviolet link model under cascaded Gamma-Gamma turbulence.
#[derive(Parser, Debug)]
#[command(name = "uvnlos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Overrides the Monte-Carlo seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Shapes and density constants of the configured channel(s).
    Channel,
    /// Density on the [pdf] grid by all three routes.
    Pdf,
    /// Error rates over the SNR grid.
    BerSweep,
    /// Receiver-elevation sweep.
    GeomSweep,
    /// SNR penalties between scheme pairs.
    Penalty,
    /// Monte-Carlo error rates against the Meijer values.
    Mc,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Svg,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

/// The run's table and the scenario name.
fn run(cli: &Cli) -> Result<(RunOutput, String), Error> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if cli.format == Format::Svg && matches!(cli.command, Command::Channel) {
        return Err(Error::Config("the channel table has no plot; use --format csv".into()));
    }
    let exec = Execution::Auto;
    match cli.command {
        Command::Channel => scenario::run_channel(&cfg),
        Command::Pdf => scenario::run_pdf(&cfg, exec),
        Command::BerSweep => scenario::run_ber_sweep(&cfg, exec),
        Command::GeomSweep => scenario::run_geometry_sweep(&cfg, exec),
        Command::Penalty => scenario::run_penalty(&cfg, exec),
        Command::Mc => scenario::run_mc(&cfg, exec),
    }
    .map(|out| (out, cfg.scenario))
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("uvnlos: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    let (out, name) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("uvnlos: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let body = match (cli.format, &out.plot) {
        (Format::Svg, Some(spec)) => out.table.to_svg(spec, &name),
        _ => out.table.to_csv(),
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, body.as_bytes()).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("uvnlos: {e}");
        return ExitCode::from(3);
    }
    if out.failures > 0 {
        eprintln!("uvnlos: {} point(s) failed; see the error column", out.failures);
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
