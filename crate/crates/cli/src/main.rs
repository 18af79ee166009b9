use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orlicz_core::bessel::synthesize_kernel;
use orlicz_core::harness::{run_suite, write_report, FamilyKind, SuiteConfig, SUITES};
use orlicz_core::{Error, Grid};

#[derive(Parser)]
#[command(name = "orlicz-lab", version, about = "Numerical checks for Orlicz and Bessel potential spaces")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write report.json and rows.csv.
    Run(RunArgs),
    /// Print the available suites.
    ListSuites,
    /// Export a Bessel kernel in the field format.
    Kernel(KernelArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    suite: String,
    #[arg(long)]
    young: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    s2: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    i_max: Option<usize>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    rings: Option<usize>,
    /// Family as kind:size, e.g. gaussians:10.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct KernelArgs {
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, default_value_t = 16.0)]
    extent: f64,
    /// Write the band-limited samples instead of point values.
    #[arg(long)]
    spectral: bool,
    #[arg(long)]
    out: PathBuf,
}

fn config_from(args: RunArgs) -> Result<SuiteConfig, Error> {
    let mut cfg = SuiteConfig::defaults(&args.suite)?;
    if let Some(v) = args.young {
        cfg.young = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if let Some(v) = args.extent {
        cfg.extent = v;
    }
    if let Some(v) = args.s {
        cfg.s = v;
    }
    if args.s2.is_some() {
        cfg.s2 = args.s2;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = args.levels {
        cfg.levels = v;
    }
    if let Some(v) = args.i_max {
        cfg.i_max = v;
    }
    if let Some(v) = args.m {
        cfg.m = v;
    }
    if let Some(v) = args.rings {
        cfg.rings = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(spec) = args.family {
        let (kind, size) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("family must look like kind:size, got '{spec}'")))?;
        cfg.family = kind.parse::<FamilyKind>()?;
        cfg.family_size = size.parse().map_err(|_| Error::Config(format!("bad family size '{size}'")))?;
    }
    cfg.out = Some(args.out);
    Ok(cfg)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Hypothesis(_) => 2,
        Error::ResourceGuard(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::ListSuites => {
            for s in SUITES {
                println!("{s}");
            }
            Ok(true)
        }
        Command::Kernel(k) => {
            let kernel = synthesize_kernel(k.s, Grid::new(k.n, k.grid, k.extent)?)?;
            let field = if k.spectral { kernel.spectral_samples() } else { kernel.samples() };
            let header = field.write(&k.out)?;
            println!("wrote {} and {}", k.out.display(), header.display());
            Ok(true)
        }
        Command::Run(args) => {
            let cfg = config_from(args)?;
            let report = run_suite(&cfg)?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let path = write_report(&report, &dir)?;
            for c in &report.summary.checks {
                println!("{} {}: {:.3e} (limit {:.3e})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.limit);
            }
            println!("{} {} -> {}", report.suite, if report.pass { "passed" } else { "failed" }, path.display());
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
