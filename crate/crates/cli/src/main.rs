use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use squeezevo_cli::{config, pipeline, Diagnostic, Overrides, EXIT_BREACH, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "squeezevo", version, about = "Squeezed n-photon states in variable media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV/JSON outputs
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a scenario and report diagnostics without writing outputs
    Validate {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Adaptive,
}

#[derive(Args)]
struct Flags {
    /// Enable truncated Fock-space oracle validation
    #[arg(long)]
    oracle: bool,
    /// Ermakov integrator
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Local error tolerance of the adaptive integrator
    #[arg(long)]
    tol: Option<f64>,
    /// Fock truncation M (amplitudes cover |0> .. |M>)
    #[arg(long)]
    truncation: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            oracle: self.oracle,
            method: self.method.map(|m| match m {
                MethodArg::Rk4 => "rk4".into(),
                MethodArg::Adaptive => "adaptive".into(),
            }),
            tol: self.tol,
            truncation: self.truncation,
        }
    }
}

fn print_diagnostics(path: &std::path::Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn execute(config_path: PathBuf, out: Option<PathBuf>, flags: Flags) -> i32 {
    let (scenario, diags) = match config::load(&config_path, &flags.overrides()) {
        Ok(v) => v,
        Err(diags) => {
            print_diagnostics(&config_path, &diags);
            return EXIT_CONFIG;
        }
    };
    print_diagnostics(&config_path, &diags);
    let result = match pipeline::run(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BREACH;
        }
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for c in result.checks.iter().filter(|c| !c.pass()) {
        eprintln!("error: {} = {:e} exceeds tolerance {:e}", c.name, c.value, c.limit);
    }
    if let Some(dir) = out {
        if let Err(e) = pipeline::write_outputs(&scenario, &result, &dir) {
            eprintln!("error: writing {}: {e}", dir.display());
            return EXIT_BREACH;
        }
    }
    if result.pass() {
        EXIT_OK
    } else {
        EXIT_BREACH
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Run { config, out, flags } => execute(config, Some(out), flags),
        Command::Validate { config, flags } => execute(config, None, flags),
    };
    ExitCode::from(code as u8)
}
