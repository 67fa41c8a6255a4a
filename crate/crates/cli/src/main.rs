use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twistk_cli::{run, CliError, Command, Invocation};

#[derive(Parser)]
#[command(name = "twistk", version, about = "Twisted equivariant differential K-theory on finite models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Absolute tolerance for float comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Gauss–Legendre order for Chern–Simons integrals.
    #[arg(long, global = true, default_value_t = 32)]
    quadrature: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized steps whose results are verified.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every identity the file's objects must satisfy.
    Validate { file: PathBuf },
    /// Character of a bundle on the inertia groupoid.
    Character {
        file: PathBuf,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Chern–Simons form between two bundles.
    Cs {
        #[arg(num_args = 1..=2, required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        bundle: Vec<String>,
        /// Named isomorphism from the first file; identity if omitted.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Rank of the complexified twisted K-group of the file's G-set.
    KhatRank { file: PathBuf },
    /// Normal form of an exact-tier class.
    KhatClass {
        file: PathBuf,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Decide stable isomorphism of two exact-tier theories.
    StableIso {
        #[arg(num_args = 1..=2, required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        bundle: Vec<String>,
    },
    /// List the β-regular conjugacy classes.
    RegularClasses { file: PathBuf },
    /// Run the file's task list.
    Report { file: PathBuf },
}

fn invocation(cli: &Cli) -> Invocation {
    let (command, files, bundles, phi) = match &cli.command {
        Cmd::Validate { file } => (Command::Validate, vec![file.clone()], vec![], None),
        Cmd::Character { file, bundle } => (Command::Character, vec![file.clone()], bundle.iter().cloned().collect(), None),
        Cmd::Cs { files, bundle, phi } => (Command::Cs, files.clone(), bundle.clone(), phi.clone()),
        Cmd::KhatRank { file } => (Command::KhatRank, vec![file.clone()], vec![], None),
        Cmd::KhatClass { file, bundle } => (Command::KhatClass, vec![file.clone()], bundle.iter().cloned().collect(), None),
        Cmd::StableIso { files, bundle } => (Command::StableIso, files.clone(), bundle.clone(), None),
        Cmd::RegularClasses { file } => (Command::RegularClasses, vec![file.clone()], vec![], None),
        Cmd::Report { file } => (Command::Report, vec![file.clone()], vec![], None),
    };
    Invocation {
        command,
        files,
        bundles,
        phi,
        tolerance: cli.tolerance,
        quadrature: cli.quadrature,
        seed: cli.seed,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&invocation(&cli)).and_then(|report| {
        let text = match cli.format {
            Format::Json => report.to_json(),
            Format::Text => report.to_text(),
        };
        match &cli.output {
            Some(path) => std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(report.exit_code())
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("twistk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
