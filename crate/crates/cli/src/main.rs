use std::path::PathBuf;
use std::process::ExitCode;

use amalgam_cli::config::default_k_big;
use amalgam_cli::{build_example, convergence_table, init_threads, verify, write_verify_outputs, IntList, PPolicy, RunConfig};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amalgam", version, about = "Numerical checks for compressions of reduced amalgamated free products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every verification suite and write report.json, records.csv and convergence.csv.
    Verify(RunArgs),
    /// Sweep ‖a - Θ_{p,k}Φ_k(a)‖ over k and print or write the CSV table.
    ConvergenceTable {
        #[command(flatten)]
        run: RunArgs,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON description of an example and its Fock sectors.
    BuildExample {
        /// Built-in name or path to a JSON amalgam description.
        example: String,
        #[arg(long, default_value_t = 3)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// dinfty, m2diag, s3a3 or a path to a JSON amalgam description.
    #[arg(long)]
    example: String,
    /// Fock truncation; defaults to max(k) + 2 max(q) + 1.
    #[arg(long = "K-big", alias = "k-big")]
    k_big: Option<usize>,
    /// Inclusive range such as 6..12, or a list 4,6,8.
    #[arg(long, default_value = "6..12")]
    k: IntList,
    #[arg(long, default_value = "1..2")]
    q: IntList,
    /// "half" or a fixed p.
    #[arg(long, default_value = "half")]
    p: PPolicy,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol_structural: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_identity: f64,
    /// Truncation for the span suite; defaults to min(max(k), 4). 0 skips it.
    #[arg(long)]
    dp_k: Option<usize>,
    #[arg(long, default_value_t = 6)]
    max_word_len: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        let mut c = RunConfig::new(&self.example, self.k.0, self.q.0);
        c.k_big = self.k_big.unwrap_or_else(|| default_k_big(c.max_k(), c.max_q()));
        c.p_policy = self.p;
        c.trials = self.trials;
        c.seed = self.seed;
        c.tol_structural = self.tol_structural;
        c.tol_identity = self.tol_identity;
        if let Some(d) = self.dp_k {
            c.dp_k = d;
        }
        c.max_word_len = self.max_word_len;
        c.out_dir = self.out_dir;
        c
    }
}

fn emit(bytes: &[u8], out: Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => amalgam_cli::record::write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Verify(args) => {
            let outcome = verify(args.into_config())?;
            let paths = write_verify_outputs(&outcome)?;
            let s = &outcome.report.summary;
            let failed = outcome.report.records.iter().filter(|r| !r.pass).count();
            println!(
                "{} records, {failed} failed, max residual {:.3e}, {:.2}s",
                outcome.report.records.len(),
                s.max_residual,
                s.wall_time_s
            );
            for r in outcome.report.records.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {} {} k={:?} p={:?} q={:?}: {:.3e} (tol {:.1e})", r.suite, r.word_id, r.k, r.p, r.q, r.measured, r.tolerance);
            }
            println!("wrote {}", paths.report.display());
            Ok(s.pass)
        }
        Command::ConvergenceTable { run, out } => {
            emit(&convergence_table(run.into_config())?, out)?;
            Ok(true)
        }
        Command::BuildExample { example, cap, out } => {
            emit(&build_example(&example, cap)?, out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
