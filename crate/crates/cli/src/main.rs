//! `hamlab`: build clock Hamiltonians, analyze spectra and Gibbs states, run the entropy
//! protocol, decide and reduce promise-problem instances. Every run prints one JSON RunReport
//! on stdout; logs go to stderr.

mod commands;
mod inputs;
mod report;

use clap::{Parser, Subcommand};
use commands::{ExtractorChoice, Problem, ProtocolArgs, ReductionChoice};
use hamlab::clock::ClockEncoding;
use hamlab::problems::DEFAULT_RESTARTS;
use inputs::StateSpec;
use report::{CliResult, Context, Outcome, EXIT_MALFORMED};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "hamlab", version, about = "Clock Hamiltonians, low-energy entropies and the problems built on them")]
struct Cli {
    /// Master seed; every random choice in the run is drawn from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel restarts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build H_Φ for a circuit and emit it as Hamiltonian JSON.
    BuildCh2ham {
        circuit: PathBuf,
        #[arg(long, default_value_t = 0)]
        idle: usize,
        #[arg(long, default_value = "kitaev")]
        encoding: ClockEncoding,
        /// Write the Hamiltonian here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground energy, gap and the levels below a cutoff.
    Spectrum {
        hamiltonian: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        cutoff: f64,
    },
    /// Gibbs state at inverse temperature β.
    Gibbs {
        hamiltonian: PathBuf,
        #[arg(long)]
        beta: f64,
    },
    /// F = −ln Z / β, cross-checked against the free-energy functional at the Gibbs state.
    FreeEnergy {
        hamiltonian: PathBuf,
        #[arg(long)]
        beta: f64,
    },
    /// History-state energies and output distances for a built clock Hamiltonian.
    /// STATE is basis:K, random, random:N, all, or a pure-state JSON file.
    VerifyHistory {
        hamiltonian: PathBuf,
        #[arg(value_name = "STATE")]
        state: StateSpec,
    },
    /// Gap of H_Φ across idle lengths with a power-law fit.
    CertifyGap {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sweep: Vec<usize>,
        #[arg(long, default_value = "kitaev")]
        encoding: ClockEncoding,
    },
    /// Run the entropy-verification protocol on the honest prover for ρ (or on a given proof).
    EntropyProtocol {
        /// ρ over registers A and B.
        #[arg(long)]
        input: PathBuf,
        /// Proof state over A, B, E to verify instead of the honest one.
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, value_enum, default_value = "haar")]
        extractor: ExtractorChoice,
        #[arg(long)]
        extractor_seed: Option<u64>,
        /// Selector qubits of a Haar extractor (default: as many as it acts on).
        #[arg(long)]
        selector_qubits: Option<usize>,
        /// Claimed entropy per copy in bits (default: S(ρ_A)).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        delta_prime: f64,
    },
    /// Decide an instance; exit 0 = YES, 1 = NO, 2 = UNDECIDED.
    Decide {
        #[arg(value_enum)]
        problem: Problem,
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Map an instance to another problem, recording every intermediate constant.
    Reduce {
        #[arg(value_enum)]
        map: ReductionChoice,
        instance: PathBuf,
        #[arg(long, default_value = "kitaev")]
        encoding: ClockEncoding,
        /// Also decide the emitted instance and exit by its verdict.
        #[arg(long)]
        decide: bool,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Print the RunReport JSON schema.
    Schema,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::BuildCh2ham { .. } => "build-ch2ham",
            Self::Spectrum { .. } => "spectrum",
            Self::Gibbs { .. } => "gibbs",
            Self::FreeEnergy { .. } => "free-energy",
            Self::VerifyHistory { .. } => "verify-history",
            Self::CertifyGap { .. } => "certify-gap",
            Self::EntropyProtocol { .. } => "entropy-protocol",
            Self::Decide { .. } => "decide",
            Self::Reduce { .. } => "reduce",
            Self::Schema => "schema",
        }
    }
}

fn run(ctx: &mut Context, command: Command) -> CliResult<Outcome> {
    match command {
        Command::BuildCh2ham { circuit, idle, encoding, out } => commands::build_ch2ham(ctx, &circuit, idle, encoding, out.as_deref()),
        Command::Spectrum { hamiltonian, cutoff } => commands::spectrum_cmd(ctx, &hamiltonian, cutoff),
        Command::Gibbs { hamiltonian, beta } => commands::gibbs(ctx, &hamiltonian, beta),
        Command::FreeEnergy { hamiltonian, beta } => commands::free_energy_cmd(ctx, &hamiltonian, beta),
        Command::VerifyHistory { hamiltonian, state } => commands::verify_history(ctx, &hamiltonian, &state),
        Command::CertifyGap { circuit, sweep, encoding } => commands::certify_gap_cmd(ctx, &circuit, &sweep, encoding),
        Command::EntropyProtocol {
            input,
            proof,
            q,
            eps,
            extractor,
            extractor_seed,
            selector_qubits,
            tau,
            delta,
            delta_prime,
        } => commands::entropy_protocol(
            ctx,
            &ProtocolArgs { input, proof, q, eps, extractor, extractor_seed, selector_qubits, tau, delta, delta_prime },
        ),
        Command::Decide { problem, instance, restarts } => commands::decide(ctx, problem, &instance, restarts),
        Command::Reduce { map, instance, encoding, decide, restarts } => {
            commands::reduce(ctx, map, &instance, encoding, decide, restarts)
        }
        Command::Schema => Ok(Outcome::success(serde_json::from_str(report::SCHEMA).map_err(hamlab::Error::from)?)),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { 0 };
            // help and version go to stdout, usage errors to stderr; neither is a run
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let started = Instant::now();
    let subcommand = cli.command.name().to_string();
    let mut ctx = Context::new(cli.seed);
    let outcome = run(&mut ctx, cli.command);
    if let Err(e) = &outcome {
        log::error!("{e}");
    }
    let report = ctx.finish(argv, subcommand, cli.threads, outcome, started.elapsed().as_millis() as u64);
    let text = match serde_json::to_string(&report) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot serialize the report: {e}");
            std::process::exit(report::EXIT_INTERNAL);
        }
    };
    // a closed stdout (e.g. piped into `head`) is not worth a panic; the exit code still stands
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("cannot write the report: {e}");
            std::process::exit(report::EXIT_IO);
        }
    }
    std::process::exit(report.exit_code);
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use report::CliError;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["hamlab", "certify-gap", "c.json", "--sweep", "0,2,4", "--seed", "7"]).unwrap();
        assert_eq!(cli.seed, 7);
        match cli.command {
            Command::CertifyGap { sweep, encoding, .. } => {
                assert_eq!(sweep, vec![0, 2, 4]);
                assert_eq!(encoding, ClockEncoding::Kitaev);
            }
            other => panic!("parsed as {other:?}"),
        }
        assert!(Cli::try_parse_from(["hamlab", "decide", "nonsense", "x.json"]).is_err());
    }

    #[test]
    fn unused_error_variant_is_usage() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_MALFORMED);
    }
}
