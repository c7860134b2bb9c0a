//! The machine-readable record every invocation prints, and the exit-code policy.

use hamlab::problems::Decision;
use hamlab::random::{child_seed, seeded, SeededRng};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_ID: &str = "hamlab.run-report/1";
pub const SCHEMA: &str = include_str!("../schema/run_report.schema.json");

pub const EXIT_MALFORMED: i32 = 64;
pub const EXIT_BUDGET: i32 = 65;
pub const EXIT_PROMISE: i32 = 66;
pub const EXIT_IO: i32 = 74;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] hamlab::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use hamlab::Error as E;
        match self {
            Self::Lib(E::Malformed(_) | E::Json(_)) => "malformed_input",
            Self::Lib(E::BudgetExceeded { .. } | E::InfeasibleIdle { .. }) => "budget_exceeded",
            Self::Lib(E::PromiseViolation(_)) => "promise_violation",
            Self::Lib(_) => "invalid_input",
            Self::Io { .. } => "io",
            Self::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "malformed_input" | "invalid_input" | "usage" => EXIT_MALFORMED,
            "budget_exceeded" => EXIT_BUDGET,
            "promise_violation" => EXIT_PROMISE,
            "io" => EXIT_IO,
            _ => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand hands back: its results and how the run should exit.
pub struct Outcome {
    pub results: Value,
    pub decision: Option<Decision>,
    /// For commands without a decision: whether the check they perform passed.
    pub passed: bool,
}

impl Outcome {
    pub fn success(results: Value) -> Self {
        Self { results, decision: None, passed: true }
    }

    pub fn check(results: Value, passed: bool) -> Self {
        Self { results, decision: None, passed }
    }

    pub fn decided(results: Value, decision: Decision) -> Self {
        Self { results, decision: Some(decision), passed: true }
    }

    pub fn exit_code(&self) -> i32 {
        match self.decision {
            Some(Decision::Yes) => 0,
            Some(Decision::No) => 1,
            Some(Decision::Undecided) => 2,
            None => i32::from(!self.passed),
        }
    }
}

/// Every random seed a run uses comes from here, drawn in call order from `--seed`.
pub struct SeedBank {
    master: u64,
    rng: SeededRng,
    drawn: BTreeMap<String, u64>,
}

impl SeedBank {
    pub fn new(master: u64) -> Self {
        Self { master, rng: seeded(master), drawn: BTreeMap::new() }
    }

    pub fn draw(&mut self, label: &str) -> u64 {
        let s = child_seed(&mut self.rng);
        self.drawn.insert(label.to_string(), s);
        s
    }

    /// Records a seed supplied on the command line instead of drawn.
    pub fn record(&mut self, label: &str, seed: u64) -> u64 {
        self.drawn.insert(label.to_string(), seed);
        seed
    }
}

#[derive(Serialize)]
pub struct Seeds {
    pub master: u64,
    pub derived: BTreeMap<String, u64>,
}

#[derive(Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

#[derive(Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub subcommand: String,
    pub input_hashes: BTreeMap<String, String>,
    pub seeds: Seeds,
    pub threads: Option<usize>,
    pub results: Value,
    pub decision: Option<Decision>,
    pub exit_code: i32,
    pub wall_clock_ms: u64,
    pub error: Option<ErrorReport>,
}

/// Per-run state shared by the subcommands: the seed bank and the hashes of files read.
pub struct Context {
    pub seeds: SeedBank,
    pub input_hashes: BTreeMap<String, String>,
}

impl Context {
    pub fn new(master_seed: u64) -> Self {
        Self { seeds: SeedBank::new(master_seed), input_hashes: BTreeMap::new() }
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.input_hashes.insert(path.display().to_string(), hex::encode(Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    pub fn finish(
        self,
        command: Vec<String>,
        subcommand: String,
        threads: Option<usize>,
        outcome: CliResult<Outcome>,
        wall_clock_ms: u64,
    ) -> RunReport {
        let (results, decision, exit_code, error) = match outcome {
            Ok(o) => {
                let code = o.exit_code();
                (o.results, o.decision, code, None)
            }
            Err(e) => (Value::Null, None, e.exit_code(), Some(ErrorReport { kind: e.kind().into(), message: e.to_string() })),
        };
        RunReport {
            schema: SCHEMA_ID,
            version: env!("CARGO_PKG_VERSION"),
            command,
            subcommand,
            input_hashes: self.input_hashes,
            seeds: Seeds { master: self.seeds.master, derived: self.seeds.drawn },
            threads,
            results,
            decision,
            exit_code,
            wall_clock_ms,
            error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_decisions() {
        assert_eq!(Outcome::decided(Value::Null, Decision::Yes).exit_code(), 0);
        assert_eq!(Outcome::decided(Value::Null, Decision::No).exit_code(), 1);
        assert_eq!(Outcome::decided(Value::Null, Decision::Undecided).exit_code(), 2);
        assert_eq!(Outcome::check(Value::Null, false).exit_code(), 1);
        assert_eq!(CliError::Lib(hamlab::Error::Malformed("x".into())).exit_code(), EXIT_MALFORMED);
        let budget = hamlab::Error::BudgetExceeded { what: "qubits", needed: 30, limit: 12 };
        assert_eq!(CliError::Lib(budget).exit_code(), EXIT_BUDGET);
        assert_eq!(CliError::Lib(hamlab::Error::PromiseViolation("x".into())).exit_code(), EXIT_PROMISE);
    }

    #[test]
    fn seed_bank_is_reproducible() {
        let mut a = SeedBank::new(9);
        let mut b = SeedBank::new(9);
        assert_eq!(a.draw("x"), b.draw("x"));
        assert_ne!(a.draw("y"), a.drawn["x"]);
    }

    #[test]
    fn schema_is_valid_json() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["$id"], SCHEMA_ID);
    }
}
