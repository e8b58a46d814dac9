//! `tsabe` command-line tool.
//!
//! Exit status: 0 success, 1 usage error, 2 access denied, 3 integrity
//! failure, 4 verification failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "tsabe", version, about = "Time-sensitive attribute-based content protection")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Group suite descriptor.
    #[arg(long, global = true, default_value = "transparent:2147483647")]
    pub suite: String,
    /// Scheme variant: `paper` or `repaired`. Defaults to the mode recorded
    /// in the input artifacts, or `repaired` for new ones.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit one JSON document instead of key=value lines.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Inclusive day range, `YYYY-MM-DD..YYYY-MM-DD`.
    #[arg(long, conflicts_with = "nodes")]
    pub window: Option<String>,
    /// Comma-separated time nodes, e.g. `2022-08,2022-09-01`.
    #[arg(long)]
    pub nodes: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate public parameters and a master key.
    Setup {
        /// Comma-separated attribute universe.
        #[arg(long)]
        universe: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        mk: PathBuf,
    },
    /// Issue a private key for a policy and a time window.
    Keygen {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        mk: PathBuf,
        /// Boolean formula over attributes, e.g. `gold AND (silver OR vip)`.
        #[arg(long)]
        policy: String,
        #[command(flatten)]
        time: TimeArgs,
        /// Raw identity scalar.
        #[arg(long, conflicts_with_all = ["pid", "user"])]
        id: Option<u64>,
        /// Pseudo-identity in `pid-<hex>` form.
        #[arg(long, conflicts_with = "user")]
        pid: Option<String>,
        /// Derive a pseudo-identity from this user id and the window start.
        #[arg(long)]
        user: Option<String>,
        /// Hex nonce for pseudo-identity derivation; drawn from the seed if absent.
        #[arg(long, requires = "user")]
        nonce: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a target-group message under attributes and time nodes.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        /// Comma-separated attribute set.
        #[arg(long)]
        attrs: String,
        #[command(flatten)]
        time: TimeArgs,
        /// Hex encoding of the message element; random if absent.
        #[arg(long)]
        message: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext with a private key.
    Decrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
    },
    /// Print the minimal time-node cover of a window.
    Cover { window: String },
    /// Check each line of the decryption correctness chain.
    Audit {
        #[arg(long, requires_all = ["sk", "ct"])]
        pk: Option<PathBuf>,
        #[arg(long, requires = "pk")]
        sk: Option<PathBuf>,
        #[arg(long, requires = "pk")]
        ct: Option<PathBuf>,
    },
    /// Measure artifact sizes and pairing counts against the closed forms.
    Bench {
        #[arg(long = "U", default_value_t = 3)]
        universe: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long = "l", default_value_t = 2)]
        rows: usize,
        #[arg(long = "tk", default_value_t = 4)]
        key_cover: usize,
        #[arg(long = "tc", default_value_t = 1)]
        ct_cover: usize,
    },
    /// Package a file under attributes and time nodes.
    Seal {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Content name recorded in the manifest; defaults to the file name.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        attrs: String,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long, default_value_t = tsabe::envelope::DEFAULT_CHUNK_SIZE)]
        chunk_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a packaged file.
    Open {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        package: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and sign a resource directory.
    DirBuild {
        #[arg(long)]
        issuer: String,
        /// Signing key text.
        #[arg(long)]
        key: String,
        /// `name=path[:category[:description]]`, repeatable.
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
        /// Last-update timestamp recorded for every entry, seconds since the epoch.
        #[arg(long, default_value_t = 0)]
        updated: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a signed directory and optionally check a file against it.
    DirVerify {
        #[arg(long)]
        dir: PathBuf,
        /// `issuer=key`, repeatable.
        #[arg(long = "trust")]
        trust: Vec<String>,
        #[arg(long)]
        lookup: Option<String>,
        /// File whose hash must match the looked-up entry.
        #[arg(long, requires = "lookup")]
        file: Option<PathBuf>,
    },
    /// Network simulation.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
    /// Place a pseudo-identity on the revocation ledger.
    Revoke {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        pid: String,
        #[arg(long)]
        expiry: String,
        #[arg(long)]
        now: String,
    },
    /// Daily agent check of a pseudo-identity; exits 2 when revoked.
    Check {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        pid: String,
        #[arg(long)]
        today: String,
    },
    /// Remove ledger entries that expired before `clock`.
    Prune {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        clock: String,
    },
    /// Verify the full ledger chain.
    LedgerVerify {
        #[arg(long)]
        ledger: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Run a scenario file, or the built-in five-node line.
    Run {
        #[arg(required_unless_present = "fixed_line")]
        scenario: Option<PathBuf>,
        #[arg(long, conflicts_with = "scenario")]
        fixed_line: bool,
        /// RSU cache capacity in bytes for the built-in line.
        #[arg(long, default_value_t = 65536, requires = "fixed_line")]
        capacity: usize,
        /// Write the event log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Recompute metrics from an event log.
    Replay { log: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            print!("{}", out.render(cli.global.json));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            if let Some(out) = &e.output {
                print!("{}", out.render(cli.global.json));
            }
            ExitCode::from(e.code as u8)
        }
    }
}
