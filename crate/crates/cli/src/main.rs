//! `chaocipher` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | usage error                                          |
//! | 2    | unreadable, unwritable or unsupported image/file     |
//! | 3    | invalid key file                                     |
//! | 4    | image is not square                                  |
//! | 5    | hyper-chaotic trajectory diverged                    |
//! | 6    | weak key refused (override with `--allow-weak-key`)  |
//! | 7    | plain and cipher image dimensions differ             |

mod keyfile;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaocipher::analysis::{self, AnalysisOptions, CHI_SQUARE_MIN_PIXELS};
use chaocipher::cipher::{self, CipherKey, CipherText};
use chaocipher::image::{self, AlphaPolicy};
use chaocipher::{hyperchaos, ArnoldParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

const KEY_ENV: &str = "CHAOCIPHER_KEYFILE";

#[derive(Parser)]
#[command(name = "chaocipher", version, about = "Chaos-based color image cipher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a square RGB image (PPM or PNG).
    Encrypt(CryptArgs),
    /// Decrypt an image produced by `encrypt`.
    Decrypt(CryptArgs),
    /// Write a JSON metrics report for a plain/cipher image pair.
    Analyze(AnalyzeArgs),
    /// Export the two keystreams for external randomness testing.
    Keystream(KeystreamArgs),
}

#[derive(Args)]
struct KeyArgs {
    /// Key file (JSON). Falls back to $CHAOCIPHER_KEYFILE.
    #[arg(long, env = KEY_ENV)]
    key: Option<PathBuf>,

    /// Accept keys whose keystream is nearly constant.
    #[arg(long)]
    allow_weak_key: bool,
}

#[derive(Args)]
struct CryptArgs {
    input: PathBuf,
    /// Output image; `.png` writes PNG, anything else PPM.
    output: PathBuf,
    #[command(flatten)]
    key: KeyArgs,
    /// Drop an alpha channel instead of rejecting the input.
    #[arg(long)]
    strip_alpha: bool,
    /// Print the Arnold parameters to stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    plain: PathBuf,
    cipher: PathBuf,
    /// Report destination; `-` for stdout.
    output: PathBuf,
    /// Key file; enables the key-sensitivity section.
    #[arg(long)]
    key: Option<PathBuf>,
    /// Seed for correlation pair sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of adjacent pairs sampled per direction.
    #[arg(long, default_value_t = analysis::DEFAULT_CORRELATION_SAMPLES as u64,
          value_parser = clap::value_parser!(u64).range(2..))]
    samples: u64,
    /// Also print the human-readable tables to stdout.
    #[arg(long)]
    table: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StreamFormat {
    /// k1 bytes followed by k2 bytes
    Bin,
    /// `index,k1,k2` rows with a header line
    Csv,
}

#[derive(Args)]
struct KeystreamArgs {
    /// Destination; `-` for stdout.
    output: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    length: u64,
    #[arg(long, value_enum, default_value_t = StreamFormat::Csv)]
    format: StreamFormat,
    #[command(flatten)]
    key: KeyArgs,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    File(String),
    #[error("invalid key: {0}")]
    Key(String),
    #[error("{0}")]
    NonSquare(chaocipher::Error),
    #[error("{0}")]
    Divergence(chaocipher::Error),
    #[error("weak key: {0}; pass --allow-weak-key to use it anyway")]
    WeakKey(String),
    #[error("{0}")]
    DimensionMismatch(chaocipher::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::File(_) => 2,
            CliError::Key(_) => 3,
            CliError::NonSquare(_) => 4,
            CliError::Divergence(_) => 5,
            CliError::WeakKey(_) => 6,
            CliError::DimensionMismatch(_) => 7,
        }
    }
}

impl From<chaocipher::Error> for CliError {
    fn from(e: chaocipher::Error) -> Self {
        use chaocipher::Error as E;
        match e {
            E::NonSquare { .. } => CliError::NonSquare(e),
            E::Divergence { .. } => CliError::Divergence(e),
            E::NonFiniteParameter { .. } => CliError::Key(e.to_string()),
            E::DimensionMismatch { .. } => CliError::DimensionMismatch(e),
            other => CliError::File(other.to_string()),
        }
    }
}

fn resolve_key(args: &KeyArgs) -> Result<CipherKey, CliError> {
    let path = args
        .key
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("no key file: pass --key or set {KEY_ENV}")))?;
    let key = keyfile::load_key(path).map_err(CliError::Key)?;
    if !args.allow_weak_key {
        if let Some(reason) = keyfile::weakness(&key) {
            return Err(CliError::WeakKey(reason));
        }
    }
    Ok(key)
}

fn alpha_policy(strip: bool) -> AlphaPolicy {
    if strip {
        AlphaPolicy::Strip
    } else {
        AlphaPolicy::Reject
    }
}

fn echo_params(label: &str, p: &ArnoldParams) {
    eprintln!(
        "{label} arnold params: a={} b={} c={} d={} n={}",
        p.a, p.b, p.c, p.d, p.n
    );
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::File(format!("stdout: {e}")))
    } else {
        fs::write(path, bytes).map_err(|e| CliError::File(format!("{}: {e}", path.display())))
    }
}

fn cmd_encrypt(args: &CryptArgs) -> Result<(), CliError> {
    let key = resolve_key(&args.key)?;
    let plain = image::load_image(&args.input, alpha_policy(args.strip_alpha))?;
    let (cipher, params) = cipher::encrypt_with_params(&plain, &key)?;
    if args.verbose {
        echo_params("derived", &params);
    }
    image::save_image(cipher.image(), &args.output)?;
    Ok(())
}

fn cmd_decrypt(args: &CryptArgs) -> Result<(), CliError> {
    let key = resolve_key(&args.key)?;
    let img = image::load_image(&args.input, alpha_policy(args.strip_alpha))?;
    let (plain, params) = cipher::decrypt_with_params(&CipherText::new(img), &key)?;
    if args.verbose {
        echo_params("recovered", &params);
    }
    image::save_image(&plain, &args.output)?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let key = args
        .key
        .as_deref()
        .map(keyfile::load_key)
        .transpose()
        .map_err(CliError::Key)?;
    let plain = image::load_image(&args.plain, AlphaPolicy::Reject)?;
    let cipher = image::load_image(&args.cipher, AlphaPolicy::Reject)?;
    if plain.height() * plain.width() < CHI_SQUARE_MIN_PIXELS {
        eprintln!(
            "warning: fewer than {CHI_SQUARE_MIN_PIXELS} pixels per channel; chi-square is not meaningful"
        );
    }
    let opts = AnalysisOptions {
        seed: args.seed,
        correlation_samples: usize::try_from(args.samples)
            .map_err(|_| CliError::Usage(format!("--samples {} is too large", args.samples)))?,
        ..AnalysisOptions::default()
    };
    let report = analysis::analyze(&plain, &cipher, key.as_ref(), &opts)?;
    let mut json = report.to_json();
    json.push('\n');
    write_output(&args.output, json.as_bytes())?;
    if args.table {
        print!("{}", report.render_table());
    }
    Ok(())
}

fn cmd_keystream(args: &KeystreamArgs) -> Result<(), CliError> {
    let key = resolve_key(&args.key)?;
    let length = usize::try_from(args.length)
        .map_err(|_| CliError::Usage(format!("length {} is too large", args.length)))?;
    let ks = hyperchaos::generate_keystreams(&key.chaos, length)?;
    let bytes = match args.format {
        StreamFormat::Bin => [ks.k1.as_slice(), ks.k2.as_slice()].concat(),
        StreamFormat::Csv => {
            let mut s = String::from("index,k1,k2\n");
            for (i, (a, b)) in ks.k1.iter().zip(&ks.k2).enumerate() {
                s.push_str(&format!("{i},{a},{b}\n"));
            }
            s.into_bytes()
        }
    };
    write_output(&args.output, &bytes)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Keystream(a) => cmd_keystream(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chaocipher: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
