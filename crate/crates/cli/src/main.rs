//! Command-line front end for the optical-secrecy library.
//!
//! Three commands cover the workflow: `channel` derives one link end to end
//! and reports every intermediate quantity, `sweep` evaluates secrecy
//! metrics over a parameter grid, and `validate` cross-checks the
//! closed-form outage against the Monte-Carlo estimator.
//!
//! Exit codes: 0 success, 1 validation gate failure, 2 usage or input
//! validation error, 3 numerical non-convergence, 4 output I/O error.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use optsec_core::scenario::Receiver;
use optsec_core::secrecy::{SopFormula, ThresholdConvention};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "optsec",
    version,
    about = "Secrecy analysis for free-space optical links under turbulence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive one link end to end and report every intermediate quantity.
    Channel(ChannelArgs),
    /// Evaluate secrecy metrics over a parameter grid.
    Sweep(SweepArgs),
    /// Cross-check the closed-form outage against the Monte-Carlo estimator.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ChannelArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Which receiver's channel to derive.
    #[arg(long, value_enum, default_value_t = ReceiverArg::Destination)]
    receiver: ReceiverArg,
    /// Scenario field override, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", value_parser = parse_override_arg)]
    overrides: Vec<KeyValue>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep document (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output file, or directory for one file per curve. A missing path
    /// ending in '/' is created as a directory. Defaults to $OPTSEC_OUT_DIR,
    /// then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Attach Monte-Carlo estimates (value and standard error per metric).
    #[arg(long)]
    with_mc: bool,
    /// Monte-Carlo seed; every random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo draws per grid point.
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Independent sample shards; estimates are shard-count invariant.
    #[arg(long)]
    shards: Option<u32>,
    /// Scenario field override applied to every curve, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", value_parser = parse_override_arg)]
    overrides: Vec<KeyValue>,
    /// Secrecy rate in bits per channel use; overrides the document.
    #[arg(long)]
    rate: Option<f64>,
    /// How the outage threshold is built from the secrecy rate.
    #[arg(long, value_enum)]
    threshold_convention: Option<ConventionArg>,
    /// Evaluate the bracketed double-series outage form instead of the
    /// collapsed single series.
    #[arg(long)]
    alternate_sop_form: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Destination baseline SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "20,25,30,35,40")]
    grid: Vec<f64>,
    /// Monte-Carlo draws per grid point.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: u64,
    /// Monte-Carlo seed; every random draw derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent sample shards; estimates are shard-count invariant.
    #[arg(long, default_value_t = 1)]
    shards: u32,
    /// Scenario field override, repeatable. The pseudo-key
    /// `check.beta_scale=<factor>` perturbs the closed form's shape
    /// parameter while leaving the Monte-Carlo channel untouched, to
    /// confirm the gate trips on a deliberate mismatch.
    #[arg(long = "override", value_name = "KEY=VALUE", value_parser = parse_override_arg)]
    overrides: Vec<KeyValue>,
    /// Secrecy rate in bits per channel use; overrides the scenario.
    #[arg(long)]
    rate: Option<f64>,
    /// How the outage threshold is built from the secrecy rate.
    #[arg(long, value_enum)]
    threshold_convention: Option<ConventionArg>,
    /// Evaluate the bracketed double-series outage form instead of the
    /// collapsed single series.
    #[arg(long)]
    alternate_sop_form: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReceiverArg {
    Destination,
    Eavesdropper,
}

impl From<ReceiverArg> for Receiver {
    fn from(r: ReceiverArg) -> Receiver {
        match r {
            ReceiverArg::Destination => Receiver::Destination,
            ReceiverArg::Eavesdropper => Receiver::Eavesdropper,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    /// γ_th = 2^{2 R_s}.
    Doubled,
    /// γ_th = 2^{R_s}.
    Shannon,
}

impl From<ConventionArg> for ThresholdConvention {
    fn from(c: ConventionArg) -> ThresholdConvention {
        match c {
            ConventionArg::Doubled => ThresholdConvention::DoubledRate,
            ConventionArg::Shannon => ThresholdConvention::Shannon,
        }
    }
}

/// One `--override KEY=VALUE` argument with the value parsed as TOML.
#[derive(Clone, Debug)]
struct KeyValue {
    key: String,
    value: toml::Value,
}

fn parse_override_arg(s: &str) -> Result<KeyValue, String> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("expected KEY=VALUE with a non-empty key, got {s:?}"));
    }
    Ok(KeyValue {
        key: key.to_string(),
        value: parse_toml_value(raw),
    })
}

/// Values that do not parse as a TOML scalar are taken as bare strings, so
/// `--override cloud_label=thin cirrus` works without nested quoting.
fn parse_toml_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()))
}

/// Failed command outcome carrying its exit code.
enum Failure {
    /// A validation gate did not hold (exit 1).
    Gate(String),
    /// Bad arguments, unreadable or invalid input documents (exit 2).
    Usage(String),
    /// A series or quadrature failed to converge (exit 3).
    Numeric(String),
    /// Could not write an output (exit 4).
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Gate(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Gate(m) | Failure::Usage(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }

    fn io(context: &str, e: std::io::Error) -> Failure {
        Failure::Io(format!("{context}: {e}"))
    }
}

impl From<optsec_core::Error> for Failure {
    fn from(e: optsec_core::Error) -> Failure {
        use optsec_core::Error;
        match e {
            Error::SeriesNotConverged { .. } | Error::QuadratureNotConverged { .. } => {
                Failure::Numeric(e.to_string())
            }
            Error::Domain { .. }
            | Error::Geometry(_)
            | Error::ScenarioValidation(_)
            | Error::Parse { .. } => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 2u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Channel(args) => commands::channel(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Validate(args) => commands::validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn formula_name(f: SopFormula) -> &'static str {
    match f {
        SopFormula::Standard => "standard",
        SopFormula::AlternateBracket => "alternate_bracket",
    }
}

fn convention_name(c: ThresholdConvention) -> &'static str {
    match c {
        ThresholdConvention::DoubledRate => "doubled",
        ThresholdConvention::Shannon => "shannon",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        use optsec_core::Error;
        let numeric = Failure::from(Error::SeriesNotConverged {
            context: "test",
            terms: 10,
            last_term: 1.0,
            partial_sum: 1.0,
        });
        assert_eq!(numeric.code(), 3);
        assert_eq!(Failure::from(Error::domain("test", "msg")).code(), 2);
        assert_eq!(
            Failure::from(Error::Geometry("too shallow".to_string())).code(),
            2
        );
        assert_eq!(
            Failure::from(Error::ScenarioValidation(vec!["field: bad".to_string()])).code(),
            2
        );
        assert_eq!(
            Failure::from(Error::Parse {
                path: "x".to_string(),
                message: "y".to_string(),
            })
            .code(),
            2
        );
        assert_eq!(Failure::Gate("gate".to_string()).code(), 1);
        assert_eq!(Failure::Io("io".to_string()).code(), 4);
    }

    #[test]
    fn override_values_parse_as_toml_scalars_with_string_fallback() {
        assert_eq!(parse_toml_value("80"), toml::Value::Integer(80));
        assert_eq!(parse_toml_value("0.4"), toml::Value::Float(0.4));
        assert_eq!(parse_toml_value("1e6"), toml::Value::Float(1e6));
        assert_eq!(parse_toml_value("true"), toml::Value::Boolean(true));
        assert_eq!(
            parse_toml_value("\"quoted\""),
            toml::Value::String("quoted".to_string())
        );
        assert_eq!(
            parse_toml_value("thin cirrus"),
            toml::Value::String("thin cirrus".to_string())
        );
    }

    #[test]
    fn override_arguments_split_on_the_first_equals() {
        let kv = parse_override_arg("zenith_angle_deg=80").expect("parses");
        assert_eq!(kv.key, "zenith_angle_deg");
        assert_eq!(kv.value, toml::Value::Integer(80));
        assert!(parse_override_arg("no_equals").is_err());
        assert!(parse_override_arg("=5").is_err());
    }
}
