mod mine;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ric_core::dataset::{ingest_reader, IngestOptions, Ingested};
use ric_core::miner::{plan_parameters, PlannerInputs};
use ric_core::oracle::evaluate;
use ric_core::rules::{read_rules, records_jaccard, RuleRecord};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "ric", version, about = "Mine frequent, confident feature interactions with random intersection chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine rules from a labelled CSV file
    Mine(mine::MineArgs),
    /// Plan chain length and chain count for a frequency gap
    Params(ParamsArgs),
    /// Compare rule estimates with exact values on a dataset
    Verify(VerifyArgs),
    /// Jaccard index of two rule files
    Jaccard(JaccardArgs),
}

/// How a CSV file is read and encoded. Reuse the same values across `mine`
/// and `verify` so category names resolve to the same codes.
#[derive(Args, Clone, Debug)]
pub struct InputArgs {
    /// CSV file with a header row
    #[arg(long, env = "RIC_INPUT")]
    pub input: PathBuf,
    #[arg(long, env = "RIC_LABEL_COL", default_value = "class")]
    pub label_col: String,
    /// Merge categories seen fewer times into "others" (0 disables)
    #[arg(long, env = "RIC_UNCOMMON_THRESHOLD", default_value_t = 0)]
    pub uncommon_threshold: usize,
    /// Quantile-bin numeric columns, as `col[,col...]:bins`; repeatable
    #[arg(long, env = "RIC_BIN_NUMERIC", value_delimiter = ';')]
    pub bin_numeric: Vec<String>,
}

impl InputArgs {
    pub fn ingest_options(&self) -> Result<IngestOptions> {
        let mut bins = Vec::new();
        for spec in &self.bin_numeric {
            let (cols, n) = spec
                .rsplit_once(':')
                .ok_or_else(|| usage(format!("--bin-numeric {spec:?}: expected `col:bins`")))?;
            let n: usize = n
                .parse()
                .map_err(|_| usage(format!("--bin-numeric {spec:?}: bin count is not a number")))?;
            for col in cols.split(',').filter(|c| !c.is_empty()) {
                bins.push((col.to_string(), n));
            }
        }
        Ok(IngestOptions {
            label_column: self.label_col.clone(),
            uncommon_threshold: self.uncommon_threshold,
            bin_numeric: bins,
        })
    }

    /// Reads the file once, returning the encoded data and the SHA-256 of
    /// its bytes.
    pub fn load(&self) -> Result<(Ingested, String)> {
        let opts = self.ingest_options()?;
        let bytes = std::fs::read(&self.input).with_context(|| format!("reading {}", self.input.display()))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        let ingested = ingest_reader(bytes.as_slice(), &opts).with_context(|| format!("loading {}", self.input.display()))?;
        Ok((ingested, digest))
    }
}

#[derive(Args)]
struct ParamsArgs {
    /// smallest frequency that must be found
    #[arg(long, env = "RIC_P1")]
    p1: f64,
    /// largest frequency that must not be found
    #[arg(long, env = "RIC_P2")]
    p2: f64,
    /// allowed probability of missing a p1-frequent pattern
    #[arg(long, env = "RIC_ETA1")]
    eta1: f64,
    /// allowed probability of keeping a p2-infrequent pattern
    #[arg(long, env = "RIC_ETA2")]
    eta2: f64,
    #[arg(long, env = "RIC_JSON")]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON-lines rule file
    #[arg(long, env = "RIC_RULES")]
    rules: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "RIC_JSON")]
    json: bool,
}

#[derive(Args)]
struct JaccardArgs {
    #[arg(long, env = "RIC_RULES_A")]
    rules_a: PathBuf,
    #[arg(long, env = "RIC_RULES_B")]
    rules_b: PathBuf,
}

/// Bad flag values or combinations; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let is_usage = err.chain().any(|e| {
        e.is::<UsageError>() || matches!(e.downcast_ref::<ric_core::Error>(), Some(ric_core::Error::InvalidParameter(_)))
    });
    if is_usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RIC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Mine(args) => mine::run(args),
        Command::Params(args) => params(args),
        Command::Verify(args) => verify(args),
        Command::Jaccard(args) => jaccard(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn params(args: ParamsArgs) -> Result<()> {
    let inputs = PlannerInputs::new(args.p1, args.p2, args.eta1, args.eta2)?;
    let plan = plan_parameters(&inputs)?;
    let mut out = io::stdout().lock();
    if args.json {
        let v = serde_json::json!({ "inputs": inputs, "d_star": plan.d_star, "m_star": plan.m_star, "d_unrounded": plan.d_unrounded });
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "D* = {}", plan.d_star)?;
        writeln!(out, "M* = {}", plan.m_star)?;
    }
    Ok(())
}

fn read_rule_file(path: &Path) -> Result<Vec<RuleRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_rules(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

fn verify(args: VerifyArgs) -> Result<()> {
    let records = read_rule_file(&args.rules)?;
    let (ingested, _) = args.input.load()?;
    let ds = &ingested.dataset;
    let rules = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_rule(ds).with_context(|| format!("rule {} of {}", i + 1, args.rules.display())))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate(&rules, ds)?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string(&report)?)?;
        return Ok(());
    }
    writeln!(out, "class\tpattern\test_freq\texact_freq\test_conf\texact_conf")?;
    for r in &report.rules {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}",
            r.class,
            r.pattern,
            r.est_freq,
            r.exact_freq,
            r.est_conf,
            fmt_opt(r.exact_conf)
        )?;
    }
    writeln!(out, "rules: {}", report.rules.len())?;
    writeln!(out, "rmse_freq: {}", fmt_opt(report.rmse_freq))?;
    writeln!(out, "rmse_conf: {}", fmt_opt(report.rmse_conf))?;
    writeln!(out, "pearson_freq: {}", fmt_opt(report.pearson_freq))?;
    writeln!(out, "pearson_conf: {}", fmt_opt(report.pearson_conf))?;
    Ok(())
}

fn jaccard(args: JaccardArgs) -> Result<()> {
    let a = read_rule_file(&args.rules_a)?;
    let b = read_rule_file(&args.rules_b)?;
    println!("{}", records_jaccard(&a, &b));
    Ok(())
}
