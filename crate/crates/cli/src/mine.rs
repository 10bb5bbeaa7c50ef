use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use log::info;
use ric_core::chain::{generate_chains, ChainSet};
use ric_core::dataset::{ClassId, EncodedDataset};
use ric_core::miner::{mine_naive_with, mine_queue_with, MinerConfig, Mode};
use ric_core::rules::write_rules;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{usage, InputArgs};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Naive,
    Queue,
}

#[derive(Args, Debug)]
pub struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "RIC_MODE", value_enum, default_value = "queue")]
    mode: ModeArg,
    /// chains per class
    #[arg(long, env = "RIC_CHAINS", default_value_t = 1000)]
    chains: usize,
    /// maximum chain length
    #[arg(long, env = "RIC_MAX_LEN", default_value_t = 100_000)]
    max_len: u32,
    /// stop a chain once its tail has at most this many items
    #[arg(long, env = "RIC_MAX_ORDER", default_value_t = 4)]
    max_order: usize,
    /// frequent-pattern queue size (queue mode, default 400)
    #[arg(long, env = "RIC_DFREQ")]
    dfreq: Option<usize>,
    /// rules kept per class (queue mode, default 10)
    #[arg(long, env = "RIC_DCONF")]
    dconf: Option<usize>,
    /// confidence threshold (naive mode, default 0.5)
    #[arg(long, env = "RIC_XI")]
    xi: Option<f64>,
    /// master seed; drawn at random and recorded when absent
    #[arg(long, env = "RIC_SEED")]
    seed: Option<u64>,
    /// rule file; stdout when absent
    #[arg(long, env = "RIC_OUTPUT")]
    output: Option<PathBuf>,
    /// run manifest; defaults to `<output>.manifest.json` when --output is set
    #[arg(long, env = "RIC_MANIFEST")]
    manifest: Option<PathBuf>,
    /// worker threads
    #[arg(long, env = "RIC_THREADS")]
    threads: Option<usize>,
    /// directory for cached chain sets
    #[arg(long, env = "RIC_CHAIN_CACHE")]
    chain_cache: Option<PathBuf>,
}

#[derive(Serialize)]
struct BinEntry {
    column: String,
    requested_bins: usize,
    effective_bins: usize,
}

#[derive(Serialize)]
struct DatasetSummary {
    rows: usize,
    features: usize,
    classes: Vec<String>,
    priors: Vec<f64>,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'static str,
    input: String,
    input_sha256: String,
    label_col: String,
    uncommon_threshold: usize,
    bin_numeric: Vec<String>,
    binning: Vec<BinEntry>,
    dataset: DatasetSummary,
    config: MinerConfig,
    seed_source: &'static str,
    threads: Option<usize>,
    output: Option<String>,
    rules_sha256: String,
    rules_per_class: BTreeMap<String, usize>,
    /// arguments that reproduce this run
    rerun: Vec<String>,
}

impl MineArgs {
    fn config(&self, seed: u64) -> Result<MinerConfig> {
        let mode = match self.mode {
            ModeArg::Naive => Mode::Naive,
            ModeArg::Queue => Mode::Queue,
        };
        match mode {
            Mode::Queue if self.xi.is_some() => return Err(usage("--xi applies to naive mode only")),
            Mode::Naive if self.dfreq.is_some() || self.dconf.is_some() => {
                return Err(usage("--dfreq and --dconf apply to queue mode only"))
            }
            _ => {}
        }
        let defaults = MinerConfig::default();
        let cfg = MinerConfig {
            chains: self.chains,
            max_len: self.max_len,
            max_order: self.max_order,
            d_freq: self.dfreq.unwrap_or(defaults.d_freq),
            d_conf: self.dconf.unwrap_or(defaults.d_conf),
            xi: self.xi.unwrap_or(defaults.xi),
            mode,
            master_seed: seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn rerun_args(&self, cfg: &MinerConfig) -> Vec<String> {
        let mut a: Vec<String> = vec!["ric".into(), "mine".into()];
        let mut push = |k: &str, v: String| {
            a.push(format!("--{k}"));
            a.push(v);
        };
        push("input", self.input.input.display().to_string());
        push("label-col", self.input.label_col.clone());
        push("uncommon-threshold", self.input.uncommon_threshold.to_string());
        for b in &self.input.bin_numeric {
            push("bin-numeric", b.clone());
        }
        match cfg.mode {
            Mode::Queue => {
                push("mode", "queue".into());
                push("dfreq", cfg.d_freq.to_string());
                push("dconf", cfg.d_conf.to_string());
            }
            Mode::Naive => {
                push("mode", "naive".into());
                push("xi", cfg.xi.to_string());
            }
        }
        push("chains", cfg.chains.to_string());
        push("max-len", cfg.max_len.to_string());
        push("max-order", cfg.max_order.to_string());
        push("seed", cfg.master_seed.to_string());
        if let Some(o) = &self.output {
            push("output", o.display().to_string());
        }
        a
    }
}

pub fn run(args: MineArgs) -> Result<()> {
    let (seed, seed_source) = match args.seed {
        Some(s) => (s, "flag"),
        None => (rand::random::<u64>(), "drawn"),
    };
    let cfg = args.config(seed)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }

    let (ingested, input_sha) = args.input.load()?;
    let ds = &ingested.dataset;
    info!("{} rows, {} features, {} classes, seed {seed}", ds.n_rows(), ds.n_features(), ds.n_classes());

    let chainsets = match &args.chain_cache {
        Some(dir) => cached_chainsets(dir, ds, &cfg, &cache_tag(&args.input, &input_sha))?,
        None => ds
            .classes()
            .map(|c| generate_chains(ds, c, cfg.chains, cfg.max_len, cfg.max_order, cfg.master_seed))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let rules = match cfg.mode {
        Mode::Naive => mine_naive_with(ds, &cfg, &chainsets)?,
        Mode::Queue => mine_queue_with(ds, &cfg, &chainsets)?,
    };

    let mut buf = Vec::new();
    write_rules(&mut buf, &rules, ds)?;
    match &args.output {
        Some(path) => fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(&buf)?,
    }

    let manifest_path = args.manifest.clone().or_else(|| {
        args.output.as_ref().map(|o| {
            let mut p = o.clone().into_os_string();
            p.push(".manifest.json");
            PathBuf::from(p)
        })
    });
    if let Some(path) = manifest_path {
        let manifest = Manifest {
            tool: "ric",
            version: env!("CARGO_PKG_VERSION"),
            core_version: ric_core::VERSION,
            command: "mine",
            input: args.input.input.display().to_string(),
            input_sha256: input_sha,
            label_col: args.input.label_col.clone(),
            uncommon_threshold: args.input.uncommon_threshold,
            bin_numeric: args.input.bin_numeric.clone(),
            binning: ingested
                .bins
                .iter()
                .map(|b| BinEntry {
                    column: b.column.clone(),
                    requested_bins: b.requested_bins,
                    effective_bins: b.effective_bins,
                })
                .collect(),
            dataset: DatasetSummary {
                rows: ds.n_rows(),
                features: ds.n_features(),
                classes: ds.class_names().to_vec(),
                priors: ds.classes().map(|c| ds.priors().get(c)).collect(),
            },
            config: cfg.clone(),
            seed_source,
            threads: args.threads,
            output: args.output.as_ref().map(|o| o.display().to_string()),
            rules_sha256: hex::encode(Sha256::digest(&buf)),
            rules_per_class: rules.iter().map(|(c, r)| (ds.class_name(*c).to_string(), r.len())).collect(),
            rerun: args.rerun_args(&cfg),
        };
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

/// Everything besides the miner settings that shapes the chains: input
/// bytes and how they were encoded.
fn cache_tag(input: &InputArgs, input_sha: &str) -> String {
    format!(
        "{input_sha}|{}|{}|{}",
        input.label_col,
        input.uncommon_threshold,
        input.bin_numeric.join(";")
    )
}

fn cache_path(dir: &Path, tag: &str, class: ClassId, cfg: &MinerConfig) -> PathBuf {
    let key = format!(
        "{tag}|{}|{}|{}|{}|{}",
        class.0, cfg.chains, cfg.max_len, cfg.max_order, cfg.master_seed
    );
    let digest = hex::encode(Sha256::digest(key.as_bytes()));
    dir.join(format!("{}.chains", &digest[..32]))
}

fn cached_chainsets(dir: &Path, ds: &EncodedDataset, cfg: &MinerConfig, tag: &str) -> Result<Vec<ChainSet>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Vec::new();
    for c in ds.classes() {
        let path = cache_path(dir, tag, c, cfg);
        if path.exists() {
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let cs = ChainSet::read_from(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            let fits = cs.class == c
                && cs.len() == cfg.chains
                && cs.d_max == cfg.max_len
                && cs.k_stop == cfg.max_order
                && cs.chains.iter().all(|ch| ch.head().len() == ds.n_features());
            if !fits {
                bail!("cached chains in {} do not match this run", path.display());
            }
            info!("class {}: chains loaded from {}", ds.class_name(c), path.display());
            out.push(cs);
        } else {
            let cs = generate_chains(ds, c, cfg.chains, cfg.max_len, cfg.max_order, cfg.master_seed)?;
            // write then rename, so an interrupted run never leaves a partial file
            let tmp = path.with_extension("tmp");
            let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
            cs.write_to(&mut w)?;
            w.flush()?;
            drop(w);
            fs::rename(&tmp, &path)?;
            info!("class {}: chains cached in {}", ds.class_name(c), path.display());
            out.push(cs);
        }
    }
    Ok(out)
}
