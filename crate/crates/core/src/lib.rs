//! Random intersection chains for mining frequent and confident
//! interactions of categorical features.
//!
//! Chains are drawn per class from the encoded data; their tail nodes supply
//! candidate patterns, whose frequencies are estimated from survival depths
//! along the chains and turned into confidences with the class priors.

pub mod chain;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod miner;
pub mod oracle;
pub mod pattern;
pub mod pqueue;
pub mod rules;
pub mod subset_select;
pub mod synth;

pub use chain::{generate_chain, generate_chains, Chain, ChainSet};
pub use dataset::{ingest_csv, ClassId, ClassPrior, EncodedDataset};
pub use error::{Error, Result};
pub use miner::{mine, mine_naive, mine_queue, MinerConfig, Mode, ScoredRule};
pub use pattern::{Item, Pattern};
pub use pqueue::BoundedMaxQueue;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
