//! End-to-end mining: chain generation per class, candidate selection from
//! the tail nodes, and confidence scoring across classes.

mod planner;

pub use planner::{guarantee_simulation, plan_parameters, simulate_hits, GuaranteeOutcome, Plan, PlannerInputs};

use std::collections::{BTreeMap, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{generate_chains, ChainSet};
use crate::dataset::{ClassId, ClassPrior, EncodedDataset};
use crate::error::{Error, Result};
use crate::estimator::{confidence, marginal_support, survival_stats};
use crate::pattern::Pattern;
use crate::pqueue::BoundedMaxQueue;
use crate::subset_select::{top_frequent_closure, FreqCounter};

/// Tails above this order are refused in naive mode.
pub const NAIVE_MAX_TAIL_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    Queue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    /// chains per class
    pub chains: usize,
    pub max_len: u32,
    /// a chain stops once its tail holds at most this many items
    pub max_order: usize,
    pub d_freq: usize,
    pub d_conf: usize,
    /// confidence threshold, naive mode only
    pub xi: f64,
    pub mode: Mode,
    pub master_seed: u64,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            chains: 1000,
            max_len: 100_000,
            max_order: 4,
            d_freq: 400,
            d_conf: 10,
            xi: 0.5,
            mode: Mode::Queue,
            master_seed: 0,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::param("number of chains must be at least 1"));
        }
        if self.max_len == 0 {
            return Err(Error::param("maximum chain length must be at least 1"));
        }
        match self.mode {
            Mode::Queue if self.d_freq == 0 => Err(Error::param("d_freq must be at least 1")),
            Mode::Naive if !(0.0..=1.0).contains(&self.xi) => {
                Err(Error::param(format!("xi = {} is outside [0, 1]", self.xi)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredRule {
    pub pattern: Pattern,
    pub target_class: ClassId,
    /// estimated frequency in each class, indexed by class id
    pub freq_per_class: Vec<f64>,
    pub confidence: f64,
    /// `Σ_c p̂^(c) p^(c)`
    pub support_estimate: f64,
}

pub type RulesByClass = BTreeMap<ClassId, Vec<ScoredRule>>;

/// One chain set per class, in class order.
pub fn build_chainsets(ds: &EncodedDataset, cfg: &MinerConfig) -> Result<Vec<ChainSet>> {
    cfg.validate()?;
    ds.classes()
        .map(|c| generate_chains(ds, c, cfg.chains, cfg.max_len, cfg.max_order, cfg.master_seed))
        .collect()
}

pub fn mine(ds: &EncodedDataset, cfg: &MinerConfig) -> Result<RulesByClass> {
    match cfg.mode {
        Mode::Naive => mine_naive(ds, cfg),
        Mode::Queue => mine_queue(ds, cfg),
    }
}

fn score(
    s: &Pattern,
    target: ClassId,
    own: Option<f64>,
    chainsets: &[ChainSet],
    priors: &ClassPrior,
) -> Result<ScoredRule> {
    let freqs: Vec<f64> = chainsets
        .iter()
        .map(|cs| match own {
            Some(f) if cs.class == target => Ok(f),
            _ => survival_stats(cs, s).frequency(),
        })
        .collect::<Result<_>>()?;
    let q = confidence(&freqs, priors, target)?;
    Ok(ScoredRule {
        pattern: s.clone(),
        target_class: target,
        support_estimate: marginal_support(&freqs, priors),
        freq_per_class: freqs,
        confidence: q,
    })
}

fn check_chainsets(ds: &EncodedDataset, chainsets: &[ChainSet]) -> Result<()> {
    let ok = chainsets.len() == ds.n_classes()
        && chainsets.iter().enumerate().all(|(i, cs)| cs.class.index() == i);
    if ok {
        Ok(())
    } else {
        Err(Error::param("need exactly one chain set per class, in class order"))
    }
}

/// Every subset of every tail node, kept when its confidence reaches `xi`.
/// Rules are ordered by confidence, then by discovery.
pub fn mine_naive(ds: &EncodedDataset, cfg: &MinerConfig) -> Result<RulesByClass> {
    let chainsets = build_chainsets(ds, cfg)?;
    mine_naive_with(ds, cfg, &chainsets)
}

pub fn mine_naive_with(
    ds: &EncodedDataset,
    cfg: &MinerConfig,
    chainsets: &[ChainSet],
) -> Result<RulesByClass> {
    check_chainsets(ds, chainsets)?;
    for cs in chainsets {
        if let Some(ch) = cs.chains.iter().find(|ch| ch.tail_order() > NAIVE_MAX_TAIL_ORDER) {
            return Err(Error::TailTooLarge {
                order: ch.tail_order(),
                limit: NAIVE_MAX_TAIL_ORDER,
            });
        }
    }
    let priors = ds.priors();
    chainsets
        .par_iter()
        .map(|cs| {
            let mut seen = HashSet::new();
            let mut rules = Vec::new();
            for tail in cs.tails() {
                for s in tail.nonempty_subsets() {
                    if !seen.insert(s.clone()) {
                        continue;
                    }
                    match score(&s, cs.class, None, chainsets, &priors) {
                        Ok(r) if r.confidence >= cfg.xi => rules.push(r),
                        Ok(_) => {}
                        Err(Error::ConfidenceUndefined) => warn!("confidence undefined for {s}"),
                        Err(e) => return Err(e),
                    }
                }
            }
            rules.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
            Ok((cs.class, rules))
        })
        .collect()
}

/// Top `d_freq` patterns of each class's tail closure, re-ranked by
/// confidence into the top `d_conf`.
pub fn mine_queue(ds: &EncodedDataset, cfg: &MinerConfig) -> Result<RulesByClass> {
    let chainsets = build_chainsets(ds, cfg)?;
    mine_queue_with(ds, cfg, &chainsets)
}

pub fn mine_queue_with(
    ds: &EncodedDataset,
    cfg: &MinerConfig,
    chainsets: &[ChainSet],
) -> Result<RulesByClass> {
    check_chainsets(ds, chainsets)?;
    let priors = ds.priors();
    let frequent: Vec<(BoundedMaxQueue<Pattern>, FreqCounter)> = chainsets
        .par_iter()
        .map(|cs| {
            let mut freq = FreqCounter::for_chains(cs);
            let q = top_frequent_closure(cs.tails().iter(), &mut freq, cfg.d_freq);
            (q, freq)
        })
        .collect();

    chainsets
        .par_iter()
        .zip(frequent.par_iter())
        .map(|(cs, (candidates, freq))| {
            let mut confident = BoundedMaxQueue::new(cfg.d_conf);
            let mut scored = std::collections::HashMap::new();
            for e in candidates.iter() {
                match score(&e.item, cs.class, freq.cached(&e.item), chainsets, &priors) {
                    Ok(r) => {
                        confident.insert(e.item.clone(), r.confidence);
                        scored.insert(e.item.clone(), r);
                    }
                    Err(Error::ConfidenceUndefined) => {
                        warn!("confidence undefined for {}, skipped", e.item)
                    }
                    Err(e) => return Err(e),
                }
            }
            let rules = confident
                .into_sorted_vec()
                .into_iter()
                .map(|e| scored.remove(&e.item).expect("every queued pattern was scored"))
                .collect();
            Ok((cs.class, rules))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class() -> EncodedDataset {
        let rows: Vec<Vec<u32>> = (0..40u32)
            .map(|i| vec![i % 2, (i / 2) % 3, u32::from(i % 5 == 0), i % 4])
            .collect();
        let labels: Vec<u32> = (0..40).map(|i| u32::from(i % 3 == 0)).collect();
        EncodedDataset::from_codes(
            (0..4).map(|j| format!("f{j}")).collect(),
            &rows,
            &labels,
            vec!["no".into(), "yes".into()],
        )
        .unwrap()
    }

    fn cfg(mode: Mode) -> MinerConfig {
        MinerConfig {
            chains: 60,
            max_len: 8,
            max_order: 0,
            d_freq: 10_000,
            d_conf: 10_000,
            xi: 0.0,
            mode,
            master_seed: 3,
        }
    }

    #[test]
    fn validation() {
        assert!(MinerConfig { chains: 0, ..cfg(Mode::Queue) }.validate().is_err());
        assert!(MinerConfig { max_len: 0, ..cfg(Mode::Queue) }.validate().is_err());
        assert!(MinerConfig { d_freq: 0, ..cfg(Mode::Queue) }.validate().is_err());
        assert!(MinerConfig { xi: 1.5, ..cfg(Mode::Naive) }.validate().is_err());
        assert!(MinerConfig { d_conf: 0, ..cfg(Mode::Queue) }.validate().is_ok());
    }

    #[test]
    fn xi_zero_keeps_every_subset() {
        let ds = two_class();
        let c = cfg(Mode::Naive);
        let cs = build_chainsets(&ds, &c).unwrap();
        let rules = mine_naive_with(&ds, &c, &cs).unwrap();
        for set in &cs {
            let all: HashSet<Pattern> = set.tails().iter().flat_map(|t| t.nonempty_subsets()).collect();
            let got: HashSet<Pattern> = rules[&set.class].iter().map(|r| r.pattern.clone()).collect();
            assert_eq!(got, all);
        }
    }

    #[test]
    fn xi_one_keeps_only_certain_rules() {
        let ds = two_class();
        let c = MinerConfig { xi: 1.0, ..cfg(Mode::Naive) };
        for rules in mine_naive(&ds, &c).unwrap().values() {
            assert!(rules.iter().all(|r| r.confidence == 1.0));
        }
    }

    #[test]
    fn naive_refuses_wide_tails() {
        let rows: Vec<Vec<u32>> = vec![vec![0; 21]; 3];
        let ds = EncodedDataset::from_codes(
            (0..21).map(|j| format!("f{j}")).collect(),
            &rows,
            &[0, 0, 0],
            vec!["c".into()],
        )
        .unwrap();
        let c = MinerConfig { chains: 2, max_len: 3, ..cfg(Mode::Naive) };
        assert!(matches!(mine_naive(&ds, &c), Err(Error::TailTooLarge { order: 21, .. })));
    }

    #[test]
    fn queue_mode_agrees_with_naive() {
        let ds = two_class();
        for xi in [0.0, 0.3, 0.6, 0.9] {
            let naive = mine_naive(&ds, &MinerConfig { xi, ..cfg(Mode::Naive) }).unwrap();
            let queue = mine_queue(&ds, &cfg(Mode::Queue)).unwrap();
            for (class, rules) in &naive {
                let a: HashSet<&Pattern> = rules.iter().map(|r| &r.pattern).collect();
                let b: HashSet<&Pattern> = queue[class]
                    .iter()
                    .filter(|r| r.confidence >= xi)
                    .map(|r| &r.pattern)
                    .collect();
                assert_eq!(a, b, "xi={xi}");
            }
        }
    }

    #[test]
    fn queue_output_is_capped_and_ordered() {
        let ds = two_class();
        let c = MinerConfig { d_freq: 50, d_conf: 5, ..cfg(Mode::Queue) };
        let out = mine_queue(&ds, &c).unwrap();
        for rules in out.values() {
            assert!(rules.len() <= 5);
            assert!(rules.windows(2).all(|w| w[0].confidence >= w[1].confidence));
        }
        let none = mine_queue(&ds, &MinerConfig { d_conf: 0, ..c }).unwrap();
        assert!(none.values().all(|r| r.is_empty()));
    }

    #[test]
    fn single_class_rules_are_certain() {
        let rows: Vec<Vec<u32>> = (0..10u32).map(|i| vec![i % 2, i % 3]).collect();
        let ds = EncodedDataset::from_codes(vec!["a".into(), "b".into()], &rows, &[0; 10], vec!["only".into()])
            .unwrap();
        let out = mine_queue(&ds, &MinerConfig { d_conf: 20, max_len: 2, ..cfg(Mode::Queue) }).unwrap();
        assert!(!out[&ClassId(0)].is_empty());
        assert!(out[&ClassId(0)].iter().all(|r| r.confidence == 1.0));
    }
}
