//! JSON-lines rule files: one object per rule,
//! `{class, items: [{feature, value}], freq: {class: estimate}, confidence, support_estimate}`.
//!
//! `feature` is the feature's column index and `value` its category name, so
//! files stay readable and are resolved back to codes against a dataset.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::miner::{RulesByClass, ScoredRule};
use crate::pattern::{Item, Pattern};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemRecord {
    pub feature: u32,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub class: String,
    pub items: Vec<ItemRecord>,
    pub freq: BTreeMap<String, f64>,
    pub confidence: f64,
    pub support_estimate: f64,
}

impl RuleRecord {
    pub fn from_rule(rule: &ScoredRule, ds: &EncodedDataset) -> Self {
        RuleRecord {
            class: ds.class_name(rule.target_class).to_string(),
            items: rule
                .pattern
                .iter()
                .map(|it| ItemRecord {
                    feature: it.feature,
                    value: ds.category_name(it.feature, it.code).to_string(),
                })
                .collect(),
            freq: ds
                .class_names()
                .iter()
                .cloned()
                .zip(rule.freq_per_class.iter().copied())
                .collect(),
            confidence: rule.confidence,
            support_estimate: rule.support_estimate,
        }
    }

    /// Resolves class and category names against `ds`.
    pub fn to_rule(&self, ds: &EncodedDataset) -> Result<ScoredRule> {
        let target = ds
            .class_id(&self.class)
            .ok_or_else(|| Error::UnknownClass(self.class.clone()))?;
        let items = self
            .items
            .iter()
            .map(|it| {
                if it.feature as usize >= ds.n_features() {
                    return Err(Error::RuleFormat(format!("feature index {} out of range", it.feature)));
                }
                let code = ds.code_of(it.feature, &it.value).ok_or_else(|| {
                    Error::RuleFormat(format!("unknown value {:?} for feature {}", it.value, it.feature))
                })?;
                Ok(Item::new(it.feature, code))
            })
            .collect::<Result<Vec<_>>>()?;
        let pattern = Pattern::new(items)?;
        let freq_per_class = ds
            .class_names()
            .iter()
            .map(|c| self.freq.get(c).copied().unwrap_or(0.0))
            .collect();
        Ok(ScoredRule {
            pattern,
            target_class: target,
            freq_per_class,
            confidence: self.confidence,
            support_estimate: self.support_estimate,
        })
    }

    /// Identity used when comparing rule sets: class plus sorted items.
    pub fn key(&self) -> (String, Vec<ItemRecord>) {
        let mut items = self.items.clone();
        items.sort();
        (self.class.clone(), items)
    }
}

/// Rules in class order, each class in its ranked order.
pub fn write_rules<W: Write>(mut out: W, rules: &RulesByClass, ds: &EncodedDataset) -> Result<()> {
    for list in rules.values() {
        for r in list {
            let line = serde_json::to_string(&RuleRecord::from_rule(r, ds))
                .map_err(|e| Error::RuleFormat(e.to_string()))?;
            writeln!(out, "{line}").map_err(|e| Error::io("<rules output>", e))?;
        }
    }
    out.flush().map_err(|e| Error::io("<rules output>", e))
}

/// Blank lines are skipped; a malformed line is reported by number.
pub fn read_rules<R: BufRead>(input: R) -> Result<Vec<RuleRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<rules input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| Error::RuleFormat(format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Jaccard index of two rule files keyed on (class, pattern).
pub fn records_jaccard(a: &[RuleRecord], b: &[RuleRecord]) -> f64 {
    let sa: HashSet<_> = a.iter().map(RuleRecord::key).collect();
    let sb: HashSet<_> = b.iter().map(RuleRecord::key).collect();
    crate::oracle::jaccard(&sa, &sb)
}
