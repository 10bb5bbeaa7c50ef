//! Exact full-scan statistics and brute-force references used to check the
//! chain estimators and the queue-based selection.
//!
//! Everything here scans the whole dataset and is guarded to desk scale.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassId, EncodedDataset};
use crate::error::{Error, Result};
use crate::miner::ScoredRule;
use crate::pattern::{Item, Pattern};

pub const MAX_BRUTE_FORCE_ORDER: usize = 20;
pub const MAX_EXACT_ROWS: usize = 100_000;
pub const MAX_EXACT_FEATURES: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactStats {
    pub support_count: usize,
    /// indexed by class id
    pub per_class_count: Vec<usize>,
}

impl ExactStats {
    pub fn frequency(&self, ds: &EncodedDataset, class: ClassId) -> Result<f64> {
        let n_c = ds.class_rows(class)?.len();
        Ok(self.per_class_count[class.index()] as f64 / n_c as f64)
    }

    pub fn confidence(&self, class: ClassId) -> Result<f64> {
        let count = *self
            .per_class_count
            .get(class.index())
            .ok_or_else(|| Error::UnknownClass(class.0.to_string()))?;
        if self.support_count == 0 {
            return Err(Error::ConfidenceUndefined);
        }
        Ok(count as f64 / self.support_count as f64)
    }
}

pub fn exact_stats(ds: &EncodedDataset, s: &Pattern) -> ExactStats {
    let mut per_class_count = vec![0; ds.n_classes()];
    for (i, row) in ds.rows().enumerate() {
        if s.matches_row(row) {
            per_class_count[ds.label(i).index()] += 1;
        }
    }
    ExactStats {
        support_count: per_class_count.iter().sum(),
        per_class_count,
    }
}

/// Fraction of rows of `class` containing `s`.
pub fn exact_frequency(ds: &EncodedDataset, s: &Pattern, class: ClassId) -> Result<f64> {
    let rows = ds.class_rows(class)?;
    let hits = rows.iter().filter(|&&i| s.matches_row(ds.row(i))).count();
    Ok(hits as f64 / rows.len() as f64)
}

/// Fraction of rows containing `s` that carry label `class`.
pub fn exact_confidence(ds: &EncodedDataset, s: &Pattern, class: ClassId) -> Result<f64> {
    ds.class_rows(class)?;
    exact_stats(ds, s).confidence(class)
}

/// Tie order of the subset-selection queue, extended to a total order on the
/// subsets of one itemset: higher key first, then lower order; singletons
/// by item; larger sets by their best singleton `t` and then by the rest
/// `P \ t`.
fn precedes(a: &Pattern, b: &Pattern, key: &HashMap<Pattern, f64>) -> Ordering {
    key[b]
        .total_cmp(&key[a])
        .then(a.len().cmp(&b.len()))
        .then_with(|| {
            if a.len() <= 1 {
                return a.items().cmp(b.items());
            }
            let (ta, ra) = split_top(a, key);
            let (tb, rb) = split_top(b, key);
            precedes(&ta, &tb, key).then_with(|| precedes(&ra, &rb, key))
        })
}

fn split_top(p: &Pattern, key: &HashMap<Pattern, f64>) -> (Pattern, Pattern) {
    let top = p
        .iter()
        .map(|&it| Pattern::singleton(it))
        .min_by(|x, y| precedes(x, y, key))
        .expect("pattern is nonempty");
    let rest = Pattern::new(p.iter().copied().filter(|it| !top.contains_item(*it)))
        .expect("subset of a valid pattern");
    (top, rest)
}

/// All nonempty subsets of `s` ranked by `freq` under the queue's tie order;
/// the first `k` are returned.
pub fn brute_force_topk_subsets(
    s: &Pattern,
    k: usize,
    mut freq: impl FnMut(&Pattern) -> f64,
) -> Result<Vec<(Pattern, f64)>> {
    if s.len() > MAX_BRUTE_FORCE_ORDER {
        return Err(Error::TailTooLarge {
            order: s.len(),
            limit: MAX_BRUTE_FORCE_ORDER,
        });
    }
    let key: HashMap<Pattern, f64> = s.nonempty_subsets().map(|p| {
        let f = freq(&p);
        (p, f)
    }).collect();
    let mut all: Vec<Pattern> = key.keys().cloned().collect();
    all.sort_by(|a, b| precedes(a, b, &key));
    all.truncate(k);
    Ok(all.into_iter().map(|p| {
        let f = key[&p];
        (p, f)
    }).collect())
}

/// Level-wise enumeration of every observed pattern with support count at
/// least `min_support` and order at most `max_order`.
///
/// Patterns that never occur are not enumerated, so `min_support = 0`
/// behaves like 1.
pub fn exact_miner(
    ds: &EncodedDataset,
    min_support: usize,
    max_order: usize,
) -> Result<Vec<(Pattern, ExactStats)>> {
    if ds.n_rows() > MAX_EXACT_ROWS || ds.n_features() > MAX_EXACT_FEATURES {
        return Err(Error::ScaleGuard(format!(
            "exact mining is limited to {MAX_EXACT_ROWS} rows and {MAX_EXACT_FEATURES} features, got {}x{}",
            ds.n_rows(),
            ds.n_features()
        )));
    }
    let min_support = min_support.max(1);
    let mut out = Vec::new();
    if max_order == 0 {
        return Ok(out);
    }

    let mut singles: BTreeSet<Item> = BTreeSet::new();
    for row in ds.rows() {
        for (j, &v) in row.iter().enumerate() {
            singles.insert(Item::new(j as u32, v));
        }
    }
    let mut level: Vec<Pattern> = singles.into_iter().map(Pattern::singleton).collect();
    for order in 1..=max_order {
        let mut frequent = Vec::new();
        for p in level {
            let st = exact_stats(ds, &p);
            if st.support_count >= min_support {
                frequent.push(p.clone());
                out.push((p, st));
            }
        }
        if order == max_order || frequent.len() < 2 {
            break;
        }
        level = next_candidates(&frequent);
    }
    Ok(out)
}

/// Joins frequent sets that agree on all but their last item, then keeps
/// candidates whose every one-smaller subset is frequent.
fn next_candidates(frequent: &[Pattern]) -> Vec<Pattern> {
    let known: HashSet<&Pattern> = frequent.iter().collect();
    let mut sorted: Vec<&Pattern> = frequent.iter().collect();
    sorted.sort();
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        let prefix = &a.items()[..a.len() - 1];
        for b in &sorted[i + 1..] {
            if &b.items()[..b.len() - 1] != prefix {
                break;
            }
            let (la, lb) = (a.items()[a.len() - 1], b.items()[b.len() - 1]);
            if la.feature == lb.feature {
                continue;
            }
            let cand = Pattern::new(a.iter().copied().chain(std::iter::once(lb)))
                .expect("features are distinct");
            let all_frequent = (0..cand.len()).all(|skip| {
                let sub = Pattern::new(
                    cand.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &it)| it),
                )
                .expect("subset of a valid pattern");
                known.contains(&sub)
            });
            if all_frequent {
                out.push(cand);
            }
        }
    }
    out
}

pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Jaccard index of two rule lists keyed on (class, pattern).
pub fn rule_jaccard(a: &[ScoredRule], b: &[ScoredRule]) -> f64 {
    let key = |r: &ScoredRule| (r.target_class, r.pattern.clone());
    let sa: HashSet<_> = a.iter().map(key).collect();
    let sb: HashSet<_> = b.iter().map(key).collect();
    jaccard(&sa, &sb)
}

pub fn rmse(est: &[f64], exact: &[f64]) -> Option<f64> {
    if est.is_empty() || est.len() != exact.len() {
        return None;
    }
    let sse: f64 = est.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum();
    Some((sse / est.len() as f64).sqrt())
}

/// `None` for fewer than three points or a constant vector.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub class: String,
    pub pattern: String,
    pub est_freq: f64,
    pub exact_freq: f64,
    pub est_conf: f64,
    pub exact_conf: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rules: Vec<EvalRow>,
    pub rmse_freq: Option<f64>,
    pub rmse_conf: Option<f64>,
    pub pearson_freq: Option<f64>,
    pub pearson_conf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jaccard: Option<f64>,
}

/// Exact frequency and confidence for every rule, with aggregate error
/// metrics between estimates and exact values.
pub fn evaluate(rules: &[ScoredRule], ds: &EncodedDataset) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    if rules.is_empty() {
        return Ok(report);
    }
    let (mut ef, mut xf, mut ec, mut xc) = (vec![], vec![], vec![], vec![]);
    for r in rules {
        let st = exact_stats(ds, &r.pattern);
        let exact_freq = st.frequency(ds, r.target_class)?;
        let exact_conf = st.confidence(r.target_class).ok();
        let est_freq = r.freq_per_class[r.target_class.index()];
        ef.push(est_freq);
        xf.push(exact_freq);
        if let Some(q) = exact_conf {
            ec.push(r.confidence);
            xc.push(q);
        }
        report.rules.push(EvalRow {
            class: ds.class_name(r.target_class).to_string(),
            pattern: r.pattern.format_with(ds),
            est_freq,
            exact_freq,
            est_conf: r.confidence,
            exact_conf,
        });
    }
    report.rmse_freq = rmse(&ef, &xf);
    report.rmse_conf = rmse(&ec, &xc);
    report.pearson_freq = pearson(&ef, &xf);
    report.pearson_conf = pearson(&ec, &xc);
    Ok(report)
}
