//! Synthetic datasets with known frequencies for simulation and testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::EncodedDataset;
use crate::error::Result;
use crate::pattern::{Item, Pattern};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}")).collect()
}

/// Single-class data where feature `j` carries code 1 on exactly
/// `round(freqs[j] · n)` rows (shuffled independently per feature) and code
/// 0 elsewhere. With `constant` an extra all-zero feature is appended, so
/// chains never empty out and always reach their configured length.
pub fn planted(n: usize, freqs: &[f64], constant: bool, seed: u64) -> Result<EncodedDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<u32>> = freqs
        .iter()
        .map(|&p| {
            let k = (p * n as f64).round() as usize;
            let mut col: Vec<u32> = (0..n).map(|i| u32::from(i < k)).collect();
            col.shuffle(&mut rng);
            col
        })
        .collect();
    if constant {
        cols.push(vec![0; n]);
    }
    let rows: Vec<Vec<u32>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    EncodedDataset::from_codes(names("x", cols.len()), &rows, &vec![0; n], vec!["c".into()])
}

/// The planted item of [`planted`] for feature `j`.
pub fn planted_item(j: u32) -> Pattern {
    Pattern::singleton(Item::new(j, 1))
}

/// One feature, one block of `n_per_class` rows per class; in class `c`
/// exactly `round(freqs[c] · n_per_class)` rows carry code 1. A constant
/// second feature keeps chains at full length.
pub fn planted_classes(n_per_class: usize, freqs: &[f64]) -> Result<EncodedDataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &p) in freqs.iter().enumerate() {
        let k = (p * n_per_class as f64).round() as usize;
        for i in 0..n_per_class {
            rows.push(vec![u32::from(i < k), 0]);
            labels.push(c as u32);
        }
    }
    EncodedDataset::from_codes(names("x", 2), &rows, &labels, names("class", freqs.len()))
}

/// Uniform random codes: `n` rows, `p` features of cardinality `card`,
/// labels uniform over `n_classes`.
pub fn random_categorical<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p: usize,
    card: u32,
    n_classes: u32,
) -> Result<EncodedDataset> {
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| (0..p).map(|_| rng.gen_range(0..card)).collect())
        .collect();
    let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    EncodedDataset::from_codes(names("f", p), &rows, &labels, names("class", n_classes as usize))
}

/// An interaction planted in a fraction of one class's rows.
#[derive(Clone, Debug)]
pub struct PlantedRule {
    pub class: u32,
    pub items: Vec<(u32, u32)>,
    pub rate: f64,
}

/// Two-class data (labels drawn uniformly) with planted interactions on top
/// of uniform background codes.
pub fn interaction_dataset(n: usize, p: usize, card: u32, rules: &[PlantedRule], seed: u64) -> Result<EncodedDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let class = rng.gen_range(0..2u32);
        let mut row: Vec<u32> = (0..p).map(|_| rng.gen_range(0..card)).collect();
        for r in rules.iter().filter(|r| r.class == class) {
            if rng.gen_bool(r.rate) {
                for &(j, v) in &r.items {
                    row[j as usize] = v;
                }
            }
        }
        rows.push(row);
        labels.push(class);
    }
    EncodedDataset::from_codes(names("f", p), &rows, &labels, names("class", 2))
}

/// The default consistency benchmark: 12 features of cardinality 4 with
/// three planted interactions.
pub fn consistency_dataset(n: usize, seed: u64) -> Result<EncodedDataset> {
    let rules = [
        PlantedRule { class: 1, items: vec![(0, 0), (1, 0), (2, 0)], rate: 0.35 },
        PlantedRule { class: 1, items: vec![(3, 1), (4, 1)], rate: 0.25 },
        PlantedRule { class: 0, items: vec![(5, 2), (6, 2), (7, 2)], rate: 0.3 },
    ];
    interaction_dataset(n, 12, 4, &rules, seed)
}
