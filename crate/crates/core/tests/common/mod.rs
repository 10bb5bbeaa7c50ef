#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ric_core::chain::generate_chains;
use ric_core::dataset::ClassId;
use ric_core::estimator::survival_stats;
use ric_core::oracle::brute_force_topk_subsets;
use ric_core::pattern::{Item, Pattern};
use ric_core::pqueue::BoundedMaxQueue;
use ric_core::subset_select::{insert_freq_subsets, FreqCounter};
use ric_core::synth::random_categorical;
use std::collections::BTreeSet;

pub struct SubsetTrial {
    pub order: usize,
    pub d_freq: usize,
    pub evaluations: u64,
    pub bound: u64,
    pub matches: bool,
}

/// One randomized comparison of queue-based subset selection against full
/// enumeration, both ranking by chain-estimated frequencies.
pub fn subset_trial(seed: u64) -> SubsetTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = 12;
    let card = rng.gen_range(2..=4);
    let ds = random_categorical(&mut rng, 60, p, card, 1).unwrap();
    let m = rng.gen_range(20..=200);
    let d = rng.gen_range(1..=4);
    let cs = generate_chains(&ds, ClassId(0), m, d, 0, rng.gen()).unwrap();
    let order = rng.gen_range(1..=12);
    let d_freq = rng.gen_range(1..=64);
    // s: a random order-sized slice of a sampled row, so its subsets have
    // nonzero and varied estimated frequencies
    let row = ds.row(rng.gen_range(0..ds.n_rows()));
    let mut feats: Vec<u32> = (0..p as u32).collect();
    for i in 0..order {
        let j = rng.gen_range(i..p);
        feats.swap(i, j);
    }
    let s = Pattern::new(feats[..order].iter().map(|&j| Item::new(j, row[j as usize]))).unwrap();

    let mut freq = FreqCounter::for_chains(&cs);
    let mut q = BoundedMaxQueue::new(d_freq);
    insert_freq_subsets(&mut q, &s, &mut freq);
    let got: BTreeSet<Pattern> = q.iter().map(|e| e.item.clone()).collect();
    let want: BTreeSet<Pattern> = brute_force_topk_subsets(&s, d_freq, |x| {
        survival_stats(&cs, x).frequency().unwrap()
    })
    .unwrap()
    .into_iter()
    .map(|(x, _)| x)
    .collect();
    let o = order as u64;
    let df = d_freq as u64;
    SubsetTrial {
        order,
        d_freq,
        evaluations: freq.evaluations(),
        bound: 2 * o * df * df + o,
        matches: got == want,
    }
}

pub struct ClosureTrial {
    pub got: Vec<(Pattern, f64)>,
    /// every pattern of the closure with its estimated frequency
    pub closure: Vec<(Pattern, f64)>,
    pub d_freq: usize,
}

/// Closure over all tails of a random chain set.
pub fn closure_trial(seed: u64) -> ClosureTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.gen_range(3..=10);
    let card = rng.gen_range(2..=3);
    let ds = random_categorical(&mut rng, 40, p, card, 1).unwrap();
    let m = rng.gen_range(5..=60);
    let d = rng.gen_range(1..=3);
    let cs = generate_chains(&ds, ClassId(0), m, d, 0, rng.gen()).unwrap();
    let d_freq = rng.gen_range(1..=64);
    let mut freq = FreqCounter::for_chains(&cs);
    let tails = cs.tails();
    let q = ric_core::subset_select::top_frequent_closure(tails.iter(), &mut freq, d_freq);
    let all: BTreeSet<Pattern> = tails.iter().flat_map(|t| t.nonempty_subsets()).collect();
    let closure = all
        .into_iter()
        .map(|x| {
            let f = survival_stats(&cs, &x).frequency().unwrap();
            (x, f)
        })
        .collect();
    ClosureTrial {
        got: q.iter().map(|e| (e.item.clone(), e.key)).collect(),
        closure,
        d_freq,
    }
}

/// Sorted-list reference for the bounded queue: entries are
/// (item, key, seq) and every operation is a linear scan.
#[derive(Clone)]
pub struct QueueModel {
    pub capacity: usize,
    pub entries: Vec<(u8, f64, u64)>,
    next_seq: u64,
}

fn served_before(a: &(u8, f64, u64), b: &(u8, f64, u64)) -> bool {
    a.1 > b.1 || (a.1 == b.1 && a.2 < b.2)
}

impl QueueModel {
    pub fn new(capacity: usize) -> Self {
        QueueModel { capacity, entries: vec![], next_seq: 0 }
    }

    fn worst(&self) -> Option<usize> {
        (0..self.entries.len()).reduce(|w, i| if served_before(&self.entries[w], &self.entries[i]) { i } else { w })
    }

    fn best(&self) -> Option<usize> {
        (0..self.entries.len()).reduce(|b, i| if served_before(&self.entries[i], &self.entries[b]) { i } else { b })
    }

    pub fn insert(&mut self, item: u8, key: f64) -> Option<u8> {
        if self.capacity == 0 {
            return Some(item);
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.0 == item) {
            if key > e.1 {
                e.1 = key;
            }
            return None;
        }
        self.entries.push((item, key, self.next_seq));
        self.next_seq += 1;
        if self.entries.len() > self.capacity {
            let w = self.worst().unwrap();
            return Some(self.entries.remove(w).0);
        }
        None
    }

    pub fn extract_max(&mut self) -> Option<(u8, f64)> {
        let b = self.best()?;
        let e = self.entries.remove(b);
        Some((e.0, e.1))
    }

    pub fn shrink(&mut self) -> Option<u8> {
        self.capacity = self.capacity.saturating_sub(1);
        if self.entries.len() > self.capacity {
            let w = self.worst().unwrap();
            return Some(self.entries.remove(w).0);
        }
        None
    }

    /// Contents from first to last served.
    pub fn ordered(&self) -> Vec<(u8, f64)> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
        v.into_iter().map(|e| (e.0, e.1)).collect()
    }
}

/// Runs one random operation sequence on the queue and the model; true when
/// every result and every intermediate state agree.
pub fn queue_model_trial(seed: u64) -> bool {
    const KEYS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = rng.gen_range(0..=8);
    let mut q: BoundedMaxQueue<u8> = BoundedMaxQueue::new(cap);
    let mut model = QueueModel::new(cap);
    let ops = rng.gen_range(1..=200);
    for _ in 0..ops {
        let roll = rng.gen_range(0..100);
        let agree = if roll < 70 {
            let item = rng.gen_range(0..12u8);
            let key = KEYS[rng.gen_range(0..KEYS.len())];
            q.insert(item, key) == model.insert(item, key)
        } else if roll < 85 {
            q.extract_max().ok() == model.extract_max()
        } else if roll < 90 {
            q.shrink() == model.shrink()
        } else if roll < 95 {
            let item = rng.gen_range(0..12u8);
            q.contains(&item) == model.entries.iter().any(|e| e.0 == item)
        } else {
            // continue on a copy; the original must be left untouched
            let before: Vec<(u8, f64)> = q.iter().map(|e| (e.item, e.key)).collect();
            let mut copy = q.clone();
            let _ = copy.extract_max();
            let untouched = before == q.iter().map(|e| (e.item, e.key)).collect::<Vec<_>>();
            q = q.clone();
            untouched
        };
        let state: Vec<(u8, f64)> = q.iter().map(|e| (e.item, e.key)).collect();
        if !agree || state != model.ordered() || q.capacity() != model.capacity {
            return false;
        }
    }
    true
}
