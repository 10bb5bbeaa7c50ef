//! Level-wise selection of the most frequent subsets of an itemset through a
//! bounded priority queue.
//!
//! A `k`-set is built as `{a} ∪ b` where `a` is its highest-priority item and
//! `b` the remaining `(k-1)`-set, which by anti-monotonicity is served after
//! `a`. Only pairs whose parts are both still held in the result queue are
//! ever evaluated, so the number of frequency evaluations stays polynomial
//! in `|s|` and the queue capacity.

use std::collections::HashMap;

use crate::chain::ChainSet;
use crate::estimator::survival_stats;
use crate::pattern::Pattern;
use crate::pqueue::BoundedMaxQueue;

/// Memoizing frequency source that counts every request.
pub struct FreqCounter<'a> {
    f: Box<dyn Fn(&Pattern) -> f64 + Send + Sync + 'a>,
    memo: HashMap<Pattern, f64>,
    evaluations: u64,
}

impl<'a> FreqCounter<'a> {
    pub fn new(f: impl Fn(&Pattern) -> f64 + Send + Sync + 'a) -> Self {
        FreqCounter {
            f: Box::new(f),
            memo: HashMap::new(),
            evaluations: 0,
        }
    }

    /// Chain-estimated frequency within the chain set's class.
    pub fn for_chains(cs: &'a ChainSet) -> Self {
        // nonempty patterns always have K + I ≥ M ≥ 1
        Self::new(move |s| survival_stats(cs, s).frequency().unwrap_or(0.0))
    }

    pub fn eval(&mut self, s: &Pattern) -> f64 {
        self.evaluations += 1;
        if let Some(&v) = self.memo.get(s) {
            return v;
        }
        let v = (self.f)(s);
        self.memo.insert(s.clone(), v);
        v
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn reset_evaluations(&mut self) {
        self.evaluations = 0;
    }

    /// Previously computed value, without counting a request.
    pub fn cached(&self, s: &Pattern) -> Option<f64> {
        self.memo.get(s).copied()
    }
}

/// Merges the frequent subsets of `s` into `queue`.
///
/// Starting from an empty queue of capacity `d`, the result holds the `d`
/// most frequent nonempty subsets of `s`. Starting from earlier contents, it
/// holds the `d` most frequent of those contents together with the subsets
/// of `s`. Candidates are only formed from parts that are subsets of `s`, so
/// earlier contents never combine with the new itemset.
pub fn insert_freq_subsets(queue: &mut BoundedMaxQueue<Pattern>, s: &Pattern, freq: &mut FreqCounter) {
    for &x in s.iter() {
        let single = Pattern::singleton(x);
        let p = freq.eval(&single);
        queue.insert(single, p);
    }
    for k in 2..=s.len() {
        let mut a_queue = queue.clone();
        while a_queue.len() > 1 {
            let (a, _) = a_queue.extract_max().expect("queue holds more than one entry");
            a_queue.shrink();
            if !(a.len() == 1 && queue.contains(&a) && a.is_subset(s)) {
                continue;
            }
            let mut b_queue = a_queue.clone();
            while !b_queue.is_empty() {
                let (b, _) = b_queue.extract_max().expect("queue is nonempty");
                b_queue.shrink();
                if !(b.len() == k - 1 && queue.contains(&b) && b.is_subset(s)) {
                    continue;
                }
                if !a.intersect(&b).is_empty() {
                    continue;
                }
                let Ok(ab) = a.union_disjoint(&b) else {
                    continue;
                };
                let p = freq.eval(&ab);
                queue.insert(ab.clone(), p);
                a_queue.insert(ab.clone(), p);
                b_queue.insert(ab, p);
            }
        }
    }
}

/// Runs subset selection over every tail in order into one queue.
pub fn top_frequent_closure<'t>(
    tails: impl IntoIterator<Item = &'t Pattern>,
    freq: &mut FreqCounter,
    d_freq: usize,
) -> BoundedMaxQueue<Pattern> {
    let mut queue = BoundedMaxQueue::new(d_freq);
    for tail in tails {
        if !tail.is_empty() {
            insert_freq_subsets(&mut queue, tail, freq);
        }
    }
    queue
}

/// Closure over the tails of a chain set, with chain-estimated frequencies.
pub fn closure_of_chains(cs: &ChainSet, d_freq: usize) -> (BoundedMaxQueue<Pattern>, u64) {
    let mut freq = FreqCounter::for_chains(cs);
    let tails = cs.tails();
    let q = top_frequent_closure(tails.iter(), &mut freq, d_freq);
    (q, freq.evaluations())
}
