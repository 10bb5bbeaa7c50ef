//! Capacity-bounded max-priority queue.
//!
//! Priority is the key (higher first), then the insertion sequence number
//! (earlier first). When the queue overflows the lowest-priority entry goes,
//! so among equal minimal keys the most recently enqueued one is dropped.
//! Membership is by value and a value is held at most once.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Entry<T> {
    pub item: T,
    pub key: f64,
    pub seq: u64,
}

/// `Ordering::Greater` means `(ka, sa)` is served before `(kb, sb)`.
fn priority(ka: f64, sa: u64, kb: f64, sb: u64) -> Ordering {
    ka.total_cmp(&kb).then(sb.cmp(&sa))
}

#[derive(Clone, Debug)]
pub struct BoundedMaxQueue<T: Clone + Eq + Hash> {
    capacity: usize,
    // ascending priority: the next eviction victim is at the front, the
    // next extraction at the back
    entries: Vec<Entry<T>>,
    index: HashMap<T, (f64, u64)>,
    next_seq: u64,
}

impl<T: Clone + Eq + Hash> BoundedMaxQueue<T> {
    pub fn new(capacity: usize) -> Self {
        BoundedMaxQueue {
            capacity,
            entries: Vec::with_capacity(capacity.min(4096)),
            index: HashMap::with_capacity(capacity.min(4096)),
            next_seq: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, item: &T) -> bool {
        self.index.contains_key(item)
    }

    pub fn key_of(&self, item: &T) -> Option<f64> {
        self.index.get(item).map(|&(k, _)| k)
    }

    fn position(&self, key: f64, seq: u64) -> std::result::Result<usize, usize> {
        self.entries
            .binary_search_by(|e| priority(e.key, e.seq, key, seq))
    }

    fn place(&mut self, entry: Entry<T>) {
        let at = match self.position(entry.key, entry.seq) {
            Ok(i) | Err(i) => i,
        };
        self.index.insert(entry.item.clone(), (entry.key, entry.seq));
        self.entries.insert(at, entry);
    }

    fn remove_at(&mut self, i: usize) -> Entry<T> {
        let e = self.entries.remove(i);
        self.index.remove(&e.item);
        e
    }

    /// Offers `item` with `key`. Returns whatever left the queue as a
    /// result: an evicted entry, or `item` itself when it did not make it in.
    ///
    /// Re-offering a held value raises its key if the new key is higher and
    /// keeps its original sequence number; otherwise nothing changes.
    pub fn insert(&mut self, item: T, key: f64) -> Option<T> {
        if self.capacity == 0 {
            return Some(item);
        }
        if let Some(&(old_key, seq)) = self.index.get(&item) {
            if key > old_key {
                let i = self
                    .position(old_key, seq)
                    .expect("indexed entry must be present");
                let mut e = self.remove_at(i);
                e.key = key;
                self.place(e);
            }
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        if self.entries.len() >= self.capacity {
            let worst = &self.entries[0];
            if priority(key, seq, worst.key, worst.seq) == Ordering::Less {
                return Some(item);
            }
            self.place(Entry { item, key, seq });
            return Some(self.remove_at(0).item);
        }
        self.place(Entry { item, key, seq });
        None
    }

    pub fn peek_max(&self) -> Option<&Entry<T>> {
        self.entries.last()
    }

    pub fn extract_max(&mut self) -> Result<(T, f64)> {
        match self.entries.pop() {
            Some(e) => {
                self.index.remove(&e.item);
                Ok((e.item, e.key))
            }
            None => Err(Error::EmptyQueue),
        }
    }

    /// Lowers the capacity by one, evicting the minimum if now over capacity.
    pub fn shrink(&mut self) -> Option<T> {
        self.capacity = self.capacity.saturating_sub(1);
        if self.entries.len() > self.capacity {
            Some(self.remove_at(0).item)
        } else {
            None
        }
    }

    /// Entries from highest to lowest priority.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Entry<T>> + ExactSizeIterator {
        self.entries.iter().rev()
    }

    pub fn into_sorted_vec(self) -> Vec<Entry<T>> {
        let mut v = self.entries;
        v.reverse();
        v
    }
}
