//! Itemsets over label-encoded features.
//!
//! An [`Item`] is the condition `feature == code`; a [`Pattern`] is a
//! conjunction of items with at most one item per feature, kept sorted by
//! feature index so equal patterns compare, hash and serialize identically.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub feature: u32,
    pub code: u32,
}

impl Item {
    pub fn new(feature: u32, code: u32) -> Self {
        Item { feature, code }
    }
}

type Items = SmallVec<[Item; 6]>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern {
    items: Items,
}

impl Pattern {
    pub fn empty() -> Self {
        Pattern::default()
    }

    pub fn singleton(item: Item) -> Self {
        let mut items = Items::new();
        items.push(item);
        Pattern { items }
    }

    /// Builds a canonical pattern from items in any order. Two items on the
    /// same feature are rejected, even when their codes agree.
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<Self> {
        let mut items: Items = items.into_iter().collect();
        items.sort_unstable();
        for w in items.windows(2) {
            if w[0].feature == w[1].feature {
                return Err(Error::InvalidPattern(format!(
                    "feature {} appears more than once",
                    w[0].feature
                )));
            }
        }
        Ok(Pattern { items })
    }

    /// Convenience constructor from `(feature, code)` pairs.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        Pattern::new(pairs.iter().map(|&(f, c)| Item::new(f, c)))
    }

    /// Caller guarantees `items` is strictly increasing by feature.
    pub(crate) fn from_sorted(items: Items) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0].feature < w[1].feature));
        Pattern { items }
    }

    /// The full itemset of one observation.
    pub fn from_row(row: &[u32]) -> Self {
        Pattern::from_sorted(
            row.iter()
                .enumerate()
                .map(|(j, &c)| Item::new(j as u32, c))
                .collect(),
        )
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = &Item> + '_ {
        self.items.iter()
    }

    /// Interaction order `k`.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains_item(&self, item: Item) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    /// `self ⊆ row`, where `row` is a full code vector.
    pub fn matches_row(&self, row: &[u32]) -> bool {
        self.items
            .iter()
            .all(|it| row.get(it.feature as usize) == Some(&it.code))
    }

    pub fn is_subset(&self, other: &Pattern) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut rest = other.items.iter();
        'outer: for a in &self.items {
            for b in rest.by_ref() {
                match b.feature.cmp(&a.feature) {
                    Ordering::Less => continue,
                    Ordering::Equal if b.code == a.code => continue 'outer,
                    _ => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn intersect(&self, other: &Pattern) -> Pattern {
        let (mut i, mut j) = (0, 0);
        let mut out = Items::new();
        while i < self.items.len() && j < other.items.len() {
            let (a, b) = (self.items[i], other.items[j]);
            match a.feature.cmp(&b.feature) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    if a.code == b.code {
                        out.push(a);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Pattern::from_sorted(out)
    }

    /// Union of two patterns over disjoint feature sets.
    pub fn union_disjoint(&self, other: &Pattern) -> Result<Pattern> {
        let (mut i, mut j) = (0, 0);
        let mut out = Items::with_capacity(self.len() + other.len());
        while i < self.items.len() && j < other.items.len() {
            let (a, b) = (self.items[i], other.items[j]);
            match a.feature.cmp(&b.feature) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => return Err(Error::OverlappingPatterns(a.feature)),
            }
        }
        out.extend_from_slice(&self.items[i..]);
        out.extend_from_slice(&other.items[j..]);
        Ok(Pattern::from_sorted(out))
    }

    /// True when the two patterns constrain no common feature.
    pub fn is_feature_disjoint(&self, other: &Pattern) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.items.len() && j < other.items.len() {
            match self.items[i].feature.cmp(&other.items[j].feature) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    /// All nonempty subsets, in increasing bitmask order over the sorted items.
    pub fn nonempty_subsets(&self) -> impl Iterator<Item = Pattern> + '_ {
        let n = self.len();
        assert!(n < 64, "subset enumeration needs fewer than 64 items");
        (1u64..(1u64 << n)).map(move |mask| {
            Pattern::from_sorted(
                (0..n)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| self.items[b])
                    .collect(),
            )
        })
    }

    /// Report form `f<idx>=<category name>` joined by `,`.
    pub fn format_with(&self, ds: &EncodedDataset) -> String {
        self.items
            .iter()
            .map(|it| format!("f{}={}", it.feature, ds.category_name(it.feature, it.code)))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Inverse of [`Pattern::format_with`].
    pub fn parse_with(text: &str, ds: &EncodedDataset) -> Result<Pattern> {
        parse_items(text, |feature, value| {
            ds.code_of(feature, value).ok_or_else(|| {
                Error::InvalidPattern(format!("f{feature} has no category `{value}`"))
            })
        })
    }
}

fn parse_items(
    text: &str,
    mut code_of: impl FnMut(u32, &str) -> Result<u32>,
) -> Result<Pattern> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Pattern::empty());
    }
    let mut items = Vec::new();
    for part in text.split(',') {
        let (lhs, rhs) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidPattern(format!("`{part}` is not f<idx>=<value>")))?;
        let feature: u32 = lhs
            .trim()
            .strip_prefix('f')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidPattern(format!("bad feature token `{lhs}`")))?;
        items.push(Item::new(feature, code_of(feature, rhs)?));
    }
    Pattern::new(items)
}

/// Code-level form `f<idx>=<code>`.
impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for it in &self.items {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "f{}={}", it.feature, it.code)?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_items(s, |_, v| {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidPattern(format!("bad code `{v}`")))
        })
    }
}
