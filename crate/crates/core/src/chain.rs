//! Random intersection chains.
//!
//! A chain starts from a uniformly drawn observation of one class; every
//! further node is the previous node intersected with a fresh draw. Nodes are
//! nested, so a chain is stored as the head observation plus, per feature, the
//! number of nodes its head item survives in. Item `(j, head[j])` is in node
//! `d` iff `counts[j] >= d`, and the tail holds the items with
//! `counts[j] == realized_length`.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{sample_row, ClassId, EncodedDataset};
use crate::error::{Error, Result};
use crate::pattern::{Item, Pattern};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    head: Vec<u32>,
    counts: Vec<u32>,
    realized_length: u32,
}

impl Chain {
    /// One-node chain whose head is `row`.
    pub fn from_head(row: &[u32]) -> Chain {
        Chain {
            head: row.to_vec(),
            counts: vec![1; row.len()],
            realized_length: 1,
        }
    }

    /// Appends the node `tail ∩ row` and returns its order. Only items whose
    /// count equals the current length can still be alive.
    pub fn push_observation(&mut self, row: &[u32]) -> usize {
        let len = self.realized_length;
        let mut tail = 0;
        for ((count, &h), &v) in self.counts.iter_mut().zip(&self.head).zip(row) {
            if *count == len && v == h {
                *count += 1;
                tail += 1;
            }
        }
        self.realized_length += 1;
        tail
    }

    pub fn head(&self) -> &[u32] {
        &self.head
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `D_m`, the number of nodes actually grown.
    pub fn realized_length(&self) -> u32 {
        self.realized_length
    }

    /// Itemset of node `d` (1-based).
    pub fn node(&self, d: u32) -> Pattern {
        Pattern::new(
            self.head
                .iter()
                .zip(&self.counts)
                .enumerate()
                .filter(|(_, (_, &k))| k >= d)
                .map(|(j, (&c, _))| Item::new(j as u32, c)),
        )
        .expect("head items are feature-distinct")
    }

    pub fn tail(&self) -> Pattern {
        self.node(self.realized_length)
    }

    pub fn tail_order(&self) -> usize {
        self.counts
            .iter()
            .filter(|&&k| k == self.realized_length)
            .count()
    }

    /// Largest `d` with `s ⊆ node d`; 0 when `s` is not in the head. The
    /// empty pattern lives in every node.
    pub fn survival_depth(&self, s: &Pattern) -> u32 {
        let mut depth = self.realized_length;
        for it in s.iter() {
            let j = it.feature as usize;
            match self.head.get(j) {
                Some(&c) if c == it.code => depth = depth.min(self.counts[j]),
                _ => return 0,
            }
        }
        depth
    }
}

/// Grows one chain for `class`. Growth stops once the chain has `d_max` nodes
/// or its tail holds at most `k_stop` items.
pub fn generate_chain<R: Rng + ?Sized>(
    ds: &EncodedDataset,
    class: ClassId,
    d_max: u32,
    k_stop: usize,
    rng: &mut R,
) -> Result<Chain> {
    if d_max == 0 {
        return Err(Error::param("chain length must be at least 1"));
    }
    let mut chain = Chain::from_head(ds.row(sample_row(ds, class, rng)?));
    let mut tail = chain.head.len();
    while chain.realized_length < d_max && tail > k_stop {
        tail = chain.push_observation(ds.row(sample_row(ds, class, rng)?));
    }
    Ok(chain)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of chain `index` for `class`, a pure function of its inputs.
pub fn chain_seed(master_seed: u64, class: ClassId, index: u64) -> u64 {
    let z = splitmix64(master_seed ^ splitmix64(0x5eed_0000_0000_0000 | class.0 as u64));
    splitmix64(z ^ splitmix64(index))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSet {
    pub class: ClassId,
    pub d_max: u32,
    pub k_stop: usize,
    pub chains: Vec<Chain>,
}

/// `m` independent chains for `class`; chain `i` draws from its own stream
/// seeded by [`chain_seed`], so the result does not depend on thread count.
pub fn generate_chains(
    ds: &EncodedDataset,
    class: ClassId,
    m: usize,
    d_max: u32,
    k_stop: usize,
    master_seed: u64,
) -> Result<ChainSet> {
    if m == 0 {
        return Err(Error::param("number of chains must be at least 1"));
    }
    ds.class_rows(class)?;
    let chains = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(chain_seed(master_seed, class, i));
            generate_chain(ds, class, d_max, k_stop, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainSet {
        class,
        d_max,
        k_stop,
        chains,
    })
}

const MAGIC: &[u8; 8] = b"RICCHAIN";
const VERSION: u32 = 1;

impl ChainSet {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Tail-node itemsets in chain order.
    pub fn tails(&self) -> Vec<Pattern> {
        self.chains.iter().map(Chain::tail).collect()
    }

    /// Little-endian dump: magic, version, class, M, D_max, K_stop, p, then
    /// per chain `head[p]`, `counts[p]`, `realized_length`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = self.chains.first().map_or(0, |c| c.head.len());
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.class.0.to_le_bytes())?;
        w.write_all(&(self.chains.len() as u64).to_le_bytes())?;
        w.write_all(&(self.d_max as u64).to_le_bytes())?;
        w.write_all(&(self.k_stop as u64).to_le_bytes())?;
        w.write_all(&(p as u32).to_le_bytes())?;
        for ch in &self.chains {
            for &v in ch.head.iter().chain(&ch.counts) {
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(&ch.realized_length.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<ChainSet> {
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::ChainFormat("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::ChainFormat(format!("unsupported version {version}")));
        }
        let class = ClassId(read_u32(&mut r)?);
        let m = read_u64(&mut r)? as usize;
        let d_max = u32::try_from(read_u64(&mut r)?)
            .map_err(|_| Error::ChainFormat("D_max out of range".into()))?;
        let k_stop = read_u64(&mut r)? as usize;
        let p = read_u32(&mut r)? as usize;
        let mut chains = Vec::with_capacity(m.min(1 << 20));
        for i in 0..m {
            let head = (0..p).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
            let counts = (0..p).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
            let realized_length = read_u32(&mut r)?;
            let valid = realized_length >= 1
                && realized_length <= d_max
                && counts.iter().all(|&k| k >= 1 && k <= realized_length);
            if !valid {
                return Err(Error::ChainFormat(format!("chain {i} violates its invariants")));
            }
            chains.push(Chain {
                head,
                counts,
                realized_length,
            });
        }
        Ok(ChainSet {
            class,
            d_max,
            k_stop,
            chains,
        })
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::ChainFormat(format!("truncated dump: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
