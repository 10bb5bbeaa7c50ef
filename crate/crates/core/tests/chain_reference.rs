use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ric_core::chain::{chain_seed, generate_chain, generate_chains, Chain};
use ric_core::dataset::{ingest_csv, sample_row, ClassId, EncodedDataset};
use ric_core::pattern::{Item, Pattern};
use ric_core::synth::random_categorical;
use std::time::Instant;

/// Straightforward chain that keeps every node itemset.
fn explicit_nodes<R: Rng>(ds: &EncodedDataset, d_max: u32, k_stop: usize, rng: &mut R) -> Vec<Pattern> {
    let mut nodes = vec![Pattern::from_row(ds.row(sample_row(ds, ClassId(0), rng).unwrap()))];
    while (nodes.len() as u32) < d_max && nodes.last().unwrap().len() > k_stop {
        let next = Pattern::from_row(ds.row(sample_row(ds, ClassId(0), rng).unwrap()));
        let node = nodes.last().unwrap().intersect(&next);
        nodes.push(node);
    }
    nodes
}

#[test]
fn compact_chain_matches_explicit_nodes() {
    for p in 1..=8usize {
        for d_max in 1..=6u32 {
            for seed in 0..40u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + p as u64 * 10 + d_max as u64);
                let ds = random_categorical(&mut rng, 12, p, 2, 1).unwrap();
                let k_stop = (seed % 3) as usize;
                let chain = generate_chain(&ds, ClassId(0), d_max, k_stop, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
                let nodes = explicit_nodes(&ds, d_max, k_stop, &mut ChaCha8Rng::seed_from_u64(seed));
                assert_eq!(chain.realized_length() as usize, nodes.len(), "p={p} D={d_max} seed={seed}");
                for (d, node) in nodes.iter().enumerate() {
                    assert_eq!(&chain.node(d as u32 + 1), node, "p={p} D={d_max} seed={seed} node {}", d + 1);
                }
                assert_eq!(&chain.tail(), nodes.last().unwrap());
                // depth of any head subset is the last node still holding it
                for s in nodes[0].nonempty_subsets().take(64) {
                    let want = nodes.iter().take_while(|n| s.is_subset(n)).count() as u32;
                    assert_eq!(chain.survival_depth(&s), want);
                }
            }
        }
    }
}

#[test]
fn storage_does_not_grow_with_length() {
    let rows = vec![vec![1u32, 2, 3]; 4];
    let ds = EncodedDataset::from_codes(vec!["a".into(), "b".into(), "c".into()], &rows, &[0; 4], vec!["c".into()]).unwrap();
    for d in [1u32, 10, 10_000] {
        let ch = generate_chain(&ds, ClassId(0), d, 0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ch.head().len(), 3);
        assert_eq!(ch.counts().len(), 3);
        assert_eq!(ch.realized_length(), d);
        assert!(ch.counts().iter().all(|&c| c == d));
    }
}

#[test]
fn seeds_are_stateless() {
    assert_eq!(chain_seed(7, ClassId(1), 3), chain_seed(7, ClassId(1), 3));
    let mut seen = std::collections::HashSet::new();
    for c in 0..4 {
        for i in 0..1000 {
            assert!(seen.insert(chain_seed(42, ClassId(c), i)));
        }
    }
}

#[test]
fn tic_tac_toe_ten_thousand_chains_under_a_second() {
    let ds = ingest_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/tic-tac-toe.csv"), "class", 0).unwrap();
    let c = ds.class_id("positive").unwrap();
    let t = Instant::now();
    let cs = generate_chains(&ds, c, 10_000, 100_000, 4, 9).unwrap();
    let secs = t.elapsed().as_secs_f64();
    assert_eq!(cs.len(), 10_000);
    assert!(cs.chains.iter().all(|ch| ch.tail_order() <= 4));
    assert!(secs < 1.0, "took {secs:.3}s");
}

fn arb_chain() -> impl Strategy<Value = (Chain, Vec<u32>)> {
    (1usize..8, 1u32..7, any::<u64>()).prop_map(|(p, d, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = random_categorical(&mut rng, 10, p, 2, 1).unwrap();
        let ch = generate_chain(&ds, ClassId(0), d, 0, &mut rng).unwrap();
        let head = ch.head().to_vec();
        (ch, head)
    })
}

proptest! {
    #[test]
    fn depth_is_antimonotone((ch, head) in arb_chain(), mask in any::<u8>(), sub in any::<u8>(), flip in any::<bool>()) {
        // s from the head, with its first item off the head when `flip`
        let mut items: Vec<Item> = head.iter().enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(j, &c)| Item::new(j as u32, c))
            .collect();
        if flip && !items.is_empty() {
            items[0].code += 1;
        }
        let s = Pattern::new(items.clone()).unwrap();
        let s_sub = Pattern::new(items.into_iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, it)| it)).unwrap();
        prop_assert!(ch.survival_depth(&s_sub) >= ch.survival_depth(&s));
        prop_assert!(ch.survival_depth(&s) <= ch.realized_length());
        prop_assert_eq!(ch.survival_depth(&Pattern::empty()), ch.realized_length());
    }

    #[test]
    fn node_invariants((ch, _head) in arb_chain()) {
        let d = ch.realized_length();
        prop_assert!(ch.counts().iter().all(|&c| c >= 1 && c <= d));
        for k in 1..d {
            prop_assert!(ch.node(k + 1).is_subset(&ch.node(k)));
        }
        prop_assert_eq!(ch.node(1), Pattern::from_row(ch.head()));
    }
}
