mod common;

use common::QueueModel;
use proptest::prelude::*;
use ric_core::pqueue::BoundedMaxQueue;

#[derive(Clone, Debug)]
enum Op {
    Insert(u8, f64),
    Extract,
    Shrink,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (0u8..10, prop::sample::select(vec![0.0, 0.5, 0.5, 1.0, 2.0])).prop_map(|(i, k)| Op::Insert(i, k)),
        2 => Just(Op::Extract),
        1 => Just(Op::Shrink),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_sorted_list_model(cap in 0usize..7, ops in prop::collection::vec(op(), 1..150)) {
        let mut q = BoundedMaxQueue::new(cap);
        let mut model = QueueModel::new(cap);
        for op in ops {
            match op {
                Op::Insert(i, k) => prop_assert_eq!(q.insert(i, k), model.insert(i, k)),
                Op::Extract => prop_assert_eq!(q.extract_max().ok(), model.extract_max()),
                Op::Shrink => prop_assert_eq!(q.shrink(), model.shrink()),
            }
            let state: Vec<(u8, f64)> = q.iter().map(|e| (e.item, e.key)).collect();
            prop_assert_eq!(state, model.ordered());
            prop_assert!(q.len() <= q.capacity());
        }
    }

    #[test]
    fn draining_yields_nonincreasing_keys(keys in prop::collection::vec(0u8..5, 0..40), cap in 1usize..20) {
        let mut q = BoundedMaxQueue::new(cap);
        for (i, k) in keys.iter().enumerate() {
            q.insert(i, f64::from(*k));
        }
        let mut last = f64::INFINITY;
        let mut last_item = 0usize;
        while let Ok((item, key)) = q.extract_max() {
            prop_assert!(key <= last);
            // equal keys come out in insertion order
            if key == last {
                prop_assert!(item > last_item);
            }
            last = key;
            last_item = item;
        }
    }
}

#[test]
fn thousand_random_sequences() {
    let bad: Vec<u64> = (0..1000).filter(|&s| !common::queue_model_trial(s)).collect();
    assert!(bad.is_empty(), "diverged for seeds {bad:?}");
}

#[test]
fn evicts_latest_among_tied_minima() {
    let mut q = BoundedMaxQueue::new(3);
    q.insert("a", 1.0);
    q.insert("b", 0.0);
    q.insert("c", 0.0);
    assert_eq!(q.insert("d", 0.5), Some("c"));
    assert_eq!(q.shrink(), Some("b"));
    assert_eq!(q.extract_max().unwrap(), ("a", 1.0));
}
