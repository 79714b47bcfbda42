use std::collections::BTreeSet;

use ikf::partition::{
    assign_subfolds, assignment_is_valid, build_ikf_splits, make_splits, overlap_fraction, split_folds,
};
use ikf::{AssignmentStrategy, Error, PartitionPlan, Scheme, SplitPair};
use proptest::prelude::*;

fn strategy() -> impl Strategy<Value = AssignmentStrategy> {
    prop_oneof![
        Just(AssignmentStrategy::CanonicalShift),
        Just(AssignmentStrategy::RandomLatin)
    ]
}

/// `(k, n, labels)` with `n ≥ k(k-1)`; labels are drawn so that stratified
/// runs are feasible about half the time.
fn config() -> impl Strategy<Value = (usize, usize, Vec<usize>)> {
    prop_oneof![Just(2usize), Just(3), Just(4), Just(5)]
        .prop_flat_map(|k| {
            let min = k * (k - 1);
            (Just(k), min..=min + 300, 1usize..=3)
        })
        .prop_flat_map(|(k, n, c)| (Just(k), Just(n), proptest::collection::vec(0..c, n)))
}

fn disjoint(sets: &[&Vec<usize>]) -> bool {
    let mut seen = BTreeSet::new();
    sets.iter().all(|s| s.iter().all(|&i| seen.insert(i)))
}

fn union(sets: &[&Vec<usize>]) -> Vec<usize> {
    sets.iter().flat_map(|s| s.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn stratifiable(labels: &[usize], k: usize) -> bool {
    let c = labels.iter().max().map_or(0, |m| m + 1);
    (0..c)
        .map(|class| labels.iter().filter(|&&l| l == class).count())
        .filter(|&m| m > 0)
        .all(|m| m >= k * (k - 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ikf_trains_and_tests_partition_the_index_set(
        (k, n, labels) in config(),
        seed in any::<u64>(),
        strat in strategy(),
        stratify in any::<bool>(),
    ) {
        let stratified = stratify && stratifiable(&labels, k);
        let splits = make_splits(n, Some(&labels), k, seed, stratified, Scheme::Ikf, strat).unwrap();
        prop_assert_eq!(splits.len(), k);
        let trains: Vec<&Vec<usize>> = splits.iter().map(|s| &s.train_indices).collect();
        let tests: Vec<&Vec<usize>> = splits.iter().map(|s| &s.test_indices).collect();
        let all: Vec<usize> = (0..n).collect();
        prop_assert!(disjoint(&trains));
        prop_assert!(disjoint(&tests));
        prop_assert_eq!(union(&trains), all.clone());
        prop_assert_eq!(union(&tests), all);
        for s in &splits {
            prop_assert!(s.train_indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.test_indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.train_indices.iter().all(|i| s.test_indices.binary_search(i).is_err()));
        }
    }

    #[test]
    fn plan_structure(
        (k, n, labels) in config(),
        seed in any::<u64>(),
        strat in strategy(),
        stratify in any::<bool>(),
    ) {
        let stratified = stratify && stratifiable(&labels, k);
        let plan = PartitionPlan::new(n, Some(&labels), k, seed, stratified, strat).unwrap();

        // Fold sizes within one of each other; subfold sizes likewise within a fold.
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for (fold, subs) in plan.folds.iter().zip(&plan.subfolds) {
            prop_assert_eq!(subs.len(), k - 1);
            let sub_sizes: Vec<usize> = subs.iter().map(Vec::len).collect();
            prop_assert!(sub_sizes.iter().max().unwrap() - sub_sizes.iter().min().unwrap() <= 1);
            let refs: Vec<&Vec<usize>> = subs.iter().collect();
            prop_assert!(disjoint(&refs));
            prop_assert_eq!(&union(&refs), fold);
        }

        // Every column is a bijection onto {1..k-1}, diagonal empty.
        prop_assert!(assignment_is_valid(&plan.assignment));
        for j in 0..k {
            let mut col: Vec<usize> = (0..k).filter(|&i| i != j).map(|i| plan.assignment[i][j].unwrap()).collect();
            col.sort_unstable();
            prop_assert_eq!(col, (1..k).collect::<Vec<_>>());
            prop_assert_eq!(plan.assignment[j][j], None);
        }

        // Stratified: per-class fold counts within one.
        if stratified {
            let c = labels.iter().max().unwrap() + 1;
            for class in 0..c {
                let per_fold: Vec<usize> = plan
                    .folds
                    .iter()
                    .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                    .collect();
                prop_assert!(per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn splits_are_deterministic(
        (k, n, labels) in config(),
        seed in any::<u64>(),
        strat in strategy(),
    ) {
        for scheme in [Scheme::Ikf, Scheme::Kf] {
            let a = make_splits(n, Some(&labels), k, seed, false, scheme, strat).unwrap();
            let b = make_splits(n, Some(&labels), k, seed, false, scheme, strat).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn kf_and_ikf_share_test_folds(
        (k, n, _labels) in config(),
        seed in any::<u64>(),
    ) {
        let ikf = make_splits(n, None, k, seed, false, Scheme::Ikf, AssignmentStrategy::RandomLatin).unwrap();
        let kf = make_splits(n, None, k, seed, false, Scheme::Kf, AssignmentStrategy::RandomLatin).unwrap();
        for (a, b) in ikf.iter().zip(&kf) {
            prop_assert_eq!(&a.test_indices, &b.test_indices);
            prop_assert!(a.train_indices.iter().all(|i| b.train_indices.binary_search(i).is_ok()));
        }
    }

    #[test]
    fn overlap_law_when_k_divides_n(
        k in prop_oneof![Just(3usize), Just(5), Just(10)],
        blocks in 10usize..40,
        seed in any::<u64>(),
    ) {
        let n = k * (k - 1) * blocks;
        let kf = overlap_fraction(&make_splits(n, None, k, seed, false, Scheme::Kf, Default::default()).unwrap());
        let ikf = overlap_fraction(&make_splits(n, None, k, seed, false, Scheme::Ikf, Default::default()).unwrap());
        let expected = (k - 2) as f64 / k as f64;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    prop_assert_eq!(kf[i][j], expected);
                    prop_assert_eq!(ikf[i][j], 0.0);
                }
            }
        }
    }
}

#[test]
fn canonical_shift_assignment() {
    let a = assign_subfolds(4, AssignmentStrategy::CanonicalShift, 0);
    assert_eq!(
        a,
        vec![
            vec![None, Some(1), Some(1), Some(1)],
            vec![Some(1), None, Some(2), Some(2)],
            vec![Some(2), Some(2), None, Some(3)],
            vec![Some(3), Some(3), Some(3), None],
        ]
    );
}

#[test]
fn two_folds_train_on_the_other_fold() {
    let splits = make_splits(4, None, 2, 0, false, Scheme::Ikf, Default::default()).unwrap();
    assert_eq!(splits.len(), 2);
    assert_eq!(splits[0].train_indices, splits[1].test_indices);
    assert_eq!(splits[1].train_indices, splits[0].test_indices);
    let kf = make_splits(4, None, 2, 0, false, Scheme::Kf, Default::default()).unwrap();
    assert_eq!(splits, kf);
}

#[test]
fn too_few_samples_message() {
    let err = make_splits(19, None, 5, 0, false, Scheme::Ikf, Default::default()).unwrap_err();
    assert!(matches!(err, Error::TooFewSamples { n: 19, required: 20, .. }));
    assert!(err.to_string().contains("got 19, need at least 20"));
}

#[test]
fn ikf_splits_rebuild_from_plan() {
    let plan = PartitionPlan::new(50, None, 5, 3, false, AssignmentStrategy::RandomLatin).unwrap();
    let from_plan = build_ikf_splits(&plan).unwrap();
    let direct = make_splits(50, None, 5, 3, false, Scheme::Ikf, AssignmentStrategy::RandomLatin).unwrap();
    assert_eq!(from_plan, direct);

    // Test folds are the plan's folds; training sets are the assigned subfolds.
    for (i, SplitPair { train_indices, test_indices, .. }) in from_plan.iter().enumerate() {
        assert_eq!(test_indices, &plan.folds[i]);
        let mut expected: Vec<usize> = (0..5)
            .filter(|&j| j != i)
            .flat_map(|j| plan.subfolds[j][plan.assignment[i][j].unwrap() - 1].clone())
            .collect();
        expected.sort_unstable();
        assert_eq!(train_indices, &expected);
    }
}

#[test]
fn folds_agree_with_plan() {
    let plan = PartitionPlan::new(60, None, 4, 9, false, AssignmentStrategy::RandomLatin).unwrap();
    assert_eq!(plan.folds, split_folds(60, None, 4, 9, false).unwrap());
}
