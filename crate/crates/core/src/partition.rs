//! Fold and subfold partitioning for standard (kF) and irredundant (IkF)
//! k-fold cross-validation.
//!
//! kF tests on fold `i` and trains on every other fold, so each sample is
//! used `k - 1` times for training. IkF splits every fold into `k - 1`
//! subfolds and trains iteration `i` on exactly one subfold from each other
//! fold `j`, chosen by the assignment matrix entry `α_ij`. Every column of
//! the assignment is a bijection onto `{1, ..., k-1}`, so each subfold (and
//! hence each sample) lands in exactly one training set:
//!
//! ```text
//!  k = 3        fold 1      fold 2      fold 3
//!  subfolds    [1a][1b]    [2a][2b]    [3a][3b]
//!  iter 1      test test   [2b]        [3a]
//!  iter 2      [1a]        test test   [3b]
//!  iter 3      [1b]        [2a]        test test
//! ```
//!
//! All index lists are returned sorted ascending. Randomness comes from
//! [`crate::rng`] streams, so identical inputs give identical partitions.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// Cross-validation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Irredundant k-fold: each sample trains exactly once.
    Ikf,
    /// Standard k-fold: each sample trains `k - 1` times.
    Kf,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ikf => "IkF",
            Scheme::Kf => "kF",
        })
    }
}

/// How subfolds are matched to training sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentStrategy {
    /// Seed-independent: `α_ij = i + 1` if `i < j`, else `i` (0-based `i`, `j`).
    CanonicalShift,
    /// One uniform random permutation of `{1, ..., k-1}` per column.
    #[default]
    RandomLatin,
}

/// One iteration's training and test indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPair {
    pub iteration: usize,
    #[serde(rename = "train")]
    pub train_indices: Vec<usize>,
    #[serde(rename = "test")]
    pub test_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitingFactor {
    TotalSize,
    ClassSize,
}

/// Outcome of a feasibility check, with remediation advice when infeasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Minimum total size (`TotalSize`) or minimum per-class size (`ClassSize`).
    pub required_minimum: usize,
    pub limiting_factor: LimitingFactor,
    /// Largest `k ≥ 2` the data supports, if any.
    pub largest_feasible_k: Option<usize>,
    pub message: String,
}

/// Folds, subfolds and subfold assignment for one IkF run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub k: usize,
    pub n: usize,
    pub folds: Vec<Vec<usize>>,
    /// `subfolds[i]` holds the `k - 1` subfolds of `folds[i]`.
    pub subfolds: Vec<Vec<Vec<usize>>>,
    /// `assignment[i][j]` is the 1-based subfold of fold `j` used by training
    /// set `i`; `None` on the diagonal.
    pub assignment: Vec<Vec<Option<usize>>>,
    pub seed: u64,
    pub stratified: bool,
    pub strategy: AssignmentStrategy,
}

impl PartitionPlan {
    /// Builds an IkF plan. Feasibility is checked before any splitting.
    pub fn new(
        n: usize,
        labels: Option<&[usize]>,
        k: usize,
        seed: u64,
        stratified: bool,
        strategy: AssignmentStrategy,
    ) -> Result<Self> {
        check_k(k)?;
        let labels = check_labels(n, labels, stratified)?;
        let counts = labels.map(present_class_counts);
        let verdict = check_feasibility(n, counts.as_deref(), k, stratified);
        if !verdict.feasible {
            return Err(infeasibility_error(n, labels, &verdict));
        }

        let folds = split_folds(n, labels, k, seed, stratified)?;
        let subfolds = folds
            .iter()
            .enumerate()
            .map(|(i, fold)| {
                let sub_seed = rng::derive(seed, purpose::SUBFOLDS + i as u64);
                split_subfolds(fold, k - 1, labels, sub_seed, stratified)
            })
            .collect::<Result<Vec<_>>>()?;
        let assignment = assign_subfolds(k, strategy, seed);

        Ok(Self {
            k,
            n,
            folds,
            subfolds,
            assignment,
            seed,
            stratified,
            strategy,
        })
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidSpec(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

fn check_labels(n: usize, labels: Option<&[usize]>, stratified: bool) -> Result<Option<&[usize]>> {
    match labels {
        Some(l) if l.len() != n => Err(Error::LengthMismatch {
            left: n,
            right: l.len(),
        }),
        None if stratified => Err(Error::InvalidSpec(
            "stratified splitting requires labels".into(),
        )),
        other => Ok(other),
    }
}

/// Sizes of the classes that occur in `labels`, in ascending class order.
fn present_class_counts(labels: &[usize]) -> Vec<usize> {
    group_by_class(labels.iter().copied().enumerate())
        .values()
        .map(Vec::len)
        .collect()
}

fn group_by_class(items: impl Iterator<Item = (usize, usize)>) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (index, class) in items {
        groups.entry(class).or_default().push(index);
    }
    groups
}

fn infeasibility_error(n: usize, labels: Option<&[usize]>, verdict: &FeasibilityVerdict) -> Error {
    let advice = match verdict.largest_feasible_k {
        Some(k) => format!("Reduce k: the largest feasible value is k = {k}"),
        None => "No k >= 2 is feasible; collect more samples or disable stratification".into(),
    };
    match (verdict.limiting_factor, labels) {
        (LimitingFactor::ClassSize, Some(labels)) => {
            let groups = group_by_class(labels.iter().copied().enumerate());
            let (class, count) = groups
                .iter()
                .map(|(&class, members)| (class, members.len()))
                .min_by_key(|&(_, c)| c)
                .expect("stratified verdict has classes");
            Error::StratificationInfeasible {
                class,
                count,
                required: verdict.required_minimum,
                advice: Some(advice),
            }
        }
        _ => Error::TooFewSamples {
            n,
            required: verdict.required_minimum,
            advice: Some(advice),
        },
    }
}

/// Split `items` into `parts` near-equal groups.
///
/// Unstratified: shuffle, then cut into consecutive chunks with the first
/// `len % parts` chunks one larger. Stratified: each class is shuffled and
/// dealt out so every part receives `⌊m/parts⌋` or `⌈m/parts⌉` members of a
/// class of size `m`; the extra members go round-robin over the parts,
/// starting at a random offset and continuing where the previous class
/// stopped, which keeps total part sizes within one of each other.
fn partition_items(
    items: &[usize],
    labels: Option<&[usize]>,
    parts: usize,
    rng: &mut SplitMix64,
    stratified: bool,
) -> Result<Vec<Vec<usize>>> {
    if items.len() < parts {
        return Err(Error::TooFewSamples {
            n: items.len(),
            required: parts,
            advice: None,
        });
    }
    let mut out = vec![Vec::new(); parts];

    match labels.filter(|_| stratified) {
        None => {
            let mut shuffled = items.to_vec();
            shuffled.shuffle(rng);
            let base = items.len() / parts;
            let extra = items.len() % parts;
            let mut rest = shuffled.as_slice();
            for (p, part) in out.iter_mut().enumerate() {
                let (head, tail) = rest.split_at(base + usize::from(p < extra));
                part.extend_from_slice(head);
                rest = tail;
            }
        }
        Some(labels) => {
            let groups = group_by_class(items.iter().map(|&i| (i, labels[i])));
            if let Some((&class, members)) = groups.iter().find(|(_, m)| m.len() < parts) {
                return Err(Error::StratificationInfeasible {
                    class,
                    count: members.len(),
                    required: parts,
                    advice: None,
                });
            }
            let mut offset = rng.random_range(0..parts);
            for mut members in groups.into_values() {
                members.shuffle(rng);
                let base = members.len() / parts;
                let extra = members.len() % parts;
                let mut rest = members.as_slice();
                for (p, part) in out.iter_mut().enumerate() {
                    let gets_extra = (p + parts - offset) % parts < extra;
                    let (head, tail) = rest.split_at(base + usize::from(gets_extra));
                    part.extend_from_slice(head);
                    rest = tail;
                }
                offset = (offset + extra) % parts;
            }
        }
    }

    for part in &mut out {
        part.sort_unstable();
    }
    Ok(out)
}

/// Split `0..n` into `k` folds.
pub fn split_folds(
    n: usize,
    labels: Option<&[usize]>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<Vec<Vec<usize>>> {
    check_k(k)?;
    let labels = check_labels(n, labels, stratified)?;
    let items: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(seed, purpose::FOLDS);
    partition_items(&items, labels, k, &mut rng, stratified)
}

/// Split one fold into `parts` subfolds. `labels` is indexed by sample id.
pub fn split_subfolds(
    fold: &[usize],
    parts: usize,
    labels: Option<&[usize]>,
    seed: u64,
    stratified: bool,
) -> Result<Vec<Vec<usize>>> {
    if parts == 0 {
        return Err(Error::InvalidSpec("parts must be at least 1".into()));
    }
    if stratified && labels.is_none() {
        return Err(Error::InvalidSpec(
            "stratified splitting requires labels".into(),
        ));
    }
    let mut rng = rng::stream(seed, purpose::SUBFOLDS);
    partition_items(fold, labels, parts, &mut rng, stratified)
}

/// Build the `k × k` subfold assignment matrix.
pub fn assign_subfolds(
    k: usize,
    strategy: AssignmentStrategy,
    seed: u64,
) -> Vec<Vec<Option<usize>>> {
    let mut matrix = vec![vec![None; k]; k];
    match strategy {
        AssignmentStrategy::CanonicalShift => {
            for (i, row) in matrix.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    if i != j {
                        *cell = Some(if i < j { i + 1 } else { i });
                    }
                }
            }
        }
        AssignmentStrategy::RandomLatin => {
            let mut rng = rng::stream(seed, purpose::ASSIGNMENT);
            for j in 0..k {
                let mut perm: Vec<usize> = (1..k).collect();
                perm.shuffle(&mut rng);
                let rows = (0..k).filter(|&i| i != j);
                for (i, alpha) in rows.zip(perm) {
                    matrix[i][j] = Some(alpha);
                }
            }
        }
    }
    matrix
}

/// Checks that every column's off-diagonal entries are a permutation of
/// `{1, ..., k-1}` and the diagonal is empty.
pub fn assignment_is_valid(assignment: &[Vec<Option<usize>>]) -> bool {
    let k = assignment.len();
    if assignment.iter().any(|row| row.len() != k) {
        return false;
    }
    (0..k).all(|j| {
        let mut seen = vec![false; k];
        (0..k).all(|i| match (i == j, assignment[i][j]) {
            (true, None) => true,
            (false, Some(a)) if (1..k).contains(&a) && !seen[a] => {
                seen[a] = true;
                true
            }
            _ => false,
        })
    })
}

/// IkF splits: `T^i = F_i`, `E^i = ⋃_{j≠i} F_j^{α_ij}`.
pub fn build_ikf_splits(plan: &PartitionPlan) -> Result<Vec<SplitPair>> {
    let k = plan.k;
    if plan.folds.len() != k || plan.subfolds.len() != k {
        return Err(Error::InvalidPlan(format!(
            "expected {k} folds, got {} folds and {} subfold groups",
            plan.folds.len(),
            plan.subfolds.len()
        )));
    }
    if let Some(i) = plan.subfolds.iter().position(|s| s.len() != k - 1) {
        return Err(Error::InvalidPlan(format!(
            "fold {i} has {} subfolds, expected {}",
            plan.subfolds[i].len(),
            k - 1
        )));
    }
    if !assignment_is_valid(&plan.assignment) {
        return Err(Error::InvalidPlan(
            "assignment columns are not permutations of 1..k-1".into(),
        ));
    }

    Ok((0..k)
        .map(|i| {
            let mut train: Vec<usize> = (0..k)
                .filter(|&j| j != i)
                .flat_map(|j| {
                    let alpha = plan.assignment[i][j].expect("validated");
                    plan.subfolds[j][alpha - 1].iter().copied()
                })
                .collect();
            train.sort_unstable();
            SplitPair {
                iteration: i,
                train_indices: train,
                test_indices: plan.folds[i].clone(),
            }
        })
        .collect())
}

/// kF splits: `T^i = F_i`, `E^i` = every other fold.
pub fn build_kf_splits(folds: &[Vec<usize>]) -> Result<Vec<SplitPair>> {
    let n: usize = folds.iter().map(Vec::len).sum();
    let mut owner = vec![usize::MAX; n];
    for (f, fold) in folds.iter().enumerate() {
        for &idx in fold {
            if idx >= n {
                return Err(Error::InvalidPlan(format!(
                    "index {idx} outside 0..{n} in fold {f}"
                )));
            }
            if owner[idx] != usize::MAX {
                return Err(Error::InvalidPlan(format!(
                    "index {idx} appears in folds {} and {f}",
                    owner[idx]
                )));
            }
            owner[idx] = f;
        }
    }
    Ok(folds
        .iter()
        .enumerate()
        .map(|(i, fold)| {
            let mut test = fold.clone();
            test.sort_unstable();
            let train = (0..n).filter(|&idx| owner[idx] != i).collect();
            SplitPair {
                iteration: i,
                train_indices: train,
                test_indices: test,
            }
        })
        .collect())
}

fn largest_k_within(limit: usize, cost: impl Fn(usize) -> usize) -> Option<usize> {
    (2..=limit.max(2))
        .take_while(|&k| cost(k) <= limit)
        .last()
}

/// IkF feasibility: `n ≥ k(k-1)` unstratified, `min class ≥ k(k-1)` stratified.
///
/// Stratified checks without class counts fall back to the total-size bound.
pub fn check_feasibility(
    n: usize,
    class_counts: Option<&[usize]>,
    k: usize,
    stratified: bool,
) -> FeasibilityVerdict {
    let required = k * k.saturating_sub(1);
    let ikf_cost = |k: usize| k * (k - 1);
    match class_counts.filter(|c| stratified && !c.is_empty()) {
        Some(counts) => {
            let (min_class, &c_min) = counts
                .iter()
                .enumerate()
                .min_by_key(|&(_, c)| *c)
                .expect("non-empty");
            let feasible = c_min >= required;
            let largest = largest_k_within(c_min, ikf_cost);
            let message = if feasible {
                format!(
                    "stratified IkF with k={k} is feasible: every class has at least \
                     k(k-1) = {required} samples (smallest class {min_class} has {c_min}; \
                     {} classes need at least {} samples in total)",
                    counts.len(),
                    required * counts.len()
                )
            } else {
                format!(
                    "stratified IkF with k={k} is infeasible: every class needs at least \
                     k(k-1) = {required} samples but class {min_class} has {c_min}. {}",
                    reduce_k_advice(largest, "per class")
                )
            };
            FeasibilityVerdict {
                feasible,
                required_minimum: required,
                limiting_factor: LimitingFactor::ClassSize,
                largest_feasible_k: largest,
                message,
            }
        }
        None => {
            let feasible = n >= required;
            let largest = largest_k_within(n, ikf_cost);
            let message = if feasible {
                format!("IkF with k={k} is feasible: n = {n} >= k(k-1) = {required}")
            } else {
                format!(
                    "IkF with k={k} is infeasible: n = {n} < k(k-1) = {required}. {}",
                    reduce_k_advice(largest, "in total")
                )
            };
            FeasibilityVerdict {
                feasible,
                required_minimum: required,
                limiting_factor: LimitingFactor::TotalSize,
                largest_feasible_k: largest,
                message,
            }
        }
    }
}

fn reduce_k_advice(largest: Option<usize>, scope: &str) -> String {
    match largest {
        Some(k) => format!(
            "Reduce k: the largest feasible value is k = {k} (needs {} samples {scope}); \
             k = 5 needs 20.",
            k * (k - 1)
        ),
        None => "No k >= 2 is feasible; collect more samples or disable stratification.".into(),
    }
}

/// kF feasibility: `n ≥ k`, and `min class ≥ k` when stratified.
pub fn check_kf_feasibility(
    n: usize,
    class_counts: Option<&[usize]>,
    k: usize,
    stratified: bool,
) -> FeasibilityVerdict {
    let identity = |k: usize| k;
    match class_counts.filter(|c| stratified && !c.is_empty()) {
        Some(counts) => {
            let c_min = counts.iter().copied().min().expect("non-empty");
            let feasible = c_min >= k;
            FeasibilityVerdict {
                feasible,
                required_minimum: k,
                limiting_factor: LimitingFactor::ClassSize,
                largest_feasible_k: largest_k_within(c_min, identity),
                message: if feasible {
                    format!("stratified kF with k={k} is feasible")
                } else {
                    format!(
                        "stratified kF with k={k} is infeasible: smallest class has {c_min} < {k} samples"
                    )
                },
            }
        }
        None => {
            let feasible = n >= k;
            FeasibilityVerdict {
                feasible,
                required_minimum: k,
                limiting_factor: LimitingFactor::TotalSize,
                largest_feasible_k: largest_k_within(n, identity),
                message: if feasible {
                    format!("kF with k={k} is feasible")
                } else {
                    format!("kF with k={k} is infeasible: n = {n} < k")
                },
            }
        }
    }
}

/// Train/test splits for either scheme. This is the single entry point used
/// by the CLI `split` command and any foreign-language wrapper.
pub fn make_splits(
    n: usize,
    labels: Option<&[usize]>,
    k: usize,
    seed: u64,
    stratified: bool,
    scheme: Scheme,
    strategy: AssignmentStrategy,
) -> Result<Vec<SplitPair>> {
    match scheme {
        Scheme::Ikf => {
            let plan = PartitionPlan::new(n, labels, k, seed, stratified, strategy)?;
            build_ikf_splits(&plan)
        }
        Scheme::Kf => {
            check_k(k)?;
            let labels = check_labels(n, labels, stratified)?;
            let counts = labels.map(present_class_counts);
            let verdict = check_kf_feasibility(n, counts.as_deref(), k, stratified);
            if !verdict.feasible {
                return Err(infeasibility_error(n, labels, &verdict));
            }
            build_kf_splits(&split_folds(n, labels, k, seed, stratified)?)
        }
    }
}

/// Pairwise training-set overlap `|E^i ∩ E^j| / n`, where `n` is the number
/// of test indices across all splits.
pub fn overlap_fraction(splits: &[SplitPair]) -> Vec<Vec<f64>> {
    let n: usize = splits.iter().map(|s| s.test_indices.len()).sum();
    let universe = splits
        .iter()
        .flat_map(|s| s.train_indices.iter().chain(&s.test_indices))
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let masks: Vec<Vec<bool>> = splits
        .iter()
        .map(|s| {
            let mut mask = vec![false; universe];
            for &i in &s.train_indices {
                mask[i] = true;
            }
            mask
        })
        .collect();
    let denom = n.max(1) as f64;
    (0..splits.len())
        .map(|a| {
            (0..splits.len())
                .map(|b| {
                    let shared = splits[b]
                        .train_indices
                        .iter()
                        .filter(|&&i| masks[a][i])
                        .count();
                    shared as f64 / denom
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(parts: &[Vec<usize>]) -> Vec<usize> {
        parts.iter().map(Vec::len).collect()
    }

    fn assert_cover(parts: &[Vec<usize>], universe: &[usize]) {
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut want = universe.to_vec();
        want.sort_unstable();
        assert_eq!(all, want);
    }

    #[test]
    fn ten_into_five() {
        let folds = split_folds(10, None, 5, 0, false).unwrap();
        assert_eq!(sizes(&folds), vec![2; 5]);
        assert_cover(&folds, &(0..10).collect::<Vec<_>>());
    }

    #[test]
    fn eleven_into_three_front_loads_remainder() {
        let folds = split_folds(11, None, 3, 9, false).unwrap();
        assert_eq!(sizes(&folds), vec![4, 4, 3]);
    }

    #[test]
    fn stratified_exact_division() {
        let labels: Vec<usize> = (0..12).map(|i| i / 6).collect();
        let folds = split_folds(12, Some(&labels), 3, 5, true).unwrap();
        for fold in &folds {
            let ones = fold.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!((fold.len() - ones, ones), (2, 2));
        }
    }

    #[test]
    fn stratified_remainders_rotate() {
        // Three classes of 7 over 3 folds: each class has one extra member.
        let labels: Vec<usize> = (0..21).map(|i| i % 3).collect();
        let folds = split_folds(21, Some(&labels), 3, 11, true).unwrap();
        assert_eq!(sizes(&folds), vec![7, 7, 7]);
    }

    #[test]
    fn split_fold_errors() {
        assert!(matches!(
            split_folds(2, None, 3, 0, false),
            Err(Error::TooFewSamples { n: 2, required: 3, .. })
        ));
        let labels = [0, 0, 0, 1, 1, 0];
        assert!(matches!(
            split_folds(6, Some(&labels), 3, 0, true),
            Err(Error::StratificationInfeasible {
                class: 1,
                count: 2,
                required: 3,
                ..
            })
        ));
        assert!(matches!(
            split_folds(6, None, 1, 0, false),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn subfold_examples() {
        let four = split_subfolds(&[3, 5, 7, 9], 2, None, 1, false).unwrap();
        assert_eq!(sizes(&four), vec![2, 2]);
        assert_cover(&four, &[3, 5, 7, 9]);

        let five = split_subfolds(&[0, 1, 2, 3, 4], 2, None, 1, false).unwrap();
        assert_eq!(sizes(&five), vec![3, 2]);

        let labels = [0, 1, 0, 1];
        let strat = split_subfolds(&[0, 1, 2, 3], 2, Some(&labels), 4, true).unwrap();
        for sub in &strat {
            let mut classes: Vec<usize> = sub.iter().map(|&i| labels[i]).collect();
            classes.sort_unstable();
            assert_eq!(classes, vec![0, 1]);
        }

        assert!(matches!(
            split_subfolds(&[0, 1], 3, None, 0, false),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            split_subfolds(&[0, 1, 2], 2, Some(&[0, 0, 1]), 0, true),
            Err(Error::StratificationInfeasible { class: 1, .. })
        ));
    }

    #[test]
    fn canonical_shift_k2_and_k3() {
        let k2 = assign_subfolds(2, AssignmentStrategy::CanonicalShift, 0);
        assert_eq!(k2, vec![vec![None, Some(1)], vec![Some(1), None]]);
        let k2_latin = assign_subfolds(2, AssignmentStrategy::RandomLatin, 99);
        assert_eq!(k2_latin, k2);

        let k3 = assign_subfolds(3, AssignmentStrategy::CanonicalShift, 123);
        // Columns (0-based): col 0 rows (1,2); col 1 rows (0,2); col 2 rows (0,1).
        assert_eq!((k3[1][0], k3[2][0]), (Some(1), Some(2)));
        assert_eq!((k3[0][1], k3[2][1]), (Some(1), Some(2)));
        assert_eq!((k3[0][2], k3[1][2]), (Some(1), Some(2)));
        assert!(assignment_is_valid(&k3));
        assert_eq!(k3, assign_subfolds(3, AssignmentStrategy::CanonicalShift, 7));
    }

    #[test]
    fn random_latin_columns_are_permutations() {
        for seed in 0..20 {
            let m = assign_subfolds(5, AssignmentStrategy::RandomLatin, seed);
            for j in 0..5 {
                let mut col: Vec<usize> = (0..5).filter(|&i| i != j).map(|i| m[i][j].unwrap()).collect();
                col.sort_unstable();
                assert_eq!(col, vec![1, 2, 3, 4]);
            }
        }
    }

    #[test]
    fn invalid_assignment_rejected() {
        let mut plan =
            PartitionPlan::new(12, None, 3, 0, false, AssignmentStrategy::CanonicalShift).unwrap();
        plan.assignment[2][0] = Some(1); // column 0 now (1, 1)
        assert!(matches!(build_ikf_splits(&plan), Err(Error::InvalidPlan(_))));
        plan.assignment[2][0] = Some(3);
        assert!(matches!(build_ikf_splits(&plan), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn ikf_k3_n12() {
        let plan =
            PartitionPlan::new(12, None, 3, 17, false, AssignmentStrategy::RandomLatin).unwrap();
        assert_eq!(sizes(&plan.folds), vec![4, 4, 4]);
        for subs in &plan.subfolds {
            assert_eq!(sizes(subs), vec![2, 2]);
        }
        let splits = build_ikf_splits(&plan).unwrap();
        let all: Vec<usize> = (0..12).collect();
        for s in &splits {
            assert_eq!(s.train_indices.len(), 4);
            assert_eq!(s.test_indices.len(), 4);
            assert!(s.train_indices.iter().all(|i| !s.test_indices.contains(i)));
        }
        let trains: Vec<Vec<usize>> = splits.iter().map(|s| s.train_indices.clone()).collect();
        let tests: Vec<Vec<usize>> = splits.iter().map(|s| s.test_indices.clone()).collect();
        assert_cover(&trains, &all);
        assert_cover(&tests, &all);
    }

    #[test]
    fn ikf_k2_swaps_folds() {
        let plan = PartitionPlan::new(4, None, 2, 3, false, AssignmentStrategy::RandomLatin).unwrap();
        let splits = build_ikf_splits(&plan).unwrap();
        assert_eq!(splits[0].train_indices, plan.folds[1]);
        assert_eq!(splits[0].test_indices, plan.folds[0]);
        assert_eq!(splits[1].train_indices, plan.folds[0]);
        assert_eq!(splits[1].test_indices, plan.folds[1]);
    }

    #[test]
    fn kf_sizes_and_overlap() {
        let splits = make_splits(10, None, 5, 0, false, Scheme::Kf, Default::default()).unwrap();
        for s in &splits {
            assert_eq!((s.train_indices.len(), s.test_indices.len()), (8, 2));
        }
        let ov = overlap_fraction(&splits);
        for (i, row) in ov.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let want = if i == j { 0.8 } else { 0.6 };
                assert!((v - want).abs() < 1e-15, "{i},{j}: {v}");
            }
        }
    }

    #[test]
    fn kf_rejects_overlapping_folds() {
        let folds = vec![vec![0, 1], vec![1, 2]];
        assert!(matches!(build_kf_splits(&folds), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn overlap_single_split() {
        let s = SplitPair {
            iteration: 0,
            train_indices: vec![0, 1, 2],
            test_indices: vec![3, 4, 5, 6],
        };
        assert_eq!(overlap_fraction(&[s]), vec![vec![0.75]]);
    }

    #[test]
    fn feasibility_examples() {
        let v = check_feasibility(270, Some(&[90, 90, 90]), 10, true);
        assert!(v.feasible);
        assert_eq!(v.required_minimum, 90);
        assert_eq!(v.limiting_factor, LimitingFactor::ClassSize);

        let v = check_feasibility(269, Some(&[90, 90, 89]), 10, true);
        assert!(!v.feasible);
        assert_eq!(v.limiting_factor, LimitingFactor::ClassSize);
        assert_eq!(v.largest_feasible_k, Some(9));
        assert!(v.message.contains("Reduce k"), "{}", v.message);

        assert!(check_feasibility(20, None, 5, false).feasible);
        let v = check_feasibility(19, None, 5, false);
        assert!(!v.feasible);
        assert_eq!(v.limiting_factor, LimitingFactor::TotalSize);
        assert_eq!(v.largest_feasible_k, Some(4));

        assert_eq!(check_feasibility(1, None, 2, false).largest_feasible_k, None);
    }

    #[test]
    fn plan_reports_feasibility_errors() {
        let err = PartitionPlan::new(19, None, 5, 0, false, Default::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewSamples { n: 19, required: 20, .. }));
        assert_eq!(
            err.to_string(),
            "too few samples: got 19, need at least 20. Reduce k: the largest feasible value is k = 4"
        );
        assert!(err.is_infeasible());

        let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 21)).collect();
        let err = PartitionPlan::new(40, Some(&labels), 5, 0, true, Default::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::StratificationInfeasible { class: 1, count: 19, required: 20, .. }
        ));
    }

    #[test]
    fn seeds_change_partitions() {
        let a = split_folds(50, None, 5, 1, false).unwrap();
        let b = split_folds(50, None, 5, 2, false).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, split_folds(50, None, 5, 1, false).unwrap());
    }
}
