//! Exclusive labelling and the misclassification error.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};

/// Exclusive labels from per-model memberships and residuals.
///
/// Datum `i` goes to the closest model among those it has positive
/// membership in, labels counting from 1 in model order; 0 marks an outlier.
/// Equal residuals go to the lower model index.
pub fn exclusive_labels(memberships: &[Vec<f64>], residuals: &[Vec<f64>]) -> Vec<usize> {
    assert_eq!(memberships.len(), residuals.len());
    let m = memberships.first().map_or(0, Vec::len);
    (0..m)
        .map(|i| {
            let mut best: Option<(usize, f64)> = None;
            for (t, (mem, res)) in memberships.iter().zip(residuals).enumerate() {
                if mem[i] > 0.0 && best.is_none_or(|(_, r)| res[i] < r) {
                    best = Some((t, res[i]));
                }
            }
            best.map_or(0, |(t, _)| t + 1)
        })
        .collect()
}

/// Fraction of data whose label disagrees with the ground truth under the best
/// one-to-one matching of predicted groups to true groups.
///
/// Label 0 (outlier) is never matched; it counts as correct only where both
/// labellings say 0. Groups left unmatched count as errors.
pub fn misclassification_error(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidShape("empty labelling".into()));
    }
    let groups = |labels: &[usize]| {
        let mut g: Vec<usize> = labels.iter().copied().filter(|&l| l > 0).collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    let (pred_groups, true_groups) = (groups(predicted), groups(truth));
    let mut correct = predicted.iter().zip(truth).filter(|(&p, &t)| p == 0 && t == 0).count();
    if !pred_groups.is_empty() && !true_groups.is_empty() {
        let mut overlap = vec![vec![0i64; true_groups.len()]; pred_groups.len()];
        for (&p, &t) in predicted.iter().zip(truth) {
            if p > 0 && t > 0 {
                let a = pred_groups.binary_search(&p).expect("label collected above");
                let b = true_groups.binary_search(&t).expect("label collected above");
                overlap[a][b] += 1;
            }
        }
        // The assignment solver needs at least as many columns as rows.
        if overlap.len() > true_groups.len() {
            overlap = (0..true_groups.len()).map(|b| overlap.iter().map(|row| row[b]).collect()).collect();
        }
        let weights = Matrix::from_rows(overlap).expect("rectangular by construction");
        let (matched, _) = kuhn_munkres(&weights);
        correct += matched as usize;
    }
    Ok(1.0 - correct as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Best matching by trying every injection of predicted groups.
    fn brute_force(predicted: &[usize], truth: &[usize], k_pred: usize, k_true: usize) -> f64 {
        fn go(p: usize, k_pred: usize, k_true: usize, used: &mut Vec<bool>, map: &mut Vec<usize>, best: &mut usize, score: &dyn Fn(&[usize]) -> usize) {
            if p > k_pred {
                *best = (*best).max(score(map));
                return;
            }
            map[p] = usize::MAX;
            go(p + 1, k_pred, k_true, used, map, best, score);
            for t in 1..=k_true {
                if !used[t] {
                    used[t] = true;
                    map[p] = t;
                    go(p + 1, k_pred, k_true, used, map, best, score);
                    used[t] = false;
                }
            }
        }
        let score = |map: &[usize]| {
            predicted
                .iter()
                .zip(truth)
                .filter(|(&p, &t)| if p == 0 { t == 0 } else { map[p] == t })
                .count()
        };
        let mut best = 0;
        go(1, k_pred, k_true, &mut vec![false; k_true + 1], &mut vec![0; k_pred + 1], &mut best, &score);
        1.0 - best as f64 / truth.len() as f64
    }

    #[test]
    fn permutation_invariant() {
        let truth = vec![1, 1, 2, 2, 3, 3, 0, 0];
        let renamed = vec![3, 3, 1, 1, 2, 2, 0, 0];
        assert_eq!(misclassification_error(&renamed, &truth).unwrap(), 0.0);
        let one_off = vec![3, 3, 1, 1, 2, 0, 0, 0];
        assert_eq!(misclassification_error(&one_off, &truth).unwrap(), 1.0 / 8.0);
    }

    #[test]
    fn outliers_are_scored_directly() {
        let truth = vec![0, 0, 1, 1];
        assert_eq!(misclassification_error(&[1, 1, 1, 1], &truth).unwrap(), 0.5);
        assert_eq!(misclassification_error(&[0, 0, 0, 0], &truth).unwrap(), 0.5);
        assert!(misclassification_error(&[0], &truth).is_err());
    }

    #[test]
    fn matches_exhaustive_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k_pred = rng.random_range(0..5);
            let k_true = rng.random_range(0..5);
            let m = rng.random_range(1..30);
            let truth: Vec<usize> = (0..m).map(|_| rng.random_range(0..=k_true)).collect();
            let mut predicted: Vec<usize> = (0..m).map(|_| rng.random_range(0..=k_pred)).collect();
            predicted.shuffle(&mut rng);
            let got = misclassification_error(&predicted, &truth).unwrap();
            let want = brute_force(&predicted, &truth, k_pred, k_true);
            assert!((got - want).abs() < 1e-12, "{predicted:?} {truth:?}: {got} vs {want}");
        }
    }

    #[test]
    fn exclusive_labels_pick_closest_positive() {
        let memberships = vec![vec![0.5, 0.0, 0.9, 0.0], vec![0.8, 0.0, 0.9, 0.0]];
        let residuals = vec![vec![2.0, 9.0, 1.0, 0.0], vec![1.0, 9.0, 1.0, 0.0]];
        assert_eq!(exclusive_labels(&memberships, &residuals), vec![2, 0, 1, 0]);
    }
}
