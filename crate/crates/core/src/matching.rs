//! Optimal bipartite matching between eigenvalue multisets.
//!
//! Sorted-order comparison breaks as soon as conjugate pairs interleave, so
//! multiset comparisons throughout the crate go through a min-cost
//! assignment instead.

use num_complex::Complex64;

/// Solves the square assignment problem, minimizing the summed cost.
///
/// Returns `assign` with `assign[row] = column`. O(n³) shortest augmenting
/// path with dual potentials.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");

    // 1-based arrays, column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let reduced = cost[r0 - 1][col - 1] - u[r0] - v[col];
                    if reduced < min_to[col] {
                        min_to[col] = reduced;
                        way[col] = col0;
                    }
                    if min_to[col] < delta {
                        delta = min_to[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for col in 1..=n {
        assign[owner[col] - 1] = col - 1;
    }
    assign
}

/// Pairs every element of `a` with an element of `b` minimizing the total
/// absolute distance. Returns the permutation as `b` indices in `a` order.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    min_cost_assignment(&cost)
}

/// Largest pair distance under the optimal matching; `f64::INFINITY` when the
/// sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let assign = match_multisets(a, b);
    a.iter()
        .zip(&assign)
        .map(|(x, &j)| (x - b[j]).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..cost.len() {
                if !used[c] {
                    used[c] = true;
                    best = best.min(cost[row][c] + go(cost, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        go(cost, 0, &mut vec![false; cost.len()])
    }

    #[test]
    fn conjugate_pairs_interleaved() {
        let a = [
            Complex64::new(1.0, 0.5),
            Complex64::new(1.0, -0.5),
            Complex64::new(-2.0, 0.0),
        ];
        let b = [a[2], a[0].conj(), a[1].conj()];
        assert_eq!(multiset_distance(&a, &b), 0.0);
        assert_eq!(multiset_distance(&a, &b[..2]), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn assignment_is_optimal(costs in prop::collection::vec(0.0f64..10.0, 1..=36)) {
            let n = (costs.len() as f64).sqrt() as usize;
            let cost: Vec<Vec<f64>> = (0..n).map(|r| costs[r * n..(r + 1) * n].to_vec()).collect();
            let assign = min_cost_assignment(&cost);
            let mut seen = assign.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            let total: f64 = assign.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
            prop_assert!((total - brute_force_min(&cost)).abs() < 1e-9);
        }
    }
}
