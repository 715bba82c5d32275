//! Rectangular linear assignment by shortest augmenting paths with potentials.

/// Minimum-cost assignment for an `n × m` cost matrix. Returns, per row, the
/// matched column; rows are left unmatched only when `n > m`.
pub fn solve_rectangular(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return vec![None; n];
    }
    if n > m {
        let transposed: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
        let cols = solve_rectangular(&transposed);
        let mut rows = vec![None; n];
        for (j, i) in cols.into_iter().enumerate() {
            if let Some(i) = i {
                rows[i] = Some(j);
            }
        }
        return rows;
    }
    // 1-based potentials formulation, n ≤ m
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut owner = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut rows = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            rows[owner[j] - 1] = Some(j - 1);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let m = cost[0].len();
        let k = n.min(m);
        let mut best = f64::INFINITY;
        let mut rows_used = vec![false; n];
        let mut cols_used = vec![false; m];
        fn rec(
            cost: &[Vec<f64>],
            left: usize,
            start: usize,
            acc: f64,
            rows: &mut [bool],
            cols: &mut [bool],
            best: &mut f64,
        ) {
            if left == 0 {
                *best = best.min(acc);
                return;
            }
            for i in start..rows.len() {
                rows[i] = true;
                for j in 0..cols.len() {
                    if !cols[j] {
                        cols[j] = true;
                        rec(cost, left - 1, i + 1, acc + cost[i][j], rows, cols, best);
                        cols[j] = false;
                    }
                }
                rows[i] = false;
            }
        }
        rec(cost, k, 0, 0.0, &mut rows_used, &mut cols_used, &mut best);
        best
    }

    fn total(cost: &[Vec<f64>], a: &[Option<usize>]) -> f64 {
        a.iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| cost[i][j]))
            .sum()
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=6);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..10.0)).collect())
                .collect();
            let a = solve_rectangular(&cost);
            assert_eq!(a.iter().flatten().count(), n.min(m));
            let mut seen = vec![false; m];
            for j in a.iter().flatten() {
                assert!(!seen[*j]);
                seen[*j] = true;
            }
            assert!((total(&cost, &a) - brute_force(&cost)).abs() < 1e-9);
        }
    }

    #[test]
    fn trivial_shapes() {
        assert!(solve_rectangular(&[]).is_empty());
        assert_eq!(solve_rectangular(&[vec![]]), vec![None]);
        assert_eq!(solve_rectangular(&[vec![3.0]]), vec![Some(0)]);
    }
}
