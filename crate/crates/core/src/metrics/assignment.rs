//! One-to-one assignment on a rectangular overlap matrix.

/// Maximum total weight of a one-to-one matching between rows and columns
/// (Hungarian algorithm with potentials on the padded square matrix).
pub(crate) fn max_weight_matching(m: &[Vec<usize>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    if size == 0 {
        return 0;
    }
    let max = m.iter().flatten().copied().max().unwrap_or(0) as i64;
    let weight = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            m[i][j] as i64
        } else {
            0
        }
    };
    let cost = |i: usize, j: usize| max - weight(i, j);

    // 1-based arrays; p[j] is the row matched to column j
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut p = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=size).map(|j| weight(p[j] - 1, j - 1) as usize).sum()
}

/// Repeatedly takes the largest remaining cell whose row and column are both free.
/// Ties resolve to the lowest (row, column).
pub(crate) fn greedy_matching(m: &[Vec<usize>]) -> usize {
    let mut cells: Vec<(usize, usize, usize)> = m
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &w)| (w, i, j)))
        .collect();
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_used = vec![false; m.len()];
    let mut col_used = vec![false; m.first().map_or(0, Vec::len)];
    let mut total = 0;
    for (w, i, j) in cells {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            total += w;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(m: &[Vec<usize>]) -> usize {
        fn go(m: &[Vec<usize>], i: usize, used: &mut Vec<bool>) -> usize {
            if i == m.len() {
                return 0;
            }
            let mut best = go(m, i + 1, used);
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(m[i][j] + go(m, i + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        let cols = m.first().map_or(0, Vec::len);
        go(m, 0, &mut vec![false; cols])
    }

    #[test]
    fn matches_brute_force() {
        let cases: Vec<Vec<Vec<usize>>> = vec![
            vec![vec![5, 0], vec![0, 5]],
            vec![vec![4, 1], vec![0, 5]],
            vec![vec![5], vec![5]],
            vec![vec![1, 2, 3]],
            vec![vec![7, 2, 9], vec![3, 8, 1], vec![6, 4, 5], vec![2, 2, 2]],
        ];
        for m in cases {
            assert_eq!(max_weight_matching(&m), brute(&m), "{m:?}");
        }
    }

    #[test]
    fn empty_matrix() {
        assert_eq!(max_weight_matching(&[]), 0);
        assert_eq!(greedy_matching(&[]), 0);
    }
}
