//! Kuhn-Munkres with potentials, O(q^3), plus a lexicographic tie-break
//! over the equality subgraph.

/// Maximum-weight perfect matching of `K_{q,q}`.
///
/// `w` is row-major (`w[r * q + c]`). Returns the column assigned to each
/// row. Among optimal matchings the one with the lexicographically smallest
/// column sequence is returned.
pub fn max_weight_matching(q: usize, w: &[f64]) -> Vec<usize> {
    assert_eq!(w.len(), q * q);
    if q == 0 {
        return Vec::new();
    }
    let cost = |r: usize, c: usize| -w[r * q + c];

    // 1-based potentials; index 0 is the virtual row/column.
    let mut u = vec![0.0f64; q + 1];
    let mut v = vec![0.0f64; q + 1];
    let mut row_of = vec![0usize; q + 1];
    let mut way = vec![0usize; q + 1];
    for r in 1..=q {
        row_of[0] = r;
        let mut c0 = 0;
        let mut minv = vec![f64::INFINITY; q + 1];
        let mut used = vec![false; q + 1];
        loop {
            used[c0] = true;
            let r0 = row_of[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0;
            for c in 1..=q {
                if !used[c] {
                    let cur = cost(r0 - 1, c - 1) - u[r0] - v[c];
                    if cur < minv[c] {
                        minv[c] = cur;
                        way[c] = c0;
                    }
                    if minv[c] < delta {
                        delta = minv[c];
                        c1 = c;
                    }
                }
            }
            for c in 0..=q {
                if used[c] {
                    u[row_of[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
            if row_of[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            row_of[c0] = row_of[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; q];
    for c in 1..=q {
        col_of[row_of[c] - 1] = c - 1;
    }

    // Equality subgraph: optimal matchings are exactly its perfect matchings.
    let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-10 * scale * q as f64;
    let tight: Vec<Vec<bool>> = (0..q)
        .map(|r| {
            (0..q)
                .map(|c| (cost(r, c) - u[r + 1] - v[c + 1]).abs() <= eps)
                .collect()
        })
        .collect();

    if has_alternating_cycle(&tight, &col_of) {
        lexicographic_fixup(&tight, &mut col_of);
    }
    col_of
}

/// Rows linked `r -> r'` when `r` could take the column held by `r'` through
/// a tight edge. A cycle means another optimal matching exists.
fn has_alternating_cycle(tight: &[Vec<bool>], col_of: &[usize]) -> bool {
    let q = col_of.len();
    let mut row_of_col = vec![0; q];
    for (r, &c) in col_of.iter().enumerate() {
        row_of_col[c] = r;
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; q];
    fn dfs(
        r: usize,
        tight: &[Vec<bool>],
        col_of: &[usize],
        row_of_col: &[usize],
        state: &mut [u8],
    ) -> bool {
        state[r] = 1;
        for c in 0..col_of.len() {
            if c == col_of[r] || !tight[r][c] {
                continue;
            }
            let next = row_of_col[c];
            if state[next] == 1 || (state[next] == 0 && dfs(next, tight, col_of, row_of_col, state))
            {
                return true;
            }
        }
        state[r] = 2;
        false
    }
    (0..q).any(|r| state[r] == 0 && dfs(r, tight, col_of, &row_of_col, &mut state))
}

/// Greedy row by row: smallest tight column that still leaves a perfect
/// matching of the remaining rows in the equality subgraph.
fn lexicographic_fixup(tight: &[Vec<bool>], col_of: &mut [usize]) {
    let q = col_of.len();
    let mut taken = vec![false; q];
    for r in 0..q {
        for c in 0..q {
            if !tight[r][c] || taken[c] {
                continue;
            }
            taken[c] = true;
            if completes(tight, r + 1, &taken) {
                col_of[r] = c;
                break;
            }
            taken[c] = false;
        }
    }
}

/// Whether rows `from..q` can be matched to untaken columns (Kuhn's algorithm).
fn completes(tight: &[Vec<bool>], from: usize, taken: &[bool]) -> bool {
    let q = taken.len();
    let mut owner: Vec<Option<usize>> = vec![None; q];
    fn augment(
        r: usize,
        tight: &[Vec<bool>],
        taken: &[bool],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for c in 0..taken.len() {
            if taken[c] || !tight[r][c] || seen[c] {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none_or(|o| augment(o, tight, taken, seen, owner)) {
                owner[c] = Some(r);
                return true;
            }
        }
        false
    }
    (from..q).all(|r| {
        let mut seen = vec![false; q];
        augment(r, tight, taken, &mut seen, &mut owner)
    })
}
