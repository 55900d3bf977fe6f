//! Minimum-cost assignment (Jonker-Volgenant style shortest augmenting path)
//! for matching recovered directions to ground-truth weights.

/// Solves `min over pi of sum_i cost[i][pi(i)]` over injections of rows into columns.
/// Requires rows <= cols. Returns the column chosen for each row and the
/// total cost.
pub fn hungarian(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let m = cost[0].len();
    assert!(n <= m, "need at least as many columns as rows");

    const INF: f64 = f64::INFINITY;
    // 1-based potentials over rows and columns; way[j] remembers the
    // augmenting path.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut matched_col = vec![0usize; m + 1]; // row matched to column j (1-based, 0 = free)
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        matched_col[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_col[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
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
                    u[matched_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_col[j0] = matched_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=m {
        if matched_col[j] > 0 {
            assignment[matched_col[j] - 1] = j - 1;
            total += cost[matched_col[j] - 1][j - 1];
        }
    }
    (assignment, total)
}
