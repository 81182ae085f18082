use super::VarianceProfile;
use crate::{Error, Result};

/// Strong connectivity of the directed graph with an edge `i -> j` whenever
/// `adj[i][j] > 0`.
pub fn is_strongly_connected(adj: &[Vec<f64>]) -> bool {
    let n = adj.len();
    if n == 0 {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let w_edge = if forward { adj[v][w] } else { adj[w][v] };
                if w_edge > 0.0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// For each block row `a` of the partition, irreducibility of `B B^T` where
/// `B` is the anti-diagonal block `(a, p + 1 - a)`.
pub fn antidiagonal_irreducibility(
    profile: &VarianceProfile,
    partition: &[usize],
) -> Result<Vec<bool>> {
    if partition.iter().sum::<usize>() != profile.dim() || partition.contains(&0) {
        return Err(Error::Precondition(format!(
            "partition {:?} does not split dimension {}",
            partition,
            profile.dim()
        )));
    }
    let offsets: Vec<usize> = partition
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let p = partition.len();
    Ok((0..p)
        .map(|a| {
            let b = p - 1 - a;
            let (ra, da) = (offsets[a], partition[a]);
            let (cb, db) = (offsets[b], partition[b]);
            let product: Vec<Vec<f64>> = (0..da)
                .map(|nu| {
                    (0..da)
                        .map(|tau| {
                            (0..db)
                                .map(|x| {
                                    profile.get(ra + nu, cb + x) * profile.get(ra + tau, cb + x)
                                })
                                .sum()
                        })
                        .collect()
                })
                .collect();
            is_strongly_connected(&product)
        })
        .collect())
}
