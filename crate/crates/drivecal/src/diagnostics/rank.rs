//! Chain splitting and rank normalization shared by the estimators.

use crate::math::norm_quantile;

/// Split every chain in half. For odd lengths the middle element is
/// dropped, so all halves share one length.
pub fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let half = chain.len() / 2;
        halves.push(chain[..half].to_vec());
        halves.push(chain[chain.len() - half..].to_vec());
    }
    halves
}

/// Rank-normalize draws jointly across chains.
///
/// Pooled average ranks (ties share their mean rank) are mapped through the
/// normal quantile function with the usual (r - 3/8) / (S + 1/4) offset.
pub fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = chains.iter().map(Vec::len).sum();
    let mut order: Vec<(f64, usize, usize)> = Vec::with_capacity(total);
    for (c, chain) in chains.iter().enumerate() {
        for (i, &v) in chain.iter().enumerate() {
            order.push((v, c, i));
        }
    }
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut ranks: Vec<Vec<f64>> = chains.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].0 == order[start].0 {
            end += 1;
        }
        // Average 1-based rank of the tied run [start, end).
        let avg = (start + 1 + end) as f64 / 2.0;
        for &(_, c, i) in &order[start..end] {
            ranks[c][i] = avg;
        }
        start = end;
    }

    let s = total as f64;
    ranks
        .into_iter()
        .map(|chain| {
            chain
                .into_iter()
                .map(|r| norm_quantile((r - 0.375) / (s + 0.25)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_drops_middle_of_odd_chains() {
        let halves = split_chains(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
        assert_eq!(halves, vec![vec![1.0, 2.0], vec![4.0, 5.0]]);
    }

    #[test]
    fn ranks_are_symmetric_for_distinct_values() {
        let z = rank_normalize(&[vec![10.0, 20.0, 30.0, 40.0]]);
        assert!((z[0][0] + z[0][3]).abs() < 1e-12);
        assert!((z[0][1] + z[0][2]).abs() < 1e-12);
        assert!(z[0][0] < z[0][1]);
    }

    #[test]
    fn ties_share_their_rank() {
        let z = rank_normalize(&[vec![1.0, 1.0, 2.0]]);
        assert_eq!(z[0][0], z[0][1]);
    }
}
