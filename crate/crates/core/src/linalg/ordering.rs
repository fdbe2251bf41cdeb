//! Fill-reducing ordering for the sparse Cholesky factorization.

use super::SparseSymMatrix;

/// Reverse Cuthill-McKee ordering of the matrix graph.
///
/// Returns `order` with `order[new] = old`. Deterministic: BFS starts at the
/// minimum-degree vertex (ties by index) of each connected component and
/// visits neighbours sorted by (degree, index).
pub fn reverse_cuthill_mckee(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.lower_triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|l| l.len()).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_unstable_by_key(|&v| (degree[v], v));

    for &start in &candidates {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_unstable_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcm_is_a_permutation() {
        let a = SparseSymMatrix::from_triplets(
            5,
            vec![(0, 0, 1.0), (4, 0, 1.0), (2, 1, 1.0), (3, 3, 1.0), (4, 4, 1.0)],
        );
        let mut p = reverse_cuthill_mckee(&a);
        assert_eq!(p.len(), 5);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rcm_reduces_bandwidth_on_a_path_graph() {
        // path 0-2-4-1-3 given in scrambled labels
        let edges = vec![(2, 0, 1.0), (4, 2, 1.0), (4, 1, 1.0), (3, 1, 1.0)];
        let mut tri: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i, 2.0)).collect();
        tri.extend(edges);
        let a = SparseSymMatrix::from_triplets(5, tri);
        let order = reverse_cuthill_mckee(&a);
        let mut inv = vec![0usize; 5];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        let mut bw = 0usize;
        for (i, j, _) in a.lower_triplets() {
            bw = bw.max(inv[i].abs_diff(inv[j]));
        }
        assert_eq!(bw, 1, "path graph must be ordered consecutively");
    }
}
