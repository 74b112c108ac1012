//! Graph generators shared by the criterion benches and the timing harness.

use greenroute::graph::{build_adjacency_matrix, EdgeGvi, EdgeGviTable, WeightedGraph};
use greenroute::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Undirected graph with each pair joined with probability `density` and
/// integer GVIs in `[0, 100]`.
pub fn random_graph(n: usize, density: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                entries.push(EdgeGvi {
                    u: NodeId::from(u),
                    v: NodeId::from(v),
                    gvi: rng.gen_range(0..=100) as f64,
                });
            }
        }
    }
    build_adjacency_matrix(n, &EdgeGviTable { directed: false, entries }, usize::MAX)
        .expect("generated table is valid")
}
