use rayon::prelude::*;

use super::{check_size, default_cap, ApspResult, RoutingError, NO_PARENT};
use crate::graph::WeightedGraph;

pub const DEFAULT_BLOCK_SIZE: usize = 128;

/// Column strip width (cells) for the remainder tiles; keeps the strip of
/// the snapshot panel cache-resident while rows stream past it.
const COLUMN_STRIP: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApspOptions {
    /// Tile edge length; `0` selects the unblocked kernel.
    pub block_size: usize,
    pub max_nodes: usize,
}

impl Default for ApspOptions {
    fn default() -> Self {
        ApspOptions { block_size: DEFAULT_BLOCK_SIZE, max_nodes: default_cap() }
    }
}

pub fn solve(graph: &WeightedGraph, options: &ApspOptions) -> Result<ApspResult, RoutingError> {
    check_size(graph.n(), options.max_nodes)?;
    Ok(match options.block_size {
        0 => naive(graph),
        b => blocked(graph, b),
    })
}

/// Plain Floyd-Warshall: `k`, `i`, `j` loops in index order with strict
/// relaxation, `parents[i][j] = parents[k][j]` on every improvement.
pub fn floyd_warshall(graph: &WeightedGraph) -> Result<ApspResult, RoutingError> {
    check_size(graph.n(), default_cap())?;
    Ok(naive(graph))
}

/// Tiled Floyd-Warshall. Each round fixes one diagonal tile, then its row
/// and column panels, then relaxes every remaining tile in parallel across
/// tile rows. Rounds run strictly in order.
pub fn floyd_warshall_blocked(graph: &WeightedGraph, block_size: usize) -> Result<ApspResult, RoutingError> {
    check_size(graph.n(), default_cap())?;
    Ok(blocked(graph, block_size.max(1)))
}

fn init(graph: &WeightedGraph) -> (Vec<f64>, Vec<u32>) {
    let n = graph.n();
    let dist = graph.weights().to_vec();
    let mut parents = vec![NO_PARENT; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dist[i * n + j].is_finite() {
                parents[i * n + j] = i as u32;
            }
        }
    }
    (dist, parents)
}

/// `d[j] = min(d[j], dik + dk[j])`, taking the parent from `pk` on strict
/// improvement. Branch-free so the loop vectorizes.
#[inline(always)]
fn relax(d: &mut [f64], p: &mut [u32], dik: f64, dk: &[f64], pk: &[u32]) {
    let len = d.len();
    let (dk, pk, p) = (&dk[..len], &pk[..len], &mut p[..len]);
    for j in 0..len {
        let cand = dik + dk[j];
        let better = cand < d[j];
        d[j] = if better { cand } else { d[j] };
        p[j] = if better { pk[j] } else { p[j] };
    }
}

fn naive(graph: &WeightedGraph) -> ApspResult {
    let n = graph.n();
    let (mut dist, mut parents) = init(graph);
    let mut dk = vec![0.0; n];
    let mut pk = vec![0u32; n];
    for k in 0..n {
        // row k cannot change while k is the intermediate (d[k][k] = 0)
        dk.copy_from_slice(&dist[k * n..(k + 1) * n]);
        pk.copy_from_slice(&parents[k * n..(k + 1) * n]);
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == f64::INFINITY {
                continue;
            }
            let row = i * n..(i + 1) * n;
            relax(&mut dist[row.clone()], &mut parents[row], dik, &dk, &pk);
        }
    }
    ApspResult { n, dist, parents }
}

/// Hop count of the current best path; only the blocked kernel keeps it.
/// Stored as `f64` so the relax loop has one lane width and vectorizes;
/// counts stay far below 2^53.
type Hops = u16;
const NO_HOPS: Hops = Hops::MAX;

/// `relax` with ties on distance broken by fewer hops. The blocked phases
/// copy predecessors from rows that are further along than the row being
/// relaxed; with zero-weight edges, distance alone can then leave two nodes
/// pointing at each other. Every predecessor step strictly decreases
/// `(dist, hops)`, so walks terminate.
#[inline(always)]
fn relax_hops(d: &mut [f64], p: &mut [u32], h: &mut [Hops], dik: f64, hik: Hops, dk: &[f64], pk: &[u32], hk: &[Hops]) {
    let len = d.len();
    let (dk, pk, hk, p, h) = (&dk[..len], &pk[..len], &hk[..len], &mut p[..len], &mut h[..len]);
    for j in 0..len {
        let cand = dik + dk[j];
        let ch = hik.saturating_add(hk[j]);
        let better = (cand < d[j]) | ((cand == d[j]) & (ch < h[j]));
        d[j] = if better { cand } else { d[j] };
        p[j] = if better { pk[j] } else { p[j] };
        h[j] = if better { ch } else { h[j] };
    }
}

/// Split borrows of rows `i` (mutable) and `k` (shared) of an `n`-wide matrix.
fn rows<T>(m: &mut [T], n: usize, i: usize, k: usize) -> (&mut [T], &[T]) {
    if i < k {
        let (lo, hi) = m.split_at_mut(k * n);
        (&mut lo[i * n..(i + 1) * n], &hi[..n])
    } else {
        let (lo, hi) = m.split_at_mut(i * n);
        (&mut hi[..n], &lo[k * n..(k + 1) * n])
    }
}

fn blocked(graph: &WeightedGraph, block: usize) -> ApspResult {
    let n = graph.n();
    if block >= n {
        // one tile is the whole matrix
        return naive(graph);
    }
    let (mut dist, mut parents) = init(graph);
    let mut hops: Vec<Hops> = dist
        .iter()
        .enumerate()
        .map(|(c, d)| match (c / n == c % n, d.is_finite()) {
            (true, _) => 0,
            (false, true) => 1,
            (false, false) => NO_HOPS,
        })
        .collect();
    let b = block;
    let rounds = n.div_ceil(b);
    let mut panel_d = vec![0.0; b * n];
    let mut panel_p = vec![0u32; b * n];
    let mut panel_h: Vec<Hops> = vec![0; b * n];

    for kb in 0..rounds {
        let k0 = kb * b;
        let k1 = (k0 + b).min(n);
        let kw = k1 - k0;

        // diagonal tile, then the rest of tile row kb
        for (lo, hi) in [(k0, k1), (0, k0), (k1, n)] {
            for k in k0..k1 {
                for i in k0..k1 {
                    let (dik, hik) = (dist[i * n + k], hops[i * n + k]);
                    if dik == f64::INFINITY || i == k {
                        continue;
                    }
                    let (di, dk) = rows(&mut dist, n, i, k);
                    let (pi, pk) = rows(&mut parents, n, i, k);
                    let (hi_, hk) = rows(&mut hops, n, i, k);
                    relax_hops(&mut di[lo..hi], &mut pi[lo..hi], &mut hi_[lo..hi], dik, hik, &dk[lo..hi], &pk[lo..hi], &hk[lo..hi]);
                }
            }
        }

        // snapshot of the finished tile row, read by every other tile row
        panel_d[..kw * n].copy_from_slice(&dist[k0 * n..k1 * n]);
        panel_p[..kw * n].copy_from_slice(&parents[k0 * n..k1 * n]);
        panel_h[..kw * n].copy_from_slice(&hops[k0 * n..k1 * n]);
        let panel = Panel { d: &panel_d[..kw * n], p: &panel_p[..kw * n], h: &panel_h[..kw * n], n, k0, k1 };

        dist.par_chunks_mut(b * n)
            .zip(parents.par_chunks_mut(b * n))
            .zip(hops.par_chunks_mut(b * n))
            .enumerate()
            .filter(|&(bi, _)| bi != kb)
            .for_each(|(_, ((dc, pc), hc))| update_tile_row(dc, pc, hc, &panel));
    }
    ApspResult { n, dist, parents }
}

/// Finished tile row `k0..k1` of the current round.
struct Panel<'a> {
    d: &'a [f64],
    p: &'a [u32],
    h: &'a [Hops],
    n: usize,
    k0: usize,
    k1: usize,
}

/// Column panel tile, then the remaining tiles of one tile row.
fn update_tile_row(dc: &mut [f64], pc: &mut [u32], hc: &mut [Hops], panel: &Panel<'_>) {
    let Panel { d: pd, p: pp, h: ph, n, k0, k1 } = *panel;
    let rows = dc.len() / n;
    let strips = std::iter::once((k0, k1)).chain(
        [(0, k0), (k1, n)]
            .into_iter()
            .flat_map(|(lo, hi)| (lo..hi).step_by(COLUMN_STRIP).map(move |j0| (j0, (j0 + COLUMN_STRIP).min(hi)))),
    );
    // the column panel strip comes first: the others read its results
    for (j0, j1) in strips {
        for r in 0..rows {
            let row = r * n..(r + 1) * n;
            let (d, p, h) = (&mut dc[row.clone()], &mut pc[row.clone()], &mut hc[row]);
            for k in k0..k1 {
                let (dik, hik) = (d[k], h[k]);
                if dik == f64::INFINITY {
                    continue;
                }
                let kr = (k - k0) * n;
                let (a, z) = (kr + j0, kr + j1);
                relax_hops(&mut d[j0..j1], &mut p[j0..j1], &mut h[j0..j1], dik, hik, &pd[a..z], &pp[a..z], &ph[a..z]);
            }
        }
    }
}
