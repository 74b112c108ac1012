//! Times the blocked all-pairs build on random dense graphs.
//!
//! Usage: `apsp-harness [N ...] [--block B] [--density P]`
//! (defaults: N = 1000 5000, B = 128, P = 0.5).

use std::time::Instant;

use greenroute::routing::{floyd_warshall_blocked, DEFAULT_BLOCK_SIZE};
use greenroute_bench::random_graph;

fn main() {
    let mut sizes = Vec::new();
    let mut block = DEFAULT_BLOCK_SIZE;
    let mut density = 0.5;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--block" => block = args.next().and_then(|v| v.parse().ok()).expect("--block needs a number"),
            "--density" => density = args.next().and_then(|v| v.parse().ok()).expect("--density needs a number"),
            other => sizes.push(other.parse::<usize>().expect("node counts must be integers")),
        }
    }
    if sizes.is_empty() {
        sizes = vec![1000, 5000];
    }
    println!("threads {}", rayon_threads());
    for n in sizes {
        let g = random_graph(n, density, n as u64);
        let start = Instant::now();
        let apsp = floyd_warshall_blocked(&g, block).expect("within cap");
        let secs = start.elapsed().as_secs_f64();
        let reachable = apsp.dist_matrix().iter().filter(|d| d.is_finite()).count();
        println!("n {n} block {block} density {density} seconds {secs:.3} reachable {reachable}");
    }
}

fn rayon_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
