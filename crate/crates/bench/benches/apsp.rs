use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use greenroute::routing::{dijkstra, floyd_warshall, floyd_warshall_blocked};
use greenroute::NodeId;
use greenroute_bench::random_graph;

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("floyd_warshall");
    group.sample_size(10);
    for n in [128, 256, 512] {
        let g = random_graph(n, 0.05, 1);
        group.bench_with_input(BenchmarkId::new("naive", n), &g, |b, g| b.iter(|| floyd_warshall(g).unwrap()));
        for block in [32, 64] {
            group.bench_with_input(BenchmarkId::new(format!("blocked_{block}"), n), &g, |b, g| {
                b.iter(|| floyd_warshall_blocked(g, block).unwrap())
            });
        }
    }
    group.finish();
}

fn single_source(c: &mut Criterion) {
    let g = random_graph(512, 0.05, 2);
    c.bench_function("dijkstra_512", |b| b.iter(|| dijkstra(&g, NodeId(0)).unwrap()));
}

criterion_group!(benches, kernels, single_source);
criterion_main!(benches);
