use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxprod_core::argmax::{argmax_naive, fast_argmax_k_trusted, fast_argmax_pair_trusted, ReadScratch, SearchMode, SortedPermutation};
use maxprod_core::Semiring;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn lists(k: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<SortedPermutation>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lists: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let perms = lists.iter().map(|l| SortedPermutation::sort(&l[..], Semiring::MaxSum).unwrap()).collect();
    (lists, perms)
}

fn pair(c: &mut Criterion) {
    let mut group = c.benchmark_group("argmax_pair");
    for n in [256usize, 4096, 65536] {
        let (l, p) = lists(2, n, n as u64);
        group.bench_with_input(BenchmarkId::new("naive", n), &n, |bch, _| {
            bch.iter(|| argmax_naive(&l[0][..], &l[1][..], Semiring::MaxSum))
        });
        for mode in [SearchMode::Analysis, SearchMode::EarlyStop] {
            group.bench_with_input(BenchmarkId::new(mode.to_string(), n), &n, |bch, _| {
                bch.iter(|| {
                    fast_argmax_pair_trusted(&l[0][..], &l[1][..], p[0].as_ref(), p[1].as_ref(), black_box(mode), Semiring::MaxSum)
                })
            });
        }
    }
    group.finish();
}

fn klist(c: &mut Criterion) {
    let mut group = c.benchmark_group("argmax_k");
    let n = 4096;
    for k in [3usize, 4] {
        let (l, p) = lists(k, n, k as u64);
        let refs: Vec<&[f64]> = l.iter().map(|v| &v[..]).collect();
        let perms: Vec<_> = p.iter().map(|p| p.as_ref()).collect();
        let mut scratch = ReadScratch::new(n);
        group.bench_with_input(BenchmarkId::new("early-stop", k), &k, |bch, _| {
            bch.iter(|| fast_argmax_k_trusted(&refs, &perms, &mut scratch, SearchMode::EarlyStop, Semiring::MaxSum))
        });
    }
    group.finish();
}

criterion_group!(benches, pair, klist);
criterion_main!(benches);
