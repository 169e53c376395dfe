use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use dhsparse::{Scheduler, SparsifyConfig, Update};
use dhsparse_bench::{batches, forced_config, loaded};

const N: usize = 32;
const R: usize = 4;
const STEPS: usize = 256;

fn single_updates(c: &mut Criterion) {
    let mut g = c.benchmark_group("single_updates");
    g.sample_size(10);
    for &m in &[1024usize, 4096] {
        g.throughput(Throughput::Elements(STEPS as u64));
        for (name, cfg) in [("default", SparsifyConfig::default()), ("forced", forced_config(0))] {
            g.bench_with_input(BenchmarkId::new(name, m), &m, |b, &m| {
                b.iter_batched(
                    || loaded(N, m, R, cfg.clone(), 11),
                    |(mut ds, mut gen)| {
                        for _ in 0..STEPS {
                            match gen.next_update() {
                                Update::Add(s) => {
                                    ds.add(s).unwrap();
                                }
                                Update::Del(id) => {
                                    ds.delete(id).unwrap();
                                }
                            }
                        }
                        black_box(ds.len())
                    },
                    BatchSize::LargeInput,
                )
            });
        }
    }
    g.finish();
}

fn batched_updates(c: &mut Criterion) {
    let mut g = c.benchmark_group("batched_updates");
    g.sample_size(10);
    let m = 4096;
    for &size in &[16usize, 128] {
        let work = batches(N, m, R, 13, size, STEPS / 8);
        g.throughput(Throughput::Elements(work.iter().map(Vec::len).sum::<usize>() as u64));
        for sched in [Scheduler::Sequential, Scheduler::Parallel] {
            g.bench_with_input(BenchmarkId::new(sched.to_string(), size), &work, |b, work| {
                b.iter_batched(
                    || (loaded(N, m, R, forced_config(0), 13).0, work.clone()),
                    |(mut ds, work)| {
                        for batch in work {
                            ds.apply_batch(batch, sched).unwrap();
                        }
                        black_box(ds.len())
                    },
                    BatchSize::LargeInput,
                )
            });
        }
    }
    g.finish();
}

criterion_group!(benches, single_updates, batched_updates);
criterion_main!(benches);
