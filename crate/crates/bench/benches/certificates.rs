use std::hint::black_box;

use aapt_core::channel::{apply_on, random_cptp};
use aapt_core::jamiolkowski::certify_faithful;
use aapt_core::linalg::{RandomSeed, Subsystem};
use aapt_core::reconstruct::reconstruct_channel;
use aapt_core::sensitivity::{certify_sensitive, make_prop4_state, ChannelClass};
use aapt_core::state::random_mixed;
use aapt_core::witness::faithfulness_witness;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn certificates(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify_faithful");
    for d in [2usize, 3, 4] {
        let rho = random_mixed(d, d, d * d, RandomSeed(d as u64)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &rho, |b, rho| {
            b.iter(|| certify_faithful(black_box(rho), Subsystem::A, 0.0))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("certify_sensitive");
    for d in [2usize, 3, 4] {
        let rho = random_mixed(d, d, d * d, RandomSeed(d as u64)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &rho, |b, rho| {
            b.iter(|| certify_sensitive(black_box(rho), Subsystem::A, ChannelClass::Unital, 0.0).unwrap())
        });
    }
    group.finish();
}

fn witness(c: &mut Criterion) {
    let mut group = c.benchmark_group("faithfulness_witness");
    for lambda in [&[0.7, 0.3][..], &[0.5, 0.3, 0.2], &[0.4, 0.3, 0.2, 0.1]] {
        let rho = make_prop4_state(lambda).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(lambda.len()), &rho, |b, rho| {
            b.iter(|| faithfulness_witness(black_box(rho), Subsystem::A, 0.0).unwrap())
        });
    }
    group.finish();
}

fn reconstruction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstruct_channel");
    for d in [2usize, 3, 4] {
        let probe = random_mixed(d, d, d * d, RandomSeed(10 + d as u64)).unwrap();
        let truth = random_cptp(d, 2, RandomSeed(20 + d as u64)).unwrap();
        let output = apply_on(&truth, &probe, Subsystem::A).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &(probe, output), |b, (probe, output)| {
            b.iter(|| reconstruct_channel(black_box(probe), black_box(output), Subsystem::A, 0.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, certificates, witness, reconstruction);
criterion_main!(benches);
