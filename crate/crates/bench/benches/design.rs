use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hybridbeam::admm::{tx, AdmmConfig};
use hybridbeam::boxsolve::{self, Penalty};
use hybridbeam::channel::{self, ArrayGeometry, ClusterParams};
use hybridbeam::{baselines, designer, seed, LinkSetup};

fn draw(n_t: usize, n_r: usize, s: u64) -> channel::ChannelRealization {
    channel::draw_channel(
        &mut seed::rng(s),
        &ArrayGeometry::ula(n_t),
        &ArrayGeometry::ula(n_r),
        &ClusterParams::default(),
    )
}

fn bench_link(c: &mut Criterion) {
    let setup = LinkSetup::defaults(10.0);
    let ch = draw(32, 5, 1);
    c.bench_function("design_link 32x5", |b| b.iter(|| designer::design_link(black_box(&ch), &setup, 7).unwrap()));
    c.bench_function("hybrid_fixedbit 32x5", |b| {
        b.iter(|| baselines::hybrid_fixedbit(black_box(&ch), &setup, 4, 7).unwrap())
    });
    c.bench_function("digital_fullbit 32x5", |b| {
        b.iter(|| baselines::digital_fullbit(black_box(&ch), &setup).unwrap())
    });
}

fn bench_tx_antennas(c: &mut Criterion) {
    let mut group = c.benchmark_group("design_tx");
    let setup = LinkSetup::defaults(10.0);
    for n_t in [16, 32, 64] {
        let ch = draw(n_t, 5, 2);
        let r = channel::digital_references(&ch, 5, setup.noise_var, 5.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n_t), &r.f_dbf, |b, f| {
            b.iter(|| {
                let mut rng = seed::rng(3);
                tx::design_tx(f, 5, 0.001, &setup.range, &setup.power, &AdmmConfig::default(), &mut rng)
            })
        });
    }
    group.finish();
}

fn bench_boxsolve(c: &mut Criterion) {
    let setup = LinkSetup::defaults(10.0);
    let ch = draw(32, 5, 4);
    let r = channel::digital_references(&ch, 5, setup.noise_var, 5.0).unwrap();
    let mut rng = seed::rng(5);
    let d = tx::design_tx(&r.f_dbf, 5, 0.001, &setup.range, &setup.power, &AdmmConfig::default(), &mut rng);
    let pen = Penalty { per_bit: 0.1, include_trace: true };
    let prob = boxsolve::reduce_problem(
        &r.f_dbf,
        &d.factors.rf,
        &d.factors.bb,
        0.001,
        pen,
        setup.range.lower(),
        setup.range.upper(),
    );
    c.bench_function("solve_box L=5", |b| b.iter(|| boxsolve::solve_box(black_box(&prob), 1e-8, 500)));
}

fn bench_bruteforce(c: &mut Criterion) {
    let mut setup = LinkSetup::defaults(10.0);
    setup.dims = hybridbeam::SystemDims { n_t: 8, n_r: 4, l_t: 2, l_r: 2, n_s: 2 };
    setup.range = hybridbeam::BitRange::new(1, 3).unwrap();
    let ch = draw(8, 4, 6);
    let bf = baselines::BruteForceConfig::default();
    let mut group = c.benchmark_group("brute_force");
    group.sample_size(20);
    group.bench_function("L=2 bits 1..3", |b| {
        b.iter(|| baselines::brute_force(black_box(&ch), &setup, &bf, 9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_link, bench_tx_antennas, bench_boxsolve, bench_bruteforce);
criterion_main!(benches);
