use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use flagft::circuits::build_round;
use flagft::codes::{build_color488, build_concat_steane49};
use flagft::decode::{build_lut, code_capacity_lut};
use flagft::montecarlo::{trial_rng, Protocol};
use flagft::nogo::{build_w2l_w4l, exhaustive_search};
use flagft::{FaultContext, FlagPolicy, PauliOp};

fn pauli(c: &mut Criterion) {
    let a = PauliOp::from_bits(49, 0x1234_5678_9abc, 0x0fed_cba9_8765);
    let b = PauliOp::from_bits(49, 0x0aaa_5555_aaaa, 0x1555_aaaa_5555);
    c.bench_function("pauli_multiply", |bn| bn.iter(|| black_box(&a).mul_unchecked(black_box(&b))));
    c.bench_function("pauli_anticommutes", |bn| bn.iter(|| black_box(&a).anticommutes_unchecked(black_box(&b))));
}

fn bfs(c: &mut Criterion) {
    let code = build_concat_steane49();
    let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
    let ctx = FaultContext::new(&code, &sched).unwrap();
    let mut g = c.benchmark_group("bfs");
    g.sample_size(10);
    g.bench_function("steane49_t2", |bn| bn.iter(|| ctx.check_distinguishable(2, 1 << 26).unwrap()));
    g.bench_function("steane49_t3", |bn| bn.iter(|| ctx.check_distinguishable(3, 1 << 26).unwrap()));
    g.finish();
}

fn decoding(c: &mut Criterion) {
    let code = build_concat_steane49();
    let sched = build_round(&code, &FlagPolicy::Straddle).unwrap();
    let ctx = FaultContext::new(&code, &sched).unwrap();
    let lut = build_lut(&ctx, 2, 1 << 26).unwrap();
    let cc = code_capacity_lut(&code, 3).unwrap();
    let sector = &lut.sectors[0];
    // Keys at distance 1..3 from table entries exercise the meet-in-the-middle path.
    let keys: Vec<u64> = (0..64u64).map(|i| (i * 0x9e37_79b9) & ((1 << 24) - 1)).collect();
    c.bench_function("mim_radius3", |bn| {
        bn.iter(|| keys.iter().filter_map(|&k| sector.mim(black_box(k), 3)).count())
    });
    let proto = Protocol::new(&ctx, &lut, &cc);
    let mut i = 0u64;
    c.bench_function("trial_steane49_p1.6e-3", |bn| {
        bn.iter(|| {
            i += 1;
            proto.run_trial(1.6e-3, &mut trial_rng(1, 0, i))
        })
    });
}

fn nogo(c: &mut Criterion) {
    let code = build_color488(5).unwrap();
    let sets = build_w2l_w4l(&code).unwrap();
    let mut g = c.benchmark_group("nogo");
    g.sample_size(10);
    g.bench_function("orderings_1000", |bn| bn.iter(|| exhaustive_search(&code, &sets, 1000, 1).unwrap()));
    g.finish();
}

criterion_group!(benches, pauli, bfs, decoding, nogo);
criterion_main!(benches);
