use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sumlab_bench::{regular_triple, sharpness};
use sumlab_core::branching::{decompose_hull, decompose_min_length, BranchingFunction};
use sumlab_core::regularity::{katz_tao_constant, Mode};
use sumlab_core::sumproduct::{adversarial_pairs, expansion_search, sum_histogram};
use sumlab_core::{Rational, Surd};

fn covering(c: &mut Criterion) {
    let (a, _, _) = regular_triple(20);
    c.bench_function("covering_all_levels_q20", |b| {
        b.iter(|| (0..=a.q()).map(|l| a.covering_number(l).unwrap()).sum::<usize>())
    });
}

fn regularity(c: &mut Criterion) {
    let mut g = c.benchmark_group("katz_tao_constant");
    for q in [8u32, 12] {
        let (a, _, _) = regular_triple(q);
        for mode in [Mode::Dyadic, Mode::Exact] {
            g.bench_with_input(BenchmarkId::new(format!("{mode:?}"), q), &a, |b, a| {
                b.iter(|| katz_tao_constant(black_box(a), Rational::new(1, 2), mode).unwrap())
            });
        }
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    let values: Vec<Rational> = (0..=64i64).map(|j| Rational::new(j * j % 7 + 3 * j, 4)).collect();
    let mut v = vec![Rational::from_integer(0)];
    for w in values.windows(2) {
        let step = (w[1] - w[0]).min(Rational::from_integer(1)).max(Rational::from_integer(0));
        v.push(*v.last().unwrap() + step);
    }
    let f = BranchingFunction::new(4, v).unwrap();
    c.bench_function("hull_m64", |b| b.iter(|| decompose_hull(black_box(&f)).unwrap()));
    c.bench_function("min_length_m64", |b| {
        b.iter(|| decompose_min_length(black_box(&f), Rational::new(1, 5)).unwrap())
    });
}

fn sums(c: &mut Criterion) {
    let (a, bs, cs) = sharpness(24);
    let k = cs.indices()[cs.len() / 2];
    c.bench_function("histogram_sharpness_q24", |b| b.iter(|| sum_histogram(&a, &bs, black_box(k)).unwrap()));
    let theta = Surd::from_ratio(1, 2);
    c.bench_function("adversary_sharpness_q24", |b| {
        b.iter(|| adversarial_pairs(&a, &bs, black_box(k), &theta).unwrap())
    });
    let (a, bs, cs) = regular_triple(12);
    let mut g = c.benchmark_group("expansion");
    g.sample_size(10);
    g.bench_function("search_q12", |b| b.iter(|| expansion_search(&a, &bs, &cs, &theta).unwrap()));
    g.finish();
}

criterion_group!(benches, covering, regularity, decomposition, sums);
criterion_main!(benches);
