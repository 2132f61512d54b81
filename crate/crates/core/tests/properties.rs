use proptest::prelude::*;
use sumlab_core::branching::{decompose_hull, decompose_min_length, BranchingFunction};
use sumlab_core::constructions::{
    generator_constant, random_frostman, random_katz_tao, random_subset, random_uniform, sharpness_example,
    small_diameter_example, Rounding, SharpnessParams,
};
use sumlab_core::extraction::{is_uniform, uniformize};
use sumlab_core::regularity::{frostman_constant, katz_tao_constant, Mode};
use sumlab_core::sumproduct::{adversarial_pairs, affine_image, sum_histogram};
use sumlab_core::{DyadicInterval, GridSet, Rational, Surd};

fn set(max_q: u32, max_n: usize) -> impl Strategy<Value = GridSet> {
    (1..=max_q).prop_flat_map(move |q| {
        prop::collection::vec(0..=1u64 << q, 1..=max_n).prop_map(move |v| GridSet::new(q, 1, v).unwrap())
    })
}

fn unit_set(max_q: u32, max_n: usize) -> impl Strategy<Value = GridSet> {
    (1..=max_q).prop_flat_map(move |q| {
        prop::collection::vec(0..1u64 << q, 1..=max_n).prop_map(move |v| GridSet::new(q, 1, v).unwrap())
    })
}

fn exponent() -> impl Strategy<Value = Rational> {
    (0i64..=8).prop_map(|n| Rational::new(n, 8))
}

fn pair(max_q: u32, max_n: usize) -> impl Strategy<Value = (GridSet, GridSet, u64)> {
    (1..=max_q).prop_flat_map(move |q| {
        let s =
            move || prop::collection::vec(0..1u64 << q, 1..=max_n).prop_map(move |v| GridSet::new(q, 1, v).unwrap());
        (s(), s(), 0..=1u64 << q)
    })
}

fn function() -> impl Strategy<Value = BranchingFunction> {
    (1u32..=4, 1usize..=24).prop_flat_map(|(t, m)| {
        prop::collection::vec(0..=t as i64, m).prop_map(move |steps| {
            let mut v = vec![Rational::from_integer(0)];
            for s in steps {
                v.push(*v.last().unwrap() + Rational::new(s, t as i64));
            }
            BranchingFunction::new(t, v).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn covering_is_monotone(p in set(12, 80)) {
        let counts: Vec<usize> = (0..=p.q()).map(|l| p.covering_number(l).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(counts[p.q() as usize], p.len());
        prop_assert!(counts[0] <= 2);
    }

    #[test]
    fn dyadic_and_exact_are_within_two_to_the_s(p in set(10, 60), s in exponent()) {
        for (d, e) in [
            (katz_tao_constant(&p, s, Mode::Dyadic).unwrap(), katz_tao_constant(&p, s, Mode::Exact).unwrap()),
            (frostman_constant(&p, s, Mode::Dyadic).unwrap(), frostman_constant(&p, s, Mode::Exact).unwrap()),
        ] {
            prop_assert!(d <= e);
            prop_assert!(e <= d.mul(&Surd::pow2(s)));
        }
    }

    #[test]
    fn frostman_is_rescaled_katz_tao(p in set(10, 60), s in exponent()) {
        for mode in [Mode::Dyadic, Mode::Exact] {
            let kt = katz_tao_constant(&p, s, mode).unwrap();
            let fr = frostman_constant(&p, s, mode).unwrap();
            let scale = Surd::pow2(s * Rational::from_integer(p.q() as i64)).div(&Surd::from_int(p.len() as u64));
            prop_assert_eq!(fr, kt.mul(&scale));
        }
    }

    #[test]
    fn embedding_commutes_with_covering(p in unit_set(8, 40), level in 0u32..=4, pos in any::<u64>()) {
        let cell = DyadicInterval::new(level, pos % (1 << level));
        let e = p.embed_into(cell).unwrap();
        for k in 0..=p.q() {
            prop_assert_eq!(e.covering_number(level + k).unwrap(), p.covering_number(k).unwrap());
        }
        prop_assert_eq!(e.renormalize(cell).unwrap(), p);
    }

    #[test]
    fn uniformize_keeps_a_uniform_share(p in unit_set(12, 200), t in 1u32..=4) {
        prop_assume!(p.q() % t == 0);
        let m = p.q() / t;
        let (sub, st) = uniformize(&p, t).unwrap();
        prop_assert!(sub.is_subset_of(&p));
        prop_assert_eq!(is_uniform(&sub, t).unwrap(), Ok(st.clone()));
        prop_assert_eq!(st.size() as usize, sub.len());
        prop_assert!((sub.len() as u128) * (2 * t as u128).pow(m) >= p.len() as u128);
    }

    #[test]
    fn hull_minorant_touches_at_breakpoints(f in function()) {
        let d = decompose_hull(&f).unwrap();
        let g = d.minorant();
        for j in 0..=f.m() {
            prop_assert!(g[j as usize] <= f.at(j));
        }
        for &b in &d.breakpoints {
            prop_assert_eq!(g[b as usize], f.at(b));
        }
    }

    #[test]
    fn min_length_loses_at_most_eps(f in function(), k in 1i64..=30) {
        let eps = Rational::new(k, 10);
        let d = decompose_min_length(&f, eps).unwrap();
        let m = Rational::from_integer(f.m() as i64);
        prop_assert!(d.weighted_sum() >= f.at(f.m()) - eps * m);
        prop_assert!(d.weighted_sum() <= f.at(f.m()));
        prop_assert_eq!(*d.breakpoints.last().unwrap(), f.m());
    }

    #[test]
    fn histogram_counts_every_pair((a, b, k) in pair(10, 40)) {
        let h = sum_histogram(&a, &b, k).unwrap();
        prop_assert_eq!(h.iter().map(|x| x.1).sum::<u64>(), (a.len() * b.len()) as u64);
        prop_assert!(h.windows(2).all(|w| w[0].0 < w[1].0));
        let img = affine_image(&a, &b, k).unwrap();
        prop_assert_eq!(img.len(), h.len());
        for &(bin, _) in &h {
            prop_assert!(img.contains(bin));
        }
    }

    #[test]
    fn adversary_grows_with_theta((a, b, k) in pair(8, 20)) {
        let full = affine_image(&a, &b, k).unwrap().len();
        let mut last = 0;
        for n in 1..=8 {
            let (g, cov) = adversarial_pairs(&a, &b, k, &Surd::from_ratio(n, 8)).unwrap();
            prop_assert!(cov >= last && cov <= full);
            prop_assert!(g.len() as u64 * 8 >= n * (a.len() * b.len()) as u64);
            last = cov;
        }
        prop_assert_eq!(last, full);
    }

    #[test]
    fn shifting_a_shifts_the_image((a, b, k) in pair(10, 30)) {
        prop_assume!(*a.indices().last().unwrap() < (1 << a.q()) - 1);
        let shifted = GridSet::new(a.q(), 1, a.indices().iter().map(|i| i + 1)).unwrap();
        let img = affine_image(&a, &b, k).unwrap();
        let img2 = affine_image(&shifted, &b, k).unwrap();
        prop_assert_eq!(img2.indices().iter().map(|i| i - 1).collect::<Vec<_>>(), img.indices().to_vec());
    }

    #[test]
    fn small_diameter_images_stay_small(q in 2u32..=12, rb in 0u32..=12, extra in 0u32..=2, n in 1usize..=64, seed in any::<u64>()) {
        prop_assume!(rb <= q);
        let rc = (q - rb + extra).min(q);
        let a = random_subset(q, n.min(1 << q), seed).unwrap();
        let (a, b, c) = small_diameter_example(q, rb, rc, Some(a)).unwrap();
        for &k in c.indices() {
            prop_assert!(affine_image(&a, &b, k).unwrap().len() <= 2 * a.len());
        }
    }

    #[test]
    fn generators_are_deterministic_and_regular(t in 1u32..=4, m in 1u32..=4, s in exponent(), seed in any::<u64>()) {
        let q = t * m;
        let kt = random_katz_tao(q, t, s, seed).unwrap();
        prop_assert_eq!(&kt, &random_katz_tao(q, t, s, seed).unwrap());
        prop_assert!(katz_tao_constant(&kt, s, Mode::Exact).unwrap() <= generator_constant(t, s));
        let fr = random_frostman(q, t, s, seed).unwrap();
        prop_assert!(frostman_constant(&fr, s, Mode::Exact).unwrap() <= generator_constant(t, s));
        let exps: Vec<u32> = (0..m).map(|j| (seed >> (2 * j)) as u32 % (t + 1)).collect();
        let u = random_uniform(q, t, &exps, seed).unwrap();
        prop_assert_eq!(is_uniform(&u, t).unwrap().unwrap().branching, exps.iter().map(|e| 1u64 << e).collect::<Vec<_>>());
    }
}

#[test]
fn sharpness_product_is_disjoint() {
    let r = Rational::new;
    for (q, rounding) in [(12, Rounding::Exact), (18, Rounding::Floor), (24, Rounding::Exact)] {
        let p = SharpnessParams::new(q, r(1, 2), r(1, 4), r(1, 2), r(1, 5)).unwrap();
        let ex = sharpness_example(&p, rounding).unwrap();
        let m = &ex.meta;
        assert_eq!(ex.c.len(), 1 << (m.c0_exp + m.c1_exp), "q={q}");
        assert_eq!((ex.a.len(), ex.b.len(), ex.c.len()), (m.a_size, m.b_size, m.c_size));
        assert_eq!(ex.a.len(), 1 << m.a_exp);
        assert_eq!(ex.b.len(), 1 << m.b_exp);
    }
}
