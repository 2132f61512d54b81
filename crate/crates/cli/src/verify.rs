//! The acceptance battery: twelve seeded, exact checks.

use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sumlab_core::branching::{
    certificate_constant, decompose_hull, decompose_min_length, frostman_certificate, katz_tao_certificate,
    BranchingFunction,
};
use sumlab_core::constructions::{
    arithmetic_progression, concentration_example, random_frostman, random_katz_tao, random_subset, random_uniform,
    sharpness_example, small_diameter_example, Rounding, SharpnessParams,
};
use sumlab_core::extraction::{extract_katz_tao_subset, is_uniform, uniformize, EXTRACTION_C_IMPL, EXTRACTION_K};
use sumlab_core::prooftrace::{
    scale_window_abc, scale_window_c3, scale_window_c4, verify_certificate, TraceParams, WindowCertificate,
};
use sumlab_core::regularity::{frostman_constant, katz_tao_constant, Mode};
use sumlab_core::sumproduct::{
    adversarial_pairs, affine_image, check_condition_pi, expansion_search, pair_image, sum_histogram, Exponents,
    PiVariant,
};
use sumlab_core::{exact::cmp_power_product, Error, GridSet, Rational, Surd};

use crate::oracle;

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "small-diameter law"),
    (2, "sharpness example"),
    (3, "concentration example"),
    (4, "uniformization"),
    (5, "hull decomposition"),
    (6, "min-length decomposition"),
    (7, "adversary optimality"),
    (8, "regularity oracle"),
    (9, "katz-tao extraction"),
    (10, "branching certificates"),
    (11, "expansion trend"),
    (12, "proof-trace soundness"),
];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:2}] {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// `all` or a comma-separated list of criterion numbers.
pub fn parse_suite(s: &str) -> Result<Vec<u32>> {
    if s.trim() == "all" {
        return Ok(CRITERIA.iter().map(|c| c.0).collect());
    }
    let mut ids = Vec::new();
    for part in s.split(',') {
        let id: u32 = part.trim().parse().with_context(|| format!("bad criterion {part:?}"))?;
        ensure!((1..=12).contains(&id), "criterion {id} is not in 1..=12");
        ids.push(id);
    }
    Ok(ids)
}

pub fn run_suite(ids: &[u32], mut each: impl FnMut(&Outcome)) -> Vec<Outcome> {
    ids.iter()
        .map(|&id| {
            let o = run_criterion(id);
            each(&o);
            o
        })
        .collect()
}

pub fn run_criterion(id: u32) -> Outcome {
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1).to_string();
    let start = Instant::now();
    let res = match id {
        1 => small_diameter(),
        2 => sharpness(),
        3 => concentration(),
        4 => uniformization(),
        5 => hull(),
        6 => min_length(),
        7 => adversary(),
        8 => regularity(),
        9 => extraction(),
        10 => certificates(),
        11 => expansion_trend(),
        12 => traces(),
        _ => Err(anyhow::anyhow!("no such criterion")),
    };
    let elapsed = start.elapsed();
    let (passed, detail) = match res {
        Ok(d) => (true, d),
        Err(e) => (false, format!("{e:#}")),
    };
    Outcome { id, name, passed, detail, elapsed }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn rng(id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + id)
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<()> {
    let t = start.elapsed();
    ensure!(t < limit, "{what} took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs());
    Ok(())
}

fn small_diameter() -> Result<String> {
    let start = Instant::now();
    let q = 12;
    let mut rng = rng(1);
    let mut worst = 0f64;
    for inst in 0..50u64 {
        let rb = rng.random_range(1..q);
        let rc = (q - rb + rng.random_range(0..=2)).min(q);
        let a = if inst % 2 == 0 {
            random_subset(q, rng.random_range(1..=300), inst)?
        } else {
            let gap = rng.random_range(0..=6);
            arithmetic_progression(q, gap, rng.random_range(1..=(1u64 << (q - gap)).min(200)), 0)?
        };
        let (a, b, c) = small_diameter_example(q, rb, rc, Some(a))?;
        for &k in c.indices() {
            let img = affine_image(&a, &b, k)?.len();
            ensure!(img <= 2 * a.len(), "instance {inst}: |A+cB| = {img} > 2|A| = {} at c = {k}", 2 * a.len());
            worst = worst.max(img as f64 / a.len() as f64);
        }
    }
    within(start, Duration::from_secs(10), "50 instances")?;
    Ok(format!("50 instances, max |A+cB|/|A| = {worst:.3} ≤ 2"))
}

fn sharpness() -> Result<String> {
    let start = Instant::now();
    let (alpha, eta, beta, gamma) = (r(1, 2), r(1, 5), r(1, 4), r(1, 2));
    let mut ratios = Vec::new();
    for (q, rounding) in [(12, Rounding::Exact), (18, Rounding::Floor), (24, Rounding::Exact)] {
        let p = SharpnessParams::new(q, alpha, beta, gamma, eta)?;
        let ex = sharpness_example(&p, rounding)?;
        let (a, b, c) = (&ex.a, &ex.b, &ex.c);
        let prod = a.len() as u128 * b.len() as u128 * c.len() as u128;
        ensure!(prod <= 1_000_000_000, "q={q}: |A||B||C| = {prod} exceeds 10^9");
        for (name, s) in [("A", a), ("B", b)] {
            let kt = katz_tao_constant(s, r(1, 2), Mode::Dyadic)?;
            ensure!(kt <= Surd::from_int(4), "q={q}: Katz-Tao constant of {name} is {kt} > 4");
        }
        let fr = frostman_constant(c, r(1, 5), Mode::Dyadic)?;
        ensure!(fr <= Surd::from_int(8), "q={q}: Frostman constant of C is {fr} > 8");
        // |B|^γ |C|^α ≥ δ^{αγ+η}
        let relaxed =
            cmp_power_product(b.len() as u64, gamma, c.len() as u64, alpha, -(alpha * gamma + eta) * int(q as i64));
        ensure!(relaxed.is_ge(), "q={q}: relaxed condition fails");
        let union = sumlab_core::sumproduct::sum_product_covering(a, b, c)?;
        let ratio = union as f64 / a.len() as f64;
        ensure!(ratio <= 16.0, "q={q}: |A+BC|/|A| = {ratio:.3} > 16");
        ratios.push((q, ratio));
    }
    let lo = ratios.iter().map(|x| x.1).fold(f64::MAX, f64::min);
    let hi = ratios.iter().map(|x| x.1).fold(0f64, f64::max);
    ensure!(hi <= 2.0 * lo, "ratios {ratios:?} vary by more than a factor 2");
    within(start, Duration::from_secs(120), "sharpness construction")?;
    let list: Vec<String> = ratios.iter().map(|(q, x)| format!("q={q}: {x:.3}")).collect();
    Ok(format!("|A+BC|/|A| {}", list.join(", ")))
}

fn concentration() -> Result<String> {
    let start = Instant::now();
    let q = 12;
    let (a, b) = concentration_example(q, 8, 4)?;
    let c = GridSet::full(q)?;
    let worst = c
        .indices()
        .iter()
        .map(|&k| affine_image(&a, &b, k).map(|g| g.len()))
        .try_fold(0, |m, x| x.map(|x| m.max(x)))?;
    ensure!(worst <= 4 * a.len(), "max |A+cB| = {worst} > 4|A| = {}", 4 * a.len());
    within(start, Duration::from_secs(30), "concentration scan")?;
    Ok(format!("max_c |A+cB|/|A| = {:.3} ≤ 4", worst as f64 / a.len() as f64))
}

fn uniformization() -> Result<String> {
    let mut rng = rng(4);
    let mut n = 0;
    for (q, t) in [(8u32, 2u32), (12, 3), (12, 4)] {
        let m = q / t;
        for i in 0..200u64 {
            let p = if i % 2 == 0 {
                let size = rng.random_range(1..=(1usize << q).min(600));
                random_subset(q, size, rng.random())?
            } else {
                // clustered: a random subset of a random set of coarse cells
                let cells = random_subset(q / 2, rng.random_range(1..=8), rng.random())?;
                let mut pts = Vec::new();
                for &cell in cells.indices() {
                    let base = cell << (q - q / 2);
                    for _ in 0..rng.random_range(1..=40) {
                        pts.push(base + rng.random_range(0..1u64 << (q - q / 2)));
                    }
                }
                GridSet::new(q, 1, pts)?
            };
            let (sub, st) = uniformize(&p, t)?;
            ensure!(sub.is_subset_of(&p), "q={q} T={t}: output is not a subset");
            let check = is_uniform(&sub, t)?;
            ensure!(check.as_ref().is_ok_and(|s| *s == st), "q={q} T={t}: output is not uniform: {check:?}");
            let lhs = BigInt::from(sub.len()) * BigInt::from(2 * t).pow(m);
            ensure!(
                lhs >= BigInt::from(p.len()),
                "q={q} T={t}: |P'| = {} below (2T)^-m |P| with |P| = {}",
                sub.len(),
                p.len()
            );
            n += 1;
        }
    }
    Ok(format!("{n} sets uniform with |P'|(2T)^m ≥ |P|"))
}

fn random_function(rng: &mut ChaCha8Rng, m: u32) -> Result<BranchingFunction> {
    let t = rng.random_range(1..=4u32);
    let mut v = vec![int(0)];
    for _ in 0..m {
        let step = rng.random_range(0..=t) as i64;
        v.push(v.last().unwrap() + r(step, t as i64));
    }
    Ok(BranchingFunction::new(t, v)?)
}

fn corpus() -> Result<Vec<BranchingFunction>> {
    let mut rng = rng(5);
    let mut out = Vec::new();
    for m in [4, 8, 16, 32] {
        for _ in 0..500 {
            out.push(random_function(&mut rng, m)?);
        }
    }
    Ok(out)
}

fn hull() -> Result<String> {
    let fs = corpus()?;
    for (i, f) in fs.iter().enumerate() {
        let d = decompose_hull(f)?;
        ensure!(d.slopes.windows(2).all(|w| w[0] < w[1]), "function {i}: slopes not increasing");
        ensure!(
            d.breakpoints == oracle::hull_vertices(f),
            "function {i}: breakpoints differ from the brute-force hull"
        );
        for (w, &s) in d.breakpoints.windows(2).zip(&d.slopes) {
            ensure!(f.is_superlinear(w[0], w[1], s, int(0))?.holds, "function {i}: block {w:?} not superlinear");
        }
        ensure!(d.weighted_sum() == f.at(f.m()), "function {i}: Σ ≠ f(m)");
    }
    Ok(format!("{} functions, hull matches brute force, Σ = f(m) exactly", fs.len()))
}

fn min_length() -> Result<String> {
    let fs = corpus()?;
    let mut n = 0;
    for eps in [r(1, 10), r(1, 5), r(1, 2)] {
        for (i, f) in fs.iter().enumerate() {
            let m = int(f.m() as i64);
            let d = decompose_min_length(f, eps)?;
            ensure!(d.slopes.windows(2).all(|w| w[0] < w[1]), "ε={eps} function {i}: slopes not increasing");
            for (w, &s) in d.breakpoints.windows(2).zip(&d.slopes) {
                ensure!(int((w[1] - w[0]) as i64) >= eps / int(3) * m, "ε={eps} function {i}: short block {w:?}");
                ensure!(
                    f.is_superlinear(w[0], w[1], s, int(0))?.holds,
                    "ε={eps} function {i}: block {w:?} not superlinear"
                );
            }
            ensure!(d.weighted_sum() >= f.at(f.m()) - eps * m, "ε={eps} function {i}: Σ below f(m) - εm");
            n += 1;
        }
    }
    Ok(format!("{n} decompositions: long blocks, superlinear, Σ ≥ f(m) - εm"))
}

fn adversary() -> Result<String> {
    let mut rng = rng(7);
    let mut done = 0;
    let mut max_bins = 0;
    while done < 100 {
        let q = rng.random_range(3..=6);
        let a = random_subset(q, rng.random_range(1..=6), rng.random())?;
        let b = random_subset(q, rng.random_range(1..=6), rng.random())?;
        let k = rng.random_range(0..=1u64 << q);
        let hist = sum_histogram(&a, &b, k)?;
        if hist.len() > 12 {
            continue;
        }
        let mut bins: Vec<(u64, u64)> = Vec::new();
        for &i in a.indices() {
            for &j in b.indices() {
                let bin = oracle::bin(q, i, j, k);
                match bins.iter_mut().find(|x| x.0 == bin) {
                    Some(x) => x.1 += 1,
                    None => bins.push((bin, 1)),
                }
            }
        }
        bins.sort();
        ensure!(bins == hist, "histogram disagrees with the rational oracle at q={q}, k={k}");
        let mults: Vec<u64> = hist.iter().map(|x| x.1).collect();
        let n = (a.len() * b.len()) as u64;
        for theta in [r(1, 4), r(1, 2), r(9, 10)] {
            let th = Surd::from_rational(BigRational::new(BigInt::from(*theta.numer()), BigInt::from(*theta.denom())));
            let (g, cov) = adversarial_pairs(&a, &b, k, &th)?;
            let budget = (theta * int(n as i64)).ceil().to_integer() as u64;
            ensure!(g.len() as u64 >= budget, "pair set below budget");
            ensure!(pair_image(&g, k)?.len() == cov, "reported covering differs from the pair image");
            let best = oracle::exhaustive_adversary(&mults, budget);
            ensure!(cov == best, "θ={theta} q={q} k={k}: greedy {cov} vs exhaustive {best}");
        }
        max_bins = max_bins.max(hist.len());
        done += 1;
    }
    Ok(format!("100 instances (up to {max_bins} bins) × 3 θ equal the exhaustive minimum"))
}

fn regularity_corpus() -> Result<Vec<GridSet>> {
    let mut rng = rng(8);
    let mut sets = Vec::new();
    for q in [6u32, 8, 10, 12] {
        for _ in 0..6 {
            sets.push(random_subset(q, rng.random_range(1..=200usize.min(1 << q)), rng.random())?);
        }
        sets.push(arithmetic_progression(q, q / 3, 1u64 << (q - q / 3).min(7), 3)?);
    }
    for seed in 0..6 {
        sets.push(random_katz_tao(12, 3, r(1, 2), seed)?);
        sets.push(random_frostman(12, 4, r(1, 4), seed)?);
    }
    let ex = sharpness_example(&SharpnessParams::new(12, r(1, 2), r(1, 4), r(1, 2), r(1, 5))?, Rounding::Exact)?;
    sets.extend([ex.a, ex.b, ex.c]);
    sets.push(GridSet::new(10, 1, [0, 1, 2, 3, 512, 1000, 1023, 1024])?);
    sets.retain(|s| !s.is_empty() && s.len() <= 200);
    Ok(sets)
}

fn regularity() -> Result<String> {
    let sets = regularity_corpus()?;
    let mut n = 0;
    for (i, p) in sets.iter().enumerate() {
        for s in [r(1, 4), r(1, 2), r(3, 4), int(1)] {
            let (kt_e, fr_e) = (katz_tao_constant(p, s, Mode::Exact)?, frostman_constant(p, s, Mode::Exact)?);
            let (kt_d, fr_d) = (katz_tao_constant(p, s, Mode::Dyadic)?, frostman_constant(p, s, Mode::Dyadic)?);
            let (kt_b, fr_b) = oracle::brute_exact(p, s);
            ensure!(
                kt_e == kt_b && fr_e == fr_b,
                "set {i} s={s}: exact ({kt_e}, {fr_e}) vs brute force ({kt_b}, {fr_b})"
            );
            let (kt_bd, fr_bd) = oracle::brute_dyadic(p, s);
            ensure!(
                kt_d == kt_bd && fr_d == fr_bd,
                "set {i} s={s}: dyadic ({kt_d}, {fr_d}) vs brute force ({kt_bd}, {fr_bd})"
            );
            let up = Surd::pow2(s);
            for (name, d, e) in [("Katz-Tao", &kt_d, &kt_e), ("Frostman", &fr_d, &fr_e)] {
                ensure!(d <= e && *e <= d.mul(&up), "set {i} s={s}: {name} dyadic {d}, exact {e} out of order");
            }
            n += 1;
        }
    }
    Ok(format!("{} sets × 4 exponents: brute force agrees, dyadic ≤ exact ≤ 2^s dyadic ({n} checks)", sets.len()))
}

fn extraction() -> Result<String> {
    let mut rng = rng(9);
    let c_impl = Surd::from_int(EXTRACTION_C_IMPL);
    let mut worst = Surd::from_int(0);
    for inst in 0..100u64 {
        let q = rng.random_range(6..=14u32);
        let p = if inst % 2 == 0 {
            random_subset(q, rng.random_range(1..=(1usize << q).min(2000)), rng.random())?
        } else {
            random_frostman(q - q % 2, 2, r(rng.random_range(1..=3), 4), rng.random())?
        };
        let q = p.q();
        let l = rng.random_range(1..=q);
        let s = [r(1, 4), r(1, 2), r(3, 4), int(1)][rng.random_range(0..4)];
        let out = extract_katz_tao_subset(&p, l, s)?;
        ensure!(out.is_subset_of(&p), "instance {inst}: output not a subset");
        let skel = out.skeleton(l)?;
        ensure!(skel.len() == out.len(), "instance {inst}: two points share a ρ-cell");
        let kt = katz_tao_constant(&skel, s, Mode::Dyadic)?;
        ensure!(kt <= c_impl, "instance {inst}: skeleton Katz-Tao constant {kt} > {EXTRACTION_C_IMPL}");
        let c = katz_tao_constant(&p, s, Mode::Dyadic)?;
        let lhs = Surd::from_int(out.len() as u64 * EXTRACTION_K).mul(&c);
        let rhs = Surd::pow2(-s * int((q - l) as i64)).mul(&Surd::from_int(p.len() as u64));
        ensure!(lhs >= rhs, "instance {inst}: |P'| = {} too small (q={q}, l={l}, s={s})", out.len());
        worst = worst.max(kt);
    }
    Ok(format!("100 inputs, largest skeleton constant {worst} (bound {EXTRACTION_C_IMPL}), size bound holds with K = {EXTRACTION_K}"))
}

fn certificates() -> Result<String> {
    let mut rng = rng(10);
    let mut certified = 0;
    let mut frostman = 0;
    for t in [2u32, 3, 4] {
        let max_m = 16 / t;
        let mut attempts = 0;
        let mut got = 0;
        while got < 30 {
            attempts += 1;
            ensure!(attempts < 5000, "T={t}: too few certified instances");
            let m = rng.random_range(2..=max_m);
            let sigma = [r(1, 4), r(1, 2), r(3, 4)][rng.random_range(0..3)];
            let eps = [int(0), r(1, 10)][rng.random_range(0..2)];
            let cap = (sigma * int(t as i64)).ceil().to_integer() as u32;
            let exps: Vec<u32> = (0..m).map(|_| rng.random_range(0..=cap.min(t))).collect();
            let p = random_uniform(t * m, t, &exps, rng.random())?;
            let f = BranchingFunction::of_set(&p, t)?;
            let cert = katz_tao_certificate(&f, sigma, eps, Some(&p))?;
            if !cert.holds {
                continue;
            }
            let k = certificate_constant(t, sigma);
            let measured = cert.measured_ratio.unwrap();
            ensure!(measured <= k, "T={t} σ={sigma} ε={eps} {exps:?}: ratio {measured} > K_T = {k}");
            got += 1;

            // Frostman side on a random window, σ the smallest chord from its left end.
            let a = rng.random_range(0..m);
            let b = rng.random_range(a + 1..=m);
            let s = (a + 1..=b).map(|x| f.chord_slope(a, x)).collect::<Result<Vec<_>, _>>()?.into_iter().min().unwrap();
            if s > int(0) {
                let value = frostman_certificate(&p, t, a, b, s)?;
                let kp = certificate_constant(t, s);
                ensure!(value <= kp, "T={t} window [{a},{b}] σ={s}: Frostman {value} > K'_T = {kp}");
                frostman += 1;
            }
        }
        certified += got;
    }
    Ok(format!("{certified} Katz-Tao certificates within K_T, {frostman} Frostman certificates within K'_T"))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn expansion_trend() -> Result<String> {
    let start = Instant::now();
    let half = r(1, 2);
    let exps = Exponents { alpha: half, beta: half, gamma: half };
    let mut medians = Vec::new();
    let mut min12 = f64::MAX;
    for q in [8u32, 10, 12, 14] {
        let theta = Surd::pow2(-r(q as i64, 20));
        let mut ratios = Vec::new();
        let mut seed = 0u64;
        while ratios.len() < 20 {
            ensure!(seed < 2000, "q={q}: too few instances with (Π) margin ≥ 1 bit");
            let a = random_katz_tao(q, 2, half, 3 * seed)?;
            let b = random_katz_tao(q, 2, half, 3 * seed + 1)?;
            let c = random_frostman(q, 2, half, 3 * seed + 2)?;
            seed += 1;
            let pi = check_condition_pi(b.len() as u64, c.len() as u64, q, exps, r(1, 10), PiVariant::C3)?;
            if pi.margin_bits < 1.0 {
                continue;
            }
            let rep = expansion_search(&a, &b, &c, &theta)?;
            ratios.push(rep.best_adversarial as f64 / a.len() as f64);
        }
        if q == 12 {
            min12 = ratios.iter().copied().fold(f64::MAX, f64::min);
        }
        medians.push((q, median(&mut ratios)));
    }
    within(start, Duration::from_secs(300), "expansion probe")?;
    ensure!(min12 >= 2.0, "q=12: smallest best ratio {min12:.3} < 2");
    ensure!(medians.windows(2).all(|w| w[0].1 <= w[1].1), "medians not nondecreasing: {medians:?}");
    let list: Vec<String> = medians.iter().map(|(q, x)| format!("q={q}: {x:.3}")).collect();
    Ok(format!("medians {}, min at q=12 {min12:.3}", list.join(", ")))
}

fn level_exps(rng: &mut ChaCha8Rng, lo: Rational, t: u32, m: u32) -> Vec<u32> {
    let lo = (lo * int(t as i64)).ceil().to_integer() as u32;
    (0..m).map(|_| rng.random_range(lo..=t)).collect()
}

fn reverify(cert: &WindowCertificate, a: &GridSet, b: &GridSet, c: &GridSet) -> Result<()> {
    let v = verify_certificate(cert, a, b, c)?;
    ensure!(v.ok, "certificate does not re-verify: {:?}", v.problems);
    if let Some(bad) = cert.checks.iter().find(|c| !c.holds) {
        bail!("check {} fails", bad.name);
    }
    Ok(())
}

fn traces() -> Result<String> {
    let (q, t, m) = (16u32, 4u32, 4u32);
    let alpha = r(1, 2);
    let mut rng = rng(12);
    let mut counts = [0usize; 3];
    let mut seed = 0u64;
    while counts.iter().any(|&n| n < 50) {
        ensure!(seed < 5000, "too few hypothesis-satisfying instances: {counts:?}");
        seed += 1;
        let beta = [r(1, 2), r(3, 4)][rng.random_range(0..2)];
        let gamma = [r(1, 2), r(3, 4)][rng.random_range(0..2)];
        let ea: Vec<u32> = (0..m).map(|_| rng.random_range(0..=2)).collect();
        let eb = level_exps(&mut rng, beta, t, m);
        let ec = level_exps(&mut rng, gamma, t, m);
        let a = random_uniform(q, t, &ea, 3 * seed)?;
        let b = random_uniform(q, t, &eb, 3 * seed + 1)?;
        let c = random_uniform(q, t, &ec, 3 * seed + 2)?;

        if counts[0] < 50 {
            let beta_b = r(eb.iter().sum::<u32>() as i64, q as i64);
            let eta = r(1, 10).min(beta_b.min(beta_b + gamma - alpha) / int(2));
            let p = TraceParams::new(t, alpha, Some(beta_b), gamma, eta);
            let cert = scale_window_abc(&a, &b, &c, &p).with_context(|| format!("abc seed {seed}"))?;
            reverify(&cert, &a, &b, &c).with_context(|| format!("abc seed {seed}"))?;
            ensure!(cert.beta_prime >= eta, "abc seed {seed}: β′ < η");
            counts[0] += 1;
        }
        let eta = r(1, 10);
        let p = TraceParams::new(t, alpha, Some(beta), gamma, eta);
        for (slot, variant) in [(1, PiVariant::C3), (2, PiVariant::C4)] {
            if counts[slot] >= 50 {
                continue;
            }
            let exps = Exponents { alpha, beta, gamma };
            let pi = check_condition_pi(b.len() as u64, c.len() as u64, q, exps, eta, variant)?;
            if !pi.holds {
                continue;
            }
            let res = match variant {
                PiVariant::C3 => scale_window_c3(&a, &b, &c, &p),
                PiVariant::C4 => scale_window_c4(&a, &b, &c, &p),
            };
            let cert = match res {
                // c4 also asks C to be Frostman at exponent η
                Err(Error::Hypothesis(msg)) if variant == PiVariant::C4 && msg.contains("Frostman") => continue,
                r => r.with_context(|| format!("{variant:?} seed {seed}"))?,
            };
            reverify(&cert, &a, &b, &c).with_context(|| format!("{variant:?} seed {seed}"))?;
            let floor = match variant {
                PiVariant::C3 => beta * eta / int(2),
                PiVariant::C4 => alpha * eta / int(2),
            };
            ensure!(cert.beta_prime >= floor, "{variant:?} seed {seed}: β′ below floor");
            ensure!(cert.gamma_prime >= eta / int(2), "{variant:?} seed {seed}: γ′ < η/2");
            ensure!(
                cert.beta_prime + cert.gamma_prime >= alpha + alpha * eta / int(2),
                "{variant:?} seed {seed}: β′ + γ′ < α + αη/2"
            );
            counts[slot] += 1;
        }
    }

    // the sharpness example violates the c4 condition
    let sp = SharpnessParams::new(24, r(1, 2), r(1, 4), r(1, 2), r(1, 5))?;
    let ex = sharpness_example(&sp, Rounding::Exact)?;
    let exps = Exponents { alpha: sp.alpha, beta: sp.beta, gamma: sp.gamma };
    let pi = check_condition_pi(ex.b.len() as u64, ex.c.len() as u64, 24, exps, sp.eta, PiVariant::C4)?;
    ensure!(!pi.holds && pi.margin_bits < 0.0, "sharpness example passes (Π): {pi:?}");
    let p = TraceParams::new(4, sp.alpha, None, sp.gamma, sp.eta);
    match scale_window_c4(&ex.a, &ex.b, &ex.c, &p) {
        Err(Error::Hypothesis(msg)) if msg.contains("(Π) fails with margin -") => {}
        other => bail!("c4 did not reject the sharpness example: {:?}", other.map(|c| c.j)),
    }
    Ok(format!(
        "{}/{}/{} certificates re-verified (abc/c3/c4); sharpness rejected with margin {:.2} bits",
        counts[0], counts[1], counts[2], pi.margin_bits
    ))
}
