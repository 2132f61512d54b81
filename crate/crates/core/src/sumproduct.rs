//! Sum images `{a + cb}` on the δ-grid of `[0,2)`, the optimal adversarial
//! pair set, expansion search over `c ∈ C`, and the (Π) cardinality checks.
//!
//! A pair `(i, j)` with scalar index `k` lands in bin
//! `floor((i·2^q + k·j)/2^q) = i + floor(k·j/2^q)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    bigint_to_u64, cmp_power_product, exact_log2, fmt_rational, rational_str, rational_to_f64, Rational, Surd,
};
use crate::gridset::{GridSet, PairSet};

fn same_q(a: &GridSet, b: &GridSet) -> Result<()> {
    if a.q() != b.q() {
        return Err(Error::ExponentMismatch(a.q(), b.q()));
    }
    Ok(())
}

fn check_scalar(q: u32, k: u64) -> Result<()> {
    if k > 1u64 << q {
        return Err(Error::IndexOutOfRange { value: k, max: 1u64 << q });
    }
    Ok(())
}

#[inline]
fn offset(k: u64, j: u64, q: u32) -> u64 {
    (k * j) >> q
}

/// Occupied bins with their multiplicities, sorted by bin.
pub fn sum_histogram(a: &GridSet, b: &GridSet, k: u64) -> Result<Vec<(u64, u64)>> {
    same_q(a, b)?;
    check_scalar(a.q(), k)?;
    Ok(histogram(a, b, k))
}

fn histogram(a: &GridSet, b: &GridSet, k: u64) -> Vec<(u64, u64)> {
    let q = a.q();
    let offs: Vec<u64> = b.indices().iter().map(|&j| offset(k, j, q)).collect();
    let (Some(&amax), Some(&omax)) = (a.indices().last(), offs.last()) else {
        return Vec::new();
    };
    let amin = a.indices()[0];
    let range = (amax + omax - amin + 1) as usize;
    let pairs = a.len() * b.len();
    if range <= 4 * pairs + 1024 {
        let mut dense = vec![0u64; range];
        for &i in a.indices() {
            for &o in &offs {
                dense[(i + o - amin) as usize] += 1;
            }
        }
        dense.into_iter().enumerate().filter(|(_, c)| *c > 0).map(|(x, c)| (x as u64 + amin, c)).collect()
    } else {
        let mut all = Vec::with_capacity(pairs);
        for &i in a.indices() {
            all.extend(offs.iter().map(|&o| i + o));
        }
        all.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::new();
        for x in all {
            match out.last_mut() {
                Some((bin, c)) if *bin == x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }
}

/// `A + cB` as a set of occupied bins.
pub fn affine_image(a: &GridSet, b: &GridSet, k: u64) -> Result<GridSet> {
    let h = sum_histogram(a, b, k)?;
    GridSet::new(a.q(), a.span() + b.span(), h.into_iter().map(|(x, _)| x))
}

/// Bins occupied by the pairs of `g`.
pub fn pair_image(g: &PairSet, k: u64) -> Result<GridSet> {
    check_scalar(g.q(), k)?;
    let q = g.q();
    GridSet::new(q, 2, g.pairs().iter().map(|&(i, j)| i + offset(k, j, q)))
}

/// `|A + BC|_δ`: bins hit by `a + cb` for any `(a, b, c)`.
pub fn sum_product_covering(a: &GridSet, b: &GridSet, c: &GridSet) -> Result<usize> {
    same_q(a, b)?;
    same_q(a, c)?;
    let q = a.q();
    let bins = ((a.span() + b.span()) as usize) << q;
    let mut hit = vec![0u64; bins / 64 + 2];
    for &k in c.indices() {
        check_scalar(q, k)?;
        let offs: Vec<u64> = b.indices().iter().map(|&j| offset(k, j, q)).collect();
        for &i in a.indices() {
            for &o in &offs {
                let x = (i + o) as usize;
                hit[x >> 6] |= 1 << (x & 63);
            }
        }
    }
    Ok(hit.iter().map(|w| w.count_ones() as usize).sum())
}

/// `ceil(θ·n)` for `0 < θ ≤ 1`.
pub fn pair_budget(theta: &Surd, n: u64) -> Result<u64> {
    if *theta <= Surd::from_int(0) || *theta > Surd::from_int(1) {
        return Err(Error::param(format!("pair density θ={theta} must lie in (0,1]")));
    }
    Ok(bigint_to_u64(&theta.mul(&Surd::from_int(n)).ceil()))
}

// Heaviest bins first (lower bin on ties) until the budget is met; returns
// the chosen bins and how many pairs the last one contributes.
fn choose_bins(hist: &[(u64, u64)], budget: u64) -> (Vec<u64>, u64) {
    let mut order: Vec<(u64, u64)> = hist.to_vec();
    order.sort_unstable_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut chosen = Vec::new();
    let mut total = 0;
    for (bin, mult) in order {
        chosen.push(bin);
        if total + mult >= budget {
            return (chosen, budget - total);
        }
        total += mult;
    }
    unreachable!("budget never exceeds |A||B|")
}

/// Minimum covering of `{a + cb : (a,b) ∈ G}` over `|G| ≥ budget`.
fn adversarial_covering(hist: &[(u64, u64)], budget: u64) -> usize {
    let mut mults: Vec<u64> = hist.iter().map(|h| h.1).collect();
    mults.sort_unstable_by(|x, y| y.cmp(x));
    let mut total = 0;
    for (n, m) in mults.into_iter().enumerate() {
        total += m;
        if total >= budget {
            return n + 1;
        }
    }
    unreachable!("budget never exceeds |A||B|")
}

/// The pair set of size `ceil(θ|A||B|)` with the fewest occupied bins, and
/// that bin count.
///
/// Whole heaviest bins are optimal: any `t` bins hold at most as many pairs
/// as the `t` heaviest. The last bin is trimmed to its lowest-index pairs.
pub fn adversarial_pairs(a: &GridSet, b: &GridSet, k: u64, theta: &Surd) -> Result<(PairSet, usize)> {
    let hist = sum_histogram(a, b, k)?;
    let budget = pair_budget(theta, (a.len() * b.len()) as u64)?;
    let (bins, last_quota) = choose_bins(&hist, budget);
    Ok((collect_pairs(a, b, k, &bins, last_quota), bins.len()))
}

fn collect_pairs(a: &GridSet, b: &GridSet, k: u64, bins: &[u64], last_quota: u64) -> PairSet {
    let q = a.q();
    let last = *bins.last().unwrap();
    let full: std::collections::HashSet<u64> = bins[..bins.len() - 1].iter().copied().collect();
    let mut left = last_quota;
    let mut pairs = Vec::new();
    for &i in a.indices() {
        for &j in b.indices() {
            let x = i + offset(k, j, q);
            if full.contains(&x) {
                pairs.push((i, j));
            } else if x == last && left > 0 {
                pairs.push((i, j));
                left -= 1;
            }
        }
    }
    PairSet::from_sorted(q, pairs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub c: u64,
    pub full: usize,
    pub adversarial: usize,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub theta: Surd,
    pub budget: u64,
    pub a_size: usize,
    pub b_size: usize,
    pub records: Vec<ExpansionRecord>,
    pub best_c: u64,
    pub best_adversarial: usize,
    /// `best_adversarial / |A|`.
    #[serde(with = "rational_str")]
    pub best_ratio: Rational,
}

/// Adversarial and full coverings for every `c ∈ C`. The best `c` has the
/// largest adversarial covering, lowest `c` on ties.
pub fn expansion_search(a: &GridSet, b: &GridSet, c: &GridSet, theta: &Surd) -> Result<ExpansionReport> {
    same_q(a, b)?;
    same_q(a, c)?;
    if c.is_empty() {
        return Err(Error::Empty("expansion search needs a nonempty C"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("expansion search needs nonempty A and B"));
    }
    for &k in c.indices() {
        check_scalar(a.q(), k)?;
    }
    let budget = pair_budget(theta, (a.len() * b.len()) as u64)?;
    let records: Vec<ExpansionRecord> = c
        .indices()
        .par_iter()
        .map(|&k| {
            let hist = histogram(a, b, k);
            let (bins, quota) = choose_bins(&hist, budget);
            let g = collect_pairs(a, b, k, &bins, quota);
            debug_assert_eq!(bins.len(), adversarial_covering(&hist, budget));
            ExpansionRecord { c: k, full: hist.len(), adversarial: bins.len(), digest: g.digest() }
        })
        .collect();
    let best = records.iter().fold(&records[0], |best, r| if r.adversarial > best.adversarial { r } else { best });
    Ok(ExpansionReport {
        theta: theta.clone(),
        budget,
        a_size: a.len(),
        b_size: b.len(),
        best_c: best.c,
        best_adversarial: best.adversarial,
        best_ratio: Rational::new(best.adversarial as i64, a.len() as i64),
        records,
    })
}

/// Only the adversarial covering for each `c`, without materializing pairs.
pub fn adversarial_profile(a: &GridSet, b: &GridSet, c: &GridSet, theta: &Surd) -> Result<Vec<usize>> {
    same_q(a, b)?;
    same_q(a, c)?;
    let budget = pair_budget(theta, (a.len() * b.len()) as u64)?;
    c.indices()
        .par_iter()
        .map(|&k| {
            check_scalar(a.q(), k)?;
            Ok(adversarial_covering(&histogram(a, b, k), budget))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiVariant {
    /// `|B|^γ|C|^β δ^{βγ} ≥ δ^{-η}`
    C3,
    /// `|B|^γ|C|^α δ^{αγ} ≥ δ^{-η}`
    C4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    #[serde(with = "rational_str")]
    pub alpha: Rational,
    #[serde(with = "rational_str")]
    pub beta: Rational,
    #[serde(with = "rational_str")]
    pub gamma: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiCheck {
    pub variant: PiVariant,
    pub holds: bool,
    /// Left side minus right side in bits.
    pub margin_bits: f64,
    /// Same, exactly, when both cardinalities are powers of two.
    pub margin_exact: Option<String>,
    /// `|B||C| ≥ |B|^{α/β}|C|^{α/γ}`, reported when `β, γ ≥ α`.
    pub product_bound: Option<bool>,
}

/// Evaluates (Π) in log space, deciding the inequality exactly.
pub fn check_condition_pi(
    b_size: u64,
    c_size: u64,
    q: u32,
    exps: Exponents,
    eta: Rational,
    variant: PiVariant,
) -> Result<PiCheck> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    for (name, v) in [("α", exps.alpha), ("β", exps.beta), ("γ", exps.gamma)] {
        if v <= zero || v > one {
            return Err(Error::param(format!("{name}={} must lie in (0,1]", fmt_rational(&v))));
        }
    }
    if b_size == 0 || c_size == 0 {
        return Err(Error::Empty("(Π) needs nonempty B and C"));
    }
    let qr = Rational::from_integer(q as i64);
    let c_exp = match variant {
        PiVariant::C3 => exps.beta,
        PiVariant::C4 => exps.alpha,
    };
    // |B|^γ |C|^e ≥ 2^{(eγ + η)q}
    let rhs = (c_exp * exps.gamma + eta) * qr;
    let holds = cmp_power_product(b_size, exps.gamma, c_size, c_exp, rhs) != std::cmp::Ordering::Less;
    let lb = (b_size as f64).log2();
    let lc = (c_size as f64).log2();
    let margin_bits = rational_to_f64(&exps.gamma) * lb + rational_to_f64(&c_exp) * lc - rational_to_f64(&rhs);
    let margin_exact = match (exact_log2(b_size), exact_log2(c_size)) {
        (Some(x), Some(y)) => {
            let m = exps.gamma * Rational::from_integer(x as i64) + c_exp * Rational::from_integer(y as i64) - rhs;
            Some(fmt_rational(&m))
        }
        _ => None,
    };
    let product_bound = (exps.beta >= exps.alpha && exps.gamma >= exps.alpha).then(|| {
        let big = |n: u64| BigRational::from_integer(BigInt::from(n));
        let lhs = Surd::from_int(b_size).mul(&Surd::from_int(c_size));
        let rhs =
            Surd::pow(&big(b_size), exps.alpha / exps.beta).mul(&Surd::pow(&big(c_size), exps.alpha / exps.gamma));
        lhs >= rhs
    });
    Ok(PiCheck { variant, holds, margin_bits, margin_exact, product_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(q: u32, idx: &[u64]) -> GridSet {
        GridSet::new(q, 1, idx.iter().copied()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn histogram_examples() {
        let a = set(2, &[0, 1]);
        assert_eq!(sum_histogram(&a, &a, 4).unwrap(), vec![(0, 1), (1, 2), (2, 1)]);
        let b = set(2, &[0, 3]);
        assert_eq!(sum_histogram(&a, &b, 0).unwrap(), vec![(0, 2), (1, 2)]);
        assert_eq!(sum_histogram(&set(2, &[0]), &set(2, &[1]), 2).unwrap(), vec![(0, 1)]);
        assert!(sum_histogram(&a, &set(3, &[0]), 1).is_err());
        assert!(sum_histogram(&a, &a, 5).is_err());
    }

    #[test]
    fn sparse_histogram_path_agrees() {
        let a = set(20, &[0, 1 << 19, (1 << 20) - 1]);
        let b = set(20, &[3, 1 << 18]);
        let h = sum_histogram(&a, &b, 1 << 20).unwrap();
        let mut want: Vec<u64> = a.indices().iter().flat_map(|i| b.indices().iter().map(move |j| i + j)).collect();
        want.sort();
        assert_eq!(h.iter().map(|x| x.0).collect::<Vec<_>>(), want);
    }

    #[test]
    fn images() {
        let a = set(2, &[0, 1]);
        let img = affine_image(&a, &a, 4).unwrap();
        assert_eq!((img.indices(), img.covering_number(2).unwrap()), (&[0u64, 1, 2][..], 3));
        assert_eq!(affine_image(&a, &set(2, &[0]), 3).unwrap().indices(), a.indices());
        let g = PairSet::new(2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(pair_image(&g, 2).unwrap().len(), 2);
        assert!(pair_image(&PairSet::new(2, []).unwrap(), 2).unwrap().is_empty());
        let all = PairSet::new(2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert_eq!(pair_image(&all, 4).unwrap().indices(), img.indices());
    }

    #[test]
    fn adversary_examples() {
        let a = set(2, &[0, 1]);
        let (g, cov) = adversarial_pairs(&a, &a, 4, &Surd::from_ratio(1, 2)).unwrap();
        assert_eq!(cov, 1);
        assert_eq!(g.pairs(), &[(0, 1), (1, 0)]);
        let (g, cov) = adversarial_pairs(&a, &a, 4, &Surd::from_int(1)).unwrap();
        assert_eq!((g.len(), cov), (4, 3));
        assert!(adversarial_pairs(&a, &a, 4, &Surd::from_ratio(3, 2)).is_err());
    }

    #[test]
    fn expansion_with_zero_scalar() {
        let a = set(4, &[0, 3, 9]);
        let b = set(4, &[1, 2, 7, 15]);
        let rep = expansion_search(&a, &b, &set(4, &[0]), &Surd::from_int(1)).unwrap();
        assert_eq!(rep.best_ratio, r(1, 1));
        // every bin holds |B| pairs, so half the pairs need ceil(|A|/2) bins
        let rep = expansion_search(&a, &b, &set(4, &[0]), &Surd::from_ratio(1, 2)).unwrap();
        assert_eq!(rep.best_ratio, r(2, 3));
        assert!(expansion_search(&a, &b, &GridSet::empty(4, 1).unwrap(), &Surd::from_int(1)).is_err());
    }

    #[test]
    fn pi_examples() {
        let e = Exponents { alpha: r(1, 2), beta: r(1, 2), gamma: r(1, 2) };
        let p = check_condition_pi(256, 256, 20, e, r(1, 10), PiVariant::C3).unwrap();
        assert!(p.holds);
        assert_eq!(p.margin_exact.as_deref(), Some("1"));
        let p = check_condition_pi(1, 1, 20, e, r(1, 10), PiVariant::C3).unwrap();
        assert!(!p.holds && p.margin_bits < 0.0);
        assert_eq!(p.product_bound, Some(true));
    }

    #[test]
    fn pi_is_exact_for_non_powers() {
        // 3^{1/2}·3^{1/2} = 3 ≥ 2^{log2 3}: equality sits exactly on the boundary
        let e = Exponents { alpha: r(1, 2), beta: r(1, 2), gamma: r(1, 2) };
        let p = check_condition_pi(3, 3, 2, e, r(0, 1), PiVariant::C3).unwrap();
        // need 3 ≥ 2^{q/4} = 2^{1/2}
        assert!(p.holds && p.margin_exact.is_none());
    }
}
