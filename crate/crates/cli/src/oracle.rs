//! Slow reference computations that share no code with the library paths
//! they check.

use num_bigint::BigInt;
use num_rational::BigRational;
use sumlab_core::branching::BranchingFunction;
use sumlab_core::{GridSet, Rational, Surd};

/// `floor(2^q·(a + c·b))` with `a, b, c` as exact rationals.
pub fn bin(q: u32, i: u64, j: u64, k: u64) -> u64 {
    let d = BigInt::from(1u64) << q;
    let r = |n: u64| BigRational::new(BigInt::from(n), d.clone());
    let x = (r(i) + r(k) * r(j)) * BigRational::from_integer(d.clone());
    u64::try_from(x.floor().to_integer()).unwrap()
}

/// Smallest number of bins whose multiplicities reach `budget`, by trying
/// every subset.
pub fn exhaustive_adversary(mults: &[u64], budget: u64) -> usize {
    assert!(mults.len() <= 20);
    (0u32..1 << mults.len())
        .filter(|mask| (0..mults.len()).filter(|b| mask >> b & 1 == 1).map(|b| mults[b]).sum::<u64>() >= budget)
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn radius_pow(units: BigRational, s: Rational) -> Surd {
    Surd::pow(&units, s)
}

/// Katz-Tao and Frostman constants over every radius `r ≥ δ`: the window
/// spanning points `i..=k` needs `2r ≥ x_k - x_i`.
pub fn brute_exact(p: &GridSet, s: Rational) -> (Surd, Surd) {
    let x = p.indices();
    let n = x.len();
    let mut kt = Surd::from_int(0);
    let mut fr = Surd::from_int(0);
    let scale = Surd::pow2(s * Rational::from_integer(p.q() as i64));
    for i in 0..n {
        for k in i..n {
            let g = x[k] - x[i];
            // r/δ = max(1, g/2)
            let units = BigRational::new(BigInt::from(g.max(2)), BigInt::from(2));
            let rs = radius_pow(units, s);
            let count = (k - i + 1) as u64;
            kt = kt.max(Surd::from_int(count).div(&rs));
            fr = fr.max(Surd::from_ratio(count, n as u64).mul(&scale).div(&rs));
        }
    }
    (kt, fr)
}

/// Same over dyadic radii `2^{-l}`, `l = 0..=q`, scanning windows that
/// start at each point.
pub fn brute_dyadic(p: &GridSet, s: Rational) -> (Surd, Surd) {
    let x = p.indices();
    let n = x.len();
    let mut kt = Surd::from_int(0);
    let mut fr = Surd::from_int(0);
    let scale = Surd::pow2(s * Rational::from_integer(p.q() as i64));
    for l in 0..=p.q() {
        let r = 1u64 << (p.q() - l);
        let best = (0..n).map(|i| x[i..].iter().take_while(|&&y| y - x[i] <= 2 * r).count()).max().unwrap_or(0) as u64;
        let rs = radius_pow(BigRational::from_integer(BigInt::from(r)), s);
        kt = kt.max(Surd::from_int(best).div(&rs));
        fr = fr.max(Surd::from_ratio(best, n as u64).mul(&scale).div(&rs));
    }
    (kt, fr)
}

/// Vertices of the lower convex hull of `(j, f(j))`: a node is a vertex when
/// it lies strictly below every chord that passes over it.
pub fn hull_vertices(f: &BranchingFunction) -> Vec<u32> {
    let m = f.m();
    let v = |j: u32| f.at(j);
    (0..=m)
        .filter(|&x| {
            x == 0
                || x == m
                || (0..x).all(|a| {
                    (x + 1..=m).all(|b| {
                        let lhs = (v(x) - v(a)) * Rational::from_integer((b - a) as i64);
                        let rhs = (v(b) - v(a)) * Rational::from_integer((x - a) as i64);
                        lhs < rhs
                    })
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_match_hand_values() {
        assert_eq!(bin(2, 1, 1, 4), 2);
        assert_eq!(bin(2, 0, 1, 2), 0);
        assert_eq!(bin(2, 1, 3, 2), 2);
    }

    #[test]
    fn exhaustive_small() {
        assert_eq!(exhaustive_adversary(&[1, 2, 1], 2), 1);
        assert_eq!(exhaustive_adversary(&[1, 2, 1], 4), 3);
    }

    #[test]
    fn hull_of_convex_and_concave() {
        let f = BranchingFunction::new(
            2,
            vec![Rational::from_integer(0), 0.into(), Rational::new(1, 2), Rational::new(3, 2)],
        )
        .unwrap();
        assert_eq!(hull_vertices(&f), vec![0, 1, 2, 3]);
        let g = BranchingFunction::new(1, [0, 1, 1, 1].map(Rational::from_integer).to_vec()).unwrap();
        assert_eq!(hull_vertices(&g), vec![0, 3]);
    }
}
