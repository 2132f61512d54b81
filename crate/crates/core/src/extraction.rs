//! Structured subsets: uniform subsets and pieces, Katz-Tao subsets at a
//! coarser resolution, and exhaustions by either.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{bigint_to_u64, fmt_rational, Rational, Surd};
use crate::gridset::{GridSet, ScaleParams};

/// Constant-branching profile of a uniform set: every occupied cell of side
/// `2^{-(j-1)T}` holds exactly `N_j` occupied cells of side `2^{-jT}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformStructure {
    #[serde(rename = "T")]
    pub t: u32,
    pub m: u32,
    pub branching: Vec<u64>,
}

impl UniformStructure {
    pub fn new(t: u32, branching: Vec<u64>) -> Result<Self> {
        if t == 0 || branching.is_empty() {
            return Err(Error::param("a uniform structure needs T ≥ 1 and m ≥ 1"));
        }
        for (j, &n) in branching.iter().enumerate() {
            if !n.is_power_of_two() || n > 1u64 << t {
                return Err(Error::param(format!("N_{} = {n} must be a power of two in [1, 2^{t}]", j + 1)));
            }
        }
        Ok(UniformStructure { t, m: branching.len() as u32, branching })
    }

    pub fn size(&self) -> u64 {
        self.branching.iter().product()
    }

    pub fn q(&self) -> u32 {
        self.t * self.m
    }
}

/// Where and why a set fails to be uniform.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UniformityFailure {
    /// Two parents at level `j-1` with different child counts at level `j`.
    Uneven { level: u32, first: (u64, u64), second: (u64, u64) },
    /// Constant child count that is not a power of two.
    NotPowerOfTwo { level: u32, count: u64 },
}

impl std::fmt::Display for UniformityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UniformityFailure::Uneven { level, first, second } => write!(
                f,
                "level {level}: cell {} has {} children but cell {} has {}",
                first.0, first.1, second.0, second.1
            ),
            UniformityFailure::NotPowerOfTwo { level, count } => {
                write!(f, "level {level}: branching {count} is not a power of two")
            }
        }
    }
}

fn uniform_domain(p: &GridSet, t: u32) -> Result<ScaleParams> {
    let sp = ScaleParams::new(p.q(), t)?;
    if p.is_empty() {
        return Err(Error::Empty("uniformity is undefined for the empty set"));
    }
    if !p.in_unit_interval() {
        return Err(Error::param("uniform structure needs every point in [0,1)"));
    }
    Ok(sp)
}

// For each parent at level `coarse`, the number of distinct children at `fine`.
fn child_counts(idx: &[u64], q: u32, coarse: u32, fine: u32) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    let mut last_child = None;
    for &i in idx {
        let child = i >> (q - fine);
        if last_child == Some(child) {
            continue;
        }
        last_child = Some(child);
        let parent = i >> (q - coarse);
        match out.last_mut() {
            Some((p, c)) if *p == parent => *c += 1,
            _ => out.push((parent, 1)),
        }
    }
    out
}

/// The branching profile if `p` is uniform, scanning coarse to fine.
pub fn is_uniform(p: &GridSet, t: u32) -> Result<std::result::Result<UniformStructure, UniformityFailure>> {
    let sp = uniform_domain(p, t)?;
    let mut branching = Vec::with_capacity(sp.m as usize);
    for j in 1..=sp.m {
        let counts = child_counts(p.indices(), p.q(), (j - 1) * t, j * t);
        let first = counts[0];
        if let Some(&other) = counts.iter().find(|c| c.1 != first.1) {
            return Ok(Err(UniformityFailure::Uneven { level: j, first, second: other }));
        }
        if !first.1.is_power_of_two() {
            return Ok(Err(UniformityFailure::NotPowerOfTwo { level: j, count: first.1 }));
        }
        branching.push(first.1);
    }
    Ok(Ok(UniformStructure { t, m: sp.m, branching }))
}

/// Like [`is_uniform`] but a non-uniform set is an error.
pub fn uniform_structure(p: &GridSet, t: u32) -> Result<UniformStructure> {
    is_uniform(p, t)?.map_err(|f| Error::param(format!("set is not uniform with T={t}: {f}")))
}

/// A uniform subset with `|P'| ≥ (2T)^{-m}|P|`.
///
/// Levels are processed fine to coarse. Parents are grouped by the largest
/// power of two not exceeding their child count; the group keeping the most
/// children wins (lowest power on ties) and each kept parent is trimmed to
/// its lowest-index children.
pub fn uniformize(p: &GridSet, t: u32) -> Result<(GridSet, UniformStructure)> {
    let sp = uniform_domain(p, t)?;
    let q = p.q();
    let mut idx = p.indices().to_vec();
    let mut branching = vec![0u64; sp.m as usize];
    for j in (1..=sp.m).rev() {
        let (coarse, fine) = ((j - 1) * t, j * t);
        let counts = child_counts(&idx, q, coarse, fine);
        let mut score = vec![0u64; t as usize + 1];
        for &(_, c) in &counts {
            let k = c.ilog2() as usize;
            score[k] += 1 << k;
        }
        // max_by_key keeps the last maximum; scan in reverse to prefer low k
        let k = (0..=t as usize).rev().max_by_key(|&k| score[k]).unwrap();
        let keep = 1u64 << k;
        branching[j as usize - 1] = keep;

        let mut out = Vec::with_capacity(idx.len());
        let mut ci = 0;
        let mut rank = 0u64;
        let mut last_child = None;
        for &i in &idx {
            let parent = i >> (q - coarse);
            while counts[ci].0 != parent {
                ci += 1;
                rank = 0;
                last_child = None;
            }
            let child = i >> (q - fine);
            if last_child != Some(child) {
                if last_child.is_some() {
                    rank += 1;
                }
                last_child = Some(child);
            }
            if counts[ci].1.ilog2() as usize == k && rank < keep {
                out.push(i);
            }
        }
        idx = out;
    }
    let structure = UniformStructure { t, m: sp.m, branching };
    Ok((GridSet::from_sorted(q, p.span(), idx), structure))
}

/// Smallest `T` with `log2(2T)/T ≤ ε`.
pub fn t0(eps: Rational) -> Result<u32> {
    if eps <= Rational::from_integer(0) {
        return Err(Error::param("ε must be positive"));
    }
    let (num, den) = (*eps.numer() as u64, *eps.denom() as u32);
    for t in 1u32..=1 << 16 {
        // (2T)^den ≤ 2^(T·num)
        let lhs = num_traits::pow(BigInt::from(2 * t), den as usize);
        if lhs <= BigInt::from(1) << (t as u64 * num) {
            return Ok(t);
        }
    }
    Err(Error::param(format!("ε={} is too small", fmt_rational(&eps))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformPiece {
    pub set: GridSet,
    pub structure: UniformStructure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformPieces {
    pub t0: u32,
    pub pieces: Vec<UniformPiece>,
    pub leftover: GridSet,
}

/// Peel uniform subsets until at most `δ^ε|P|` points remain. Each piece
/// has at least `δ^{2ε}|P|` points.
pub fn uniform_pieces(p: &GridSet, t: u32, eps: Rational) -> Result<UniformPieces> {
    uniform_domain(p, t)?;
    let t_min = t0(eps)?;
    if t < t_min {
        return Err(Error::param(format!("T={t} is below T0={t_min} required for ε={}", fmt_rational(&eps))));
    }
    let keep_limit = Surd::pow2(-eps * Rational::from_integer(p.q() as i64)).mul(&Surd::from_int(p.len() as u64));
    let mut residual = p.clone();
    let mut pieces = Vec::new();
    while !residual.is_empty() && Surd::from_int(residual.len() as u64) > keep_limit {
        let (set, structure) = uniformize(&residual, t)?;
        residual = residual.difference(&set)?;
        pieces.push(UniformPiece { set, structure });
    }
    Ok(UniformPieces { t0: t_min, pieces, leftover: residual })
}

/// Bound on the Katz-Tao constant of an extracted subset at its resolution.
pub const EXTRACTION_C_IMPL: u64 = 3;
/// `|P'| ≥ (δ/ρ)^s·|P| / (EXTRACTION_K·C)` with `C` the dyadic Katz-Tao
/// constant of `P`.
pub const EXTRACTION_K: u64 = 2;

struct Node {
    pos: u64,
    weight: u64,
    kept: u64,
    // children in the next finer level: `first..first+len`
    first: usize,
    len: usize,
}

/// A subset with at most one point per `ρ`-cell whose `ρ`-skeleton is
/// Katz-Tao `(ρ, s, EXTRACTION_C_IMPL)`.
///
/// `rho_level` is `l` with `ρ = 2^{-l}`. Each dyadic cell of side `2^{-k}`
/// keeps at most `floor(2^{(l-k)s})` selected cells; children are filled
/// heaviest first.
pub fn extract_katz_tao_subset(p: &GridSet, rho_level: u32, s: Rational) -> Result<GridSet> {
    let q = p.q();
    if rho_level > q {
        return Err(Error::param(format!("ρ = 2^-{rho_level} is finer than δ = 2^-{q}")));
    }
    if s < Rational::from_integer(0) || s > Rational::from_integer(1) {
        return Err(Error::param("exponent s must lie in [0,1]"));
    }
    if p.is_empty() {
        return Ok(p.clone());
    }
    let l = rho_level;
    // levels[k] holds the occupied cells of side 2^{-k}, k = 0..=l
    let mut levels: Vec<Vec<Node>> = Vec::with_capacity(l as usize + 1);
    let mut leaf_point = Vec::new();
    let mut leaves: Vec<Node> = Vec::new();
    for &i in p.indices() {
        let c = i >> (q - l);
        match leaves.last_mut() {
            Some(n) if n.pos == c => n.weight += 1,
            _ => {
                leaves.push(Node { pos: c, weight: 1, kept: 1, first: 0, len: 0 });
                leaf_point.push(i);
            }
        }
    }
    levels.push(leaves);
    for k in (0..l).rev() {
        let cap = bigint_to_u64(&Surd::pow2(s * Rational::from_integer((l - k) as i64)).floor());
        let finer = levels.last().unwrap();
        let mut nodes: Vec<Node> = Vec::new();
        for (ci, child) in finer.iter().enumerate() {
            let pos = child.pos >> 1;
            match nodes.last_mut() {
                Some(n) if n.pos == pos => {
                    n.weight += child.weight;
                    n.kept += child.kept;
                    n.len += 1;
                }
                _ => nodes.push(Node { pos, weight: child.weight, kept: child.kept, first: ci, len: 1 }),
            }
        }
        for n in &mut nodes {
            n.kept = n.kept.min(cap);
        }
        levels.push(nodes);
    }
    levels.reverse();

    let mut quota: Vec<u64> = levels[0].iter().map(|n| n.kept).collect();
    for k in 0..l as usize {
        let mut next = vec![0u64; levels[k + 1].len()];
        for (n, &qu) in levels[k].iter().zip(&quota) {
            let mut kids: Vec<usize> = (n.first..n.first + n.len).collect();
            kids.sort_by(|&a, &b| {
                let (x, y) = (&levels[k + 1][a], &levels[k + 1][b]);
                y.weight.cmp(&x.weight).then(x.pos.cmp(&y.pos))
            });
            let mut left = qu;
            for c in kids {
                let take = left.min(levels[k + 1][c].kept);
                next[c] = take;
                left -= take;
            }
        }
        quota = next;
    }
    let picked = leaf_point.iter().zip(&quota).filter(|(_, &qu)| qu > 0).map(|(&i, _)| i).collect();
    Ok(GridSet::from_sorted(q, p.span(), picked))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exhaustion {
    pub pieces: Vec<GridSet>,
    pub leftover: GridSet,
}

/// Repeated extraction on the residual until at most `c·|P|` points remain.
pub fn exhaust_katz_tao(p: &GridSet, rho_level: u32, s: Rational, c: Rational) -> Result<Exhaustion> {
    if c <= Rational::from_integer(0) || c >= Rational::from_integer(1) {
        return Err(Error::param("retention fraction c must lie in (0,1)"));
    }
    let limit = c * Rational::from_integer(p.len() as i64);
    let mut residual = p.clone();
    let mut pieces = Vec::new();
    while !residual.is_empty() && Rational::from_integer(residual.len() as i64) > limit {
        let piece = extract_katz_tao_subset(&residual, rho_level, s)?;
        residual = residual.difference(&piece)?;
        pieces.push(piece);
    }
    Ok(Exhaustion { pieces, leftover: residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::{katz_tao_constant, Mode};

    fn set(q: u32, idx: &[u64]) -> GridSet {
        GridSet::new(q, 1, idx.iter().copied()).unwrap()
    }

    #[test]
    fn uniform_examples() {
        let s = is_uniform(&set(4, &[0, 4, 8, 12]), 2).unwrap().unwrap();
        assert_eq!(s.branching, vec![4, 1]);
        let f = is_uniform(&set(3, &[0, 1, 4]), 1).unwrap().unwrap_err();
        assert_eq!(f, UniformityFailure::Uneven { level: 3, first: (0, 2), second: (2, 1) });
        assert!(is_uniform(&GridSet::empty(3, 1).unwrap(), 1).is_err());
        let three = is_uniform(&set(2, &[0, 1, 2]), 2).unwrap().unwrap_err();
        assert_eq!(three, UniformityFailure::NotPowerOfTwo { level: 1, count: 3 });
    }

    #[test]
    fn uniformize_small_example() {
        let (u, s) = uniformize(&set(2, &[0, 1, 2]), 1).unwrap();
        assert_eq!(u.indices(), &[0, 1]);
        assert_eq!(s.branching, vec![1, 2]);
    }

    #[test]
    fn uniformize_fixes_uniform_sets() {
        let full = GridSet::full(6).unwrap();
        let (u, s) = uniformize(&full, 3).unwrap();
        assert_eq!(u, full);
        assert_eq!(s.branching, vec![8, 8]);
        let p = set(4, &[0, 4, 8, 12]);
        assert_eq!(uniformize(&p, 2).unwrap().0, p);
    }

    #[test]
    fn uniformize_needs_divisible_t() {
        assert!(uniformize(&set(5, &[1]), 2).is_err());
    }

    #[test]
    fn t0_values() {
        assert_eq!(t0(Rational::new(3, 4)).unwrap(), 4);
        assert_eq!(t0(Rational::new(11, 20)).unwrap(), 7);
        assert_eq!(t0(Rational::from_integer(1)).unwrap(), 1);
    }

    #[test]
    fn uniform_pieces_of_uniform_set() {
        let p = set(4, &[0, 4, 8, 12]);
        let out = uniform_pieces(&p, 2, Rational::from_integer(1)).unwrap();
        assert_eq!(out.pieces.len(), 1);
        assert_eq!(out.pieces[0].set, p);
        assert!(out.leftover.is_empty());
        let err = uniform_pieces(&p, 2, Rational::new(1, 2)).unwrap_err();
        assert!(err.to_string().contains("T0="), "{err}");
    }

    #[test]
    fn extraction_identity_and_singleton() {
        let p = set(6, &[0, 9, 30, 51]);
        let half = Rational::new(1, 2);
        assert!(katz_tao_constant(&p, half, Mode::Dyadic).unwrap() <= Surd::from_int(1));
        assert_eq!(extract_katz_tao_subset(&p, 6, half).unwrap(), p);
        let one = set(6, &[17]);
        assert_eq!(extract_katz_tao_subset(&one, 3, half).unwrap(), one);
        assert!(extract_katz_tao_subset(&one, 7, half).is_err());
    }

    #[test]
    fn extraction_on_full_grid() {
        let full = GridSet::full(4).unwrap();
        let half = Rational::new(1, 2);
        let out = extract_katz_tao_subset(&full, 2, half).unwrap();
        let skel = out.skeleton(2).unwrap();
        assert_eq!(skel.len(), out.len());
        let c_impl = Surd::from_int(EXTRACTION_C_IMPL);
        assert!(katz_tao_constant(&skel, half, Mode::Dyadic).unwrap() <= c_impl);
        let c = katz_tao_constant(&full, half, Mode::Dyadic).unwrap();
        // |P'|·K·C ≥ (δ/ρ)^s |P|
        let lhs = Surd::from_int(out.len() as u64 * EXTRACTION_K).mul(&c);
        let rhs = Surd::pow2(Rational::new(-1, 1)).mul(&Surd::from_int(16));
        assert!(lhs >= rhs);
    }

    #[test]
    fn exhaustion_examples() {
        let full = GridSet::full(4).unwrap();
        let half = Rational::new(1, 2);
        let ex = exhaust_katz_tao(&full, 2, half, Rational::new(1, 4)).unwrap();
        assert!(ex.leftover.len() * 4 <= 16);
        for (i, a) in ex.pieces.iter().enumerate() {
            for b in &ex.pieces[i + 1..] {
                assert!(a.is_disjoint_from(b));
            }
        }
        let one = set(4, &[3]);
        let ex = exhaust_katz_tao(&one, 2, half, Rational::new(1, 2)).unwrap();
        assert_eq!(ex.pieces, vec![one]);
        assert!(ex.leftover.is_empty());
    }
}
