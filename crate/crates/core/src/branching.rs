//! Branching functions of uniform sets and their slope decompositions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_rational, rational_str, rational_vec_str, Rational, Surd};
use crate::extraction::{uniform_structure, UniformStructure};
use crate::gridset::{DyadicInterval, GridSet};
use crate::regularity::{frostman_constant, katz_tao_constant, Mode};

fn zero() -> Rational {
    Rational::from_integer(0)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// `f(j) = log2|P|_{2^{-jT}} / T` at the integer nodes `0..=m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BranchingRepr")]
pub struct BranchingFunction {
    #[serde(rename = "T")]
    t: u32,
    #[serde(with = "rational_vec_str")]
    values: Vec<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchingRepr {
    #[serde(rename = "T")]
    t: u32,
    #[serde(with = "rational_vec_str")]
    values: Vec<Rational>,
}

impl TryFrom<BranchingRepr> for BranchingFunction {
    type Error = String;

    fn try_from(r: BranchingRepr) -> std::result::Result<Self, String> {
        BranchingFunction::new(r.t, r.values).map_err(|e| e.to_string())
    }
}

impl BranchingFunction {
    /// Checks `f(0) = 0` and increments in `[0,1]`.
    pub fn new(t: u32, values: Vec<Rational>) -> Result<Self> {
        if t == 0 {
            return Err(Error::param("T must be at least 1"));
        }
        if values.first() != Some(&zero()) {
            return Err(Error::param("values[0] must be 0"));
        }
        for (j, w) in values.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d < zero() || d > int(1) {
                return Err(Error::param(format!("values[{}]: increment {} outside [0,1]", j + 1, fmt_rational(&d))));
            }
        }
        Ok(BranchingFunction { t, values })
    }

    pub fn from_structure(s: &UniformStructure) -> Self {
        let mut values = vec![zero()];
        let mut acc = 0i64;
        for &n in &s.branching {
            acc += n.ilog2() as i64;
            values.push(Rational::new(acc, s.t as i64));
        }
        BranchingFunction { t: s.t, values }
    }

    /// Branching function of a uniform set.
    pub fn of_set(p: &GridSet, t: u32) -> Result<Self> {
        Ok(Self::from_structure(&uniform_structure(p, t)?))
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn m(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, j: u32) -> Rational {
        self.values[j as usize]
    }

    /// `s_f(a,b) = (f(b) - f(a))/(b - a)`.
    pub fn chord_slope(&self, a: u32, b: u32) -> Result<Rational> {
        if a >= b || b > self.m() {
            return Err(Error::param(format!("need 0 ≤ a < b ≤ m (a={a}, b={b}, m={})", self.m())));
        }
        Ok((self.at(b) - self.at(a)) / int((b - a) as i64))
    }

    /// Smallest chord slope from `a` to any node in `(a, b]`.
    fn min_chord(&self, a: u32, b: u32) -> Rational {
        (a + 1..=b).map(|x| (self.at(x) - self.at(a)) / int((x - a) as i64)).min().unwrap()
    }

    /// `f(x) ≥ f(a) + σ(x-a) - ε(b-a)` at every node of `[a,b]`.
    pub fn is_superlinear(&self, a: u32, b: u32, sigma: Rational, eps: Rational) -> Result<SuperlinearCheck> {
        if a >= b || b > self.m() {
            return Err(Error::param(format!("need 0 ≤ a < b ≤ m (a={a}, b={b}, m={})", self.m())));
        }
        let slack = |x: u32| self.at(x) - self.at(a) - sigma * int((x - a) as i64) + eps * int((b - a) as i64);
        let (worst_node, worst) =
            (a..=b).map(|x| (x, slack(x))).fold((a, slack(a)), |best, cur| if cur.1 < best.1 { cur } else { best });
        Ok(SuperlinearCheck { holds: worst >= zero(), worst_node, slack: worst })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperlinearCheck {
    pub holds: bool,
    pub worst_node: u32,
    #[serde(with = "rational_str")]
    pub slack: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionKind {
    Hull,
    MinLength,
}

/// Breakpoints `0 = a_0 < … < a_n = m` with strictly increasing slopes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeDecomposition {
    pub kind: DecompositionKind,
    pub breakpoints: Vec<u32>,
    #[serde(with = "rational_vec_str")]
    pub slopes: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub eps: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub tau: Option<Rational>,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&fmt_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| crate::exact::parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

impl SlopeDecomposition {
    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    /// `Σ (a_{j+1} - a_j)·σ_{j+1}`.
    pub fn weighted_sum(&self) -> Rational {
        self.breakpoints.windows(2).zip(&self.slopes).map(|(w, &s)| s * int((w[1] - w[0]) as i64)).sum()
    }

    /// The piecewise-linear minorant `g` with `g(0) = 0` at every node.
    pub fn minorant(&self) -> Vec<Rational> {
        let mut out = vec![zero()];
        for (w, &s) in self.breakpoints.windows(2).zip(&self.slopes) {
            for _ in w[0]..w[1] {
                let last = *out.last().unwrap();
                out.push(last + s);
            }
        }
        out
    }
}

/// Vertices of the lower convex envelope of `{(j, f(j))}`; collinear points
/// are dropped so slopes increase strictly.
pub fn decompose_hull(f: &BranchingFunction) -> Result<SlopeDecomposition> {
    let m = f.m();
    if m == 0 {
        return Err(Error::param("branching function has an empty domain (m = 0)"));
    }
    let slope = |a: u32, b: u32| (f.at(b) - f.at(a)) / int((b - a) as i64);
    let mut hull: Vec<u32> = Vec::with_capacity(m as usize + 1);
    for x in 0..=m {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if slope(o, a) >= slope(a, x) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(x);
    }
    let slopes = hull.windows(2).map(|w| slope(w[0], w[1])).collect();
    Ok(SlopeDecomposition { kind: DecompositionKind::Hull, breakpoints: hull, slopes, eps: None, tau: None })
}

/// Blocks of length at least `τm` (`τ = ε/3`) with strictly increasing
/// slopes, each slope the smallest chord from the block's left end, and
/// total loss `f(m) - Σ` at most `εm`.
///
/// Exact dynamic program over integer breakpoints maximizing `Σ`; the
/// hull is returned whenever all its pieces are long enough. Ties go to
/// the smallest breakpoints.
pub fn decompose_min_length(f: &BranchingFunction, eps: Rational) -> Result<SlopeDecomposition> {
    let m = f.m();
    if m == 0 {
        return Err(Error::param("branching function has an empty domain (m = 0)"));
    }
    if eps <= zero() || eps > int(3) {
        return Err(Error::param(format!("ε={} must lie in (0,3]", fmt_rational(&eps))));
    }
    let tau = eps / int(3);
    let long = |a: u32, b: u32| int((b - a) as i64) >= tau * int(m as i64);
    let n = m as usize + 1;
    let mut slope = vec![vec![zero(); n]; n];
    for a in 0..m {
        for b in a + 1..=m {
            slope[a as usize][b as usize] = f.min_chord(a, b);
        }
    }
    // best[a][b]: best Σ over partitions of [0,b] whose last block is [a,b],
    // with the start of the block before it
    type Cell = Option<(Rational, Option<u32>)>;
    let mut best: Vec<Vec<Cell>> = vec![vec![None; n]; n];
    for b in 1..=m {
        for a in 0..b {
            if !long(a, b) {
                continue;
            }
            let s = slope[a as usize][b as usize];
            let here = s * int((b - a) as i64);
            if a == 0 {
                best[0][b as usize] = Some((here, None));
                continue;
            }
            let mut pick: Option<(Rational, Option<u32>)> = None;
            for p in 0..a {
                if let Some((v, _)) = best[p as usize][a as usize] {
                    if slope[p as usize][a as usize] < s && pick.is_none_or(|(bv, _)| v + here > bv) {
                        pick = Some((v + here, Some(p)));
                    }
                }
            }
            best[a as usize][b as usize] = pick;
        }
    }
    let mut end: Option<(Rational, u32)> = None;
    for a in 0..m {
        if let Some((v, _)) = best[a as usize][m as usize] {
            if end.is_none_or(|(bv, _)| v > bv) {
                end = Some((v, a));
            }
        }
    }
    // [0,m] is always a feasible block since τ ≤ 1
    let (_, mut a) = end.expect("single block is feasible");
    let mut breakpoints = vec![m];
    let mut b = m;
    loop {
        breakpoints.push(a);
        let (_, prev) = best[a as usize][b as usize].unwrap();
        match prev {
            Some(p) => {
                b = a;
                a = p;
            }
            None => break,
        }
    }
    breakpoints.reverse();
    let slopes = breakpoints.windows(2).map(|w| slope[w[0] as usize][w[1] as usize]).collect();
    Ok(SlopeDecomposition { kind: DecompositionKind::MinLength, breakpoints, slopes, eps: Some(eps), tau: Some(tau) })
}

/// `K_T = 3·2^{(T-1)σ}`: the factor between the branching bound on dyadic
/// cells and the best constant over closed windows.
pub fn certificate_constant(t: u32, sigma: Rational) -> Surd {
    Surd::from_int(3).mul(&Surd::pow2(sigma * int(t as i64 - 1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatzTaoCertificate {
    pub holds: bool,
    pub worst_node: u32,
    #[serde(with = "rational_str")]
    pub slack: Rational,
    /// `katz_tao_constant(P, σ)·δ^ε` for a supplied realizing set.
    pub measured_ratio: Option<Surd>,
}

/// Checks `f(m) - f(x) ≤ σ(m-x) + εm` at every node, i.e. no cell of side
/// `2^{-xT}` holds more than `δ^{-ε}(2^{-xT}/δ)^σ` points. With a realizing set,
/// also measures its Katz-Tao constant relative to `δ^{-ε}`.
pub fn katz_tao_certificate(
    f: &BranchingFunction,
    sigma: Rational,
    eps: Rational,
    set: Option<&GridSet>,
) -> Result<KatzTaoCertificate> {
    if sigma < zero() || sigma > int(1) || eps < zero() {
        return Err(Error::param("need σ in [0,1] and ε ≥ 0"));
    }
    let m = f.m();
    let mi = int(m as i64);
    let (worst_node, slack) = (0..=m).map(|x| (x, sigma * int((m - x) as i64) + eps * mi - (f.at(m) - f.at(x)))).fold(
        (0, None::<Rational>),
        |(bx, bs), (x, s)| match bs {
            Some(v) if v <= s => (bx, Some(v)),
            _ => (x, Some(s)),
        },
    );
    let slack = slack.unwrap();
    let measured_ratio = match set {
        Some(p) => {
            let c = katz_tao_constant(p, sigma, Mode::Dyadic)?;
            Some(c.mul(&Surd::pow2(-eps * int(p.q() as i64))))
        }
        None => None,
    };
    Ok(KatzTaoCertificate { holds: slack >= zero(), worst_node, slack, measured_ratio })
}

/// Largest Frostman constant at exponent `σ` among the renormalized pieces
/// `S_Q(P ∩ Q)`, `Q` of side `2^{-aT}`, viewed at resolution `2^{-T(b-a)}`.
pub fn frostman_certificate(p: &GridSet, t: u32, a: u32, b: u32, sigma: Rational) -> Result<Surd> {
    let f = BranchingFunction::of_set(p, t)?;
    let check = f.is_superlinear(a, b, sigma, zero())?;
    if !check.holds {
        return Err(Error::Hypothesis(format!(
            "f is not ({},0)-superlinear on [{a},{b}] (node {}, slack {})",
            fmt_rational(&sigma),
            check.worst_node,
            fmt_rational(&check.slack)
        )));
    }
    let cells = p.cells(a * t)?;
    let resolution = t * (b - a);
    let values: Result<Vec<Surd>> = cells
        .par_iter()
        .map(|&pos| {
            let piece = p.renormalize(DyadicInterval::new(a * t, pos))?;
            let piece = if resolution < piece.q() { piece.skeleton(resolution)? } else { piece };
            frostman_constant(&piece, sigma, Mode::Dyadic)
        })
        .collect();
    Ok(values?.into_iter().max().expect("uniform sets are nonempty"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatzTaoScale {
    /// `Δ = 2^{-level}`.
    pub level: u32,
    pub n0: usize,
    pub decomposition: SlopeDecomposition,
    pub skeleton: GridSet,
    pub constant: Surd,
}

/// The coarsest hull breakpoint up to which every slope is at most `ᾱ`,
/// with the Katz-Tao constant of the skeleton there.
pub fn find_katz_tao_scale(p: &GridSet, t: u32, alpha_bar: Rational) -> Result<KatzTaoScale> {
    if alpha_bar <= zero() || alpha_bar > int(1) {
        return Err(Error::param("ᾱ must lie in (0,1]"));
    }
    let f = BranchingFunction::of_set(p, t)?;
    let dec = decompose_hull(&f)?;
    let n0 = dec.slopes.iter().take_while(|&&s| s <= alpha_bar).count();
    if n0 == 0 {
        return Err(Error::Hypothesis(format!(
            "no admissible scale: first slope {} exceeds ᾱ={}",
            fmt_rational(&dec.slopes[0]),
            fmt_rational(&alpha_bar)
        )));
    }
    let level = dec.breakpoints[n0] * t;
    let skeleton = if level == p.q() { p.clone() } else { p.skeleton(level)? };
    let constant = katz_tao_constant(&skeleton, alpha_bar, Mode::Dyadic)?;
    Ok(KatzTaoScale { level, n0, decomposition: dec, skeleton, constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn bf(t: u32, v: &[(i64, i64)]) -> BranchingFunction {
        BranchingFunction::new(t, v.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    #[test]
    fn from_structure_examples() {
        let s = UniformStructure::new(2, vec![4, 1]).unwrap();
        assert_eq!(BranchingFunction::from_structure(&s).values(), &[r(0, 1), r(1, 1), r(1, 1)]);
        let full = UniformStructure::new(3, vec![8; 4]).unwrap();
        let f = BranchingFunction::from_structure(&full);
        assert!((0..=4).all(|j| f.at(j) == r(j as i64, 1)));
        let flat = UniformStructure::new(3, vec![1; 4]).unwrap();
        assert!(BranchingFunction::from_structure(&flat).values().iter().all(|v| *v == r(0, 1)));
    }

    #[test]
    fn validation() {
        assert!(BranchingFunction::new(2, vec![r(1, 2)]).is_err());
        assert!(BranchingFunction::new(2, vec![r(0, 1), r(3, 2)]).is_err());
        assert!(BranchingFunction::new(2, vec![r(0, 1), r(1, 2), r(1, 4)]).is_err());
    }

    #[test]
    fn chords_and_superlinearity() {
        let f = bf(2, &[(0, 1), (1, 1), (1, 1)]);
        assert_eq!(f.chord_slope(0, 2).unwrap(), r(1, 2));
        assert_eq!(f.chord_slope(0, 1).unwrap(), r(1, 1));
        assert_eq!(f.chord_slope(1, 2).unwrap(), r(0, 1));
        assert!(f.chord_slope(1, 1).is_err());
        assert!(f.is_superlinear(0, 2, r(1, 2), r(0, 1)).unwrap().holds);
        let c = f.is_superlinear(0, 2, r(1, 1), r(0, 1)).unwrap();
        assert!(!c.holds);
        assert_eq!(c.worst_node, 2);
    }

    #[test]
    fn hull_examples() {
        let d = decompose_hull(&bf(2, &[(0, 1), (1, 1), (1, 1)])).unwrap();
        assert_eq!((d.breakpoints.clone(), d.slopes.clone()), (vec![0, 2], vec![r(1, 2)]));
        let d = decompose_hull(&bf(2, &[(0, 1), (1, 5), (1, 1)])).unwrap();
        assert_eq!((d.breakpoints.clone(), d.slopes.clone()), (vec![0, 1, 2], vec![r(1, 5), r(4, 5)]));
        let d = decompose_hull(&bf(2, &[(0, 1), (1, 2), (1, 2), (3, 2)])).unwrap();
        assert_eq!((d.breakpoints.clone(), d.slopes.clone()), (vec![0, 2, 3], vec![r(1, 4), r(1, 1)]));
        assert!(decompose_hull(&bf(2, &[(0, 1)])).is_err());
    }

    #[test]
    fn min_length_examples() {
        let f = bf(2, &[(0, 1), (1, 5), (1, 1)]);
        let d = decompose_min_length(&f, r(3, 10)).unwrap();
        assert_eq!(d.breakpoints, decompose_hull(&f).unwrap().breakpoints);

        let f = bf(2, &[(0, 1), (1, 10), (3, 10), (6, 10), (1, 1)]);
        let d = decompose_min_length(&f, r(3, 2)).unwrap();
        assert_eq!(d.breakpoints, vec![0, 2, 4]);
        assert_eq!(d.slopes, vec![r(1, 10), r(3, 10)]);
        assert_eq!(d.weighted_sum(), r(4, 5));

        let f = bf(2, &[(0, 1), (1, 1), (1, 1)]);
        assert_eq!(decompose_min_length(&f, r(3, 10)).unwrap().breakpoints, vec![0, 2]);
        assert!(decompose_min_length(&f, r(0, 1)).is_err());
    }

    #[test]
    fn katz_tao_certificate_examples() {
        let lin = bf(2, &[(0, 1), (1, 2), (1, 1), (3, 2)]);
        assert!(katz_tao_certificate(&lin, r(1, 2), r(0, 1), None).unwrap().holds);
        let f = bf(2, &[(0, 1), (1, 1), (1, 1)]);
        assert!(katz_tao_certificate(&f, r(1, 2), r(0, 1), None).unwrap().holds);
        let f = bf(2, &[(0, 1), (0, 1), (1, 1)]);
        assert!(!katz_tao_certificate(&f, r(1, 2), r(0, 1), None).unwrap().holds);
        assert!(katz_tao_certificate(&f, r(1, 2), r(1, 4), None).unwrap().holds);
        let steep = bf(2, &[(0, 1), (0, 1), (0, 1), (1, 1)]);
        let c = katz_tao_certificate(&steep, r(1, 2), r(0, 1), None).unwrap();
        assert!(!c.holds);
        assert_eq!(c.worst_node, 2);
    }

    #[test]
    fn frostman_certificate_full_grid() {
        let full = GridSet::full(6).unwrap();
        let c = frostman_certificate(&full, 2, 1, 3, r(1, 1)).unwrap();
        assert!(c <= certificate_constant(2, r(1, 1)));
        let c0 = frostman_certificate(&full, 2, 0, 3, r(0, 1)).unwrap();
        assert_eq!(c0, Surd::from_int(1));
        let sparse = GridSet::new(4, 1, [0, 4, 8, 12]).unwrap();
        assert!(frostman_certificate(&sparse, 2, 1, 2, r(1, 2)).is_err());
    }

    #[test]
    fn katz_tao_scale_examples() {
        // N = (4, 1) with T = 2
        let p = GridSet::new(4, 1, [0, 4, 8, 12]).unwrap();
        let k = find_katz_tao_scale(&p, 2, r(3, 4)).unwrap();
        assert_eq!((k.n0, k.level), (1, 4));
        assert!(k.constant <= Surd::from_int(2));

        // N = (2, 32) with T = 5: f = [0, 1/5, 6/5]
        let p = GridSet::new(10, 1, (0..32).chain(512..544)).unwrap();
        let k = find_katz_tao_scale(&p, 5, r(3, 4)).unwrap();
        assert_eq!(k.decomposition.slopes, vec![r(1, 5), r(1, 1)]);
        assert_eq!((k.n0, k.level), (1, 5));
        assert_eq!(k.skeleton.len(), 2);

        let err = find_katz_tao_scale(&GridSet::full(4).unwrap(), 2, r(1, 2)).unwrap_err();
        assert!(err.is_hypothesis());
    }
}
