//! δ-separated sets on the dyadic grid `2^{-q}·Z`, stored as sorted indices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Largest supported grid exponent. Keeps `i·2^q + k·j` inside `u64`.
pub const MAX_Q: u32 = 31;

/// The scale chain `δ = 2^{-mT}`, `Δ_j = 2^{-jT}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub q: u32,
    #[serde(rename = "T")]
    pub t: u32,
    pub m: u32,
}

impl ScaleParams {
    pub fn new(q: u32, t: u32) -> Result<Self> {
        if q == 0 || t == 0 || !q.is_multiple_of(t) {
            return Err(Error::param(format!("block exponent T={t} must divide q={q} (both ≥ 1)")));
        }
        Ok(ScaleParams { q, t, m: q / t })
    }
}

/// Half-open dyadic interval `[k·2^{-l}, (k+1)·2^{-l})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub position: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, position: u64) -> Self {
        DyadicInterval { level, position }
    }

    pub fn unit() -> Self {
        DyadicInterval { level: 0, position: 0 }
    }

    /// First grid index inside the interval at exponent `q`.
    pub fn start(&self, q: u32) -> u64 {
        self.position << (q - self.level)
    }

    /// One past the last grid index inside the interval at exponent `q`.
    pub fn end(&self, q: u32) -> u64 {
        (self.position + 1) << (q - self.level)
    }

    pub fn contains(&self, q: u32, index: u64) -> bool {
        index >> (q - self.level) == self.position
    }
}

/// Sorted unique grid indices; index `i` stands for the point `i·2^{-q}`.
///
/// The domain is `[0, span]` closed on the right. The index `span·2^q`
/// falls in the extra cell `[span, span + 2^{-q})` when counting coverings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridSetRepr")]
pub struct GridSet {
    q: u32,
    span: u32,
    indices: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSetRepr {
    q: u32,
    #[serde(default = "one")]
    span: u32,
    indices: Vec<u64>,
}

fn one() -> u32 {
    1
}

impl TryFrom<GridSetRepr> for GridSet {
    type Error = String;

    fn try_from(r: GridSetRepr) -> std::result::Result<Self, String> {
        check_header(r.q, r.span).map_err(|e| format!("q/span: {e}"))?;
        let max = (r.span as u64) << r.q;
        for (pos, w) in r.indices.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(format!("indices[{}]: not strictly increasing ({} then {})", pos + 1, w[0], w[1]));
            }
        }
        if let Some((pos, &v)) = r.indices.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(format!("indices[{pos}]: value {v} out of range [0, {max}]"));
        }
        Ok(GridSet { q: r.q, span: r.span, indices: r.indices })
    }
}

fn check_header(q: u32, span: u32) -> Result<()> {
    if q == 0 || q > MAX_Q {
        return Err(Error::param(format!("grid exponent q={q} must lie in 1..={MAX_Q}")));
    }
    if span == 0 || span > 4 {
        return Err(Error::param(format!("span={span} must lie in 1..=4")));
    }
    Ok(())
}

impl GridSet {
    /// Sort and deduplicate `raw`; every value must lie in `[0, span·2^q]`.
    pub fn new(q: u32, span: u32, raw: impl IntoIterator<Item = u64>) -> Result<Self> {
        check_header(q, span)?;
        let max = (span as u64) << q;
        let mut indices: Vec<u64> = raw.into_iter().collect();
        if let Some(&v) = indices.iter().find(|&&v| v > max) {
            return Err(Error::IndexOutOfRange { value: v, max });
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(GridSet { q, span, indices })
    }

    pub fn empty(q: u32, span: u32) -> Result<Self> {
        GridSet::new(q, span, [])
    }

    /// Full grid `0..2^q` of `[0,1)`.
    pub fn full(q: u32) -> Result<Self> {
        check_header(q, 1)?;
        Ok(GridSet { q, span: 1, indices: (0..1u64 << q).collect() })
    }

    // Caller guarantees sorted, unique, in range.
    pub(crate) fn from_sorted(q: u32, span: u32, indices: Vec<u64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&v| v <= (span as u64) << q));
        GridSet { q, span, indices }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn span(&self) -> u32 {
        self.span
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max_index(&self) -> u64 {
        (self.span as u64) << self.q
    }

    pub fn contains(&self, index: u64) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// True when every point lies in `[0,1)`.
    pub fn in_unit_interval(&self) -> bool {
        self.indices.last().is_none_or(|&v| v < 1u64 << self.q)
    }

    fn check_level(&self, l: u32) -> Result<()> {
        if l > self.q {
            Err(Error::LevelTooFine { level: l, q: self.q })
        } else {
            Ok(())
        }
    }

    /// Distinct dyadic cells of side `2^{-l}` meeting the set, in order.
    pub fn cells(&self, l: u32) -> Result<Vec<u64>> {
        self.check_level(l)?;
        let shift = self.q - l;
        let mut out: Vec<u64> = Vec::new();
        for &i in &self.indices {
            let c = i >> shift;
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// `|P|_{2^{-l}}`.
    pub fn covering_number(&self, l: u32) -> Result<usize> {
        self.check_level(l)?;
        let shift = self.q - l;
        let mut count = 0;
        let mut last = None;
        for &i in &self.indices {
            let c = i >> shift;
            if last != Some(c) {
                count += 1;
                last = Some(c);
            }
        }
        Ok(count)
    }

    /// The set of occupied `2^{-l}` cells as a grid set at exponent `l`.
    pub fn skeleton(&self, l: u32) -> Result<GridSet> {
        if l == 0 {
            return Err(Error::param("skeleton level must be at least 1"));
        }
        Ok(GridSet::from_sorted(l, self.span, self.cells(l)?))
    }

    /// `|P ∩ Q|_{2^{-fine}}` for a cell `Q` at level `coarse`.
    pub fn branching_between(&self, coarse: u32, fine: u32, cell: DyadicInterval) -> Result<usize> {
        self.check_level(fine)?;
        if coarse > fine || cell.level != coarse {
            return Err(Error::param(format!(
                "need coarse ≤ fine and a cell at the coarse level (coarse={coarse}, fine={fine}, cell level={})",
                cell.level
            )));
        }
        self.restrict(cell)?.covering_number(fine)
    }

    fn range_of(&self, cell: DyadicInterval) -> std::ops::Range<usize> {
        let lo = cell.start(self.q);
        let hi = cell.end(self.q);
        let a = self.indices.partition_point(|&v| v < lo);
        let b = self.indices.partition_point(|&v| v < hi);
        a..b
    }

    /// `P ∩ Q` at the same exponent.
    pub fn restrict(&self, cell: DyadicInterval) -> Result<GridSet> {
        self.check_level(cell.level)?;
        let r = self.range_of(cell);
        Ok(GridSet::from_sorted(self.q, self.span, self.indices[r].to_vec()))
    }

    /// Number of points in `Q`.
    pub fn count_in(&self, cell: DyadicInterval) -> Result<usize> {
        self.check_level(cell.level)?;
        Ok(self.range_of(cell).len())
    }

    /// Image of `P ∩ Q` under the affine map taking `Q` onto `[0,1)`,
    /// at exponent `q - l`.
    pub fn renormalize(&self, cell: DyadicInterval) -> Result<GridSet> {
        self.check_level(cell.level)?;
        if cell.level == 0 && cell.position == 0 {
            return Ok(self.clone());
        }
        if cell.level == self.q {
            return Err(Error::param("cannot renormalize a single δ-cell (exponent would be 0)"));
        }
        let base = cell.start(self.q);
        let r = self.range_of(cell);
        let idx = self.indices[r].iter().map(|&v| v - base).collect();
        Ok(GridSet::from_sorted(self.q - cell.level, 1, idx))
    }

    /// Inverse of [`renormalize`](Self::renormalize): place this set inside
    /// `Q`, producing a set at exponent `q + l`.
    pub fn embed_into(&self, cell: DyadicInterval) -> Result<GridSet> {
        if !self.in_unit_interval() {
            return Err(Error::param("only sets in [0,1) can be embedded"));
        }
        let q = self.q + cell.level;
        check_header(q, 1)?;
        if cell.position >= 1u64 << cell.level {
            return Err(Error::param("cell outside [0,1)"));
        }
        let base = cell.position << self.q;
        Ok(GridSet::from_sorted(q, 1, self.indices.iter().map(|&v| v + base).collect()))
    }

    /// `(max - min)·2^{-q}`.
    pub fn diameter(&self) -> Result<Rational> {
        match (self.indices.first(), self.indices.last()) {
            (Some(&a), Some(&b)) => Ok(Rational::new((b - a) as i64, 1i64 << self.q)),
            _ => Err(Error::Empty("diameter of an empty set")),
        }
    }

    /// Points of `self` not in `other` (same exponent).
    pub fn difference(&self, other: &GridSet) -> Result<GridSet> {
        if self.q != other.q {
            return Err(Error::ExponentMismatch(self.q, other.q));
        }
        let idx = self.indices.iter().copied().filter(|v| !other.contains(*v)).collect();
        Ok(GridSet::from_sorted(self.q, self.span, idx))
    }

    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        self.q == other.q && self.indices.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint_from(&self, other: &GridSet) -> bool {
        self.indices.iter().all(|&v| !other.contains(v))
    }
}

/// A subset of `A × B`, stored as sorted unique index pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    q: u32,
    pairs: Vec<(u64, u64)>,
}

impl PairSet {
    pub fn new(q: u32, raw: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        check_header(q, 1)?;
        let max = 1u64 << q;
        let mut pairs: Vec<(u64, u64)> = raw.into_iter().collect();
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a > max || b > max) {
            return Err(Error::IndexOutOfRange { value: a.max(b), max });
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(PairSet { q, pairs })
    }

    pub(crate) fn from_sorted(q: u32, pairs: Vec<(u64, u64)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        PairSet { q, pairs }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// First 16 hex digits of SHA-256 over the little-endian pair stream.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.q.to_le_bytes());
        for &(a, b) in &self.pairs {
            h.update(a.to_le_bytes());
            h.update(b.to_le_bytes());
        }
        let out = h.finalize();
        let mut s = String::with_capacity(16);
        for byte in &out[..8] {
            write!(s, "{byte:02x}").unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(q: u32, idx: &[u64]) -> GridSet {
        GridSet::new(q, 1, idx.iter().copied()).unwrap()
    }

    #[test]
    fn construction_sorts_and_dedups() {
        let p = GridSet::new(2, 1, [2, 0, 2]).unwrap();
        assert_eq!(p.indices(), &[0, 2]);
        assert_eq!(p.len(), 2);
        assert!(matches!(GridSet::new(2, 1, [5]), Err(Error::IndexOutOfRange { value: 5, max: 4 })));
        // the right endpoint is allowed
        assert_eq!(GridSet::new(2, 1, [4]).unwrap().len(), 1);
    }

    #[test]
    fn covering_examples() {
        let p = set(3, &[0, 1, 4]);
        assert_eq!(p.covering_number(2).unwrap(), 2);
        assert_eq!(p.covering_number(0).unwrap(), 1);
        assert_eq!(p.covering_number(3).unwrap(), 3);
        assert_eq!(GridSet::full(3).unwrap().covering_number(3).unwrap(), 8);
        assert!(p.covering_number(4).is_err());
    }

    #[test]
    fn endpoint_occupies_extra_cell() {
        let p = set(3, &[7, 8]);
        assert_eq!(p.covering_number(0).unwrap(), 2);
        assert_eq!(p.cells(0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn branching_examples() {
        let p = set(4, &[0, 4, 8, 12]);
        assert_eq!(p.branching_between(2, 4, DyadicInterval::new(2, 0)).unwrap(), 1);
        let full = GridSet::full(4).unwrap();
        for k in 0..4 {
            assert_eq!(full.branching_between(2, 4, DyadicInterval::new(2, k)).unwrap(), 4);
        }
        let p = set(2, &[0, 1]);
        assert_eq!(p.branching_between(1, 2, DyadicInterval::new(1, 1)).unwrap(), 0);
    }

    #[test]
    fn restrict_and_renormalize() {
        let p = set(3, &[0, 1, 4]);
        assert_eq!(p.restrict(DyadicInterval::new(2, 0)).unwrap().indices(), &[0, 1]);
        assert!(p.restrict(DyadicInterval::new(2, 1)).unwrap().is_empty());
        assert_eq!(p.restrict(DyadicInterval::unit()).unwrap(), p);

        let p = set(4, &[8, 9]);
        let r = p.renormalize(DyadicInterval::new(2, 2)).unwrap();
        assert_eq!((r.q(), r.indices()), (2, &[0u64, 1][..]));
        let e = p.renormalize(DyadicInterval::new(2, 0)).unwrap();
        assert!(e.is_empty() && e.q() == 2);
        assert_eq!(p.renormalize(DyadicInterval::unit()).unwrap(), p);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(set(4, &[0, 4]).diameter().unwrap(), Rational::new(1, 4));
        assert_eq!(set(4, &[3]).diameter().unwrap(), Rational::from_integer(0));
        assert_eq!(GridSet::full(3).unwrap().diameter().unwrap(), Rational::new(7, 8));
        assert!(GridSet::empty(3, 1).unwrap().diameter().is_err());
    }

    #[test]
    fn json_validation_points_at_field() {
        let ok: GridSet = serde_json::from_str(r#"{"q":3,"span":1,"indices":[0,1,4]}"#).unwrap();
        assert_eq!(ok.len(), 3);
        let err = serde_json::from_str::<GridSet>(r#"{"q":2,"span":1,"indices":[0,9]}"#).unwrap_err().to_string();
        assert!(err.contains("indices[1]"), "{err}");
        let err = serde_json::from_str::<GridSet>(r#"{"q":2,"indices":[3,1]}"#).unwrap_err().to_string();
        assert!(err.contains("strictly increasing"), "{err}");
    }

    #[test]
    fn pair_digest_is_stable() {
        let g = PairSet::new(2, [(1, 1), (0, 0), (1, 1)]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.digest(), PairSet::new(2, [(0, 0), (1, 1)]).unwrap().digest());
        assert_ne!(g.digest(), PairSet::new(2, [(0, 0)]).unwrap().digest());
    }
}
