//! Explicit examples (the sharpness construction, small-diameter and
//! concentrated pairs) and seeded random uniform sets.
//!
//! Random trees use `ChaCha8Rng::seed_from_u64(seed)`. Cells are expanded
//! level by level in increasing order; each draws its children with
//! `rand::seq::index::sample(2^T, N)` from the one shared stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_rational, rational_str, Rational, Surd};
use crate::gridset::{GridSet, MAX_Q};

/// `{o + i·2^g : 0 ≤ i < n}` in `[0,1]`.
pub fn arithmetic_progression(q: u32, gap_exp: u32, n: u64, offset: u64) -> Result<GridSet> {
    if n == 0 {
        return Err(Error::param("an arithmetic progression needs n ≥ 1"));
    }
    if gap_exp > q {
        return Err(Error::param(format!("gap 2^{gap_exp} exceeds the grid 2^{q}")));
    }
    let last = (n - 1)
        .checked_mul(1u64 << gap_exp)
        .and_then(|x| x.checked_add(offset))
        .filter(|&x| x <= 1u64 << q)
        .ok_or_else(|| {
            Error::param(format!("progression ({offset} + {n}-1 terms of 2^{gap_exp}) leaves [0, 2^{q}]"))
        })?;
    debug_assert!(last <= 1u64 << q);
    GridSet::new(q, 1, (0..n).map(|i| offset + (i << gap_exp)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Every derived exponent must already be an integer.
    Exact,
    /// Round derived exponents down to the nearest admissible integers.
    Floor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessParams {
    pub q: u32,
    #[serde(with = "rational_str")]
    pub alpha: Rational,
    #[serde(with = "rational_str")]
    pub beta: Rational,
    #[serde(with = "rational_str")]
    pub gamma: Rational,
    #[serde(with = "rational_str")]
    pub eta: Rational,
}

/// Integer log-sizes of the construction: `|B₀| = 2^b`, `|A₀| = 2^a`,
/// `|C₀| = 2^{c0}`, `Δ = 2^{-D}`, `|C₁| = 2^{c1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpnessMeta {
    pub q: u32,
    pub rounding: Rounding,
    pub b_exp: u32,
    pub a_exp: u32,
    pub c0_exp: u32,
    pub delta_exp: u32,
    pub c1_exp: u32,
    pub a_size: usize,
    pub b_size: usize,
    pub c_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessExample {
    pub a: GridSet,
    pub b: GridSet,
    pub c: GridSet,
    pub meta: SharpnessMeta,
}

fn whole(x: Rational) -> Option<u32> {
    (x.is_integer() && x >= Rational::from_integer(0)).then(|| *x.numer() as u32)
}

fn floor_u32(x: Rational) -> u32 {
    x.floor().to_integer().max(0) as u32
}

impl SharpnessParams {
    pub fn new(q: u32, alpha: Rational, beta: Rational, gamma: Rational, eta: Rational) -> Result<Self> {
        let p = SharpnessParams { q, alpha, beta, gamma, eta };
        p.check_order()?;
        Ok(p)
    }

    fn check_order(&self) -> Result<()> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let (a, b, g, e) = (self.alpha, self.beta, self.gamma, self.eta);
        if !(zero < e && e < a.min(g) && a.max(g) <= one) {
            return Err(Error::param(format!(
                "need 0 < η < min(α,γ) ≤ max(α,γ) ≤ 1, got α={} γ={} η={}",
                fmt_rational(&a),
                fmt_rational(&g),
                fmt_rational(&e)
            )));
        }
        if !(zero < b && b < a - e) {
            return Err(Error::param(format!(
                "need 0 < β < α − η = {}, got β={}",
                fmt_rational(&(a - e)),
                fmt_rational(&b)
            )));
        }
        if self.q == 0 || self.q > MAX_Q {
            return Err(Error::param(format!("q={} must lie in 1..={MAX_Q}", self.q)));
        }
        Ok(())
    }

    fn exact_exponents(&self, q: u32) -> std::result::Result<[u32; 5], String> {
        let qr = Rational::from_integer(q as i64);
        let b = whole(qr * self.beta).ok_or("qβ must be an integer")?;
        let a = whole(Rational::from_integer(b as i64) * self.alpha / (self.alpha - self.eta))
            .ok_or("qβ·α/(α−η) must be an integer")?;
        let a_over_alpha =
            whole(Rational::from_integer(a as i64) / self.alpha).ok_or("|A₀|^{1/α} must be a power of two")?;
        let d = q.checked_sub(a_over_alpha).ok_or("Δ = δ|A₀|^{1/α} exceeds 1")?;
        let c1 = whole(Rational::from_integer(d as i64) * self.gamma).ok_or("γ·log(1/Δ) must be an integer")?;
        let c0 = a.checked_sub(b).ok_or("|A₀| < |B₀|")?;
        if d > q - c0 {
            return Err("the translates of [0, δ/Δ] would overlap".into());
        }
        Ok([b, a, c0, d, c1])
    }

    // Floor each derived exponent, keeping `a/α` integral.
    fn floor_exponents(&self) -> [u32; 5] {
        let qr = Rational::from_integer(self.q as i64);
        let b = floor_u32(qr * self.beta);
        let mut a = floor_u32(Rational::from_integer(b as i64) * self.alpha / (self.alpha - self.eta));
        let num = *self.alpha.numer() as u32;
        a -= a % num;
        let d = self.q - floor_u32(Rational::from_integer(a as i64) / self.alpha);
        let c1 = floor_u32(Rational::from_integer(d as i64) * self.gamma);
        [b, a, a.saturating_sub(b), d, c1]
    }

    /// Nearest `q` in `1..=MAX_Q` at which every exponent is integral, lower on ties.
    pub fn nearest_admissible_q(&self) -> Option<u32> {
        (1..=MAX_Q).filter(|&q| self.exact_exponents(q).is_ok()).min_by_key(|&q| (q.abs_diff(self.q), q))
    }

    pub fn exponents(&self, rounding: Rounding) -> Result<[u32; 5]> {
        self.check_order()?;
        match rounding {
            Rounding::Exact => self.exact_exponents(self.q).map_err(|why| {
                let hint = match self.nearest_admissible_q() {
                    Some(q) => format!("nearest admissible q is {q}"),
                    None => format!("no q ≤ {MAX_Q} is admissible"),
                };
                Error::param(format!("q={}: {why}; {hint}", self.q))
            }),
            Rounding::Floor => Ok(self.floor_exponents()),
        }
    }
}

/// The sharpness construction: `A = Δ·A₀`, `B = Δ·B₀`, `C = C₀ + C₁` with
/// `A₀, B₀, C₀` progressions containing 0 and `C₁` the densest
/// `(δ,γ)` progression in `[0, δ/Δ)`.
pub fn sharpness_example(p: &SharpnessParams, rounding: Rounding) -> Result<SharpnessExample> {
    let [b_exp, a_exp, c0_exp, d, c1_exp] = p.exponents(rounding)?;
    let q = p.q;
    let a = arithmetic_progression(q, q - a_exp - d, 1 << a_exp, 0)?;
    let b = arithmetic_progression(q, q - b_exp - d, 1 << b_exp, 0)?;
    let c = GridSet::new(
        q,
        1,
        (0..1u64 << c0_exp).flat_map(|i| (0..1u64 << c1_exp).map(move |k| (i << (q - c0_exp)) + (k << (d - c1_exp)))),
    )?;
    debug_assert_eq!(c.len(), 1 << (c0_exp + c1_exp));
    let meta = SharpnessMeta {
        q,
        rounding,
        b_exp,
        a_exp,
        c0_exp,
        delta_exp: d,
        c1_exp,
        a_size: a.len(),
        b_size: b.len(),
        c_size: c.len(),
    };
    Ok(SharpnessExample { a, b, c, meta })
}

/// `B = [0, 2^{-rB})` and `C = [0, 2^{-rC})` as full grids, with `A`
/// defaulting to the progression of gap `2^{ceil(q/2)}` across `[0,1)`.
pub fn small_diameter_example(
    q: u32,
    rb_exp: u32,
    rc_exp: u32,
    a: Option<GridSet>,
) -> Result<(GridSet, GridSet, GridSet)> {
    if rb_exp > q || rc_exp > q {
        return Err(Error::param(format!("radii 2^-{rb_exp}, 2^-{rc_exp} must be at least δ = 2^-{q}")));
    }
    if rb_exp + rc_exp < q {
        return Err(Error::param(format!("need rB + rC ≥ q so that r_B·r_C ≤ δ, got {rb_exp} + {rc_exp} < {q}")));
    }
    let a = match a {
        Some(a) if a.q() != q => return Err(Error::ExponentMismatch(a.q(), q)),
        Some(a) => a,
        None => arithmetic_progression(q, q.div_ceil(2), 1 << (q / 2), 0)?,
    };
    let b = GridSet::new(q, 1, 0..1u64 << (q - rb_exp))?;
    let c = GridSet::new(q, 1, 0..1u64 << (q - rc_exp))?;
    Ok((a, b, c))
}

/// `A = [0, 2^a δ)` and `B = [0, 2^b δ)` as full grids.
pub fn concentration_example(q: u32, a_exp: u32, b_exp: u32) -> Result<(GridSet, GridSet)> {
    if b_exp > a_exp || a_exp > q {
        return Err(Error::param(format!("need b ≤ a ≤ q, got a={a_exp} b={b_exp} q={q}")));
    }
    Ok((GridSet::new(q, 1, 0..1u64 << a_exp)?, GridSet::new(q, 1, 0..1u64 << b_exp)?))
}

/// Seeded uniform set with branching `2^{branching_exp[j]}` at level `j+1`.
pub fn random_uniform(q: u32, t: u32, branching_exp: &[u32], seed: u64) -> Result<GridSet> {
    if t == 0 || !q.is_multiple_of(t) || branching_exp.len() as u32 != q / t {
        return Err(Error::param(format!("need T | q and q/T branching exponents (q={q}, T={t})")));
    }
    if let Some(&e) = branching_exp.iter().find(|&&e| e > t) {
        return Err(Error::param(format!("branching 2^{e} exceeds 2^T = 2^{t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![0u64];
    for &e in branching_exp {
        let mut next = Vec::with_capacity(cells.len() << e);
        for &cell in &cells {
            let mut kids = rand::seq::index::sample(&mut rng, 1 << t, 1 << e).into_vec();
            kids.sort_unstable();
            next.extend(kids.into_iter().map(|k| (cell << t) + k as u64));
        }
        cells = next;
    }
    GridSet::new(q, 1, cells)
}

fn level_exponent(s: Rational, t: u32, round_up: bool) -> Result<u32> {
    if s < Rational::from_integer(0) || s > Rational::from_integer(1) {
        return Err(Error::param(format!("s={} must lie in [0,1]", fmt_rational(&s))));
    }
    let st = s * Rational::from_integer(t as i64);
    Ok(if round_up { st.ceil() } else { st.floor() }.to_integer() as u32)
}

/// Uniform set with branching `2^{floor(sT)}` per level.
pub fn random_katz_tao(q: u32, t: u32, s: Rational, seed: u64) -> Result<GridSet> {
    let e = level_exponent(s, t, false)?;
    random_uniform(q, t, &vec![e; (q / t.max(1)) as usize], seed)
}

/// Uniform set with branching `2^{ceil(sT)}` per level.
pub fn random_frostman(q: u32, t: u32, s: Rational, seed: u64) -> Result<GridSet> {
    let e = level_exponent(s, t, true)?;
    random_uniform(q, t, &vec![e; (q / t.max(1)) as usize], seed)
}

/// Bound `3·2^{sT}` on the Katz-Tao constant of [`random_katz_tao`] output
/// and on the Frostman constant of [`random_frostman`] output.
pub fn generator_constant(t: u32, s: Rational) -> Surd {
    Surd::pow2(s * Rational::from_integer(t as i64)).mul(&Surd::from_int(3))
}

/// `n` distinct indices drawn uniformly from `0..2^q`.
pub fn random_subset(q: u32, n: usize, seed: u64) -> Result<GridSet> {
    if q > 24 || n > 1usize << q {
        return Err(Error::param(format!("cannot draw {n} points from 2^{q} (q ≤ 24)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridSet::new(q, 1, rand::seq::index::sample(&mut rng, 1 << q, n).into_iter().map(|x| x as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::{frostman_constant, katz_tao_constant, Mode};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn standard(q: u32) -> SharpnessParams {
        SharpnessParams::new(q, r(1, 2), r(1, 4), r(1, 2), r(1, 5)).unwrap()
    }

    #[test]
    fn progressions() {
        assert_eq!(arithmetic_progression(4, 2, 4, 0).unwrap().indices(), &[0, 4, 8, 12]);
        assert_eq!(arithmetic_progression(4, 2, 1, 7).unwrap().indices(), &[7]);
        assert_eq!(arithmetic_progression(3, 0, 8, 0).unwrap(), GridSet::full(3).unwrap());
        assert!(arithmetic_progression(4, 2, 6, 0).is_err());
    }

    #[test]
    fn sharpness_sizes_at_24() {
        let ex = sharpness_example(&standard(24), Rounding::Exact).unwrap();
        let m = &ex.meta;
        assert_eq!((m.b_size, m.a_size, 1 << m.c0_exp, m.delta_exp, 1 << m.c1_exp), (64, 1024, 16, 4, 4));
        assert_eq!(m.c_size, 64);
    }

    #[test]
    fn sharpness_regularity_at_12() {
        let ex = sharpness_example(&standard(12), Rounding::Exact).unwrap();
        assert_eq!([ex.meta.b_exp, ex.meta.a_exp, ex.meta.c0_exp, ex.meta.delta_exp, ex.meta.c1_exp], [3, 5, 2, 2, 1]);
        let four = Surd::from_int(4);
        assert!(katz_tao_constant(&ex.a, r(1, 2), Mode::Exact).unwrap() <= four);
        assert!(katz_tao_constant(&ex.b, r(1, 2), Mode::Exact).unwrap() <= four);
        assert!(frostman_constant(&ex.c, r(1, 5), Mode::Exact).unwrap() <= Surd::from_int(8));
    }

    #[test]
    fn inadmissible_q_names_the_nearest() {
        let err = sharpness_example(&standard(18), Rounding::Exact).unwrap_err().to_string();
        assert!(err.contains("nearest admissible q is 12"), "{err}");
        let ex = sharpness_example(&standard(18), Rounding::Floor).unwrap();
        assert_eq!([ex.meta.b_exp, ex.meta.a_exp, ex.meta.c0_exp, ex.meta.delta_exp, ex.meta.c1_exp], [4, 6, 2, 6, 3]);
        assert!(SharpnessParams::new(12, r(1, 2), r(1, 2), r(1, 2), r(1, 5)).is_err());
    }

    #[test]
    fn small_diameter_and_concentration() {
        let (a, b, c) = small_diameter_example(10, 10, 0, None).unwrap();
        assert_eq!(b.indices(), &[0]);
        assert_eq!((a.len(), c.len()), (32, 1024));
        assert!(small_diameter_example(10, 4, 5, None).is_err());
        let (a, b) = concentration_example(12, 8, 0).unwrap();
        assert_eq!((a.len(), b.indices()), (256, &[0u64][..]));
        assert!(concentration_example(12, 3, 4).is_err());
    }

    #[test]
    fn generators() {
        assert_eq!(random_katz_tao(8, 2, r(1, 1), 9).unwrap(), GridSet::full(8).unwrap());
        let p = random_katz_tao(12, 2, r(1, 2), 1).unwrap();
        assert_eq!(p.len(), 64);
        assert_eq!(p, random_katz_tao(12, 2, r(1, 2), 1).unwrap());
        assert!(katz_tao_constant(&p, r(1, 2), Mode::Exact).unwrap() <= generator_constant(2, r(1, 2)));
        let f = random_frostman(12, 3, r(1, 2), 4).unwrap();
        assert_eq!(f.len(), 1 << 8);
        assert!(frostman_constant(&f, r(1, 2), Mode::Exact).unwrap() <= generator_constant(3, r(1, 2)));
        assert_eq!(random_subset(10, 50, 3).unwrap().len(), 50);
    }
}
