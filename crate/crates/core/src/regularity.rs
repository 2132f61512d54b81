//! Best Frostman and Katz-Tao constants of a grid set.
//!
//! Balls are closed windows `[x-r, x+r]` of length `2r`. Dyadic mode takes
//! `r = 2^{-l}` for `0 ≤ l ≤ q`; exact mode takes the supremum over every
//! real `r ≥ δ`, which lands on `r = max(δ, g_k/2)` where `g_k` is the
//! smallest span of `k` consecutive points. Exact lies between dyadic and
//! `2^s` times dyadic.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_rational, rational_str, Rational, Surd};
use crate::gridset::GridSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Dyadic,
    Exact,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(Mode::Dyadic),
            "exact" => Ok(Mode::Exact),
            _ => Err(Error::param(format!("unknown mode {s:?} (dyadic|exact)"))),
        }
    }
}

/// Largest number of points in a closed window `[x, x + width]`, width in
/// grid units.
pub fn max_window_count(p: &GridSet, width: u64) -> usize {
    let idx = p.indices();
    let mut best = 0;
    let mut j = 0;
    for i in 0..idx.len() {
        if j < i {
            j = i;
        }
        while j < idx.len() && idx[j] - idx[i] <= width {
            j += 1;
        }
        best = best.max(j - i);
    }
    best
}

/// One ball radius (as a fraction of 1) and the most points a ball of that
/// radius holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusCount {
    #[serde(with = "rational_str")]
    pub radius: Rational,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    #[serde(with = "rational_str")]
    pub s: Rational,
    pub mode: Mode,
    pub size: usize,
    pub frostman: Surd,
    pub katz_tao: Surd,
    pub per_radius: Vec<RadiusCount>,
}

fn check_exponent(s: Rational) -> Result<()> {
    if s < Rational::from_integer(0) || s > Rational::from_integer(1) {
        return Err(Error::param(format!("exponent s={} must lie in [0,1]", fmt_rational(&s))));
    }
    Ok(())
}

// Radius in grid units, times two so half-gaps stay integral.
#[derive(Clone, Copy)]
struct Window {
    twice_r: u64,
    count: usize,
}

fn dyadic_windows(p: &GridSet) -> Vec<Window> {
    (0..=p.q())
        .map(|l| {
            let r = 1u64 << (p.q() - l);
            Window { twice_r: 2 * r, count: max_window_count(p, 2 * r) }
        })
        .collect()
}

/// `g_k` for every k, then the radius where each count first appears.
fn exact_windows(p: &GridSet) -> Vec<Window> {
    let idx = p.indices();
    let n = idx.len();
    let mut gaps = Vec::with_capacity(n);
    for k in 1..=n {
        let g = (0..=n - k).map(|i| idx[i + k - 1] - idx[i]).min().unwrap();
        // radii below δ are not allowed
        gaps.push(g.max(2));
    }
    let mut out = Vec::new();
    for k in 1..=n {
        // only the largest count at a given radius matters
        if k < n && gaps[k] == gaps[k - 1] {
            continue;
        }
        out.push(Window { twice_r: gaps[k - 1], count: k });
    }
    out
}

fn windows(p: &GridSet, mode: Mode) -> Vec<Window> {
    match mode {
        Mode::Dyadic => dyadic_windows(p),
        Mode::Exact => exact_windows(p),
    }
}

// (r/δ)^s with r given as twice_r grid units.
fn units_pow(twice_r: u64, s: Rational) -> Surd {
    Surd::pow(&BigRational::new(BigInt::from(twice_r), BigInt::from(2)), s)
}

fn katz_tao_from(windows: &[Window], s: Rational) -> Surd {
    windows
        .iter()
        .map(|w| Surd::from_int(w.count as u64).div(&units_pow(w.twice_r, s)))
        .max()
        .unwrap_or_else(|| Surd::from_int(0))
}

fn frostman_from(windows: &[Window], s: Rational, q: u32, n: usize) -> Surd {
    // k / (n·(r_units·δ)^s) = k·2^{qs} / (n·r_units^s)
    let scale = Surd::pow2(s * Rational::from_integer(q as i64));
    windows
        .iter()
        .map(|w| Surd::from_ratio(w.count as u64, n as u64).mul(&scale).div(&units_pow(w.twice_r, s)))
        .max()
        .unwrap_or_else(|| Surd::from_int(0))
}

/// Smallest `C` with `|P ∩ B(x,r)| ≤ C·r^s·|P|` over the radii of `mode`.
pub fn frostman_constant(p: &GridSet, s: Rational, mode: Mode) -> Result<Surd> {
    check_exponent(s)?;
    if p.is_empty() {
        return Err(Error::Empty("Frostman constant of an empty set"));
    }
    Ok(frostman_from(&windows(p, mode), s, p.q(), p.len()))
}

/// Smallest `C` with `|P ∩ B(x,r)| ≤ C·(r/δ)^s` over the radii of `mode`.
pub fn katz_tao_constant(p: &GridSet, s: Rational, mode: Mode) -> Result<Surd> {
    check_exponent(s)?;
    if p.is_empty() {
        return Err(Error::Empty("Katz-Tao constant of an empty set"));
    }
    Ok(katz_tao_from(&windows(p, mode), s))
}

pub fn regularity_report(p: &GridSet, s_grid: &[Rational], mode: Mode) -> Result<Vec<RegularityReport>> {
    if p.is_empty() {
        return Err(Error::Empty("regularity of an empty set"));
    }
    let ws = windows(p, mode);
    let per_radius: Vec<RadiusCount> = ws
        .iter()
        .map(|w| RadiusCount { radius: Rational::new(w.twice_r as i64, 2i64 << p.q()), count: w.count })
        .collect();
    s_grid
        .iter()
        .map(|&s| {
            check_exponent(s)?;
            Ok(RegularityReport {
                s,
                mode,
                size: p.len(),
                frostman: frostman_from(&ws, s, p.q(), p.len()),
                katz_tao: katz_tao_from(&ws, s),
                per_radius: per_radius.clone(),
            })
        })
        .collect()
}
