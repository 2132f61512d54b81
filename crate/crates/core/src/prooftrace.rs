//! Scale selection on concrete inputs: the upper-half reduction for `C` and
//! the window scans that pick a pair of scales `Δ_j > Δ_{j+1}` along a
//! min-length slope decomposition.
//!
//! All window quantities are exact rationals in bits. With block `T` and
//! breakpoints `a < b`, the window spans `L = T(b-a)` bits, and a uniform
//! set with branching function `f` branches by `2^{T(f(b)-f(a))}` across it.

use serde::{Deserialize, Serialize};

use crate::branching::{decompose_min_length, frostman_certificate, BranchingFunction, SlopeDecomposition};
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, rational_str, Rational, Surd};
use crate::gridset::GridSet;
use crate::regularity::{frostman_constant, katz_tao_constant, Mode};
use crate::sumproduct::{check_condition_pi, Exponents, PiCheck, PiVariant};

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperHalf {
    /// `Δ = 2^{-k}`.
    pub k: u32,
    /// `C ∩ (Δ/2, Δ]`.
    pub window: GridSet,
    /// `|C ∩ [0,Δ]|`.
    pub head: usize,
    pub total: usize,
    /// `|C ∩ [0,Δ]| ≥ Δ^{η/2}|C|`.
    pub mass_bound: bool,
}

/// Smallest `k ≤ q(1-η/2)` with `|C ∩ (Δ/2,Δ]| ≥ (1-2^{-η/2})|C ∩ [0,Δ]|`
/// for `Δ = 2^{-k}`.
pub fn reduce_c_to_upper_half(c: &GridSet, eta: Rational) -> Result<UpperHalf> {
    if eta <= int(0) || eta > int(1) {
        return Err(Error::param(format!("η={} must lie in (0,1]", fmt_rational(&eta))));
    }
    if c.is_empty() {
        return Err(Error::Empty("upper-half reduction needs a nonempty C"));
    }
    if c.span() != 1 {
        return Err(Error::param("C must lie in [0,1]"));
    }
    let q = c.q();
    let half = eta / int(2);
    let kmax = ((int(1) - half) * int(q as i64)).floor().to_integer() as u32;
    let shrink = Surd::pow2(-half);
    let idx = c.indices();
    let upto = |x: u64| idx.partition_point(|&i| i <= x);
    for k in 0..=kmax {
        let head = upto(1u64 << (q - k));
        let lower = upto((1u64 << (q - k)) >> 1);
        // (b) ⟺ |C ∩ [0,Δ/2]| ≤ 2^{-η/2}|C ∩ [0,Δ]|
        if head > 0 && Surd::from_int(lower as u64) <= shrink.mul(&Surd::from_int(head as u64)) {
            let window = GridSet::new(q, 1, idx[lower..head].iter().copied())?;
            let mass_bound =
                Surd::from_int(head as u64) >= Surd::pow2(-half * int(k as i64)).mul(&Surd::from_int(c.len() as u64));
            return Ok(UpperHalf { k, window, head, total: c.len(), mass_bound });
        }
    }
    Err(Error::Hypothesis(format!(
        "no scale Δ ≥ δ^(1-η/2) = 2^-{kmax} keeps a (1-2^(-η/2)) share of C ∩ [0,Δ] in its upper half"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceVariant {
    Abc,
    C3,
    C4,
}

impl std::str::FromStr for TraceVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abc" => Ok(TraceVariant::Abc),
            "c3" => Ok(TraceVariant::C3),
            "c4" => Ok(TraceVariant::C4),
            _ => Err(Error::param(format!("unknown trace variant {s:?} (abc|c3|c4)"))),
        }
    }
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&fmt_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|s| crate::exact::parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

fn default_limit() -> u64 {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(with = "rational_str")]
    pub alpha: Rational,
    /// Unused by the c4 scan.
    #[serde(with = "opt_rational", default)]
    pub beta: Option<Rational>,
    #[serde(with = "rational_str")]
    pub gamma: Rational,
    #[serde(with = "rational_str")]
    pub eta: Rational,
    /// Min-length parameter; defaults to `η` (abc) or `η/2` (c3, c4).
    #[serde(with = "opt_rational", default)]
    pub lemma_eps: Option<Rational>,
    /// Largest accepted dyadic Frostman constant of `C` at exponent `η` (c4).
    #[serde(default = "default_limit")]
    pub frostman_limit: u64,
}

impl TraceParams {
    pub fn new(t: u32, alpha: Rational, beta: Option<Rational>, gamma: Rational, eta: Rational) -> Self {
        TraceParams { t, alpha, beta, gamma, eta, lemma_eps: None, frostman_limit: default_limit() }
    }

    fn validate(&self, variant: TraceVariant) -> Result<()> {
        let unit = |name: &str, v: Rational| {
            if v <= int(0) || v > int(1) {
                Err(Error::param(format!("{name}={} must lie in (0,1]", fmt_rational(&v))))
            } else {
                Ok(())
            }
        };
        unit("α", self.alpha)?;
        unit("γ", self.gamma)?;
        unit("η", self.eta)?;
        if variant != TraceVariant::C4 {
            unit("β", self.beta.ok_or_else(|| Error::param("this variant needs β"))?)?;
        }
        if self.t == 0 {
            return Err(Error::param("T must be positive"));
        }
        Ok(())
    }

    fn lemma_eps(&self, variant: TraceVariant) -> Rational {
        self.lemma_eps.unwrap_or(match variant {
            TraceVariant::Abc => self.eta,
            _ => self.eta / int(2),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "rational_str")]
    pub lhs: Rational,
    #[serde(with = "rational_str")]
    pub rhs: Rational,
    pub holds: bool,
}

fn ge(name: &str, lhs: Rational, rhs: Rational) -> Check {
    Check { name: name.to_string(), lhs, rhs, holds: lhs >= rhs }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub name: String,
    pub value: Surd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCertificate {
    pub variant: TraceVariant,
    pub params: TraceParams,
    pub q: u32,
    /// Decomposition of `f_B` (abc) or `f_C` (c3, c4).
    pub decomposition: SlopeDecomposition,
    pub j: usize,
    /// Breakpoints `a_j < a_{j+1}`; `Δ_j = 2^{-T·a_j}`.
    pub window: [u32; 2],
    /// Window used for `α′`; the fine end moves to `m` in the special case.
    pub a_window: [u32; 2],
    pub special_case: bool,
    #[serde(with = "rational_str")]
    pub alpha_prime: Rational,
    #[serde(with = "rational_str")]
    pub beta_prime: Rational,
    #[serde(with = "rational_str")]
    pub gamma_prime: Rational,
    pub pi: Option<PiCheck>,
    pub checks: Vec<Check>,
    pub measured: Vec<Measured>,
}

struct Profiles {
    q: u32,
    m: u32,
    fa: Option<BranchingFunction>,
    fb: BranchingFunction,
    fc: Option<BranchingFunction>,
}

fn profiles(variant: TraceVariant, a: &GridSet, b: &GridSet, c: &GridSet, t: u32) -> Result<Profiles> {
    for s in [b, c] {
        if s.q() != a.q() {
            return Err(Error::ExponentMismatch(a.q(), s.q()));
        }
    }
    let q = a.q();
    if !q.is_multiple_of(t) {
        return Err(Error::param(format!("T={t} must divide q={q}")));
    }
    let uniform = |s: &GridSet, name: &str| {
        BranchingFunction::of_set(s, t)
            .map_err(|e| Error::param(format!("{name} must be uniform with block T={t}: {e}")))
    };
    let fb = uniform(b, "B")?;
    let (fa, fc) = match variant {
        TraceVariant::Abc => (Some(uniform(a, "A")?), None),
        _ => (None, Some(uniform(c, "C")?)),
    };
    Ok(Profiles { q, m: q / t, fa, fb, fc })
}

// Bits of branching of f across [x, y].
fn bits(f: &BranchingFunction, x: u32, y: u32) -> Rational {
    int(f.t() as i64) * (f.at(y) - f.at(x))
}

// The qualifying condition for window `j` and the certificate checks
// derived from it.
struct WindowEval {
    scan: Vec<Check>,
    extra: Vec<Check>,
    alpha_prime: Rational,
    beta_prime: Rational,
    gamma_prime: Rational,
    a_window: [u32; 2],
    special: bool,
}

fn evaluate(variant: TraceVariant, p: &TraceParams, pr: &Profiles, dec: &SlopeDecomposition, j: usize) -> WindowEval {
    let (x, y) = (dec.breakpoints[j], dec.breakpoints[j + 1]);
    let slope = dec.slopes[j];
    let len = int(p.t as i64 * (y - x) as i64);
    let (alpha, gamma, eta) = (p.alpha, p.gamma, p.eta);
    match variant {
        TraceVariant::Abc => {
            let fa = pr.fa.as_ref().unwrap();
            let log_a = bits(fa, x, y);
            let scan = vec![
                ge("beta_slope >= eta", slope, eta),
                ge("L(beta_slope + gamma) >= L*eta + log|A|_window", len * (slope + gamma), len * eta + log_a),
            ];
            let special = log_a >= alpha * len;
            let fine = if special { pr.m } else { y };
            let alpha_prime = bits(fa, x, fine) / int(p.t as i64 * (fine - x) as i64);
            WindowEval {
                scan,
                extra: Vec::new(),
                alpha_prime,
                beta_prime: slope,
                gamma_prime: gamma,
                a_window: [x, fine],
                special,
            }
        }
        TraceVariant::C3 | TraceVariant::C4 => {
            let log_b = bits(&pr.fb, pr.m - y, pr.m - x);
            let half = eta / int(2);
            let rhs = alpha * (int(1) + eta / (int(2) * gamma)) * len;
            let c_term = alpha / gamma * slope * len;
            let (name, b_term) = if variant == TraceVariant::C3 {
                (
                    "(alpha/beta)log|B|_window + (alpha/gamma)gamma_slope*L >= alpha(1+eta/(2gamma))L",
                    alpha / p.beta.unwrap() * log_b,
                )
            } else {
                ("log|B|_window + (alpha/gamma)gamma_slope*L >= alpha(1+eta/(2gamma))L", log_b)
            };
            let scan = vec![ge("gamma_slope >= eta/2", slope, half), ge(name, b_term + c_term, rhs)];
            let beta_prime = log_b / len;
            let beta_floor = match variant {
                TraceVariant::C3 => p.beta.unwrap() * half,
                _ => alpha * half,
            };
            let mut extra = vec![
                ge("beta_prime >= lower bound", beta_prime, beta_floor),
                ge("beta_prime + gamma_prime >= alpha + alpha*eta/2", beta_prime + slope, alpha + alpha * half),
            ];
            if variant == TraceVariant::C4 {
                extra.push(ge("gamma_1 >= eta/2", dec.slopes[0], half));
            }
            WindowEval {
                scan,
                extra,
                alpha_prime: alpha,
                beta_prime,
                gamma_prime: slope,
                a_window: [x, y],
                special: false,
            }
        }
    }
}

fn pi_for(variant: TraceVariant, p: &TraceParams, b: &GridSet, c: &GridSet) -> Result<Option<PiCheck>> {
    let pv = match variant {
        TraceVariant::Abc => return Ok(None),
        TraceVariant::C3 => PiVariant::C3,
        TraceVariant::C4 => PiVariant::C4,
    };
    let exps = Exponents { alpha: p.alpha, beta: p.beta.unwrap_or(p.alpha), gamma: p.gamma };
    check_condition_pi(b.len() as u64, c.len() as u64, b.q(), exps, p.eta, pv).map(Some)
}

fn measure(
    variant: TraceVariant,
    p: &TraceParams,
    a: &GridSet,
    b: &GridSet,
    c: &GridSet,
    window: [u32; 2],
    slope: Rational,
) -> Result<Vec<Measured>> {
    let [x, y] = window;
    let mut out = Vec::new();
    match variant {
        TraceVariant::Abc => {
            out.push(Measured {
                name: "B pieces: Frostman at beta_slope".into(),
                value: frostman_certificate(b, p.t, x, y, slope)?,
            });
            out.push(Measured {
                name: "A: Katz-Tao at alpha".into(),
                value: katz_tao_constant(a, p.alpha, Mode::Dyadic)?,
            });
            out.push(Measured {
                name: "C: Frostman at gamma".into(),
                value: frostman_constant(c, p.gamma, Mode::Dyadic)?,
            });
        }
        TraceVariant::C3 | TraceVariant::C4 => {
            out.push(Measured {
                name: "C pieces: Frostman at gamma_slope".into(),
                value: frostman_certificate(c, p.t, x, y, slope)?,
            });
            out.push(Measured { name: "C: Frostman at eta".into(), value: frostman_constant(c, p.eta, Mode::Dyadic)? });
        }
    }
    Ok(out)
}

fn pigeonhole_report(
    variant: TraceVariant,
    p: &TraceParams,
    a: &GridSet,
    b: &GridSet,
    c: &GridSet,
    dec: &SlopeDecomposition,
) -> Error {
    let q = int(a.q() as i64);
    let log_b = int(b.len().ilog2() as i64);
    let mut parts = vec![format!(
        "no window qualifies (breakpoints {:?}, slopes [{}])",
        dec.breakpoints,
        dec.slopes.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
    )];
    if variant == TraceVariant::Abc {
        let beta = p.beta.unwrap();
        if let Ok(k) = katz_tao_constant(a, p.alpha, Mode::Dyadic) {
            parts.push(format!("Katz-Tao constant of A at α: {k}"));
        }
        parts.push(format!(
            "log|B| = {} vs βq = {}{}",
            fmt_rational(&log_b),
            fmt_rational(&(beta * q)),
            if log_b < beta * q { " (size of B violated)" } else { "" }
        ));
        if let Ok(k) = frostman_constant(c, p.gamma, Mode::Dyadic) {
            parts.push(format!("Frostman constant of C at γ: {k}"));
        }
    } else {
        parts.push("(Π) holds, so this contradicts the scale argument or a hypothesis is violated".into());
    }
    Error::Pigeonhole(parts.join("; "))
}

fn scan(variant: TraceVariant, a: &GridSet, b: &GridSet, c: &GridSet, p: &TraceParams) -> Result<WindowCertificate> {
    p.validate(variant)?;
    let needed = match variant {
        TraceVariant::Abc => None,
        TraceVariant::C3 => Some(p.gamma.min(p.beta.unwrap())),
        TraceVariant::C4 => Some(p.gamma),
    };
    if let Some(bound) = needed.filter(|&x| p.alpha > x) {
        return Err(Error::Hypothesis(format!(
            "α={} exceeds {} (needs α ≤ {})",
            fmt_rational(&p.alpha),
            fmt_rational(&bound),
            if variant == TraceVariant::C3 { "min(β,γ)" } else { "γ" }
        )));
    }
    let pi = pi_for(variant, p, b, c)?;
    if let Some(pc) = &pi {
        if !pc.holds {
            return Err(Error::Hypothesis(format!("(Π) fails with margin {:.4} bits", pc.margin_bits)));
        }
    }
    let pr = profiles(variant, a, b, c, p.t)?;
    if variant == TraceVariant::C4 {
        let k = frostman_constant(c, p.eta, Mode::Dyadic)?;
        if k > Surd::from_int(p.frostman_limit) {
            return Err(Error::Hypothesis(format!(
                "C is not Frostman at η={}: constant {k} exceeds {}",
                fmt_rational(&p.eta),
                p.frostman_limit
            )));
        }
    }
    let f = if variant == TraceVariant::Abc { &pr.fb } else { pr.fc.as_ref().unwrap() };
    let dec = decompose_min_length(f, p.lemma_eps(variant))?;
    let Some((j, ev)) =
        (0..dec.len()).map(|j| (j, evaluate(variant, p, &pr, &dec, j))).find(|(_, ev)| ev.scan.iter().all(|c| c.holds))
    else {
        return Err(pigeonhole_report(variant, p, a, b, c, &dec));
    };
    if let Some(bad) = ev.extra.iter().find(|c| !c.holds) {
        return Err(Error::Hypothesis(format!(
            "window {j} qualifies but {} fails: {} < {}",
            bad.name,
            fmt_rational(&bad.lhs),
            fmt_rational(&bad.rhs)
        )));
    }
    let window = [dec.breakpoints[j], dec.breakpoints[j + 1]];
    let measured = measure(variant, p, a, b, c, window, dec.slopes[j])?;
    let mut checks = ev.scan;
    checks.extend(ev.extra);
    Ok(WindowCertificate {
        variant,
        params: p.clone(),
        q: pr.q,
        decomposition: dec,
        j,
        window,
        a_window: ev.a_window,
        special_case: ev.special,
        alpha_prime: ev.alpha_prime,
        beta_prime: ev.beta_prime,
        gamma_prime: ev.gamma_prime,
        pi,
        checks,
        measured,
    })
}

/// Window for the `A + BC` argument: a block of `B`'s decomposition with
/// `β_{j+1} ≥ η` and `(Δ_{j+1}/Δ_j)^{-β_{j+1}-γ} ≥ (Δ_{j+1}/Δ_j)^{-η}|A|_{Δ_j→Δ_{j+1}}`.
/// When `A` branches by at least `(Δ_j/Δ_{j+1})^α` there, `Δ_{j+1}` becomes `δ`.
pub fn scale_window_abc(a: &GridSet, b: &GridSet, c: &GridSet, p: &TraceParams) -> Result<WindowCertificate> {
    scan(TraceVariant::Abc, a, b, c, p)
}

/// Window for the (Π) variant with exponent `β` on `C`: a block of `C`'s
/// decomposition with `γ_{j+1} ≥ η/2` and enough branching of `B` between
/// the dual scales `δ/Δ_{j+1}` and `δ/Δ_j`.
pub fn scale_window_c3(a: &GridSet, b: &GridSet, c: &GridSet, p: &TraceParams) -> Result<WindowCertificate> {
    scan(TraceVariant::C3, a, b, c, p)
}

/// As [`scale_window_c3`] with `B`'s branching entering with exponent 1,
/// and `C` additionally Frostman at exponent `η`.
pub fn scale_window_c4(a: &GridSet, b: &GridSet, c: &GridSet, p: &TraceParams) -> Result<WindowCertificate> {
    scan(TraceVariant::C4, a, b, c, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    pub problems: Vec<String>,
}

/// Re-derives every certificate quantity from covering numbers of the
/// inputs and reports each disagreement or failed inequality.
pub fn verify_certificate(cert: &WindowCertificate, a: &GridSet, b: &GridSet, c: &GridSet) -> Result<Verification> {
    let p = &cert.params;
    let v = cert.variant;
    let mut problems = Vec::new();
    let q = a.q();
    if q != cert.q || !q.is_multiple_of(p.t) {
        return Err(Error::param(format!("certificate is for q={}, inputs have q={q}", cert.q)));
    }
    // branching functions straight from covering numbers
    let direct = |s: &GridSet| -> Result<BranchingFunction> {
        let values = (0..=q / p.t)
            .map(|j| Ok(Rational::new(s.covering_number(j * p.t)?.ilog2() as i64, p.t as i64)))
            .collect::<Result<Vec<_>>>()?;
        BranchingFunction::new(p.t, values)
    };
    let pr = Profiles {
        q,
        m: q / p.t,
        fa: (v == TraceVariant::Abc).then(|| direct(a)).transpose()?,
        fb: direct(b)?,
        fc: (v != TraceVariant::Abc).then(|| direct(c)).transpose()?,
    };
    let f = if v == TraceVariant::Abc { &pr.fb } else { pr.fc.as_ref().unwrap() };
    let dec = decompose_min_length(f, p.lemma_eps(v))?;
    if dec != cert.decomposition {
        problems.push("decomposition differs from a fresh computation".into());
    }
    let dec = &cert.decomposition;
    if cert.j + 1 >= dec.breakpoints.len() {
        return Ok(Verification { ok: false, problems: vec![format!("window index {} out of range", cert.j)] });
    }
    let (x, y) = (dec.breakpoints[cert.j], dec.breakpoints[cert.j + 1]);
    let min_chord = (x + 1..=y).map(|z| (f.at(z) - f.at(x)) / int((z - x) as i64)).min().unwrap();
    if min_chord != dec.slopes[cert.j] {
        problems.push(format!(
            "slope {} is not the smallest chord {}",
            fmt_rational(&dec.slopes[cert.j]),
            fmt_rational(&min_chord)
        ));
    }
    if cert.window != [x, y] {
        problems.push("window does not match the decomposition".into());
    }
    for earlier in 0..cert.j {
        if evaluate(v, p, &pr, dec, earlier).scan.iter().all(|c| c.holds) {
            problems.push(format!("window {earlier} already qualifies"));
        }
    }
    let ev = evaluate(v, p, &pr, dec, cert.j);
    let mut checks = ev.scan;
    checks.extend(ev.extra);
    if checks != cert.checks {
        problems.push("recorded checks differ from recomputed ones".into());
    }
    for ch in checks.iter().filter(|c| !c.holds) {
        problems.push(format!("{}: {} < {}", ch.name, fmt_rational(&ch.lhs), fmt_rational(&ch.rhs)));
    }
    if (ev.alpha_prime, ev.beta_prime, ev.gamma_prime) != (cert.alpha_prime, cert.beta_prime, cert.gamma_prime) {
        problems.push("exponents α′, β′, γ′ differ from recomputed ones".into());
    }
    if ev.a_window != cert.a_window || ev.special != cert.special_case {
        problems.push("special-case window differs".into());
    }
    let pi = pi_for(v, p, b, c)?;
    if pi != cert.pi {
        problems.push("(Π) evaluation differs".into());
    }
    if pi.as_ref().is_some_and(|pc| !pc.holds) {
        problems.push("(Π) fails".into());
    }
    if v == TraceVariant::C4 && frostman_constant(c, p.eta, Mode::Dyadic)? > Surd::from_int(p.frostman_limit) {
        problems.push("C is not Frostman at η within the limit".into());
    }
    if measure(v, p, a, b, c, [x, y], dec.slopes[cert.j])? != cert.measured {
        problems.push("measured constants differ".into());
    }
    Ok(Verification { ok: problems.is_empty(), problems })
}
