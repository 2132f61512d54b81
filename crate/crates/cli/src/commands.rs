use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sumlab_core::branching::{decompose_hull, decompose_min_length, BranchingFunction, SlopeDecomposition};
use sumlab_core::constructions::{
    arithmetic_progression, concentration_example, random_frostman, random_katz_tao, random_subset, sharpness_example,
    small_diameter_example, Rounding, SharpnessParams,
};
use sumlab_core::extraction::{is_uniform, uniform_pieces, uniformize, UniformStructure, UniformityFailure};
use sumlab_core::prooftrace::{
    reduce_c_to_upper_half, scale_window_abc, scale_window_c3, scale_window_c4, TraceParams, WindowCertificate,
};
use sumlab_core::regularity::{regularity_report, Mode, RegularityReport};
use sumlab_core::sumproduct::{expansion_search, sum_product_covering, ExpansionReport};
use sumlab_core::{parse_rational, GridSet, Rational, Surd};

use crate::args::*;
use crate::io::{Report, RunConfig, Session};
use crate::plot;
use crate::verify;

/// A failed acceptance run or certificate check.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn rat(s: &str, name: &str) -> Result<Rational> {
    parse_rational(s).with_context(|| format!("--{name}"))
}

fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| anyhow!("--{name} is required here"))
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = match std::env::var("SUMLAB_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().context("SUMLAB_SEED must be an unsigned integer")?),
        Err(_) => cli.seed,
    };
    let config = RunConfig {
        tool: "sumlab".into(),
        version: crate::io::VERSION.into(),
        seed,
        threads: cli.threads,
        invocation: serde_json::to_value(&cli.command)?,
    };
    let mut session = Session::new(config);
    let res = match &cli.command {
        Command::Analyze(a) => analyze(&mut session, a),
        Command::Uniformize(a) => uniformize_cmd(&mut session, a),
        Command::Branch(a) => branch(&mut session, a),
        Command::Construct(a) => construct(&mut session, &a.kind, seed),
        Command::Expand(a) => expand(&mut session, a),
        Command::Trace(a) => trace(&mut session, a),
        Command::Verify(a) => verify_cmd(&mut session, a),
        Command::Plot(a) => plot_cmd(&mut session, a),
    };
    match res {
        Ok(()) => session.commit(),
        // failed checks still leave their report behind
        Err(e) if e.is::<VerificationFailed>() => {
            session.commit()?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

// stdout when no path is given
fn emit<T: Serialize>(session: &mut Session, out: &Option<PathBuf>, result: T) -> Result<()> {
    match out {
        Some(p) => session.stage_report(p.clone(), result),
        None => {
            print!("{}", String::from_utf8(session.report_bytes(result)?)?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Analysis {
    q: u32,
    span: u32,
    size: usize,
    diameter: Option<String>,
    covering: Vec<usize>,
    regularity: Vec<RegularityReport>,
    uniform: Option<std::result::Result<UniformStructure, UniformityFailure>>,
}

fn analyze(session: &mut Session, a: &AnalyzeArgs) -> Result<()> {
    let p = session.read_set(&a.input)?;
    let s: Vec<Rational> = a.s.iter().map(|x| rat(x, "s")).collect::<Result<_>>()?;
    let mode = match a.mode {
        ModeArg::Dyadic => Mode::Dyadic,
        ModeArg::Exact => Mode::Exact,
    };
    let covering = (0..=p.q()).map(|l| p.covering_number(l)).collect::<sumlab_core::Result<_>>()?;
    let result = Analysis {
        q: p.q(),
        span: p.span(),
        size: p.len(),
        diameter: p.diameter().ok().map(|d| sumlab_core::exact::fmt_rational(&d)),
        covering,
        regularity: if p.is_empty() { Vec::new() } else { regularity_report(&p, &s, mode)? },
        uniform: a.t.map(|t| is_uniform(&p, t)).transpose()?,
    };
    emit(session, &a.output, result)
}

#[derive(Serialize)]
struct PieceSummary {
    file: String,
    size: usize,
    structure: UniformStructure,
}

#[derive(Serialize)]
struct PiecesSummary {
    t0: u32,
    pieces: Vec<PieceSummary>,
    leftover: usize,
}

fn uniformize_cmd(session: &mut Session, a: &UniformizeArgs) -> Result<()> {
    let p = session.read_set(&a.input)?;
    match &a.epsilon {
        None => {
            let (u, _) = uniformize(&p, a.t)?;
            session.stage_json(a.output.clone(), &u)
        }
        Some(e) => {
            let pieces = uniform_pieces(&p, a.t, rat(e, "epsilon")?)?;
            let mut summary = PiecesSummary { t0: pieces.t0, pieces: Vec::new(), leftover: pieces.leftover.len() };
            for (i, piece) in pieces.pieces.iter().enumerate() {
                let name = format!("piece_{i:03}.json");
                session.stage_json(a.output.join(&name), &piece.set)?;
                summary.pieces.push(PieceSummary {
                    file: name,
                    size: piece.set.len(),
                    structure: piece.structure.clone(),
                });
            }
            session.stage_json(a.output.join("leftover.json"), &pieces.leftover)?;
            session.stage_report(a.output.join("pieces.json"), summary)?;
            session.manifest_at(a.output.join("manifest.json"));
            Ok(())
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchResult {
    pub function: BranchingFunction,
    pub decomposition: Option<SlopeDecomposition>,
}

fn branch(session: &mut Session, a: &BranchArgs) -> Result<()> {
    let f = match (&a.input, &a.function) {
        (Some(path), _) => {
            let p = session.read_set(path)?;
            BranchingFunction::of_set(&p, *need(&a.t, "T")?)?
        }
        (None, Some(path)) => session.read_json(path)?,
        (None, None) => bail!("one of --input or --function is required"),
    };
    let decomposition = match a.decompose {
        None => None,
        Some(DecomposeArg::Hull) => Some(decompose_hull(&f)?),
        Some(DecomposeArg::Minlen) => Some(decompose_min_length(&f, rat(need(&a.epsilon, "epsilon")?, "epsilon")?)?),
    };
    let csv = a.csv.as_ref().map(|_| plot::branching_csv(&f, decomposition.as_ref())).transpose()?;
    emit(session, &a.output, BranchResult { function: f, decomposition })?;
    // after the report, so the manifest sits next to it
    if let (Some(path), Some(bytes)) = (&a.csv, csv) {
        session.stage(path.clone(), bytes);
    }
    Ok(())
}

fn stage_sets(session: &mut Session, dir: &Path, sets: &[(&str, &GridSet)]) -> Result<()> {
    for (name, s) in sets {
        session.stage_json(dir.join(format!("{name}.json")), s)?;
    }
    session.manifest_at(dir.join("manifest.json"));
    Ok(())
}

fn construct(session: &mut Session, kind: &ConstructKind, seed: Option<u64>) -> Result<()> {
    match kind {
        ConstructKind::Sharpness { q, alpha, beta, gamma, eta, rounding, output } => {
            let p = SharpnessParams::new(
                *q,
                rat(alpha, "alpha")?,
                rat(beta, "beta")?,
                rat(gamma, "gamma")?,
                rat(eta, "eta")?,
            )?;
            let rounding = match rounding {
                RoundingArg::Exact => Rounding::Exact,
                RoundingArg::Floor => Rounding::Floor,
            };
            let ex = sharpness_example(&p, rounding)?;
            stage_sets(session, output, &[("A", &ex.a), ("B", &ex.b), ("C", &ex.c)])?;
            session.stage_report(output.join("meta.json"), &ex.meta)
        }
        ConstructKind::SmallDiam { q, rb, rc, a, output } => {
            let a = a.as_ref().map(|p| session.read_set(p)).transpose()?;
            let (a, b, c) = small_diameter_example(*q, *rb, *rc, a)?;
            stage_sets(session, output, &[("A", &a), ("B", &b), ("C", &c)])
        }
        ConstructKind::Concentration { q, a, b, output } => {
            let (a, b) = concentration_example(*q, *a, *b)?;
            stage_sets(session, output, &[("A", &a), ("B", &b)])
        }
        ConstructKind::Ap { q, gap, n, offset, output } => {
            session.stage_json(output.clone(), &arithmetic_progression(*q, *gap, *n, *offset)?)
        }
        ConstructKind::Random { kind, q, t, s, n, output } => {
            let seed = seed.ok_or_else(|| anyhow!("random construction needs --seed or SUMLAB_SEED"))?;
            let s = rat(s, "s")?;
            let set = match kind {
                RandomKind::Katztao => random_katz_tao(*q, *t, s, seed)?,
                RandomKind::Frostman => random_frostman(*q, *t, s, seed)?,
                RandomKind::Subset => random_subset(*q, *need(n, "n")?, seed)?,
            };
            session.stage_json(output.clone(), &set)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpandResult {
    pub report: ExpansionReport,
    /// `|A + BC|_δ` when requested.
    pub union_covering: Option<usize>,
}

fn expand(session: &mut Session, a: &ExpandArgs) -> Result<()> {
    let (sa, sb, sc) = (session.read_set(&a.a)?, session.read_set(&a.b)?, session.read_set(&a.c)?);
    let theta = match (&a.theta, &a.theta_exp) {
        (Some(t), _) => {
            let t = rat(t, "theta")?;
            if t <= Rational::from_integer(0) {
                bail!("--theta must be positive");
            }
            Surd::from_ratio(*t.numer() as u64, *t.denom() as u64)
        }
        (None, Some(e)) => Surd::pow2(-rat(e, "theta-exp")? * Rational::from_integer(sa.q() as i64)),
        (None, None) => bail!("one of --theta or --theta-exp is required"),
    };
    let report = expansion_search(&sa, &sb, &sc, &theta)?;
    let csv = a.per_c_csv.as_ref().map(|_| plot::expansion_csv(&report)).transpose()?;
    let union_covering = a.union.then(|| sum_product_covering(&sa, &sb, &sc)).transpose()?;
    emit(session, &a.output, ExpandResult { report, union_covering })?;
    if let (Some(path), Some(bytes)) = (&a.per_c_csv, csv) {
        session.stage(path.clone(), bytes);
    }
    Ok(())
}

fn trace(session: &mut Session, a: &TraceArgs) -> Result<()> {
    let c = session.read_set(&a.c)?;
    let eta = rat(&a.eta, "eta")?;
    if let TraceKind::Reduce = a.kind {
        return emit(session, &a.output, reduce_c_to_upper_half(&c, eta)?);
    }
    let sa = session.read_set(need(&a.a, "A")?)?;
    let sb = session.read_set(need(&a.b, "B")?)?;
    let mut p = TraceParams::new(
        *need(&a.t, "T")?,
        rat(need(&a.alpha, "alpha")?, "alpha")?,
        a.beta.as_deref().map(|b| rat(b, "beta")).transpose()?,
        rat(need(&a.gamma, "gamma")?, "gamma")?,
        eta,
    );
    p.lemma_eps = a.lemma_eps.as_deref().map(|e| rat(e, "lemma-eps")).transpose()?;
    p.frostman_limit = a.frostman_limit;
    let cert = match a.kind {
        TraceKind::Abc => scale_window_abc(&sa, &sb, &c, &p)?,
        TraceKind::C3 => scale_window_c3(&sa, &sb, &c, &p)?,
        TraceKind::C4 => scale_window_c4(&sa, &sb, &c, &p)?,
        TraceKind::Reduce => unreachable!(),
    };
    emit(session, &a.output, cert)
}

fn verify_cmd(session: &mut Session, a: &VerifyArgs) -> Result<()> {
    if let Some(cert_path) = &a.certificate {
        let report: Report<WindowCertificate> = session.read_json(cert_path)?;
        let sa = session.read_set(a.a.as_ref().unwrap())?;
        let sb = session.read_set(a.b.as_ref().unwrap())?;
        let sc = session.read_set(a.c.as_ref().unwrap())?;
        let v = sumlab_core::prooftrace::verify_certificate(&report.result, &sa, &sb, &sc)?;
        let ok = v.ok;
        emit(session, &a.output, v)?;
        if !ok {
            return Err(VerificationFailed("certificate does not re-verify".into()).into());
        }
        return Ok(());
    }
    let ids = verify::parse_suite(&a.suite)?;
    let outcomes = verify::run_suite(&ids, |o| println!("{}", o.line()));
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if let Some(path) = &a.output {
        session.stage_report(path.clone(), &outcomes)?;
    }
    if !failed.is_empty() {
        return Err(VerificationFailed(format!("criteria failed: {failed:?}")).into());
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Plottable {
    Expand(Report<ExpandResult>),
    Branch(Report<BranchResult>),
}

fn plot_cmd(session: &mut Session, a: &PlotArgs) -> Result<()> {
    let data: Plottable = session.read_json(&a.input).context("expected a report written by `branch` or `expand`")?;
    let bytes = match (data, a.format) {
        (Plottable::Branch(r), PlotFormat::Csv) => {
            plot::branching_csv(&r.result.function, r.result.decomposition.as_ref())?
        }
        (Plottable::Branch(r), PlotFormat::Svg) => {
            plot::branching_svg(&r.result.function, r.result.decomposition.as_ref()).into_bytes()
        }
        (Plottable::Expand(r), PlotFormat::Csv) => plot::expansion_csv(&r.result.report)?,
        (Plottable::Expand(r), PlotFormat::Svg) => plot::expansion_svg(&r.result.report).into_bytes(),
    };
    session.stage(a.output.clone(), bytes);
    Ok(())
}
