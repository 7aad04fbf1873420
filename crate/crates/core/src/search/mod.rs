//! Speedup-parameter optimization through a linear relaxation, bisection over
//! c, exhaustive annotation search and the named proof constructions.

pub mod proofs;
pub mod relax;
pub mod simplex;

pub use proofs::{bpts_grover_proof, bpts_proof, good_proof, good_proof_limit, BptsProof, GoodProof, GoodProofParams};

use std::fmt;

use num::{BigInt, One, Signed};
use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{
    enumerate_annotations, format_rational, int, rat, to_f64, validate_annotation, AltClass, Annotation, Mode, Rational, Step,
    VerifierKind,
};
use crate::rules::{verify_proof, Assumption, ProofCertificate, RuleKind};
use relax::StepPlan;
use simplex::{approximate_max, maximize, LpError, LpOutcome, DEFAULT_PIVOT_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("annotation {0} is not a valid complete proof annotation")]
    BadAnnotation(String),
    #[error("grover slowdowns are only modeled in ts mode")]
    GroverMode,
    #[error("feasibility is not monotone in c for {annotation}: feasible at {high}, infeasible at {low}")]
    NonMonotone { annotation: String, low: String, high: String },
    #[error("parameter out of range: {0}")]
    Parameters(String),
}

/// Which slowdown rule the `0` steps use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slowdown {
    Generic,
    /// Grover collapse, which behaves as the generic rule with α = 2/3.
    Grover,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub slowdown: Slowdown,
    /// Initial verifier exponent for the exact replay.
    pub replay_scale: Rational,
    pub replay_doublings: u32,
    pub pivot_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            slowdown: Slowdown::Generic,
            replay_scale: int(1_000_000),
            replay_doublings: 48,
            pivot_limit: DEFAULT_PIVOT_LIMIT,
        }
    }
}

impl SearchOptions {
    pub fn grover() -> Self {
        SearchOptions { slowdown: Slowdown::Grover, ..Default::default() }
    }

    fn effective_alpha(&self, alpha: &Rational) -> Rational {
        match self.slowdown {
            Slowdown::Generic => alpha.clone(),
            Slowdown::Grover => rat(2, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    /// Positive margin and a replayed contradiction certificate.
    pub feasible: bool,
    /// Maximized slack; `None` when a squiggle can never apply at these parameters.
    pub margin: Option<Rational>,
    /// Speedup parameters x_j of the LP optimum, normalized to initial exponent 1.
    pub witness: Vec<Rational>,
    pub replay_ok: bool,
    pub certificate: Option<ProofCertificate>,
}

impl Feasibility {
    fn rejected(margin: Option<Rational>, witness: Vec<Rational>) -> Self {
        Feasibility { feasible: false, margin, witness, replay_ok: false, certificate: None }
    }
}

fn check_annotation(a: &Annotation) -> Result<(), SearchError> {
    let r = validate_annotation(a);
    if !r.valid() || !r.complete {
        return Err(SearchError::BadAnnotation(a.to_string()));
    }
    Ok(())
}

pub fn feasible(a: &Annotation, alpha: &Rational, cc: &Rational) -> Result<Feasibility, SearchError> {
    feasible_with(a, alpha, cc, &SearchOptions::default())
}

/// Maximizes the margin of the relaxation; a positive margin is only reported
/// feasible once the witness replays to a verified contradiction.
pub fn feasible_with(a: &Annotation, alpha: &Rational, cc: &Rational, opts: &SearchOptions) -> Result<Feasibility, SearchError> {
    check_annotation(a)?;
    if opts.slowdown == Slowdown::Grover && a.mode != Mode::Ts {
        return Err(SearchError::GroverMode);
    }
    let alpha = opts.effective_alpha(alpha);
    if !alpha.is_positive() || alpha > Rational::one() || *cc <= Rational::one() {
        return Err(SearchError::Parameters(format!(
            "need 0 < alpha <= 1 < c, got alpha={} c={}",
            format_rational(&alpha),
            format_rational(cc)
        )));
    }
    let Some(relax) = relax::build(a, &alpha, cc) else {
        return Ok(Feasibility::rejected(None, Vec::new()));
    };
    let (margin, solution) = match maximize(&relax.lp, opts.pivot_limit)? {
        LpOutcome::Optimal { value, solution } => (value, solution),
        LpOutcome::Infeasible | LpOutcome::Unbounded => return Ok(Feasibility::rejected(None, Vec::new())),
    };
    let witness: Vec<Rational> = relax
        .plan
        .iter()
        .filter_map(|p| match p {
            StepPlan::Speedup { x, .. } => Some(solution[*x].clone()),
            _ => None,
        })
        .collect();
    if !margin.is_positive() {
        return Ok(Feasibility::rejected(Some(margin), witness));
    }
    match replay(a, &relax.plan, &solution, &alpha, cc, opts) {
        Some(cert) => Ok(Feasibility {
            feasible: true,
            margin: Some(margin),
            witness,
            replay_ok: true,
            certificate: Some(cert),
        }),
        None => Ok(Feasibility::rejected(Some(margin), witness)),
    }
}

/// Runs the witness through the exact rules from `TS[n^D]` (or `BPTS[n^D]`),
/// doubling D until the constant floors stop mattering.
///
/// Each speedup uses the LP exponent of the receiving block when that fits
/// below the current verifier exponent, and otherwise a clipped value that
/// keeps every exact exponent at or below its scaled LP counterpart.
fn replay(
    a: &Annotation,
    plan: &[StepPlan],
    sol: &[Rational],
    alpha: &Rational,
    cc: &Rational,
    opts: &SearchOptions,
) -> Option<ProofCertificate> {
    let (verifier, assumption) = match (a.mode, opts.slowdown) {
        (Mode::Ts, Slowdown::Generic) => (VerifierKind::DetTs, Assumption::Ntime),
        (Mode::Ts, Slowdown::Grover) => (VerifierKind::DetTs, Assumption::Ebqp),
        (Mode::Bpts, _) => (VerifierKind::BpTs, Assumption::Ebp),
    };
    let mut scale = opts.replay_scale.clone();
    for _ in 0..=opts.replay_doublings {
        let start = AltClass::bare(verifier, scale.clone());
        let mut cert = ProofCertificate::new(alpha.clone(), cc.clone(), a.mode, assumption, start);
        let built = plan.iter().zip(&a.steps).try_for_each(|(p, step)| {
            let cur = cert.last().clone();
            let (rule, x) = match (p, step) {
                (StepPlan::Speedup { x, d_before, new_b }, _) => {
                    let x_lp = &sol[*x] * &scale;
                    let d_lp = d_before.eval(sol) * &scale;
                    let target = new_b.eval(sol) * &scale;
                    let half = &cur.d / int(2);
                    let x_true = if target < cur.d {
                        target
                    } else if x_lp < cur.d {
                        x_lp
                    } else {
                        (&cur.d - (d_lp - x_lp)).max(half)
                    };
                    let rule = match (cur.verifier, cur.blocks.is_empty()) {
                        (VerifierKind::BpTs, _) => RuleKind::SpeedupRand,
                        (VerifierKind::DetTs, true) => RuleKind::SpeedupFirst,
                        (VerifierKind::DetTs, false) => RuleKind::Speedup,
                    };
                    (rule, Some(x_true))
                }
                (_, Step::Slowdown) if opts.slowdown == Slowdown::Grover => (RuleKind::Grover, None),
                (_, Step::Slowdown) => (RuleKind::Slowdown, None),
                _ => (RuleKind::Squiggle, None),
            };
            cert.push(rule, x).map(|_| ()).map_err(|_| ())
        });
        if built.is_ok() && verify_proof(&cert).contradiction {
            return Some(cert);
        }
        scale *= int(2);
    }
    None
}

fn smallest_c(a: &Annotation, alpha: &Rational, tol: &Rational, opts: &SearchOptions) -> Rational {
    let alpha = opts.effective_alpha(alpha);
    let base = if a.steps.contains(&Step::Squiggle) { alpha.recip().max(Rational::one()) } else { Rational::one() };
    base + tol
}

/// Floating-point margin of the relaxation at `c`, rounded to 12 decimals.
fn approximate_margin(a: &Annotation, alpha: &Rational, c: f64, opts: &SearchOptions) -> Option<f64> {
    let cr = Rational::new(BigInt::from((c * 1e12).round() as i64), BigInt::from(1_000_000_000_000i64));
    let relax = relax::build(a, alpha, &cr)?;
    approximate_max(&relax.lp, opts.pivot_limit)
}

/// A candidate bracket of width tol/2 around the float threshold of the
/// margin, found by bisection in f64. The exact test still decides.
fn guided_bracket(
    a: &Annotation,
    alpha: &Rational,
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
    opts: &SearchOptions,
) -> Option<(Rational, Rational)> {
    let positive = |c: f64| approximate_margin(a, alpha, c, opts).is_some_and(|m| m > 0.0);
    let step = tol / int(4);
    let step_f = to_f64(&step);
    let (mut x0, mut x1) = (to_f64(lo), to_f64(hi));
    if !positive(x0) {
        return None;
    }
    while x1 - x0 > step_f {
        let mid = 0.5 * (x0 + x1);
        if positive(mid) {
            x0 = mid;
        } else {
            x1 = mid;
        }
    }
    let n = BigInt::from((0.5 * (x0 + x1) / step_f).floor() as i64);
    let glo = Rational::from_integer(n.clone() - 1) * &step;
    let ghi = Rational::from_integer(n + 1) * &step;
    (glo > *lo && ghi < *hi).then_some((glo, ghi))
}

/// Largest c at which the annotation is feasible, to within `tol`.
///
/// Returns the bisection midpoint c* with feasible(c* − tol) and
/// ¬feasible(c* + tol), both re-checked at the end; `None` if the annotation
/// is infeasible already just above the smallest admissible c.
pub fn best_exponent(a: &Annotation, alpha: &Rational, tol: &Rational, opts: &SearchOptions) -> Result<Option<Rational>, SearchError> {
    Ok(best_bracket(a, alpha, tol, opts)?.map(|(lo, hi)| (lo + hi) / int(2)))
}

fn best_bracket(
    a: &Annotation,
    alpha: &Rational,
    tol: &Rational,
    opts: &SearchOptions,
) -> Result<Option<(Rational, Rational)>, SearchError> {
    if !tol.is_positive() {
        return Err(SearchError::Parameters("tolerance must be positive".into()));
    }
    let ok = |c: &Rational| feasible_with(a, alpha, c, opts).map(|f| f.feasible);
    let eff = opts.effective_alpha(alpha);
    let mut lo = smallest_c(a, alpha, tol, opts);
    let mut hi = (Rational::one() + &eff) / &eff;
    // An exactly confirmed float bracket settles both ends at once.
    let guided = match guided_bracket(a, &eff, &lo, &hi, tol, opts) {
        Some((glo, ghi)) if ok(&glo)? && !ok(&ghi)? => Some((glo, ghi)),
        _ => None,
    };
    if let Some((glo, ghi)) = guided {
        (lo, hi) = (glo, ghi);
    } else {
        if !ok(&lo)? {
            return Ok(None);
        }
        while ok(&hi)? {
            lo = hi.clone();
            hi *= int(2);
        }
    }
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / int(2);
        if ok(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (&lo + &hi) / int(2);
    let below = &mid - tol;
    let above = &mid + tol;
    let below_ok = below <= lo || ok(&below)?;
    let above_bad = above >= hi || !ok(&above)?;
    if !below_ok || !above_bad {
        return Err(SearchError::NonMonotone {
            annotation: a.to_string(),
            low: format_rational(&below),
            high: format_rational(&above),
        });
    }
    Ok(Some((lo, hi)))
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Bisection midpoint for the winning annotation.
    pub best_c: Rational,
    /// Lower bracket end, where the certificate was replayed.
    pub certified_c: Rational,
    pub annotation: Annotation,
    pub certificate: ProofCertificate,
}

impl fmt::Display for SearchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.certificate)?;
        writeln!(f, "best_c={} annotation={}", format_rational(&self.best_c), self.annotation)
    }
}

const CHUNK: usize = 64;

/// Best annotation of length ≤ `max_len`, ties to the shorter then
/// lexicographically smaller one.
pub fn search_best(
    max_len: usize,
    alpha: &Rational,
    mode: Mode,
    tol: &Rational,
    opts: &SearchOptions,
) -> Result<Option<SearchResult>, SearchError> {
    let all = enumerate_annotations(max_len, mode);
    let Some((best_c, certified_c, annotation)) = best_among(&all, alpha, tol, opts)? else {
        return Ok(None);
    };
    let certificate = feasible_with(&annotation, alpha, &certified_c, opts)?
        .certificate
        .expect("lower bracket end is feasible");
    Ok(Some(SearchResult { best_c, certified_c, annotation, certificate }))
}

/// Highest bisection midpoint among `candidates`, earliest wins ties.
/// Returns (midpoint, certified lower end, annotation).
///
/// Chunks are screened in parallel at the current record plus `tol`; only the
/// survivors are bisected, sequentially and in input order, so the outcome
/// does not depend on the thread count.
pub fn best_among(
    candidates: &[Annotation],
    alpha: &Rational,
    tol: &Rational,
    opts: &SearchOptions,
) -> Result<Option<(Rational, Rational, Annotation)>, SearchError> {
    let mut best: Option<(Rational, Rational, Annotation)> = None;
    for chunk in candidates.chunks(CHUNK) {
        let bar = best.as_ref().map(|(c, _, _)| c + tol);
        let screened: Vec<bool> = chunk
            .par_iter()
            .map(|a| {
                let c = bar.clone().unwrap_or_else(|| smallest_c(a, alpha, tol, opts));
                feasible_with(a, alpha, &c, opts).map(|f| f.feasible)
            })
            .collect::<Result<_, _>>()?;
        for (a, pass) in chunk.iter().zip(screened) {
            if !pass {
                continue;
            }
            if let Some((c, _, _)) = &best {
                if !feasible_with(a, alpha, &(c + tol), opts)?.feasible {
                    continue;
                }
            }
            if let Some((lo, hi)) = best_bracket(a, alpha, tol, opts)? {
                let mid = (&lo + &hi) / int(2);
                if best.as_ref().map_or(true, |(c, _, _)| mid > *c) {
                    best = Some((mid, lo, a.clone()));
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub annotation: Annotation,
    pub margin: Option<Rational>,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub alpha: Rational,
    pub c: Rational,
    pub max_len: usize,
    pub entries: Vec<ScanEntry>,
}

impl ScanReport {
    pub fn feasible(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries.iter().filter(|e| e.feasible)
    }

    pub fn feasible_count(&self) -> usize {
        self.feasible().count()
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scanned {} annotations (max_len={}, alpha={}, c={})",
            self.entries.len(),
            self.max_len,
            format_rational(&self.alpha),
            format_rational(&self.c)
        )?;
        for e in self.feasible() {
            let m = e.margin.as_ref().map(format_rational).unwrap_or_default();
            writeln!(f, "feasible {} margin={}", e.annotation, m)?;
        }
        writeln!(f, "{} feasible annotations", self.feasible_count())
    }
}

/// Feasibility of every complete TS annotation up to `max_len`.
pub fn optimality_scan(alpha: &Rational, cc: &Rational, max_len: usize, opts: &SearchOptions) -> Result<ScanReport, SearchError> {
    let all = enumerate_annotations(max_len, Mode::Ts);
    let entries = all
        .into_par_iter()
        .map(|a| {
            let f = feasible_with(&a, alpha, cc, opts)?;
            Ok(ScanEntry { annotation: a, margin: f.margin, feasible: f.feasible })
        })
        .collect::<Result<Vec<_>, SearchError>>()?;
    Ok(ScanReport { alpha: alpha.clone(), c: cc.clone(), max_len, entries })
}
