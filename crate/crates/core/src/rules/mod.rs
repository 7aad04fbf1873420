//! Inclusion rules of the calculus, applied with exact arithmetic.
//!
//! Every rule takes a class and returns the class it is contained in. Quantifier
//! kinds are tracked for fidelity; exponent arithmetic never depends on them.

mod certificate;

pub use certificate::{
    parse_certificate, verify_proof, verify_text, Assumption, CertificateError, ProofCertificate, ProofReport,
    RuleApplication, RuleKind,
};

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::kernel::{format_rational, mul, rat, AltClass, Mode, Quantifier, QuantifierBlock, Rational, VerifierKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule needs a quantifier-free class")]
    HasQuantifiers,
    #[error("rule needs at least one quantifier")]
    NoQuantifiers,
    #[error("rule needs a {expected:?} verifier, found {found:?}")]
    WrongVerifier { expected: VerifierKind, found: VerifierKind },
    #[error("speedup parameter x={x} must satisfy 0 < x < d={d}")]
    SpeedupRange { x: String, d: String },
    #[error("parameter out of range: {0}")]
    Parameters(String),
    #[error("squiggle iteration cap {0} reached")]
    IterationCap(u64),
}

fn need_verifier(c0: &AltClass, expected: VerifierKind) -> Result<(), RuleError> {
    if c0.verifier != expected {
        return Err(RuleError::WrongVerifier { expected, found: c0.verifier });
    }
    Ok(())
}

fn need_x(c0: &AltClass, x: &Rational) -> Result<(), RuleError> {
    if !x.is_positive() || *x >= c0.d {
        return Err(RuleError::SpeedupRange { x: format_rational(x), d: format_rational(&c0.d) });
    }
    Ok(())
}

fn slowdown_params(alpha: &Rational, cc: &Rational) -> Result<(), RuleError> {
    if !alpha.is_positive() || *alpha > Rational::one() || *cc <= Rational::one() {
        return Err(RuleError::Parameters(format!(
            "need 0 < alpha <= 1 < c, got alpha={} c={}",
            format_rational(alpha),
            format_rational(cc)
        )));
    }
    Ok(())
}

fn max_with_one(x: &Rational) -> Rational {
    x.max(&Rational::one()).clone()
}

/// `TS[n^d] ⊆ (∃ n^x)^{max(x,1)} (∀ log n)^1 TS[n^{d-x}]`.
pub fn speedup_first(c0: &AltClass, x: &Rational) -> Result<AltClass, RuleError> {
    if !c0.blocks.is_empty() {
        return Err(RuleError::HasQuantifiers);
    }
    need_verifier(c0, VerifierKind::DetTs)?;
    need_x(c0, x)?;
    Ok(AltClass {
        blocks: vec![
            QuantifierBlock::new(Quantifier::Exists, x.clone(), max_with_one(x)),
            QuantifierBlock::new(Quantifier::Forall, Rational::zero(), Rational::one()),
        ],
        verifier: VerifierKind::DetTs,
        d: &c0.d - x,
    })
}

/// Usual speedup: merge the new guess into the last quantifier and append a
/// log-size quantifier of the opposite kind.
pub fn speedup(c0: &AltClass, x: &Rational) -> Result<AltClass, RuleError> {
    need_verifier(c0, VerifierKind::DetTs)?;
    need_x(c0, x)?;
    let mut blocks = c0.blocks.clone();
    let last = blocks.last_mut().ok_or(RuleError::NoQuantifiers)?;
    let b_old = last.b.clone();
    let kind = last.kind;
    last.a = last.a.clone().max(x.clone());
    last.b = last.b.clone().max(x.clone());
    blocks.push(QuantifierBlock::new(kind.flip(), Rational::zero(), b_old));
    Ok(AltClass { blocks, verifier: VerifierKind::DetTs, d: &c0.d - x })
}

/// Randomized speedup with ∃-first orientation on a bare class.
pub fn speedup_randomized(c0: &AltClass, x: &Rational) -> Result<AltClass, RuleError> {
    speedup_randomized_with(c0, x, Quantifier::Exists)
}

/// Randomized speedup. `first` orients the three new quantifiers when the class
/// is quantifier-free; otherwise the new pair alternates against Q_k.
pub fn speedup_randomized_with(c0: &AltClass, x: &Rational, first: Quantifier) -> Result<AltClass, RuleError> {
    need_verifier(c0, VerifierKind::BpTs)?;
    need_x(c0, x)?;
    let mut blocks = c0.blocks.clone();
    match blocks.last().cloned() {
        None => {
            blocks.push(QuantifierBlock::new(first, Rational::zero(), Rational::one()));
            blocks.push(QuantifierBlock::new(first.flip(), x.clone(), max_with_one(x)));
            blocks.push(QuantifierBlock::new(first, Rational::zero(), Rational::one()));
        }
        Some(last) => {
            blocks.push(QuantifierBlock::new(last.kind.flip(), x.clone(), last.b.clone().max(x.clone())));
            blocks.push(QuantifierBlock::new(last.kind, Rational::zero(), last.b));
        }
    }
    Ok(AltClass { blocks, verifier: VerifierKind::DetTs, d: &c0.d - x })
}

/// Generic slowdown: drop Q_k, d' = c·max(αd, b_k, a_k, b_{k-1}, 1).
pub fn slowdown_generic(c0: &AltClass, alpha: &Rational, cc: &Rational, mode: Mode) -> Result<AltClass, RuleError> {
    slowdown_params(alpha, cc)?;
    let last = c0.last().ok_or(RuleError::NoQuantifiers)?;
    let inner = [mul(alpha, &c0.d), last.b.clone(), last.a.clone(), c0.prev_b(), Rational::one()]
        .into_iter()
        .max()
        .expect("nonempty");
    let mut blocks = c0.blocks.clone();
    blocks.pop();
    let verifier = match mode {
        Mode::Ts => VerifierKind::DetTs,
        Mode::Bpts => VerifierKind::BpTs,
    };
    Ok(AltClass { blocks, verifier, d: mul(cc, &inner) })
}

/// Speedup with x = 2d/3, Grover search over the new guess, then the
/// ∃·BQTIME assumption: drop Q_k, d' = c·max(a_k, b_k, b_{k-1}, 1, 2d/3).
pub fn grover_collapse(c0: &AltClass, cc: &Rational) -> Result<AltClass, RuleError> {
    need_verifier(c0, VerifierKind::DetTs)?;
    if *cc <= Rational::one() {
        return Err(RuleError::Parameters(format!("need c > 1, got {}", format_rational(cc))));
    }
    let last = c0.last().ok_or(RuleError::NoQuantifiers)?;
    let inner = [last.a.clone(), last.b.clone(), c0.prev_b(), Rational::one(), mul(&rat(2, 3), &c0.d)]
        .into_iter()
        .max()
        .expect("nonempty");
    let mut blocks = c0.blocks.clone();
    blocks.pop();
    Ok(AltClass { blocks, verifier: VerifierKind::DetTs, d: mul(cc, &inner) })
}

/// Grover round on a randomized verifier: randomized speedup with x = 2d/3,
/// Grover over the log-size quantifier, then the ∃·BQTIME assumption removes
/// the n^x quantifier. Keeps the blocks; d' = c·max(b_k, 1, 2d/3).
pub fn grover_randomized(c0: &AltClass, cc: &Rational) -> Result<AltClass, RuleError> {
    need_verifier(c0, VerifierKind::BpTs)?;
    if *cc <= Rational::one() {
        return Err(RuleError::Parameters(format!("need c > 1, got {}", format_rational(cc))));
    }
    let last = c0.last().ok_or(RuleError::NoQuantifiers)?;
    let inner = [last.b.clone(), Rational::one(), mul(&rat(2, 3), &c0.d)].into_iter().max().expect("nonempty");
    Ok(AltClass { blocks: c0.blocks.clone(), verifier: VerifierKind::BpTs, d: mul(cc, &inner) })
}

/// αc/(αc − 1): the squiggle rule applies properly below this multiple of e.
pub fn squiggle_ratio(alpha: &Rational, cc: &Rational) -> Rational {
    let ac = alpha * cc;
    &ac / (&ac - Rational::one())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquiggleOutcome {
    pub class: AltClass,
    pub iterations: u64,
    pub proper: bool,
}

/// Repeats (speedup with x = e, slowdown) until d = c·e, where e = b_k.
///
/// Proper when c·e ≤ d < (αc/(αc−1))·e; otherwise the class comes back unchanged.
pub fn squiggle(c0: &AltClass, alpha: &Rational, cc: &Rational) -> Result<SquiggleOutcome, RuleError> {
    slowdown_params(alpha, cc)?;
    need_verifier(c0, VerifierKind::DetTs)?;
    let ac = alpha * cc;
    if ac <= Rational::one() || *cc >= (Rational::one() + alpha) / alpha {
        return Err(RuleError::Parameters(format!(
            "squiggle needs alpha*c > 1 and c < (1+alpha)/alpha, got alpha={} c={}",
            format_rational(alpha),
            format_rational(cc)
        )));
    }
    let e = c0.last().ok_or(RuleError::NoQuantifiers)?.b.clone();
    if e < Rational::one() {
        return Err(RuleError::Parameters(format!("squiggle needs b_k >= 1, got {}", format_rational(&e))));
    }
    let target = mul(cc, &e);
    let unchanged = |proper| SquiggleOutcome { class: c0.clone(), iterations: 0, proper };
    if c0.d == target {
        return Ok(unchanged(true));
    }
    if c0.d < target || c0.d >= mul(&squiggle_ratio(alpha, cc), &e) {
        return Ok(unchanged(false));
    }
    // The first decrement is the smallest one, so it bounds the number of steps.
    let first_drop = mul(&ac, &e) - mul(&(&ac - Rational::one()), &c0.d);
    let bound = ((&c0.d - &target) / &first_drop).ceil();
    let cap = num::ToPrimitive::to_u64(bound.numer()).unwrap_or(u64::MAX).saturating_add(2);
    let mut cur = c0.clone();
    let mut n = 0u64;
    while cur.d != target {
        if n >= cap {
            return Err(RuleError::IterationCap(cap));
        }
        cur = speedup(&cur, &e)?;
        cur = slowdown_generic(&cur, alpha, cc, Mode::Ts)?;
        n += 1;
    }
    Ok(SquiggleOutcome { class: cur, iterations: n, proper: true })
}
