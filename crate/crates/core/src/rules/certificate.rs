//! Line-oriented proof certificates and their exact re-verification.

use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use super::{
    grover_collapse, grover_randomized, slowdown_generic, speedup, speedup_first, speedup_randomized_with, squiggle,
    RuleError,
};
use crate::kernel::{format_rational, parse_class, parse_rational, AltClass, Mode, Quantifier, Rational, VerifierKind};

const MAGIC: &str = "atlb-proof v1";

/// Which containment assumption justifies the slowdown-type steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// NTIME[n] ⊆ TS[n^c] style, generic α.
    Ntime,
    /// ∃·BQTIME[n] ⊆ TS[n^c] (or BPTS[n^c]); enables Grover steps.
    Ebqp,
    /// ∃·BPTIME[n] ⊆ BPTS[n^c].
    Ebp,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Assumption::Ntime => "ntime",
            Assumption::Ebqp => "ebqp",
            Assumption::Ebp => "ebp",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ntime" => Some(Assumption::Ntime),
            "ebqp" => Some(Assumption::Ebqp),
            "ebp" => Some(Assumption::Ebp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    SpeedupFirst,
    Speedup,
    SpeedupRand,
    Slowdown,
    Grover,
    Squiggle,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::SpeedupFirst => "speedup_first",
            RuleKind::Speedup => "speedup",
            RuleKind::SpeedupRand => "speedup_rand",
            RuleKind::Slowdown => "slowdown",
            RuleKind::Grover => "grover",
            RuleKind::Squiggle => "squiggle",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            RuleKind::SpeedupFirst,
            RuleKind::Speedup,
            RuleKind::SpeedupRand,
            RuleKind::Slowdown,
            RuleKind::Grover,
            RuleKind::Squiggle,
        ]
        .into_iter()
        .find(|r| r.name() == s)
    }

    fn takes_x(self) -> bool {
        matches!(self, RuleKind::SpeedupFirst | RuleKind::Speedup | RuleKind::SpeedupRand)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: RuleKind,
    pub x: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofCertificate {
    pub alpha: Rational,
    pub c: Rational,
    pub mode: Mode,
    pub assumption: Assumption,
    /// Line 0 carries no rule; line i is produced from line i-1.
    pub lines: Vec<(AltClass, Option<RuleApplication>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofReport {
    pub valid: bool,
    pub contradiction: bool,
    /// 1-based line of the certificate text and a message.
    pub first_error: Option<(usize, String)>,
    pub final_exponent: Rational,
    pub speedups: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct CertificateError {
    pub line: usize,
    pub msg: String,
}

fn class_line(i: usize) -> usize {
    3 + 2 * i
}

fn step_line(i: usize) -> usize {
    2 + 2 * i
}

impl ProofCertificate {
    pub fn new(alpha: Rational, c: Rational, mode: Mode, assumption: Assumption, start: AltClass) -> Self {
        ProofCertificate { alpha, c, mode, assumption, lines: vec![(start, None)] }
    }

    pub fn first(&self) -> &AltClass {
        &self.lines[0].0
    }

    pub fn last(&self) -> &AltClass {
        &self.lines.last().expect("certificate has a first line").0
    }

    pub fn steps(&self) -> usize {
        self.lines.len() - 1
    }

    /// Applies one rule to the last class and records the result.
    pub fn push(&mut self, rule: RuleKind, x: Option<Rational>) -> Result<&AltClass, RuleError> {
        let app = RuleApplication { rule, x };
        let next = self.apply(self.last(), &app, None)?;
        self.lines.push((next, Some(app)));
        Ok(self.last())
    }

    /// The class obtained by `app` from `from`. `claimed` only disambiguates the
    /// orientation of a randomized speedup on a bare class.
    pub fn apply(&self, from: &AltClass, app: &RuleApplication, claimed: Option<&AltClass>) -> Result<AltClass, RuleError> {
        let x = || app.x.clone().ok_or_else(|| RuleError::Parameters(format!("{} needs x", app.rule.name())));
        if !app.rule.takes_x() && app.x.is_some() {
            return Err(RuleError::Parameters(format!("{} takes no x", app.rule.name())));
        }
        match app.rule {
            RuleKind::SpeedupFirst => speedup_first(from, &x()?),
            RuleKind::Speedup => {
                if from.blocks.is_empty() {
                    return Err(RuleError::NoQuantifiers);
                }
                speedup(from, &x()?)
            }
            RuleKind::SpeedupRand => {
                let first = match claimed.and_then(|c| c.blocks.first()) {
                    Some(b) if from.blocks.is_empty() => b.kind,
                    _ => Quantifier::Exists,
                };
                speedup_randomized_with(from, &x()?, first)
            }
            RuleKind::Slowdown => slowdown_generic(from, &self.alpha, &self.c, self.mode),
            RuleKind::Grover => {
                if self.assumption != Assumption::Ebqp {
                    return Err(RuleError::Parameters("grover steps need assumption ebqp".into()));
                }
                match from.verifier {
                    VerifierKind::DetTs => grover_collapse(from, &self.c),
                    VerifierKind::BpTs => grover_randomized(from, &self.c),
                }
            }
            RuleKind::Squiggle => {
                if self.mode != Mode::Ts {
                    return Err(RuleError::Parameters("squiggle is only available in ts mode".into()));
                }
                squiggle(from, &self.alpha, &self.c).map(|o| o.class)
            }
        }
    }

    fn header_error(&self) -> Option<String> {
        if !self.alpha.is_positive() || self.alpha > Rational::one() {
            return Some(format!("alpha={} outside (0,1]", format_rational(&self.alpha)));
        }
        if self.c <= Rational::one() {
            return Some(format!("c={} must exceed 1", format_rational(&self.c)));
        }
        let ok = matches!(
            (self.mode, self.assumption),
            (Mode::Ts, Assumption::Ntime | Assumption::Ebqp) | (Mode::Bpts, Assumption::Ebp | Assumption::Ebqp)
        );
        if !ok {
            return Some(format!("assumption {} does not fit mode {}", self.assumption.name(), self.mode.name()));
        }
        None
    }
}

impl fmt::Display for ProofCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MAGIC}")?;
        writeln!(
            f,
            "alpha {}   c {}   mode {}   assumption {}",
            format_rational(&self.alpha),
            format_rational(&self.c),
            self.mode.name(),
            self.assumption.name()
        )?;
        for (i, (class, app)) in self.lines.iter().enumerate() {
            if let Some(app) = app {
                write!(f, "step {i}: {}", app.rule.name())?;
                if let Some(x) = &app.x {
                    write!(f, " x={}", format_rational(x))?;
                }
                writeln!(f)?;
            }
            writeln!(f, "class {i}: {class}")?;
        }
        Ok(())
    }
}

pub fn parse_certificate(text: &str) -> Result<ProofCertificate, CertificateError> {
    let fail = |line: usize, msg: String| CertificateError { line, msg };
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    if lines.first() != Some(&MAGIC) {
        return Err(fail(1, format!("expected `{MAGIC}`")));
    }
    let header: Vec<&str> = lines.get(1).ok_or_else(|| fail(2, "missing header".into()))?.split_whitespace().collect();
    let keys = ["alpha", "c", "mode", "assumption"];
    if header.len() != 8 || (0..4).any(|i| header[2 * i] != keys[i]) {
        return Err(fail(2, "header must read `alpha <rat> c <rat> mode <ts|bpts> assumption <ntime|ebqp|ebp>`".into()));
    }
    let alpha = parse_rational(header[1]).map_err(|e| fail(2, e.to_string()))?;
    let c = parse_rational(header[3]).map_err(|e| fail(2, e.to_string()))?;
    let mode = match header[5] {
        "ts" => Mode::Ts,
        "bpts" => Mode::Bpts,
        other => return Err(fail(2, format!("unknown mode {other:?}"))),
    };
    let assumption = Assumption::parse(header[7]).ok_or_else(|| fail(2, format!("unknown assumption {:?}", header[7])))?;

    let body: Vec<(usize, &str)> =
        lines.iter().enumerate().skip(2).filter(|(_, l)| !l.is_empty()).map(|(i, l)| (i + 1, *l)).collect();
    let mut out: Vec<(AltClass, Option<RuleApplication>)> = Vec::new();
    let mut pending: Option<RuleApplication> = None;
    for (lineno, l) in body {
        let idx = out.len();
        if pending.is_none() && idx > 0 {
            let rest = l
                .strip_prefix(&format!("step {idx}:"))
                .ok_or_else(|| fail(lineno, format!("expected `step {idx}:`")))?;
            let mut toks = rest.split_whitespace();
            let name = toks.next().ok_or_else(|| fail(lineno, "missing rule name".into()))?;
            let rule = RuleKind::parse(name).ok_or_else(|| fail(lineno, format!("unknown rule {name:?}")))?;
            let x = match toks.next() {
                None => None,
                Some(tok) => {
                    let lit = tok.strip_prefix("x=").ok_or_else(|| fail(lineno, format!("unexpected {tok:?}")))?;
                    Some(parse_rational(lit).map_err(|e| fail(lineno, e.to_string()))?)
                }
            };
            if let Some(extra) = toks.next() {
                return Err(fail(lineno, format!("unexpected {extra:?}")));
            }
            pending = Some(RuleApplication { rule, x });
        } else {
            let rest = l
                .strip_prefix(&format!("class {idx}:"))
                .ok_or_else(|| fail(lineno, format!("expected `class {idx}:`")))?;
            let class = parse_class(rest.trim()).map_err(|e| fail(lineno, e.to_string()))?;
            out.push((class, pending.take()));
        }
    }
    if out.is_empty() {
        return Err(fail(lines.len() + 1, "no classes".into()));
    }
    if pending.is_some() {
        return Err(fail(lines.len(), "step without a resulting class".into()));
    }
    Ok(ProofCertificate { alpha, c, mode, assumption, lines: out })
}

/// Re-derives every class and decides whether the chain refutes the assumption.
///
/// Quantifier-free endpoints of the same verifier kind need d_last ≤ d_first.
/// Endpoints with the same nonempty quantifier pattern (the Σ_k case) need every
/// exponent of the last class ≤ the matching one of the first, and a strictly
/// smaller overall time exponent.
pub fn verify_proof(p: &ProofCertificate) -> ProofReport {
    let invalid = |line: usize, msg: String| ProofReport {
        valid: false,
        contradiction: false,
        first_error: Some((line, msg)),
        final_exponent: p.last().d.clone(),
        speedups: 0,
    };
    if let Some(msg) = p.header_error() {
        return invalid(2, msg);
    }
    if let Err(e) = p.first().validate() {
        return invalid(class_line(0), e.to_string());
    }
    if p.mode == Mode::Ts && p.first().verifier != VerifierKind::DetTs {
        return invalid(class_line(0), "ts-mode certificates start from a TS verifier".into());
    }
    if p.lines[0].1.is_some() {
        return invalid(class_line(0), "first class must not carry a rule".into());
    }
    let mut speedups = 0;
    for i in 1..p.lines.len() {
        let (claimed, app) = &p.lines[i];
        let Some(app) = app else {
            return invalid(step_line(i), format!("step {i}: missing rule"));
        };
        let prev = &p.lines[i - 1].0;
        let derived = match p.apply(prev, app, Some(claimed)) {
            Ok(c) => c,
            Err(e) => return invalid(step_line(i), format!("step {i} ({}): {e}", app.rule.name())),
        };
        if derived != *claimed {
            return invalid(class_line(i), format!("class {i} does not match: rule gives `{derived}`"));
        }
        speedups += match app.rule {
            RuleKind::SpeedupFirst | RuleKind::Speedup | RuleKind::SpeedupRand | RuleKind::Grover => 1,
            RuleKind::Squiggle if derived != *prev => 1,
            _ => 0,
        };
    }
    let (first, last) = (p.first(), p.last());
    let same_shape = first.verifier == last.verifier
        && first.blocks.len() == last.blocks.len()
        && first.blocks.iter().zip(&last.blocks).all(|(a, b)| a.kind == b.kind);
    let dominated = if first.blocks.is_empty() {
        last.d <= first.d
    } else {
        first.blocks.iter().zip(&last.blocks).all(|(f, l)| l.a <= f.a && l.b <= f.b)
            && last.d <= first.d
            && last.time_exponent() < first.time_exponent()
    };
    let contradiction = p.steps() >= 2 && speedups >= 1 && same_shape && dominated;
    ProofReport {
        valid: true,
        contradiction,
        first_error: None,
        final_exponent: last.d.clone(),
        speedups,
    }
}

/// Parses and verifies; parse failures come back as invalid reports.
pub fn verify_text(text: &str) -> ProofReport {
    match parse_certificate(text) {
        Ok(p) => verify_proof(&p),
        Err(e) => ProofReport {
            valid: false,
            contradiction: false,
            first_error: Some((e.line, e.msg)),
            final_exponent: Rational::zero(),
            speedups: 0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat};

    fn lipton_viglas(c: Rational) -> ProofCertificate {
        let start = parse_class("E(a=2,b=2) A(a=2,b=2) TS d=2").unwrap();
        let mut p = ProofCertificate::new(int(1), c.clone(), Mode::Ts, Assumption::Ntime, start);
        p.push(RuleKind::Slowdown, None).unwrap();
        p.push(RuleKind::Slowdown, None).unwrap();
        p.push(RuleKind::SpeedupFirst, Some(&c * &c)).unwrap();
        p
    }

    #[test]
    fn lipton_viglas_contradicts_below_sqrt_two() {
        let r = verify_proof(&lipton_viglas(rat(7, 5)));
        assert!(r.valid && r.contradiction, "{r:?}");
        assert_eq!(r.final_exponent, rat(49, 25));
        let r = verify_proof(&lipton_viglas(rat(3, 2)));
        assert!(r.valid && !r.contradiction);
    }

    #[test]
    fn text_round_trip() {
        let p = lipton_viglas(rat(7, 5));
        let text = p.to_string();
        assert!(text.starts_with("atlb-proof v1\nalpha 1   c 7/5   mode ts   assumption ntime\nclass 0: "));
        assert!(text.contains("step 3: speedup_first x=49/25\n"));
        assert_eq!(parse_certificate(&text).unwrap(), p);
        assert!(verify_text(&text).contradiction);
    }

    #[test]
    fn tampered_class_names_its_line() {
        let text = lipton_viglas(rat(7, 5)).to_string().replace("class 1: E(a=2,b=2) TS d=14/5", "class 1: E(a=2,b=2) TS d=2");
        let r = verify_text(&text);
        assert!(!r.valid);
        assert_eq!(r.first_error.unwrap().0, 5);
    }

    #[test]
    fn malformed_certificates() {
        assert_eq!(verify_text("hello").first_error.unwrap().0, 1);
        let bad_header = "atlb-proof v1\nalpha 1 c 2 mode ts\nclass 0: TS d=1\n";
        assert_eq!(verify_text(bad_header).first_error.unwrap().0, 2);
        let bad_step = "atlb-proof v1\nalpha 1   c 2   mode ts   assumption ntime\nclass 0: TS d=4\nstep 1: jump\n";
        assert_eq!(verify_text(bad_step).first_error.unwrap().0, 4);
        let wrong_mode = "atlb-proof v1\nalpha 1   c 2   mode ts   assumption ebp\nclass 0: TS d=4\n";
        assert!(!verify_text(wrong_mode).valid);
    }

    #[test]
    fn grover_needs_ebqp() {
        let start = parse_class("E(a=1,b=1) A(a=1,b=1) TS d=3").unwrap();
        let mut p = ProofCertificate::new(rat(2, 3), int(2), Mode::Ts, Assumption::Ntime, start.clone());
        assert!(p.push(RuleKind::Grover, None).is_err());
        let mut p = ProofCertificate::new(rat(2, 3), int(2), Mode::Ts, Assumption::Ebqp, start);
        assert_eq!(p.push(RuleKind::Grover, None).unwrap().d, int(4));
    }

    #[test]
    fn single_step_is_not_a_contradiction() {
        let mut p = ProofCertificate::new(int(1), rat(3, 2), Mode::Ts, Assumption::Ntime, AltClass::bare(VerifierKind::DetTs, int(4)));
        p.push(RuleKind::SpeedupFirst, Some(int(1))).unwrap();
        let r = verify_proof(&p);
        assert!(r.valid && !r.contradiction);
    }

    #[test]
    fn randomized_orientation_is_read_from_the_claim() {
        let start = AltClass::bare(VerifierKind::BpTs, int(3));
        let mut p = ProofCertificate::new(int(1), rat(3, 2), Mode::Bpts, Assumption::Ebp, start);
        p.push(RuleKind::SpeedupRand, Some(int(1))).unwrap();
        let text = p.to_string().replace("class 1: E(a=0,b=1) A(a=1,b=1) E(a=0,b=1)", "class 1: A(a=0,b=1) E(a=1,b=1) A(a=0,b=1)");
        assert!(verify_text(&text).valid);
    }
}
