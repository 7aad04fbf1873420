//! The named proof families: Good proofs 1^k0(20)^k, the BPTS chain
//! 1^k0^{k+2}, and the repeated Grover contraction.

use num::{Integer, One, Signed};

use super::SearchError;
use crate::analytics::{p_alpha, largest_root_cubic};
use crate::kernel::{format_rational, int, AltClass, Mode, Rational, VerifierKind};
use crate::rules::{squiggle, verify_proof, Assumption, ProofCertificate, ProofReport, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodProofParams {
    pub k: usize,
    pub epsilon: Rational,
    /// (1−ε)/(c(αc−1)).
    pub tau: Rational,
    pub x: Vec<Rational>,
    /// Initial exponent actually used: raised when the speedups need more
    /// room, then scaled up.
    pub d: Rational,
}

#[derive(Debug, Clone)]
pub struct GoodProof {
    pub params: GoodProofParams,
    pub certificate: ProofCertificate,
    pub report: ProofReport,
    /// Descriptions of the constraints that do not hold.
    pub failures: Vec<String>,
}

impl GoodProof {
    pub fn contradiction(&self) -> bool {
        self.report.contradiction
    }
}

fn geometric(first: &Rational, ratio: &Rational, k: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(k);
    let mut cur = first.clone();
    for _ in 0..k {
        out.push(cur.clone());
        cur *= ratio;
    }
    out
}

/// Geometric parameters x_i = first·ratio^{i−1} for initial exponent `d`.
///
/// Below the cubic roots the geometric sum reaches d and the later speedups
/// have no room. Every rule is homogeneous while the constant floors are
/// inactive, so the initial exponent is then raised to Σx + slack·x_k/2 (the
/// same proof as shrinking all x_i by a common λ, but with shorter numbers).
/// If x_k < 1 everything is then multiplied by the common denominator, which
/// keeps the floors inactive and lets the speedups run on integers (long
/// chains stay cheap to build and to verify).
fn geometric_params(d: &Rational, first_over_d: &Rational, ratio: &Rational, k: usize, slack: &Rational) -> (Rational, Vec<Rational>) {
    let mut x = geometric(&(d * first_over_d), ratio, k);
    let sum: Rational = x.iter().sum();
    let mut d = if sum >= *d { sum + slack * &x[k - 1] / int(2) } else { d.clone() };
    if x[k - 1] < Rational::one() {
        let scale = x.iter().fold(d.denom().clone(), |l, xi| l.lcm(xi.denom()));
        x.iter_mut().for_each(|xi| *xi *= &scale);
        d *= &scale;
    }
    (d, x)
}

fn check_ranges(alpha: &Rational, cc: &Rational, k: usize, d: &Rational) -> Result<(), SearchError> {
    if !alpha.is_positive() || *alpha > Rational::one() || *cc <= Rational::one() || k == 0 || !d.is_positive() {
        return Err(SearchError::Parameters(format!(
            "need 0 < alpha <= 1 < c, k >= 1, d > 0; got alpha={} c={} k={k} d={}",
            format_rational(alpha),
            format_rational(cc),
            format_rational(d)
        )));
    }
    Ok(())
}

/// The Good proof of height k with ε = 1/k.
pub fn good_proof(alpha: &Rational, cc: &Rational, k: usize, d: &Rational) -> Result<GoodProof, SearchError> {
    check_ranges(alpha, cc, k, d)?;
    let ac = alpha * cc;
    if ac <= Rational::one() {
        return Err(SearchError::Parameters("Good proofs need alpha*c > 1".into()));
    }
    let epsilon = Rational::one() / int(k as i64);
    let tau = (Rational::one() - &epsilon) / (cc * (&ac - Rational::one()));
    let (d, x) = geometric_params(d, &(Rational::one() / (&ac * cc)), &tau, k, &(Rational::one() / (&ac - Rational::one())));

    let mut cert = ProofCertificate::new(alpha.clone(), cc.clone(), Mode::Ts, Assumption::Ntime, AltClass::bare(VerifierKind::DetTs, d.clone()));
    let mut failures = Vec::new();
    let mut broken = false;
    for (i, xi) in x.iter().enumerate() {
        let rule = if i == 0 { RuleKind::SpeedupFirst } else { RuleKind::Speedup };
        if let Err(e) = cert.push(rule, Some(xi.clone())) {
            failures.push(format!("speedup {} not applicable: {e}", i + 1));
            broken = true;
            break;
        }
    }
    if !broken {
        let squiggle_ok = *cc < (Rational::one() + alpha) / alpha;
        if !squiggle_ok {
            failures.push("c outside the squiggle window".into());
        }
        'chain: {
            if let Err(e) = cert.push(RuleKind::Slowdown, None) {
                failures.push(format!("slowdown 1 not applicable: {e}"));
                break 'chain;
            }
            if !squiggle_ok {
                break 'chain;
            }
            for i in 0..k {
                // Below the window the class is left as is, which costs nothing.
                let below = cert.last().d < cc * &cert.last().last().expect("quantified").b;
                match squiggle(cert.last(), alpha, cc) {
                    Ok(o) if !o.proper && !below => failures.push(if i == 0 {
                        "first squiggle improper".into()
                    } else {
                        format!("squiggle {} improper", i + 1)
                    }),
                    Ok(_) => {}
                    Err(e) => {
                        failures.push(format!("squiggle {} not applicable: {e}", i + 1));
                        break 'chain;
                    }
                }
                cert.push(RuleKind::Squiggle, None).expect("checked above");
                if let Err(e) = cert.push(RuleKind::Slowdown, None) {
                    failures.push(format!("slowdown {} not applicable: {e}", i + 2));
                    break 'chain;
                }
            }
            if cert.last().d > d {
                failures.push("final exponent exceeds the initial one".into());
            }
        }
    }
    let report = verify_proof(&cert);
    Ok(GoodProof { params: GoodProofParams { k, epsilon, tau, x, d }, certificate: cert, report, failures })
}

/// Limit of the Good-proof bound as k grows: the largest root of
/// α²c³ − αc² − 2αc + 1.
pub fn good_proof_limit(alpha: &Rational, tol: f64) -> Result<f64, SearchError> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(SearchError::Parameters(format!("alpha={} outside (0,1]", format_rational(alpha))));
    }
    largest_root_cubic(&p_alpha(alpha), tol).map_err(|e| SearchError::Parameters(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct BptsProof {
    pub k: usize,
    pub epsilon: Rational,
    pub x: Vec<Rational>,
    pub d: Rational,
    /// Grover contraction rounds (zero for the plain chain).
    pub rounds: usize,
    pub certificate: ProofCertificate,
    pub report: ProofReport,
}

impl BptsProof {
    pub fn contradiction(&self) -> bool {
        self.report.contradiction
    }
}

/// Annotation 1^k0^{k+2} from BPTS[n^d]: one randomized speedup, k−1 usual
/// speedups with x_i = ((1−ε)/c)^{i−1}·d/c³, then k+2 randomized slowdowns.
pub fn bpts_proof(k: usize, cc: &Rational, d: &Rational) -> Result<BptsProof, SearchError> {
    check_ranges(&Rational::one(), cc, k, d)?;
    let epsilon = Rational::one() / int(k as i64);
    let tau = (Rational::one() - &epsilon) / cc;
    let (d, x) = geometric_params(d, &(Rational::one() / (cc * cc * cc)), &tau, k, &Rational::one());
    let mut cert = ProofCertificate::new(Rational::one(), cc.clone(), Mode::Bpts, Assumption::Ebp, AltClass::bare(VerifierKind::BpTs, d.clone()));
    let steps = x
        .iter()
        .enumerate()
        .map(|(i, xi)| (if i == 0 { RuleKind::SpeedupRand } else { RuleKind::Speedup }, Some(xi.clone())))
        .chain(std::iter::repeat((RuleKind::Slowdown, None)).take(k + 2));
    for (rule, xi) in steps {
        if cert.push(rule, xi).is_err() {
            break;
        }
    }
    let report = verify_proof(&cert);
    Ok(BptsProof { k, epsilon, x, d, rounds: 0, certificate: cert, report })
}

/// Randomized speedup with x = 2d/3 and two slowdowns reach ∃BPTS[n^{2c²d/3}];
/// Grover rounds then shrink the verifier by 2c/3 each until it is at most d/c,
/// and a last slowdown returns to BPTS[n^{≤d}].
pub fn bpts_grover_proof(cc: &Rational, d: &Rational) -> Result<BptsProof, SearchError> {
    check_ranges(&Rational::one(), cc, 1, d)?;
    // Keep every exponent above the constant floors.
    let mut d = d.clone();
    while d < int(3) * cc {
        d *= int(2);
    }
    let x = &d * int(2) / int(3);
    let mut cert = ProofCertificate::new(Rational::one(), cc.clone(), Mode::Bpts, Assumption::Ebqp, AltClass::bare(VerifierKind::BpTs, d.clone()));
    let setup = [(RuleKind::SpeedupRand, Some(x.clone())), (RuleKind::Slowdown, None), (RuleKind::Slowdown, None)]
        .into_iter()
        .try_for_each(|(rule, x)| cert.push(rule, x).map(|_| ()));
    let mut rounds = 0;
    if setup.is_ok() && int(2) * cc < int(3) {
        let goal = &d / cc;
        while cert.last().d > goal {
            if cert.push(RuleKind::Grover, None).is_err() {
                break;
            }
            rounds += 1;
        }
        let _ = cert.push(RuleKind::Slowdown, None);
    }
    let report = verify_proof(&cert);
    Ok(BptsProof { k: 1, epsilon: Rational::one(), x: vec![x], d, rounds, certificate: cert, report })
}
