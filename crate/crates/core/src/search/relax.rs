//! Homogeneous linear relaxation of an annotation.
//!
//! The initial verifier exponent is normalized to 1 and the constant-1 floors
//! are dropped. Only output exponents b are tracked: orderliness gives
//! max(a_k, b_k) = b_k everywhere a maximum needs it. Each max(...) becomes one
//! lower bound per argument on a fresh variable. The margin μ (free, ≤ 1) is
//! subtracted from every strict inequality and maximized.

use num::{One, Zero};

use super::simplex::LinearProgram;
use crate::kernel::{Annotation, Mode, Rational, Step};
use crate::rules::squiggle_ratio;

/// Affine expression `constant + Σ coef·var`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr {
    pub constant: Rational,
    pub terms: Vec<(usize, Rational)>,
}

impl Expr {
    pub fn constant(c: Rational) -> Self {
        Expr { constant: c, terms: Vec::new() }
    }

    pub fn var(v: usize) -> Self {
        Expr { constant: Rational::zero(), terms: vec![(v, Rational::one())] }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.iter().all(|(_, c)| c.is_zero())
    }

    pub fn scale(&self, k: &Rational) -> Expr {
        Expr { constant: &self.constant * k, terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect() }
    }

    pub fn plus(&self, other: &Expr, sign: i32) -> Expr {
        let mut out = self.clone();
        out.constant += if sign >= 0 { other.constant.clone() } else { -other.constant.clone() };
        for (v, c) in &other.terms {
            let c = if sign >= 0 { c.clone() } else { -c.clone() };
            match out.terms.iter_mut().find(|(w, _)| w == v) {
                Some((_, acc)) => *acc += c,
                None => out.terms.push((*v, c)),
            }
        }
        out.terms.retain(|(_, c)| !c.is_zero());
        out
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.terms.iter().fold(self.constant.clone(), |acc, (v, c)| acc + c * &values[*v])
    }
}

/// What the replay needs to know about one annotation step.
#[derive(Debug, Clone)]
pub enum StepPlan {
    Speedup {
        x: usize,
        d_before: Expr,
        /// Exponent of the block that receives the new guess (the new last block
        /// for usual speedups, the middle block for randomized ones).
        new_b: Expr,
    },
    Slowdown,
    Squiggle,
}

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub lp: LinearProgram,
    pub plan: Vec<StepPlan>,
    pub final_d: Expr,
}

const MU_POS: usize = 0;
const MU_NEG: usize = 1;

fn mu() -> Expr {
    Expr { constant: Rational::zero(), terms: vec![(MU_POS, Rational::one()), (MU_NEG, -Rational::one())] }
}

/// lhs ≥ rhs.
fn add_ge(lp: &mut LinearProgram, lhs: &Expr, rhs: &Expr) {
    let diff = rhs.plus(lhs, -1);
    lp.add_le(diff.terms, -diff.constant);
}

/// Builds the relaxation, or `None` when some squiggle can never apply at these
/// parameters (αc ≤ 1 or c ≥ (1+α)/α).
pub fn build(a: &Annotation, alpha: &Rational, cc: &Rational) -> Option<Relaxation> {
    let mut lp = LinearProgram::new(2);
    lp.objective = mu().terms;
    lp.add_le(mu().terms, Rational::one());
    let mut d = Expr::constant(Rational::one());
    let mut blocks: Vec<Expr> = Vec::new();
    let mut randomized = a.mode == Mode::Bpts;
    let mut plan = Vec::with_capacity(a.len());
    let ratio = {
        let ac = alpha * cc;
        if a.steps.contains(&Step::Squiggle) && (ac <= Rational::one() || *cc >= (Rational::one() + alpha) / alpha) {
            return None;
        }
        if ac > Rational::one() {
            Some(squiggle_ratio(alpha, cc))
        } else {
            None
        }
    };

    for step in &a.steps {
        match step {
            Step::Speedup => {
                let x = lp.add_var();
                let xe = Expr::var(x);
                add_ge(&mut lp, &xe, &mu());
                add_ge(&mut lp, &d.plus(&xe, -1), &mu());
                let joined = |lp: &mut LinearProgram, b: &Expr| -> Expr {
                    if b.is_zero() {
                        return xe.clone();
                    }
                    let y = Expr::var(lp.add_var());
                    add_ge(lp, &y, b);
                    add_ge(lp, &y, &xe);
                    y
                };
                let new_b = match (randomized, blocks.last().cloned()) {
                    (true, None) => {
                        blocks = vec![Expr::default(), xe.clone(), Expr::default()];
                        xe.clone()
                    }
                    (true, Some(bk)) => {
                        let y = joined(&mut lp, &bk);
                        blocks.push(y.clone());
                        blocks.push(bk);
                        y
                    }
                    (false, None) => {
                        blocks = vec![xe.clone(), Expr::default()];
                        xe.clone()
                    }
                    (false, Some(bk)) => {
                        let y = joined(&mut lp, &bk);
                        *blocks.last_mut().expect("nonempty") = y.clone();
                        blocks.push(bk);
                        y
                    }
                };
                plan.push(StepPlan::Speedup { x, d_before: d.clone(), new_b });
                d = d.plus(&xe, -1);
                randomized = false;
            }
            Step::Slowdown => {
                let bk = blocks.pop()?;
                let prev = blocks.last().cloned().unwrap_or_default();
                let ad = d.scale(alpha);
                let extra: Vec<Expr> = [bk, prev].into_iter().filter(|e| !e.is_zero()).collect();
                let m = if extra.is_empty() {
                    ad
                } else {
                    let m = Expr::var(lp.add_var());
                    add_ge(&mut lp, &m, &ad);
                    for e in &extra {
                        add_ge(&mut lp, &m, e);
                    }
                    m
                };
                d = m.scale(cc);
                randomized = a.mode == Mode::Bpts;
                plan.push(StepPlan::Slowdown);
            }
            Step::Squiggle => {
                let e = blocks.last()?.clone();
                let ratio = ratio.as_ref()?;
                add_ge(&mut lp, &e.scale(ratio).plus(&d, -1), &mu());
                d = e.scale(cc);
                plan.push(StepPlan::Squiggle);
            }
        }
    }
    add_ge(&mut lp, &Expr::constant(Rational::one()).plus(&d, -1), &mu());
    Some(Relaxation { lp, plan, final_d: d })
}
