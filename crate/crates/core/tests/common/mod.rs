#![allow(dead_code)]

use atlb_core::kernel::{rat, AltClass, Mode, Quantifier, QuantifierBlock, Rational, VerifierKind};
use atlb_core::rules::{
    grover_collapse, grover_randomized, slowdown_generic, speedup, speedup_first, speedup_randomized, squiggle,
    RuleError,
};
use proptest::prelude::*;

pub fn small_rat(max_num: i64) -> impl Strategy<Value = Rational> {
    (0..=max_num, 1..=6i64).prop_map(|(n, q)| rat(n, q))
}

pub fn pos_rat(max_num: i64) -> impl Strategy<Value = Rational> {
    (1..=max_num, 1..=6i64).prop_map(|(n, q)| rat(n, q))
}

/// Orderly, alternating classes with up to four blocks.
pub fn class() -> impl Strategy<Value = AltClass> {
    (
        prop::collection::vec((small_rat(30), small_rat(30)), 0..=4),
        any::<bool>(),
        any::<bool>(),
        pos_rat(60),
    )
        .prop_map(|(raw, exists_first, det, d)| {
            let mut kind = if exists_first { Quantifier::Exists } else { Quantifier::Forall };
            let blocks = raw
                .into_iter()
                .map(|(a, extra)| {
                    let b = &a + extra;
                    let blk = QuantifierBlock::new(kind, a, b);
                    kind = kind.flip();
                    blk
                })
                .collect();
            let verifier = if det { VerifierKind::DetTs } else { VerifierKind::BpTs };
            AltClass::new(blocks, verifier, d).expect("generated class is well formed")
        })
}

/// A class and a componentwise larger copy of the same shape.
pub fn class_pair() -> impl Strategy<Value = (AltClass, AltClass)> {
    class().prop_flat_map(|c| {
        let n = c.blocks.len();
        (Just(c), prop::collection::vec((small_rat(10), small_rat(10)), n), small_rat(10))
    })
    .prop_map(|(c, deltas, dd)| {
        let mut big = c.clone();
        for (blk, (da, db)) in big.blocks.iter_mut().zip(deltas) {
            // b grows at least as much as a, so the copy stays orderly.
            blk.a += &da;
            blk.b += da + db;
        }
        big.d += dd;
        (c, big)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    SpeedupFirst,
    Speedup,
    SpeedupRand,
    Slowdown,
    Grover,
    Squiggle,
}

pub const RULES: [Rule; 6] = [Rule::SpeedupFirst, Rule::Speedup, Rule::SpeedupRand, Rule::Slowdown, Rule::Grover, Rule::Squiggle];

/// Applies `rule` with speedup parameter `frac·d` (frac in (0,1)).
pub fn apply(rule: Rule, c: &AltClass, frac: &Rational, alpha: &Rational, cc: &Rational) -> Result<AltClass, RuleError> {
    apply_x(rule, c, &(&c.d * frac), alpha, cc)
}

pub fn apply_x(rule: Rule, c: &AltClass, x: &Rational, alpha: &Rational, cc: &Rational) -> Result<AltClass, RuleError> {
    let x = x.clone();
    match rule {
        Rule::SpeedupFirst => speedup_first(c, &x),
        Rule::Speedup => speedup(c, &x),
        Rule::SpeedupRand => speedup_randomized(c, &x),
        Rule::Slowdown => slowdown_generic(c, alpha, cc, Mode::Ts),
        Rule::Grover => match c.verifier {
            VerifierKind::DetTs => grover_collapse(c, cc),
            VerifierKind::BpTs => grover_randomized(c, cc),
        },
        Rule::Squiggle => squiggle(c, alpha, cc).map(|o| o.class),
    }
}

/// The rule a random walk would use next on `c`, picked by `pick`.
pub fn applicable(c: &AltClass, pick: usize) -> Rule {
    let opts: Vec<Rule> = match (c.verifier, c.blocks.is_empty()) {
        (VerifierKind::DetTs, true) => vec![Rule::SpeedupFirst],
        (VerifierKind::DetTs, false) => vec![Rule::Speedup, Rule::Slowdown, Rule::Grover, Rule::Squiggle],
        (VerifierKind::BpTs, true) => vec![Rule::SpeedupRand],
        (VerifierKind::BpTs, false) => vec![Rule::SpeedupRand, Rule::Slowdown, Rule::Grover],
    };
    opts[pick % opts.len()]
}

/// Same quantifier shape and verifier, every exponent of `lo` at most that of `hi`.
pub fn dominated(lo: &AltClass, hi: &AltClass) -> bool {
    lo.verifier == hi.verifier
        && lo.blocks.len() == hi.blocks.len()
        && lo.d <= hi.d
        && lo.blocks.iter().zip(&hi.blocks).all(|(p, q)| p.kind == q.kind && p.a <= q.a && p.b <= q.b)
}

/// Fraction in (0,1) with small denominator.
pub fn frac() -> impl Strategy<Value = Rational> {
    (1..=9i64).prop_map(|n| rat(n, 10))
}

/// Slowdown parameters inside the squiggle window for α = 1.
pub fn alpha_c() -> impl Strategy<Value = (Rational, Rational)> {
    prop_oneof![Just((rat(1, 1), rat(3, 2))), Just((rat(1, 1), rat(9, 5))), Just((rat(2, 3), rat(2, 1))), Just((rat(1, 2), rat(5, 2)))]
}
