//! Alternating complexity classes as exponent records, with the one-line grammar
//! `E(a=2,b=2) A(a=0,b=1) TS d=5`.

use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use thiserror::Error;

use super::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn flip(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }

    fn letter(self) -> char {
        match self {
            Quantifier::Exists => 'E',
            Quantifier::Forall => 'A',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantifierBlock {
    pub kind: Quantifier,
    /// Guess length is n^a bits; a = 0 stands for n^{o(1)}.
    pub a: Rational,
    /// Output length of the stage, n^b.
    pub b: Rational,
}

impl QuantifierBlock {
    pub fn new(kind: Quantifier, a: Rational, b: Rational) -> Self {
        QuantifierBlock { kind, a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerifierKind {
    DetTs,
    BpTs,
}

impl VerifierKind {
    fn keyword(self) -> &'static str {
        match self {
            VerifierKind::DetTs => "TS",
            VerifierKind::BpTs => "BPTS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AltClass {
    pub blocks: Vec<QuantifierBlock>,
    pub verifier: VerifierKind,
    pub d: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("orderliness violated in block {block}: a={a} > b={b}")]
    Orderliness { block: usize, a: String, b: String },
    #[error("block {block} has negative guess exponent a={a}")]
    NegativeGuess { block: usize, a: String },
    #[error("verifier exponent must be positive, got d={0}")]
    NonPositiveVerifier(String),
    #[error("blocks {0} and {1} do not alternate")]
    NotAlternating(usize, usize),
}

impl AltClass {
    /// Builds a class and checks every stored invariant.
    pub fn new(blocks: Vec<QuantifierBlock>, verifier: VerifierKind, d: Rational) -> Result<Self, ClassError> {
        let c = AltClass { blocks, verifier, d };
        c.validate()?;
        Ok(c)
    }

    /// A quantifier-free class `TS[n^d]` or `BPTS[n^d]`.
    pub fn bare(verifier: VerifierKind, d: Rational) -> Self {
        AltClass { blocks: Vec::new(), verifier, d }
    }

    pub fn validate(&self) -> Result<(), ClassError> {
        if !self.d.is_positive() {
            return Err(ClassError::NonPositiveVerifier(format_rational(&self.d)));
        }
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.a.is_negative() {
                return Err(ClassError::NegativeGuess { block: i + 1, a: format_rational(&blk.a) });
            }
            if blk.a > blk.b {
                return Err(ClassError::Orderliness {
                    block: i + 1,
                    a: format_rational(&blk.a),
                    b: format_rational(&blk.b),
                });
            }
            if i > 0 && self.blocks[i - 1].kind == blk.kind {
                return Err(ClassError::NotAlternating(i, i + 1));
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.blocks.len()
    }

    pub fn last(&self) -> Option<&QuantifierBlock> {
        self.blocks.last()
    }

    /// b_{k-1} with the convention b_0 = 1.
    pub fn prev_b(&self) -> Rational {
        let k = self.blocks.len();
        if k >= 2 {
            self.blocks[k - 2].b.clone()
        } else {
            Rational::one()
        }
    }

    /// Largest exponent anywhere in the class: the overall running time of the
    /// alternating machine is n^{this}.
    pub fn time_exponent(&self) -> Rational {
        self.blocks
            .iter()
            .flat_map(|b| [&b.a, &b.b])
            .chain(std::iter::once(&self.d))
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

pub fn check_orderly(c: &AltClass) -> bool {
    c.blocks.iter().all(|b| b.a <= b.b)
}

impl fmt::Display for AltClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for blk in &self.blocks {
            write!(f, "{}(a={},b={}) ", blk.kind.letter(), format_rational(&blk.a), format_rational(&blk.b))?;
        }
        write!(f, "{} d={}", self.verifier.keyword(), format_rational(&self.d))
    }
}

impl FromStr for AltClass {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_class(s)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ClassError> {
        Err(ClassError::Syntax { pos: self.pos + 1, msg: msg.into() })
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ClassError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.fail(format!("expected `{tok}`"))
        }
    }

    fn rational(&mut self) -> Result<Rational, ClassError> {
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|ch: char| !(ch.is_ascii_digit() || ch == '/' || ch == '-'))
            .unwrap_or(rest.len());
        let lit = &rest[..len];
        if lit.is_empty() || lit.contains('.') {
            return self.fail("expected a rational `int` or `int/int`");
        }
        match parse_rational(lit) {
            Ok(r) => {
                self.pos += len;
                Ok(r)
            }
            Err(e) => self.fail(e.reason),
        }
    }
}

/// Parses the canonical one-line class grammar and validates the invariants.
pub fn parse_class(text: &str) -> Result<AltClass, ClassError> {
    let mut cur = Cursor { src: text.trim_end(), pos: 0 };
    let mut blocks = Vec::new();
    loop {
        cur.skip_ws();
        let kind = if cur.eat("E(") {
            Quantifier::Exists
        } else if cur.eat("A(") {
            Quantifier::Forall
        } else {
            break;
        };
        cur.expect("a=")?;
        let a = cur.rational()?;
        cur.expect(",")?;
        cur.skip_ws();
        cur.expect("b=")?;
        let b = cur.rational()?;
        cur.expect(")")?;
        blocks.push(QuantifierBlock { kind, a, b });
    }
    let verifier = if cur.eat("BPTS") {
        VerifierKind::BpTs
    } else if cur.eat("TS") {
        VerifierKind::DetTs
    } else {
        return cur.fail("expected a quantifier block, `TS` or `BPTS`");
    };
    cur.skip_ws();
    cur.expect("d=")?;
    let d = cur.rational()?;
    cur.skip_ws();
    if cur.pos != cur.src.len() {
        return cur.fail("trailing input");
    }
    AltClass::new(blocks, verifier, d)
}
