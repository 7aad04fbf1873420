//! Proof annotations: strings over {0,1,2} read as slowdown, speedup, squiggle.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Slowdown,
    Speedup,
    Squiggle,
}

impl Step {
    pub fn symbol(self) -> char {
        match self {
            Step::Slowdown => '0',
            Step::Speedup => '1',
            Step::Squiggle => '2',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        match ch {
            '0' => Some(Step::Slowdown),
            '1' => Some(Step::Speedup),
            '2' => Some(Step::Squiggle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Ts,
    Bpts,
}

impl Mode {
    pub fn alphabet(self) -> &'static [Step] {
        match self {
            Mode::Ts => &[Step::Slowdown, Step::Speedup, Step::Squiggle],
            Mode::Bpts => &[Step::Slowdown, Step::Speedup],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Ts => "ts",
            Mode::Bpts => "bpts",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Annotation {
    pub steps: Vec<Step>,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("unknown symbol {symbol:?} at position {pos}")]
    BadSymbol { pos: usize, symbol: char },
    #[error("invalid annotation: step {step}: {reason}")]
    Invalid { step: usize, reason: String },
    #[error("annotation {0} does not have the shape 1^k 0^+ (1 0^+)^*")]
    Shape(String),
}

impl Annotation {
    pub fn parse(text: &str, mode: Mode) -> Result<Self, AnnotationError> {
        let steps = text
            .trim()
            .chars()
            .enumerate()
            .map(|(pos, symbol)| Step::from_symbol(symbol).ok_or(AnnotationError::BadSymbol { pos, symbol }))
            .collect::<Result<_, _>>()?;
        Ok(Annotation { steps, mode })
    }

    pub fn ts(text: &str) -> Self {
        Self::parse(text, Mode::Ts).expect("annotation literal")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn speedups(&self) -> usize {
        self.steps.iter().filter(|s| **s == Step::Speedup).count()
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.steps.iter().try_for_each(|s| write!(f, "{}", s.symbol()))
    }
}

/// Quantifier-height bookkeeping shared by validation and enumeration.
///
/// BPTS mode also tracks whether the verifier is currently randomized: a
/// randomized speedup on a bare class adds three quantifiers, on a quantified
/// class two, and a speedup after it (deterministic verifier) only one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct HeightState {
    pub height: i64,
    pub randomized: bool,
}

impl HeightState {
    pub fn start(mode: Mode) -> Self {
        HeightState { height: 0, randomized: mode == Mode::Bpts }
    }

    pub fn apply(self, step: Step, mode: Mode) -> Result<Self, &'static str> {
        match step {
            Step::Speedup => {
                let delta = match (mode, self.randomized) {
                    (Mode::Bpts, true) if self.height == 0 => 3,
                    (Mode::Bpts, true) => 2,
                    _ if self.height == 0 => 2,
                    _ => 1,
                };
                Ok(HeightState { height: self.height + delta, randomized: false })
            }
            Step::Slowdown => {
                if self.height == 0 {
                    return Err("slowdown with no quantifier to remove");
                }
                Ok(HeightState { height: self.height - 1, randomized: mode == Mode::Bpts })
            }
            Step::Squiggle => {
                if mode == Mode::Bpts {
                    return Err("squiggle is not available in BPTS mode");
                }
                if self.height == 0 {
                    return Err("squiggle with no quantifier");
                }
                Ok(self)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    /// Heights h(0..=t) up to the first violation (exclusive).
    pub heights: Vec<i64>,
    pub violation: Option<(usize, String)>,
    pub complete: bool,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn validate_annotation(a: &Annotation) -> ValidityReport {
    let mut state = HeightState::start(a.mode);
    let mut heights = vec![0];
    for (i, step) in a.steps.iter().enumerate() {
        match state.apply(*step, a.mode) {
            Ok(next) => {
                state = next;
                heights.push(state.height);
            }
            Err(reason) => {
                return ValidityReport { heights, violation: Some((i + 1, reason.to_string())), complete: false };
            }
        }
    }
    let complete = state.height == 0 && a.speedups() >= 1;
    ValidityReport { heights, violation: None, complete }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationGraph {
    pub points: Vec<(usize, i64)>,
}

pub fn annotation_heights(a: &Annotation) -> Result<AnnotationGraph, AnnotationError> {
    let report = validate_annotation(a);
    if let Some((step, reason)) = report.violation {
        return Err(AnnotationError::Invalid { step, reason });
    }
    Ok(AnnotationGraph { points: report.heights.into_iter().enumerate().collect() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub b0: String,
    /// `blocks[0]` is B_k, the last entry is B_1.
    pub blocks: Vec<String>,
}

impl BlockDecomposition {
    /// B_i for 1 ≤ i ≤ k.
    pub fn block(&self, i: usize) -> &str {
        &self.blocks[self.blocks.len() - i]
    }
}

/// Splits `1^k 0 rest` into B0 = 1^k0 followed by k blocks of shape (10)*0.
pub fn decompose_blocks(a: &Annotation) -> Result<BlockDecomposition, AnnotationError> {
    let text = a.to_string();
    let shape = || AnnotationError::Shape(text.clone());
    let bytes = text.as_bytes();
    let k = bytes.iter().take_while(|&&b| b == b'1').count();
    if k == 0 || bytes.get(k) != Some(&b'0') {
        return Err(shape());
    }
    let b0 = text[..=k].to_string();
    let mut blocks = Vec::new();
    let mut i = k + 1;
    while i < bytes.len() {
        let start = i;
        while bytes[i] == b'1' {
            if bytes.get(i + 1) != Some(&b'0') {
                return Err(shape());
            }
            i += 2;
            if i >= bytes.len() {
                return Err(shape());
            }
        }
        if bytes[i] != b'0' {
            return Err(shape());
        }
        i += 1;
        blocks.push(text[start..i].to_string());
    }
    if blocks.len() != k {
        return Err(shape());
    }
    Ok(BlockDecomposition { b0, blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CamelKind {
    Dromedary,
    Bactrian,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Camel {
    /// Graph points `start..=end`; the camel is steps `start+1..=end`.
    pub span: (usize, usize),
    pub base: i64,
    pub kind: CamelKind,
}

/// Maximal Dyck segments of the flattened height graph at every base level.
///
/// A dromedary goes straight up and then down (`1^+` followed by 0s and
/// squiggles), so it returns to its base once. Camels strictly inside a
/// dromedary are trivial and not reported.
pub fn classify_camels(a: &Annotation) -> Vec<Camel> {
    let report = validate_annotation(a);
    let h = &report.heights;
    let steps = &a.steps[..h.len() - 1];
    let mut camels: Vec<Camel> = Vec::new();
    let levels: std::collections::BTreeSet<i64> = h.iter().copied().collect();
    for &base in &levels {
        let mut t = 0;
        while t < h.len() {
            if h[t] != base {
                t += 1;
                continue;
            }
            // Walk while the path stays at or above base; remember the last return.
            let start = t;
            let mut end = t;
            let mut u = t + 1;
            while u < h.len() && h[u] >= base {
                if h[u] == base {
                    end = u;
                }
                u += 1;
            }
            if end > start && h[start + 1..end].iter().any(|&x| x > base) {
                let seg = &steps[start..end];
                camels.push(Camel { span: (start, end), base, kind: shape_kind(seg) });
            }
            t = u.max(t + 1);
        }
    }
    camels.sort_by_key(|c| (c.span.0, std::cmp::Reverse(c.span.1)));
    let dromedaries: Vec<(usize, usize)> =
        camels.iter().filter(|c| c.kind == CamelKind::Dromedary).map(|c| c.span).collect();
    camels.retain(|c| {
        !dromedaries
            .iter()
            .any(|&(s, e)| (s, e) != c.span && s <= c.span.0 && c.span.1 <= e)
    });
    camels
}

fn shape_kind(seg: &[Step]) -> CamelKind {
    let ups = seg.iter().take_while(|s| **s == Step::Speedup).count();
    let rest = &seg[ups..];
    if ups > 0 && rest.iter().all(|s| *s != Step::Speedup) {
        CamelKind::Dromedary
    } else {
        CamelKind::Bactrian
    }
}

/// Every valid complete annotation of length ≤ `max_len`, length-lexicographic
/// with 0 < 1 < 2. Prefixes that are already invalid are pruned.
pub fn enumerate_annotations(max_len: usize, mode: Mode) -> Vec<Annotation> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut buf = Vec::with_capacity(len);
        extend(&mut buf, HeightState::start(mode), len, mode, &mut out);
    }
    out
}

fn extend(buf: &mut Vec<Step>, state: HeightState, len: usize, mode: Mode, out: &mut Vec<Annotation>) {
    if buf.len() == len {
        if state.height == 0 && buf.contains(&Step::Speedup) {
            out.push(Annotation { steps: buf.clone(), mode });
        }
        return;
    }
    // Each remaining step lowers the height by at most one.
    if state.height > (len - buf.len()) as i64 {
        return;
    }
    for &step in mode.alphabet() {
        if let Ok(next) = state.apply(step, mode) {
            buf.push(step);
            extend(buf, next, len, mode, out);
            buf.pop();
        }
    }
}
