//! Exact class records, annotations and their combinatorics.

pub mod annotation;
pub mod class;
pub mod rational;

pub use annotation::{
    annotation_heights, classify_camels, decompose_blocks, enumerate_annotations, validate_annotation, Annotation,
    AnnotationError, AnnotationGraph, BlockDecomposition, Camel, CamelKind, Mode, Step, ValidityReport,
};
pub use class::{check_orderly, parse_class, AltClass, ClassError, Quantifier, QuantifierBlock, VerifierKind};
pub use rational::{format_rational, from_f64, int, max_of, mul, parse_rational, rat, to_f64, ParseRationalError, Rational};
