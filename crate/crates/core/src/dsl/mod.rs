//! Line-oriented bench description language.
//!
//! ```text
//! source spdc l=1 K=2 profile=uniform
//! prepare A alpha=0.6+0i beta=0+0.8i
//! element A sorter -> e o
//! element o dove
//! element e bs o symmetric -> d1 d2
//! detect D1 d1
//! run trials=100 seed=7 mode=projector
//! ```
//!
//! `A` and `B` name the entry paths of the two photons; every other path is
//! introduced as an element output. Outputs must be fresh names, and a path
//! is consumed once it feeds an element with outputs or a detector.

mod lexer;
mod lower;
mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elements::BsConvention;
use crate::hilbert::C64;
use crate::protocol::MeasurementMode;
use crate::spdc::ProfileKind;

pub use lower::{layout_to_program, lower, LoweredBench};
pub use parser::{parse, parse_bytes};
pub use printer::pretty_print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCategory {
    Lexical,
    Syntax,
    Semantic,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCategory::Lexical => "lexical",
            ErrorCategory::Syntax => "syntax",
            ErrorCategory::Semantic => "semantic",
        })
    }
}

/// Positioned parse error; `line` and `column` are 1-based, columns count chars.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {category} error: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub category: ErrorCategory,
    pub message: String,
}

impl ParseError {
    fn new(
        line: usize,
        column: usize,
        category: ErrorCategory,
        message: impl Into<String>,
    ) -> Self {
        ParseError {
            line,
            column,
            category,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub l: i64,
    pub half_width: i64,
    pub profile: ProfileKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementKind {
    Sorter,
    /// Split into `-> h v`, or with a partner recombine `H(self) + V(partner) -> out`.
    Pbs {
        partner: Option<String>,
    },
    Bs {
        partner: String,
        convention: BsConvention,
    },
    Dove,
    Sph {
        charge: i32,
    },
    Hwp {
        theta: f64,
    },
    Qwp {
        theta: f64,
    },
    Delay {
        phi: f64,
    },
}

impl ElementKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ElementKind::Sorter => "sorter",
            ElementKind::Pbs { .. } => "pbs",
            ElementKind::Bs { .. } => "bs",
            ElementKind::Dove => "dove",
            ElementKind::Sph { .. } => "sph",
            ElementKind::Hwp { .. } => "hwp",
            ElementKind::Qwp { .. } => "qwp",
            ElementKind::Delay { .. } => "delay",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementStmt {
    pub arm: String,
    pub kind: ElementKind,
    pub outputs: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunDirective {
    pub trials: u64,
    pub seed: u64,
    pub mode: MeasurementMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Source(Source),
    Prepare { alpha: C64, beta: C64 },
    Element(ElementStmt),
    Detect { id: String, path: String },
    Run(RunDirective),
}

/// A validated program; statements keep their source order.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchProgram {
    pub statements: Vec<Statement>,
}

impl BenchProgram {
    pub fn source(&self) -> &Source {
        self.statements
            .iter()
            .find_map(|s| match s {
                Statement::Source(src) => Some(src),
                _ => None,
            })
            .expect("validated programs have a source")
    }

    pub fn preparation(&self) -> Option<(C64, C64)> {
        self.statements.iter().find_map(|s| match s {
            Statement::Prepare { alpha, beta } => Some((*alpha, *beta)),
            _ => None,
        })
    }

    pub fn run_directive(&self) -> Option<RunDirective> {
        self.statements.iter().find_map(|s| match s {
            Statement::Run(r) => Some(*r),
            _ => None,
        })
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementStmt> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Element(e) => Some(e),
            _ => None,
        })
    }

    pub fn detectors(&self) -> impl Iterator<Item = (&str, &str)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Detect { id, path } => Some((id.as_str(), path.as_str())),
            _ => None,
        })
    }
}
