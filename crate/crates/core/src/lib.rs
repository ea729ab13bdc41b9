//! Executable thinging-machine models.
//!
//! A model is a tree of machines, each declaring up to five stages (Create,
//! Process, Release, Receive, Transfer), connected by solid flows and dashed
//! triggers. On top of the static model this crate defines regions and
//! events, infers behavior graphs, and simulates token flow to check traces
//! against a declared behavior.

pub mod behavior;
pub mod cli;
pub mod diag;
pub mod export;
pub mod expr;
pub mod model;
pub mod sim;
pub mod syntax;
pub mod validate;

pub use diag::{Diagnostic, Severity, SourceSpan, ValidationReport};
pub use model::{desugar, resolve, StageKind, StageRef, TmModel};
pub use syntax::{parse, parse_document, serialize, Document};
pub use validate::{reachable_stages, validate};
