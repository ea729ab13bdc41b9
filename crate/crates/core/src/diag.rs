//! Diagnostics and validation reports shared by every checker.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable diagnostic codes.
pub mod codes {
    // parser
    pub const SYNTAX: &str = "SYNTAX";
    pub const DUPLICATE_ID: &str = "DUPLICATE_ID";
    pub const UNKNOWN_STAGE: &str = "UNKNOWN_STAGE";
    pub const DUPLICATE_ENDPOINT: &str = "DUPLICATE_ENDPOINT";
    pub const ENCODING: &str = "ENCODING";
    // static validation
    pub const ADJACENCY: &str = "ADJACENCY";
    pub const UNRESOLVED_REF: &str = "UNRESOLVED_REF";
    pub const DUPLICATE_STAGE: &str = "DUPLICATE_STAGE";
    pub const TRIGGER_SELF_LOOP: &str = "TRIGGER_SELF_LOOP";
    pub const UNDECLARED_THING: &str = "UNDECLARED_THING";
    pub const UNDECLARED_ATTRIBUTE: &str = "UNDECLARED_ATTRIBUTE";
    pub const OPPOSING_FLOWS: &str = "OPPOSING_FLOWS";
    pub const UNREACHABLE: &str = "UNREACHABLE";
    pub const NO_ARCS: &str = "NO_ARCS";
    // regions and behavior
    pub const OVERLAP: &str = "OVERLAP";
    pub const NOT_CONNECTED: &str = "NOT_CONNECTED";
    pub const DANGLING_REF: &str = "DANGLING_REF";
    pub const EMPTY_REGION: &str = "EMPTY_REGION";
    pub const NO_REGIONS: &str = "NO_REGIONS";
    pub const UNKNOWN_EVENT: &str = "UNKNOWN_EVENT";
    pub const UNSUPPORTED_EDGE: &str = "UNSUPPORTED_EDGE";
    pub const MISSING_EDGE: &str = "MISSING_EDGE";
    pub const INTERVAL_ORDER: &str = "INTERVAL_ORDER";
    // conformance
    pub const NONCONFORMANT: &str = "NONCONFORMANT";
    pub const UNATTRIBUTED: &str = "UNATTRIBUTED";
}

/// 1-based position of a diagnostic in normalized source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line,
            column,
            length: length.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    /// Always present for parser diagnostics; model-level checks have no
    /// source positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            span: None,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, message)
        }
    }

    pub fn note(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Note,
            ..Diagnostic::error(code, message)
        }
    }

    pub fn at(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.span {
            write!(f, "{}:{}: ", s.line, s.column)?;
        }
        write!(f, "{}[{}]: {}", self.severity, self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub ok: bool,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport::new(Vec::new())
    }
}

impl ValidationReport {
    pub fn new(diagnostics: Vec<Diagnostic>) -> Self {
        let ok = !diagnostics.iter().any(Diagnostic::is_error);
        ValidationReport { diagnostics, ok }
    }

    pub fn push(&mut self, d: Diagnostic) {
        if d.is_error() {
            self.ok = false;
        }
        self.diagnostics.push(d);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        for d in other.diagnostics {
            self.push(d);
        }
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }
}
