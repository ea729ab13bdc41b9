//! Concrete syntax: `.tm` models (with optional `regions` and `behavior`
//! sections), `.tmb` sidecars and `.tms` scenarios.

mod lexer;
mod parser;
mod printer;

use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorDecl, Region};
use crate::diag::Diagnostic;
use crate::model::TmModel;

pub use lexer::normalize_newlines;
pub use parser::{parse_document, parse_expr, parse_scenario};
pub use printer::{serialize, serialize_document, serialize_scenario};

/// Everything one source file can declare.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub model: TmModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<Region>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<BehaviorDecl>,
}

impl Document {
    /// Fold a sidecar's regions and behavior into this document.
    pub fn merge_sidecar(&mut self, sidecar: Document) {
        if let Some(r) = sidecar.regions {
            self.regions.get_or_insert_with(Vec::new).extend(r);
        }
        if sidecar.behavior.is_some() {
            self.behavior = sidecar.behavior;
        }
    }
}

/// Parse model text, ignoring any regions or behavior sections.
pub fn parse(text: &str) -> Result<TmModel, Vec<Diagnostic>> {
    parse_document(text).map(|d| d.model)
}
