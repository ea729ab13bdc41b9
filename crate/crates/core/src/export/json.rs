use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// What an exported JSON document holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Model,
    Document,
    Regions,
    BehaviorGraph,
    Trace,
    Report,
    Scenario,
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("expected a {expected:?} document, found {found:?}")]
    Kind { expected: Kind, found: Kind },
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    schema: u32,
    kind: Kind,
    data: &'a T,
}

#[derive(Deserialize)]
struct EnvelopeIn<T> {
    schema: u32,
    kind: Kind,
    data: T,
}

/// Pretty JSON wrapped as `{"schema": 1, "kind": ..., "data": ...}`.
pub fn to_json<T: Serialize>(kind: Kind, value: &T) -> String {
    let env = EnvelopeOut {
        schema: SCHEMA_VERSION,
        kind,
        data: value,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("model types serialize");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(kind: Kind, text: &str) -> Result<T, JsonError> {
    #[derive(Deserialize)]
    struct Header {
        schema: u32,
        kind: Kind,
    }
    let header: Header = serde_json::from_str(text)?;
    if header.schema != SCHEMA_VERSION {
        return Err(JsonError::Schema(header.schema));
    }
    if header.kind != kind {
        return Err(JsonError::Kind {
            expected: kind,
            found: header.kind,
        });
    }
    let env: EnvelopeIn<T> = serde_json::from_str(text)?;
    debug_assert_eq!(env.schema, SCHEMA_VERSION);
    debug_assert_eq!(env.kind, kind);
    Ok(env.data)
}
