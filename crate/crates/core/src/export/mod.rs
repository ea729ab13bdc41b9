//! DOT and JSON renderings.

mod dot;
mod json;

pub use dot::{behavior_to_dot, model_to_dot, DotOptions};
pub use json::{from_json, to_json, JsonError, Kind, SCHEMA_VERSION};
