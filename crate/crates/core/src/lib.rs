pub mod codegen;
pub mod corpus;
pub mod evaluator;
pub mod error;
pub mod exec;
pub mod gateway;
pub mod json_extract;
pub mod prompts;
pub mod reducer;
pub mod reviewer;
pub mod text;
pub mod themer;

pub use error::{Error, Result};
