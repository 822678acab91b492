//! Test fixtures: seeded interview corpora built around transcribed theme
//! tables, a scripted model backend, a stub chat-completions server and a
//! brute-force clustering oracle.

pub mod concepts;
pub mod corpus;
pub mod dataset;
pub mod model;
pub mod oracle;
pub mod provenance;
pub mod stub;
pub mod tables;

pub use dataset::{Dataset, DatasetPlan};
pub use model::ScriptedModel;
pub use stub::{Exchange, Fault, StubServer};
