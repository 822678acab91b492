//! Transcript ingestion: cleaning, token estimation, chunking and the
//! chunks CSV.

pub mod chunker;
pub mod clean;
pub mod csv_io;
pub mod tokens;

pub use chunker::{chunk, chunk_corpus, Boundary, Chunk, ChunkConfig, Chunked};
pub use clean::{load_and_clean, normalize_whitespace, CleanConfig, CleanOutcome, Cleaner, Document, FileDiagnostic};
pub use csv_io::{read_chunks, read_chunks_file, token_mismatches, write_chunks, write_chunks_file, CHUNK_HEADER};
pub use tokens::{
    estimate_tokens, word_count, EstimatorMode, EstimatorRegistry, TokenEstimator, TokenEstimatorConfig,
    WordHeuristic, WordPunct,
};
