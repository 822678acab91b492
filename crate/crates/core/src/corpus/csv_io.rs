use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::chunker::Chunk;
use super::tokens::TokenEstimator;
use crate::error::{Error, Result};

pub const CHUNK_HEADER: [&str; 5] = ["FileName", "Interview_chunk", "Tokens", "DocId", "Ordinal"];

pub fn write_chunks<W: Write>(out: W, chunks: &[Chunk]) -> Result<()> {
    if chunks.is_empty() {
        return Err(Error::InvalidInput(
            "refusing to write an empty chunk list".into(),
        ));
    }
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    w.write_record(CHUNK_HEADER).map_err(csv_err)?;
    for c in chunks {
        w.write_record([
            c.file_name.as_str(),
            c.interview_chunk.as_str(),
            &c.tokens.to_string(),
            c.doc_id.as_str(),
            &c.ordinal.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn write_chunks_file(path: &Path, chunks: &[Chunk]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_chunks(file, chunks)
}

/// Reads chunks back. `origin` names the source in error messages; row
/// numbers are 1-based data rows (the header is row 0).
pub fn read_chunks<R: Read>(input: R, origin: &str) -> Result<Vec<Chunk>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let bad = |row: usize, message: String| Error::MalformedRow {
        path: origin.to_string(),
        row,
        message,
    };
    let header = r.headers().map_err(|e| bad(0, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CHUNK_HEADER {
        return Err(bad(
            0,
            format!("header must be `{}`, found `{}`", CHUNK_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut chunks = Vec::new();
    for (i, record) in r.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| bad(row, e.to_string()))?;
        if record.len() != CHUNK_HEADER.len() {
            return Err(bad(row, format!("expected {} fields, found {}", CHUNK_HEADER.len(), record.len())));
        }
        let tokens = record[2]
            .parse::<usize>()
            .map_err(|e| bad(row, format!("Tokens `{}`: {e}", &record[2])))?;
        let ordinal = record[4]
            .parse::<usize>()
            .map_err(|e| bad(row, format!("Ordinal `{}`: {e}", &record[4])))?;
        if record[0].is_empty() || record[3].is_empty() {
            return Err(bad(row, "FileName and DocId must be non-empty".into()));
        }
        chunks.push(Chunk {
            file_name: record[0].to_string(),
            interview_chunk: record[1].to_string(),
            tokens,
            doc_id: record[3].to_string(),
            ordinal,
        });
    }
    Ok(chunks)
}

pub fn read_chunks_file(path: &Path) -> Result<Vec<Chunk>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_chunks(file, &path.display().to_string())
}

/// Rows whose stored token count differs from a fresh estimate. Reported as
/// warnings only: the estimator may have changed between runs.
pub fn token_mismatches(chunks: &[Chunk], est: &dyn TokenEstimator) -> Vec<(String, usize, usize)> {
    chunks
        .iter()
        .filter_map(|c| {
            let fresh = est.estimate(&c.interview_chunk);
            (fresh != c.tokens).then(|| (c.file_name.clone(), c.tokens, fresh))
        })
        .inspect(|(name, stored, fresh)| {
            log::warn!("{name}: stored token count {stored} differs from estimate {fresh}")
        })
        .collect()
}
