use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::model::{Code, Codebook, Evidence, Stage};
use crate::error::{Error, Result};

pub const CODE_HEADER: [&str; 8] = [
    "Index",
    "Codes",
    "Description",
    "Quote",
    "Evidence",
    "MergedFrom",
    "Stage",
    "RunId",
];

fn join_indices(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

pub fn write_codebook<W: Write>(out: W, book: &Codebook) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    w.write_record(CODE_HEADER).map_err(csv_err)?;
    for c in &book.codes {
        w.write_record([
            c.index.to_string().as_str(),
            &c.name,
            &c.description,
            c.quote(),
            &serde_json::to_string(&c.evidence)?,
            &join_indices(&c.merged_from),
            book.stage.as_str(),
            &book.run_id,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn write_codebook_file(path: &Path, book: &Codebook) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_codebook(file, book)
}

/// Reads a codebook. The `Quote` column wins over the first evidence quote,
/// so hand edits to the visible column take effect. A header-only file is an
/// empty codebook at `default_stage`.
pub fn read_codebook<R: Read>(input: R, origin: &str, default_stage: Stage) -> Result<Codebook> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |row: usize, message: String| Error::MalformedRow {
        path: origin.to_string(),
        row,
        message,
    };
    let header = r.headers().map_err(|e| bad(0, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CODE_HEADER {
        return Err(bad(0, format!("header must be `{}`", CODE_HEADER.join(","))));
    }
    let mut book = Codebook::new("", default_stage);
    for (i, record) in r.records().enumerate() {
        let row = i + 1;
        let rec = record.map_err(|e| bad(row, e.to_string()))?;
        let index = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| bad(row, format!("Index `{}`: {e}", &rec[0])))?;
        let mut evidence: Vec<Evidence> = if rec[4].trim().is_empty() {
            Vec::new()
        } else {
            serde_json::from_str(&rec[4]).map_err(|e| bad(row, format!("Evidence: {e}")))?
        };
        let quote = rec[3].to_string();
        match evidence.first_mut() {
            Some(first) => first.quote = quote,
            None if !quote.is_empty() => evidence.push(Evidence {
                quote,
                source_chunk: String::new(),
                status: super::model::QuoteStatus::Unverified,
            }),
            None => {}
        }
        let merged_from = rec[5]
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(row, format!("MergedFrom: {e}")))?;
        let stage = Stage::parse(&rec[6]).ok_or_else(|| bad(row, format!("unknown Stage `{}`", &rec[6])))?;
        if row == 1 {
            book.stage = stage;
            book.run_id = rec[7].to_string();
        } else if stage != book.stage {
            return Err(bad(row, format!("Stage `{stage}` differs from the first row's `{}`", book.stage)));
        }
        book.codes.push(Code {
            index,
            name: rec[1].to_string(),
            description: rec[2].to_string(),
            evidence,
            merged_from,
        });
    }
    Ok(book)
}

pub fn read_codebook_file(path: &Path, default_stage: Stage) -> Result<Codebook> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_codebook(file, &path.display().to_string(), default_stage)
}
