//! JSON-lines files of answered queries, one
//! `{"p_id", "q_id", "mu", "epsilon"}` object per line.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::user::FeedbackRecord;

pub fn read_dataset(reader: impl BufRead, source: &str) -> Result<Vec<FeedbackRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FeedbackRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<FeedbackRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), &path.display().to_string())
}

pub fn write_dataset(records: &[FeedbackRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn save_dataset(records: &[FeedbackRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(records, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
