//! Append-only sweep log: one JSON header line, then one line per cube.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Disposition, SweepParams};

const FORMAT: &str = "sigma-minmax-checkpoint/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub params: SweepParams,
    pub total_cubes: usize,
    pub selected: usize,
}

impl CheckpointHeader {
    pub fn new(params: &SweepParams, total_cubes: usize, selected: usize) -> Self {
        Self { format: FORMAT.to_string(), params: params.clone(), total_cubes, selected }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct Record {
    /// Position in the shuffled order.
    pub i: usize,
    pub d: Disposition,
    pub ns: u64,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("checkpoint {path} is corrupt at line {line}: {reason}; rerun with --restart to discard it")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("checkpoint {path} was written with different parameters; rerun with --restart to discard it")]
    Mismatch { path: PathBuf },
}

pub(crate) struct CheckpointWriter {
    file: File,
    path: PathBuf,
}

impl CheckpointWriter {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CheckpointError + '_ {
        move |source| CheckpointError::Io { path: path.to_path_buf(), source }
    }

    pub fn create(path: &Path, header: &CheckpointHeader) -> Result<Self, CheckpointError> {
        let mut file = File::create(path).map_err(Self::io(path))?;
        let line = serde_json::to_string(header).expect("header serializes");
        writeln!(file, "{line}").map_err(Self::io(path))?;
        file.sync_data().map_err(Self::io(path))?;
        Ok(Self { file, path: path.to_path_buf() })
    }

    /// Opens an existing log, returning the records it holds. A final line
    /// without its newline is a torn write and is cut off; any other
    /// unparseable line is corruption.
    pub fn resume(path: &Path, header: &CheckpointHeader) -> Result<(Self, Vec<Record>), CheckpointError> {
        let corrupt = |line: usize, reason: String| CheckpointError::Corrupt { path: path.to_path_buf(), line, reason };
        let mut file = OpenOptions::new().read(true).write(true).open(path).map_err(Self::io(path))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(Self::io(path))?;
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        if complete < bytes.len() {
            file.set_len(complete as u64).map_err(Self::io(path))?;
        }
        let mut lines = BufReader::new(&bytes[..complete]).lines();
        let first = match lines.next() {
            Some(Ok(l)) => l,
            _ => return Err(corrupt(1, "missing header".into())),
        };
        let found: CheckpointHeader =
            serde_json::from_str(&first).map_err(|e| corrupt(1, format!("bad header: {e}")))?;
        if found.format != FORMAT {
            return Err(corrupt(1, format!("unknown format `{}`", found.format)));
        }
        if &found != header {
            return Err(CheckpointError::Mismatch { path: path.to_path_buf() });
        }
        let mut seen = vec![false; header.selected];
        let mut records = Vec::new();
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            let line = line.map_err(|e| corrupt(line_no, e.to_string()))?;
            let rec: Record = serde_json::from_str(&line).map_err(|e| corrupt(line_no, e.to_string()))?;
            if rec.i >= header.selected {
                return Err(corrupt(line_no, format!("cube position {} out of range", rec.i)));
            }
            if std::mem::replace(&mut seen[rec.i], true) {
                return Err(corrupt(line_no, format!("cube position {} recorded twice", rec.i)));
            }
            records.push(rec);
        }
        file.seek(SeekFrom::End(0)).map_err(Self::io(path))?;
        Ok((Self { file, path: path.to_path_buf() }, records))
    }

    pub fn append(&mut self, rec: &Record) -> Result<(), CheckpointError> {
        let line = serde_json::to_string(rec).expect("record serializes");
        writeln!(self.file, "{line}").map_err(Self::io(&self.path))
    }

    pub fn sync(&mut self) -> Result<(), CheckpointError> {
        self.file.sync_data().map_err(Self::io(&self.path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> CheckpointHeader {
        CheckpointHeader::new(&SweepParams::default(), 10, 4)
    }

    #[test]
    fn round_trip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.jsonl");
        let mut w = CheckpointWriter::create(&path, &header()).unwrap();
        w.append(&Record { i: 2, d: Disposition::S2(0.05), ns: 7 }).unwrap();
        w.append(&Record { i: 0, d: Disposition::S1, ns: 3 }).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "{{\"i\": 1, \"d\": \"S").unwrap();
        drop(f);
        let (mut w, recs) = CheckpointWriter::resume(&path, &header()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].d, Disposition::S2(0.05));
        w.append(&Record { i: 1, d: Disposition::S3, ns: 1 }).unwrap();
        drop(w);
        let (_, recs) = CheckpointWriter::resume(&path, &header()).unwrap();
        assert_eq!(recs.len(), 3);
    }

    #[test]
    fn refuses_corruption_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.jsonl");
        let w = CheckpointWriter::create(&path, &header()).unwrap();
        drop(w);
        let other = CheckpointHeader::new(&SweepParams { seed: 1, ..SweepParams::default() }, 10, 4);
        assert!(matches!(CheckpointWriter::resume(&path, &other), Err(CheckpointError::Mismatch { .. })));

        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        writeln!(f, "garbage").unwrap();
        drop(f);
        assert!(matches!(CheckpointWriter::resume(&path, &header()), Err(CheckpointError::Corrupt { line: 2, .. })));

        let w = CheckpointWriter::create(&path, &header()).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        writeln!(f, "{{\"i\":0,\"d\":\"S1\",\"ns\":1}}").unwrap();
        writeln!(f, "{{\"i\":0,\"d\":\"S1\",\"ns\":1}}").unwrap();
        drop(f);
        assert!(matches!(CheckpointWriter::resume(&path, &header()), Err(CheckpointError::Corrupt { line: 3, .. })));
    }
}
