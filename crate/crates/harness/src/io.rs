//! File formats: JSONL bags, set-function and model JSON, trace CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use nonmodular::model::{LinearModel, Sample};
use nonmodular::setfn::SetFunctionFile;
use nonmodular::trainer::TrainTrace;
use nonmodular::SetFn;

use crate::error::{HResult, HarnessError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub x: Vec<f64>,
    pub y: i8,
}

/// One JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BagRecord {
    pub bag_id: String,
    pub items: Vec<ItemRecord>,
}

impl From<&Sample<f64>> for BagRecord {
    fn from(s: &Sample<f64>) -> Self {
        Self {
            bag_id: s.bag_id.clone(),
            items: s.x.iter().zip(&s.y).map(|(x, &y)| ItemRecord { x: x.clone(), y }).collect(),
        }
    }
}

fn create(path: &Path) -> HResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| HarnessError::io(path, e))?))
}

pub fn write_jsonl(path: &Path, data: &[Sample<f64>]) -> HResult<()> {
    let mut w = create(path)?;
    for s in data {
        serde_json::to_writer(&mut w, &BagRecord::from(s))?;
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Parses JSONL bags. Blank lines are skipped; any malformed line is
/// reported with its 1-based line number. Feature dimensions must agree
/// across the whole file.
pub fn parse_jsonl<R: BufRead>(reader: R, source: &str) -> HResult<Vec<Sample<f64>>> {
    let mut out: Vec<Sample<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| HarnessError::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| HarnessError::Validation(format!("{source}:{lineno}: {msg}"));
        let rec: BagRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        let (x, y) = rec.items.into_iter().map(|it| (it.x, it.y)).unzip();
        let s = Sample::new(rec.bag_id, x, y).map_err(|e| at(e.to_string()))?;
        if let Some(first) = out.first() {
            if first.dim() != s.dim() {
                return Err(at(format!("feature dimension {} differs from {} earlier in the file", s.dim(), first.dim())));
            }
        }
        out.push(s);
    }
    if out.is_empty() {
        log::warn!("{source}: no bags found");
    }
    Ok(out)
}

/// Reads a JSONL dataset from disk.
pub fn ingest(path: &Path) -> HResult<Vec<Sample<f64>>> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_jsonl(BufReader::new(f), &path.display().to_string())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> HResult<T> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|e| HarnessError::Validation(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> HResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_set_function(path: &Path) -> HResult<SetFn> {
    let file: SetFunctionFile = read_json(path)?;
    Ok(file.into_set_function()?)
}

pub fn read_model(path: &Path) -> HResult<LinearModel<f64>> {
    let m: LinearModel<f64> = read_json(path)?;
    let expected = m.block() * m.p.unwrap_or(1);
    if m.w.len() != expected {
        return Err(HarnessError::Validation(format!(
            "{}: model has {} weights, layout needs {expected}",
            path.display(),
            m.w.len()
        )));
    }
    Ok(m)
}

/// Writes the trainer trace with columns
/// `iter,master_obj,primal_obj,gap,max_violation,planes,seconds`.
pub fn write_trace(path: &Path, trace: &TrainTrace) -> HResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["iter", "master_obj", "primal_obj", "gap", "max_violation", "planes", "seconds"])?;
    for r in &trace.rows {
        w.write_record([
            r.iter.to_string(),
            r.master_obj.to_string(),
            r.primal_obj.to_string(),
            r.gap.to_string(),
            r.max_violation.to_string(),
            r.planes.to_string(),
            r.seconds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_numbers_in_errors() {
        let text = "{\"bag_id\":\"a\",\"items\":[{\"x\":[1.0],\"y\":1}]}\n\nnot json\n";
        let err = parse_jsonl(text.as_bytes(), "mem").unwrap_err().to_string();
        assert!(err.contains("mem:3"), "{err}");
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let text = "{\"bag_id\":\"a\",\"items\":[{\"x\":[1.0],\"y\":1}]}\n{\"bag_id\":\"b\",\"items\":[{\"x\":[1.0,2.0],\"y\":-1}]}\n";
        let err = parse_jsonl(text.as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, HarnessError::Validation(_)));
        assert_eq!(err.exit_code(), 2);
        let within = "{\"bag_id\":\"a\",\"items\":[{\"x\":[1.0],\"y\":1},{\"x\":[1.0,2.0],\"y\":1}]}\n";
        assert!(parse_jsonl(within.as_bytes(), "mem").is_err());
    }

    #[test]
    fn bad_label_rejected() {
        let text = "{\"bag_id\":\"a\",\"items\":[{\"x\":[1.0],\"y\":0}]}\n";
        assert!(parse_jsonl(text.as_bytes(), "mem").is_err());
    }

    #[test]
    fn empty_input_is_empty_dataset() {
        assert!(parse_jsonl("".as_bytes(), "mem").unwrap().is_empty());
    }
}
