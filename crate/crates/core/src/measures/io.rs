//! CSV and JSON persistence. Floats are written with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabeledDataset, WeightedMeasure, OUTLIER_LABEL};
use crate::error::{Error, Result};

fn header(dim: usize, with_labels: bool) -> Vec<String> {
    let mut h: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    h.push("weight".into());
    if with_labels {
        h.push("label".into());
    }
    h
}

fn write_csv<W: Write>(out: W, m: &WeightedMeasure, labels: Option<&[u32]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::Io(e.into());
    w.write_record(header(m.dim(), labels.is_some())).map_err(map)?;
    let mut row = Vec::with_capacity(m.dim() + 2);
    for (i, a) in m.atoms().enumerate() {
        row.clear();
        row.extend(a.iter().map(|x| format!("{x:.16e}")));
        row.push(format!("{:.16e}", m.weights()[i]));
        if let Some(l) = labels {
            row.push(l[i].to_string());
        }
        w.write_record(&row).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

struct Parsed {
    measure: WeightedMeasure,
    labels: Option<Vec<u32>>,
}

fn parse_label(s: &str, line: usize) -> Result<u32> {
    if s == "-1" {
        return Ok(OUTLIER_LABEL);
    }
    s.parse::<u32>()
        .map_err(|_| Error::Parse { line, msg: format!("invalid label '{s}'") })
}

fn read_csv<R: Read>(input: R) -> Result<Parsed> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let hdr = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let names: Vec<&str> = hdr.iter().collect();
    let wpos = names
        .iter()
        .position(|h| *h == "weight")
        .ok_or(Error::Parse { line: 1, msg: "header lacks a 'weight' column".into() })?;
    let dim = wpos;
    let has_labels = match names.len() - wpos {
        1 => false,
        2 if names[wpos + 1] == "label" => true,
        _ => return Err(Error::Parse { line: 1, msg: "expected header x1..xd,weight[,label]".into() }),
    };
    if dim == 0 || (1..=dim).any(|i| names[i - 1] != format!("x{i}")) {
        return Err(Error::Parse { line: 1, msg: "expected header x1..xd,weight[,label]".into() });
    }
    let width = names.len();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("row {line} has {} fields, expected {width}", rec.len()),
            });
        }
        let num = |j: usize| -> Result<f64> {
            let v: f64 = rec[j]
                .parse()
                .map_err(|_| Error::Parse { line, msg: format!("invalid number '{}'", &rec[j]) })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse { line, msg: "non-finite value".into() })
            }
        };
        for j in 0..dim {
            coords.push(num(j)?);
        }
        let w = num(dim)?;
        if w <= 0.0 {
            return Err(Error::Parse { line, msg: "weights must be positive".into() });
        }
        weights.push(w);
        if has_labels {
            labels.push(parse_label(&rec[dim + 1], line)?);
        }
    }
    if weights.is_empty() {
        return Err(Error::Parse { line: 2, msg: "file has no atoms".into() });
    }
    Ok(Parsed {
        measure: WeightedMeasure::new(dim, coords, weights)?,
        labels: has_labels.then_some(labels),
    })
}

pub fn save_measure_csv(m: &WeightedMeasure, path: impl AsRef<Path>) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), m, None)
}

/// Loads a measure; a label column, if present, is ignored.
pub fn load_measure_csv(path: impl AsRef<Path>) -> Result<WeightedMeasure> {
    Ok(read_csv(BufReader::new(File::open(path)?))?.measure)
}

pub fn save_dataset_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), &ds.measure, Some(&ds.labels))
}

/// Loads a labeled dataset. Files without a label column load with every
/// atom in component 0.
pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let p = read_csv(BufReader::new(File::open(path)?))?;
    let n = p.measure.len();
    LabeledDataset::new(p.measure, p.labels.unwrap_or_else(|| vec![0; n]), path.display().to_string())
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(default)]
    labels: Vec<u32>,
    #[serde(default)]
    description: String,
}

pub fn save_dataset_json(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let doc = JsonDataset {
        dim: ds.measure.dim(),
        atoms: ds.measure.atoms().map(<[f64]>::to_vec).collect(),
        weights: ds.measure.weights().to_vec(),
        labels: ds.labels.clone(),
        description: ds.description.clone(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc).map_err(|e| Error::Io(e.into()))?;
    w.flush()?;
    Ok(())
}

pub fn load_dataset_json(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let doc: JsonDataset = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    let n = doc.weights.len();
    let mut coords = Vec::with_capacity(n * doc.dim);
    for a in &doc.atoms {
        if a.len() != doc.dim {
            return Err(Error::dims(doc.dim, a.len()));
        }
        coords.extend_from_slice(a);
    }
    let labels = if doc.labels.is_empty() { vec![0; n] } else { doc.labels };
    LabeledDataset::new(WeightedMeasure::new(doc.dim, coords, doc.weights)?, labels, doc.description)
}
