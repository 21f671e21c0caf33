//! CSV import/export: header `dim_0,…,dim_{M−1}[,label]`, one row per sample.
//!
//! The label column holds class indices; class names and provenance are not
//! carried (a single `csv` span is recorded on import).

use std::path::Path;

use super::matrix::{DimSpan, FeatureMatrix};
use crate::error::{Error, Result};

pub fn write_csv(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = (0..fm.n_dims()).map(|j| format!("dim_{j}")).collect();
    if fm.is_labeled() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..fm.n_samples() {
        let mut record: Vec<String> = fm.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(l) = fm.labels() {
            record.push(l.indices[i].to_string());
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    let labeled = header.iter().next_back() == Some("label");
    let m = header.len() - usize::from(labeled);
    for (j, h) in header.iter().take(m).enumerate() {
        if h != format!("dim_{j}") {
            return Err(Error::Parse(format!("header column {j} is '{h}', expected 'dim_{j}'")));
        }
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = line + 2;
        for (j, field) in record.iter().take(m).enumerate() {
            let v: f32 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}, column {j}: '{field}' is not a number")))?;
            values.push(v);
        }
        if labeled {
            let field = &record[m];
            let l: u32 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: label '{field}' is not a class index")))?;
            labels.push(l);
        }
        n += 1;
    }
    let fm = FeatureMatrix::new(n, m, values, vec![DimSpan::new("csv", 0..m)])?;
    if labeled {
        let n_classes = labels.iter().max().map_or(1, |&l| l + 1);
        fm.with_labels(labels, n_classes, Vec::new())
    } else {
        Ok(fm)
    }
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}
