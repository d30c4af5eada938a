//! Point-cloud CSV files: a `label,x1,...,xn` header and one row per point.
//! Guards are not stored; callers supply them.

use std::io::{Read, Write};
use std::path::Path;

use crate::datasets::SwissRoll;
use crate::error::{Error, Result};
use crate::geometry::{LabeledCloud, LabeledDataset, Point, PointCloud};

fn header(dim: usize) -> Vec<String> {
    std::iter::once("label".to_string())
        .chain((1..=dim).map(|i| format!("x{i}")))
        .collect()
}

/// Reads a dataset; rows sharing a label form one class, in order of first
/// appearance. Every class gets the given guard and no source ball.
pub fn read_dataset<R: Read>(reader: R, guard: f64) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let head = rdr.headers()?.clone();
    let dim = head.len().saturating_sub(1);
    if dim == 0 || &head[0] != "label" {
        return Err(Error::Document(
            "CSV header must be `label,x1,...,xn` with n ≥ 1".into(),
        ));
    }
    let mut order: Vec<i64> = Vec::new();
    let mut groups: Vec<Vec<Point>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        let label: i64 = rec[0]
            .parse()
            .map_err(|_| Error::Document(format!("row {row}: label `{}` is not an integer", &rec[0])))?;
        let coords = (1..=dim)
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| Error::Document(format!("row {row}: `{}` is not a number", &rec[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Point::new(coords)?;
        match order.iter().position(|&l| l == label) {
            Some(k) => groups[k].push(p),
            None => {
                order.push(label);
                groups.push(vec![p]);
            }
        }
    }
    let classes = order
        .into_iter()
        .zip(groups)
        .map(|(label, pts)| {
            Ok(LabeledCloud {
                label,
                cloud: PointCloud::new(pts, guard)?,
                source: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(classes)
}

pub fn read_dataset_file(path: &Path, guard: f64) -> Result<LabeledDataset> {
    read_dataset(std::fs::File::open(path)?, guard)
}

/// Writes every class in order. Coordinates use the shortest decimal form
/// that reads back to the same double.
pub fn write_dataset<W: Write>(writer: W, data: &LabeledDataset) -> Result<()> {
    let dim = data.dim().unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(dim))?;
    for class in &data.classes {
        for p in class.cloud.points() {
            let row = std::iter::once(class.label.to_string())
                .chain(p.coords().iter().map(|v| v.to_string()));
            w.write_record(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_file(path: &Path, data: &LabeledDataset) -> Result<()> {
    write_dataset(std::fs::File::create(path)?, data)
}

/// Sidecar `s,t,x,y,z` records for a Swiss-roll sample.
pub fn write_swiss_params<W: Write>(writer: W, roll: &SwissRoll) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["s", "t", "x", "y", "z"])?;
    for (&(s, t), p) in roll.params.iter().zip(roll.cloud.points()) {
        let c = p.coords();
        w.write_record([s, t, c[0], c[1], c[2]].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
