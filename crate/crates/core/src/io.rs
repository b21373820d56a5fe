//! Text file formats.
//!
//! * curve JSON: `{"n": 256, "points": [[x, y], ...]}`
//! * path JSON: `{"m": 16, "n": 128, "frames": [[[x, y], ...], ...]}`
//! * field CSV: one row per grid point, `theta,x,y` for tangent fields and
//!   `theta,value` for scalar fields, with a header row
//! * geodesic diagnostics CSV: `iteration,energy,max_horizontality_residual,step_size`

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::field::{theta_grid, ScalarField, TangentField, Vec2};
use crate::path::{CurvePath, IterationRecord};

#[derive(Debug, Serialize, Deserialize)]
struct CurveFile {
    n: usize,
    points: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathFile {
    m: usize,
    n: usize,
    frames: Vec<Vec<[f64; 2]>>,
}

fn to_pairs(points: &[Vec2]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

fn from_pairs(points: &[[f64; 2]]) -> Vec<Vec2> {
    points.iter().map(|p| Vec2::new(p[0], p[1])).collect()
}

pub fn read_curve(reader: impl Read) -> Result<DiscreteCurve> {
    let file: CurveFile = serde_json::from_reader(reader)?;
    if file.points.len() != file.n {
        return Err(Error::Parse(format!(
            "curve declares n = {} but lists {} points",
            file.n,
            file.points.len()
        )));
    }
    DiscreteCurve::new(from_pairs(&file.points))
}

pub fn write_curve(curve: &DiscreteCurve, writer: impl Write) -> Result<()> {
    let file = CurveFile {
        n: curve.n(),
        points: to_pairs(curve.points()),
    };
    serde_json::to_writer(writer, &file)?;
    Ok(())
}

pub fn read_path(reader: impl Read) -> Result<CurvePath> {
    let file: PathFile = serde_json::from_reader(reader)?;
    if file.frames.len() != file.m {
        return Err(Error::Parse(format!(
            "path declares m = {} but lists {} frames",
            file.m,
            file.frames.len()
        )));
    }
    let curves = file
        .frames
        .iter()
        .map(|frame| {
            if frame.len() != file.n {
                return Err(Error::Parse(format!(
                    "path declares n = {} but a frame has {} points",
                    file.n,
                    frame.len()
                )));
            }
            DiscreteCurve::new(from_pairs(frame))
        })
        .collect::<Result<Vec<_>>>()?;
    CurvePath::new(curves)
}

pub fn write_path(path: &CurvePath, writer: impl Write) -> Result<()> {
    let file = PathFile {
        m: path.m(),
        n: path.n(),
        frames: path.curves().iter().map(|c| to_pairs(c.points())).collect(),
    };
    serde_json::to_writer(writer, &file)?;
    Ok(())
}

fn records(reader: impl Read, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(values) => values,
            // a non-numeric first row is a header
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", line + 1))),
        };
        if values.len() != columns {
            return Err(Error::Parse(format!(
                "row {}: expected {columns} columns, found {}",
                line + 1,
                values.len()
            )));
        }
        rows.push(values);
    }
    Ok(rows)
}

/// Reads `theta,x,y` rows; the theta column is informational.
pub fn read_tangent_field(reader: impl Read) -> Result<TangentField> {
    Ok(TangentField::new(
        records(reader, 3)?
            .iter()
            .map(|r| Vec2::new(r[1], r[2]))
            .collect(),
    ))
}

pub fn write_tangent_field(field: &TangentField, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["theta", "x", "y"])?;
    for (t, v) in theta_grid(field.len()).iter().zip(field.values()) {
        wtr.write_record([format!("{t:e}"), format!("{:e}", v.x), format!("{:e}", v.y)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scalar_field(reader: impl Read) -> Result<ScalarField> {
    Ok(ScalarField::new(
        records(reader, 2)?.iter().map(|r| r[1]).collect(),
    ))
}

pub fn write_scalar_field(field: &ScalarField, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["theta", "value"])?;
    for (t, v) in theta_grid(field.len()).iter().zip(field.values()) {
        wtr.write_record([format!("{t:e}"), format!("{v:e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_diagnostics(history: &[IterationRecord], writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "iteration",
        "energy",
        "max_horizontality_residual",
        "step_size",
    ])?;
    for r in history {
        wtr.write_record([
            r.iteration.to_string(),
            format!("{:e}", r.energy),
            format!("{:e}", r.max_horizontality_residual),
            format!("{:e}", r.step_size),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
