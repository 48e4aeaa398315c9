//! Text format: optional `#` comment lines, a header naming at least
//! `x,y,t,p`, then one decimal record per line. The optional `label` column
//! holds 0 (noise), 1 (signal) or nothing. A `pred` column, as written by the
//! filter command, is read back when present; other columns are ignored.

use std::fmt::Write;

use super::{Event, Label, Polarity};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct CsvContents {
    pub events: Vec<Event>,
    pub predictions: Option<Vec<Label>>,
}

struct Columns {
    x: usize,
    y: usize,
    t: usize,
    p: usize,
    label: Option<usize>,
    pred: Option<usize>,
    count: usize,
}

impl Columns {
    fn from_header(line: &str, line_no: usize) -> Result<Self> {
        let names: Vec<String> = line.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
        let find = |name: &str| names.iter().position(|n| n == name);
        let need = |name: &str| {
            find(name).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("header is missing column {name:?}"),
            })
        };
        Ok(Columns {
            x: need("x")?,
            y: need("y")?,
            t: need("t")?,
            p: need("p")?,
            label: find("label"),
            pred: find("pred"),
            count: names.len(),
        })
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name} value {field:?}"),
    })
}

fn parse_label(field: &str, line: usize) -> Result<Option<Label>> {
    match field.trim() {
        "" => Ok(None),
        "0" => Ok(Some(Label::Noise)),
        "1" => Ok(Some(Label::Signal)),
        other => Err(Error::Parse {
            line,
            message: format!("label must be 0, 1 or empty, got {other:?}"),
        }),
    }
}

pub fn read_csv(text: &str) -> Result<CsvContents> {
    let mut columns: Option<Columns> = None;
    let mut contents = CsvContents::default();
    let mut predictions = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(cols) = columns.as_ref() else {
            columns = Some(Columns::from_header(line, line_no)?);
            continue;
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.count {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", cols.count, fields.len()),
            });
        }
        let p: i8 = parse_field(fields[cols.p], "p", line_no)?;
        let polarity = match p {
            1 => Polarity::On,
            0 | -1 => Polarity::Off,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("polarity must be 0 or 1, got {p}"),
                })
            }
        };
        let label = match cols.label {
            Some(c) => parse_label(fields[c], line_no)?,
            None => None,
        };
        if let Some(c) = cols.pred {
            let pred = parse_label(fields[c], line_no)?.ok_or_else(|| Error::Parse {
                line: line_no,
                message: "empty pred field".into(),
            })?;
            predictions.push(pred);
        }
        contents.events.push(Event {
            x: parse_field(fields[cols.x], "x", line_no)?,
            y: parse_field(fields[cols.y], "y", line_no)?,
            t: parse_field(fields[cols.t], "t", line_no)?,
            polarity,
            label,
        });
    }
    if columns.as_ref().is_some_and(|c| c.pred.is_some()) {
        contents.predictions = Some(predictions);
    }
    Ok(contents)
}

/// Appends CSV text for `events` to `out`. The label column is written when
/// any event carries a label; `predictions` adds a trailing `pred` column.
pub fn write_csv(out: &mut String, events: &[Event], comment: Option<&str>, predictions: Option<&[Label]>) {
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let labeled = events.iter().any(|e| e.label.is_some());
    out.push_str("x,y,t,p");
    if labeled {
        out.push_str(",label");
    }
    if predictions.is_some() {
        out.push_str(",pred");
    }
    out.push('\n');
    for (i, e) in events.iter().enumerate() {
        let _ = write!(out, "{},{},{},{}", e.x, e.y, e.t, e.polarity.as_u8());
        if labeled {
            match e.label {
                Some(l) => {
                    let _ = write!(out, ",{}", l.as_u8());
                }
                None => out.push(','),
            }
        }
        if let Some(p) = predictions {
            let _ = write!(out, ",{}", p[i].as_u8());
        }
        out.push('\n');
    }
}
