use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Trim};

use crate::dataset::{Dataset, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name; requires a header row.
    Name(String),
    /// 0-based column index.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub header: bool,
    pub label_column: Option<LabelColumn>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: true,
            label_column: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Unlabeled(Dataset),
    Labeled(LabeledDataset),
}

impl Loaded {
    pub fn data(&self) -> &Dataset {
        match self {
            Loaded::Unlabeled(d) => d,
            Loaded::Labeled(l) => &l.data,
        }
    }

    pub fn into_labeled(self) -> Result<LabeledDataset> {
        match self {
            Loaded::Labeled(l) => Ok(l),
            Loaded::Unlabeled(_) => Err(Error::invalid("dataset has no label column")),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Loaded> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(File::open(path)?, schema, &name)
}

/// Reads numeric rows in file order. Errors carry 1-based line and column
/// numbers of the offending cell.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, name: &str) -> Result<Loaded> {
    let mut rdr = ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.header)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);

    let mut width = None;
    let label_idx = match &schema.label_column {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Name(label)) => {
            if !schema.header {
                return Err(Error::invalid(format!(
                    "label column `{label}` named but the file has no header"
                )));
            }
            let headers = rdr.headers()?;
            let idx = headers.iter().position(|h| h == label).ok_or_else(|| {
                Error::invalid(format!("label column `{label}` not in header"))
            })?;
            Some(idx)
        }
    };
    if schema.header {
        let w = rdr.headers()?.len();
        if w > 0 {
            width = Some(w);
        }
    }
    if let (Some(w), Some(i)) = (width, label_idx) {
        if i >= w {
            return Err(Error::invalid(format!("label column {i} beyond {w} columns")));
        }
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        if let Some(i) = label_idx {
            if i >= w {
                return Err(Error::invalid(format!("label column {i} beyond {w} columns")));
            }
        }
        for (c, cell) in record.iter().enumerate() {
            let at = |message: String| Error::Parse {
                row: line,
                column: c + 1,
                message,
            };
            if Some(c) == label_idx {
                let label = match cell {
                    "0" => false,
                    "1" => true,
                    other => match other.parse::<f64>() {
                        Ok(0.0) => false,
                        Ok(1.0) => true,
                        _ => return Err(at(format!("label `{other}` is not 0 or 1"))),
                    },
                };
                labels.push(label);
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| at(format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(at(format!("non-finite value `{cell}`")));
            }
            values.push(v);
        }
    }

    let has_label = label_idx.is_some();
    let d = width.map_or(0, |w| w - usize::from(has_label));
    let data = if values.is_empty() {
        Dataset::empty(d)
    } else {
        Dataset::new(values, d)?
    };
    Ok(if has_label {
        Loaded::Labeled(LabeledDataset::new(name, data, labels)?)
    } else {
        Loaded::Unlabeled(data)
    })
}

/// Writes `x1..xd,label` with a header. Values use the shortest decimal
/// form that parses back to the same bits.
pub fn write_labeled_csv<W: Write>(mut w: W, dataset: &LabeledDataset) -> Result<()> {
    let d = dataset.data.dim();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(w, "{},label", header.join(","))?;
    for (row, &label) in dataset.data.rows().zip(&dataset.labels) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{}", u8::from(label))?;
    }
    Ok(())
}
