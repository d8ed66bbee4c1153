use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::manifest::{FeatureManifest, FeatureSet};
use super::LABEL_COLUMN;
use crate::error::{Error, Result};
use crate::numkernel::Tensor;

/// Labeled feature matrix; label 1 marks a super-enhancer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Tensor,
    y: Vec<u8>,
    manifest: FeatureManifest,
}

impl Dataset {
    pub fn new(x: Tensor, y: Vec<u8>, manifest: FeatureManifest) -> Result<Self> {
        let (n, f) = x.dims2()?;
        if n != y.len() {
            return Err(Error::Shape(format!("{} rows but {} labels", n, y.len())));
        }
        if f != manifest.len() {
            return Err(Error::Shape(format!(
                "{} columns but the manifest lists {} features",
                f,
                manifest.len()
            )));
        }
        if let Some(i) = y.iter().position(|&l| l > 1) {
            return Err(Error::Contract(format!("label {} at row {} is not 0 or 1", y[i], i + 1)));
        }
        if !x.all_finite() {
            return Err(Error::Contract("feature matrix contains non-finite values".into()));
        }
        Ok(Dataset { x, y, manifest })
    }

    pub fn x(&self) -> &Tensor {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn manifest(&self) -> &FeatureManifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.manifest.len()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&l| l == 1).count();
        (self.y.len() - pos, pos)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            manifest: self.manifest.clone(),
        }
    }

    /// Keeps only the columns in `set`, preserving row order and labels.
    pub fn select_features(&self, set: FeatureSet) -> Result<Dataset> {
        let cols = self.manifest.indices(set);
        if cols.is_empty() {
            return Err(Error::Config(format!(
                "feature set '{}' has no columns under this manifest",
                set
            )));
        }
        Ok(Dataset {
            x: self.x.select_cols(&cols),
            y: self.y.clone(),
            manifest: self.manifest.restrict(&cols),
        })
    }

    pub(crate) fn with_x(&self, x: Tensor) -> Dataset {
        Dataset {
            x,
            y: self.y.clone(),
            manifest: self.manifest.clone(),
        }
    }

    /// SHA-256 over the column names, the raw feature bits and the labels.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for name in self.manifest.names() {
            h.update(name.as_bytes());
            h.update([0u8]);
        }
        h.update((self.len() as u64).to_le_bytes());
        for v in self.x.data() {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(&self.y);
        hex::encode(h.finalize())
    }

    /// Parses CSV whose header is the manifest's feature names followed by `label`.
    pub fn read_csv<R: Read>(reader: R, manifest: &FeatureManifest) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
            .clone();
        let expected: Vec<&str> = manifest.names().chain([LABEL_COLUMN]).collect();
        check_header(&header, &expected)?;

        let width = manifest.len();
        let mut data = Vec::new();
        let mut y = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                column: String::new(),
                message: e.to_string(),
            })?;
            if record.len() != expected.len() {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", expected.len(), record.len()),
                });
            }
            for (j, cell) in record.iter().take(width).enumerate() {
                let value: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: expected[j].to_string(),
                    message: format!("'{cell}' is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: expected[j].to_string(),
                        message: format!("non-finite value '{cell}'"),
                    });
                }
                data.push(value);
            }
            let label = match &record[width] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Parse {
                        row,
                        column: LABEL_COLUMN.to_string(),
                        message: format!("label '{other}' is not 0 or 1"),
                    })
                }
            };
            y.push(label);
        }
        let x = Tensor::new(vec![y.len(), width], data)?;
        Dataset::new(x, y, manifest.clone())
    }

    pub fn load_csv(path: &Path, manifest: &FeatureManifest) -> Result<Dataset> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::read_csv(std::io::BufReader::new(file), manifest)
    }

    /// Writes the canonical CSV form: shortest round-trip float formatting,
    /// `\n` line endings.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let csv_err = |e: csv::Error| Error::Contract(format!("CSV write failed: {e}"));
        w.write_record(self.manifest.names().chain([LABEL_COLUMN])).map_err(csv_err)?;
        for (row, label) in self.x.rows().zip(&self.y) {
            let fields = row.iter().map(|v| v.to_string()).chain([label.to_string()]);
            w.write_record(fields).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Contract(format!("CSV write failed: {e}")))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

fn check_header(header: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (pos, want) in expected.iter().enumerate() {
        match header.get(pos) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::Schema(format!(
                    "column {}: expected '{}', found '{}'",
                    pos + 1,
                    want,
                    got
                )))
            }
            None => {
                return Err(Error::Schema(format!(
                    "missing column '{}' at position {}",
                    want,
                    pos + 1
                )))
            }
        }
    }
    if let Some(extra) = header.get(expected.len()) {
        return Err(Error::Schema(format!(
            "unexpected extra column '{}' at position {}",
            extra,
            expected.len() + 1
        )));
    }
    Ok(())
}
