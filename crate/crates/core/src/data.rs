//! Domain types for dissolved-gas records, normalization statistics, the
//! within-standard-deviation accuracy criterion, and CSV file I/O.
//!
//! All operations here are pure functions of their inputs and are safe to
//! call from multiple threads.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Number of gas variables in a standard record.
pub const NUM_VARS: usize = 10;

/// Conventional DGA variable names, in column order.
pub const DEFAULT_SCHEMA: [&str; NUM_VARS] = [
    "H2", "CH4", "C2H6", "C2H4", "C2H2", "CO", "CO2", "O2", "N2", "TDCG",
];

/// Lower end of the normalized range. Sigmoid outputs cannot reach 0 or 1,
/// so training targets are kept inside (0, 1).
pub const NORM_LO: f64 = 0.1;
/// Upper end of the normalized range.
pub const NORM_HI: f64 = 0.9;

/// Bushing condition label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Acceptable,
    Unusable,
}

impl Label {
    /// Lower-case token used in CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Acceptable => "acceptable",
            Label::Unusable => "unusable",
        }
    }

    /// Parses the CSV token; empty means no label.
    pub fn parse(s: &str) -> std::result::Result<Option<Label>, String> {
        match s {
            "" => Ok(None),
            "acceptable" => Ok(Some(Label::Acceptable)),
            "unusable" => Ok(Some(Label::Unusable)),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One bushing observation: gas concentrations in ppm plus a missingness
/// mask (`true` = missing). The value stored at a masked position is
/// ignored by every consumer; it may be anything, including NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GasRecord {
    pub id: String,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub label: Option<Label>,
}

impl GasRecord {
    /// Builds a complete (nothing missing) record.
    pub fn complete(id: impl Into<String>, values: Vec<f64>, label: Option<Label>) -> Self {
        let mask = vec![false; values.len()];
        GasRecord {
            id: id.into(),
            values,
            mask,
            label,
        }
    }

    pub fn width(&self) -> usize {
        self.values.len()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| !m)
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Positions flagged missing, in ascending order.
    pub fn missing_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

/// Per-variable summary statistics in raw ppm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
}

/// Per-variable min/max/mean/std used for scaling and the within-std
/// accuracy criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub names: Vec<String>,
    pub vars: Vec<VarStats>,
}

impl NormStats {
    pub fn width(&self) -> usize {
        self.vars.len()
    }

    fn check_nondegenerate(&self, var: usize) -> Result<f64> {
        let s = &self.vars[var];
        let range = s.max - s.min;
        if !(range > 0.0) {
            return Err(Error::DegenerateVariable {
                name: self.names[var].clone(),
                value: s.min,
            });
        }
        Ok(range)
    }

    /// Maps a raw value affinely so that min -> 0.1 and max -> 0.9.
    /// Out-of-range raw values extrapolate linearly.
    pub fn normalize_value(&self, var: usize, raw: f64) -> Result<f64> {
        let range = self.check_nondegenerate(var)?;
        let s = &self.vars[var];
        Ok(NORM_LO + (NORM_HI - NORM_LO) * (raw - s.min) / range)
    }

    /// Exact affine inverse of [`NormStats::normalize_value`].
    pub fn denormalize_value(&self, var: usize, norm: f64) -> Result<f64> {
        let range = self.check_nondegenerate(var)?;
        let s = &self.vars[var];
        Ok(s.min + (norm - NORM_LO) / (NORM_HI - NORM_LO) * range)
    }
}

/// Ordered collection of records sharing one variable schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Vec<String>,
    pub records: Vec<GasRecord>,
}

impl Dataset {
    /// Builds a dataset after checking that every record matches the schema width.
    pub fn new(schema: Vec<String>, records: Vec<GasRecord>) -> Result<Self> {
        let width = schema.len();
        for r in &records {
            if r.width() != width {
                return Err(Error::DimensionMismatch {
                    what: "record width vs schema",
                    expected: width,
                    found: r.width(),
                });
            }
            if r.mask.len() != width {
                return Err(Error::DimensionMismatch {
                    what: "record mask width vs schema",
                    expected: width,
                    found: r.mask.len(),
                });
            }
        }
        Ok(Dataset { schema, records })
    }

    /// The conventional 10-variable schema.
    pub fn default_schema() -> Vec<String> {
        DEFAULT_SCHEMA.iter().map(|s| s.to_string()).collect()
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Computes per-variable min/max/mean/sample-std over non-missing entries.
///
/// Missing cells are skipped entirely; they do not bias the statistics.
/// Fails with [`Error::TooFewSamples`] when a variable has fewer than two
/// observed entries and [`Error::DegenerateVariable`] when max == min.
pub fn fit_normalizer(dataset: &Dataset) -> Result<NormStats> {
    let width = dataset.width();
    let mut vars = Vec::with_capacity(width);
    for j in 0..width {
        let mut observed: Vec<f64> = dataset
            .records
            .iter()
            .filter(|r| !r.mask[j])
            .map(|r| r.values[j])
            .collect();
        if observed.len() < 2 {
            return Err(Error::TooFewSamples {
                name: dataset.schema[j].clone(),
                count: observed.len(),
            });
        }
        // fixed summation order makes the statistics exactly
        // permutation-invariant over records
        observed.sort_by(f64::total_cmp);
        let min = observed[0];
        let max = observed[observed.len() - 1];
        let sum: f64 = observed.iter().sum();
        if !(max > min) {
            return Err(Error::DegenerateVariable {
                name: dataset.schema[j].clone(),
                value: min,
            });
        }
        let n = observed.len() as f64;
        let mean = sum / n;
        let ss: f64 = observed.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let std = (ss / (n - 1.0)).sqrt();
        vars.push(VarStats {
            min,
            max,
            mean,
            std,
        });
    }
    Ok(NormStats {
        names: dataset.schema.clone(),
        vars,
    })
}

/// Maps each present value of `record` into the normalized [0.1, 0.9] range.
///
/// Values at masked positions are copied through untouched (they are ignored
/// by all consumers, and preserving them keeps NaN sentinels intact).
pub fn normalize(record: &GasRecord, stats: &NormStats) -> Result<GasRecord> {
    map_record(record, stats, NormStats::normalize_value)
}

/// Exact affine inverse of [`normalize`].
pub fn denormalize(record: &GasRecord, stats: &NormStats) -> Result<GasRecord> {
    map_record(record, stats, NormStats::denormalize_value)
}

fn map_record(
    record: &GasRecord,
    stats: &NormStats,
    f: impl Fn(&NormStats, usize, f64) -> Result<f64>,
) -> Result<GasRecord> {
    if record.width() != stats.width() {
        return Err(Error::DimensionMismatch {
            what: "record width vs stats",
            expected: stats.width(),
            found: record.width(),
        });
    }
    let mut out = record.clone();
    for j in 0..record.width() {
        if !record.mask[j] {
            out.values[j] = f(stats, j, record.values[j])?;
        } else {
            // keep stats validation errors even when the slot is skipped
            stats.check_nondegenerate(j)?;
        }
    }
    Ok(out)
}

/// The accuracy criterion for one imputed value: correct iff it is
/// nonnegative and within one standard deviation of the true value.
pub fn within_std_correct(imputed_raw: f64, true_raw: f64, var_std: f64) -> bool {
    debug_assert!(var_std > 0.0, "within_std_correct needs var_std > 0");
    imputed_raw >= 0.0 && (imputed_raw - true_raw).abs() <= var_std
}

const LABEL_COL: usize = NUM_VARS + 1;
const TOTAL_COLS: usize = NUM_VARS + 2;

/// Reads a dataset from CSV.
///
/// Expected layout: header `id,<10 variable names>,label`, then one record
/// per row. An empty value cell marks the variable missing (its stored value
/// becomes 0.0). Labels are `acceptable`, `unusable`, or empty.
pub fn read_records(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Schema {
                row: 1,
                expected: TOTAL_COLS,
                found: 0,
            })
        }
    };
    let head_fields: Vec<&str> = header.split(',').collect();
    if head_fields.len() != TOTAL_COLS {
        return Err(Error::Schema {
            row: 1,
            expected: TOTAL_COLS,
            found: head_fields.len(),
        });
    }
    if head_fields[0] != "id" || head_fields[LABEL_COL] != "label" {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            msg: format!(
                "header must start with \"id\" and end with \"label\", got {:?} .. {:?}",
                head_fields[0], head_fields[LABEL_COL]
            ),
        });
    }
    let schema: Vec<String> = head_fields[1..=NUM_VARS].iter().map(|s| s.to_string()).collect();

    let mut records = Vec::new();
    for (line_ix, line) in lines.enumerate() {
        let row = line_ix + 2; // 1-based, after the header
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != TOTAL_COLS {
            return Err(Error::Schema {
                row,
                expected: TOTAL_COLS,
                found: fields.len(),
            });
        }
        let id = fields[0].to_string();
        let mut values = vec![0.0; NUM_VARS];
        let mut mask = vec![false; NUM_VARS];
        for j in 0..NUM_VARS {
            let cell = fields[j + 1];
            if cell.is_empty() {
                mask[j] = true;
                continue;
            }
            let v: f64 = cell.parse().map_err(|e| Error::Parse {
                row,
                col: j + 2,
                msg: format!("{e}: {cell:?}"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse {
                    row,
                    col: j + 2,
                    msg: format!("value must be finite and nonnegative, got {cell:?}"),
                });
            }
            values[j] = v;
        }
        let label = Label::parse(fields[LABEL_COL]).map_err(|msg| Error::Parse {
            row,
            col: TOTAL_COLS,
            msg,
        })?;
        records.push(GasRecord {
            id,
            values,
            mask,
            label,
        });
    }
    Dataset::new(schema, records)
}

/// Writes a dataset as CSV (UTF-8, LF line endings, no quoting).
///
/// Masked cells are written empty, so ground truth stored under a mask does
/// not leak into files. Present values use the shortest decimal that parses
/// back to the identical f64, making write-then-read exact on them.
pub fn write_records(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    if dataset.width() != NUM_VARS {
        return Err(Error::DimensionMismatch {
            what: "dataset width",
            expected: NUM_VARS,
            found: dataset.width(),
        });
    }
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    writeln!(w, "id,{},label", dataset.schema.join(","))?;
    for r in &dataset.records {
        write!(w, "{}", r.id)?;
        for j in 0..NUM_VARS {
            if r.mask[j] {
                write!(w, ",")?;
            } else {
                write!(w, ",{}", r.values[j])?;
            }
        }
        match r.label {
            Some(l) => writeln!(w, ",{}", l.as_str())?,
            None => writeln!(w, ",")?,
        }
    }
    w.flush()?;
    Ok(())
}
