//! CSV input and atomic output.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use descore::model::Dataset;
use nalgebra::{DMatrix, DVector};

use crate::CliError;

/// A column given as a header name or a 0-based position in the file.
fn resolve_column(headers: &[String], spec: &str) -> Result<usize, CliError> {
    if let Some(k) = headers.iter().position(|h| h == spec) {
        return Ok(k);
    }
    match spec.parse::<usize>() {
        Ok(k) if k < headers.len() => Ok(k),
        Ok(k) => Err(CliError::Usage(format!("column index {k} out of range ({} columns)", headers.len()))),
        Err(_) => Err(CliError::Usage(format!("no column named '{spec}'"))),
    }
}

/// Reads a headered numeric CSV. Every column other than the response becomes
/// a covariate, in file order; `interest` names the tested covariates.
pub fn read_dataset(path: &Path, response: &str, interest: &[String]) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let resp = resolve_column(&headers, response)?;
    let mut interest_file = Vec::with_capacity(interest.len());
    for spec in interest {
        let k = resolve_column(&headers, spec)?;
        if k == resp {
            return Err(CliError::Usage(format!("interest column '{}' is the response", headers[k])));
        }
        if interest_file.contains(&k) {
            return Err(CliError::Usage(format!("interest column '{}' given twice", headers[k])));
        }
        interest_file.push(k);
    }
    if interest_file.is_empty() {
        return Err(CliError::Usage("at least one interest column is required".into()));
    }

    let mut values: Vec<f64> = Vec::new();
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!("row {}, column '{}': non-numeric value '{cell}'", r + 1, headers[c]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("row {}, column '{}': non-finite value '{cell}'", r + 1, headers[c])));
            }
            values.push(v);
        }
        n += 1;
    }
    if n < 2 {
        return Err(CliError::Data(format!("{}: need at least 2 data rows, found {n}", path.display())));
    }
    let width = headers.len();
    let y = DVector::from_fn(n, |i, _| values[i * width + resp]);
    let cols: Vec<usize> = (0..width).filter(|&c| c != resp).collect();
    let q = DMatrix::from_fn(n, cols.len(), |i, j| values[i * width + cols[j]]);
    let to_q = |k: usize| if k < resp { k } else { k - 1 };
    Dataset::new(y, q, interest_file.into_iter().map(to_q).collect()).map_err(|e| CliError::Data(e.to_string()))
}

/// Writes `y` then the columns of `Q` (`x0, x1, …`) with round-trip float formatting.
pub fn write_dataset_csv<W: Write>(out: W, data: &Dataset) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_string()];
    header.extend((0..data.d()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row = vec![data.y()[i].to_string()];
        row.extend(data.q().row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when `path` is `None`. Nothing is left behind if `fill` fails.
pub fn write_output<F>(path: Option<&Path>, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock).map_err(io_err)?;
            lock.flush().map_err(io_err)
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
            fill(tmp.as_file_mut()).map_err(io_err)?;
            tmp.as_file_mut().sync_all().map_err(io_err)?;
            tmp.persist(p).map_err(|e| io_err(e.error))?;
            Ok(())
        }
    }
}
