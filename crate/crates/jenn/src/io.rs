//! CSV readers and writers.
//!
//! Dataset files are flat CSV with a header row: input columns
//! `x1..x{nx}`, output columns `y1..y{ny}`, and optional Jacobian
//! columns `dy{k}_dx{j}`. Jacobian columns may cover any subset of the
//! partials; missing ones get a zero gamma weight so they carry no
//! training signal. Floats are written with Rust's shortest
//! round-trip formatting, so a write/read cycle reproduces every value
//! bitwise.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Array3};

use crate::dataset::Dataset;
use crate::error::{JennError, Result};
use crate::sbo::OptTrace;

/// Column roles recognized in a dataset header.
enum Column {
    Input(usize),
    Output(usize),
    Partial { output: usize, input: usize },
}

fn parse_header_field(field: &str) -> Result<Column> {
    let field = field.trim();
    let index_after = |prefix: &str| -> Option<usize> {
        field
            .strip_prefix(prefix)
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&i| i >= 1)
    };
    if let Some(rest) = field.strip_prefix("dy") {
        if let Some((k, j)) = rest.split_once("_dx") {
            match (k.parse::<usize>(), j.parse::<usize>()) {
                (Ok(k), Ok(j)) if k >= 1 && j >= 1 => {
                    return Ok(Column::Partial { output: k - 1, input: j - 1 });
                }
                _ => {}
            }
        }
    } else if let Some(i) = index_after("x") {
        return Ok(Column::Input(i - 1));
    } else if let Some(i) = index_after("y") {
        return Ok(Column::Output(i - 1));
    }
    Err(JennError::Parse(format!(
        "unrecognized column \"{field}\" (expected x<i>, y<k>, or dy<k>_dx<j>)"
    )))
}

/// Parsed header: field position of every recognized column.
struct Header {
    n_x: usize,
    n_y: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    partials: Vec<((usize, usize), usize)>,
}

fn parse_header(fields: &csv::StringRecord, path: &Path) -> Result<Header> {
    let mut inputs = HashMap::new();
    let mut outputs = HashMap::new();
    let mut partials = HashMap::new();
    for (pos, field) in fields.iter().enumerate() {
        let col = parse_header_field(field).map_err(|e| {
            JennError::Parse(format!("{}: line 1: {e}", path.display()))
        })?;
        let clash = match col {
            Column::Input(i) => inputs.insert(i, pos).is_some(),
            Column::Output(k) => outputs.insert(k, pos).is_some(),
            Column::Partial { output, input } => {
                partials.insert((output, input), pos).is_some()
            }
        };
        if clash {
            return Err(JennError::Parse(format!(
                "{}: line 1: duplicate column \"{}\"",
                path.display(),
                field.trim()
            )));
        }
    }
    let n_x = inputs.len();
    let n_y = outputs.len();
    if n_x == 0 {
        return Err(JennError::Parse(format!(
            "{}: no input columns (x1, x2, ...)",
            path.display()
        )));
    }
    let contiguous = |map: &HashMap<usize, usize>, prefix: &str| -> Result<Vec<usize>> {
        (0..map.len())
            .map(|i| {
                map.get(&i).copied().ok_or_else(|| {
                    JennError::Parse(format!(
                        "{}: column {prefix}{} missing; indices must start at 1 and be contiguous",
                        path.display(),
                        i + 1
                    ))
                })
            })
            .collect()
    };
    let inputs = contiguous(&inputs, "x")?;
    let outputs = contiguous(&outputs, "y")?;
    for &(k, j) in partials.keys() {
        if k >= n_y.max(1) || j >= n_x {
            return Err(JennError::Parse(format!(
                "{}: column dy{}_dx{} references a missing x/y column",
                path.display(),
                k + 1,
                j + 1
            )));
        }
    }
    let mut partials: Vec<_> = partials.into_iter().collect();
    partials.sort_unstable();
    Ok(Header { n_x, n_y, inputs, outputs, partials })
}

fn parse_cell(field: &str, path: &Path, line: u64, name: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        JennError::Parse(format!(
            "{}: line {line}: cannot parse \"{}\" in column {name} as a number",
            path.display(),
            field.trim()
        ))
    })
}

fn read_records(path: &Path) -> Result<(Header, Vec<(u64, csv::StringRecord)>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                JennError::Parse(format!("cannot open {}: {e}", path.display()))
            }
            _ => JennError::Csv(e),
        })?;
    let header = parse_header(reader.headers()?, path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".into());
            JennError::Parse(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, record));
    }
    Ok((header, rows))
}

/// Reads a full training dataset. At least one output column is
/// required. Gamma is 1 for partials present in the file and 0
/// elsewhere.
pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let (header, rows) = read_records(path)?;
    if header.n_y == 0 {
        return Err(JennError::Parse(format!(
            "{}: no output columns (y1, y2, ...)",
            path.display()
        )));
    }
    let m = rows.len();
    if m == 0 {
        return Err(JennError::Parse(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let mut x = Array2::zeros((header.n_x, m));
    let mut y = Array2::zeros((header.n_y, m));
    let mut j = Array3::zeros((header.n_y, header.n_x, m));
    let mut gamma = Array3::zeros((header.n_y, header.n_x, m));
    for (t, (line, record)) in rows.iter().enumerate() {
        for (i, &pos) in header.inputs.iter().enumerate() {
            x[[i, t]] = parse_cell(&record[pos], path, *line, &format!("x{}", i + 1))?;
        }
        for (k, &pos) in header.outputs.iter().enumerate() {
            y[[k, t]] = parse_cell(&record[pos], path, *line, &format!("y{}", k + 1))?;
        }
        for &((k, jj), pos) in &header.partials {
            j[[k, jj, t]] = parse_cell(
                &record[pos],
                path,
                *line,
                &format!("dy{}_dx{}", k + 1, jj + 1),
            )?;
            gamma[[k, jj, t]] = 1.0;
        }
    }
    let has_partials = !header.partials.is_empty();
    Dataset::new(
        x,
        y,
        has_partials.then_some(j),
        None,
        has_partials.then_some(gamma),
    )
}

/// Reads only the input columns of a CSV. A header-only file yields an
/// `(n_x, 0)` matrix.
pub fn read_inputs_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let (header, rows) = read_records(path)?;
    let mut x = Array2::zeros((header.n_x, rows.len()));
    for (t, (line, record)) in rows.iter().enumerate() {
        for (i, &pos) in header.inputs.iter().enumerate() {
            x[[i, t]] = parse_cell(&record[pos], path, *line, &format!("x{}", i + 1))?;
        }
    }
    Ok(x)
}

fn fmt_float(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").expect("formatting f64 cannot fail");
    s
}

/// Writes a dataset: inputs, outputs, and the full Jacobian columns.
pub fn write_dataset_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let (n_y, n_x, m) = data.j.dim();
    let mut header = Vec::new();
    for i in 1..=n_x {
        header.push(format!("x{i}"));
    }
    for k in 1..=n_y {
        header.push(format!("y{k}"));
    }
    for k in 1..=n_y {
        for i in 1..=n_x {
            header.push(format!("dy{k}_dx{i}"));
        }
    }
    w.write_record(&header)?;
    for t in 0..m {
        let mut row = Vec::with_capacity(header.len());
        for i in 0..n_x {
            row.push(fmt_float(data.x[[i, t]]));
        }
        for k in 0..n_y {
            row.push(fmt_float(data.y[[k, t]]));
        }
        for k in 0..n_y {
            for i in 0..n_x {
                row.push(fmt_float(data.j[[k, i, t]]));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes predictions: one row per input column, with `x`, `y`, and the
/// full predicted Jacobian.
pub fn write_predictions_csv(
    path: impl AsRef<Path>,
    x: &Array2<f64>,
    y: &Array2<f64>,
    j: &Array3<f64>,
) -> Result<()> {
    let (n_y, n_x, m) = j.dim();
    if x.dim() != (n_x, m) || y.dim() != (n_y, m) {
        return Err(JennError::ShapeMismatch(format!(
            "predictions: x {:?}, y {:?}, jacobian {:?}",
            x.dim(),
            y.dim(),
            j.dim()
        )));
    }
    let data = Dataset {
        x: x.clone(),
        y: y.clone(),
        j: j.clone(),
        beta: Array2::ones((n_y, m)),
        gamma: Array3::ones((n_y, n_x, m)),
    };
    write_dataset_csv(path, &data)
}

/// Writes a training cost history: `epoch,cost`.
pub fn write_cost_history_csv(path: impl AsRef<Path>, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["epoch", "cost"])?;
    for (e, c) in history.iter().enumerate() {
        w.write_record([e.to_string(), fmt_float(*c)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an optimization trace: iteration index, coordinates, value.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &OptTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let dims = trace.iterates.first().map_or(0, |p| p.len());
    let mut header = vec!["iter".to_string()];
    for i in 1..=dims {
        header.push(format!("x{i}"));
    }
    header.push("value".to_string());
    w.write_record(&header)?;
    for (i, (p, v)) in trace.iterates.iter().zip(&trace.values).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(|&c| fmt_float(c)));
        row.push(fmt_float(*v));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_values_only_file() {
        let f = write_temp("x1,y1\n0.0,1.0\n0.5,2.5\n");
        let d = read_dataset_csv(f.path()).unwrap();
        assert_eq!(d.x, array![[0.0, 0.5]]);
        assert_eq!(d.y, array![[1.0, 2.5]]);
        assert!(d.gamma.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn reads_partial_jacobian_with_gamma_mask() {
        let f = write_temp("x1,x2,y1,dy1_dx2\n0.0,1.0,2.0,3.0\n");
        let d = read_dataset_csv(f.path()).unwrap();
        assert_eq!(d.j[[0, 1, 0]], 3.0);
        assert_eq!(d.gamma[[0, 1, 0]], 1.0);
        assert_eq!(d.gamma[[0, 0, 0]], 0.0);
    }

    #[test]
    fn column_order_does_not_matter() {
        let f = write_temp("y1,x2,dy1_dx1,x1\n5.0,2.0,7.0,1.0\n");
        let d = read_dataset_csv(f.path()).unwrap();
        assert_eq!(d.x, array![[1.0], [2.0]]);
        assert_eq!(d.y, array![[5.0]]);
        assert_eq!(d.j[[0, 0, 0]], 7.0);
    }

    #[test]
    fn bad_cell_reports_line_number() {
        let f = write_temp("x1,y1\n0.0,1.0\n0.5,oops\n");
        let err = read_dataset_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "message: {err}");
        assert!(err.contains("oops"), "message: {err}");
    }

    #[test]
    fn ragged_row_reports_line_number() {
        let f = write_temp("x1,y1\n0.0,1.0\n0.5\n");
        let err = read_dataset_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 3") || err.contains("record 2"), "message: {err}");
    }

    #[test]
    fn unknown_column_rejected() {
        let f = write_temp("x1,y1,weight\n0.0,1.0,2.0\n");
        let err = read_dataset_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("weight"), "message: {err}");
    }

    #[test]
    fn gap_in_indices_rejected() {
        let f = write_temp("x1,x3,y1\n0.0,1.0,2.0\n");
        let err = read_dataset_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("x2"), "message: {err}");
    }

    #[test]
    fn partial_referencing_missing_input_rejected() {
        let f = write_temp("x1,y1,dy1_dx2\n0.0,1.0,2.0\n");
        assert!(read_dataset_csv(f.path()).is_err());
    }

    #[test]
    fn missing_file_mentions_path() {
        let err = read_dataset_csv("/nonexistent/data.csv")
            .unwrap_err()
            .to_string();
        assert!(err.contains("/nonexistent/data.csv"), "message: {err}");
    }

    #[test]
    fn header_only_inputs_gives_zero_columns() {
        let f = write_temp("x1,x2\n");
        let x = read_inputs_csv(f.path()).unwrap();
        assert_eq!(x.dim(), (2, 0));
    }

    #[test]
    fn dataset_round_trip_is_bitwise() {
        let x = array![[0.1, -2.0e-17, 3.0], [1.0 / 3.0, 5.0, -0.0]];
        let y = array![[f64::MIN_POSITIVE, 2.0f64.powi(-30), 1e300]];
        let mut j = Array3::zeros((1, 2, 3));
        for (i, v) in j.iter_mut().enumerate() {
            *v = (i as f64 + 0.1).sin() * 1e-5;
        }
        let d = Dataset::with_jacobian(x, y, j).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset_csv(f.path(), &d).unwrap();
        let back = read_dataset_csv(f.path()).unwrap();
        assert_eq!(d.x, back.x);
        assert_eq!(d.y, back.y);
        assert_eq!(d.j, back.j);
    }

    #[test]
    fn trace_csv_has_expected_rows() {
        let trace = OptTrace {
            iterates: vec![vec![0.0, 1.0], vec![0.5, 0.5]],
            values: vec![2.0, 1.0],
            converged: true,
            termination_reason: crate::sbo::TerminationReason::GradientTolerance,
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_trace_csv(f.path(), &trace).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iter,x1,x2,value");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,0.5,0.5,1"));
    }
}
