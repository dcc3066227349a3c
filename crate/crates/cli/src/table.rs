//! CSV input and output.

use std::io::{Read, Write};

use lasso_geo::formats::csv_num;
use lasso_geo::{Dataset, Divisor, PathPoint};
use nalgebra::{DMatrix, DVector};

use crate::CliError;

/// Numeric table with a header row.
pub struct Table {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table<R: Read>(input: R) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let names: Vec<String> = reader
        .headers()
        .map_err(CliError::io)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(CliError::io)?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::Io(format!(
                        "row {}: cannot parse {cell:?} as a number",
                        line + 2
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Table { names, rows })
}

/// Splits `table` into predictors and the optional `response` column.
pub fn dataset(
    table: &Table,
    response: Option<&str>,
    divisor: Divisor,
) -> Result<(Dataset, Vec<String>), CliError> {
    let y_col = match response {
        Some(name) => Some(
            table
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CliError::Validation(format!("no column named {name:?}")))?,
        ),
        None => None,
    };
    let x_cols: Vec<usize> = (0..table.names.len())
        .filter(|&c| Some(c) != y_col)
        .collect();
    let n = table.rows.len();
    let x = DMatrix::from_fn(n, x_cols.len(), |r, c| table.rows[r][x_cols[c]]);
    let y = y_col.map(|c| DVector::from_fn(n, |r, _| table.rows[r][c]));
    let names = x_cols.iter().map(|&c| table.names[c].clone()).collect();
    Ok((Dataset::new(x, y, divisor)?, names))
}

pub fn point_header(p: usize) -> Vec<String> {
    let mut header: Vec<String> = ["s", "lambda", "t"].map(String::from).to_vec();
    header.extend((1..=p).map(|j| format!("beta_{j}")));
    header
}

pub fn point_row(point: &PathPoint, lambda_scale: f64) -> Vec<String> {
    let mut row = vec![
        csv_num(point.s),
        csv_num(0.0 - point.s / lambda_scale),
        csv_num(point.t),
    ];
    row.extend(point.beta.iter().map(|&x| csv_num(x)));
    row
}

pub fn write_rows<W: Write>(
    out: W,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header).map_err(CliError::io)?;
    for row in rows {
        writer.write_record(row).map_err(CliError::io)?;
    }
    writer.flush().map_err(CliError::io)
}

pub fn write_dataset<W: Write>(out: W, data: &Dataset, names: &[String]) -> Result<(), CliError> {
    let x = data.x();
    let rows: Vec<Vec<String>> = (0..x.nrows())
        .map(|r| (0..x.ncols()).map(|c| csv_num(x[(r, c)])).collect())
        .collect();
    write_rows(out, names, &rows)
}
