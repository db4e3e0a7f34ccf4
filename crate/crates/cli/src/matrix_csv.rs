//! Square matrices as CSV: a first record `n,<size>` followed by `size`
//! records of `size` numbers each.

use std::io::Read;
use std::path::Path;

use crate::error::{usage, CliResult};

pub fn read_matrix(path: &Path) -> CliResult<(usize, Vec<f64>)> {
    parse_matrix(std::fs::File::open(path)?)
}

pub fn parse_matrix(input: impl Read) -> CliResult<(usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| usage("matrix file is empty"))??;
    let n: usize = match (header.get(0), header.get(1), header.len()) {
        (Some("n"), Some(size), 2) => size
            .parse()
            .map_err(|_| usage(format!("matrix size `{size}` is not a positive integer")))?,
        _ => return Err(usage("matrix file must start with a record `n,<size>`")),
    };
    if n == 0 {
        return Err(usage("matrix size must be positive"));
    }
    let mut entries = Vec::with_capacity(n * n);
    let mut rows = 0;
    for record in records {
        let record = record?;
        rows += 1;
        if record.len() != n {
            return Err(usage(format!(
                "matrix row {rows} has {} entries, expected {n}",
                record.len()
            )));
        }
        for cell in record.iter() {
            let v: f64 = cell
                .parse()
                .map_err(|_| usage(format!("matrix row {rows}: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(usage(format!("matrix row {rows}: `{cell}` is not finite")));
            }
            entries.push(v);
        }
    }
    if rows != n {
        return Err(usage(format!("matrix has {rows} rows, expected {n}")));
    }
    Ok((n, entries))
}
