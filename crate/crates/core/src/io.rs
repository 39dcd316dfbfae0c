//! Plain-CSV matrix files: one matrix row per line, comma-separated decimal
//! literals, no header. Values are written in shortest round-trip form, so
//! reading a written file gives back the same bits.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {c}",
                    line + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: cannot parse {field:?}", line + 1)))?;
            data.push(v);
        }
        nrows += 1;
    }
    let ncols = ncols.unwrap_or(0);
    Ok(DMatrix::from_row_slice(nrows, ncols, &data))
}

pub fn write_matrix<W: Write>(writer: W, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix(std::fs::File::open(path)?)
}

pub fn write_matrix_file(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_matrix(std::io::BufWriter::new(std::fs::File::create(path)?), m)
}
