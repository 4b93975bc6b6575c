//! Minimal CSV writing: UTF-8, header row, full-precision decimals (shortest
//! representation that round-trips, scientific notation).

use std::io::Write;
use std::path::Path;

pub struct CsvWriter {
    out: std::io::BufWriter<std::fs::File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> std::io::Result<Self> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out })
    }

    pub fn row(&mut self, fields: &[CsvField]) -> std::io::Result<()> {
        let mut first = true;
        for f in fields {
            if !first {
                write!(self.out, ",")?;
            }
            first = false;
            match f {
                CsvField::Int(v) => write!(self.out, "{v}")?,
                CsvField::Float(v) => write!(self.out, "{v:e}")?,
                CsvField::Empty => {}
                CsvField::Str(s) => write!(self.out, "{s}")?,
            }
        }
        writeln!(self.out)
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

pub enum CsvField {
    Int(usize),
    Float(f64),
    Str(String),
    Empty,
}
