//! CSV input and output for the command layer.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::Context;
use fso_qos::{Error, LabeledTable};

pub const TARGET_COLUMN: &str = "target_snr_db";
pub const STATION_COLUMN: &str = "station";

/// Shortest round-trip text for a float, switching to exponent form for very
/// large or very small magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct CsvOut {
    w: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> anyhow::Result<Self> {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields)?;
        Ok(())
    }

    pub fn nums(&mut self, values: &[f64]) -> anyhow::Result<()> {
        self.row(values.iter().map(|v| fmt_f64(*v)))
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

/// Features, then the target, then the station label when present.
pub fn write_labeled_csv(path: &Path, table: &LabeledTable) -> anyhow::Result<()> {
    let mut header: Vec<&str> = table.feature_names().iter().map(String::as_str).collect();
    header.push(TARGET_COLUMN);
    let grouped = !table.groups().is_empty();
    if grouped {
        header.push(STATION_COLUMN);
    }
    let mut out = CsvOut::create(path, &header)?;
    for i in 0..table.n_rows() {
        let mut fields: Vec<String> = table.row(i).iter().map(|v| fmt_f64(*v)).collect();
        fields.push(fmt_f64(table.targets()[i]));
        if grouped {
            fields.push(table.groups()[i].clone());
        }
        out.row(&fields)?;
    }
    out.finish()
}

fn parse_num(field: &str, line: u64, column: &str) -> fso_qos::Result<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
        line,
        message: format!("column `{column}`: `{field}` is not a finite number"),
    })
}

/// Reads a table written by [`write_labeled_csv`].
pub fn read_labeled_csv(path: &Path) -> anyhow::Result<LabeledTable> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_labeled(file).with_context(|| format!("reading {}", path.display()))
}

pub fn read_labeled<R: Read>(r: R) -> anyhow::Result<LabeledTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::Parse { line: 1, message: "missing header".into() }.into()),
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    let grouped = header.last().map(String::as_str) == Some(STATION_COLUMN);
    let target_at = header.len().saturating_sub(if grouped { 2 } else { 1 });
    if header.get(target_at).map(String::as_str) != Some(TARGET_COLUMN) || target_at == 0 {
        return Err(Error::Schema(format!("header must be features, `{TARGET_COLUMN}`[, `{STATION_COLUMN}`]")).into());
    }
    let names = header[..target_at].to_vec();
    let (mut rows, mut targets, mut groups) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in records.enumerate() {
        let line = i as u64 + 2;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", header.len(), rec.len()) }.into());
        }
        let x = (0..target_at).map(|j| parse_num(&rec[j], line, &names[j])).collect::<fso_qos::Result<Vec<_>>>()?;
        rows.push(x);
        targets.push(parse_num(&rec[target_at], line, TARGET_COLUMN)?);
        if grouped {
            groups.push(rec[target_at + 1].to_string());
        }
    }
    let table = LabeledTable::new(names, rows, targets)?;
    Ok(if grouped { table.with_groups(groups)? } else { table })
}

/// Header plus raw records of a feature file. A zero-byte file has neither.
pub fn read_raw_csv<R: Read>(r: R) -> anyhow::Result<Option<(Vec<String>, Vec<csv::StringRecord>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
    let mut it = rdr.records();
    let header = match it.next() {
        Some(h) => h?.iter().map(str::to_string).collect(),
        None => return Ok(None),
    };
    let rows = it.collect::<Result<Vec<_>, _>>()?;
    Ok(Some((header, rows)))
}

pub fn parse_feature_row(rec: &csv::StringRecord, names: &[String], n_fields: usize, line: u64) -> fso_qos::Result<Vec<f64>> {
    if rec.len() != n_fields {
        return Err(Error::Parse { line, message: format!("expected {n_fields} fields, found {}", rec.len()) });
    }
    names.iter().enumerate().map(|(j, n)| parse_num(&rec[j], line, n)).collect()
}

pub fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
