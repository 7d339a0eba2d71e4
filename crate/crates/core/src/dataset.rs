//! Labeled dataset files.
//!
//! One record per line: `id TAB label TAB text` with an optional fourth
//! provenance column (`-` meaning none). Tabs, newlines, carriage returns,
//! and backslashes inside the text are backslash-escaped, so the format
//! stays unambiguous for tweets and comments containing commas or quotes.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub label: String,
    pub text: String,
    /// Base word of an obfuscated token stream, when the file carries one.
    pub provenance: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DatasetFile {
    pub records: Vec<Record>,
    /// Distinct labels in first-seen order; index = class id.
    pub labels: Vec<String>,
}

impl DatasetFile {
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Class index per record, following first-seen label order.
    pub fn class_ids(&self) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| self.label_index(&r.label).unwrap())
            .collect()
    }
}

pub fn escape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape_field(field: &str, line_no: usize) -> Result<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                return Err(Error::format(
                    Some(line_no),
                    format!("unknown escape '\\{other}'"),
                ))
            }
            None => return Err(Error::format(Some(line_no), "dangling backslash")),
        }
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<DatasetFile> {
    let file = File::open(path)?;
    read_dataset(BufReader::new(file))
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<DatasetFile> {
    let mut records = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::format(
                Some(line_no),
                format!("expected 3 or 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let id = fields[0].to_string();
        if id.is_empty() {
            return Err(Error::format(Some(line_no), "empty id"));
        }
        if !seen_ids.insert(id.clone()) {
            return Err(Error::format(Some(line_no), format!("duplicate id '{id}'")));
        }
        let label = fields[1].to_string();
        if label.is_empty() {
            return Err(Error::format(Some(line_no), "empty label"));
        }
        if !labels.contains(&label) {
            labels.push(label.clone());
        }
        let text = unescape_field(fields[2], line_no)?;
        let provenance = match fields.get(3) {
            None => None,
            Some(&"-") => None,
            Some(p) => Some(unescape_field(p, line_no)?),
        };
        records.push(Record { id, label, text, provenance });
    }
    if records.is_empty() {
        return Err(Error::format(None, "dataset file holds no records"));
    }
    Ok(DatasetFile { records, labels })
}

pub fn write_dataset<W: Write>(mut writer: W, records: &[Record]) -> Result<()> {
    for r in records {
        write!(writer, "{}\t{}\t{}", r.id, r.label, escape_field(&r.text))?;
        match &r.provenance {
            Some(p) => writeln!(writer, "\t{}", escape_field(p))?,
            None => writeln!(writer, "\t-")?,
        }
    }
    Ok(())
}

pub fn save_dataset(path: &Path, records: &[Record]) -> Result<()> {
    let file = File::create(path)?;
    write_dataset(std::io::BufWriter::new(file), records)
}
