//! Typed result tables and their CSV form.
//!
//! A file starts with `#` provenance lines, `# key: value`, followed by one
//! `# column: name | type | unit` line per column, then the header row and
//! the data. Floats are written with 17 significant digits so that reading a
//! file back reproduces every value bit for bit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Float(Vec<f64>),
    Int(Vec<u64>),
    Text(Vec<String>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Float(v) => v.len(),
            Values::Int(v) => v.len(),
            Values::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> &'static str {
        match self {
            Values::Float(_) => "f64",
            Values::Int(_) => "u64",
            Values::Text(_) => "str",
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Values::Float(v) => format!("{:.16e}", v[row]),
            Values::Int(v) => v[row].to_string(),
            Values::Text(v) => v[row].clone(),
        }
    }

    fn empty(kind: &str) -> Option<Self> {
        match kind {
            "f64" => Some(Values::Float(Vec::new())),
            "u64" => Some(Values::Int(Vec::new())),
            "str" => Some(Values::Text(Vec::new())),
            _ => None,
        }
    }

    fn push_cell(&mut self, cell: &str) -> std::result::Result<(), String> {
        match self {
            Values::Float(v) => v.push(cell.parse().map_err(|e| format!("{cell:?}: {e}"))?),
            Values::Int(v) => v.push(cell.parse().map_err(|e| format!("{cell:?}: {e}"))?),
            Values::Text(v) => v.push(cell.to_string()),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Values,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub provenance: Vec<(String, String)>,
    pub columns: Vec<Column>,
}

fn check_token(what: &str, s: &str, forbidden: &[char]) -> Result<()> {
    if s.is_empty() || s.chars().any(|c| c.is_control() || forbidden.contains(&c)) {
        return Err(CliError::Table(format!(
            "{what} {s:?} is empty or contains a reserved character"
        )));
    }
    Ok(())
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let value = value.into();
        check_token("provenance key", key, &[':', '#'])?;
        if key == "column" {
            return Err(CliError::Table(
                "`column` is a reserved provenance key".into(),
            ));
        }
        if value.chars().any(char::is_control) {
            return Err(CliError::Table(format!(
                "provenance value for {key} spans lines"
            )));
        }
        self.provenance.push((key.to_string(), value));
        Ok(())
    }

    pub fn push(&mut self, name: &str, unit: &str, values: Values) -> Result<()> {
        check_token("column name", name, &[',', '|', '"'])?;
        check_token("unit", unit, &['|'])?;
        if let Some(first) = self.columns.first() {
            if first.values.len() != values.len() {
                return Err(CliError::Table(format!(
                    "column {name} has {} rows, expected {}",
                    values.len(),
                    first.values.len()
                )));
            }
        }
        if self.column(name).is_some() {
            return Err(CliError::Table(format!("duplicate column {name}")));
        }
        if let Values::Text(v) = &values {
            if let Some(bad) = v
                .iter()
                .find(|s| s.is_empty() || s.chars().any(|c| c == ',' || c == '"' || c.is_control()))
            {
                return Err(CliError::Table(format!(
                    "text cell {bad:?} in column {name} needs quoting"
                )));
            }
        }
        self.columns.push(Column {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
        });
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn floats(&self, name: &str) -> Option<&[f64]> {
        match &self.column(name)?.values {
            Values::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn provenance(&self, key: &str) -> Option<&str> {
        self.provenance
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for c in &self.columns {
            let _ = writeln!(
                out,
                "# column: {} | {} | {}",
                c.name,
                c.values.kind(),
                c.unit
            );
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in 0..self.n_rows() {
            let cells: Vec<String> = self.columns.iter().map(|c| c.values.cell(row)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut table = ResultTable::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(comment) = line.strip_prefix('#') else {
                break;
            };
            body_start += line.len();
            let comment = comment.trim_end_matches(['\n', '\r']).trim_start();
            let (key, value) = comment
                .split_once(':')
                .ok_or_else(|| CliError::Table(format!("comment line without a key: {line:?}")))?;
            let value = value.strip_prefix(' ').unwrap_or(value);
            if key == "column" {
                let parts: Vec<&str> = value.splitn(3, " | ").collect();
                let [name, kind, unit] = parts[..] else {
                    return Err(CliError::Table(format!("bad column declaration {value:?}")));
                };
                let values = Values::empty(kind)
                    .ok_or_else(|| CliError::Table(format!("unknown column type {kind}")))?;
                table.columns.push(Column {
                    name: name.to_string(),
                    unit: unit.to_string(),
                    values,
                });
            } else {
                table.provenance.push((key.to_string(), value.to_string()));
            }
        }
        if table.columns.is_empty() {
            return Err(CliError::Table("no column declarations".into()));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(&text.as_bytes()[body_start..]);
        let header = reader
            .headers()
            .map_err(|e| CliError::Table(e.to_string()))?;
        let declared: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
        if header.iter().collect::<Vec<_>>() != declared {
            return Err(CliError::Table(format!(
                "header {:?} does not match the declared columns {declared:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Table(e.to_string()))?;
            for (col, cell) in table.columns.iter_mut().zip(record.iter()) {
                col.values.push_cell(cell).map_err(|e| {
                    CliError::Table(format!("row {}, column {}: {e}", i + 1, col.name))
                })?;
            }
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_csv(&text)
    }

    /// Writes through a temporary file in the target directory and renames it
    /// into place, so readers never see a partial table.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        tmp.write_all(self.to_csv().as_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
        Ok(())
    }
}
