//! Grid and curve files in CSV and JSON.
//!
//! CSV layout: one `# key=value;key=value` metadata line, then either
//!
//! - a grid: a row `delta/t,t_0,t_1,...` followed by one row per distance
//!   `δ,v_0,v_1,...`, or
//! - a curve: a row of column names followed by one row per sample, with
//!   empty cells for missing values.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! binary64 value. `;`, `=`, `\` and newlines inside metadata are escaped
//! with a backslash.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use soundcone::SpacetimeGrid;

use crate::config::Format;
use crate::CliError;

pub const GRID_CORNER: &str = "delta/t";

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn dense(name: &str, values: impl IntoIterator<Item = f64>) -> Self {
        Column {
            name: name.to_string(),
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn sparse(name: &str, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.to_string(),
            values,
        }
    }
}

/// Named columns of equal length; the first is the independent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    columns: Vec<Column>,
}

impl Curve {
    pub fn new(columns: Vec<Column>) -> Result<Self, CliError> {
        let Some(first) = columns.first() else {
            return Err(CliError::Format("curve needs at least one column".into()));
        };
        let len = first.values.len();
        for c in &columns {
            if c.values.len() != len {
                return Err(CliError::Format(format!(
                    "column {} has {} values, expected {len}",
                    c.name,
                    c.values.len()
                )));
            }
            if c.name.is_empty() || c.name.contains([',', '\n', '\r']) || c.name == GRID_CORNER {
                return Err(CliError::Format(format!(
                    "invalid column name {:?}",
                    c.name
                )));
            }
            if c.values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(CliError::Format(format!(
                    "column {} holds a non-finite value",
                    c.name
                )));
            }
        }
        Ok(Curve { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.columns[0].values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    /// The grid carries no metadata of its own; it lives in the file header.
    Grid(SpacetimeGrid),
    Curve(Curve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub meta: BTreeMap<String, String>,
    pub data: Data,
}

impl GridFile {
    /// Moves the grid's metadata into the file header.
    pub fn from_grid(
        grid: SpacetimeGrid,
        mut meta: BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        meta.extend(grid.meta().iter().map(|(k, v)| (k.clone(), v.clone())));
        let bare = strip_meta(grid)?;
        Ok(GridFile {
            meta,
            data: Data::Grid(bare),
        })
    }

    pub fn grid(&self) -> Option<&SpacetimeGrid> {
        match &self.data {
            Data::Grid(g) => Some(g),
            Data::Curve(_) => None,
        }
    }

    pub fn curve(&self) -> Option<&Curve> {
        match &self.data {
            Data::Curve(c) => Some(c),
            Data::Grid(_) => None,
        }
    }
}

fn strip_meta(g: SpacetimeGrid) -> Result<SpacetimeGrid, CliError> {
    Ok(SpacetimeGrid::new(
        g.delta_values().to_vec(),
        g.t_values().to_vec(),
        g.values().to_vec(),
        BTreeMap::new(),
    )?)
}

pub fn serialize(file: &GridFile, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => Ok(to_csv(file).into_bytes()),
        Format::Json => to_json(file),
    }
}

pub fn parse(bytes: &[u8], format: Format) -> Result<GridFile, CliError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CliError::Format(e.to_string()))?;
    match format {
        Format::Csv => from_csv(text),
        Format::Json => from_json(text),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            ';' => out.push_str("\\;"),
            '=' => out.push_str("\\="),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn meta_line(meta: &BTreeMap<String, String>) -> String {
    let pairs: Vec<String> = meta
        .iter()
        .map(|(k, v)| format!("{}={}", escape(k), escape(v)))
        .collect();
    format!("# {}\n", pairs.join(";"))
}

fn parse_meta_line(line: &str) -> Result<BTreeMap<String, String>, CliError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| CliError::Format("first line must be the # metadata line".into()))?;
    let body = body.strip_prefix(' ').unwrap_or(body);
    let mut meta = BTreeMap::new();
    if body.is_empty() {
        return Ok(meta);
    }
    let (mut key, mut value) = (String::new(), None::<String>);
    let mut finish = |key: &mut String, value: &mut Option<String>| match value.take() {
        Some(v) => {
            meta.insert(std::mem::take(key), v);
            Ok(())
        }
        None => Err(CliError::Format(format!(
            "metadata entry {key:?} has no value"
        ))),
    };
    let mut chars = body.chars();
    while let Some(ch) = chars.next() {
        let literal = match ch {
            '\\' => match chars.next() {
                Some('n') => '\n',
                Some('r') => '\r',
                Some(c @ ('\\' | ';' | '=')) => c,
                other => {
                    return Err(CliError::Format(format!(
                        "bad escape {other:?} in metadata"
                    )));
                }
            },
            ';' => {
                finish(&mut key, &mut value)?;
                continue;
            }
            '=' if value.is_none() => {
                value = Some(String::new());
                continue;
            }
            '=' => {
                return Err(CliError::Format(format!(
                    "unescaped '=' in value of {key:?}"
                )))
            }
            c => c,
        };
        match value.as_mut() {
            Some(v) => v.push(literal),
            None => key.push(literal),
        }
    }
    finish(&mut key, &mut value)?;
    Ok(meta)
}

fn to_csv(file: &GridFile) -> String {
    let mut out = meta_line(&file.meta);
    match &file.data {
        Data::Grid(g) => {
            out.push_str(GRID_CORNER);
            for &t in g.t_values() {
                out.push(',');
                out.push_str(&num(t));
            }
            out.push('\n');
            for (r, d) in g.delta_values().iter().enumerate() {
                out.push_str(&d.to_string());
                for &v in g.row(r) {
                    out.push(',');
                    out.push_str(&num(v));
                }
                out.push('\n');
            }
        }
        Data::Curve(c) => {
            let names: Vec<&str> = c.columns.iter().map(|c| c.name.as_str()).collect();
            out.push_str(&names.join(","));
            out.push('\n');
            for i in 0..c.len() {
                let cells: Vec<String> = c
                    .columns
                    .iter()
                    .map(|col| col.values[i].map(num).unwrap_or_default())
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
    }
    out
}

fn parse_f64(cell: &str, line: usize) -> Result<f64, CliError> {
    cell.parse()
        .map_err(|_| CliError::Format(format!("line {line}: {cell:?} is not a number")))
}

fn from_csv(text: &str) -> Result<GridFile, CliError> {
    let mut lines = text.lines();
    let meta = parse_meta_line(lines.next().unwrap_or(""))?;
    let header = lines
        .next()
        .ok_or_else(|| CliError::Format("missing header row".into()))?;
    let head: Vec<&str> = header.split(',').collect();
    let rows = lines
        .enumerate()
        .map(|(i, l)| (i + 3, l.split(',').collect::<Vec<_>>()));
    let data = if head[0] == GRID_CORNER {
        let t_values = head[1..]
            .iter()
            .map(|c| parse_f64(c, 2))
            .collect::<Result<Vec<_>, _>>()?;
        let mut deltas = Vec::new();
        let mut values = Vec::new();
        for (line, cells) in rows {
            if cells.len() != head.len() {
                return Err(CliError::Format(format!(
                    "line {line}: expected {} cells",
                    head.len()
                )));
            }
            deltas.push(cells[0].parse::<usize>().map_err(|_| {
                CliError::Format(format!("line {line}: {:?} is not a distance", cells[0]))
            })?);
            for c in &cells[1..] {
                values.push(parse_f64(c, line)?);
            }
        }
        Data::Grid(SpacetimeGrid::new(
            deltas,
            t_values,
            values,
            BTreeMap::new(),
        )?)
    } else {
        let mut columns: Vec<Column> = head.iter().map(|n| Column::sparse(n, Vec::new())).collect();
        for (line, cells) in rows {
            if cells.len() != head.len() {
                return Err(CliError::Format(format!(
                    "line {line}: expected {} cells",
                    head.len()
                )));
            }
            for (col, cell) in columns.iter_mut().zip(cells) {
                col.values.push(if cell.is_empty() {
                    None
                } else {
                    Some(parse_f64(cell, line)?)
                });
            }
        }
        Data::Curve(Curve::new(columns)?)
    };
    Ok(GridFile { meta, data })
}

#[derive(Serialize, Deserialize)]
struct JsonGrid {
    meta: BTreeMap<String, String>,
    delta_values: Vec<usize>,
    t_values: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonColumn {
    name: String,
    values: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonCurve {
    meta: BTreeMap<String, String>,
    columns: Vec<JsonColumn>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonFile {
    Grid(JsonGrid),
    Curve(JsonCurve),
}

fn to_json(file: &GridFile) -> Result<Vec<u8>, CliError> {
    let meta = file.meta.clone();
    let mut bytes = match &file.data {
        Data::Grid(g) => serde_json::to_vec_pretty(&JsonGrid {
            meta,
            delta_values: g.delta_values().to_vec(),
            t_values: g.t_values().to_vec(),
            values: g.values().to_vec(),
        }),
        Data::Curve(c) => serde_json::to_vec_pretty(&JsonCurve {
            meta,
            columns: c
                .columns
                .iter()
                .map(|c| JsonColumn {
                    name: c.name.clone(),
                    values: c.values.clone(),
                })
                .collect(),
        }),
    }
    .map_err(|e| CliError::Format(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn from_json(text: &str) -> Result<GridFile, CliError> {
    let parsed: JsonFile =
        serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    Ok(match parsed {
        JsonFile::Grid(g) => GridFile {
            meta: g.meta,
            data: Data::Grid(SpacetimeGrid::new(
                g.delta_values,
                g.t_values,
                g.values,
                BTreeMap::new(),
            )?),
        },
        JsonFile::Curve(c) => GridFile {
            meta: c.meta,
            data: Data::Curve(Curve::new(
                c.columns
                    .into_iter()
                    .map(|c| Column::sparse(&c.name, c.values))
                    .collect(),
            )?),
        },
    })
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
