//! Manifold documents.
//!
//! One `key = value` pair per line; blank lines and lines starting with `#`
//! are ignored. Keys:
//!
//! | key                    | value                                        |
//! |------------------------|----------------------------------------------|
//! | `name`                 | free text (optional)                         |
//! | `dim`                  | integer, must equal the number of coords     |
//! | `coords`               | comma-separated identifiers                  |
//! | `g[i][j]`              | expression; 0-based; upper triangle suffices |
//! | `xi[i]`                | expression; missing entries are 0            |
//! | `phi[i][j]`            | expression φ^i_j; missing entries are 0      |
//! | `f1`, `f2`, `f3`       | expressions; all three or none               |
//! | `box[i]`               | `lo, hi` (constant expressions)              |
//! | `parallel_xi_expected` | `true` or `false` (default `false`)          |
//!
//! Off-diagonal metric entries default to 0 and missing lower-triangle
//! entries mirror the upper ones. When both `g[i][j]` and `g[j][i]` are given
//! with different expressions, the pair is flagged and symmetry is checked
//! numerically at every evaluated point.
//!
//! A document whose first non-blank character is `{` is read as a JSON object
//! with the same keys. String values are taken verbatim, numbers and booleans
//! are converted to text, and arrays (for `coords` and `box[i]`) are joined
//! with commas.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::ManifoldSpec;
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Name,
    Dim,
    Coords,
    Metric(usize, usize),
    Xi(usize),
    Phi(usize, usize),
    F(usize),
    Box(usize),
    ParallelXi,
}

fn parse_indices(rest: &str) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    let mut s = rest;
    while !s.is_empty() {
        let inner = s.strip_prefix('[')?;
        let close = inner.find(']')?;
        out.push(inner[..close].trim().parse().ok()?);
        s = &inner[close + 1..];
    }
    Some(out)
}

fn parse_key(raw: &str) -> Option<Key> {
    let key = raw.trim();
    match key {
        "name" => return Some(Key::Name),
        "dim" => return Some(Key::Dim),
        "coords" => return Some(Key::Coords),
        "f1" => return Some(Key::F(0)),
        "f2" => return Some(Key::F(1)),
        "f3" => return Some(Key::F(2)),
        "parallel_xi_expected" => return Some(Key::ParallelXi),
        _ => {}
    }
    let open = key.find('[')?;
    let idx = parse_indices(&key[open..])?;
    match (&key[..open], idx.as_slice()) {
        ("g", [i, j]) => Some(Key::Metric(*i, *j)),
        ("xi", [i]) => Some(Key::Xi(*i)),
        ("phi", [i, j]) => Some(Key::Phi(*i, *j)),
        ("box", [i]) => Some(Key::Box(*i)),
        _ => None,
    }
}

/// Raw entries keyed by parsed key, remembering the source spelling.
struct Entries {
    map: BTreeMap<Key, (String, String)>,
}

impl Entries {
    fn new() -> Self {
        Entries {
            map: BTreeMap::new(),
        }
    }

    fn insert(&mut self, raw_key: &str, value: String, line: usize) -> Result<()> {
        let key = parse_key(raw_key).ok_or_else(|| {
            if raw_key.trim().is_empty() {
                Error::Syntax {
                    line,
                    message: "empty key".into(),
                }
            } else {
                Error::UnknownKey(raw_key.trim().to_string())
            }
        })?;
        if self.map.contains_key(&key) {
            return Err(Error::DuplicateKey(raw_key.trim().to_string()));
        }
        self.map.insert(key, (raw_key.trim().to_string(), value));
        Ok(())
    }

    fn expr(&self, key: Key) -> Result<Option<Expr>> {
        match self.map.get(&key) {
            None => Ok(None),
            Some((k, v)) => Expr::parse(v)
                .map(Some)
                .map_err(|source| Error::Parse {
                    key: k.clone(),
                    source,
                }),
        }
    }
}

fn constant(key: &str, text: &str) -> Result<f64> {
    let e = Expr::parse(text.trim()).map_err(|source| Error::Parse {
        key: key.to_string(),
        source,
    })?;
    e.eval_with(&[]).map_err(|source| Error::Eval {
        point: Vec::new(),
        source,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn build(entries: Entries) -> Result<ManifoldSpec> {
    let get = |k: Key| entries.map.get(&k).map(|(_, v)| v.as_str());

    let coords_text = get(Key::Coords).ok_or_else(|| Error::MissingKey("coords".into()))?;
    let coords: Vec<String> = coords_text
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for c in &coords {
        if !is_identifier(c) {
            return Err(Error::Syntax {
                line: 0,
                message: format!("coordinate name '{c}' is not an identifier"),
            });
        }
        if !seen.insert(c.as_str()) {
            return Err(Error::DuplicateKey(format!("coords: {c}")));
        }
    }
    let n = coords.len();

    let dim_text = get(Key::Dim).ok_or_else(|| Error::MissingKey("dim".into()))?;
    let dim: usize = dim_text.trim().parse().map_err(|_| Error::Syntax {
        line: 0,
        message: format!("dim must be a non-negative integer, got '{dim_text}'"),
    })?;
    if dim != n {
        return Err(Error::DimensionMismatch(format!(
            "dim = {dim} but {n} coordinates are listed"
        )));
    }
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "charts need at least 2 coordinates, got {n}"
        )));
    }

    let mut metric_size = 0;
    for key in entries.map.keys() {
        let idx_max = match *key {
            Key::Metric(i, j) | Key::Phi(i, j) => i.max(j),
            Key::Xi(i) | Key::Box(i) => i,
            _ => continue,
        };
        if idx_max >= n {
            let (raw, _) = &entries.map[key];
            return Err(Error::DimensionMismatch(format!(
                "{raw} is out of range for {n} coordinates"
            )));
        }
        if let Key::Metric(i, j) = *key {
            metric_size = metric_size.max(i.max(j) + 1);
        }
    }
    if metric_size != n {
        return Err(Error::DimensionMismatch(format!(
            "metric is {metric_size}×{metric_size} but {n} coordinates are listed"
        )));
    }

    let mut metric = vec![vec![Expr::zero(); n]; n];
    let mut asymmetric_pairs = Vec::new();
    for i in 0..n {
        metric[i][i] = entries
            .expr(Key::Metric(i, i))?
            .ok_or_else(|| Error::MissingKey(format!("g[{i}][{i}]")))?;
        for j in i + 1..n {
            let upper = entries.expr(Key::Metric(i, j))?;
            let lower = entries.expr(Key::Metric(j, i))?;
            let (u, l) = match (upper, lower) {
                (Some(u), Some(l)) => (u, l),
                (Some(u), None) => (u.clone(), u),
                (None, Some(l)) => (l.clone(), l),
                (None, None) => (Expr::zero(), Expr::zero()),
            };
            if u != l {
                asymmetric_pairs.push((i, j));
            }
            metric[i][j] = u;
            metric[j][i] = l;
        }
    }

    let xi = (0..n)
        .map(|i| Ok(entries.expr(Key::Xi(i))?.unwrap_or_else(Expr::zero)))
        .collect::<Result<Vec<_>>>()?;

    let has_phi = entries.map.keys().any(|k| matches!(k, Key::Phi(..)));
    let phi = if has_phi {
        let mut phi = vec![vec![Expr::zero(); n]; n];
        for (i, row) in phi.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                if let Some(e) = entries.expr(Key::Phi(i, j))? {
                    *slot = e;
                }
            }
        }
        Some(phi)
    } else {
        None
    };

    let fs = [
        entries.expr(Key::F(0))?,
        entries.expr(Key::F(1))?,
        entries.expr(Key::F(2))?,
    ];
    let structure_functions = match fs {
        [None, None, None] => None,
        [Some(a), Some(b), Some(c)] => Some([a, b, c]),
        ref partial => {
            let missing = partial.iter().position(Option::is_none).unwrap_or(0);
            return Err(Error::MissingKey(format!("f{}", missing + 1)));
        }
    };

    let mut sampling_box = Vec::with_capacity(n);
    for i in 0..n {
        let (raw, text) = entries
            .map
            .get(&Key::Box(i))
            .ok_or_else(|| Error::MissingKey(format!("box[{i}]")))?;
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Syntax {
                line: 0,
                message: format!("{raw} needs exactly two bounds 'lo, hi'"),
            });
        }
        let lo = constant(raw, parts[0])?;
        let hi = constant(raw, parts[1])?;
        if !(lo < hi) {
            return Err(Error::EmptyBox(i));
        }
        sampling_box.push((lo, hi));
    }

    let parallel_xi_expected = match get(Key::ParallelXi).map(str::trim) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => {
            return Err(Error::Syntax {
                line: 0,
                message: format!("parallel_xi_expected must be true or false, got '{other}'"),
            })
        }
    };

    let spec = ManifoldSpec {
        name: get(Key::Name).unwrap_or("unnamed").trim().to_string(),
        coords,
        metric,
        xi,
        phi,
        structure_functions,
        sampling_box,
        parallel_xi_expected,
        asymmetric_pairs,
    };
    spec.validate_variables()?;
    Ok(spec)
}

fn entries_from_lines(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
            line: k + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        entries.insert(key, value.trim().to_string(), k + 1)?;
    }
    Ok(entries)
}

fn json_text(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(x) => Ok(x.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => Ok(items
            .iter()
            .map(|x| json_text(key, x))
            .collect::<Result<Vec<_>>>()?
            .join(", ")),
        _ => Err(Error::Syntax {
            line: 0,
            message: format!("unsupported JSON value for '{key}'"),
        }),
    }
}

fn entries_from_json(text: &str) -> Result<Entries> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(obj) = value else {
        return Err(Error::Syntax {
            line: 0,
            message: "JSON manifold document must be an object".into(),
        });
    };
    let mut entries = Entries::new();
    for (k, v) in &obj {
        entries.insert(k, json_text(k, v)?, 0)?;
    }
    Ok(entries)
}

/// Parses a manifold document in key/value or JSON form.
pub fn load_spec(text: &str) -> Result<ManifoldSpec> {
    let entries = if text.trim_start().starts_with('{') {
        entries_from_json(text)?
    } else {
        entries_from_lines(text)?
    };
    build(entries)
}

/// Reads and parses a manifold file. A missing `name` key falls back to the
/// file stem.
pub fn load_spec_file(path: &Path) -> Result<ManifoldSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec = load_spec(&text)?;
    if spec.name == "unnamed" {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            spec.name = stem.to_string();
        }
    }
    Ok(spec)
}

impl ManifoldSpec {
    /// Key/value document that [`load_spec`] reads back to an equal spec.
    /// Zero off-diagonal entries are omitted.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.document_entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// The same entries as a JSON object, all values as strings.
    pub fn to_json(&self) -> Value {
        let map = self
            .document_entries()
            .into_iter()
            .map(|(k, v)| (k, Value::String(v)))
            .collect();
        Value::Object(map)
    }

    fn document_entries(&self) -> Vec<(String, String)> {
        let n = self.dim();
        let mut out = vec![
            ("name".to_string(), self.name.clone()),
            ("dim".to_string(), n.to_string()),
            ("coords".to_string(), self.coords.join(", ")),
        ];
        for i in 0..n {
            for j in i..n {
                let e = &self.metric[i][j];
                if i == j || !e.is_zero() || self.asymmetric_pairs.contains(&(i, j)) {
                    out.push((format!("g[{i}][{j}]"), e.to_string()));
                }
                if self.asymmetric_pairs.contains(&(i, j)) {
                    out.push((format!("g[{j}][{i}]"), self.metric[j][i].to_string()));
                }
            }
        }
        for (i, e) in self.xi.iter().enumerate() {
            if !e.is_zero() {
                out.push((format!("xi[{i}]"), e.to_string()));
            }
        }
        if let Some(phi) = &self.phi {
            let mut any = false;
            for (i, row) in phi.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if !e.is_zero() {
                        out.push((format!("phi[{i}][{j}]"), e.to_string()));
                        any = true;
                    }
                }
            }
            if !any {
                out.push(("phi[0][0]".to_string(), "0".to_string()));
            }
        }
        if let Some(fs) = &self.structure_functions {
            for (k, f) in fs.iter().enumerate() {
                out.push((format!("f{}", k + 1), f.to_string()));
            }
        }
        for (i, (lo, hi)) in self.sampling_box.iter().enumerate() {
            out.push((format!("box[{i}]"), format!("{lo}, {hi}")));
        }
        out.push((
            "parallel_xi_expected".to_string(),
            self.parallel_xi_expected.to_string(),
        ));
        out
    }
}
