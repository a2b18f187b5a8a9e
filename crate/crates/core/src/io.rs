//! Interchange files: JSON Lines records behind a metadata header, CSV
//! tables, content digests and all-or-nothing output commits.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub tool_version: String,
    pub subcommand: String,
    pub seed: u64,
    /// sha256 hex digest of each input, keyed by input role.
    pub input_digests: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            seed,
            input_digests: BTreeMap::new(),
        }
    }
}

#[derive(Serialize)]
struct MetaLine<'a> {
    meta: &'a Meta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OwnedMetaLine {
    meta: Meta,
}

/// True for a line holding a `{"meta": ...}` header record.
pub fn is_meta_line(line: &str) -> bool {
    line.trim_start().starts_with("{\"meta\":")
}

/// Parses a metadata header line.
pub fn parse_meta_line(line: &str) -> Option<Meta> {
    serde_json::from_str::<OwnedMetaLine>(line)
        .ok()
        .map(|m| m.meta)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Streams a file through sha256.
pub fn digest_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Reads JSON Lines records, skipping a leading metadata header and blank
/// lines. Errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R, source_name: &str) -> Result<Vec<T>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || (idx == 0 && is_meta_line(&line)) {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::Record {
            source_name: source_name.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path)?;
    read_jsonl(std::io::BufReader::new(file), &path.display().to_string())
}

/// Renders records as JSON Lines, optionally preceded by a metadata header.
pub fn jsonl_bytes<T: Serialize>(meta: Option<&Meta>, rows: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    if let Some(meta) = meta {
        serde_json::to_writer(&mut out, &MetaLine { meta }).map_err(json_error)?;
        out.push(b'\n');
    }
    for row in rows {
        serde_json::to_writer(&mut out, row).map_err(json_error)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Renders a JSON document whose first key, `meta`, holds the metadata
/// record, followed by the fields of `body`.
pub fn json_bytes<T: Serialize>(meta: &Meta, body: &T) -> Result<Vec<u8>> {
    let value = serde_json::to_value(body).map_err(json_error)?;
    let serde_json::Value::Object(fields) = value else {
        return Err(Error::invalid("JSON output body must be an object"));
    };
    let mut document = serde_json::Map::with_capacity(fields.len() + 1);
    document.insert(
        "meta".into(),
        serde_json::to_value(meta).map_err(json_error)?,
    );
    for (key, v) in fields {
        if key == "meta" {
            return Err(Error::invalid(
                "JSON output body must not have a meta field",
            ));
        }
        document.insert(key, v);
    }
    let mut out = serde_json::to_vec_pretty(&document).map_err(json_error)?;
    out.push(b'\n');
    Ok(out)
}

/// Renders a CSV table whose first line is a `# meta: {...}` comment.
pub fn csv_bytes<T: Serialize>(meta: &Meta, rows: &[T]) -> Result<Vec<u8>> {
    let mut out = b"# meta: ".to_vec();
    serde_json::to_writer(&mut out, meta).map_err(json_error)?;
    out.push(b'\n');
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::invalid(format!("CSV encoding failed: {e}")))?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn json_error(e: serde_json::Error) -> Error {
    Error::invalid(format!("JSON encoding failed: {e}"))
}

/// Output files staged in memory and written together.
///
/// Each file goes to a temporary sibling first; only once every file has
/// been written and flushed are they renamed into place, so a failure
/// before commit leaves the destination untouched.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, path.clone()));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
            written.push(path);
        }
        Ok(written)
    }
}
