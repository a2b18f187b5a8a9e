//! The `embeddings.jsonl` interchange format: one row per text with
//! little-endian f32 vectors, row-major, base64-encoded.

use std::collections::HashMap;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRow {
    pub text_id: String,
    pub dim: usize,
    pub tokens: Vec<String>,
    pub vectors_b64: String,
}

impl EmbeddingRow {
    /// Encodes a table, narrowing values to f32.
    pub fn encode(table: &EmbeddingTable) -> Self {
        let mut bytes = Vec::with_capacity(table.values().len() * 4);
        for &v in table.values() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        Self {
            text_id: table.text_id.clone(),
            dim: table.dim(),
            tokens: table.tokens().to_vec(),
            vectors_b64: STANDARD.encode(bytes),
        }
    }

    pub fn decode(&self) -> Result<EmbeddingTable> {
        let bytes = STANDARD
            .decode(&self.vectors_b64)
            .map_err(|e| Error::invalid(format!("{}: bad base64: {e}", self.text_id)))?;
        let expected = self.tokens.len() * self.dim * 4;
        if bytes.len() != expected {
            return Err(Error::invalid(format!(
                "{}: {} vector bytes, expected {} ({} tokens × {} dims × 4)",
                self.text_id,
                bytes.len(),
                expected,
                self.tokens.len(),
                self.dim
            )));
        }
        let values = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        EmbeddingTable::new(self.text_id.clone(), self.dim, self.tokens.clone(), values)
    }
}

/// Embedding tables keyed by text id.
pub type EmbeddingIndex = HashMap<String, EmbeddingTable>;

/// Decodes rows into an index. Repeated ids must carry identical rows.
pub fn index_embeddings(rows: &[EmbeddingRow]) -> Result<EmbeddingIndex> {
    let mut index = EmbeddingIndex::with_capacity(rows.len());
    for row in rows {
        let table = row.decode()?;
        if let Some(prev) = index.get(&row.text_id) {
            if *prev != table {
                return Err(Error::invalid(format!(
                    "conflicting embeddings for text id {}",
                    row.text_id
                )));
            }
            continue;
        }
        index.insert(row.text_id.clone(), table);
    }
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaViolation {
    pub line: usize,
    pub message: String,
}

/// Checks every line of an `embeddings.jsonl` document against the strict
/// schema and returns all violations (empty when the file is valid). A
/// leading metadata record is allowed.
pub fn validate_embeddings(document: &str) -> Vec<SchemaViolation> {
    let mut violations = Vec::new();
    for (idx, line) in document.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 && crate::io::is_meta_line(line) {
            continue;
        }
        let row: EmbeddingRow = match serde_json::from_str(line) {
            Ok(row) => row,
            Err(e) => {
                violations.push(SchemaViolation {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if row.text_id.is_empty() {
            violations.push(SchemaViolation {
                line: line_no,
                message: "empty text_id".into(),
            });
        }
        if let Err(e) = row.decode() {
            violations.push(SchemaViolation {
                line: line_no,
                message: e.to_string(),
            });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::new(
            "gen:1:0",
            2,
            vec!["a".into(), "b".into()],
            vec![0.5, -1.0, 0.25, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn exact_byte_length() {
        let row = EmbeddingRow::encode(&table());
        assert_eq!(STANDARD.decode(&row.vectors_b64).unwrap().len(), 2 * 2 * 4);
        assert_eq!(row.decode().unwrap(), table());
    }

    #[test]
    fn known_encoding() {
        let t = EmbeddingTable::new("x", 1, vec!["a".into()], vec![1.0]).unwrap();
        // 1.0f32 little endian = 00 00 80 3f
        assert_eq!(EmbeddingRow::encode(&t).vectors_b64, "AACAPw==");
    }

    #[test]
    fn validator_flags_problems() {
        let good = serde_json::to_string(&EmbeddingRow::encode(&table())).unwrap();
        assert!(validate_embeddings(&good).is_empty());

        let mut short = EmbeddingRow::encode(&table());
        short.dim = 3;
        let extra = r#"{"text_id":"a","dim":1,"tokens":["x"],"vectors_b64":"AACAPw==","layer":3}"#;
        let doc = format!(
            "{good}\n{}\nnot json\n{extra}\n",
            serde_json::to_string(&short).unwrap()
        );
        let v = validate_embeddings(&doc);
        assert_eq!(v.iter().map(|v| v.line).collect::<Vec<_>>(), vec![2, 3, 4]);
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        let a = EmbeddingRow::encode(&table());
        assert_eq!(index_embeddings(&[a.clone(), a.clone()]).unwrap().len(), 1);
        let mut b = a.clone();
        b.tokens = vec!["c".into(), "d".into()];
        assert!(index_embeddings(&[a, b]).is_err());
    }
}
