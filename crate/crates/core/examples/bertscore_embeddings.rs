//! BertScore matching over precomputed token embeddings, and validation of
//! an embeddings document.

use cqa_eval::io::jsonl_bytes;
use cqa_eval::metrics::{bertscore_core, validate_embeddings, EmbeddingRow};
use cqa_eval::synth::pseudo_embedding;

fn main() -> cqa_eval::Result<()> {
    let reference = pseudo_embedding("ref:1", "open the file with a context manager", 32)?;
    for (id, text) in [
        ("gen:1:0", "open the file with a context manager"),
        ("gen:1:1", "use a context manager to open the file"),
        ("gen:1:2", "numpy arrays are fast"),
    ] {
        let cand = pseudo_embedding(id, text, 32)?;
        let s = bertscore_core(&cand, &reference)?;
        println!(
            "P {:.4} R {:.4} F1 {:.4}  {text}",
            s.precision, s.recall, s.f1
        );
    }

    let rows = vec![EmbeddingRow::encode(&reference)];
    let document = String::from_utf8(jsonl_bytes(None, &rows)?).expect("utf-8");
    println!(
        "valid document violations: {}",
        validate_embeddings(&document).len()
    );
    for v in validate_embeddings("{\"text_id\": 3}\nnot json\n") {
        println!("line {}: {}", v.line, v.message);
    }
    Ok(())
}
