//! Sentence BLEU and Rouge-N between a generation and a reference.

use cqa_eval::metrics::{rouge_n, sentence_bleu, tokenize, TokenizerMode};

fn main() -> cqa_eval::Result<()> {
    let reference = "Use df.groupby('key').sum() to aggregate the frame.";
    for candidate in [
        reference,
        "Use df.groupby('key').sum() to aggregate.",
        "Call groupby then sum on the frame.",
        "Try restarting your computer.",
    ] {
        let bleu = sentence_bleu(
            &tokenize(candidate, TokenizerMode::Bleu13a),
            &tokenize(reference, TokenizerMode::Bleu13a),
            4,
        )?;
        let c = tokenize(candidate, TokenizerMode::Simple);
        let r = tokenize(reference, TokenizerMode::Simple);
        println!(
            "bleu {bleu:.4} rouge1 {:.4} rouge2 {:.4}  {candidate}",
            rouge_n(&c, &r, 1)?,
            rouge_n(&c, &r, 2)?
        );
    }
    Ok(())
}
