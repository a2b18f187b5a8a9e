//! Adds generated answers to single-answer questions so they yield pairs.

use cqa_eval::scoring::{
    inject_synthetic, score_question, AnswerVotes, QuestionVotes, SyntheticConfig,
};
use cqa_eval::synth::synthetic_generations;

fn main() -> cqa_eval::Result<()> {
    let questions: Vec<_> = [(1u64, 5i64), (2, 0)]
        .into_iter()
        .map(|(id, votes)| {
            score_question(&QuestionVotes {
                question_id: id,
                answers: vec![AnswerVotes {
                    answer_id: id * 100,
                    votes,
                    accepted: true,
                }],
            })
        })
        .collect();
    let generations = synthetic_generations(&[1, 2], 2, 5);
    let config = SyntheticConfig {
        seed: 5,
        first_id: 1000,
        ..Default::default()
    };
    let batch = inject_synthetic(&questions, &generations, &config)?;
    for a in &batch.answers {
        println!(
            "answer {} for question {}: target {:.4}",
            a.id, a.question_id, a.target
        );
    }
    for p in &batch.pairs {
        println!("pair {} > {} ({:?})", p.preferred_id, p.other_id, p.source);
    }
    Ok(())
}
