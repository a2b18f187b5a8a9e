//! Checks reward-model outputs with the pairwise loss and sign accuracy.

use cqa_eval::scoring::validation::{validate_rewards, AnswerReward};
use cqa_eval::scoring::{
    build_pairs, contrastive_loss, regression_raw, regression_scale, score_question, sign_accuracy,
    AnswerVotes, QuestionVotes,
};
use cqa_eval::synth::answer_rewards;

fn main() -> cqa_eval::Result<()> {
    println!(
        "loss at zero margin: {:.6}",
        contrastive_loss(&[0.0], &[0.0])?
    );
    for margin in [-2.0, 0.0, 2.0, 700.0] {
        println!(
            "margin {margin:>6}: loss {:.6}",
            contrastive_loss(&[margin], &[0.0])?
        );
    }
    println!(
        "sign accuracy: {}",
        sign_accuracy(&[0.4, -0.1, 0.2], &[0.9, -0.3, -0.5])?
    );

    let questions: Vec<QuestionVotes> = (1..=5)
        .map(|q| QuestionVotes {
            question_id: q,
            answers: (0..3)
                .map(|i| AnswerVotes {
                    answer_id: q * 10 + i,
                    votes: (q as i64 * 3) - (i as i64 * 4),
                    accepted: i == 0,
                })
                .collect(),
        })
        .collect();
    let scores = regression_scale(&regression_raw(&questions)?)?;
    let pairs = build_pairs(&questions.iter().map(score_question).collect::<Vec<_>>());
    let targets: Vec<(u64, f64)> = scores.iter().map(|s| (s.answer_id, s.scaled)).collect();
    let rewards: Vec<AnswerReward> = answer_rewards(&targets, 0.2, 1);
    println!("{:#?}", validate_rewards(&rewards, &scores, &pairs)?);
    Ok(())
}
