//! Scores answers on a log scale and builds preference pairs.

use cqa_eval::scoring::{build_pairs, contrast_score, score_question, AnswerVotes, QuestionVotes};

fn main() {
    println!("votes accepted score");
    for (votes, accepted) in [
        (-3, true),
        (0, false),
        (1, false),
        (2, true),
        (7, false),
        (100, true),
    ] {
        println!(
            "{votes:>5} {accepted:>8} {:>5}",
            contrast_score(votes, accepted)
        );
    }

    let question = QuestionVotes {
        question_id: 1,
        answers: [
            (11, 12, false),
            (12, 3, true),
            (13, 0, false),
            (14, -2, false),
        ]
        .into_iter()
        .map(|(answer_id, votes, accepted)| AnswerVotes {
            answer_id,
            votes,
            accepted,
        })
        .collect(),
    };
    for pair in build_pairs(&[score_question(&question)]) {
        println!(
            "question {}: {} ({}) preferred over {} ({})",
            pair.question_id,
            pair.preferred_id,
            pair.preferred_score,
            pair.other_id,
            pair.other_score
        );
    }
}
