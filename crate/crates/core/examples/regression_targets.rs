//! Turns answer votes into bounded regression targets.

use cqa_eval::scoring::{
    regression_raw, regression_scale, tukey_fences, AnswerVotes, QuestionVotes,
};

fn question(id: u64, votes: &[i64]) -> QuestionVotes {
    QuestionVotes {
        question_id: id,
        answers: votes
            .iter()
            .enumerate()
            .map(|(i, &v)| AnswerVotes {
                answer_id: id * 10 + i as u64,
                votes: v,
                accepted: i == 0,
            })
            .collect(),
    }
}

fn main() -> cqa_eval::Result<()> {
    let data = [
        question(1, &[10, 2, 0]),
        question(2, &[-4, 1, 3]),
        question(3, &[40, -2]),
        question(4, &[8, 4, 0, -8]),
    ];
    let raw = regression_raw(&data)?;
    let values: Vec<f64> = raw.iter().map(|r| r.1).collect();
    println!("{:?}", tukey_fences(&values)?);
    println!("{:>6} {:>8} {:>8} outlier", "answer", "raw", "target");
    for s in regression_scale(&raw)? {
        println!(
            "{:>6} {:>8.4} {:>8.4} {}",
            s.answer_id, s.raw, s.scaled, s.is_outlier
        );
    }
    Ok(())
}
