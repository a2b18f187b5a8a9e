use serde::{Deserialize, Serialize};

use super::QuestionVotes;
use crate::stats::quantile_sorted;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionScore {
    pub answer_id: u64,
    /// Votes divided by the question's answer count.
    pub raw: f64,
    /// Final target in [-1, 1], same sign as `raw`.
    pub scaled: f64,
    pub is_outlier: bool,
}

/// Normalizes votes by the number of answers to the same question.
///
/// Output follows input order: questions in order, answers in order.
pub fn regression_raw(votes_by_question: &[QuestionVotes]) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::new();
    for q in votes_by_question {
        if q.answers.is_empty() {
            return Err(Error::invalid(format!(
                "question {} has no answers",
                q.question_id
            )));
        }
        let n = q.answers.len() as f64;
        out.extend(q.answers.iter().map(|a| (a.answer_id, a.votes as f64 / n)));
    }
    Ok(out)
}

/// Tukey fences over a set of raw scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub q1: f64,
    pub q3: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Fences {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// `Q1 - 1.5 IQR` and `Q3 + 1.5 IQR` with linearly interpolated quartiles.
pub fn tukey_fences(raws: &[f64]) -> Result<Fences> {
    if raws.is_empty() {
        return Err(Error::invalid("no scores to fence"));
    }
    if raws.iter().any(|r| !r.is_finite()) {
        return Err(Error::invalid("raw scores must be finite"));
    }
    let mut sorted = raws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    Ok(Fences {
        q1,
        q3,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    })
}

/// Fences all raws globally, clips outliers into [-1, 1] and scales
/// inliers per sign group: positives by the largest positive inlier,
/// negatives by the largest inlier magnitude among negatives.
pub fn regression_scale(raws: &[(u64, f64)]) -> Result<Vec<RegressionScore>> {
    let values: Vec<f64> = raws.iter().map(|&(_, r)| r).collect();
    let fences = tukey_fences(&values)?;

    let (mut max_pos, mut max_neg) = (0.0f64, 0.0f64);
    for &r in values.iter().filter(|&&r| fences.contains(r)) {
        if r > 0.0 {
            max_pos = max_pos.max(r);
        } else if r < 0.0 {
            max_neg = max_neg.max(-r);
        }
    }

    Ok(raws
        .iter()
        .map(|&(answer_id, raw)| {
            let is_outlier = !fences.contains(raw);
            let scaled = if is_outlier {
                raw.clamp(-1.0, 1.0)
            } else if raw > 0.0 {
                raw / max_pos
            } else if raw < 0.0 {
                raw / max_neg
            } else {
                0.0
            };
            RegressionScore {
                answer_id,
                raw,
                scaled,
                is_outlier,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::AnswerVotes;
    use super::*;

    fn question(id: u64, votes: &[i64]) -> QuestionVotes {
        QuestionVotes {
            question_id: id,
            answers: votes
                .iter()
                .enumerate()
                .map(|(i, &v)| AnswerVotes {
                    answer_id: id * 100 + i as u64,
                    votes: v,
                    accepted: false,
                })
                .collect(),
        }
    }

    fn raws_of(qs: &[QuestionVotes]) -> Vec<f64> {
        regression_raw(qs)
            .unwrap()
            .into_iter()
            .map(|(_, r)| r)
            .collect()
    }

    #[test]
    fn raw_is_votes_over_answer_count() {
        assert_eq!(raws_of(&[question(1, &[10, 2])]), vec![5.0, 1.0]);
        assert_eq!(raws_of(&[question(1, &[0])]), vec![0.0]);
        assert_eq!(
            raws_of(&[question(1, &[-4, 1, 3])]),
            vec![-4.0 / 3.0, 1.0 / 3.0, 1.0]
        );
    }

    #[test]
    fn raw_requires_answers() {
        assert!(regression_raw(&[question(1, &[])]).is_err());
    }

    #[test]
    fn constant_raws_scale_to_one() {
        let raws: Vec<(u64, f64)> = (0..5).map(|i| (i, 0.5)).collect();
        for s in regression_scale(&raws).unwrap() {
            assert_eq!(s.scaled, 1.0);
            assert!(!s.is_outlier);
        }
    }

    #[test]
    fn four_point_example() {
        // sorted [-0.5, 0.5, 1, 5]: Q1 = 0.25, Q3 = 2, IQR = 1.75,
        // fences [-2.375, 4.625]; 5.0 is an outlier clipped to 1.
        let raws = vec![(1, 5.0), (2, 1.0), (3, 0.5), (4, -0.5)];
        let fences = tukey_fences(&[5.0, 1.0, 0.5, -0.5]).unwrap();
        assert_eq!((fences.lower, fences.upper), (-2.375, 4.625));
        let out = regression_scale(&raws).unwrap();
        let scaled: Vec<f64> = out.iter().map(|s| s.scaled).collect();
        assert_eq!(scaled, vec![1.0, 1.0, 0.5, -1.0]);
        assert_eq!(
            out.iter().map(|s| s.is_outlier).collect::<Vec<_>>(),
            vec![true, false, false, false]
        );
    }

    #[test]
    fn single_point_is_its_own_fence() {
        let out = regression_scale(&[(1, -3.0)]).unwrap();
        assert!(!out[0].is_outlier);
        assert_eq!(out[0].scaled, -1.0);
    }

    #[test]
    fn zero_stays_zero() {
        let out = regression_scale(&[(1, 0.0), (2, 1.0), (3, -1.0)]).unwrap();
        assert_eq!(out[0].scaled, 0.0);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(regression_scale(&[]).is_err());
        assert!(regression_scale(&[(1, f64::NAN)]).is_err());
    }
}
