//! Spearman correlation between metrics, a bootstrap interval, and
//! two-sample KS and Mann-Whitney tests.

use cqa_eval::analysis::{ks_two_sample, mann_whitney_u, mean_with_bootstrap_ci, spearman};

fn main() -> cqa_eval::Result<()> {
    let bleu = [0.12, 0.40, 0.33, 0.05, 0.61, 0.27];
    let rouge = [0.30, 0.52, 0.55, 0.20, 0.71, 0.38];
    println!("spearman: {:.4}", spearman(&bleu, &rouge)?);

    let s = mean_with_bootstrap_ci(&rouge, 2000, 0.95, 9)?;
    println!(
        "mean {:.4} [{:.4}, {:.4}] sd {:.4}",
        s.mean, s.ci_low, s.ci_high, s.stddev
    );

    let tuned = [0.61, 0.55, 0.72, 0.48, 0.66, 0.59, 0.70];
    let base = [0.41, 0.38, 0.52, 0.45, 0.36, 0.49, 0.44];
    let ks = ks_two_sample(&tuned, &base)?;
    let mw = mann_whitney_u(&tuned, &base)?;
    println!("KS D={:.4} p={:.4}", ks.statistic, ks.p_value);
    println!("Mann-Whitney U={:.1} p={:.4}", mw.statistic, mw.p_value);
    Ok(())
}
