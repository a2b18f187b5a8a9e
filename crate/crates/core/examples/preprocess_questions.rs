//! Classifies questions as API usage, rejects rich content and converts the
//! surviving HTML bodies to plain text.

use cqa_eval::ingest::{parse_posts, prepare, SplitConfig};
use cqa_eval::preprocess::{default_api_usage, run_preprocess, sanitize_html};
use cqa_eval::synth::posts_fixture;

fn main() -> cqa_eval::Result<()> {
    println!(
        "{:?}",
        sanitize_html(
            "<p>Use <code>zip(a, b)</code> &amp; unpack:</p><pre><code>x, y = p</code></pre>"
        )
    );

    let fixture = posts_fixture(30, 3);
    let parsed = parse_posts(fixture.to_xml().as_slice())?;
    let ingested = prepare(
        parsed,
        &SplitConfig {
            cutoff: "2030-01-01T00:00:00Z".parse().expect("valid timestamp"),
            tag_filter: vec!["python".into()],
        },
    );
    let questions: Vec<_> = ingested.questions.into_iter().map(|q| q.record).collect();
    let rules = default_api_usage().compile()?;
    let out = run_preprocess(&questions, &ingested.answers, &rules);
    println!("{:#?}", out.stats);
    assert!(out.stats.is_balanced());
    for q in out.questions.iter().take(3) {
        println!("{}: {}", q.id, q.body_text);
    }
    Ok(())
}
