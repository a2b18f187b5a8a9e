//! Parses a small generated `Posts.xml`, keeps `python` questions and splits
//! them at a cutoff date.

use cqa_eval::ingest::{parse_posts, prepare, Split, SplitConfig};
use cqa_eval::synth::posts_fixture;

fn main() -> cqa_eval::Result<()> {
    let xml = posts_fixture(20, 7).to_xml();
    let parsed = parse_posts(xml.as_slice())?;
    let config = SplitConfig {
        cutoff: "2021-12-14T23:59:59.999Z".parse().expect("valid timestamp"),
        tag_filter: vec!["python".into()],
    };
    let ingested = prepare(parsed, &config);
    println!("{:#?}", ingested.stats);
    for q in ingested.questions.iter().take(5) {
        let side = if q.split == Split::Train {
            "train"
        } else {
            "validation"
        };
        println!("{:>5} {:<10} {}", q.record.id, side, q.record.title);
    }
    Ok(())
}
