//! Preference-data preparation and generation-quality evaluation for
//! programming community Q&A.
//!
//! The crate turns Stack Exchange vote data into reward-model training
//! targets and scores generated answers against reference answers:
//!
//! - [`ingest`]: `Posts.xml` parsing, tag filtering, temporal split.
//! - [`preprocess`]: API-usage classification, rich-content rejection,
//!   HTML to plain text.
//! - [`scoring`]: regression targets, contrastive pairs, synthetic answers
//!   and reward validation (pairwise loss, sign accuracy).
//! - [`metrics`]: sentence BLEU, Rouge-N and the BertScore matching core.
//! - [`analysis`]: bootstrap intervals, metric@k, MRR@k, Spearman
//!   correlation, KS and Mann-Whitney tests.
//! - [`pipeline`]: the file-based stages behind the `cqa-eval` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`:
//!
//! ```bash
//! cargo run --example contrastive_pairs
//! ```

pub mod analysis;
pub mod error;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod scoring;
pub mod synth;

mod stats;
mod timestamp;

pub use error::{Error, Result};
