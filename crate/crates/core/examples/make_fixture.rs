//! Writes the labeled two-community fixture (tweets, follow edges, three
//! coder sheets, planted truth and a pipeline config) to a directory.
//!
//! `cargo run --example make_fixture -- OUT_DIR`

use std::path::PathBuf;

use echo_virality::pipeline::write_fixture;
use echo_virality::sim::FixtureConfig;

fn main() -> echo_virality::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixture"));
    let cfg = FixtureConfig::default();
    write_fixture(&cfg, &out)?;
    println!(
        "{} tweets by {} authors per block in {}",
        cfg.tweets,
        cfg.authors_per_block,
        out.display()
    );
    Ok(())
}
