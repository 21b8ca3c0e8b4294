//! Every stage on the bundled two-community fixture, with a summary of the
//! manifest.
//!
//! `cargo run --release --example full_pipeline [OUT_DIR]`

use std::path::{Path, PathBuf};

use echo_virality::pipeline::{run_pipeline, PipelineConfig};

fn main() -> echo_virality::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/small/pipeline.json");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("echovir-example"));
    let cfg = PipelineConfig {
        out: out.clone(),
        ..PipelineConfig::load(&fixture)?
    };
    let outcome = run_pipeline(&cfg, None);
    if let Some(e) = outcome.error {
        return Err(e);
    }
    let m = &outcome.manifest;
    for s in &m.stages {
        println!("{:<10} {}", s.stage, s.status);
    }
    for key in ["partition", "virality", "regress"] {
        println!("{key}: {}", m.counts[key]);
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
