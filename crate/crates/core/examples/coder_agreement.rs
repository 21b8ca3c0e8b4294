//! Majority-vote adjudication and inter-coder agreement for binary labels.
//!
//! `cargo run --example coder_agreement`

use echo_virality::labels::{krippendorff_alpha, majority_vote, CoderSheet};

fn main() -> echo_virality::Result<()> {
    let features = vec!["mocking".to_string(), "science".to_string()];
    let votes = [
        ("ana", [[1, 0], [0, 1], [1, 1], [0, 0]]),
        ("ben", [[1, 0], [0, 1], [0, 1], [0, 0]]),
        ("cy", [[1, 1], [0, 1], [1, 1], [1, 0]]),
    ];
    let mut sheets = Vec::new();
    for (coder, rows) in votes {
        let mut s = CoderSheet::new(coder, features.clone());
        for (i, r) in rows.iter().enumerate() {
            s.insert(format!("t{i}"), r.to_vec())?;
        }
        sheets.push(s);
    }
    let adj = majority_vote(&sheets)?;
    for (id, labels) in &adj.labels {
        println!("{id}: {labels:?}");
    }
    println!("unanimous cells: {:.0}%", 100.0 * adj.consensus_rate);
    println!("Krippendorff alpha: {:.3}", krippendorff_alpha(&sheets)?);
    Ok(())
}
