//! Words that separate two groups' tweets, counted once per tweet.
//!
//! `cargo run --example word_tables`

use echo_virality::textstats::{word_diff_table, TokenizerOptions};

fn main() {
    let greens = [
        "Solar is cheaper than ever #ClimateCrisis",
        "March with us for climate justice",
        "Climate science is settled, act now",
    ];
    let skeptics = [
        "Another climate hoax from the elites #ClimateHoax",
        "Solar subsidies are a scam",
        "The climate always changed, no crisis",
    ];
    for stem in [false, true] {
        let (g, s) = word_diff_table(&greens, &skeptics, 5, TokenizerOptions { stem });
        println!("stemming {stem}");
        for (label, rows) in [("greens", &g), ("skeptics", &s)] {
            let words: Vec<String> = rows
                .iter()
                .map(|r| format!("{} ({:+})", r.token, r.diff))
                .collect();
            println!("  {label:<8} {}", words.join(", "));
        }
    }
}
