//! Cross-validated group lasso on a design with a grouped block of features.
//!
//! `cargo run --release --example group_lasso`

use echo_virality::labels::FeatureMatrix;
use echo_virality::lasso::{fit_cv, pct_change, LassoConfig};
use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> echo_virality::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200;
    let columns = [
        "humor", "insult", "chart", "author_a", "author_b", "author_c",
    ];
    let x = Array2::from_shape_fn((n, 6), |(_, j)| match j {
        0..=2 => f64::from(u8::from(rng.random_bool(0.4))),
        _ => 0.0,
    });
    let mut x = x;
    for i in 0..n {
        // one-hot author block
        x[[i, 3 + i % 3]] = 1.0;
    }
    let y = Array1::from_shape_fn(n, |i| {
        -2.0 + 0.3 * x[[i, 0]] - 0.2 * x[[i, 1]] + 0.25 * x[[i, 4]] + rng.random_range(-0.1..0.1)
    });
    let fm = FeatureMatrix {
        group: 0,
        tweet_ids: (0..n).map(|i| format!("t{i}")).collect(),
        author_ids: (0..n).map(|i| format!("a{}", i % 3)).collect(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        x,
        y,
        groups: vec![vec![0], vec![1], vec![2], vec![3, 4, 5]],
        group_names: vec![
            "humor".into(),
            "insult".into(),
            "chart".into(),
            "authors".into(),
        ],
    };
    let fit = fit_cv(&fm, &LassoConfig::default())?;
    println!("lambda chosen by 5-fold CV: {:.5}", fit.lambda);
    for (name, b) in columns.iter().zip(&fit.beta) {
        println!(
            "  {name:<9} beta {b:>8.4}  ({:+.1}% virality)",
            pct_change(*b)
        );
    }
    println!(
        "KKT residual {:.2e} after {} iterations",
        fit.kkt_residual, fit.iterations
    );
    Ok(())
}
