//! Maximum-likelihood virality for a hand-built exposure ledger.
//!
//! `cargo run --example infer_virality`

use echo_virality::virality::{log_likelihood, mle_from_alphas, DEFAULT_REL_TOL};

fn main() {
    // activities of exposed users who retweeted, and of those who did not
    let successes = [0.9, 0.4, 0.7];
    let failures = [1.0, 0.8, 0.3, 0.5, 0.6, 0.2];

    let sol = mle_from_alphas(&successes, &failures, DEFAULT_REL_TOL);
    println!("r_hat     = {:.6}", sol.r_hat);
    println!("r_max     = {:.6}", sol.r_max);
    println!("boundary  = {}", sol.boundary.as_str());
    println!("bisection = {} steps", sol.iterations);

    println!("\nlog-likelihood around the optimum:");
    for f in [0.5, 0.9, 1.0, 1.1, 1.5] {
        let r = sol.r_hat * f;
        if r < sol.r_max {
            println!(
                "  r = {r:.4}  ll = {:.5}",
                log_likelihood(&successes, &failures, r)
            );
        }
    }

    let none_failed = mle_from_alphas(&successes, &[], DEFAULT_REL_TOL);
    println!(
        "\nwith no failures the estimate sits at r_max = {:.4} ({})",
        none_failed.r_hat,
        none_failed.boundary.as_str()
    );
}
