//! User activity and per-tweet virality inference.
//!
//! An exposed user `u` retweets with probability `alpha_u * r`. For a tweet
//! with successes `S` and failures `F` the log-likelihood is
//!
//! ```text
//! l(r) = |S| ln r + sum_S ln alpha_u + sum_F ln(1 - alpha_w r)
//! ```
//!
//! which is strictly concave on `(0, 1 / max_F alpha)`. Its derivative
//! `|S|/r - sum_F alpha_w / (1 - alpha_w r)` falls monotonically from +inf
//! to -inf there, so the maximizer is found by bisection on the derivative.
//! The bracket depends only on the failures, which makes the estimate a
//! function of `|S|` alone on the success side.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::ExposureLedger;
use crate::ingest::TweetRecord;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserActivity {
    pub raw: u64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityMode {
    /// Raw counts divided by the largest count, so every probability stays ≤ 1 for r ≤ 1.
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, Default)]
pub struct Activities {
    pub users: BTreeMap<String, UserActivity>,
    pub mode: ActivityMode,
}

impl Activities {
    /// Activity used as `alpha`; zero for unknown users.
    pub fn alpha(&self, user: &str) -> f64 {
        self.users.get(user).map_or(0.0, |a| match self.mode {
            ActivityMode::Normalized => a.normalized,
            ActivityMode::Raw => a.raw as f64,
        })
    }

    /// Builds activities directly from `alpha` values (already on the desired scale).
    pub fn from_alphas<'a, I>(alphas: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        Activities {
            users: alphas
                .into_iter()
                .map(|(u, a)| {
                    (
                        u.to_owned(),
                        UserActivity {
                            raw: 0,
                            normalized: a,
                        },
                    )
                })
                .collect(),
            mode: ActivityMode::Normalized,
        }
    }
}

/// Counts every tweet and retweet per user and normalizes by the largest count.
pub fn compute_activities(records: &[TweetRecord], mode: ActivityMode) -> Activities {
    let mut raw: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        *raw.entry(r.user_id.clone()).or_default() += 1;
    }
    let max = raw.values().copied().max().unwrap_or(0);
    Activities {
        users: raw
            .into_iter()
            .map(|(u, n)| {
                let normalized = if max == 0 { 0.0 } else { n as f64 / max as f64 };
                (u, UserActivity { raw: n, normalized })
            })
            .collect(),
        mode,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Interior,
    /// The likelihood still increases at `r_max` (e.g. no failures).
    UpperBoundary,
    /// No successes; the estimate is undefined.
    ZeroSuccesses,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Interior => "interior",
            Boundary::UpperBoundary => "upper_boundary",
            Boundary::ZeroSuccesses => "zero_successes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleSolution {
    pub r_hat: f64,
    pub r_max: f64,
    pub boundary: Boundary,
    pub iterations: usize,
}

/// Derivative of the log-likelihood in `r`.
pub fn score(successes: usize, failure_alphas: &[f64], r: f64) -> f64 {
    successes as f64 / r
        - failure_alphas
            .iter()
            .map(|a| a / (1.0 - a * r))
            .sum::<f64>()
}

/// Log-likelihood at `r`.
pub fn log_likelihood(success_alphas: &[f64], failure_alphas: &[f64], r: f64) -> f64 {
    success_alphas.iter().map(|a| (a * r).ln()).sum::<f64>()
        + failure_alphas.iter().map(|a| (-a * r).ln_1p()).sum::<f64>()
}

/// Maximizes the likelihood over `(0, r_max]`, `r_max = 1 / max alpha` over all
/// trials. All alphas must be positive.
pub fn mle_from_alphas(
    success_alphas: &[f64],
    failure_alphas: &[f64],
    rel_tol: f64,
) -> MleSolution {
    let max_alpha = success_alphas
        .iter()
        .chain(failure_alphas)
        .copied()
        .fold(0.0_f64, f64::max);
    let r_max = if max_alpha > 0.0 {
        1.0 / max_alpha
    } else {
        f64::INFINITY
    };
    let k = success_alphas.len();
    if k == 0 {
        return MleSolution {
            r_hat: 0.0,
            r_max,
            boundary: Boundary::ZeroSuccesses,
            iterations: 0,
        };
    }
    let upper = MleSolution {
        r_hat: r_max,
        r_max,
        boundary: Boundary::UpperBoundary,
        iterations: 0,
    };
    if failure_alphas.is_empty() {
        return upper;
    }
    let pole = 1.0 / failure_alphas.iter().copied().fold(0.0_f64, f64::max);
    if r_max < pole && score(k, failure_alphas, r_max) >= 0.0 {
        return upper;
    }
    // score(lo) > 0 > score(hi) throughout
    let (mut lo, mut hi) = (0.0_f64, pole);
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if score(k, failure_alphas, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    if root >= r_max {
        return MleSolution {
            iterations,
            ..upper
        };
    }
    MleSolution {
        r_hat: root,
        r_max,
        boundary: Boundary::Interior,
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViralityEstimate {
    pub tweet_id: String,
    pub group: u8,
    /// Undefined (0) when `boundary` is `ZeroSuccesses`.
    pub r_hat: f64,
    pub r_max: f64,
    pub ln_r: Option<f64>,
    pub successes: usize,
    pub failures: usize,
    /// Trial users dropped because their activity is zero.
    pub zero_activity: usize,
    pub boundary: Boundary,
}

impl ViralityEstimate {
    pub fn exposed(&self) -> usize {
        self.successes + self.failures
    }
}

/// Maximum-likelihood virality for one ledger.
pub fn mle_virality(ledger: &ExposureLedger, act: &Activities) -> ViralityEstimate {
    mle_virality_tol(ledger, act, DEFAULT_REL_TOL)
}

pub fn mle_virality_tol(
    ledger: &ExposureLedger,
    act: &Activities,
    rel_tol: f64,
) -> ViralityEstimate {
    let mut zero_activity = 0;
    let mut collect = |users: &std::collections::BTreeSet<String>| -> Vec<f64> {
        users
            .iter()
            .map(|u| act.alpha(u))
            .filter(|&a| {
                let keep = a > 0.0;
                if !keep {
                    zero_activity += 1;
                }
                keep
            })
            .collect()
    };
    let s = collect(&ledger.successes);
    let f = collect(&ledger.failures);
    let sol = mle_from_alphas(&s, &f, rel_tol);
    ViralityEstimate {
        tweet_id: ledger.tweet_id.clone(),
        group: ledger.group,
        r_hat: sol.r_hat,
        r_max: sol.r_max,
        ln_r: (sol.r_hat > 0.0).then(|| sol.r_hat.ln()),
        successes: s.len(),
        failures: f.len(),
        zero_activity,
        boundary: sol.boundary,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipEntry {
    pub tweet_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViralityTable {
    /// Sorted by tweet id.
    pub estimates: Vec<ViralityEstimate>,
    pub skipped: Vec<SkipEntry>,
}

impl ViralityTable {
    pub fn get(&self, tweet_id: &str) -> Option<&ViralityEstimate> {
        self.estimates
            .binary_search_by(|e| e.tweet_id.as_str().cmp(tweet_id))
            .ok()
            .map(|i| &self.estimates[i])
    }
}

/// Scores every ledger; zero-success tweets become skip entries.
pub fn score_corpus(ledgers: &[&ExposureLedger], act: &Activities) -> ViralityTable {
    let results: Vec<ViralityEstimate> = ledgers.par_iter().map(|l| mle_virality(l, act)).collect();
    let mut table = ViralityTable::default();
    for est in results {
        if est.boundary == Boundary::ZeroSuccesses {
            table.skipped.push(SkipEntry {
                tweet_id: est.tweet_id,
                reason: "zero_successes".into(),
            });
        } else {
            table.estimates.push(est);
        }
    }
    table.estimates.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    table.skipped.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    table
}

pub fn write_virality_csv(path: &Path, table: &ViralityTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "tweet_id",
        "group",
        "successes",
        "failures",
        "exposed",
        "r_hat",
        "ln_r",
        "boundary",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for e in &table.estimates {
        w.write_record([
            e.tweet_id.clone(),
            e.group.to_string(),
            e.successes.to_string(),
            e.failures.to_string(),
            e.exposed().to_string(),
            e.r_hat.to_string(),
            e.ln_r.map(|v| v.to_string()).unwrap_or_default(),
            e.boundary.as_str().to_owned(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
