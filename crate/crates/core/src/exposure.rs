//! Who saw a tweet, under the platform's display rules.
//!
//! A follower of the original author sees only the original tweet, however
//! many of their followees retweet it. A user who does not follow the author
//! sees only the notification of the first followee who retweeted it. Either
//! way every exposed user gets exactly one chance to retweet.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FollowerNetwork, PartitionAssignment};
use crate::ingest::Cascade;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MainGroup {
    pub group: u8,
    /// Retweeter counts tied and the origin author was unclassified.
    pub tie_fallback: bool,
}

/// The group holding most of the cascade's classified retweeters.
pub fn main_group(cascade: &Cascade, assignment: &PartitionAssignment) -> Result<MainGroup> {
    let mut counts = [0usize; 2];
    for u in cascade.retweeters() {
        if u == cascade.author() {
            continue;
        }
        if let Some(g) = assignment.group_of(u) {
            counts[g as usize] += 1;
        }
    }
    if counts == [0, 0] {
        return Err(Error::Unscorable {
            tweet_id: cascade.tweet_id().to_owned(),
        });
    }
    let pick = |group, tie_fallback| MainGroup {
        group,
        tie_fallback,
    };
    Ok(match counts[0].cmp(&counts[1]) {
        std::cmp::Ordering::Greater => pick(0, false),
        std::cmp::Ordering::Less => pick(1, false),
        std::cmp::Ordering::Equal => match assignment.group_of(cascade.author()) {
            Some(g) => pick(g, false),
            None => pick(0, true),
        },
    })
}

#[derive(Debug, Clone, Copy)]
pub struct GroupScope<'a> {
    pub assignment: &'a PartitionAssignment,
    pub main_group: u8,
}

impl GroupScope<'_> {
    fn contains(&self, user: &str) -> bool {
        self.assignment.group_of(user) == Some(self.main_group)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExposureOptions {
    /// Count retweeters without an exposure pathway as successes.
    pub include_unexposed_successes: bool,
}

/// The event through which a user first saw the tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExposureSource {
    Origin,
    /// Retweet notification; `position` is 1-based in cascade order.
    Retweet {
        user: String,
        position: usize,
    },
    /// Retweeter with no modeled pathway, admitted by option.
    Unmodeled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LedgerFlags {
    pub stub_origin: bool,
    pub timestamp_inversion: bool,
    pub tie_fallback: bool,
    pub unexposed_included: bool,
}

impl LedgerFlags {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.stub_origin {
            parts.push("stub_origin");
        }
        if self.timestamp_inversion {
            parts.push("timestamp_inversion");
        }
        if self.tie_fallback {
            parts.push("tie_fallback");
        }
        if self.unexposed_included {
            parts.push("unexposed_included");
        }
        parts.join("|")
    }
}

/// Per-tweet Bernoulli trials: exposed users split into successes and failures.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExposureLedger {
    pub tweet_id: String,
    pub group: u8,
    pub successes: BTreeSet<String>,
    pub failures: BTreeSet<String>,
    /// Retweeters with no pathway preceding their retweet.
    pub unexposed_successes: BTreeSet<String>,
    /// First exposing event for every member of the exposed set.
    pub attribution: BTreeMap<String, ExposureSource>,
    pub flags: LedgerFlags,
}

impl ExposureLedger {
    pub fn exposed(&self) -> BTreeSet<String> {
        self.successes.union(&self.failures).cloned().collect()
    }

    pub fn exposed_count(&self) -> usize {
        self.successes.len() + self.failures.len()
    }
}

pub fn build_exposure_ledger(
    cascade: &Cascade,
    follow: &FollowerNetwork,
    scope: GroupScope<'_>,
    opts: ExposureOptions,
) -> ExposureLedger {
    let author = cascade.author();
    let author_idx = follow.index_of(author);

    // exposing events in cascade order: the original, then in-group retweets
    let mut sources: Vec<(usize, ExposureSource)> = Vec::new();
    if let Some(a) = author_idx {
        sources.push((a, ExposureSource::Origin));
    }
    let mut retweeters: Vec<(&str, usize)> = Vec::new();
    for (i, rt) in cascade.retweets.iter().enumerate() {
        let user = rt.user_id.as_str();
        if user == author || !scope.contains(user) {
            continue;
        }
        let position = i + 1;
        retweeters.push((user, position));
        if let Some(idx) = follow.index_of(user) {
            sources.push((
                idx,
                ExposureSource::Retweet {
                    user: user.to_owned(),
                    position,
                },
            ));
        }
    }

    // lazily filled membership cache: 0 unknown, 1 in scope, 2 outside
    let mut member = vec![0u8; follow.node_count()];
    let mut in_scope = |idx: usize| {
        if member[idx] == 0 {
            member[idx] = if scope.contains(follow.name(idx)) {
                1
            } else {
                2
            };
        }
        member[idx] == 1
    };
    let mut first: HashMap<usize, (usize, &ExposureSource)> = HashMap::new();
    for (src_idx, source) in &sources {
        let position = match source {
            ExposureSource::Retweet { position, .. } => *position,
            _ => 0,
        };
        for &f in follow.followers_idx(*src_idx) {
            let f = f as usize;
            if Some(f) == author_idx || !in_scope(f) {
                continue;
            }
            first.entry(f).or_insert((position, source));
        }
    }

    let mut ledger = ExposureLedger {
        tweet_id: cascade.tweet_id().to_owned(),
        group: scope.main_group,
        flags: LedgerFlags {
            stub_origin: cascade.flags.stub_origin,
            timestamp_inversion: cascade.flags.timestamp_inversion,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut retweeter_idx = BTreeSet::new();
    for (user, position) in retweeters {
        let idx = follow.index_of(user);
        if let Some(i) = idx {
            retweeter_idx.insert(i);
        }
        match idx.and_then(|i| first.get(&i)) {
            Some((p, src)) if *p < position => {
                ledger.successes.insert(user.to_owned());
                ledger.attribution.insert(user.to_owned(), (*src).clone());
            }
            _ => {
                ledger.unexposed_successes.insert(user.to_owned());
                if opts.include_unexposed_successes {
                    ledger.flags.unexposed_included = true;
                    ledger.successes.insert(user.to_owned());
                    ledger
                        .attribution
                        .insert(user.to_owned(), ExposureSource::Unmodeled);
                }
            }
        }
    }
    for (idx, (_, src)) in &first {
        if retweeter_idx.contains(idx) {
            continue;
        }
        let name = follow.name(*idx).to_owned();
        ledger.attribution.insert(name.clone(), (*src).clone());
        ledger.failures.insert(name);
    }
    ledger
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLedger {
    pub ledger: ExposureLedger,
    pub main: MainGroup,
}

/// Chooses each cascade's main group and builds its ledger. Cascades without
/// classified retweeters come back as errors in the same position.
pub fn build_ledgers(
    cascades: &[Cascade],
    follow: &FollowerNetwork,
    assignment: &PartitionAssignment,
    opts: ExposureOptions,
) -> Vec<Result<ScoredLedger>> {
    use rayon::prelude::*;
    cascades
        .par_iter()
        .map(|c| {
            let main = main_group(c, assignment)?;
            let scope = GroupScope {
                assignment,
                main_group: main.group,
            };
            let mut ledger = build_exposure_ledger(c, follow, scope, opts);
            ledger.flags.tie_fallback = main.tie_fallback;
            Ok(ScoredLedger { ledger, main })
        })
        .collect()
}

pub fn write_ledger_csv(path: &Path, ledgers: &[&ExposureLedger]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "tweet_id",
        "exposed",
        "successes",
        "failures",
        "unexposed_successes",
        "flags",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for l in ledgers {
        w.write_record([
            l.tweet_id.clone(),
            l.exposed_count().to_string(),
            l.successes.len().to_string(),
            l.failures.len().to_string(),
            l.unexposed_successes.len().to_string(),
            l.flags.describe(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
