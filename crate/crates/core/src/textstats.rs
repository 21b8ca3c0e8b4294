//! Characteristic-word tables and cross-group spread counts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rust_stemmers::{Algorithm, Stemmer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GroupNames, PartitionAssignment};
use crate::ingest::Cascade;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordDiffRow {
    pub token: String,
    /// Tweets of this table's group containing the token.
    pub n_self: usize,
    pub n_other: usize,
    pub diff: i64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizerOptions {
    /// Apply the English Snowball stemmer to plain word tokens.
    pub stem: bool,
}

/// Distinct tokens of one tweet.
pub fn tweet_tokens(text: &str, opts: TokenizerOptions) -> BTreeSet<String> {
    let stemmer = opts.stem.then(|| Stemmer::create(Algorithm::English));
    text::tokenize(text)
        .into_iter()
        .map(|t| match &stemmer {
            Some(s) if !t.starts_with(['#', '@']) => s.stem(&t).into_owned(),
            _ => t,
        })
        .collect()
}

fn document_frequencies<S: AsRef<str>>(
    texts: &[S],
    opts: TokenizerOptions,
) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for t in texts {
        for tok in tweet_tokens(t.as_ref(), opts) {
            *df.entry(tok).or_insert(0) += 1;
        }
    }
    df
}

fn ranked(
    this: &BTreeMap<String, usize>,
    other: &BTreeMap<String, usize>,
    top_k: usize,
) -> Vec<WordDiffRow> {
    let vocab: BTreeSet<&String> = this.keys().chain(other.keys()).collect();
    let mut rows: Vec<WordDiffRow> = vocab
        .into_iter()
        .map(|tok| {
            let a = this.get(tok).copied().unwrap_or(0);
            let b = other.get(tok).copied().unwrap_or(0);
            WordDiffRow {
                token: tok.clone(),
                n_self: a,
                n_other: b,
                diff: a as i64 - b as i64,
            }
        })
        .collect();
    rows.sort_by(|x, y| y.diff.cmp(&x.diff).then_with(|| x.token.cmp(&y.token)));
    rows.truncate(top_k);
    rows
}

/// Tokens ranked by (tweets in A containing it) − (tweets in B containing it),
/// for both directions. Each token counts at most once per tweet.
pub fn word_diff_table<S: AsRef<str>>(
    group_a: &[S],
    group_b: &[S],
    top_k: usize,
    opts: TokenizerOptions,
) -> (Vec<WordDiffRow>, Vec<WordDiffRow>) {
    let da = document_frequencies(group_a, opts);
    let db = document_frequencies(group_b, opts);
    (ranked(&da, &db, top_k), ranked(&db, &da, top_k))
}

pub fn write_word_csv(path: &Path, rows: &[WordDiffRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["token", "n_self", "n_other", "diff"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.token.clone(),
            r.n_self.to_string(),
            r.n_other.to_string(),
            r.diff.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreadCount {
    pub tweet_id: String,
    pub retweeters_activist: usize,
    pub retweeters_skeptic: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreadSummary {
    pub tweets: usize,
    pub threshold: usize,
    /// Tweets retweeted more than `threshold` times in both groups.
    pub cross_spreading: usize,
}

/// Retweeters of each cascade per group; unclassified retweeters are ignored.
pub fn cross_group_counts(
    cascades: &[Cascade],
    assignment: &PartitionAssignment,
    names: GroupNames,
    threshold: usize,
) -> (Vec<SpreadCount>, SpreadSummary) {
    let counts: Vec<SpreadCount> = cascades
        .iter()
        .map(|c| {
            let mut per = [0usize; 2];
            for u in c.retweeters() {
                if let Some(g) = assignment.group_of(u) {
                    per[g as usize] += 1;
                }
            }
            SpreadCount {
                tweet_id: c.tweet_id().to_owned(),
                retweeters_activist: per[names.activist as usize],
                retweeters_skeptic: per[names.skeptic as usize],
            }
        })
        .collect();
    let cross = counts
        .iter()
        .filter(|s| s.retweeters_activist > threshold && s.retweeters_skeptic > threshold)
        .count();
    let summary = SpreadSummary {
        tweets: counts.len(),
        threshold,
        cross_spreading: cross,
    };
    (counts, summary)
}

pub fn write_spread_csv(path: &Path, rows: &[SpreadCount]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["tweet_id", "retweeters_activist", "retweeters_skeptic"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.tweet_id.clone(),
            r.retweeters_activist.to_string(),
            r.retweeters_skeptic.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CascadeFlags, TweetRecord};

    #[test]
    fn crisis_tops_group_a() {
        let a = ["climate crisis now", "crisis means act"];
        let b = ["climate hoax"];
        let (ta, tb) = word_diff_table(&a, &b, 30, TokenizerOptions::default());
        assert_eq!(
            ta[0],
            WordDiffRow {
                token: "crisis".into(),
                n_self: 2,
                n_other: 0,
                diff: 2
            }
        );
        assert_eq!(tb[0].token, "hoax");
        let climate = ta.iter().find(|r| r.token == "climate").unwrap();
        assert_eq!((climate.n_self, climate.n_other, climate.diff), (1, 1, 0));
    }

    #[test]
    fn token_counted_once_per_tweet() {
        let (ta, _) = word_diff_table(
            &["jet jet JET"],
            &[] as &[&str],
            5,
            TokenizerOptions::default(),
        );
        assert_eq!(ta[0].n_self, 1);
    }

    #[test]
    fn stemmer_is_opt_in() {
        let plain = tweet_tokens("kids protesters #kids", TokenizerOptions::default());
        assert!(plain.contains("kids"));
        let stemmed = tweet_tokens("kids protesters #kids", TokenizerOptions { stem: true });
        assert!(stemmed.contains("kid"));
        assert!(stemmed.contains("#kids"));
    }

    #[test]
    fn spread_threshold_is_strict() {
        let mk = |id: &str, users: Vec<String>| Cascade {
            origin: TweetRecord {
                tweet_id: id.into(),
                user_id: "o".into(),
                timestamp: 0,
                text: String::new(),
                retweet_of: None,
                reply_to: None,
                lang: None,
            },
            retweets: users
                .into_iter()
                .map(|u| TweetRecord {
                    tweet_id: format!("{id}_{u}"),
                    user_id: u,
                    timestamp: 1,
                    text: String::new(),
                    retweet_of: Some(id.into()),
                    reply_to: None,
                    lang: None,
                })
                .collect(),
            flags: CascadeFlags::default(),
        };
        let mut groups = BTreeMap::new();
        let mut both = Vec::new();
        for i in 0..12 {
            groups.insert(format!("a{i}"), 0u8);
            both.push(format!("a{i}"));
        }
        for i in 0..11 {
            groups.insert(format!("s{i}"), 1u8);
            both.push(format!("s{i}"));
        }
        let asg = PartitionAssignment {
            groups,
            cut_size: 0,
            balance: 0.5,
        };
        let one_sided: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
        let cs = vec![mk("x", both), mk("y", one_sided)];
        let names = GroupNames {
            activist: 0,
            skeptic: 1,
        };
        let (rows, summary) = cross_group_counts(&cs, &asg, names, 10);
        assert_eq!(summary.cross_spreading, 1);
        assert_eq!(
            (rows[1].retweeters_activist, rows[1].retweeters_skeptic),
            (0, 4)
        );
    }
}
