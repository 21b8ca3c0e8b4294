//! Tweet-record parsing, corpus filtering and cascade assembly.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// One line of `tweets.jsonl`: an original tweet or a retweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub text: String,
    #[serde(default)]
    pub retweet_of: Option<String>,
    #[serde(default)]
    pub reply_to: Option<String>,
    #[serde(default)]
    pub lang: Option<String>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }

    fn validate(&self) -> std::result::Result<(), &'static str> {
        if self.tweet_id.is_empty() {
            return Err("empty tweet_id");
        }
        if self.timestamp < 0 {
            return Err("negative timestamp");
        }
        if self.retweet_of.as_deref() == Some(self.tweet_id.as_str()) {
            return Err("record retweets itself");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub lines: usize,
    pub records: usize,
    pub malformed: usize,
    pub duplicates: usize,
    /// 1-based line numbers of malformed lines.
    pub malformed_lines: Vec<usize>,
}

/// Reads a JSON-lines tweet file. Lines are parsed in parallel and merged in input order.
pub fn parse_records(path: &Path) -> Result<(Vec<TweetRecord>, ParseReport)> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_records_str(&raw))
}

pub fn parse_records_str(raw: &str) -> (Vec<TweetRecord>, ParseReport) {
    let lines: Vec<&str> = raw.lines().collect();
    let parsed: Vec<Option<std::result::Result<TweetRecord, ()>>> = lines
        .par_iter()
        .map(|line| {
            if line.trim().is_empty() {
                return None;
            }
            let rec = serde_json::from_str::<TweetRecord>(line)
                .map_err(|_| ())
                .and_then(|r| r.validate().map(|_| r).map_err(|_| ()));
            Some(rec)
        })
        .collect();

    let mut report = ParseReport {
        lines: lines.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, item) in parsed.into_iter().enumerate() {
        match item {
            None => {}
            Some(Err(())) => {
                report.malformed += 1;
                report.malformed_lines.push(i + 1);
            }
            Some(Ok(rec)) => {
                if seen.insert(rec.tweet_id.clone()) {
                    records.push(rec);
                } else {
                    report.duplicates += 1;
                }
            }
        }
    }
    report.records = records.len();
    (records, report)
}

pub fn write_records(path: &Path, records: &[TweetRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Input(e.to_string()))?;
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusFilter {
    pub substring: String,
    /// Allowed language tags; an empty set allows every record, including untagged ones.
    pub lang_allow: BTreeSet<String>,
    pub exclude_replies: bool,
    /// `(base, qualifier)` stems that must both occur inside one hashtag.
    pub seed_hashtag_pairs: Vec<(String, String)>,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        Self {
            substring: "climate".into(),
            lang_allow: BTreeSet::from(["en".to_owned()]),
            exclude_replies: true,
            seed_hashtag_pairs: vec![
                ("climate".into(), "crisis".into()),
                ("climate".into(), "hoax".into()),
            ],
        }
    }
}

impl CorpusFilter {
    pub fn validate(&self) -> Result<()> {
        if self.substring.is_empty() {
            return Err(Error::Config("filter substring must be nonempty".into()));
        }
        for (b, q) in &self.seed_hashtag_pairs {
            if *b != b.to_lowercase() || *q != q.to_lowercase() {
                return Err(Error::Config(format!(
                    "seed pair ({b},{q}) must be lowercase"
                )));
            }
        }
        Ok(())
    }

    fn accepts(&self, content: &TweetRecord, needle: &str) -> bool {
        if self.exclude_replies && content.reply_to.is_some() {
            return false;
        }
        if !self.lang_allow.is_empty() {
            match &content.lang {
                Some(l) if self.lang_allow.contains(l) => {}
                _ => return false,
            }
        }
        content.text.to_lowercase().contains(needle)
    }

    /// True when some hashtag in `text` contains both stems of any seed pair.
    pub fn matches_seed_pair(&self, text: &str) -> bool {
        text::hashtags(text).any(|tag| {
            let tag = tag.to_lowercase();
            self.seed_hashtag_pairs
                .iter()
                .any(|(b, q)| tag.contains(b.as_str()) && tag.contains(q.as_str()))
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct FilteredCorpus {
    pub records: Vec<TweetRecord>,
    pub eligible_users: BTreeSet<String>,
}

/// The record whose text and metadata a record is judged by (the origin for a
/// retweet when the origin is present, otherwise the record itself), and whether
/// any record on the way there is a reply. `None` on a retweet cycle.
fn content_record<'a>(
    rec: &'a TweetRecord,
    by_id: &HashMap<&str, &'a TweetRecord>,
) -> Option<(&'a TweetRecord, bool)> {
    let mut cur = rec;
    let mut reply = rec.reply_to.is_some();
    let mut hops = 0;
    while let Some(parent) = cur.retweet_of.as_deref().and_then(|id| by_id.get(id)) {
        cur = parent;
        reply |= cur.reply_to.is_some();
        hops += 1;
        if hops > by_id.len() {
            return None;
        }
    }
    Some((cur, reply))
}

/// Keeps topical records and collects the users who posted or retweeted a
/// seed-pair hashtag among them. Input order is preserved.
pub fn filter_corpus(records: &[TweetRecord], filter: &CorpusFilter) -> FilteredCorpus {
    let by_id: HashMap<&str, &TweetRecord> =
        records.iter().map(|r| (r.tweet_id.as_str(), r)).collect();
    let needle = filter.substring.to_lowercase();
    let mut out = FilteredCorpus::default();
    for rec in records {
        let Some((content, chain_has_reply)) = content_record(rec, &by_id) else {
            continue;
        };
        if !filter.accepts(content, &needle) {
            continue;
        }
        // a dropped link would re-root the chain on a second pass
        if filter.exclude_replies && chain_has_reply {
            continue;
        }
        if filter.matches_seed_pair(&content.text) {
            out.eligible_users.insert(rec.user_id.clone());
        }
        out.records.push(rec.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CascadeFlags {
    /// Origin record missing from the corpus; the origin is a synthesized stub.
    pub stub_origin: bool,
    /// At least one retweet was stamped before its origin and was clamped after it.
    pub timestamp_inversion: bool,
}

/// An original tweet and its retweet events, one per retweeting user, in cascade order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub origin: TweetRecord,
    pub retweets: Vec<TweetRecord>,
    pub flags: CascadeFlags,
}

impl Cascade {
    pub fn tweet_id(&self) -> &str {
        &self.origin.tweet_id
    }

    pub fn author(&self) -> &str {
        &self.origin.user_id
    }

    pub fn retweeters(&self) -> impl Iterator<Item = &str> {
        self.retweets.iter().map(|r| r.user_id.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CascadeReport {
    pub cascades: usize,
    pub stub_origins: usize,
    pub inverted: usize,
    pub collapsed_repeats: usize,
    pub unresolvable: usize,
}

/// Groups records into cascades keyed by their ultimate origin, sorted by origin id.
pub fn build_cascades(records: &[TweetRecord]) -> (Vec<Cascade>, CascadeReport) {
    let by_id: HashMap<&str, &TweetRecord> =
        records.iter().map(|r| (r.tweet_id.as_str(), r)).collect();
    let mut report = CascadeReport::default();

    let mut origins: BTreeMap<String, Option<&TweetRecord>> = BTreeMap::new();
    let mut events: BTreeMap<String, Vec<&TweetRecord>> = BTreeMap::new();
    for rec in records {
        match &rec.retweet_of {
            None => {
                origins.insert(rec.tweet_id.clone(), Some(rec));
            }
            Some(first) => match resolve_origin(first, &by_id) {
                Some(root) => {
                    origins.entry(root.clone()).or_insert(None);
                    events.entry(root).or_default().push(rec);
                }
                None => report.unresolvable += 1,
            },
        }
    }

    let mut cascades = Vec::with_capacity(origins.len());
    for (id, origin) in origins {
        let mut flags = CascadeFlags::default();
        let mut evs = events.remove(&id).unwrap_or_default();
        let origin = match origin {
            Some(o) => o.clone(),
            None => {
                flags.stub_origin = true;
                report.stub_origins += 1;
                let first = evs
                    .iter()
                    .min_by_key(|r| (r.timestamp, &r.tweet_id))
                    .unwrap();
                TweetRecord {
                    tweet_id: id.clone(),
                    user_id: String::new(),
                    timestamp: first.timestamp,
                    text: first.text.clone(),
                    retweet_of: None,
                    reply_to: None,
                    lang: first.lang.clone(),
                }
            }
        };
        let t0 = origin.timestamp;
        evs.sort_by(|a, b| {
            (a.timestamp.max(t0), &a.tweet_id).cmp(&(b.timestamp.max(t0), &b.tweet_id))
        });
        let mut seen = HashSet::new();
        let mut retweets = Vec::with_capacity(evs.len());
        for ev in evs {
            if !seen.insert(ev.user_id.as_str()) {
                report.collapsed_repeats += 1;
                continue;
            }
            if ev.timestamp < t0 {
                flags.timestamp_inversion = true;
            }
            let mut ev = ev.clone();
            ev.retweet_of = Some(id.clone());
            retweets.push(ev);
        }
        if flags.timestamp_inversion {
            report.inverted += 1;
        }
        cascades.push(Cascade {
            origin,
            retweets,
            flags,
        });
    }
    report.cascades = cascades.len();
    (cascades, report)
}

/// Follows `retweet_of` links through the corpus; `None` on a cycle.
fn resolve_origin(start: &str, by_id: &HashMap<&str, &TweetRecord>) -> Option<String> {
    let mut cur = start;
    let mut visited = HashSet::new();
    loop {
        if !visited.insert(cur) {
            return None;
        }
        match by_id.get(cur).and_then(|r| r.retweet_of.as_deref()) {
            Some(next) => cur = next,
            None => return Some(cur.to_owned()),
        }
    }
}
