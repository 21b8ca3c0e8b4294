//! Coder label sheets, adjudication, agreement and the regression design.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::text;
use crate::virality::{Boundary, ViralityTable};

/// Binary labels from one coder over a declared feature list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoderSheet {
    pub coder_id: String,
    pub features: Vec<String>,
    pub rows: BTreeMap<String, Vec<u8>>,
}

impl CoderSheet {
    pub fn new(coder_id: impl Into<String>, features: Vec<String>) -> Self {
        CoderSheet {
            coder_id: coder_id.into(),
            features,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, tweet_id: impl Into<String>, labels: Vec<u8>) -> Result<()> {
        if labels.len() != self.features.len() {
            return Err(Error::Input(format!(
                "coder {}: row has {} labels for {} features",
                self.coder_id,
                labels.len(),
                self.features.len()
            )));
        }
        if labels.iter().any(|&v| v > 1) {
            return Err(Error::Input(format!(
                "coder {}: labels must be 0 or 1",
                self.coder_id
            )));
        }
        self.rows.insert(tweet_id.into(), labels);
        Ok(())
    }

    /// Reads `labels_<coder>.csv`: header `tweet_id,<feature>,...`, values 0/1.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let coder_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .map(|s| s.strip_prefix("labels_").unwrap_or(s).to_owned())
            .unwrap_or_default();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
        if headers.get(0) != Some("tweet_id") {
            return Err(Error::Input(format!(
                "{}: first column must be tweet_id",
                path.display()
            )));
        }
        let features: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        let mut sheet = CoderSheet::new(coder_id, features);
        for row in rdr.records() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let id = row.get(0).unwrap_or_default().to_owned();
            let labels = row
                .iter()
                .skip(1)
                .map(|v| match v.trim() {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Input(format!(
                        "{}: tweet {id}: label {other:?} is not 0/1",
                        path.display()
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            if sheet.rows.contains_key(&id) {
                return Err(Error::Input(format!(
                    "{}: duplicate tweet {id}",
                    path.display()
                )));
            }
            sheet.insert(id, labels)?;
        }
        Ok(sheet)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_label_rows(path, &self.features, &self.rows)
    }
}

fn write_label_rows(
    path: &Path,
    features: &[String],
    rows: &BTreeMap<String, Vec<u8>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["tweet_id".to_owned()];
    header.extend(features.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (id, labels) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(labels.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn check_aligned(sheets: &[CoderSheet]) -> Result<()> {
    if sheets.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 coder sheets, got {}",
            sheets.len()
        )));
    }
    let first = &sheets[0];
    let ids: BTreeSet<&String> = first.rows.keys().collect();
    let mut problems = Vec::new();
    for s in &sheets[1..] {
        if s.features != first.features {
            problems.push(format!(
                "{} features {:?} != {} features {:?}",
                s.coder_id, s.features, first.coder_id, first.features
            ));
        }
        let other: BTreeSet<&String> = s.rows.keys().collect();
        let missing: Vec<_> = ids.difference(&other).collect();
        let extra: Vec<_> = other.difference(&ids).collect();
        if !missing.is_empty() || !extra.is_empty() {
            problems.push(format!(
                "{} vs {}: missing {:?}, extra {:?}",
                s.coder_id, first.coder_id, missing, extra
            ));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::SheetMismatch(problems.join("; ")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Adjudication {
    pub features: Vec<String>,
    pub labels: BTreeMap<String, Vec<u8>>,
    /// Fraction of cells on which every coder agreed.
    pub consensus_rate: f64,
    /// Cells with an even split, resolved to 0.
    pub ties: usize,
}

impl Adjudication {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_label_rows(path, &self.features, &self.labels)
    }
}

/// Per-cell majority vote across coders.
pub fn majority_vote(sheets: &[CoderSheet]) -> Result<Adjudication> {
    check_aligned(sheets)?;
    let m = sheets.len();
    let features = sheets[0].features.clone();
    let mut labels = BTreeMap::new();
    let (mut cells, mut unanimous, mut ties) = (0usize, 0usize, 0usize);
    for id in sheets[0].rows.keys() {
        let row: Vec<u8> = (0..features.len())
            .map(|j| {
                let ones = sheets.iter().filter(|s| s.rows[id][j] == 1).count();
                cells += 1;
                if ones == 0 || ones == m {
                    unanimous += 1;
                }
                if 2 * ones == m {
                    ties += 1;
                }
                u8::from(2 * ones > m)
            })
            .collect();
        labels.insert(id.clone(), row);
    }
    Ok(Adjudication {
        features,
        labels,
        consensus_rate: if cells == 0 {
            1.0
        } else {
            unanimous as f64 / cells as f64
        },
        ties,
    })
}

/// Krippendorff's alpha for nominal binary labels, every (tweet, feature)
/// cell being one unit rated by all coders.
///
/// Uses per-unit value counts: with `m` coders and `n_uc` coders giving value
/// `c` in unit `u`, observed disagreement is
/// `D_o = (1/N) sum_u sum_c n_uc (m - n_uc) / (m - 1)` and expected
/// disagreement `D_e = sum_c n_c (N - n_c) / (N (N - 1))`.
pub fn krippendorff_alpha(sheets: &[CoderSheet]) -> Result<f64> {
    check_aligned(sheets)?;
    let m = sheets.len() as f64;
    let nfeat = sheets[0].features.len();
    let mut disagree = 0.0;
    let mut totals = [0.0f64; 2];
    for id in sheets[0].rows.keys() {
        for j in 0..nfeat {
            let ones = sheets.iter().filter(|s| s.rows[id][j] == 1).count() as f64;
            let zeros = m - ones;
            disagree += 2.0 * ones * zeros / (m - 1.0);
            totals[0] += zeros;
            totals[1] += ones;
        }
    }
    let n = totals[0] + totals[1];
    let expected = 2.0 * totals[0] * totals[1] / (n * (n - 1.0));
    if n < 2.0 || expected == 0.0 {
        return Ok(1.0);
    }
    let observed = disagree / n;
    Ok(1.0 - observed / expected)
}

/// Counts of hashtags and mentions: `#` or `@` followed by at least one word character.
pub fn extract_marks(text: &str) -> (usize, usize) {
    (text::hashtags(text).count(), text::mentions(text).count())
}

/// Features that only enter one group's design.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FeatureSpec {
    pub group_specific: [Vec<String>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub group: u8,
    pub tweet_ids: Vec<String>,
    pub author_ids: Vec<String>,
    pub columns: Vec<String>,
    pub x: Array2<f64>,
    /// Natural log of the virality estimate.
    pub y: Array1<f64>,
    /// Column index sets; every author indicator shares one group.
    pub groups: Vec<Vec<usize>>,
    pub group_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn author_group(&self) -> Option<usize> {
        self.group_names.iter().position(|g| g == "authors")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["tweet_id".to_owned(), "author_id".into(), "group".into()];
        let non_author: Vec<usize> = (0..self.columns.len())
            .filter(|&j| !self.columns[j].starts_with("author:"))
            .collect();
        header.extend(non_author.iter().map(|&j| self.columns[j].clone()));
        header.push("response".into());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for i in 0..self.n() {
            let mut rec = vec![
                self.tweet_ids[i].clone(),
                self.author_ids[i].clone(),
                self.group.to_string(),
            ];
            rec.extend(non_author.iter().map(|&j| self.x[[i, j]].to_string()));
            rec.push(self.y[i].to_string());
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FeatureReport {
    pub labeled: usize,
    pub other_group: usize,
    pub zero_successes: usize,
    pub unscored: usize,
    pub below_author_threshold: usize,
    pub rows: usize,
    pub authors: usize,
}

pub struct FeatureInputs<'a> {
    pub labels: &'a Adjudication,
    /// Hashtag and mention counts per tweet.
    pub marks: &'a BTreeMap<String, (usize, usize)>,
    pub authors: &'a BTreeMap<String, String>,
    pub virality: &'a ViralityTable,
    pub spec: &'a FeatureSpec,
}

/// Design matrix for one group: labeled tweets scored in that group whose
/// authors have at least `min_author_tweets` such tweets.
pub fn build_feature_matrix(
    input: &FeatureInputs<'_>,
    group: u8,
    min_author_tweets: usize,
) -> Result<(FeatureMatrix, FeatureReport)> {
    let mut report = FeatureReport {
        labeled: input.labels.labels.len(),
        ..Default::default()
    };
    let skipped: BTreeSet<&str> = input
        .virality
        .skipped
        .iter()
        .map(|s| s.tweet_id.as_str())
        .collect();

    let mut candidates: Vec<(&String, &String, f64)> = Vec::new();
    for id in input.labels.labels.keys() {
        let Some(est) = input.virality.get(id) else {
            if skipped.contains(id.as_str()) {
                report.zero_successes += 1;
            } else {
                report.unscored += 1;
            }
            continue;
        };
        if est.boundary == Boundary::ZeroSuccesses {
            report.zero_successes += 1;
            continue;
        }
        if est.group != group {
            report.other_group += 1;
            continue;
        }
        let author = input
            .authors
            .get(id)
            .ok_or_else(|| Error::Input(format!("no author known for labeled tweet {id}")))?;
        let ln_r = est
            .ln_r
            .ok_or_else(|| Error::Numerical(format!("tweet {id} has no log virality")))?;
        candidates.push((id, author, ln_r));
    }

    let mut per_author: BTreeMap<&String, usize> = BTreeMap::new();
    for (_, a, _) in &candidates {
        *per_author.entry(a).or_default() += 1;
    }
    let rows: Vec<_> = candidates
        .into_iter()
        .filter(|(_, a, _)| {
            let keep = per_author[a] >= min_author_tweets;
            if !keep {
                report.below_author_threshold += 1;
            }
            keep
        })
        .collect();
    let authors: Vec<&String> = per_author
        .iter()
        .filter(|(_, &c)| c >= min_author_tweets)
        .map(|(a, _)| *a)
        .collect();

    let other = &input.spec.group_specific[1 - group as usize];
    let feats: Vec<(usize, &String)> = input
        .labels
        .features
        .iter()
        .enumerate()
        .filter(|(_, f)| !other.contains(f))
        .collect();

    let mut columns: Vec<String> = feats.iter().map(|(_, f)| (*f).clone()).collect();
    columns.push("hashtags".into());
    columns.push("mentions".into());
    let author_col0 = columns.len();
    columns.extend(authors.iter().map(|a| format!("author:{a}")));

    let n = rows.len();
    let mut x = Array2::<f64>::zeros((n, columns.len()));
    let mut y = Array1::<f64>::zeros(n);
    for (i, (id, author, ln_r)) in rows.iter().enumerate() {
        let labels = &input.labels.labels[*id];
        for (j, (src, _)) in feats.iter().enumerate() {
            x[[i, j]] = labels[*src] as f64;
        }
        let (h, m) = input.marks.get(*id).copied().unwrap_or_default();
        x[[i, feats.len()]] = h as f64;
        x[[i, feats.len() + 1]] = m as f64;
        let a = authors.binary_search(author).expect("author retained");
        x[[i, author_col0 + a]] = 1.0;
        y[i] = *ln_r;
    }

    let mut groups: Vec<Vec<usize>> = (0..author_col0).map(|j| vec![j]).collect();
    let mut group_names: Vec<String> = columns[..author_col0].to_vec();
    if !authors.is_empty() {
        groups.push((author_col0..columns.len()).collect());
        group_names.push("authors".into());
    }
    report.rows = n;
    report.authors = authors.len();
    Ok((
        FeatureMatrix {
            group,
            tweet_ids: rows.iter().map(|(id, _, _)| (*id).clone()).collect(),
            author_ids: rows.iter().map(|(_, a, _)| (*a).clone()).collect(),
            columns,
            x,
            y,
            groups,
            group_names,
        },
        report,
    ))
}
