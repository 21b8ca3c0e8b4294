//! Retweet and follower networks.
//!
//! The retweet network is undirected and keyed by user id; the follower
//! network is directed (follower → followee) and indexed so that exposure
//! computations can walk "followers of" lists without string lookups.

mod partition;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Cascade;

pub use partition::{bisect_partition, PartitionAssignment};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetNetwork {
    pub nodes: BTreeSet<String>,
    /// Unordered pairs stored with the smaller id first.
    pub edges: BTreeSet<(String, String)>,
}

impl RetweetNetwork {
    /// Adds an undirected edge, ignoring self-loops and unknown endpoints.
    pub fn add_edge(&mut self, a: &str, b: &str) -> bool {
        if a == b || !self.nodes.contains(a) || !self.nodes.contains(b) {
            return false;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.insert((key.0.to_owned(), key.1.to_owned()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node ids in sorted order with index-based adjacency lists (sorted, deduplicated).
    pub fn indexed(&self) -> (Vec<&str>, Vec<Vec<usize>>) {
        let names: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for (a, b) in &self.edges {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        (names, adj)
    }

    /// Induced subgraph on `keep`.
    pub fn induced(&self, keep: &BTreeSet<String>) -> RetweetNetwork {
        RetweetNetwork {
            nodes: self.nodes.intersection(keep).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .cloned()
                .collect(),
        }
    }

    /// Graphviz export, nodes colored by partition group.
    pub fn to_dot(&self, assignment: &PartitionAssignment, group_names: [&str; 2]) -> String {
        const COLORS: [&str; 2] = ["orange", "green"];
        let mut s = String::from("graph retweets {\n  node [style=filled];\n");
        for n in &self.nodes {
            match assignment.group_of(n) {
                Some(g) => {
                    let g = g as usize;
                    let _ = writeln!(
                        s,
                        "  \"{}\" [fillcolor={}, group=\"{}\"];",
                        escape(n),
                        COLORS[g],
                        group_names[g]
                    );
                }
                None => {
                    let _ = writeln!(s, "  \"{}\";", escape(n));
                }
            }
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  \"{}\" -- \"{}\";", escape(a), escape(b));
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Links every eligible retweeter with the eligible author they retweeted.
pub fn build_retweet_network(cascades: &[Cascade], users: &BTreeSet<String>) -> RetweetNetwork {
    let mut net = RetweetNetwork {
        nodes: users.clone(),
        edges: BTreeSet::new(),
    };
    for c in cascades {
        if c.flags.stub_origin {
            continue;
        }
        for rt in c.retweeters() {
            net.add_edge(c.author(), rt);
        }
    }
    net
}

/// Largest connected component; ties go to the component holding the
/// lexicographically smallest user id.
pub fn largest_component(net: &RetweetNetwork) -> RetweetNetwork {
    let (names, adj) = net.indexed();
    let n = names.len();
    let mut comp = vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None; // (component id, size)
    let mut stack = Vec::new();
    let mut next_id = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = next_id;
        next_id += 1;
        comp[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    stack.push(u);
                }
            }
        }
        // components are discovered in order of their smallest member
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((id, size));
        }
    }
    let Some((id, _)) = best else {
        return RetweetNetwork::default();
    };
    let keep: BTreeSet<String> = (0..n)
        .filter(|&i| comp[i] == id)
        .map(|i| names[i].to_owned())
        .collect();
    net.induced(&keep)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FollowerReport {
    pub rows: usize,
    pub edges: usize,
    pub unknown_endpoint: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    follower: String,
    followee: String,
}

/// Directed follow graph restricted to a user universe, with forward
/// (followees-of) and reverse (followers-of) adjacency.
#[derive(Debug, Clone, Default)]
pub struct FollowerNetwork {
    names: Vec<String>,
    index: HashMap<String, usize>,
    followees: Vec<Vec<u32>>,
    followers: Vec<Vec<u32>>,
}

impl FollowerNetwork {
    pub fn from_edges<'a, I>(universe: &BTreeSet<String>, edges: I) -> (Self, FollowerReport)
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let names: Vec<String> = universe.iter().cloned().collect();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut followees = vec![Vec::new(); names.len()];
        let mut report = FollowerReport::default();
        for (follower, followee) in edges {
            report.rows += 1;
            let (Some(&a), Some(&b)) = (index.get(follower), index.get(followee)) else {
                report.unknown_endpoint += 1;
                continue;
            };
            if a == b {
                report.self_loops += 1;
                continue;
            }
            followees[a].push(b as u32);
        }
        let mut followers = vec![Vec::new(); names.len()];
        for (a, list) in followees.iter_mut().enumerate() {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            report.duplicates += before - list.len();
            report.edges += list.len();
            for &b in list.iter() {
                followers[b as usize].push(a as u32);
            }
        }
        (
            FollowerNetwork {
                names,
                index,
                followees,
                followers,
            },
            report,
        )
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.followees.iter().map(Vec::len).sum()
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.index.get(user).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Users following `idx`, i.e. those who see what `idx` posts.
    pub fn followers_idx(&self, idx: usize) -> &[u32] {
        &self.followers[idx]
    }

    pub fn followees_idx(&self, idx: usize) -> &[u32] {
        &self.followees[idx]
    }

    pub fn follows(&self, follower: &str, followee: &str) -> bool {
        match (self.index_of(follower), self.index_of(followee)) {
            (Some(a), Some(b)) => self.followees[a].binary_search(&(b as u32)).is_ok(),
            _ => false,
        }
    }

    pub fn followers_of<'a>(&'a self, user: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.index_of(user)
            .map(|i| self.followers[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&j| self.names[j as usize].as_str())
    }

    pub fn followees_of<'a>(&'a self, user: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.index_of(user)
            .map(|i| self.followees[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&j| self.names[j as usize].as_str())
    }

    /// All edges as (follower, followee), sorted.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.followees
            .iter()
            .enumerate()
            .flat_map(move |(a, list)| {
                list.iter()
                    .map(move |&b| (self.names[a].as_str(), self.names[b as usize].as_str()))
            })
    }

    /// Checks that every forward edge appears in the reverse view and vice versa.
    pub fn views_consistent(&self) -> bool {
        let fwd: usize = self.followees.iter().map(Vec::len).sum();
        let rev: usize = self.followers.iter().map(Vec::len).sum();
        fwd == rev
            && self.followers.iter().enumerate().all(|(b, list)| {
                list.iter().all(|&a| {
                    self.followees[a as usize]
                        .binary_search(&(b as u32))
                        .is_ok()
                })
            })
    }
}

/// Reads `edges.csv` (header `follower,followee`) restricted to `universe`.
pub fn build_follower_network(
    path: &Path,
    universe: &BTreeSet<String>,
) -> Result<(FollowerNetwork, FollowerReport)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    {
        let headers = rdr.headers().map_err(|e| Error::csv(path, e))?;
        if headers.iter().collect::<Vec<_>>() != ["follower", "followee"] {
            return Err(Error::Input(format!(
                "{}: expected header follower,followee",
                path.display()
            )));
        }
    }
    let mut rows = Vec::new();
    for row in rdr.deserialize::<EdgeRow>() {
        rows.push(row.map_err(|e| Error::csv(path, e))?);
    }
    Ok(FollowerNetwork::from_edges(
        universe,
        rows.iter()
            .map(|r| (r.follower.as_str(), r.followee.as_str())),
    ))
}

pub fn write_follower_edges<'a, I>(path: &Path, edges: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["follower", "followee"])
        .map_err(|e| Error::csv(path, e))?;
    for (a, b) in edges {
        w.write_record([a, b]).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-group counts of users who used a marker hashtag pair, for naming groups.
pub fn marker_counts(
    assignment: &PartitionAssignment,
    marked_users: &BTreeSet<String>,
) -> [usize; 2] {
    let mut counts = [0; 2];
    for u in marked_users {
        if let Some(g) = assignment.group_of(u) {
            counts[g as usize] += 1;
        }
    }
    counts
}

/// Indices of the (activist, skeptic) groups: the group with more users of
/// the skeptic marker is the skeptic group; ties make group 1 the skeptic group.
pub fn name_groups(skeptic_marker_counts: [usize; 2]) -> GroupNames {
    if skeptic_marker_counts[0] > skeptic_marker_counts[1] {
        GroupNames {
            activist: 1,
            skeptic: 0,
        }
    } else {
        GroupNames {
            activist: 0,
            skeptic: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupNames {
    pub activist: u8,
    pub skeptic: u8,
}

impl GroupNames {
    pub fn label(&self, group: u8) -> &'static str {
        if group == self.activist {
            "activist"
        } else {
            "skeptic"
        }
    }

    pub fn labels(&self) -> [&'static str; 2] {
        [self.label(0), self.label(1)]
    }
}

/// Group sizes and cross-group link count, for reporting.
pub fn partition_summary(net: &RetweetNetwork, a: &PartitionAssignment) -> BTreeMap<String, usize> {
    let sizes = a.group_sizes();
    BTreeMap::from([
        ("nodes".to_owned(), net.node_count()),
        ("links".to_owned(), net.edge_count()),
        ("group0".to_owned(), sizes[0]),
        ("group1".to_owned(), sizes[1]),
        ("cut".to_owned(), a.cut_size),
    ])
}
