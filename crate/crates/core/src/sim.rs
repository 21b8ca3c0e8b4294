//! Synthetic follower networks and independent-cascade simulation with known
//! virality, for recovery experiments and the bundled fixture.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{build_ledgers, ExposureOptions};
use crate::graph::{write_follower_edges, FollowerNetwork, PartitionAssignment};
use crate::ingest::{build_cascades, write_records, TweetRecord};
use crate::labels::CoderSheet;
use crate::virality::{mle_virality, Activities, Boundary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    DirectedRandom {
        n: usize,
        p: f64,
    },
    PlantedTwoBlock {
        sizes: [usize; 2],
        p_in: f64,
        p_out: f64,
    },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match self {
            GraphSpec::DirectedRandom { n, .. } => *n,
            GraphSpec::PlantedTwoBlock { sizes, .. } => sizes[0] + sizes[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActivitySpec {
    Uniform { lo: f64, hi: f64 },
    Lognormal { mu: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Seeds drawn from the tenth of users with the most followers.
    #[default]
    TopDecile,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub graph: GraphSpec,
    pub activity: ActivitySpec,
    pub r_values: Vec<f64>,
    pub cascades_per_r: usize,
    pub master_seed: u64,
    pub seed_policy: SeedPolicy,
    /// When positive, each user gets non-topical filler tweets until their
    /// record count reaches `round(alpha * filler_scale)`.
    pub filler_scale: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            graph: GraphSpec::DirectedRandom { n: 500, p: 0.05 },
            activity: ActivitySpec::Uniform { lo: 0.5, hi: 1.0 },
            r_values: vec![0.1, 0.2],
            cascades_per_r: 20,
            master_seed: 1,
            seed_policy: SeedPolicy::TopDecile,
            filler_scale: 0,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.graph {
            GraphSpec::DirectedRandom { p, .. } => check_prob("p", *p)?,
            GraphSpec::PlantedTwoBlock { p_in, p_out, .. } => {
                check_prob("p_in", *p_in)?;
                check_prob("p_out", *p_out)?;
            }
        }
        if self.graph.n() < 2 {
            return Err(Error::Config("a synthetic network needs n ≥ 2".into()));
        }
        match self.activity {
            ActivitySpec::Uniform { lo, hi } if !(lo >= 0.0 && hi > lo && hi.is_finite()) => {
                return Err(Error::Config(format!(
                    "uniform activity needs 0 ≤ lo < hi, got ({lo}, {hi})"
                )));
            }
            ActivitySpec::Lognormal { mu, sigma }
                if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) =>
            {
                return Err(Error::Config(format!(
                    "lognormal activity needs finite mu and sigma ≥ 0, got ({mu}, {sigma})"
                )));
            }
            _ => {}
        }
        if let Some(r) = self.r_values.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::Config(format!(
                "planted r must lie in (0, 1], got {r}"
            )));
        }
        Ok(())
    }
}

/// Stream seed for a named purpose under a master seed.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    // FNV-1a of the tag, mixed with the master seed by splitmix64
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn user_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(4);
    format!("u{i:0width$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticNetwork {
    pub users: Vec<String>,
    /// `(follower, followee)` index pairs, sorted.
    pub edges: Vec<(u32, u32)>,
    /// Planted block of each user, for two-block graphs.
    pub blocks: Option<Vec<u8>>,
}

impl SyntheticNetwork {
    /// Followers of each user, ascending.
    pub fn followers(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.users.len()];
        for &(a, b) in &self.edges {
            out[b as usize].push(a);
        }
        for l in &mut out {
            l.sort_unstable();
        }
        out
    }

    pub fn follower_network(&self) -> FollowerNetwork {
        let universe: BTreeSet<String> = self.users.iter().cloned().collect();
        FollowerNetwork::from_edges(
            &universe,
            self.edges.iter().map(|&(a, b)| {
                (
                    self.users[a as usize].as_str(),
                    self.users[b as usize].as_str(),
                )
            }),
        )
        .0
    }
}

/// Seeded directed graph; every ordered pair is an independent Bernoulli draw.
pub fn generate_network(graph: &GraphSpec, master_seed: u64) -> Result<SyntheticNetwork> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::Config("a synthetic network needs n ≥ 2".into()));
    }
    let blocks: Option<Vec<u8>> = match graph {
        GraphSpec::DirectedRandom { p, .. } => {
            check_prob("p", *p)?;
            None
        }
        GraphSpec::PlantedTwoBlock { sizes, p_in, p_out } => {
            check_prob("p_in", *p_in)?;
            check_prob("p_out", *p_out)?;
            Some((0..n).map(|i| u8::from(i >= sizes[0])).collect())
        }
    };
    let prob = |a: usize, b: usize| match graph {
        GraphSpec::DirectedRandom { p, .. } => *p,
        GraphSpec::PlantedTwoBlock { p_in, p_out, .. } => {
            let bl = blocks.as_ref().unwrap();
            if bl[a] == bl[b] {
                *p_in
            } else {
                *p_out
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, "network"));
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(prob(a, b)) {
                edges.push((a as u32, b as u32));
            }
        }
    }
    Ok(SyntheticNetwork {
        users: (0..n).map(|i| user_name(i, n)).collect(),
        edges,
        blocks,
    })
}

/// Activities normalized so the most active user has `alpha = 1`.
pub fn generate_activities(spec: &ActivitySpec, n: usize, master_seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, "activity"));
    let raw: Vec<f64> = match *spec {
        ActivitySpec::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(lo..hi)).collect(),
        ActivitySpec::Lognormal { mu, sigma } => {
            let d = LogNormal::new(mu, sigma).map_err(|e| Error::Config(e.to_string()))?;
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
    };
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::Config(
            "activity distribution produced no positive value".into(),
        ));
    }
    Ok(raw.into_iter().map(|a| a / max).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCascade {
    pub tweet_id: String,
    pub seed_user: u32,
    pub planted_r: f64,
    /// Users in the order they were first exposed; the seed is never exposed.
    pub exposed: Vec<u32>,
    /// `(user, round)` of each retweet, in activation order.
    pub activations: Vec<(u32, u32)>,
}

impl SimulatedCascade {
    pub fn successes(&self) -> BTreeSet<u32> {
        self.activations.iter().map(|a| a.0).collect()
    }

    pub fn failures(&self) -> BTreeSet<u32> {
        let s = self.successes();
        self.exposed
            .iter()
            .copied()
            .filter(|u| !s.contains(u))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub network: SyntheticNetwork,
    pub followers: Vec<Vec<u32>>,
    pub alphas: Vec<f64>,
    pub cascades: Vec<SimulatedCascade>,
}

/// Synchronous-round independent cascade from `seed_user`. Round 0 exposes
/// the seed's followers; every newly exposed user activates once with
/// probability `alpha * r`, and activations expose their unexposed followers
/// in the next round. Retweet timestamps are the round of activation.
pub fn simulate_cascade(
    world: &SyntheticWorld,
    tweet_id: &str,
    seed_user: u32,
    r: f64,
    cascade_seed: u64,
) -> SimulatedCascade {
    let mut rng = ChaCha8Rng::seed_from_u64(cascade_seed);
    let n = world.alphas.len();
    let mut seen = vec![false; n];
    seen[seed_user as usize] = true;
    let mut frontier = vec![seed_user];
    let mut exposed = Vec::new();
    let mut activations = Vec::new();
    let mut round = 0u32;
    while !frontier.is_empty() {
        let start = exposed.len();
        for &u in &frontier {
            for &f in &world.followers[u as usize] {
                if !seen[f as usize] {
                    seen[f as usize] = true;
                    exposed.push(f);
                }
            }
        }
        round += 1;
        frontier.clear();
        for &f in &exposed[start..] {
            let p = (world.alphas[f as usize] * r).clamp(0.0, 1.0);
            if rng.random_bool(p) {
                frontier.push(f);
                activations.push((f, round));
            }
        }
    }
    SimulatedCascade {
        tweet_id: tweet_id.to_owned(),
        seed_user,
        planted_r: r,
        exposed,
        activations,
    }
}

impl SyntheticWorld {
    pub fn new(network: SyntheticNetwork, alphas: Vec<f64>) -> Self {
        let followers = network.followers();
        SyntheticWorld {
            network,
            followers,
            alphas,
            cascades: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn user(&self, i: u32) -> &str {
        &self.network.users[i as usize]
    }

    /// Candidate seeds under `policy`, ascending.
    pub fn seed_pool(&self, policy: SeedPolicy) -> Vec<u32> {
        let n = self.n();
        match policy {
            SeedPolicy::Uniform => (0..n as u32).collect(),
            SeedPolicy::TopDecile => {
                let mut order: Vec<u32> = (0..n as u32).collect();
                order.sort_by_key(|&u| (std::cmp::Reverse(self.followers[u as usize].len()), u));
                order.truncate(n.div_ceil(10).max(1));
                order.sort_unstable();
                order
            }
        }
    }

    /// Simulates `(tweet_id, r)` cascades in parallel; each cascade draws its
    /// seed user and outcomes from its own stream keyed by the tweet id.
    pub fn run(&mut self, plan: &[(String, f64)], policy: SeedPolicy, master_seed: u64) {
        let pool = self.seed_pool(policy);
        let this = &*self;
        let sims: Vec<SimulatedCascade> = plan
            .par_iter()
            .map(|(id, r)| {
                let seed = derive_seed(master_seed, id);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let user = pool[rng.random_range(0..pool.len())];
                simulate_cascade(this, id, user, *r, rng.random())
            })
            .collect();
        self.cascades.extend(sims);
    }

    pub fn activities(&self) -> Activities {
        Activities::from_alphas(
            self.network
                .users
                .iter()
                .map(String::as_str)
                .zip(self.alphas.iter().copied()),
        )
    }

    /// Every user in one group, so exposures are never filtered by group.
    pub fn single_group(&self) -> PartitionAssignment {
        PartitionAssignment {
            groups: self.network.users.iter().map(|u| (u.clone(), 0)).collect(),
            cut_size: 0,
            balance: 1.0,
        }
    }

    /// Cascade logs in the ingest schema; `text` supplies each origin's text.
    pub fn records_with<F>(&self, text: F) -> Vec<TweetRecord>
    where
        F: Fn(&SimulatedCascade) -> String,
    {
        let mut out = Vec::new();
        for c in &self.cascades {
            let body = text(c);
            let author = self.user(c.seed_user);
            out.push(TweetRecord {
                tweet_id: c.tweet_id.clone(),
                user_id: author.to_owned(),
                timestamp: 0,
                text: body.clone(),
                retweet_of: None,
                reply_to: None,
                lang: Some("en".into()),
            });
            for &(u, round) in &c.activations {
                let user = self.user(u);
                out.push(TweetRecord {
                    tweet_id: format!("{}_{user}", c.tweet_id),
                    user_id: user.to_owned(),
                    timestamp: round as i64,
                    text: format!("RT @{author}: {body}"),
                    retweet_of: Some(c.tweet_id.clone()),
                    reply_to: None,
                    lang: Some("en".into()),
                });
            }
        }
        out
    }

    pub fn records(&self) -> Vec<TweetRecord> {
        self.records_with(|c| format!("climate cascade {}", c.tweet_id))
    }

    /// Off-topic tweets topping each user up to `round(alpha * scale)` records.
    pub fn filler_records(&self, existing: &[TweetRecord], scale: u32) -> Vec<TweetRecord> {
        let mut count: BTreeMap<&str, u64> = BTreeMap::new();
        for r in existing {
            *count.entry(r.user_id.as_str()).or_default() += 1;
        }
        let mut out = Vec::new();
        for (i, user) in self.network.users.iter().enumerate() {
            let target = (self.alphas[i] * scale as f64).round() as u64;
            let have = count.get(user.as_str()).copied().unwrap_or(0);
            for j in have..target {
                out.push(TweetRecord {
                    tweet_id: format!("f_{user}_{j}"),
                    user_id: user.clone(),
                    timestamp: 0,
                    text: format!("weekend notes {j}"),
                    retweet_of: None,
                    reply_to: None,
                    lang: Some("en".into()),
                });
            }
        }
        out
    }

    pub fn truth(&self) -> Vec<TruthRow> {
        self.cascades
            .iter()
            .map(|c| TruthRow {
                tweet_id: c.tweet_id.clone(),
                planted_r: c.planted_r,
                seed_user: self.user(c.seed_user).to_owned(),
            })
            .collect()
    }

    /// Writes `tweets.jsonl`, `edges.csv` and `truth.csv` into `dir`.
    pub fn write(&self, dir: &Path, records: &[TweetRecord]) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_records(&dir.join("tweets.jsonl"), records)?;
        let users = &self.network.users;
        write_follower_edges(
            &dir.join("edges.csv"),
            self.network
                .edges
                .iter()
                .map(|&(a, b)| (users[a as usize].as_str(), users[b as usize].as_str())),
        )?;
        write_truth_csv(&dir.join("truth.csv"), &self.truth())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub tweet_id: String,
    pub planted_r: f64,
    pub seed_user: String,
}

pub fn write_truth_csv(path: &Path, rows: &[TruthRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Network, activities and all planned cascades for `config`. Tweet ids are
/// `t<r index>_<k>` with `k` zero-padded.
pub fn build_world(config: &SimConfig) -> Result<SyntheticWorld> {
    config.validate()?;
    let net = generate_network(&config.graph, config.master_seed)?;
    let alphas = generate_activities(&config.activity, net.users.len(), config.master_seed)?;
    let mut world = SyntheticWorld::new(net, alphas);
    let plan: Vec<(String, f64)> = config
        .r_values
        .iter()
        .enumerate()
        .flat_map(|(ri, &r)| (0..config.cascades_per_r).map(move |k| (format!("t{ri}_{k:05}"), r)))
        .collect();
    world.run(&plan, config.seed_policy, config.master_seed);
    Ok(world)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub planted_r: f64,
    pub cascades: usize,
    pub scored: usize,
    /// Cascades without a single success.
    pub unscorable: usize,
    pub upper_boundary: usize,
    pub mean_exposures: f64,
    pub median_rel_error: f64,
    pub p90_rel_error: f64,
}

/// Nearest-rank quantile of ascending data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Re-ingests the world's logs, rebuilds ledgers on the true follower graph
/// and scores them with the planted activities. One row per planted r.
pub fn recovery_experiment(world: &SyntheticWorld) -> Result<Vec<RecoveryRow>> {
    let records = world.records();
    let (cascades, _) = build_cascades(&records);
    let follow = world.network.follower_network();
    let scope = world.single_group();
    let act = world.activities();
    let planted: BTreeMap<&str, f64> = world
        .cascades
        .iter()
        .map(|c| (c.tweet_id.as_str(), c.planted_r))
        .collect();
    let ledgers = build_ledgers(&cascades, &follow, &scope, ExposureOptions::default());

    #[derive(Default)]
    struct Acc {
        cascades: usize,
        unscorable: usize,
        upper: usize,
        exposures: usize,
        errors: Vec<f64>,
    }
    let mut per_r: BTreeMap<u64, (f64, Acc)> = BTreeMap::new();
    for c in &world.cascades {
        per_r
            .entry(c.planted_r.to_bits())
            .or_insert_with(|| (c.planted_r, Acc::default()))
            .1
            .cascades += 1;
    }
    // cascades without retweets have no main group and come back as errors
    for (c, res) in cascades.iter().zip(ledgers) {
        let r = planted[c.tweet_id()];
        let acc = &mut per_r.get_mut(&r.to_bits()).expect("planted").1;
        let Ok(scored) = res else {
            acc.unscorable += 1;
            continue;
        };
        let est = mle_virality(&scored.ledger, &act);
        acc.exposures += est.exposed();
        match est.boundary {
            Boundary::ZeroSuccesses => {
                acc.unscorable += 1;
                continue;
            }
            Boundary::UpperBoundary => acc.upper += 1,
            Boundary::Interior => {}
        }
        acc.errors.push((est.r_hat - r).abs() / r);
    }
    Ok(per_r
        .into_values()
        .map(|(r, mut acc)| {
            acc.errors.sort_by(f64::total_cmp);
            RecoveryRow {
                planted_r: r,
                cascades: acc.cascades,
                scored: acc.errors.len(),
                unscorable: acc.cascades - acc.errors.len(),
                upper_boundary: acc.upper,
                mean_exposures: acc.exposures as f64 / acc.cascades.max(1) as f64,
                median_rel_error: median(&acc.errors),
                p90_rel_error: quantile(&acc.errors, 0.9),
            }
        })
        .collect())
}

/// Parameters of the labeled two-community corpus shipped as a fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    pub users_per_block: usize,
    pub authors_per_block: usize,
    pub tweets: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Probability that a community member follows each of its core authors.
    pub author_reach: f64,
    pub base_r: f64,
    pub coders: usize,
    /// Probability that a coder flips a true label.
    pub coder_noise: f64,
    pub filler_scale: u32,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            users_per_block: 45,
            authors_per_block: 8,
            tweets: 200,
            p_in: 0.15,
            p_out: 0.005,
            author_reach: 0.8,
            base_r: 0.12,
            coders: 3,
            coder_noise: 0.08,
            filler_scale: 30,
            seed: 7,
        }
    }
}

pub const FIXTURE_FEATURES: [&str; 11] = [
    "mocking",
    "incivility",
    "call_to_action",
    "ingroup_praise",
    "outgroup_attack",
    "science",
    "solutions",
    "movement",
    "anti_international",
    "hypocrisy",
    "conspiracy",
];

/// Feature names specific to the activist and skeptic communities.
pub fn fixture_group_features() -> [Vec<String>; 2] {
    [
        vec!["solutions".into(), "movement".into()],
        vec![
            "anti_international".into(),
            "hypocrisy".into(),
            "conspiracy".into(),
        ],
    ]
}

/// Planted effect of each feature on `ln r` in the fixture.
const FIXTURE_EFFECTS: [f64; 11] = [0.0, 0.2, 0.1, 0.05, -0.1, -0.05, 0.0, 0.15, 0.0, 0.1, 0.0];

const VOCAB: [&[&str]; 2] = [
    &[
        "crisis",
        "action",
        "act",
        "now",
        "future",
        "strike",
        "kids",
        "youth",
        "planet",
        "@youthstrike",
    ],
    &[
        "change",
        "alarmist",
        "jet",
        "private",
        "fly",
        "un",
        "tax",
        "protester",
        "scam",
        "@aoc",
    ],
];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub world: SyntheticWorld,
    pub records: Vec<TweetRecord>,
    pub sheets: Vec<CoderSheet>,
    pub true_labels: BTreeMap<String, Vec<u8>>,
}

/// Two planted communities whose core authors post labeled tweets; virality
/// follows the planted feature effects and three noisy coders label them.
pub fn build_fixture(cfg: &FixtureConfig) -> Result<Fixture> {
    check_prob("author_reach", cfg.author_reach)?;
    if cfg.authors_per_block == 0 || cfg.authors_per_block > cfg.users_per_block || cfg.coders < 2 {
        return Err(Error::Config(
            "fixture needs 1 ≤ authors ≤ users per block and ≥ 2 coders".into(),
        ));
    }
    let graph = GraphSpec::PlantedTwoBlock {
        sizes: [cfg.users_per_block; 2],
        p_in: cfg.p_in,
        p_out: cfg.p_out,
    };
    let mut net = generate_network(&graph, cfg.seed)?;
    // core authors are followed widely inside their own community
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "reach"));
    let mut edges: BTreeSet<(u32, u32)> = net.edges.iter().copied().collect();
    for block in 0..2 {
        let base = block * cfg.users_per_block;
        for a in base..base + cfg.authors_per_block {
            for u in base..base + cfg.users_per_block {
                if u != a && rng.random_bool(cfg.author_reach) {
                    edges.insert((u as u32, a as u32));
                }
            }
        }
    }
    net.edges = edges.into_iter().collect();
    let alphas = generate_activities(
        &ActivitySpec::Uniform { lo: 0.3, hi: 1.0 },
        net.users.len(),
        cfg.seed,
    )?;
    let mut world = SyntheticWorld::new(net, alphas);
    let specific = fixture_group_features();
    let allowed = |block: usize, f: &str| !specific[1 - block].iter().any(|s| s == f);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "fixture"));
    let mut true_labels = BTreeMap::new();
    let mut texts = BTreeMap::new();
    let mut plan = Vec::new();
    for k in 0..cfg.tweets {
        let block = k % 2;
        let id = format!("t{k:04}");
        let author = block * cfg.users_per_block + rng.random_range(0..cfg.authors_per_block);
        let labels: Vec<u8> = FIXTURE_FEATURES
            .iter()
            .map(|f| u8::from(allowed(block, f) && rng.random_bool(0.3)))
            .collect();
        let effect: f64 = labels
            .iter()
            .zip(FIXTURE_EFFECTS)
            .map(|(&l, b)| l as f64 * b)
            .sum();
        let r = (cfg.base_r * effect.exp()).min(1.0);
        let mut words: Vec<&str> = VOCAB[block].to_vec();
        words.shuffle(&mut rng);
        words.truncate(rng.random_range(3..7));
        let tag = if block == 0 {
            "#climatecrisis"
        } else {
            "#climatehoax"
        };
        let text = format!("climate {} {tag}", words.join(" "));
        plan.push((id.clone(), author as u32, r));
        true_labels.insert(id.clone(), labels);
        texts.insert(id, text);
    }
    world.cascades = plan
        .par_iter()
        .map(|(id, author, r)| simulate_cascade(&world, id, *author, *r, derive_seed(cfg.seed, id)))
        .collect();
    let mut records = world.records_with(|c| texts[&c.tweet_id].clone());
    let filler = world.filler_records(&records, cfg.filler_scale);
    records.extend(filler);

    let features: Vec<String> = FIXTURE_FEATURES.iter().map(|s| s.to_string()).collect();
    let mut sheets = Vec::new();
    for c in 0..cfg.coders {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("coder{c}")));
        let mut sheet = CoderSheet::new(format!("coder{}", c + 1), features.clone());
        for (id, labels) in &true_labels {
            let noisy = labels
                .iter()
                .map(|&l| {
                    if rng.random_bool(cfg.coder_noise) {
                        1 - l
                    } else {
                        l
                    }
                })
                .collect();
            sheet.insert(id.clone(), noisy)?;
        }
        sheets.push(sheet);
    }
    Ok(Fixture {
        world,
        records,
        sheets,
        true_labels,
    })
}

impl Fixture {
    /// Writes the world files plus one `labels_<coder>.csv` per coder.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.world.write(dir, &self.records)?;
        for s in &self.sheets {
            s.write_csv(&dir.join(format!("labels_{}.csv", s.coder_id)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_world(edges: &[(u32, u32)], n: usize, alphas: Vec<f64>) -> SyntheticWorld {
        let net = SyntheticNetwork {
            users: (0..n).map(|i| user_name(i, n)).collect(),
            edges: edges.to_vec(),
            blocks: None,
        };
        SyntheticWorld::new(net, alphas)
    }

    #[test]
    fn complete_and_empty_graphs() {
        let net = generate_network(&GraphSpec::DirectedRandom { n: 4, p: 1.0 }, 3).unwrap();
        assert_eq!(net.edges.len(), 12);
        assert!(net.edges.iter().all(|(a, b)| a != b));
        let net = generate_network(&GraphSpec::DirectedRandom { n: 50, p: 0.0 }, 3).unwrap();
        assert!(net.edges.is_empty());
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        for p in [-0.1, 1.5, f64::NAN] {
            assert!(generate_network(&GraphSpec::DirectedRandom { n: 5, p }, 1).is_err());
        }
        assert!(generate_network(&GraphSpec::DirectedRandom { n: 1, p: 0.5 }, 1).is_err());
    }

    #[test]
    fn blocks_without_cross_probability_stay_apart() {
        let g = GraphSpec::PlantedTwoBlock {
            sizes: [50, 50],
            p_in: 0.3,
            p_out: 0.0,
        };
        let net = generate_network(&g, 9).unwrap();
        let b = net.blocks.as_ref().unwrap();
        assert!(net
            .edges
            .iter()
            .all(|&(x, y)| b[x as usize] == b[y as usize]));
        assert!(!net.edges.is_empty());
    }

    #[test]
    fn zero_virality_never_spreads() {
        let w = tiny_world(&[(1, 0), (2, 0), (3, 0)], 4, vec![1.0; 4]);
        for s in 0..20 {
            let c = simulate_cascade(&w, "t", 0, 0.0, s);
            assert!(c.activations.is_empty());
            assert_eq!(c.exposed.len(), 3);
        }
    }

    #[test]
    fn certain_star_activates_every_follower_in_round_one() {
        let w = tiny_world(&[(1, 0), (2, 0), (3, 0), (4, 0)], 5, vec![1.0; 5]);
        let c = simulate_cascade(&w, "t", 0, 1.0, 0);
        assert_eq!(c.activations, vec![(1, 1), (2, 1), (3, 1), (4, 1)]);
    }

    #[test]
    fn chain_activates_one_round_apart() {
        // b follows a, c follows b
        let w = tiny_world(&[(1, 0), (2, 1)], 3, vec![1.0; 3]);
        let c = simulate_cascade(&w, "t", 0, 1.0, 0);
        assert_eq!(c.activations, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn seed_is_never_exposed_and_users_activate_once() {
        let cfg = SimConfig {
            graph: GraphSpec::DirectedRandom { n: 60, p: 0.2 },
            r_values: vec![0.9],
            cascades_per_r: 10,
            ..Default::default()
        };
        let w = build_world(&cfg).unwrap();
        for c in &w.cascades {
            assert!(!c.exposed.contains(&c.seed_user));
            let s = c.successes();
            assert_eq!(s.len(), c.activations.len());
            let exposed: BTreeSet<u32> = c.exposed.iter().copied().collect();
            assert_eq!(exposed.len(), c.exposed.len());
            assert!(s.is_subset(&exposed));
        }
    }

    #[test]
    fn user_names_are_padded() {
        assert_eq!(user_name(7, 100), "u0007");
        assert_eq!(user_name(7, 20_000), "u00007");
    }

    #[test]
    fn top_decile_pool() {
        let w = tiny_world(&[(1, 0), (2, 0), (3, 1)], 12, vec![1.0; 12]);
        assert_eq!(w.seed_pool(SeedPolicy::TopDecile), vec![0, 1]);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.9), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
    }
}
