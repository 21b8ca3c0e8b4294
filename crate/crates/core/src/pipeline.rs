//! End-to-end orchestration: one JSON config in, a directory of CSV/DOT
//! artifacts plus `manifest.json` out.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exposure::{build_ledgers, write_ledger_csv, ExposureOptions, ScoredLedger};
use crate::graph::{
    bisect_partition, build_follower_network, build_retweet_network, largest_component,
    marker_counts, name_groups, FollowerNetwork, GroupNames, PartitionAssignment, RetweetNetwork,
};
use crate::ingest::{
    build_cascades, filter_corpus, parse_records, write_records, Cascade, CorpusFilter, TweetRecord,
};
use crate::labels::{
    build_feature_matrix, extract_marks, krippendorff_alpha, majority_vote, CoderSheet,
    FeatureInputs, FeatureMatrix, FeatureSpec,
};
use crate::lasso::{
    fit_cv, report_coefficients, write_cv_curve_csv, write_report_csv, LassoConfig,
};
use crate::sim::{build_fixture, build_world, FixtureConfig, SimConfig};
use crate::textstats::{
    cross_group_counts, word_diff_table, write_spread_csv, write_word_csv, TokenizerOptions,
};
use crate::virality::{
    compute_activities, score_corpus, write_virality_csv, ActivityMode, SkipEntry, ViralityTable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupFeatures {
    pub activist: Vec<String>,
    pub skeptic: Vec<String>,
}

impl Default for GroupFeatures {
    fn default() -> Self {
        let [activist, skeptic] = crate::sim::fixture_group_features();
        GroupFeatures { activist, skeptic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub tweets: PathBuf,
    pub edges: PathBuf,
    pub labels: Vec<PathBuf>,
    pub filter: CorpusFilter,
    /// Hashtag stems whose users mark the skeptic group.
    pub skeptic_marker: (String, String),
    pub balance_tol: f64,
    pub min_author_tweets: usize,
    pub lasso: LassoConfig,
    pub group_features: GroupFeatures,
    pub top_k: usize,
    pub threshold: usize,
    pub seed: u64,
    pub include_unexposed_retweeters: bool,
    pub raw_activities: bool,
    pub stemmer: bool,
    /// Output directory; not echoed into the manifest.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub simulate: SimConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tweets: "tweets.jsonl".into(),
            edges: "edges.csv".into(),
            labels: Vec::new(),
            filter: CorpusFilter::default(),
            skeptic_marker: ("climate".into(), "hoax".into()),
            balance_tol: 0.1,
            min_author_tweets: 3,
            lasso: LassoConfig::default(),
            group_features: GroupFeatures::default(),
            top_k: 30,
            threshold: 10,
            seed: 0,
            include_unexposed_retweeters: false,
            raw_activities: false,
            stemmer: false,
            out: "out".into(),
            simulate: SimConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.tweets);
        fix(&mut cfg.edges);
        cfg.labels.iter_mut().for_each(fix);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.lasso.validate()?;
        if !(0.0..=0.5).contains(&self.balance_tol) {
            return Err(Error::Config(format!(
                "balance_tol must lie in [0, 0.5], got {}",
                self.balance_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Network,
    Partition,
    Virality,
    Labels,
    Words,
    Spread,
    Regress,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Network,
        Stage::Partition,
        Stage::Virality,
        Stage::Labels,
        Stage::Words,
        Stage::Spread,
        Stage::Regress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Network => "network",
            Stage::Partition => "partition",
            Stage::Virality => "virality",
            Stage::Labels => "labels",
            Stage::Words => "words",
            Stage::Spread => "spread",
            Stage::Regress => "regress",
        }
    }

    fn prerequisite(self) -> Option<Stage> {
        match self {
            Stage::Ingest => None,
            Stage::Network => Some(Stage::Ingest),
            Stage::Partition => Some(Stage::Network),
            Stage::Virality | Stage::Spread => Some(Stage::Partition),
            Stage::Labels | Stage::Words => Some(Stage::Virality),
            Stage::Regress => Some(Stage::Labels),
        }
    }

    /// This stage and everything it depends on.
    pub fn closure(self) -> BTreeSet<Stage> {
        let mut out = BTreeSet::from([self]);
        let mut cur = self;
        while let Some(p) = cur.prerequisite() {
            out.insert(p);
            cur = p;
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub target: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    /// Modeling choices not fixed by the method itself, echoed for provenance.
    pub choices: BTreeMap<String, Value>,
    pub stages: Vec<StageRecord>,
    pub counts: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    pub missing_inputs: Vec<String>,
    pub status: String,
    pub failure: Option<Failure>,
}

impl Manifest {
    fn new(target: &str, config: Value) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            target: target.to_owned(),
            config,
            seeds: BTreeMap::new(),
            choices: BTreeMap::new(),
            stages: Vec::new(),
            counts: BTreeMap::new(),
            artifacts: Vec::new(),
            missing_inputs: Vec::new(),
            status: "ok".into(),
            failure: None,
        }
    }

    fn count(&mut self, key: &str, v: impl Serialize) {
        self.counts.insert(
            key.to_owned(),
            serde_json::to_value(v).expect("serializable"),
        );
    }

    fn write(&self, out: &Path) -> Result<()> {
        let path = out.join("manifest.json");
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        fs::write(&path, s).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub error: Option<Error>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, Error::exit_code)
    }
}

#[derive(Default)]
struct State {
    records: Vec<TweetRecord>,
    eligible: BTreeSet<String>,
    cascades: Vec<Cascade>,
    lcc: RetweetNetwork,
    follow: FollowerNetwork,
    assignment: Option<PartitionAssignment>,
    names: Option<GroupNames>,
    scored: Vec<ScoredLedger>,
    virality: ViralityTable,
    matrices: Vec<FeatureMatrix>,
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    emit: Option<Stage>,
    manifest: Manifest,
    st: State,
}

impl Runner<'_> {
    fn emits(&self, s: Stage) -> bool {
        self.emit.is_none_or(|t| t == s)
    }

    fn artifact(&mut self, name: &str) -> PathBuf {
        self.manifest.artifacts.push(name.to_owned());
        self.out.join(name)
    }

    fn names(&self) -> GroupNames {
        self.st.names.expect("partition stage ran")
    }

    fn assignment(&self) -> &PartitionAssignment {
        self.st.assignment.as_ref().expect("partition stage ran")
    }

    fn run_stage(&mut self, s: Stage) -> Result<&'static str> {
        match s {
            Stage::Ingest => self.ingest(),
            Stage::Network => self.network(),
            Stage::Partition => self.partition(),
            Stage::Virality => self.virality(),
            Stage::Labels => self.labels(),
            Stage::Words => self.words(),
            Stage::Spread => self.spread(),
            Stage::Regress => self.regress(),
        }
    }

    fn ingest(&mut self) -> Result<&'static str> {
        let (records, parse) = parse_records(&self.cfg.tweets)?;
        let filtered = filter_corpus(&records, &self.cfg.filter);
        let (cascades, report) = build_cascades(&filtered.records);
        let m = &mut self.manifest;
        m.count(
            "parse",
            json!({
                "lines": parse.lines, "records": parse.records,
                "malformed": parse.malformed, "duplicates": parse.duplicates,
            }),
        );
        m.count("topical_records", filtered.records.len());
        m.count("eligible_users", filtered.eligible_users.len());
        m.count("cascades", &report);
        if self.emits(Stage::Ingest) {
            let p = self.artifact("corpus.jsonl");
            write_records(&p, &filtered.records)?;
        }
        self.st.records = records;
        self.st.eligible = filtered.eligible_users;
        self.st.cascades = cascades;
        Ok("ok")
    }

    fn network(&mut self) -> Result<&'static str> {
        let net = build_retweet_network(&self.st.cascades, &self.st.eligible);
        let lcc = largest_component(&net);
        let (follow, report) = build_follower_network(&self.cfg.edges, &lcc.nodes)?;
        self.manifest.count(
            "retweet_network",
            json!({
                "nodes": net.node_count(), "edges": net.edge_count(),
                "lcc_nodes": lcc.node_count(), "lcc_edges": lcc.edge_count(),
            }),
        );
        self.manifest.count("follower_network", &report);
        if self.emits(Stage::Network) {
            let p = self.artifact("retweet_network.csv");
            let mut w = csv::Writer::from_path(&p).map_err(|e| Error::csv(&p, e))?;
            w.write_record(["user_a", "user_b"])
                .map_err(|e| Error::csv(&p, e))?;
            for (a, b) in &lcc.edges {
                w.write_record([a, b]).map_err(|e| Error::csv(&p, e))?;
            }
            w.flush().map_err(|e| Error::io(&p, e))?;
        }
        self.st.lcc = lcc;
        self.st.follow = follow;
        Ok("ok")
    }

    fn partition(&mut self) -> Result<&'static str> {
        let asg = bisect_partition(&self.st.lcc, self.cfg.balance_tol, self.cfg.seed)?;
        let marker = CorpusFilter {
            seed_hashtag_pairs: vec![self.cfg.skeptic_marker.clone()],
            ..self.cfg.filter.clone()
        };
        let by_id: BTreeMap<&str, &Cascade> =
            self.st.cascades.iter().map(|c| (c.tweet_id(), c)).collect();
        let mut marked = BTreeSet::new();
        for c in by_id.values() {
            if marker.matches_seed_pair(&c.origin.text) {
                marked.insert(c.author().to_owned());
                marked.extend(c.retweeters().map(str::to_owned));
            }
        }
        let counts = marker_counts(&asg, &marked);
        let names = name_groups(counts);
        self.manifest.count(
            "partition",
            json!({
                "cut_size": asg.cut_size, "balance": asg.balance,
                "group_sizes": asg.group_sizes(), "skeptic_marker_users": counts,
                "activist_group": names.activist, "skeptic_group": names.skeptic,
            }),
        );
        if self.emits(Stage::Partition) {
            let p = self.artifact("partition.csv");
            let mut w = csv::Writer::from_path(&p).map_err(|e| Error::csv(&p, e))?;
            w.write_record(["user_id", "group", "label"])
                .map_err(|e| Error::csv(&p, e))?;
            for (u, g) in &asg.groups {
                w.write_record([u.as_str(), &g.to_string(), names.label(*g)])
                    .map_err(|e| Error::csv(&p, e))?;
            }
            w.flush().map_err(|e| Error::io(&p, e))?;
            let p = self.artifact("network.dot");
            fs::write(&p, self.st.lcc.to_dot(&asg, names.labels()))
                .map_err(|e| Error::io(&p, e))?;
        }
        self.st.assignment = Some(asg);
        self.st.names = Some(names);
        Ok("ok")
    }

    fn virality(&mut self) -> Result<&'static str> {
        let opts = ExposureOptions {
            include_unexposed_successes: self.cfg.include_unexposed_retweeters,
        };
        let results = build_ledgers(&self.st.cascades, &self.st.follow, self.assignment(), opts);
        let mut scored = Vec::new();
        let mut unscorable = Vec::new();
        for (c, r) in self.st.cascades.iter().zip(results) {
            match r {
                Ok(s) => scored.push(s),
                Err(Error::Unscorable { .. }) => unscorable.push(SkipEntry {
                    tweet_id: c.tweet_id().to_owned(),
                    reason: "no_classified_retweeters".into(),
                }),
                Err(e) => return Err(e),
            }
        }
        let mode = if self.cfg.raw_activities {
            ActivityMode::Raw
        } else {
            ActivityMode::Normalized
        };
        let act = compute_activities(&self.st.records, mode);
        let ledgers: Vec<_> = scored.iter().map(|s| &s.ledger).collect();
        let mut table = score_corpus(&ledgers, &act);
        table.skipped.extend(unscorable);
        table.skipped.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
        let boundary = table
            .estimates
            .iter()
            .filter(|e| e.boundary.as_str() != "interior")
            .count();
        self.manifest.count(
            "virality",
            json!({
                "ledgers": scored.len(), "estimates": table.estimates.len(),
                "skipped": table.skipped.len(), "boundary_estimates": boundary,
                "tie_fallbacks": scored.iter().filter(|s| s.main.tie_fallback).count(),
            }),
        );
        if self.emits(Stage::Virality) {
            let p = self.artifact("ledger.csv");
            write_ledger_csv(&p, &ledgers)?;
            let p = self.artifact("virality.csv");
            write_virality_csv(&p, &table)?;
        }
        self.st.scored = scored;
        self.st.virality = table;
        Ok("ok")
    }

    fn words(&mut self) -> Result<&'static str> {
        let names = self.names();
        let by_id: BTreeMap<&str, &Cascade> =
            self.st.cascades.iter().map(|c| (c.tweet_id(), c)).collect();
        let mut texts: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
        for s in &self.st.scored {
            texts[s.main.group as usize].push(&by_id[s.ledger.tweet_id.as_str()].origin.text);
        }
        let opts = TokenizerOptions {
            stem: self.cfg.stemmer,
        };
        let a = names.activist as usize;
        let (ta, ts) = word_diff_table(&texts[a], &texts[1 - a], self.cfg.top_k, opts);
        self.manifest.count(
            "words",
            json!({"activist_tweets": texts[a].len(), "skeptic_tweets": texts[1 - a].len()}),
        );
        if self.emits(Stage::Words) {
            let p = self.artifact("words_activist.csv");
            write_word_csv(&p, &ta)?;
            let p = self.artifact("words_skeptic.csv");
            write_word_csv(&p, &ts)?;
        }
        Ok("ok")
    }

    fn spread(&mut self) -> Result<&'static str> {
        let (rows, summary) = cross_group_counts(
            &self.st.cascades,
            self.assignment(),
            self.names(),
            self.cfg.threshold,
        );
        self.manifest.count("spread", &summary);
        if self.emits(Stage::Spread) {
            let p = self.artifact("spread.csv");
            write_spread_csv(&p, &rows)?;
        }
        Ok("ok")
    }

    fn labels(&mut self) -> Result<&'static str> {
        if self.cfg.labels.is_empty() {
            return Ok("skipped: no label sheets configured");
        }
        let sheets = self
            .cfg
            .labels
            .iter()
            .map(|p| CoderSheet::read_csv(p))
            .collect::<Result<Vec<_>>>()?;
        let adj = majority_vote(&sheets)?;
        let alpha = krippendorff_alpha(&sheets)?;
        let mut marks = BTreeMap::new();
        let mut authors = BTreeMap::new();
        for c in &self.st.cascades {
            marks.insert(c.tweet_id().to_owned(), extract_marks(&c.origin.text));
            authors.insert(c.tweet_id().to_owned(), c.author().to_owned());
        }
        let names = self.names();
        let mut group_specific = [Vec::new(), Vec::new()];
        group_specific[names.activist as usize] = self.cfg.group_features.activist.clone();
        group_specific[names.skeptic as usize] = self.cfg.group_features.skeptic.clone();
        let spec = FeatureSpec { group_specific };
        let inputs = FeatureInputs {
            labels: &adj,
            marks: &marks,
            authors: &authors,
            virality: &self.st.virality,
            spec: &spec,
        };
        let mut reports = BTreeMap::new();
        let mut matrices = Vec::new();
        for g in [names.activist, names.skeptic] {
            let (fm, rep) = build_feature_matrix(&inputs, g, self.cfg.min_author_tweets)?;
            reports.insert(names.label(g), rep);
            matrices.push(fm);
        }
        self.manifest.count(
            "labels",
            json!({
                "coders": sheets.len(), "tweets": adj.labels.len(),
                "consensus_rate": adj.consensus_rate, "krippendorff_alpha": alpha,
                "ties": adj.ties, "features": reports,
            }),
        );
        if self.emits(Stage::Labels) {
            let p = self.artifact("labels_adjudicated.csv");
            adj.write_csv(&p)?;
            for fm in &matrices {
                let p = self.artifact(&format!("features_{}.csv", names.label(fm.group)));
                fm.write_csv(&p)?;
            }
        }
        self.st.matrices = matrices;
        Ok("ok")
    }

    fn regress(&mut self) -> Result<&'static str> {
        if self.st.matrices.is_empty() {
            return Ok("skipped: no feature matrices");
        }
        let names = self.names();
        let mut lasso = self.cfg.lasso.clone();
        lasso.seed = self.cfg.seed;
        let mut summary = BTreeMap::new();
        for fm in std::mem::take(&mut self.st.matrices) {
            let label = names.label(fm.group);
            let fit = fit_cv(&fm, &lasso)?;
            let report = report_coefficients(&fit, &fm);
            let active: Vec<&str> = fit
                .active_groups
                .iter()
                .map(|&g| fm.group_names[g].as_str())
                .collect();
            summary.insert(
                label,
                json!({
                    "rows": fm.n(), "lambda": fit.lambda, "active_groups": active,
                    "iterations": fit.iterations, "kkt_residual": fit.kkt_residual,
                }),
            );
            if self.emits(Stage::Regress) {
                let p = self.artifact(&format!("regress_{label}.csv"));
                write_report_csv(&p, &report)?;
                let p = self.artifact(&format!("cv_curve_{label}.csv"));
                write_cv_curve_csv(&p, &fit.cv_curve)?;
            }
        }
        self.manifest.count("regress", summary);
        Ok("ok")
    }
}

fn config_echo(cfg: &PipelineConfig) -> Value {
    serde_json::to_value(cfg).expect("serializable")
}

fn required_inputs(cfg: &PipelineConfig, stages: &BTreeSet<Stage>) -> Vec<PathBuf> {
    let mut req = vec![cfg.tweets.clone()];
    if stages.contains(&Stage::Network) {
        req.push(cfg.edges.clone());
    }
    if stages.contains(&Stage::Labels) {
        req.extend(cfg.labels.iter().cloned());
    }
    req
}

/// Runs every stage (`target = None`) or one stage with its prerequisites,
/// writing only the target's artifacts. The manifest is always written.
pub fn run_pipeline(cfg: &PipelineConfig, target: Option<Stage>) -> RunOutcome {
    let out = cfg.out.as_path();
    let stages: BTreeSet<Stage> = match target {
        Some(t) => t.closure(),
        None => Stage::ALL.into_iter().collect(),
    };
    let mut runner = Runner {
        cfg,
        out,
        emit: target,
        manifest: Manifest::new(target.map_or("all", Stage::name), config_echo(cfg)),
        st: State::default(),
    };
    let m = &mut runner.manifest;
    m.seeds.insert("master".into(), cfg.seed);
    m.seeds.insert("partition".into(), cfg.seed);
    m.seeds.insert("cv_folds".into(), cfg.seed);
    m.choices
        .insert("standardize".into(), json!(cfg.lasso.standardize));
    m.choices.insert("cv_folds".into(), json!(cfg.lasso.folds));
    m.choices.insert(
        "lambda_grid".into(),
        json!([cfg.lasso.lambda_grid, cfg.lasso.min_ratio]),
    );
    m.choices
        .insert("response".into(), json!("natural log of r_hat"));
    m.choices
        .insert("partition_objective".into(), json!("edge cut"));
    m.choices
        .insert("balance_tol".into(), json!(cfg.balance_tol));

    let fail = |mut runner: Runner<'_>, stage: &str, e: Error| -> RunOutcome {
        runner.manifest.status = "failed".into();
        runner.manifest.failure = Some(Failure {
            stage: stage.to_owned(),
            error: e.to_string(),
            exit_code: e.exit_code(),
        });
        // a manifest that cannot be written must not mask the original error
        let _ = runner.manifest.write(runner.out);
        RunOutcome {
            manifest: runner.manifest,
            error: Some(e),
        }
    };

    if let Err(e) = fs::create_dir_all(out).map_err(|e| Error::io(out, e)) {
        return fail(runner, "setup", e);
    }
    if let Err(e) = cfg.validate() {
        return fail(runner, "config", e);
    }
    let missing: Vec<String> = required_inputs(cfg, &stages)
        .into_iter()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        runner.manifest.missing_inputs = missing.clone();
        let e = Error::Input(format!("missing input file(s): {}", missing.join(", ")));
        return fail(runner, "inputs", e);
    }

    for s in Stage::ALL {
        if !stages.contains(&s) {
            continue;
        }
        match runner.run_stage(s) {
            Ok(status) => runner.manifest.stages.push(StageRecord {
                stage: s.name().into(),
                status: status.into(),
            }),
            Err(e) => return fail(runner, s.name(), e),
        }
    }
    if let Err(e) = runner.manifest.write(out) {
        return RunOutcome {
            manifest: runner.manifest,
            error: Some(e),
        };
    }
    RunOutcome {
        manifest: runner.manifest,
        error: None,
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Writes a synthetic world (`tweets.jsonl`, `edges.csv`, `truth.csv`) into `out`.
pub fn run_simulate(sim: &SimConfig, out: &Path) -> Result<()> {
    let world = build_world(sim)?;
    let mut records = world.records();
    if sim.filler_scale > 0 {
        let filler = world.filler_records(&records, sim.filler_scale);
        records.extend(filler);
    }
    world.write(out, &records)
}

/// Writes the labeled two-community fixture plus a `pipeline.json` that runs it.
pub fn write_fixture(cfg: &FixtureConfig, out: &Path) -> Result<()> {
    let fx = build_fixture(cfg)?;
    fx.write(out)?;
    let pc = PipelineConfig {
        labels: fx
            .sheets
            .iter()
            .map(|s| PathBuf::from(format!("labels_{}.csv", s.coder_id)))
            .collect(),
        ..PipelineConfig::default()
    };
    let mut v = config_echo(&pc);
    if let Some(o) = v.as_object_mut() {
        o.remove("simulate");
    }
    let path = out.join("pipeline.json");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    fs::write(&path, s).map_err(|e| Error::io(path, e))
}
