//! Acceptance criteria. Each prints one PASS/FAIL line; the process exits
//! nonzero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use echo_virality::exposure::build_ledgers;
use echo_virality::exposure::{build_exposure_ledger, ExposureOptions, ExposureSource, GroupScope};
use echo_virality::graph::{bisect_partition, RetweetNetwork};
use echo_virality::ingest::build_cascades;
use echo_virality::labels::{krippendorff_alpha, CoderSheet, FeatureMatrix};
use echo_virality::lasso::{
    fit_cv, fit_group_lasso, fit_path, lambda_grid, lambda_max, LassoConfig, LassoFit,
};
use echo_virality::pipeline::{run_pipeline, with_workers, PipelineConfig};
use echo_virality::sim::{
    build_world, generate_network, recovery_experiment, ActivitySpec, GraphSpec, SeedPolicy,
    SimConfig, SyntheticNetwork, SyntheticWorld,
};
use echo_virality::virality::{mle_from_alphas, Boundary, DEFAULT_REL_TOL};
use echo_virality::virality::{mle_virality, Activities};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn unit_alpha(rng: &mut ChaCha8Rng) -> f64 {
    // uniform on (0, 1]
    1.0 - rng.random::<f64>()
}

fn random_ledger(rng: &mut ChaCha8Rng, max_e: usize) -> (Vec<f64>, Vec<f64>) {
    let e = rng.random_range(2..=max_e);
    let s = rng.random_range(1..e);
    let succ = (0..s).map(|_| unit_alpha(rng)).collect();
    let fail = (0..e - s).map(|_| unit_alpha(rng)).collect();
    (succ, fail)
}

/// Grid maximizer of the likelihood product over (0, r_max] with the given step.
fn grid_oracle(succ: &[f64], fail: &[f64], step: f64) -> f64 {
    let amax = succ.iter().chain(fail).copied().fold(0.0, f64::max);
    let r_max = 1.0 / amax;
    let steps = (r_max / step).floor() as usize;
    let lik = |r: f64| {
        let mut l = 1.0;
        for a in succ {
            l *= a * r;
        }
        for a in fail {
            l *= 1.0 - a * r;
        }
        l
    };
    let (mut best_r, mut best) = (r_max, lik(r_max));
    for k in 1..=steps {
        let r = k as f64 * step;
        let v = lik(r);
        if v > best {
            best = v;
            best_r = r;
        }
    }
    best_r
}

fn c1_oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (s, f) = random_ledger(&mut rng, 20);
        let sol = mle_from_alphas(&s, &f, DEFAULT_REL_TOL);
        let oracle = grid_oracle(&s, &f, 1e-5);
        worst = worst.max((sol.r_hat - oracle).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    let msg = format!("max |bisection - grid| = {worst:.2e} over 1000 ledgers in {secs:.2}s");
    if worst <= 1e-3 && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_analytic_cases() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = unit_alpha(&mut rng);
        let s = rng.random_range(1..=30usize);
        let f = rng.random_range(1..=30usize);
        let sol = mle_from_alphas(&vec![a; s], &vec![a; f], DEFAULT_REL_TOL);
        let closed = s as f64 / (a * (s + f) as f64);
        worst = worst.max((sol.r_hat - closed).abs());
    }
    let three = mle_from_alphas(&[1.0, 1.0], &[1.0], DEFAULT_REL_TOL).r_hat;
    let msg = format!("closed form max err {worst:.2e}; three-user r_hat = {three:.9}");
    if worst <= 1e-9 && (three - 2.0 / 3.0).abs() <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn interior_ledger(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let (s, f) = random_ledger(rng, 20);
        if mle_from_alphas(&s, &f, DEFAULT_REL_TOL).boundary == Boundary::Interior {
            return (s, f);
        }
    }
}

fn c3_equivariance_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut scale_err: f64 = 0.0;
    for _ in 0..300 {
        let (s, f) = interior_ledger(&mut rng);
        let base = mle_from_alphas(&s, &f, DEFAULT_REL_TOL).r_hat;
        for c in [0.5, 2.0, 10.0] {
            let sc: Vec<f64> = s.iter().map(|a| a * c).collect();
            let fc: Vec<f64> = f.iter().map(|a| a * c).collect();
            let r = mle_from_alphas(&sc, &fc, DEFAULT_REL_TOL).r_hat;
            scale_err = scale_err.max((r - base / c).abs());
        }
    }
    let mut not_decreasing = 0;
    for _ in 0..500 {
        let (s, mut f) = interior_ledger(&mut rng);
        let before = mle_from_alphas(&s, &f, DEFAULT_REL_TOL).r_hat;
        f.push(unit_alpha(&mut rng));
        let after = mle_from_alphas(&s, &f, DEFAULT_REL_TOL).r_hat;
        if after >= before {
            not_decreasing += 1;
        }
    }
    let mut perturb_err: f64 = 0.0;
    for _ in 0..500 {
        let (s, f) = interior_ledger(&mut rng);
        let cap = s.iter().chain(&f).copied().fold(0.0, f64::max);
        let base = mle_from_alphas(&s, &f, DEFAULT_REL_TOL).r_hat;
        // new success activities never exceed the old maximum, so r_max cannot shrink
        let moved: Vec<f64> = s.iter().map(|_| cap * unit_alpha(&mut rng)).collect();
        let r = mle_from_alphas(&moved, &f, DEFAULT_REL_TOL).r_hat;
        perturb_err = perturb_err.max((r - base).abs());
    }
    let msg = format!(
        "rescale err {scale_err:.2e}; added failure failed to decrease {not_decreasing}/500; \
         success perturbation err {perturb_err:.2e}"
    );
    if scale_err <= 1e-9 && not_decreasing == 0 && perturb_err <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_synthetic_recovery() -> Outcome {
    let t0 = Instant::now();
    let cfg = SimConfig {
        graph: GraphSpec::DirectedRandom { n: 2000, p: 0.1 },
        activity: ActivitySpec::Uniform { lo: 0.5, hi: 1.0 },
        r_values: vec![0.05, 0.1, 0.2, 0.4],
        cascades_per_r: 200,
        master_seed: 404,
        seed_policy: SeedPolicy::TopDecile,
        filler_scale: 0,
    };
    let world = build_world(&cfg).map_err(|e| e.to_string())?;
    let rows = recovery_experiment(&world).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let mut ok = secs < 60.0;
    let mut parts = Vec::new();
    for r in &rows {
        ok &= r.mean_exposures >= 300.0 && r.median_rel_error <= 0.10 && r.p90_rel_error <= 0.25;
        parts.push(format!(
            "r={}: exposures {:.0}, median {:.3}, p90 {:.3}, unscorable {}",
            r.planted_r, r.mean_exposures, r.median_rel_error, r.p90_rel_error, r.unscorable
        ));
    }
    let msg = format!("{} in {secs:.1}s", parts.join("; "));
    if ok && rows.len() == 4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_exposure_fixtures() -> Outcome {
    use common::{cascade, follows, one_group};
    let origin = ExposureSource::Origin;
    let via = |u: &str, position| ExposureSource::Retweet {
        user: u.into(),
        position,
    };
    let set = |xs: &[&str]| {
        xs.iter()
            .map(|s| s.to_string())
            .collect::<BTreeSet<String>>()
    };
    let attr = |xs: Vec<(&str, ExposureSource)>| {
        xs.into_iter()
            .map(|(u, s)| (u.to_string(), s))
            .collect::<BTreeMap<String, ExposureSource>>()
    };
    // (name, follow pairs (follower, followee), retweeters in order, successes, failures, attribution)
    let scenarios = vec![
        (
            "direct follower of the origin",
            vec![("p", "o")],
            vec![],
            set(&[]),
            set(&["p"]),
            attr(vec![("p", origin.clone())]),
        ),
        (
            "follower of origin and of two retweeters",
            vec![("p", "o"), ("a", "o"), ("b", "o"), ("p", "a"), ("p", "b")],
            vec!["a", "b"],
            set(&["a", "b"]),
            set(&["p"]),
            attr(vec![
                ("a", origin.clone()),
                ("b", origin.clone()),
                ("p", origin.clone()),
            ]),
        ),
        (
            "follower of a single retweeter",
            vec![("a", "o"), ("p", "a")],
            vec!["a"],
            set(&["a"]),
            set(&["p"]),
            attr(vec![("a", origin.clone()), ("p", via("a", 1))]),
        ),
        (
            "follower of two retweeters only",
            vec![("a", "o"), ("b", "o"), ("p", "a"), ("p", "b")],
            vec!["a", "b"],
            set(&["a", "b"]),
            set(&["p"]),
            attr(vec![
                ("a", origin.clone()),
                ("b", origin.clone()),
                ("p", via("a", 1)),
            ]),
        ),
    ];
    let mut failures = Vec::new();
    for (name, pairs, rts, s, f, at) in &scenarios {
        let c = cascade("o", rts);
        let follow = follows(pairs, &[]);
        let asg = one_group(&["o", "p", "a", "b"]);
        let scope = GroupScope {
            assignment: &asg,
            main_group: 0,
        };
        let l = build_exposure_ledger(&c, &follow, scope, ExposureOptions::default());
        let single_trial = l.exposed_count() == l.exposed().len();
        if &l.successes != s || &l.failures != f || &l.attribution != at || !single_trial {
            failures.push(format!(
                "{name}: got S={:?} F={:?} attribution={:?}",
                l.successes, l.failures, l.attribution
            ));
        }
    }
    if failures.is_empty() {
        Ok("4/4 scenarios give the expected exposure sets and attribution".into())
    } else {
        Err(failures.join("; "))
    }
}

/// Smallest cut over all bisections whose larger side has at most `max_side` nodes.
fn exhaustive_min_cut(net: &RetweetNetwork, max_side: usize) -> (usize, Vec<BTreeSet<String>>) {
    let nodes: Vec<&String> = net.nodes.iter().collect();
    let n = nodes.len();
    let mut best = usize::MAX;
    let mut argbest = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let ones = mask.count_ones() as usize;
        if ones.max(n - ones) > max_side {
            continue;
        }
        let side = |u: &String| {
            let i = nodes.iter().position(|x| *x == u).unwrap();
            mask >> i & 1
        };
        let cut = net.edges.iter().filter(|(a, b)| side(a) != side(b)).count();
        let group: BTreeSet<String> = nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, u)| (*u).clone())
            .collect();
        if cut < best {
            best = cut;
            argbest = vec![group];
        } else if cut == best {
            argbest.push(group);
        }
    }
    (best, argbest)
}

fn undirected_from(net: &SyntheticNetwork) -> RetweetNetwork {
    let mut r = RetweetNetwork {
        nodes: net.users.iter().cloned().collect(),
        ..Default::default()
    };
    for &(a, b) in &net.edges {
        r.add_edge(&net.users[a as usize], &net.users[b as usize]);
    }
    r
}

fn c6_partitioner() -> Outcome {
    let net = common::undirected(
        &["a", "b", "c", "d", "e", "f"],
        &[
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
            ("c", "d"),
        ],
    );
    let tol: f64 = 0.2;
    let max_side = ((0.5 + tol) * 6.0 + 1e-9).floor() as usize;
    let (oracle_cut, oracle_groups) = exhaustive_min_cut(&net, max_side);
    let asg = bisect_partition(&net, tol, 1).map_err(|e| e.to_string())?;
    let got = asg.members(0);
    let tri: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let other: BTreeSet<String> = ["d", "e", "f"].iter().map(|s| s.to_string()).collect();
    let fixture_ok = asg.cut_size == 1
        && oracle_cut == 1
        && (got == tri || got == other)
        && oracle_groups.iter().all(|g| *g == tri || *g == other);

    let mut good_seeds = 0;
    let mut worst: f64 = 1.0;
    for seed in 0..20 {
        let g = GraphSpec::PlantedTwoBlock {
            sizes: [50, 50],
            p_in: 0.3,
            p_out: 0.002,
        };
        let sn = generate_network(&g, seed).map_err(|e| e.to_string())?;
        let blocks = sn.blocks.clone().unwrap();
        let rn = undirected_from(&sn);
        let asg = bisect_partition(&rn, 0.1, seed).map_err(|e| e.to_string())?;
        let agree = sn
            .users
            .iter()
            .zip(&blocks)
            .filter(|(u, b)| asg.group_of(u) == Some(**b))
            .count() as f64
            / 100.0;
        let acc = agree.max(1.0 - agree);
        worst = worst.min(acc);
        if acc >= 0.95 {
            good_seeds += 1;
        }
    }
    let msg = format!(
        "two-triangle cut {} (oracle {oracle_cut}); planted blocks recovered ≥95% on {good_seeds}/20 seeds (worst {:.2})",
        asg.cut_size, worst
    );
    if fixture_ok && good_seeds >= 18 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Largest KKT violation, computed on the standardized design from the
/// original-scale coefficients.
fn kkt_check(
    x: &Array2<f64>,
    y: &Array1<f64>,
    groups: &[Vec<usize>],
    fit: &LassoFit,
    standardize: bool,
) -> f64 {
    let (n, p) = x.dim();
    let nf = n as f64;
    let mut xs = x.clone();
    let mut sd = vec![1.0; p];
    for (j, sdj) in sd.iter_mut().enumerate() {
        let m = x.column(j).sum() / nf;
        xs.column_mut(j).mapv_inplace(|v| v - m);
        if standardize {
            let s = (xs.column(j).mapv(|v| v * v).sum() / nf).sqrt();
            if s > 1e-12 {
                xs.column_mut(j).mapv_inplace(|v| v / s);
                *sdj = s;
            }
        }
    }
    let ym = y.sum() / nf;
    let bs: Vec<f64> = (0..p).map(|j| fit.beta[j] * sd[j]).collect();
    let mut resid = y.mapv(|v| v - ym);
    for i in 0..n {
        for j in 0..p {
            resid[i] -= xs[[i, j]] * bs[j];
        }
    }
    let corr: Vec<f64> = (0..p).map(|j| xs.column(j).dot(&resid) / nf).collect();
    let mut worst: f64 = 0.0;
    for g in groups {
        let w = (g.len() as f64).sqrt();
        let bn = g.iter().map(|&j| bs[j] * bs[j]).sum::<f64>().sqrt();
        let v = if bn > 0.0 {
            g.iter()
                .map(|&j| (corr[j] - fit.lambda * w * bs[j] / bn).powi(2))
                .sum::<f64>()
                .sqrt()
        } else {
            (g.iter().map(|&j| corr[j] * corr[j]).sum::<f64>().sqrt() - fit.lambda * w).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

fn gaussian_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    Array2::from_shape_fn((n, p), |_| normal.sample(rng))
}

fn ols_with_intercept(x: &Array2<f64>, y: &Array1<f64>) -> Vec<f64> {
    let (n, p) = x.dim();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let b = DVector::from_iterator(n, y.iter().copied());
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
    sol.iter().copied().collect()
}

fn c7_group_lasso() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let cfg = LassoConfig::default();
    let mut kkt_worst: f64 = 0.0;

    // penalty-free fit equals least squares
    let groups = vec![vec![0, 1], vec![2], vec![3, 4, 5]];
    let x = gaussian_design(&mut rng, 80, 6);
    let noise = gaussian_design(&mut rng, 80, 1);
    let y = Array1::from_shape_fn(80, |i| {
        1.5 + 0.8 * x[[i, 0]] - 0.5 * x[[i, 2]] + 0.3 * x[[i, 4]] + 0.2 * noise[[i, 0]]
    });
    let fit0 =
        fit_group_lasso(x.view(), y.view(), &groups, 0.0, &cfg).map_err(|e| e.to_string())?;
    let ols = ols_with_intercept(&x, &y);
    let mut ols_err = (fit0.intercept - ols[0]).abs();
    for j in 0..6 {
        ols_err = ols_err.max((fit0.beta[j] - ols[j + 1]).abs());
    }
    kkt_worst = kkt_worst.max(kkt_check(&x, &y, &groups, &fit0, true));

    // at and above lambda_max every group is exactly zero
    let lm = lambda_max(x.view(), y.view(), &groups, true);
    let mut zero_ok = true;
    for lam in [lm, 2.0 * lm] {
        let f =
            fit_group_lasso(x.view(), y.view(), &groups, lam, &cfg).map_err(|e| e.to_string())?;
        zero_ok &= f.beta.iter().all(|&b| b == 0.0) && f.active_groups.is_empty();
        kkt_worst = kkt_worst.max(kkt_check(&x, &y, &groups, &f, true));
    }

    // orthonormal groups: block soft-thresholding of the least-squares block
    let n = 64;
    let raw = gaussian_design(&mut rng, n, 5);
    let mut centered = DMatrix::from_fn(n, 5, |i, j| raw[[i, j]]);
    for j in 0..5 {
        let m = centered.column(j).mean();
        centered.column_mut(j).add_scalar_mut(-m);
    }
    let q = centered.qr().q();
    let xo = Array2::from_shape_fn((n, 5), |(i, j)| q[(i, j)] * (n as f64).sqrt());
    let yo = Array1::from_shape_fn(n, |i| {
        0.7 + 1.2 * xo[[i, 0]] - 0.4 * xo[[i, 1]] + 0.1 * xo[[i, 3]] + 0.3 * raw[[i, 4]]
    });
    let og = vec![vec![0, 1], vec![2, 3, 4]];
    let ocfg = LassoConfig {
        standardize: false,
        ..cfg.clone()
    };
    let ym = yo.sum() / n as f64;
    let b_ols: Vec<f64> = (0..5)
        .map(|j| {
            xo.column(j)
                .iter()
                .zip(&yo)
                .map(|(a, b)| a * (b - ym))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let mut ortho_err: f64 = 0.0;
    for lam in [0.05, 0.2, 0.5, 1.0] {
        let f =
            fit_group_lasso(xo.view(), yo.view(), &og, lam, &ocfg).map_err(|e| e.to_string())?;
        for g in &og {
            let norm = g.iter().map(|&j| b_ols[j] * b_ols[j]).sum::<f64>().sqrt();
            let shrink = (1.0 - lam * (g.len() as f64).sqrt() / norm).max(0.0);
            for &j in g {
                ortho_err = ortho_err.max((f.beta[j] - shrink * b_ols[j]).abs());
            }
        }
        kkt_worst = kkt_worst.max(kkt_check(&xo, &yo, &og, &f, false));
    }

    // every solution along a warm-started path and the cross-validated refit
    let grid = lambda_grid(lm, &cfg);
    let path = fit_path(x.view(), y.view(), &groups, &grid, &cfg).map_err(|e| e.to_string())?;
    for f in &path {
        kkt_worst = kkt_worst.max(kkt_check(&x, &y, &groups, f, true));
    }
    let fm = FeatureMatrix {
        group: 0,
        tweet_ids: (0..80).map(|i| format!("t{i}")).collect(),
        author_ids: vec![String::new(); 80],
        columns: (0..6).map(|j| format!("x{j}")).collect(),
        x: x.clone(),
        y: y.clone(),
        groups: groups.clone(),
        group_names: vec!["g0".into(), "g1".into(), "g2".into()],
    };
    let cvfit = fit_cv(&fm, &cfg).map_err(|e| e.to_string())?;
    kkt_worst = kkt_worst.max(kkt_check(&x, &y, &groups, &cvfit, true));

    let msg = format!(
        "OLS err {ols_err:.2e}; lambda_max zeroing {}; orthonormal err {ortho_err:.2e}; \
         max KKT residual {kkt_worst:.2e} over {} solutions",
        if zero_ok { "exact" } else { "NOT exact" },
        path.len() + 8
    );
    if ols_err <= 1e-6 && zero_ok && ortho_err <= 1e-6 && kkt_worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const C8_BETA: [f64; 6] = [0.15, -0.1, 0.1, -0.15, 0.0, 0.0];

/// One repetition: planted features drive ln r, cascades are simulated,
/// re-ingested, scored, and the cross-validated group lasso is fit on ln r_hat.
fn c8_repetition(rep: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8000 + rep);
    let base_r: f64 = 0.15;
    let tweets = 300;
    let net = generate_network(&GraphSpec::DirectedRandom { n: 800, p: 0.03 }, 8000 + rep)
        .map_err(|e| e.to_string())?;
    let alphas = echo_virality::sim::generate_activities(
        &ActivitySpec::Uniform { lo: 0.5, hi: 1.0 },
        800,
        8000 + rep,
    )
    .map_err(|e| e.to_string())?;
    let mut world = SyntheticWorld::new(net, alphas);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut features = BTreeMap::new();
    let mut plan = Vec::new();
    for k in 0..tweets {
        let x: Vec<f64> = (0..6)
            .map(|_| f64::from(u8::from(rng.random_bool(0.5))))
            .collect();
        let ln_r = base_r.ln()
            + x.iter().zip(C8_BETA).map(|(a, b)| a * b).sum::<f64>()
            + noise.sample(&mut rng);
        let id = format!("t{k:04}");
        plan.push((id.clone(), ln_r.exp().min(1.0)));
        features.insert(id, x);
    }
    world.run(&plan, SeedPolicy::TopDecile, 8000 + rep);
    let (cascades, _) = build_cascades(&world.records());
    let follow = world.network.follower_network();
    let scope = world.single_group();
    let act: Activities = world.activities();
    let mut rows = Vec::new();
    for (c, l) in cascades.iter().zip(build_ledgers(
        &cascades,
        &follow,
        &scope,
        ExposureOptions::default(),
    )) {
        let Ok(l) = l else { continue };
        let est = mle_virality(&l.ledger, &act);
        if let Some(ln_r) = est.ln_r {
            rows.push((features[c.tweet_id()].clone(), ln_r));
        }
    }
    let n = rows.len();
    let fm = FeatureMatrix {
        group: 0,
        tweet_ids: (0..n).map(|i| format!("{i}")).collect(),
        author_ids: vec![String::new(); n],
        columns: (0..6).map(|j| format!("f{j}")).collect(),
        x: Array2::from_shape_fn((n, 6), |(i, j)| rows[i].0[j]),
        y: Array1::from_shape_fn(n, |i| rows[i].1),
        groups: (0..6).map(|j| vec![j]).collect(),
        group_names: (0..6).map(|j| format!("f{j}")).collect(),
    };
    let cfg = LassoConfig {
        seed: rep,
        ..LassoConfig::default()
    };
    let fit = fit_cv(&fm, &cfg).map_err(|e| e.to_string())?;
    Ok(C8_BETA
        .iter()
        .zip(&fit.beta)
        .filter(|(b, _)| **b != 0.0)
        .all(|(b, est)| b.signum() == est.signum() && *est != 0.0))
}

fn c8_planted_effects() -> Outcome {
    let t0 = Instant::now();
    let mut hits = 0;
    for rep in 0..50 {
        if c8_repetition(rep)? {
            hits += 1;
        }
    }
    let msg = format!(
        "all planted signs recovered in {hits}/50 repetitions ({:.1}s)",
        t0.elapsed().as_secs_f64()
    );
    if hits >= 45 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/small")
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base =
        PipelineConfig::load(&fixture_dir().join("pipeline.json")).map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (i, workers) in [1usize, 1, 8].into_iter().enumerate() {
        let cfg = PipelineConfig {
            out: tmp.path().join(format!("run{i}")),
            ..base.clone()
        };
        let outcome =
            with_workers(workers, || run_pipeline(&cfg, None)).map_err(|e| e.to_string())?;
        if let Some(e) = outcome.error {
            return Err(format!("pipeline failed: {e}"));
        }
        trees.push(read_tree(&cfg.out));
    }
    let files = trees[0].len();
    let msg = format!("{files} artifacts compared across two runs and worker counts 1 and 8");
    if files >= 17 && trees[0] == trees[1] && trees[0] == trees[2] {
        Ok(msg)
    } else {
        Err(format!("{msg}: outputs differ"))
    }
}

/// Alpha from the full coincidence matrix built by enumerating ordered coder pairs.
fn coincidence_alpha(sheets: &[CoderSheet]) -> f64 {
    let m = sheets.len();
    let mut o = [[0.0f64; 2]; 2];
    for id in sheets[0].rows.keys() {
        for j in 0..sheets[0].features.len() {
            for a in 0..m {
                for b in 0..m {
                    if a != b {
                        let c = sheets[a].rows[id][j] as usize;
                        let k = sheets[b].rows[id][j] as usize;
                        o[c][k] += 1.0 / (m as f64 - 1.0);
                    }
                }
            }
        }
    }
    let nc = [o[0][0] + o[0][1], o[1][0] + o[1][1]];
    let n = nc[0] + nc[1];
    let de = nc[0] * nc[1] + nc[1] * nc[0];
    if de == 0.0 {
        return 1.0;
    }
    1.0 - (n - 1.0) * (o[0][1] + o[1][0]) / de
}

fn c10_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let coders = rng.random_range(2..=5usize);
        let items = rng.random_range(1..=20usize);
        let feats = rng.random_range(1..=4usize);
        let flip = rng.random_range(0.0..0.5);
        let features: Vec<String> = (0..feats).map(|j| format!("f{j}")).collect();
        let truth: Vec<Vec<u8>> = (0..items)
            .map(|_| (0..feats).map(|_| u8::from(rng.random_bool(0.4))).collect())
            .collect();
        let sheets: Vec<CoderSheet> = (0..coders)
            .map(|c| {
                let mut s = CoderSheet::new(format!("c{c}"), features.clone());
                for (i, row) in truth.iter().enumerate() {
                    let noisy = row
                        .iter()
                        .map(|&v| if rng.random_bool(flip) { 1 - v } else { v })
                        .collect();
                    s.insert(format!("t{i}"), noisy).unwrap();
                }
                s
            })
            .collect();
        let a = krippendorff_alpha(&sheets).map_err(|e| e.to_string())?;
        worst = worst.max((a - coincidence_alpha(&sheets)).abs());
    }
    let features = vec!["x".to_string(), "y".to_string()];
    let mut s = CoderSheet::new("a", features.clone());
    s.insert("t1", vec![1, 0]).unwrap();
    s.insert("t2", vec![0, 0]).unwrap();
    s.insert("t3", vec![1, 1]).unwrap();
    let mut t = s.clone();
    t.coder_id = "b".into();
    let perfect = krippendorff_alpha(&[s, t]).map_err(|e| e.to_string())?;
    let msg = format!(
        "max |alpha - coincidence oracle| = {worst:.2e}; perfect agreement alpha = {perfect}"
    );
    if worst <= 1e-12 && perfect == 1.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 MLE matches grid-search oracle", c1_oracle_equivalence),
        ("2 analytic MLE cases", c2_analytic_cases),
        (
            "3 equivariance and monotonicity",
            c3_equivariance_monotonicity,
        ),
        ("4 synthetic virality recovery", c4_synthetic_recovery),
        ("5 exposure display-rule fixtures", c5_exposure_fixtures),
        ("6 partitioner", c6_partitioner),
        ("7 group lasso", c7_group_lasso),
        ("8 planted-effect recovery end to end", c8_planted_effects),
        ("9 pipeline determinism", c9_determinism),
        ("10 agreement statistics", c10_agreement),
    ];
    let only: Option<String> = std::env::var("ACCEPTANCE_ONLY").ok();
    let mut failed = 0;
    for (name, f) in criteria {
        if only
            .as_deref()
            .is_some_and(|o| !name.starts_with(&format!("{o} ")))
        {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
