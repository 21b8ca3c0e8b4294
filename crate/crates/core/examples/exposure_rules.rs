//! Who counts as exposed to a cascade, and through which event.
//!
//! `cargo run --example exposure_rules`

use std::collections::BTreeSet;

use echo_virality::exposure::{build_exposure_ledger, ExposureOptions, GroupScope};
use echo_virality::graph::{FollowerNetwork, PartitionAssignment};
use echo_virality::ingest::{build_cascades, TweetRecord};

fn rec(id: &str, user: &str, ts: i64, rt: Option<&str>) -> TweetRecord {
    TweetRecord {
        tweet_id: id.into(),
        user_id: user.into(),
        timestamp: ts,
        text: "climate".into(),
        retweet_of: rt.map(Into::into),
        reply_to: None,
        lang: Some("en".into()),
    }
}

fn main() {
    // ann posts; bob and cat retweet; dan follows bob and cat; eve follows ann
    let records = vec![
        rec("1", "ann", 0, None),
        rec("2", "bob", 5, Some("1")),
        rec("3", "cat", 9, Some("1")),
    ];
    let follows = [
        ("bob", "ann"),
        ("cat", "ann"),
        ("dan", "bob"),
        ("dan", "cat"),
        ("eve", "ann"),
        ("fay", "dan"),
    ];
    let users: BTreeSet<String> = ["ann", "bob", "cat", "dan", "eve", "fay"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (follow, _) = FollowerNetwork::from_edges(&users, follows.iter().copied());
    let assignment = PartitionAssignment {
        groups: users.iter().map(|u| (u.clone(), 0)).collect(),
        cut_size: 0,
        balance: 1.0,
    };

    let (cascades, _) = build_cascades(&records);
    let ledger = build_exposure_ledger(
        &cascades[0],
        &follow,
        GroupScope {
            assignment: &assignment,
            main_group: 0,
        },
        ExposureOptions::default(),
    );
    println!("successes: {:?}", ledger.successes);
    println!("failures:  {:?}", ledger.failures);
    for (user, source) in &ledger.attribution {
        println!("  {user:<4} first saw it via {source:?}");
    }
    println!("fay follows nobody in the cascade, so is never exposed");
}
