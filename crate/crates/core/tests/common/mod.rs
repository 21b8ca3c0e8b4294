#![allow(dead_code)]

use std::collections::BTreeSet;

use echo_virality::graph::{FollowerNetwork, PartitionAssignment, RetweetNetwork};
use echo_virality::ingest::{build_cascades, Cascade, TweetRecord};

pub fn tweet(id: &str, user: &str, ts: i64, text: &str) -> TweetRecord {
    TweetRecord {
        tweet_id: id.into(),
        user_id: user.into(),
        timestamp: ts,
        text: text.into(),
        retweet_of: None,
        reply_to: None,
        lang: Some("en".into()),
    }
}

pub fn retweet(id: &str, user: &str, ts: i64, of: &str) -> TweetRecord {
    TweetRecord {
        retweet_of: Some(of.into()),
        ..tweet(id, user, ts, "")
    }
}

/// Cascade of origin `o` by `author` at t=0 with retweeters in the given order.
pub fn cascade(author: &str, retweeters: &[&str]) -> Cascade {
    let mut recs = vec![tweet("o", author, 0, "climate")];
    for (i, u) in retweeters.iter().enumerate() {
        recs.push(retweet(&format!("rt{i}"), u, i as i64 + 1, "o"));
    }
    let (mut cs, _) = build_cascades(&recs);
    assert_eq!(cs.len(), 1);
    cs.remove(0)
}

/// Follow graph from `(follower, followee)` pairs over the users they mention.
pub fn follows(pairs: &[(&str, &str)], extra: &[&str]) -> FollowerNetwork {
    let mut universe: BTreeSet<String> = extra.iter().map(|s| s.to_string()).collect();
    for (a, b) in pairs {
        universe.insert(a.to_string());
        universe.insert(b.to_string());
    }
    FollowerNetwork::from_edges(&universe, pairs.iter().copied()).0
}

pub fn one_group(users: &[&str]) -> PartitionAssignment {
    PartitionAssignment {
        groups: users.iter().map(|u| (u.to_string(), 0)).collect(),
        cut_size: 0,
        balance: 1.0,
    }
}

pub fn undirected(nodes: &[&str], edges: &[(&str, &str)]) -> RetweetNetwork {
    let mut net = RetweetNetwork {
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    for (a, b) in edges {
        net.add_edge(a, b);
    }
    net
}
