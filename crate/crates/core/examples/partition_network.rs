//! Balanced two-way split of a planted two-community retweet network.
//!
//! `cargo run --example partition_network`

use echo_virality::graph::{bisect_partition, RetweetNetwork};
use echo_virality::sim::{generate_network, GraphSpec};

fn main() -> echo_virality::Result<()> {
    let spec = GraphSpec::PlantedTwoBlock {
        sizes: [60, 40],
        p_in: 0.25,
        p_out: 0.005,
    };
    let planted = generate_network(&spec, 11)?;
    let mut net = RetweetNetwork {
        nodes: planted.users.iter().cloned().collect(),
        ..Default::default()
    };
    for &(a, b) in &planted.edges {
        net.add_edge(&planted.users[a as usize], &planted.users[b as usize]);
    }
    println!(
        "{} nodes, {} undirected edges",
        net.node_count(),
        net.edge_count()
    );

    for tol in [0.0, 0.1, 0.2] {
        let asg = bisect_partition(&net, tol, 0)?;
        let blocks = planted.blocks.as_ref().unwrap();
        let agree = planted
            .users
            .iter()
            .zip(blocks)
            .filter(|(u, b)| asg.group_of(u) == Some(**b))
            .count();
        let acc = agree.max(planted.users.len() - agree) as f64 / planted.users.len() as f64;
        println!(
            "balance_tol {tol:.1}: sizes {:?}, cut {}, agreement with planted blocks {:.2}",
            asg.group_sizes(),
            asg.cut_size,
            acc
        );
    }
    Ok(())
}
