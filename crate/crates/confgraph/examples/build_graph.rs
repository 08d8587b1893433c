//! Build a communication graph from sender/recipient pairs and inspect its
//! degree structure and edge neighborhoods.
//!
//! Run with: `cargo run --example build_graph`

use confgraph::graph::build_graph;

fn main() -> confgraph::Result<()> {
    // duplicate and reversed pairs collapse onto one undirected edge;
    // names are trimmed and lowercased
    let pairs = [
        ("ana", "bo"),
        ("bo", "ana"),
        ("Ana", "cy"),
        ("bo", "cy"),
        ("cy", "dee"),
        ("dee", "ed"),
        ("ed", "ana"),
    ];
    let g = build_graph(&pairs)?;

    let stats = g.degree_stats();
    println!(
        "{} nodes, {} edges, max node degree {}, max edge neighborhood {}",
        stats.node_count, stats.edge_count, stats.d_max, stats.n_max
    );

    for e in g.edge_ids() {
        let (a, b) = g.endpoint_names(e);
        let neighbors: Vec<String> = g
            .neighborhood(e)
            .into_iter()
            .map(|f| {
                let (x, y) = g.endpoint_names(f);
                format!("{x}-{y}")
            })
            .collect();
        println!("edge {a}-{b}: neighborhood {{{}}}", neighbors.join(", "));
    }
    Ok(())
}
