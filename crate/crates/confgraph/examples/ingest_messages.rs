//! Ingest a small message corpus: infer mailing lists from repeated
//! broadcasts, expand them to pairwise edges, build the graph, and label
//! every edge with the n-grams of the traffic it carried.
//!
//! Run with: `cargo run --example ingest_messages`

use confgraph::ingest::{expand_lists, extract_ngrams, graph_from_messages, infer_lists, label_edges, Message};

fn msg(id: &str, sender: &str, recipients: &[&str], body: &str) -> Message {
    Message {
        id: id.into(),
        sender: sender.into(),
        recipients: recipients.iter().map(|r| r.to_string()).collect(),
        body: body.into(),
    }
}

fn main() -> confgraph::Result<()> {
    println!("n-grams of a body: {:?}", extract_ngrams("quarterly budget review"));

    let mut messages = vec![
        msg("m1", "ana", &["bo"], "budget review today"),
        msg("m2", "bo", &["cy"], "budget numbers"),
        msg("m3", "cy", &["ana", "bo"], "review notes"),
    ];
    // an address that only ever receives, from many distinct senders, is
    // inferred to be a mailing list whose membership is its sender set
    let roster = [
        "ana", "bo", "cy", "dee", "ed", "fay", "gus", "hal", "ivy", "jo", "kim",
    ];
    for (i, sender) in roster.iter().enumerate() {
        messages.push(msg(&format!("b{i}"), sender, &["everyone"], "all hands reminder"));
    }

    let lists = infer_lists(&messages);
    for (list, members) in &lists {
        println!("inferred {list}: {} members", members.len());
    }

    let expanded = expand_lists(messages, Some(&lists))?;
    let graph = graph_from_messages(&expanded)?;
    println!(
        "graph: {} nodes, {} edges",
        graph.node_count(),
        graph.edge_count()
    );

    // keep at most `cap` properties per edge, most frequent first
    let labeling = label_edges(&graph, &expanded, 4);
    for e in graph.edge_ids().take(5) {
        let (a, b) = graph.endpoint_names(e);
        let tokens: Vec<&str> = labeling.tokens_of(e).iter().map(|&t| labeling.token(t)).collect();
        println!("edge {a}-{b}: {tokens:?}");
    }
    Ok(())
}
