//! Corpus ingestion: messages to graph plus capped n-gram edge labeling.

mod synth;

pub use synth::{generate_synthetic, SyntheticCorpus, SyntheticSpec};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, normalize_node, EdgeId, OrgGraph};

/// Number of distinct senders at which a never-sending address is classified
/// as a mailing list, when no explicit list table is supplied.
pub const LIST_INFERENCE_THRESHOLD: usize = 10;

const LIST_EXPANSION_MAX_DEPTH: usize = 3;

/// One piece of correspondence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub sender: String,
    pub recipients: Vec<String>,
    pub body: String,
}

/// Read messages from JSONL: one object per line with keys
/// `id`, `sender`, `recipients`, `body`.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Message>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: Message = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(msg);
    }
    Ok(out)
}

pub fn read_jsonl_file(path: &Path) -> Result<Vec<Message>> {
    let f = std::fs::File::open(path)?;
    read_jsonl(std::io::BufReader::new(f))
}

pub fn write_jsonl<W: Write>(mut w: W, messages: &[Message]) -> Result<()> {
    for m in messages {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Infer mailing lists from traffic: an address that never appears as a
/// sender and receives messages from at least
/// [`LIST_INFERENCE_THRESHOLD`] distinct senders is a list whose membership
/// is the set of all its senders.
pub fn infer_lists(messages: &[Message]) -> BTreeMap<String, Vec<String>> {
    let senders: HashSet<String> = messages
        .iter()
        .map(|m| normalize_node(&m.sender))
        .collect();
    let mut senders_to: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for m in messages {
        let from = normalize_node(&m.sender);
        for r in &m.recipients {
            let to = normalize_node(r);
            if !senders.contains(&to) {
                senders_to.entry(to).or_default().insert(from.clone());
            }
        }
    }
    senders_to
        .into_iter()
        .filter(|(_, from)| from.len() >= LIST_INFERENCE_THRESHOLD)
        .map(|(list, from)| (list, from.into_iter().collect()))
        .collect()
}

/// Replace every recipient that is a known (or inferred) list id by its
/// members. Lists may contain lists up to depth 3; deeper nesting is an
/// error. Self-addressed recipients are dropped, not errors.
pub fn expand_lists(
    messages: Vec<Message>,
    list_table: Option<&BTreeMap<String, Vec<String>>>,
) -> Result<Vec<Message>> {
    let inferred;
    let table: &BTreeMap<String, Vec<String>> = match list_table {
        Some(t) => t,
        None => {
            inferred = infer_lists(&messages);
            &inferred
        }
    };
    let table: BTreeMap<String, Vec<String>> = table
        .iter()
        .map(|(k, v)| {
            (
                normalize_node(k),
                v.iter().map(|m| normalize_node(m)).collect(),
            )
        })
        .collect();

    let mut out = Vec::with_capacity(messages.len());
    for m in messages {
        let sender = normalize_node(&m.sender);
        let mut expanded: BTreeSet<String> = BTreeSet::new();
        for r in &m.recipients {
            expand_recipient(&normalize_node(r), &table, 0, &mut expanded)?;
        }
        expanded.remove(&sender);
        out.push(Message {
            id: m.id,
            sender,
            recipients: expanded.into_iter().collect(),
            body: m.body,
        });
    }
    Ok(out)
}

fn expand_recipient(
    addr: &str,
    table: &BTreeMap<String, Vec<String>>,
    depth: usize,
    out: &mut BTreeSet<String>,
) -> Result<()> {
    match table.get(addr) {
        None => {
            out.insert(addr.to_string());
            Ok(())
        }
        Some(members) => {
            if depth >= LIST_EXPANSION_MAX_DEPTH {
                return Err(Error::ListDepth {
                    list: addr.to_string(),
                    max_depth: LIST_EXPANSION_MAX_DEPTH,
                });
            }
            for m in members {
                expand_recipient(m, table, depth + 1, out)?;
            }
            Ok(())
        }
    }
}

/// Build a graph from expanded messages: one edge per sender/recipient pair
/// that ever corresponded. Messages with no recipients contribute nothing.
pub fn graph_from_messages(messages: &[Message]) -> Result<OrgGraph> {
    let mut pairs = Vec::new();
    for m in messages {
        for r in &m.recipients {
            if normalize_node(&m.sender) != normalize_node(r) {
                pairs.push((m.sender.clone(), r.clone()));
            }
        }
    }
    build_graph(&pairs)
}

/// Tokenize a message body into unigrams and adjacent bigrams.
///
/// Lowercase, split on Unicode whitespace, strip leading and trailing
/// punctuation from each token, drop empty tokens, then emit every surviving
/// unigram plus each adjacent pair joined by a single space.
pub fn extract_ngrams(body: &str) -> Vec<String> {
    let unigrams: Vec<String> = body
        .to_lowercase()
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_string())
        .filter(|t| !t.is_empty())
        .collect();
    let mut out = unigrams.clone();
    for pair in unigrams.windows(2) {
        out.push(format!("{} {}", pair[0], pair[1]));
    }
    out
}

/// Per-edge capped sets of n-gram properties.
///
/// Tokens are interned; each edge holds a sorted list of token ids of size at
/// most `cap`. The vocabulary records every token observed during labeling,
/// including tokens later cut by the cap.
#[derive(Debug, Clone)]
pub struct PropertyLabeling {
    cap: usize,
    vocab: Vec<String>,
    token_index: HashMap<String, u32>,
    edge_tokens: Vec<Vec<u32>>,
}

impl PropertyLabeling {
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_tokens.len()
    }

    pub fn tokens_of(&self, e: EdgeId) -> &[u32] {
        &self.edge_tokens[e.0 as usize]
    }

    pub fn has(&self, e: EdgeId, token_id: u32) -> bool {
        self.edge_tokens[e.0 as usize].binary_search(&token_id).is_ok()
    }

    pub fn has_token(&self, e: EdgeId, token: &str) -> bool {
        self.token_id(token).is_some_and(|id| self.has(e, id))
    }

    /// Number of edges labeled with each token; index is token id.
    pub fn edge_frequencies(&self) -> Vec<u32> {
        let mut freq = vec![0u32; self.vocab.len()];
        for tokens in &self.edge_tokens {
            for &t in tokens {
                freq[t as usize] += 1;
            }
        }
        freq
    }

    /// Assemble a labeling from per-edge token sets. `vocab` must cover every
    /// token used; sets are capped here if oversized.
    pub fn from_edge_sets(
        vocab: Vec<String>,
        edge_sets: Vec<Vec<u32>>,
        cap: usize,
    ) -> Self {
        let token_index = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let edge_tokens = edge_sets
            .into_iter()
            .map(|mut set| {
                set.sort_unstable();
                set.dedup();
                set.truncate(cap);
                set
            })
            .collect();
        Self {
            cap,
            vocab,
            token_index,
            edge_tokens,
        }
    }

    /// Export as CSV `node_a,node_b,token`, rows in deterministic order.
    pub fn write_csv<W: Write>(&self, graph: &OrgGraph, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["node_a", "node_b", "token"])?;
        for e in graph.edge_ids() {
            let (a, b) = graph.endpoint_names(e);
            for &t in self.tokens_of(e) {
                wtr.write_record([a, b, &self.vocab[t as usize]])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Load a labeling previously written by [`write_csv`](Self::write_csv).
    /// The vocabulary is the set of tokens present in the file.
    pub fn read_csv<R: std::io::Read>(graph: &OrgGraph, r: R, cap: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let mut rows: Vec<(EdgeId, String)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 3 {
                return Err(Error::Parse {
                    line: i + 2,
                    message: "row has fewer than three fields".into(),
                });
            }
            let e = graph.require_edge(&rec[0], &rec[1])?;
            rows.push((e, rec[2].to_string()));
        }
        let mut vocab: Vec<String> = rows.iter().map(|(_, t)| t.clone()).collect();
        vocab.sort_unstable();
        vocab.dedup();
        let token_index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut edge_sets = vec![Vec::new(); graph.edge_count()];
        for (e, t) in rows {
            edge_sets[e.0 as usize].push(token_index[&t]);
        }
        Ok(Self::from_edge_sets(vocab, edge_sets, cap))
    }
}

/// Label graph edges with n-grams from the messages passing over them.
///
/// Per edge, n-grams accumulate over all messages between its endpoints; the
/// `c` most frequent on that edge are kept (frequency counted over message
/// occurrences, ties broken lexicographically ascending). Property presence
/// is set semantics: the same n-gram in two messages labels the edge once.
pub fn label_edges(graph: &OrgGraph, messages: &[Message], cap: usize) -> PropertyLabeling {
    // per edge: token -> occurrence count
    let mut per_edge: Vec<HashMap<String, u32>> = vec![HashMap::new(); graph.edge_count()];
    let mut vocab_set: BTreeSet<String> = BTreeSet::new();
    for m in messages {
        if m.body.is_empty() {
            continue;
        }
        let grams = extract_ngrams(&m.body);
        if grams.is_empty() {
            continue;
        }
        for r in &m.recipients {
            let Some(e) = graph.edge(&m.sender, r) else {
                continue;
            };
            let counts = &mut per_edge[e.0 as usize];
            for g in &grams {
                *counts.entry(g.clone()).or_insert(0) += 1;
                vocab_set.insert(g.clone());
            }
        }
    }

    let vocab: Vec<String> = vocab_set.into_iter().collect();
    let token_index: HashMap<String, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();

    let edge_sets: Vec<Vec<u32>> = per_edge
        .into_iter()
        .map(|counts| {
            let mut ranked: Vec<(&String, u32)> =
                counts.iter().map(|(t, &c)| (t, c)).collect();
            // most frequent first, lexicographic ascending on ties
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            ranked.truncate(cap);
            let mut ids: Vec<u32> = ranked.iter().map(|(t, _)| token_index[*t]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();

    PropertyLabeling {
        cap,
        vocab,
        token_index,
        edge_tokens: edge_sets,
    }
}
