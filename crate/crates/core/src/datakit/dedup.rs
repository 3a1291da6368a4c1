use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_TOKEN: &str = "<num>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupConfig {
    pub word_threshold: usize,
    /// Cap on candidate pairs that reach the edit-distance check.
    pub max_pairs: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            word_threshold: 4,
            max_pairs: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DedupError {
    #[error("search budget exceeded: more than {cap} candidate pairs")]
    BudgetExceeded { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateClusters {
    /// Connected components with at least two members, each sorted, ordered
    /// by smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster position for every input, `None` for singletons.
    pub cluster_of: Vec<Option<usize>>,
}

impl DuplicateClusters {
    pub fn is_duplicate(&self, i: usize) -> bool {
        self.cluster_of.get(i).is_some_and(Option::is_some)
    }
}

/// Lowercased whitespace tokens; any token containing a digit becomes `<num>`.
pub fn masked_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            if t.chars().any(|c| c.is_ascii_digit()) {
                NUM_TOKEN.to_string()
            } else {
                t.to_lowercase()
            }
        })
        .collect()
}

/// Levenshtein distance over whole tokens.
pub fn word_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Banded distance; `None` once it must exceed `t`.
fn bounded_distance(a: &[u32], b: &[u32], t: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > t {
        return None;
    }
    const INF: usize = usize::MAX / 2;
    let m = b.len();
    let mut prev = vec![INF; m + 1];
    let mut cur = vec![INF; m + 1];
    for (j, p) in prev.iter_mut().enumerate().take(t.min(m) + 1) {
        *p = j;
    }
    for i in 1..=a.len() {
        let lo = i.saturating_sub(t);
        let hi = (i + t).min(m);
        cur.iter_mut().for_each(|c| *c = INF);
        if lo == 0 {
            cur[0] = i;
        }
        let mut row_min = cur[0];
        for j in lo.max(1)..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > t {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (prev[m] <= t).then_some(prev[m])
}

/// Candidate index over token sequences. A sequence within distance `t` of
/// an indexed one must contain one of its `t + 1` chunks verbatim, since
/// each edit touches at most one chunk.
pub(crate) struct NearIndex {
    threshold: usize,
    vocab: HashMap<String, u32>,
    seqs: Vec<Vec<u32>>,
    chunks: HashMap<Vec<u32>, Vec<usize>>,
    chunk_lens: BTreeSet<usize>,
    /// Sequences too short to chunk; always candidates.
    short: Vec<usize>,
    cap: usize,
    work: usize,
}

impl NearIndex {
    pub(crate) fn new(cfg: &DedupConfig) -> Self {
        NearIndex {
            threshold: cfg.word_threshold,
            vocab: HashMap::new(),
            seqs: Vec::new(),
            chunks: HashMap::new(),
            chunk_lens: BTreeSet::new(),
            short: Vec::new(),
            cap: cfg.max_pairs,
            work: 0,
        }
    }

    pub(crate) fn add(&mut self, tokens: &[String]) {
        let ids: Vec<u32> = tokens
            .iter()
            .map(|t| {
                let n = self.vocab.len() as u32;
                *self.vocab.entry(t.clone()).or_insert(n)
            })
            .collect();
        let id = self.seqs.len();
        let parts = self.threshold + 1;
        if ids.len() < parts {
            self.short.push(id);
        } else {
            let mut seen = BTreeSet::new();
            for k in 0..parts {
                let chunk = ids[k * ids.len() / parts..(k + 1) * ids.len() / parts].to_vec();
                self.chunk_lens.insert(chunk.len());
                if seen.insert(chunk.clone()) {
                    self.chunks.entry(chunk).or_default().push(id);
                }
            }
        }
        self.seqs.push(ids);
    }

    fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| self.vocab.get(t).copied().unwrap_or(u32::MAX))
            .collect()
    }

    /// Indexed sequences within the threshold of `tokens`, as
    /// `(index, distance)` sorted by index.
    pub(crate) fn query(&mut self, tokens: &[String]) -> Result<Vec<(usize, usize)>, DedupError> {
        let q = self.encode(tokens);
        let mut cand: BTreeSet<usize> = self.short.iter().copied().collect();
        for &len in &self.chunk_lens {
            if len > q.len() {
                break;
            }
            for w in q.windows(len) {
                if let Some(ids) = self.chunks.get(w) {
                    cand.extend(ids.iter().copied());
                }
            }
        }
        let mut out = Vec::new();
        for i in cand {
            let s = &self.seqs[i];
            if s.len().abs_diff(q.len()) > self.threshold {
                continue;
            }
            self.work += 1;
            if self.work > self.cap {
                return Err(DedupError::BudgetExceeded { cap: self.cap });
            }
            if let Some(d) = bounded_distance(s, &q, self.threshold) {
                out.push((i, d));
            }
        }
        Ok(out)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Links texts whose masked token sequences are within
/// `cfg.word_threshold` word edits and returns the connected components.
pub fn find_near_duplicates<S: AsRef<str>>(texts: &[S], cfg: &DedupConfig) -> Result<DuplicateClusters, DedupError> {
    let tokens: Vec<Vec<String>> = texts.iter().map(|t| masked_tokens(t.as_ref())).collect();
    let mut index = NearIndex::new(cfg);
    for t in &tokens {
        index.add(t);
    }
    let mut parent: Vec<usize> = (0..texts.len()).collect();
    for (i, t) in tokens.iter().enumerate() {
        for (j, _) in index.query(t)? {
            if j != i {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..texts.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut clusters: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
    clusters.sort_by_key(|g| g[0]);
    let mut cluster_of = vec![None; texts.len()];
    for (c, g) in clusters.iter().enumerate() {
        for &i in g {
            cluster_of[i] = Some(c);
        }
    }
    Ok(DuplicateClusters { clusters, cluster_of })
}
