//! Shared unigram + bigram TF-IDF space over unique normalized queries.
//!
//! A document is one unique token-normalized query string. Each document
//! carries its occurrence count in each cohort, so a query issued by both
//! cohorts is a single document (counted once for document frequency)
//! that belongs to both views.
//!
//! Weights: tf = raw term count, idf = ln((1 + D) / (1 + df)) + 1 with D the
//! number of unique documents, then L2 normalization.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{token_normalize, AnalysisSet, Cohort};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn get(&self, index: usize) -> f64 {
        self.indices
            .binary_search(&index)
            .map(|p| self.values[p])
            .unwrap_or(0.0)
    }

    fn from_map(map: BTreeMap<usize, f64>) -> Self {
        let (indices, values) = map.into_iter().filter(|(_, v)| *v != 0.0).unzip();
        SparseVector { indices, values }
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    u.dot(v) / (nu * nv)
}

/// Unigrams followed by bigrams of adjacent surviving tokens.
pub fn query_terms(tokens: &[String]) -> Vec<String> {
    let mut terms: Vec<String> = tokens.to_vec();
    terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    terms
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryDoc {
    /// Tokens joined by single spaces.
    pub text: String,
    pub agent_weight: u64,
    pub participant_weight: u64,
    /// Position of the first occurrence within each cohort's query stream.
    pub agent_first_seen: Option<usize>,
    pub participant_first_seen: Option<usize>,
}

impl QueryDoc {
    pub fn weight(&self, cohort: Cohort) -> u64 {
        match cohort {
            Cohort::Agent => self.agent_weight,
            Cohort::Participant => self.participant_weight,
        }
    }

    pub fn first_seen(&self, cohort: Cohort) -> Option<usize> {
        match cohort {
            Cohort::Agent => self.agent_first_seen,
            Cohort::Participant => self.participant_first_seen,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorSpace {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub documents: Vec<QueryDoc>,
    pub vectors: Vec<SparseVector>,
    pub participant_centroid: SparseVector,
    #[serde(skip)]
    term_index: HashMap<String, usize>,
}

impl VectorSpace {
    /// Fits the space on a query stream in occurrence order.
    pub fn fit<'a>(queries: impl IntoIterator<Item = (Cohort, &'a str)>) -> Self {
        let mut doc_index: HashMap<String, usize> = HashMap::new();
        let mut documents: Vec<QueryDoc> = Vec::new();
        let mut doc_tokens: Vec<Vec<String>> = Vec::new();
        let mut seen = [0usize; 2];
        for (cohort, raw) in queries {
            let tokens = token_normalize(raw);
            let text = tokens.join(" ");
            let id = *doc_index.entry(text.clone()).or_insert_with(|| {
                documents.push(QueryDoc {
                    text,
                    agent_weight: 0,
                    participant_weight: 0,
                    agent_first_seen: None,
                    participant_first_seen: None,
                });
                doc_tokens.push(tokens);
                documents.len() - 1
            });
            let doc = &mut documents[id];
            let slot = cohort as usize;
            match cohort {
                Cohort::Agent => {
                    doc.agent_weight += 1;
                    doc.agent_first_seen.get_or_insert(seen[slot]);
                }
                Cohort::Participant => {
                    doc.participant_weight += 1;
                    doc.participant_first_seen.get_or_insert(seen[slot]);
                }
            }
            seen[slot] += 1;
        }

        let doc_terms: Vec<BTreeMap<String, usize>> = doc_tokens
            .iter()
            .map(|t| {
                let mut counts = BTreeMap::new();
                for term in query_terms(t) {
                    *counts.entry(term).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        let vocabulary: Vec<String> = doc_terms
            .iter()
            .flat_map(|m| m.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let term_index: HashMap<String, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut df = vec![0usize; vocabulary.len()];
        for m in &doc_terms {
            for term in m.keys() {
                df[term_index[term]] += 1;
            }
        }
        let d = documents.len() as f64;
        let idf: Vec<f64> = df
            .iter()
            .map(|&f| ((1.0 + d) / (1.0 + f as f64)).ln() + 1.0)
            .collect();

        let mut space = VectorSpace {
            vocabulary,
            idf,
            documents,
            vectors: Vec::new(),
            participant_centroid: SparseVector::default(),
            term_index,
        };
        space.vectors = doc_terms.iter().map(|m| space.weigh(m)).collect();
        space.participant_centroid = space.centroid(Cohort::Participant);
        space
    }

    fn weigh(&self, counts: &BTreeMap<String, usize>) -> SparseVector {
        let mut map = BTreeMap::new();
        for (term, &tf) in counts {
            if let Some(&i) = self.term_index.get(term) {
                map.insert(i, tf as f64 * self.idf[i]);
            }
        }
        let mut v = SparseVector::from_map(map);
        let n = v.norm();
        if n > 0.0 {
            v.values.iter_mut().for_each(|x| *x /= n);
        }
        v
    }

    /// Frequency-weighted mean of one cohort's document vectors.
    pub fn centroid(&self, cohort: Cohort) -> SparseVector {
        let total: u64 = self.documents.iter().map(|d| d.weight(cohort)).sum();
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        if total == 0 {
            return SparseVector::default();
        }
        for (doc, vec) in self.documents.iter().zip(&self.vectors) {
            let w = doc.weight(cohort) as f64;
            if w == 0.0 {
                continue;
            }
            for (&i, &x) in vec.indices.iter().zip(&vec.values) {
                *map.entry(i).or_insert(0.0) += w * x;
            }
        }
        map.values_mut().for_each(|x| *x /= total as f64);
        SparseVector::from_map(map)
    }

    /// Vector for arbitrary text; terms outside the vocabulary are dropped.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let mut counts = BTreeMap::new();
        for term in query_terms(&token_normalize(text)) {
            *counts.entry(term).or_insert(0) += 1;
        }
        self.weigh(&counts)
    }

    pub fn doc_id(&self, text: &str) -> Option<usize> {
        let key = token_normalize(text).join(" ");
        self.documents.iter().position(|d| d.text == key)
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    /// Unique documents of a cohort, in order of first occurrence.
    pub fn cohort_docs(&self, cohort: Cohort) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.documents.len())
            .filter(|&i| self.documents[i].weight(cohort) > 0)
            .collect();
        ids.sort_by_key(|&i| self.documents[i].first_seen(cohort));
        ids
    }

    /// Cohort documents by descending occurrence count, ties by first
    /// occurrence.
    pub fn docs_by_frequency(&self, cohort: Cohort) -> Vec<usize> {
        let mut ids = self.cohort_docs(cohort);
        ids.sort_by_key(|&i| std::cmp::Reverse(self.documents[i].weight(cohort)));
        ids
    }

    pub fn similarity(&self, a: usize, b: usize) -> f64 {
        if a == b && !self.vectors[a].is_zero() {
            return 1.0;
        }
        cosine(&self.vectors[a], &self.vectors[b])
    }
}

/// Space over every query event of the included runs.
pub fn build_vector_space(set: &AnalysisSet<'_>) -> Result<VectorSpace> {
    let stream: Vec<(Cohort, &str)> = set
        .runs()
        .flat_map(|r| r.queries().map(move |q| (r.cohort, q)))
        .collect();
    for cohort in Cohort::BOTH {
        if !stream.iter().any(|(c, _)| *c == cohort) {
            return Err(Error::EmptyCohort(format!("no {cohort} queries in the analysis set")));
        }
    }
    Ok(VectorSpace::fit(stream))
}
