//! Shared test helpers and independent oracles.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use tracealign::stats::RandomSource;
use tracealign::synth::{generate_cohort, synthetic_tasks, task_ids, BehaviorProfile};
use tracealign::trace::{corpus_from_parts, Cohort, Corpus};

pub fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

/// Two-sided exact MWU p-value by enumerating every assignment of the
/// pooled ranks 1..=n+m to the first sample.
pub fn brute_mwu_p(x: &[f64], y: &[f64]) -> f64 {
    let (n, m) = (x.len(), y.len());
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let rank = |v: f64| pooled.iter().position(|&p| p == v).unwrap() + 1;
    let rank_sum: usize = x.iter().map(|&v| rank(v)).sum();
    let u_x = rank_sum - n * (n + 1) / 2;
    let u = u_x.min(n * m - u_x);
    let total_n = n + m;
    let (mut le, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << total_n) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let s: usize = (0..total_n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
        total += 1;
        if s - n * (n + 1) / 2 <= u {
            le += 1;
        }
    }
    (2.0 * le as f64 / total as f64).min(1.0)
}

/// Ratcliff-Obershelp by direct search for the longest common block
/// (earliest in `a`, then in `b`) and recursion on both sides.
pub fn brute_gestalt(a: &str, b: &str) -> f64 {
    fn matched(a: &[char], b: &[char]) -> usize {
        let mut best = (0, 0, 0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut k = 0;
                while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                    k += 1;
                }
                if k > best.2 {
                    best = (i, j, k);
                }
            }
        }
        let (i, j, k) = best;
        if k == 0 {
            return 0;
        }
        k + matched(&a[..i], &b[..j]) + matched(&a[i + k..], &b[j + k..])
    }
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * matched(&a, &b) as f64 / (a.len() + b.len()) as f64
}

/// `n` queries drawn with Zipf(1) weights from a pool of `unique` phrases
/// built from a small word list, so similarities spread over (0, 1).
pub fn zipf_queries(seed: u64, n: usize, unique: usize) -> Vec<String> {
    const WORDS: [&str; 16] = [
        "jazz", "piano", "live", "best", "rock", "classic", "chill", "mix", "radio", "hits", "love", "songs",
        "night", "summer", "acoustic", "remix",
    ];
    let mut rng = RandomSource::new(seed).stream(0);
    let mut pool: Vec<String> = Vec::new();
    while pool.len() < unique {
        let len = rng.gen_range(1..=3);
        let q: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
        let q = q.join(" ");
        if !pool.contains(&q) {
            pool.push(q);
        }
    }
    let weights: Vec<f64> = (1..=unique).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    (0..n)
        .map(|_| {
            let mut x = rng.gen::<f64>() * total;
            for (q, w) in pool.iter().zip(&weights) {
                if x < *w {
                    return q.clone();
                }
                x -= w;
            }
            pool[unique - 1].clone()
        })
        .collect()
}

/// Corpus with agent runs from `agent` and participant runs from `human`.
pub fn synth_corpus(agent: &BehaviorProfile, n_agent: usize, human: &BehaviorProfile, n_human: usize, seed: u64) -> Corpus {
    let ids = task_ids(6);
    let rng = RandomSource::new(seed);
    let mut runs = generate_cohort(agent, n_agent, &ids, Cohort::Agent, &rng.derive("agent")).unwrap();
    runs.extend(generate_cohort(human, n_human, &ids, Cohort::Participant, &rng.derive("participant")).unwrap());
    corpus_from_parts(runs, synthetic_tasks(&ids), agent.state_map()).unwrap()
}
