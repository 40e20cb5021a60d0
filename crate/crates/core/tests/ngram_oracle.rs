//! The n-gram model against brute-force counting over random corpora.

use std::collections::HashMap;

use glitter_core::backends::{NgramModel, Smoothing, TrainOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let vocab = rng.random_range(2..30);
    let budget = rng.random_range(1..=1000);
    let mut total = 0;
    let mut out = Vec::new();
    while total < budget {
        let len = rng.random_range(1..=12usize).min(budget - total);
        // Zipf-like skew so that some contexts repeat a lot.
        let s: Vec<String> = (0..len)
            .map(|_| {
                let r: f64 = rng.random();
                format!("w{}", ((r * r * r) * vocab as f64) as usize)
            })
            .collect();
        total += s.len();
        out.push(s);
    }
    out
}

/// Counts every k-gram of the padded sentences, after hapax replacement.
struct Oracle {
    order: usize,
    grams: HashMap<Vec<String>, u64>,
    followers: HashMap<Vec<String>, u64>,
    unigram_total: u64,
    sentences: Vec<Vec<String>>,
}

impl Oracle {
    fn new(corpus: &[Vec<String>], order: usize, unk_threshold: u64) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in corpus.iter().flatten() {
            *freq.entry(w).or_default() += 1;
        }
        let sentences: Vec<Vec<String>> = corpus
            .iter()
            .map(|s| {
                let mut p = vec![BOS.to_owned()];
                p.extend(s.iter().map(|w| if freq[w.as_str()] > unk_threshold { w.clone() } else { "<unk>".to_owned() }));
                p.push(EOS.to_owned());
                p
            })
            .collect();
        let mut grams = HashMap::new();
        let mut followers = HashMap::new();
        let mut unigram_total = 0;
        for s in &sentences {
            for i in 0..s.len() {
                for k in 1..=order {
                    if i + k > s.len() {
                        break;
                    }
                    let g = s[i..i + k].to_vec();
                    if k == 1 {
                        if g[0] == BOS {
                            continue;
                        }
                        unigram_total += 1;
                    } else {
                        *followers.entry(g[..k - 1].to_vec()).or_default() += 1;
                    }
                    *grams.entry(g).or_default() += 1;
                }
            }
        }
        Oracle { order, grams, followers, unigram_total, sentences }
    }

    fn mle(&self, history: &[String], word: &str) -> f64 {
        let h = &history[history.len().saturating_sub(self.order - 1)..];
        for start in 0..h.len() {
            let ctx = &h[start..];
            if let Some(&total) = self.followers.get(ctx) {
                let mut g = ctx.to_vec();
                g.push(word.to_owned());
                return self.grams.get(&g).copied().unwrap_or(0) as f64 / total as f64;
            }
        }
        self.grams.get(&vec![word.to_owned()]).copied().unwrap_or(0) as f64 / self.unigram_total as f64
    }
}

fn ids(model: &NgramModel, words: &[String]) -> Vec<u32> {
    words.iter().map(|w| model.token_id(w)).collect()
}

#[test]
fn mle_matches_brute_force_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..100 {
        let corpus = random_corpus(&mut rng);
        let order = 1 + round % 4;
        let unk_threshold = (round % 3) as u64 / 2;
        let opts = TrainOptions { order, unk_threshold, smoothing: Smoothing::Mle, ..TrainOptions::default() };
        let model = NgramModel::train(&corpus, &opts).unwrap();
        let oracle = Oracle::new(&corpus, order, unk_threshold);
        for s in &oracle.sentences {
            for i in 1..s.len() {
                let expected = oracle.mle(&s[..i], &s[i]);
                let got = model.prob(model.token_id(&s[i]), &ids(&model, &s[..i]));
                assert_eq!(got, expected, "round {round}, history {:?}, word {}", &s[..i], s[i]);
            }
        }
        // Random, mostly unseen histories.
        let vocab: Vec<String> = model.vocab()[1..].to_vec();
        for _ in 0..50 {
            let len = rng.random_range(0..order + 1);
            let mut h = vec![BOS.to_owned()];
            h.extend((0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()));
            let w = &vocab[rng.random_range(0..vocab.len())];
            assert_eq!(model.prob(model.token_id(w), &ids(&model, &h)), oracle.mle(&h, w));
        }
    }
}

#[test]
fn kneser_ney_normalizes_on_every_observed_context() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for round in 0..100 {
        let corpus = random_corpus(&mut rng);
        let opts = TrainOptions { order: 1 + round % 5, ..TrainOptions::default() };
        let model = NgramModel::train(&corpus, &opts).unwrap();
        let contexts: Vec<Vec<u32>> = model.observed_contexts().map(<[u32]>::to_vec).chain([vec![]]).collect();
        for ctx in contexts {
            let dist = model.distribution(&ctx);
            let sum: f64 = dist.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6, "round {round}, context {ctx:?}: sum {sum}");
            assert!(dist.iter().skip(1).all(|&p| p > 0.0));
            assert_eq!(dist[0], 0.0);
        }
    }
}

#[test]
fn model_file_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for round in 0..10 {
        let corpus = random_corpus(&mut rng);
        let smoothing = if round % 2 == 0 { Smoothing::KneserNey } else { Smoothing::Mle };
        let opts = TrainOptions { order: 1 + round % 4, smoothing, ..TrainOptions::default() };
        let model = NgramModel::train(&corpus, &opts).unwrap();
        let bytes = model.to_bytes();
        let loaded = NgramModel::from_bytes(&bytes).unwrap();
        assert_eq!(loaded.to_bytes(), bytes);
        assert_eq!(glitter_core::backends::Backend::model_id(&loaded), glitter_core::backends::Backend::model_id(&model));
        let v = model.vocab_size() as u32;
        for _ in 0..100 {
            let len = rng.random_range(0..5);
            let mut h = vec![0u32];
            h.extend((0..len).map(|_| rng.random_range(1..v)));
            let w = rng.random_range(1..v);
            assert_eq!(model.prob(w, &h).to_bits(), loaded.prob(w, &h).to_bits());
        }
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let corpus = random_corpus(&mut rng);
    let a = NgramModel::train(&corpus, &TrainOptions::default()).unwrap().to_bytes();
    let b = NgramModel::train(&corpus, &TrainOptions::default()).unwrap().to_bytes();
    assert_eq!(a, b);
}

#[test]
fn different_models_have_different_ids() {
    use glitter_core::backends::Backend;
    let opts = TrainOptions { unk_threshold: 0, ..TrainOptions::default() };
    let a = NgramModel::train_from_text("a b c\n", &opts).unwrap();
    let b = NgramModel::train_from_text("a b d\n", &opts).unwrap();
    let c = NgramModel::train_from_text("a b c\n", &TrainOptions { smoothing: Smoothing::Mle, ..opts.clone() }).unwrap();
    assert_ne!(a.model_id(), b.model_id());
    assert_ne!(a.model_id(), c.model_id());
}
