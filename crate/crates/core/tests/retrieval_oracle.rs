mod oracles;

use ctxscope_core::bundle::embedding_text;
use ctxscope_core::corpus::{generate_corpus, GenConfig};
use ctxscope_core::embedding::{embed_batch, embed_text, HashEmbedder};
use ctxscope_core::retrieval::{hybrid_retrieve, CorpusIndex, RetrievalParams};
use ctxscope_core::text::tokenize;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn top_fifty_matches_exhaustive_scoring() {
    let corpus = generate_corpus(&GenConfig {
        n_employees: 40,
        n_items: 200,
        ..GenConfig::with_seed(13)
    })
    .unwrap();
    let embedder = HashEmbedder::default();
    let texts: Vec<String> = corpus.items.iter().map(embedding_text).collect();
    let embeddings = embed_batch(&embedder, &texts).unwrap();
    let index = CorpusIndex::build(&corpus, embeddings.clone()).unwrap();

    let docs: Vec<Vec<String>> = corpus.items.iter().map(|i| tokenize(&corpus.searchable_text(i))).collect();
    let doc_ids: Vec<String> = corpus.items.iter().map(|i| i.id.0.clone()).collect();
    let doc_vecs: Vec<Vec<f64>> = embeddings.iter().map(|e| e.0.clone()).collect();
    let mut vocab: Vec<&String> = docs.iter().flatten().collect();
    vocab.sort();
    vocab.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for p in 0..20 {
        let words: Vec<&str> = (0..rng.random_range(1..5)).map(|_| vocab.choose(&mut rng).unwrap().as_str()).collect();
        let prompt = format!("Summarize {}", words.join(" "));
        let qvec = embed_text(&embedder, &prompt).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            let params = RetrievalParams { alpha, ..RetrievalParams::default() };
            let got: Vec<String> = hybrid_retrieve(&prompt, &index, &embedder, &params)
                .unwrap()
                .into_iter()
                .map(|s| s.item_id.0)
                .collect();
            let oracle = oracles::brute_force_rank(&docs, &doc_ids, &doc_vecs, &tokenize(&prompt), &qvec.0, alpha, 1.2, 0.75);
            assert_eq!(got.len(), 50);
            oracles::same_ranking(&got, &oracle, 1e-12).unwrap_or_else(|e| panic!("prompt {p} alpha {alpha}: {e}"));
        }
    }
}
