use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const ONSETS: [&str; 16] = [
    "b", "br", "c", "d", "f", "g", "gr", "k", "l", "m", "n", "p", "r", "s", "t", "v",
];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];
const CODAS: [&str; 6] = ["", "n", "r", "s", "l", "x"];

/// `n` distinct pronounceable pseudo-words. `tag` is prepended verbatim;
/// tags starting with a letter outside `ONSETS` keep vocabularies disjoint.
pub(crate) fn vocabulary(rng: &mut ChaCha8Rng, n: usize, tag: &str) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::from(tag);
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Zipf weights 1/rank over `n` words.
pub(crate) fn zipf_weights(n: usize) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / r as f64).collect()
}
