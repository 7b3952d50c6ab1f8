//! Exhaustive searches over the word space. Every `P` call goes through the
//! caller's [`Primitives`], so a [`MeteredSuite`](crate::primitives::MeteredSuite)
//! sees the true cost.

use crate::primitives::Primitives;
use crate::word::Word;

fn all_words(width: u32) -> impl Iterator<Item = Word> {
    assert!(width <= 32, "search space 2^{width} is not enumerable");
    (0..1u128 << width).map(move |v| Word::new(v, width))
}

/// Every `κ` with `κ ^ α ^ P(α ^ κ) == z`. One `P` call per candidate.
pub fn residue_candidates(prims: &impl Primitives, alpha: Word, z: Word) -> Vec<Word> {
    all_words(alpha.width())
        .filter(|&k| k ^ alpha ^ prims.prng(alpha ^ k) == z)
        .collect()
}

/// Whether `k` fits the residue of a transcript with index `alpha`.
pub fn fits_residue(prims: &impl Primitives, k: Word, alpha: Word, z: Word) -> bool {
    k ^ alpha ^ prims.prng(alpha ^ k) == z
}

/// Preimages under `P` of `a` and of `b`, found in a single sweep.
pub fn joint_preimages(prims: &impl Primitives, a: Word, b: Word) -> (Vec<Word>, Vec<Word>) {
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for x in all_words(a.width()) {
        let y = prims.prng(x);
        if y == a {
            pa.push(x);
        }
        if y == b {
            pb.push(x);
        }
    }
    (pa, pb)
}
