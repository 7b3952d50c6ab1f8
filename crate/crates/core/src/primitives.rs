//! The hash `H` and the public PRNG-as-function `P`.
//!
//! Both are instances of one keyed mixing construction: a 64-bit state seeded
//! from the suite seed and a one-byte domain constant absorbs a header (output
//! width, part count) and then every part (its width, then its 64-bit lanes),
//! each step passing through the SplitMix64 finalizer. Output lanes are
//! squeezed from the final state and XOR-folded down to the requested width.
//! Nothing here is cryptographically strong; the protocols only need fixed,
//! well-mixed public functions that every party computes identically.

use std::cell::Cell;
use std::fmt;

use crate::word::{mask, Word, WordError};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const PART_TAG: u64 = 0x632b_e59b_d9b4_e019;
const LANE_TAG: u64 = 0xd1b5_4a32_d192_ed03;
const SQUEEZE_TAG: u64 = 0xaef1_7502_108e_f2d9;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Domain separation constant of a primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Hash,
    Prng,
}

impl Domain {
    fn byte(self) -> u8 {
        match self {
            Domain::Hash => b'H',
            Domain::Prng => b'P',
        }
    }

    fn label(self) -> &'static str {
        match self {
            Domain::Hash => "H",
            Domain::Prng => "P",
        }
    }
}

fn header(seed: u64, domain: Domain, out_width: u32, parts: usize) -> u64 {
    let state = mix64(seed ^ u64::from(domain.byte()).wrapping_mul(GOLDEN));
    mix64(state ^ u64::from(out_width) ^ ((parts as u64) << 32))
}

#[inline(always)]
fn absorb_width(state: u64, width: u32) -> u64 {
    mix64(state.wrapping_add(PART_TAG) ^ u64::from(width))
}

#[inline(always)]
fn absorb_lane(state: u64, lane: u64) -> u64 {
    mix64(state.wrapping_add(LANE_TAG) ^ lane)
}

#[inline(always)]
fn squeeze(state: u64, out_width: u32) -> u128 {
    let lane0 = mix64(state ^ SQUEEZE_TAG);
    if out_width <= 64 {
        fold(u128::from(lane0), out_width)
    } else {
        let lane1 = mix64(state ^ SQUEEZE_TAG.wrapping_mul(2));
        fold(u128::from(lane0) | (u128::from(lane1) << 64), out_width)
    }
}

#[inline(always)]
fn fold(mut value: u128, width: u32) -> u128 {
    if width >= 128 {
        return value;
    }
    let m = mask(width);
    let mut acc = 0;
    while value != 0 {
        acc ^= value & m;
        value >>= width;
    }
    acc
}

/// The generic construction behind both primitives.
pub fn digest(seed: u64, domain: Domain, out_width: u32, parts: &[Word]) -> Word {
    assert!(!parts.is_empty(), "digest needs at least one part");
    let mut state = header(seed, domain, out_width, parts.len());
    for part in parts {
        state = absorb_width(state, part.width());
        let (lanes, n) = part.lanes();
        for &lane in &lanes[..n] {
            state = absorb_lane(state, lane);
        }
    }
    Word::new(squeeze(state, out_width), out_width)
}

/// Pure, public primitives as seen by protocol parties and adversaries alike.
pub trait Primitives {
    /// `H` over the ordered parts. Callers XOR before calling when a protocol
    /// XORs, and pass several parts when it concatenates.
    fn hash(&self, parts: &[Word]) -> Word;
    /// `P` on a single `prng_width` input.
    fn prng(&self, x: Word) -> Word;
}

/// Seeded instantiation of `H` and `P` at fixed output widths.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimitiveSuite {
    seed: u64,
    hash_width: u32,
    prng_width: u32,
    prng_prefix: u64,
}

impl PrimitiveSuite {
    pub fn new(seed: u64, hash_width: u32, prng_width: u32) -> Self {
        for w in [hash_width, prng_width] {
            assert!((1..=128).contains(&w), "primitive width {w} outside 1..=128");
        }
        let prng_prefix = absorb_width(header(seed, Domain::Prng, prng_width, 1), prng_width);
        Self {
            seed,
            hash_width,
            prng_width,
            prng_prefix,
        }
    }

    /// Both primitives at the same width, as every protocol here uses them.
    pub fn uniform(seed: u64, width: u32) -> Self {
        Self::new(seed, width, width)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hash_width(&self) -> u32 {
        self.hash_width
    }

    pub fn prng_width(&self) -> u32 {
        self.prng_width
    }

    pub fn hash_h(&self, parts: &[Word]) -> Word {
        for part in parts {
            assert!(part.width() <= 128);
        }
        digest(self.seed, Domain::Hash, self.hash_width, parts)
    }

    pub fn prng_p(&self, x: Word) -> Word {
        assert_eq!(
            x.width(),
            self.prng_width,
            "P input must be {} bits",
            self.prng_width
        );
        if self.prng_width > 64 {
            return digest(self.seed, Domain::Prng, self.prng_width, &[x]);
        }
        // Same absorption as `digest`, starting from the cached header.
        let state = absorb_lane(self.prng_prefix, x.value() as u64);
        Word::new(squeeze(state, self.prng_width), self.prng_width)
    }
}

impl fmt::Debug for PrimitiveSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimitiveSuite")
            .field("seed", &self.seed)
            .field("hash_width", &self.hash_width)
            .field("prng_width", &self.prng_width)
            .finish()
    }
}

impl Primitives for PrimitiveSuite {
    fn hash(&self, parts: &[Word]) -> Word {
        self.hash_h(parts)
    }

    fn prng(&self, x: Word) -> Word {
        self.prng_p(x)
    }
}

/// Wraps a suite and counts every evaluation.
pub struct MeteredSuite<'a> {
    inner: &'a PrimitiveSuite,
    hash_calls: Cell<u64>,
    prng_calls: Cell<u64>,
}

impl<'a> MeteredSuite<'a> {
    pub fn new(inner: &'a PrimitiveSuite) -> Self {
        Self {
            inner,
            hash_calls: Cell::new(0),
            prng_calls: Cell::new(0),
        }
    }

    pub fn hash_calls(&self) -> u64 {
        self.hash_calls.get()
    }

    pub fn prng_calls(&self) -> u64 {
        self.prng_calls.get()
    }

    pub fn evaluations(&self) -> u64 {
        self.hash_calls() + self.prng_calls()
    }
}

impl Primitives for MeteredSuite<'_> {
    fn hash(&self, parts: &[Word]) -> Word {
        self.hash_calls.set(self.hash_calls.get() + 1);
        self.inner.hash_h(parts)
    }

    fn prng(&self, x: Word) -> Word {
        self.prng_calls.set(self.prng_calls.get() + 1);
        self.inner.prng_p(x)
    }
}

/// One line of the regression file pinning primitive outputs:
/// `<domain> <seed> <input-hex>[,<input-hex>...] <output-hex>`.
///
/// Widths are implied by hex digit counts, so golden vectors only use widths
/// that are multiples of four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenVector {
    pub domain: Domain,
    pub seed: u64,
    pub inputs: Vec<Word>,
    pub output: Word,
}

impl GoldenVector {
    /// Computes the vector for the given inputs.
    pub fn compute(domain: Domain, seed: u64, inputs: Vec<Word>, out_width: u32) -> Self {
        let output = match domain {
            Domain::Hash => PrimitiveSuite::new(seed, out_width, out_width).hash_h(&inputs),
            Domain::Prng => {
                assert_eq!(inputs.len(), 1, "P takes one input");
                assert_eq!(inputs[0].width(), out_width);
                PrimitiveSuite::uniform(seed, out_width).prng_p(inputs[0])
            }
        };
        Self {
            domain,
            seed,
            inputs,
            output,
        }
    }

    pub fn to_line(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|w| w.to_hex()).collect();
        format!(
            "{} {} {} {}",
            self.domain.label(),
            self.seed,
            inputs.join(","),
            self.output.to_hex()
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, WordError> {
        let bad = || WordError::BadHex(line.to_string());
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [domain, seed, inputs, output] = fields[..] else {
            return Err(bad());
        };
        let domain = match domain {
            "H" => Domain::Hash,
            "P" => Domain::Prng,
            _ => return Err(bad()),
        };
        let seed = seed.parse().map_err(|_| bad())?;
        let hex_word = |h: &str| Word::from_hex(h, 4 * h.len() as u32);
        let inputs = inputs.split(',').map(hex_word).collect::<Result<_, _>>()?;
        Ok(Self {
            domain,
            seed,
            inputs,
            output: hex_word(output)?,
        })
    }

    /// Recomputes the output and compares.
    pub fn holds(&self) -> bool {
        let again = Self::compute(
            self.domain,
            self.seed,
            self.inputs.clone(),
            self.output.width(),
        );
        again.output == self.output
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn deterministic() {
        let s = PrimitiveSuite::uniform(7, 32);
        let w = Word::new(0xdead_beef, 32);
        assert_eq!(s.hash_h(&[w]), s.hash_h(&[w]));
        assert_eq!(s.prng_p(w), s.prng_p(w));
        assert_eq!(s.prng_p(s.prng_p(w)), s.prng_p(s.prng_p(w)));
    }

    #[test]
    fn output_widths() {
        let s = PrimitiveSuite::new(1, 96, 16);
        assert_eq!(s.hash_h(&[Word::new(3, 8)]).width(), 96);
        assert_eq!(s.prng_p(Word::new(3, 16)).width(), 16);
    }

    #[test]
    fn fast_prng_path_matches_generic_digest() {
        let mut rng = SeededRng::new(11);
        for width in [1, 8, 16, 31, 64] {
            let s = PrimitiveSuite::uniform(99, width);
            for _ in 0..200 {
                let x = rng.draw(width);
                assert_eq!(s.prng_p(x), digest(99, Domain::Prng, width, &[x]));
            }
        }
    }

    #[test]
    fn domains_and_order_are_separated() {
        let s = PrimitiveSuite::uniform(5, 32);
        let a = Word::new(1, 32);
        let b = Word::new(2, 32);
        assert_ne!(s.hash_h(&[a]), s.prng_p(a));
        assert_ne!(s.hash_h(&[a, b]), s.hash_h(&[b, a]));
        assert_ne!(s.hash_h(&[a, b]), s.hash_h(&[a ^ b]));
    }

    #[test]
    fn seeds_separate_hash_outputs() {
        // 10^4 seed pairs at width 32: at least 99.9% must differ.
        let mut rng = SeededRng::new(2024);
        let mut distinct = 0;
        for _ in 0..10_000 {
            let s1 = rng.next_u64();
            let s2 = rng.next_u64();
            let w = rng.draw(32);
            let h1 = PrimitiveSuite::uniform(s1, 32).hash_h(&[w]);
            let h2 = PrimitiveSuite::uniform(s2, 32).hash_h(&[w]);
            distinct += usize::from(h1 != h2);
        }
        assert!(distinct >= 9_990, "only {distinct} distinct");
    }

    #[test]
    fn hash_output_bits_are_balanced() {
        let s = PrimitiveSuite::uniform(3, 16);
        let mut rng = SeededRng::new(4);
        let n = 100_000;
        let mut ones = [0u32; 16];
        for _ in 0..n {
            let h = s.hash_h(&[rng.draw(16)]).value();
            for (bit, count) in ones.iter_mut().enumerate() {
                *count += ((h >> bit) & 1) as u32;
            }
        }
        for (bit, &count) in ones.iter().enumerate() {
            let freq = f64::from(count) / n as f64;
            assert!((freq - 0.5).abs() <= 0.01, "bit {bit}: {freq}");
        }
    }

    #[test]
    fn prng_is_far_from_identity_w16() {
        let s = PrimitiveSuite::uniform(0, 16);
        let fixed = (0..1u128 << 16)
            .filter(|&v| s.prng_p(Word::new(v, 16)).value() == v)
            .count();
        assert!(fixed <= 655, "{fixed} fixed points");
    }

    #[test]
    fn metered_suite_counts() {
        let s = PrimitiveSuite::uniform(1, 16);
        let m = MeteredSuite::new(&s);
        let x = Word::new(5, 16);
        assert_eq!(m.prng(x), s.prng_p(x));
        m.hash(&[x, x]);
        m.hash(&[x]);
        assert_eq!((m.prng_calls(), m.hash_calls(), m.evaluations()), (1, 2, 3));
    }

    #[test]
    fn golden_line_round_trip() {
        let v = GoldenVector::compute(
            Domain::Hash,
            42,
            vec![Word::new(0xff, 8), Word::new(0x1234, 16)],
            32,
        );
        let line = v.to_line();
        assert!(line.starts_with("H 42 ff,1234 "));
        let parsed = GoldenVector::parse_line(&line).unwrap();
        assert_eq!(parsed, v);
        assert!(parsed.holds());
        assert!(GoldenVector::parse_line("Q 1 ff 00").is_err());
    }
}
