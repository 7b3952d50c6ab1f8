//! Fixed-width bitstrings.
//!
//! Every protocol field (nonces, keys, hashes, on-air messages) is a [`Word`]:
//! an unsigned value together with the bit width it lives in. Binary
//! operations between words of different widths are programming errors and
//! panic; arithmetic faults that depend on secret values (a zero modulus) are
//! reported through [`WordError`].

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported width in bits.
pub const MAX_WIDTH: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("modulus is zero")]
    ModulusZero,
    #[error("width {0} outside 1..=128")]
    BadWidth(u32),
    #[error("value does not fit in {width} bits")]
    Overflow { width: u32 },
    #[error("malformed hex word {0:?}")]
    BadHex(String),
}

/// An unsigned integer confined to `width` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    value: u128,
    width: u32,
}

#[inline]
pub(crate) fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

fn check_width(width: u32) {
    assert!(
        (1..=MAX_WIDTH).contains(&width),
        "word width {width} outside 1..=128"
    );
}

impl Word {
    /// Builds a word, panicking if `value` does not fit in `width` bits.
    pub fn new(value: u128, width: u32) -> Self {
        Self::try_new(value, width).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_new(value: u128, width: u32) -> Result<Self, WordError> {
        if !(1..=MAX_WIDTH).contains(&width) {
            return Err(WordError::BadWidth(width));
        }
        if value & !mask(width) != 0 {
            return Err(WordError::Overflow { width });
        }
        Ok(Self { value, width })
    }

    /// Keeps the low `width` bits of `value`.
    pub fn truncate(value: u128, width: u32) -> Self {
        check_width(width);
        Self {
            value: value & mask(width),
            width,
        }
    }

    pub fn zero(width: u32) -> Self {
        Self::new(0, width)
    }

    pub fn value(self) -> u128 {
        self.value
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_width(self, other: Word) {
        assert_eq!(
            self.width, other.width,
            "width mismatch: {} vs {} bits",
            self.width, other.width
        );
    }

    pub fn xor(self, other: Word) -> Word {
        self.same_width(other);
        Word {
            value: self.value ^ other.value,
            width: self.width,
        }
    }

    /// Addition modulo `2^width`.
    pub fn wrapping_add(self, other: Word) -> Word {
        self.same_width(other);
        Word::truncate(self.value.wrapping_add(other.value), self.width)
    }

    /// Subtraction modulo `2^width`.
    pub fn wrapping_sub(self, other: Word) -> Word {
        self.same_width(other);
        Word::truncate(self.value.wrapping_sub(other.value), self.width)
    }

    /// Remainder of unsigned division. A zero modulus is an error rather than
    /// a panic because moduli in this crate are secrets.
    pub fn mod_reduce(self, modulus: Word) -> Result<Word, WordError> {
        self.same_width(modulus);
        if modulus.value == 0 {
            return Err(WordError::ModulusZero);
        }
        Ok(Word {
            value: self.value % modulus.value,
            width: self.width,
        })
    }

    /// Concatenates two equal-width halves; `hi` becomes the most significant
    /// half. Bit range `(0:w-1)` in protocol notation is the `hi` half.
    pub fn concat_halves(hi: Word, lo: Word) -> Word {
        hi.same_width(lo);
        let width = hi.width * 2;
        assert!(
            width <= MAX_WIDTH,
            "concatenated width {width} exceeds {MAX_WIDTH}"
        );
        Word {
            value: (hi.value << lo.width) | lo.value,
            width,
        }
    }

    /// Inverse of [`Word::concat_halves`]. Panics on odd widths.
    pub fn split_halves(self) -> (Word, Word) {
        assert!(self.width % 2 == 0, "cannot split odd width {}", self.width);
        let half = self.width / 2;
        (
            Word::truncate(self.value >> half, half),
            Word::truncate(self.value, half),
        )
    }

    /// Low `width` bits of this word as a new, narrower word.
    pub fn low_bits(self, width: u32) -> Word {
        assert!(width <= self.width, "cannot widen with low_bits");
        Word::truncate(self.value, width)
    }

    /// Lowercase hex, zero-padded to `ceil(width / 4)` digits.
    pub fn to_hex(self) -> String {
        let digits = self.width.div_ceil(4) as usize;
        format!("{:0digits$x}", self.value)
    }

    pub fn from_hex(text: &str, width: u32) -> Result<Word, WordError> {
        let bad = || WordError::BadHex(text.to_string());
        if text.is_empty() || text.len() > 32 || !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let value = u128::from_str_radix(text, 16).map_err(|_| bad())?;
        Word::try_new(value, width)
    }

    /// Lanes of 64 bits, least significant first. Widths up to 64 yield one
    /// lane, wider words two.
    pub(crate) fn lanes(self) -> ([u64; 2], usize) {
        let lo = self.value as u64;
        let hi = (self.value >> 64) as u64;
        ([lo, hi], if self.width > 64 { 2 } else { 1 })
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}/w{}", self.to_hex(), self.width)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl BitXor for Word {
    type Output = Word;

    fn bitxor(self, rhs: Word) -> Word {
        self.xor(rhs)
    }
}

impl BitXorAssign for Word {
    fn bitxor_assign(&mut self, rhs: Word) {
        *self = self.xor(rhs);
    }
}

/// Serialized as `{"width": w, "hex": "..."}` so widths survive round trips.
impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            width: u32,
            hex: String,
        }
        Repr {
            width: self.width,
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            width: u32,
            hex: String,
        }
        let repr = Repr::deserialize(deserializer)?;
        Word::from_hex(&repr.hex, repr.width).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w8(v: u128) -> Word {
        Word::new(v, 8)
    }

    #[test]
    fn xor_examples() {
        assert_eq!(w8(0xA5) ^ w8(0x00), w8(0xA5));
        assert_eq!(w8(0xA5) ^ w8(0xA5), w8(0x00));
        assert_eq!(w8(0xA5) ^ w8(0xFF), w8(0x5A));
    }

    #[test]
    #[should_panic(expected = "width mismatch")]
    fn xor_rejects_mixed_widths() {
        let _ = Word::new(1, 8) ^ Word::new(1, 16);
    }

    #[test]
    fn concat_examples() {
        let w4 = |v| Word::new(v, 4);
        assert_eq!(Word::concat_halves(w4(0x1), w4(0x5)), w8(0x15));
        assert_eq!(Word::concat_halves(w4(0x0), w4(0x0)), w8(0x00));
        assert_eq!(Word::concat_halves(w4(0xF), w4(0x1)), w8(0xF1));
    }

    #[test]
    #[should_panic(expected = "exceeds")]
    fn concat_beyond_max_width() {
        let _ = Word::concat_halves(Word::new(0, 96), Word::new(0, 96));
    }

    #[test]
    fn mod_examples() {
        assert_eq!(w8(3).mod_reduce(w8(5)), Ok(w8(3)));
        assert_eq!(w8(7).mod_reduce(w8(5)), Ok(w8(2)));
        assert_eq!(w8(0).mod_reduce(w8(5)), Ok(w8(0)));
        assert_eq!(w8(7).mod_reduce(w8(0)), Err(WordError::ModulusZero));
    }

    #[test]
    fn mod_is_identity_below_modulus_exhaustive_w8() {
        for m in 1..256u128 {
            for a in 0..m {
                assert_eq!(w8(a).mod_reduce(w8(m)).unwrap(), w8(a));
            }
        }
    }

    #[test]
    fn wrapping_arith() {
        assert_eq!(w8(250).wrapping_add(w8(10)), w8(4));
        assert_eq!(w8(3).wrapping_sub(w8(5)), w8(254));
        let big = Word::new(u128::MAX, 128);
        assert_eq!(big.wrapping_add(Word::new(1, 128)), Word::zero(128));
    }

    #[test]
    fn hex_padding() {
        assert_eq!(Word::new(0xa, 16).to_hex(), "000a");
        assert_eq!(Word::new(0x5, 6).to_hex(), "05");
        assert_eq!(Word::new(1, 96).to_hex().len(), 24);
        assert_eq!(Word::from_hex("000a", 16), Ok(Word::new(0xa, 16)));
        assert!(Word::from_hex("1ff", 8).is_err());
        assert!(Word::from_hex("xyz", 8).is_err());
        assert!(Word::from_hex("", 8).is_err());
    }

    #[test]
    fn construction_bounds() {
        assert_eq!(Word::try_new(256, 8), Err(WordError::Overflow { width: 8 }));
        assert_eq!(Word::try_new(0, 0), Err(WordError::BadWidth(0)));
        assert_eq!(Word::try_new(0, 129), Err(WordError::BadWidth(129)));
        assert_eq!(Word::truncate(0x1ff, 8), w8(0xff));
    }

    #[test]
    fn serde_keeps_width() {
        let w = Word::new(0x2a, 12);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"width":12,"hex":"02a"}"#);
        assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), w);
    }
}
