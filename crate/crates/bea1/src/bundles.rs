//! Bundle and block value types with their bit packing and hex codecs.
//!
//! BEA-1 works on 10-bit units ("bundles") the way the AES works on bytes.
//! A data block is 8 bundles (80 bits), a master key 12 bundles (120 bits).
//! Bundles are stored as plain integers; all F2-vector arithmetic is bitwise
//! XOR on the integer value.

use std::fmt;
use std::ops::{BitXor, BitXorAssign, Index, IndexMut};

use thiserror::Error;

/// Number of bits in a bundle.
pub const BUNDLE_BITS: usize = 10;
/// Bundles per data block (80 bits).
pub const BLOCK_BUNDLES: usize = 8;
/// Bundles per master key (120 bits).
pub const KEY_BUNDLES: usize = 12;
/// Packed size of a block in bytes.
pub const BLOCK_BYTES: usize = 10;
/// Packed size of a master key in bytes.
pub const KEY_BYTES: usize = 15;

/// Errors from the hex codecs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HexError {
    #[error("expected {expected} hex digits, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("invalid hex digit {0:?}")]
    BadDigit(char),
    #[error("value {0:#X} does not fit in 10 bits")]
    OutOfRange(u16),
}

/// A 10-bit value, the cipher's atomic unit.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle(u16);

impl Bundle {
    /// Largest bundle value (all 10 bits set).
    pub const MAX: u16 = 0x3FF;

    /// Wraps a value already known to be below 1024.
    ///
    /// Panics if `value` has bits above the low 10 set.
    pub const fn new(value: u16) -> Self {
        assert!(value <= Self::MAX, "bundle value out of 10-bit range");
        Bundle(value)
    }

    pub const fn value(self) -> u16 {
        self.0
    }

    /// Parses a 3-digit hex string, most significant digit first.
    ///
    /// The 10-bit binary expansion of the result, MSB first, is the bit
    /// string the hex notation stands for: "37A" is 1101111010.
    pub fn from_hex(text: &str) -> Result<Self, HexError> {
        if text.chars().count() != 3 {
            return Err(HexError::BadLength {
                expected: 3,
                got: text.chars().count(),
            });
        }
        let mut v: u16 = 0;
        for c in text.chars() {
            let d = c.to_digit(16).ok_or(HexError::BadDigit(c))? as u16;
            v = v << 4 | d;
        }
        if v > Self::MAX {
            return Err(HexError::OutOfRange(v));
        }
        Ok(Bundle(v))
    }

    /// Canonical 3-digit uppercase hex form.
    pub fn to_hex(self) -> String {
        format!("{:03X}", self.0)
    }
}

impl BitXor for Bundle {
    type Output = Bundle;
    fn bitxor(self, rhs: Bundle) -> Bundle {
        Bundle(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for Bundle {
    fn bitxor_assign(&mut self, rhs: Bundle) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03X}", self.0)
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03X}", self.0)
    }
}

/// Packs bundles MSB-first into a big-endian bit string.
///
/// Bit j (0 = MSB) of bundle i lands at overall bit position 10*i + j;
/// bundle 0's MSB is bit 7 of byte 0.
fn pack_bundles(bundles: &[Bundle], out: &mut [u8]) {
    debug_assert_eq!(bundles.len() * BUNDLE_BITS, out.len() * 8);
    let mut acc: u128 = 0;
    for b in bundles {
        acc = acc << BUNDLE_BITS | b.0 as u128;
    }
    let bytes = acc.to_be_bytes();
    out.copy_from_slice(&bytes[16 - out.len()..]);
}

fn unpack_bundles(bytes: &[u8], out: &mut [Bundle]) {
    debug_assert_eq!(out.len() * BUNDLE_BITS, bytes.len() * 8);
    let mut buf = [0u8; 16];
    buf[16 - bytes.len()..].copy_from_slice(bytes);
    let acc = u128::from_be_bytes(buf);
    let n = out.len();
    for (i, b) in out.iter_mut().enumerate() {
        *b = Bundle((acc >> (BUNDLE_BITS * (n - 1 - i)) & Bundle::MAX as u128) as u16);
    }
}

fn hex_to_bytes(text: &str, out: &mut [u8]) -> Result<(), HexError> {
    if text.chars().count() != out.len() * 2 {
        return Err(HexError::BadLength {
            expected: out.len() * 2,
            got: text.chars().count(),
        });
    }
    for (i, c) in text.chars().enumerate() {
        let d = c.to_digit(16).ok_or(HexError::BadDigit(c))? as u8;
        out[i / 2] = out[i / 2] << 4 | d;
    }
    Ok(())
}

fn bytes_to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02X}", b)).collect()
}

/// An 80-bit data block: 8 bundles, indexed 0..7.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Block([Bundle; BLOCK_BUNDLES]);

impl Block {
    pub const fn from_bundles(bundles: [Bundle; BLOCK_BUNDLES]) -> Self {
        Block(bundles)
    }

    pub fn bundles(&self) -> &[Bundle; BLOCK_BUNDLES] {
        &self.0
    }

    /// Packs the eight bundles into 10 bytes, MSB-first in index order.
    pub fn to_bytes(&self) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        pack_bundles(&self.0, &mut out);
        out
    }

    /// Exact inverse of [`Block::to_bytes`].
    pub fn from_bytes(bytes: &[u8; BLOCK_BYTES]) -> Self {
        let mut out = [Bundle::default(); BLOCK_BUNDLES];
        unpack_bundles(bytes, &mut out);
        Block(out)
    }

    /// Canonical 20-hex-digit form (the packed bytes).
    pub fn to_hex(&self) -> String {
        bytes_to_hex(&self.to_bytes())
    }

    pub fn from_hex(text: &str) -> Result<Self, HexError> {
        let mut bytes = [0u8; BLOCK_BYTES];
        hex_to_bytes(text, &mut bytes)?;
        Ok(Self::from_bytes(&bytes))
    }
}

impl Index<usize> for Block {
    type Output = Bundle;
    fn index(&self, i: usize) -> &Bundle {
        &self.0[i]
    }
}

impl IndexMut<usize> for Block {
    fn index_mut(&mut self, i: usize) -> &mut Bundle {
        &mut self.0[i]
    }
}

impl BitXor for Block {
    type Output = Block;
    fn bitxor(self, rhs: Block) -> Block {
        let mut out = self;
        for i in 0..BLOCK_BUNDLES {
            out.0[i] ^= rhs.0[i];
        }
        out
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn fmt_bundle_groups(bundles: &[Bundle], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, b) in bundles.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{:03X}", b.0)?;
    }
    Ok(())
}

// Bundle-wise display, matching the 3-digit notation of the published tables.
impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_bundle_groups(&self.0, f)
    }
}

/// A 120-bit master key: 12 bundles, indexed 0..11.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MasterKey([Bundle; KEY_BUNDLES]);

impl MasterKey {
    pub const fn from_bundles(bundles: [Bundle; KEY_BUNDLES]) -> Self {
        MasterKey(bundles)
    }

    pub fn bundles(&self) -> &[Bundle; KEY_BUNDLES] {
        &self.0
    }

    /// Packs the twelve bundles into 15 bytes, same rule as blocks.
    pub fn to_bytes(&self) -> [u8; KEY_BYTES] {
        let mut out = [0u8; KEY_BYTES];
        pack_bundles(&self.0, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8; KEY_BYTES]) -> Self {
        let mut out = [Bundle::default(); KEY_BUNDLES];
        unpack_bundles(bytes, &mut out);
        MasterKey(out)
    }

    /// Canonical 30-hex-digit form.
    pub fn to_hex(&self) -> String {
        bytes_to_hex(&self.to_bytes())
    }

    pub fn from_hex(text: &str) -> Result<Self, HexError> {
        let mut bytes = [0u8; KEY_BYTES];
        hex_to_bytes(text, &mut bytes)?;
        Ok(Self::from_bytes(&bytes))
    }
}

impl Index<usize> for MasterKey {
    type Output = Bundle;
    fn index(&self, i: usize) -> &Bundle {
        &self.0[i]
    }
}

impl fmt::Display for MasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for MasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_bundle_groups(&self.0, f)
    }
}

/// An 80-bit round key: 8 bundles.
#[derive(Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundKey([Bundle; BLOCK_BUNDLES]);

impl RoundKey {
    pub const fn from_bundles(bundles: [Bundle; BLOCK_BUNDLES]) -> Self {
        RoundKey(bundles)
    }

    pub fn bundles(&self) -> &[Bundle; BLOCK_BUNDLES] {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        pack_bundles(&self.0, &mut out);
        out
    }

    pub fn to_hex(&self) -> String {
        bytes_to_hex(&self.to_bytes())
    }
}

impl Index<usize> for RoundKey {
    type Output = Bundle;
    fn index(&self, i: usize) -> &Bundle {
        &self.0[i]
    }
}

impl fmt::Display for RoundKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for RoundKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_bundle_groups(&self.0, f)
    }
}
