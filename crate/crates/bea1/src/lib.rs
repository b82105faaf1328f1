//! Reference implementation of BEA-1 plus the analysis tooling that checks
//! its advertised security margins.
//!
//! BEA-1 is an AES-like substitution-permutation network over 10-bit bundles:
//! 80-bit blocks, a 120-bit key, ten full rounds and a short final round. It
//! was designed as a research target and carries a deliberately inserted
//! backdoor. Do not use it to protect real data.
//!
//! Module map:
//! - [`bundles`]: the 10-bit value types, bit packing, hex codecs.
//! - [`tables`]: the embedded S-boxes and diffusion-layer constants, with
//!   integrity checks at load time.
//! - [`cipher`]: key expansion, block encryption/decryption, CTR mode, and
//!   the encrypted-file header.
//! - [`kat`]: known-answer-test records, their text format, generation and
//!   verification.
//! - [`analysis`]: difference distribution and linear approximation tables,
//!   branch numbers of the diffusion layer, active-S-box counting, and trail
//!   probability/bias bounds.
//! - [`randtest`]: keystream bit sources and a four-test statistical battery
//!   (monobit, block frequency, runs, cumulative sums).
//! - [`gf2`]: dense bit matrices over F2 backing the branch-number work.

pub mod analysis;
pub mod bundles;
pub mod cipher;
pub mod gf2;
pub mod kat;
pub mod randtest;
pub mod tables;
