//! Transmit side of tag-based encoding: QPSK mapping, the negation-invariant
//! feature, keyed tag generation, phase-reversal encoding and superposition
//! of message and tag.

use rand::Rng;
use sha2::{Digest, Sha256};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::theory::PowerAllocation;
use crate::C64;

const A: f64 = FRAC_1_SQRT_2;

/// Gray-mapped QPSK in index order: `e^{jπ/4}, e^{j3π/4}, e^{j5π/4}, e^{j7π/4}`.
pub const QPSK: [C64; 4] = [C64::new(A, A), C64::new(-A, A), C64::new(-A, -A), C64::new(A, -A)];

/// Bit pair carried by each constellation index.
const GRAY: [[bool; 2]; 4] = [[false, false], [false, true], [true, true], [true, false]];

/// Shared secret used for tag generation.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    bytes: Vec<u8>,
    bits: usize,
}

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KeyMaterial({} bits)", self.bits)
    }
}

impl KeyMaterial {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Length("empty key".into()));
        }
        Ok(Self { bytes: pack_msb_first(bits), bits: bits.len() })
    }

    /// The low `bits` bits of `key`, most significant first.
    pub fn from_u64(key: u64, bits: usize) -> Result<Self> {
        if bits == 0 || bits > 64 {
            return Err(Error::Length(format!("cannot take {bits} bits from a u64")));
        }
        let v: Vec<bool> = (0..bits).rev().map(|i| (key >> i) & 1 == 1).collect();
        Self::from_bits(&v)
    }

    pub fn random<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Result<Self> {
        let v: Vec<bool> = (0..bits).map(|_| rng.random()).collect();
        Self::from_bits(&v)
    }

    pub fn len_bits(&self) -> usize {
        self.bits
    }
}

pub fn pack_msb_first(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

/// Amplitude split derived from a [`PowerAllocation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub rho_m: f64,
    pub rho_t: f64,
    pub phi_s: f64,
    pub phi_n: f64,
}

impl PowerSplit {
    pub fn new(p: PowerAllocation) -> Self {
        Self {
            rho_m: p.rho.sqrt(),
            rho_t: (1.0 - p.rho).max(0.0).sqrt(),
            phi_s: p.phi.sqrt(),
            phi_n: (1.0 - p.phi).max(0.0).sqrt(),
        }
    }
}

impl From<PowerAllocation> for PowerSplit {
    fn from(p: PowerAllocation) -> Self {
        Self::new(p)
    }
}

pub fn modulate_message(bits: &[bool]) -> Result<Vec<C64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Length(format!("{} bits do not fill QPSK symbols", bits.len())));
    }
    Ok(bits
        .chunks(2)
        .map(|p| QPSK[GRAY.iter().position(|g| g[0] == p[0] && g[1] == p[1]).unwrap()])
        .collect())
}

/// Hard quadrant decision, returning the constellation index.
#[inline]
pub fn quadrant_index(s: C64) -> usize {
    match (s.re >= 0.0, s.im >= 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

pub fn demodulate(symbols: &[C64]) -> Vec<bool> {
    symbols.iter().flat_map(|&s| GRAY[quadrant_index(s)]).collect()
}

/// 1 for symbols in the first or third quadrant. Negation preserves it.
pub fn extract_feature(symbols: &[C64]) -> Result<Vec<bool>> {
    symbols
        .iter()
        .map(|s| {
            if s.re == 0.0 || s.im == 0.0 {
                Err(Error::Domain(format!("symbol {s} lies on an axis")))
            } else {
                Ok((s.re > 0.0) == (s.im > 0.0))
            }
        })
        .collect()
}

/// `T` tag bits from SHA-256 over `key ‖ feature ‖ counter`, digests chained
/// until enough bits are available. `T` is the feature length.
pub fn generate_tag(key: &KeyMaterial, feature: &[bool]) -> Vec<bool> {
    let t = feature.len();
    let packed = pack_msb_first(feature);
    let mut out = Vec::with_capacity(t);
    let mut counter: u32 = 0;
    while out.len() < t {
        let mut h = Sha256::new();
        h.update(&key.bytes);
        h.update((key.bits as u32).to_be_bytes());
        h.update(&packed);
        h.update((t as u32).to_be_bytes());
        h.update(counter.to_be_bytes());
        let digest = h.finalize();
        for byte in digest.iter() {
            for i in (0..8).rev() {
                if out.len() == t {
                    break;
                }
                out.push((byte >> i) & 1 == 1);
            }
        }
        counter += 1;
    }
    out
}

/// Bit 1 → +1, bit 0 → −1.
pub fn tag_symbols(bits: &[bool]) -> Vec<f64> {
    bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect()
}

pub fn tag_bits(symbols: &[f64]) -> Vec<bool> {
    symbols.iter().map(|&t| t > 0.0).collect()
}

/// Negate every symbol whose tag bit is 0.
pub fn encode_ciphertext(s: &[C64], tag: &[bool]) -> Result<Vec<C64>> {
    if s.len() != tag.len() {
        return Err(Error::Length(format!("{} symbols vs {} tag bits", s.len(), tag.len())));
    }
    Ok(s.iter().zip(tag).map(|(&x, &b)| if b { x } else { -x }).collect())
}

/// `x = ρ_m c + ρ_t t`.
pub fn compose_tx(c: &[C64], t: &[f64], split: &PowerSplit) -> Result<Vec<C64>> {
    if c.len() != t.len() {
        return Err(Error::Length(format!("{} ciphertext symbols vs {} tag symbols", c.len(), t.len())));
    }
    Ok(c.iter().zip(t).map(|(&ci, &ti)| ci * split.rho_m + ti * split.rho_t).collect())
}

/// Everything the transmitter produces for one user and one block.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageBlock {
    pub bits: Vec<bool>,
    pub symbols: Vec<C64>,
    pub feature: Vec<bool>,
    pub tag_bits: Vec<bool>,
    pub tag: Vec<f64>,
    pub ciphertext: Vec<C64>,
    pub tx: Vec<C64>,
}

impl MessageBlock {
    pub fn new(key: &KeyMaterial, bits: Vec<bool>, split: &PowerSplit) -> Result<Self> {
        let symbols = modulate_message(&bits)?;
        let feature = extract_feature(&symbols)?;
        let tag_bits = generate_tag(key, &feature);
        let tag = tag_symbols(&tag_bits);
        let ciphertext = encode_ciphertext(&symbols, &tag_bits)?;
        let tx = compose_tx(&ciphertext, &tag, split)?;
        Ok(Self { bits, symbols, feature, tag_bits, tag, ciphertext, tx })
    }

    pub fn random<R: Rng + ?Sized>(key: &KeyMaterial, t: usize, split: &PowerSplit, rng: &mut R) -> Self {
        let bits: Vec<bool> = (0..2 * t).map(|_| rng.random()).collect();
        Self::new(key, bits, split).expect("even bit count and on-grid symbols")
    }
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
