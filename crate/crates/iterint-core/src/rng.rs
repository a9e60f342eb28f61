//! Counter-keyed Gaussian streams.
//!
//! Every random quantity is addressed by `(seed, stream, channel, index)`.
//! The pair `(seed, stream)` selects a ChaCha key, `channel` selects the
//! ChaCha stream and `index` selects a fixed position inside it: each index
//! consumes exactly four 32-bit words and yields one pair of independent
//! standard normals. Any index can therefore be reached directly, and
//! extending a range never perturbs values that were already drawn.

use core::f64::consts::PI;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Words consumed per index.
const WORDS_PER_INDEX: u128 = 4;

/// Channel tags. The low 32 bits of a channel carry a component index.
pub mod tag {
    /// Terminal Wiener increment `W_1^j`.
    pub const W1: u64 = 0;
    /// Fourier coefficient pairs `(x_{jr}, y_{jr})`.
    pub const COEFF: u64 = 1;
    /// Auxiliary Gaussian draws (candidate noise, tail completion).
    pub const AUX: u64 = 2;
    /// Uniform draws used for random directions and similar.
    pub const DIRECTION: u64 = 3;
}

/// Builds a channel identifier from a tag and a component index.
pub const fn channel(tag: u64, component: u64) -> u64 {
    (tag << 32) | (component & 0xffff_ffff)
}

/// Derives a child stream identifier from a parent stream and a label.
///
/// Used to give independent sub-experiments their own keys while staying a
/// pure function of the parent identifiers.
pub fn derive_stream(stream: u64, label: u64) -> u64 {
    let mut z = stream ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, stream: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&stream.to_le_bytes());
    k[16..24].copy_from_slice(b"iterint\0");
    k
}

/// A positioned reader over one `(seed, stream, channel)` sequence.
#[derive(Clone)]
pub struct NormalStream {
    rng: ChaCha12Rng,
}

impl NormalStream {
    /// Opens the sequence positioned at `index`.
    pub fn new(seed: u64, stream: u64, channel: u64, index: u64) -> Self {
        let mut rng = ChaCha12Rng::from_seed(key(seed, stream));
        rng.set_stream(channel);
        rng.set_word_pos(WORDS_PER_INDEX * index as u128);
        NormalStream { rng }
    }

    /// Two independent uniforms for the current index, then advances.
    pub fn next_uniform_pair(&mut self) -> (f64, f64) {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        (unit_open_closed(a), unit_closed_open(b))
    }

    /// Two independent standard normals for the current index, then advances.
    pub fn next_pair(&mut self) -> (f64, f64) {
        let (u1, u2) = self.next_uniform_pair();
        let rad = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(2.0 * PI * u2);
        (rad * c, rad * s)
    }

    /// Fills `out` with standard normals, two per index.
    pub fn fill(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.next_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.next_pair().0;
        }
    }
}

fn unit_open_closed(v: u64) -> f64 {
    ((v >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_closed_open(v: u64) -> f64 {
    (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A single standard normal at `(seed, stream, channel, index)`.
pub fn normal_at(seed: u64, stream: u64, channel: u64, index: u64) -> f64 {
    NormalStream::new(seed, stream, channel, index).next_pair().0
}

/// A uniformly distributed unit vector in `R^dim`.
pub fn unit_vector(seed: u64, stream: u64, channel: u64, dim: usize) -> alloc::vec::Vec<f64> {
    let mut v = alloc::vec![0.0; dim];
    let mut s = NormalStream::new(seed, stream, channel, 0);
    loop {
        s.fill(&mut v);
        let n = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if n > 1e-300 {
            v.iter_mut().for_each(|a| *a /= n);
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn positioned_reads_match_sequential() {
        let mut seq = NormalStream::new(3, 4, channel(tag::COEFF, 1), 0);
        let mut all = vec![0.0; 20];
        seq.fill(&mut all);
        let mut tail = vec![0.0; 10];
        NormalStream::new(3, 4, channel(tag::COEFF, 1), 5).fill(&mut tail);
        assert_eq!(&all[10..], &tail[..]);
    }

    #[test]
    fn channels_and_streams_differ() {
        let a = normal_at(1, 0, channel(tag::COEFF, 0), 0);
        let b = normal_at(1, 0, channel(tag::COEFF, 1), 0);
        let c = normal_at(1, 1, channel(tag::COEFF, 0), 0);
        let d = normal_at(2, 0, channel(tag::COEFF, 0), 0);
        assert!(a != b && a != c && a != d);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let v = unit_vector(9, 9, channel(tag::DIRECTION, 0), 14);
        let n: f64 = v.iter().map(|a| a * a).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }
}
