//! Low-discrepancy sequence generation.
//!
//! The first 21 dimensions use a Sobol sequence (direction numbers from the
//! standard Joe-Kuo tables), randomized by a seeded per-dimension digital
//! shift. The shift preserves base-2 stratification: for a power-of-two
//! sample count each dimension still hits every dyadic interval exactly
//! once. Dimensions beyond 21 fall back to digit-scrambled van der Corput
//! sequences in successive prime bases.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOBOL_BITS: u32 = 32;
pub const SOBOL_DIMS: usize = 21;

/// Joe-Kuo parameters for dimensions 2..=21: (a, m_i...). Dimension 1 is
/// the plain van der Corput sequence in base 2.
const JOE_KUO: &[(u32, &[u32])] = &[
    (0, &[1]),
    (1, &[1, 3]),
    (1, &[1, 3, 1]),
    (2, &[1, 1, 1]),
    (1, &[1, 1, 3, 3]),
    (4, &[1, 3, 5, 13]),
    (2, &[1, 1, 5, 5, 17]),
    (4, &[1, 1, 5, 5, 5]),
    (7, &[1, 1, 7, 11, 19]),
    (11, &[1, 1, 5, 1, 1]),
    (13, &[1, 1, 1, 3, 11]),
    (14, &[1, 3, 5, 5, 31]),
    (1, &[1, 3, 3, 9, 7, 49]),
    (13, &[1, 1, 1, 15, 21, 21]),
    (16, &[1, 3, 1, 13, 27, 49]),
    (19, &[1, 1, 1, 15, 7, 5]),
    (22, &[1, 3, 1, 15, 13, 25]),
    (25, &[1, 1, 5, 5, 19, 61]),
    (1, &[1, 3, 7, 11, 23, 15, 103]),
    (4, &[1, 3, 7, 13, 13, 15, 69]),
];

const PRIMES: &[u64] = &[
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
];

fn direction_numbers(dim: usize) -> [u32; SOBOL_BITS as usize] {
    let mut v = [0u32; SOBOL_BITS as usize];
    if dim == 0 {
        for (i, x) in v.iter_mut().enumerate() {
            *x = 1u32 << (31 - i);
        }
        return v;
    }
    let (a, m) = JOE_KUO[dim - 1];
    let s = m.len();
    for i in 0..s {
        v[i] = m[i] << (31 - i);
    }
    for i in s..SOBOL_BITS as usize {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// A seeded, scrambled low-discrepancy point sequence over [0,1)^dims.
pub struct LowDiscrepancy {
    dirs: Vec<[u32; SOBOL_BITS as usize]>,
    shifts: Vec<u32>,
    /// Gray-code Sobol state per Sobol dimension.
    state: Vec<u32>,
    /// Seeded digit permutations for fallback dimensions: perms[d][digit].
    fallback: Vec<(u64, Vec<u8>)>,
    index: u64,
    dims: usize,
}

impl LowDiscrepancy {
    pub fn new(dims: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ab_5eed_0b0e_0f17);
        let n_sobol = dims.min(SOBOL_DIMS);
        let dirs: Vec<_> = (0..n_sobol).map(direction_numbers).collect();
        let shifts: Vec<u32> = (0..n_sobol).map(|_| rng.gen::<u32>()).collect();
        let mut fallback = Vec::new();
        for d in n_sobol..dims {
            let base = PRIMES[(d - n_sobol) % PRIMES.len()];
            let mut perm: Vec<u8> = (0..base as u8).collect();
            // Fisher-Yates with the seeded stream; digit 0 stays fixed so
            // that 0 maps to 0 and stratification is preserved.
            for i in (2..perm.len()).rev() {
                let j = 1 + (rng.gen::<u64>() % i as u64) as usize;
                perm.swap(i, j);
            }
            fallback.push((base, perm));
        }
        LowDiscrepancy {
            dirs,
            shifts,
            state: vec![0; n_sobol],
            fallback,
            index: 0,
            dims,
        }
    }

    /// Next point of the sequence, each coordinate in [0, 1).
    pub fn next_point(&mut self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dims);
        if self.index > 0 {
            let c = self.index.trailing_zeros() as usize;
            for (d, st) in self.state.iter_mut().enumerate() {
                *st ^= self.dirs[d][c];
            }
        }
        for d in 0..self.state.len() {
            let bits = self.state[d] ^ self.shifts[d];
            out.push(bits as f64 / 4294967296.0);
        }
        let n_sobol = self.state.len();
        for d in n_sobol..self.dims {
            let (base, perm) = &self.fallback[d - n_sobol];
            out.push(scrambled_vdc(self.index, *base, perm));
        }
        self.index += 1;
        out
    }
}

fn scrambled_vdc(mut i: u64, base: u64, perm: &[u8]) -> f64 {
    let mut f = 1.0f64;
    let mut r = 0.0f64;
    while i > 0 {
        f /= base as f64;
        r += f * perm[(i % base) as usize] as f64;
        i /= base;
    }
    r
}
