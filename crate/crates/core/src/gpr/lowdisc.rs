//! Halton points with an optional Cranley–Patterson shift.

use rand::Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    shift: Vec<f64>,
    /// The first index used; index 0 (the origin) is skipped.
    next: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sequence supports up to {} dimensions", PRIMES.len());
        Halton {
            dim,
            shift: vec![0.0; dim],
            next: 1,
        }
    }

    /// Randomly shifted (modulo 1) sequence.
    pub fn scrambled<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let mut h = Self::new(dim);
        h.shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        h
    }

    pub fn point(&self, i: u64) -> Vec<f64> {
        (0..self.dim)
            .map(|d| (radical_inverse(i, PRIMES[d]) + self.shift[d]).fract())
            .collect()
    }

    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        let pts = (0..n as u64).map(|k| self.point(self.next + k)).collect();
        self.next += n as u64;
        pts
    }
}
