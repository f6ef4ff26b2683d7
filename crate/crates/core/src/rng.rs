//! Seeded, platform-independent random source.
//!
//! Uniform variates come from ChaCha8 seeded through `seed_from_u64`; each
//! uniform is the top 53 bits of a `u64` scaled to `[0, 1)`. Gaussian
//! variates use the Box–Muller transform on two uniforms, consuming both
//! outputs in order, so a given seed yields the same stream on every
//! platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{Matrix, Vector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + (self.inner.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// `exp(U[ln lo, ln hi])`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform_in(lo.ln(), hi.ln()).exp()
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Standard Gaussian entry, complex with independent parts when
    /// `complex` is set.
    pub fn scalar(&mut self, complex: bool) -> Complex64 {
        let re = self.gaussian();
        let im = if complex { self.gaussian() } else { 0.0 };
        Complex64::new(re, im)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, complex: bool) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.scalar(complex);
            }
        }
        m
    }

    pub fn gaussian_vector(&mut self, n: usize, complex: bool) -> Vector {
        Vector::from_iterator(n, (0..n).map(|_| self.scalar(complex)))
    }

    pub fn unit_vector(&mut self, n: usize, complex: bool) -> Vector {
        loop {
            let v = self.gaussian_vector(n, complex);
            let norm = v.norm();
            if norm > 1e-8 {
                return v.unscale(norm);
            }
        }
    }

    /// Haar-like random unitary from the QR factorization of a Gaussian
    /// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
    pub fn unitary(&mut self, n: usize, complex: bool) -> Matrix {
        let g = self.gaussian_matrix(n, n, complex);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let norm = d.norm();
            if norm > 0.0 {
                let phase = d / norm;
                for i in 0..n {
                    q[(i, j)] *= phase;
                }
            }
        }
        q
    }

    /// A subset of `0..n` of the given size, in increasing order.
    pub fn subset(&mut self, n: usize, size: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..size.min(n) {
            let j = self.int_in(i, n - 1);
            pool.swap(i, j);
        }
        let mut chosen = pool[..size.min(n)].to_vec();
        chosen.sort_unstable();
        chosen
    }
}
