//! Dense linear algebra over a prime field, plus CRT lifting back to Q.
//!
//! Matrices are reduced modulo random 31-bit primes and eliminated with a
//! precomputed-quotient (Shoup) multiplier in the hot row operation, so the
//! inner loop is two wide multiplications and no division.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Draw a random prime in (2^30, 2^31).
pub fn sample_prime(rng: &mut impl Rng) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 30) + 1..1u64 << 31) | 1;
        if is_prime_u64(c) {
            return c;
        }
    }
}

#[inline(always)]
fn shoup_precompute(m: u64, p: u64) -> u64 {
    (((m as u128) << 64) / p as u128) as u64
}

/// m*a mod p with precomputed quotient; requires m, a < p < 2^63.
#[inline(always)]
fn shoup_mul(m: u64, a: u64, m_shoup: u64, p: u64) -> u64 {
    let q = ((m_shoup as u128 * a as u128) >> 64) as u64;
    let r = m.wrapping_mul(a).wrapping_sub(q.wrapping_mul(p));
    if r >= p {
        r - p
    } else {
        r
    }
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Dense row-major matrix over Z/p with p < 2^31.
pub struct DenseMod {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl DenseMod {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        DenseMod {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v as u32;
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c] as u64
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let cols = self.cols;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (first, second) = self.data.split_at_mut(hi * cols);
        first[lo * cols..(lo + 1) * cols].swap_with_slice(&mut second[..cols]);
    }

    fn scale_row(&mut self, r: usize, m: u64, from: usize) {
        let p = self.p;
        let ms = shoup_precompute(m, p);
        for v in &mut self.data[r * self.cols + from..(r + 1) * self.cols] {
            *v = shoup_mul(m, *v as u64, ms, p) as u32;
        }
    }

    /// dst -= m * src over columns from..cols
    fn row_submul(&mut self, dst: usize, src: usize, m: u64, from: usize) {
        let p = self.p;
        let ms = shoup_precompute(m, p);
        let cols = self.cols;
        let (a, b) = if dst < src {
            let (x, y) = self.data.split_at_mut(src * cols);
            (&mut x[dst * cols + from..dst * cols + cols], &y[from..cols])
        } else {
            let (x, y) = self.data.split_at_mut(dst * cols);
            (&mut y[from..cols], &x[src * cols + from..src * cols + cols])
        };
        for (d, s) in a.iter_mut().zip(b.iter()) {
            let t = shoup_mul(m, *s as u64, ms, p);
            let v = *d as u64;
            let r = if v >= t { v - t } else { v + p - t };
            *d = r as u32;
        }
    }

    /// Row echelon rank; consumes the matrix contents.
    pub fn rank(&mut self) -> usize {
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let mut piv = None;
            for r in rank..self.rows {
                if self.get(r, c) != 0 {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else { continue };
            self.swap_rows(rank, piv);
            let inv = inv_mod(self.get(rank, c), self.p);
            self.scale_row(rank, inv, c);
            for r in rank + 1..self.rows {
                let m = self.get(r, c);
                if m != 0 {
                    self.row_submul(r, rank, m, c);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Full Gauss-Jordan reduction; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let mut piv = None;
            for r in rank..self.rows {
                if self.get(r, c) != 0 {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else { continue };
            self.swap_rows(rank, piv);
            let inv = inv_mod(self.get(rank, c), self.p);
            self.scale_row(rank, inv, c);
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let m = self.get(r, c);
                if m != 0 {
                    self.row_submul(r, rank, m, c);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    /// Kernel basis from a matrix already in reduced row echelon form.
    /// One vector per free column, normalized with a 1 in that column.
    pub fn kernel_from_rref(&self, pivots: &[usize]) -> Vec<Vec<u64>> {
        let mut is_pivot = vec![false; self.cols];
        for &c in pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[f] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                let a = self.get(r, f);
                if a != 0 {
                    v[c] = self.p - a;
                }
            }
            out.push(v);
        }
        out
    }
}

/// Combine residues by the Chinese remainder theorem; returns (value, modulus)
/// with value in [0, modulus).
pub fn crt_combine(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    let mut val = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(r, p) in residues {
        let bp = BigInt::from(p);
        let br = BigInt::from(r);
        // solve x = val (mod modulus), x = r (mod p)
        let inv = mod_inverse(&modulus, &bp).expect("moduli not coprime");
        let diff = ((&br - &val) % &bp + &bp) % &bp;
        let t = (diff * inv) % &bp;
        val = &val + &modulus * t;
        modulus *= bp;
    }
    (val, modulus)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(((e.x % m) + m) % m)
    } else {
        None
    }
}

/// Rational reconstruction of `a` modulo `m`: the unique n/d with
/// |n|, d <= sqrt(m/2) and n = a*d mod m, when it exists.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let mut r0 = m.clone();
    let mut r1 = ((a % m) + m) % m;
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if r1.gcd(&t1) != BigInt::one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}
