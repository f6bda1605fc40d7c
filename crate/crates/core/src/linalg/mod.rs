//! Exact sparse rank and kernel computation over Q, with a fast multi-prime
//! modular backend and a certified fraction-free backend.

mod exact;
pub mod modular;

pub use exact::{kernel_rational, rank_fraction_free, rref_rational};
pub use modular::{is_prime_u64, rational_reconstruct, sample_prime, DenseMod};

use crate::poly::Rational;
use modular::crt_combine;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::io::Write;

/// Sparse matrix over Q, stored column-major with rows sorted inside each
/// column. Zero entries are never stored; `rows` or `cols` may be 0.
#[derive(Debug, Clone)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(u32, Rational)>>,
}

impl SparseMat {
    pub fn from_columns(rows: usize, columns: Vec<Vec<(u32, Rational)>>) -> Self {
        for col in &columns {
            debug_assert!(col.windows(2).all(|w| w[0].0 < w[1].0));
            debug_assert!(col.iter().all(|(r, v)| (*r as usize) < rows && !v.is_zero()));
        }
        SparseMat {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn column(&self, c: usize) -> &[(u32, Rational)] {
        &self.columns[c]
    }

    /// Matrix as sparse rows (sorted by column), for row-based elimination.
    pub fn to_rows(&self) -> Vec<Vec<(u32, Rational)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                rows[*r as usize].push((c as u32, v.clone()));
            }
        }
        rows
    }

    /// Rows scaled to integers (per-row lcm of denominators).
    fn to_int_rows(&self) -> Vec<Vec<(u32, BigInt)>> {
        self.to_rows()
            .into_iter()
            .map(|row| {
                let mut lcm = BigInt::one();
                for (_, v) in &row {
                    lcm = lcm.lcm(v.denom());
                }
                row.into_iter()
                    .map(|(c, v)| (c, v.numer() * (&lcm / v.denom())))
                    .collect()
            })
            .collect()
    }

    /// Reduce modulo p; None if p divides some denominator.
    pub fn reduce_mod(&self, p: u64) -> Option<DenseMod> {
        let mut m = DenseMod::zero(p, self.rows, self.cols);
        let bp = BigInt::from(p);
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                let den = mod_big(v.denom(), &bp, p);
                if den == 0 {
                    return None;
                }
                let num = mod_big(v.numer(), &bp, p);
                let val = (num as u128 * modular::inv_mod(den, p) as u128 % p as u128) as u64;
                m.set(*r as usize, c, val);
            }
        }
        Some(m)
    }

    /// Exact matrix-vector product; `v` is indexed by column.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            if v[c].is_zero() {
                continue;
            }
            for (r, a) in col {
                let t = a * &v[c];
                out[*r as usize] += t;
            }
        }
        out
    }

    /// Text dump: header `rows cols nnz`, then one `row col num/den` per entry.
    pub fn dump(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                writeln!(w, "{} {} {}/{}", r, c, v.numer(), v.denom())?;
            }
        }
        Ok(())
    }
}

fn mod_big(v: &BigInt, bp: &BigInt, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    let r = ((v % bp) + bp) % bp;
    r.to_u64().unwrap() % p
}

/// How a rank or kernel was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankMethod {
    Modular(Vec<u64>),
    Exact,
}

/// Certified means exact arithmetic end to end; probabilistic means modular
/// with the stated primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Confidence {
    Probabilistic,
    Certified,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Confidence::Probabilistic => write!(f, "probabilistic"),
            Confidence::Certified => write!(f, "certified"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    pub method: RankMethod,
    pub confidence: Confidence,
}

/// Arithmetic backend selection threaded through every rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arith {
    Modular { primes: usize, seed: u64 },
    Exact,
}

impl Arith {
    /// Same backend, decorrelated stream for an independent subcomputation.
    pub fn derive(&self, salt: u64) -> Arith {
        match *self {
            Arith::Modular { primes, seed } => Arith::Modular {
                primes,
                seed: seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15),
            },
            Arith::Exact => Arith::Exact,
        }
    }
}

#[derive(Debug)]
pub enum LinalgError {
    /// No usable prime found (denominators kept vanishing).
    BadPrimes,
    /// Modular ranks kept disagreeing and exact escalation was disabled.
    Disagreement,
    /// Kernel lift failed verification even after adding primes.
    LiftFailed,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::BadPrimes => write!(f, "could not find primes avoiding denominators"),
            LinalgError::Disagreement => write!(f, "modular ranks disagree"),
            LinalgError::LiftFailed => write!(f, "kernel lift failed exact verification"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Rank via random 31-bit primes. The reported rank is the maximum over the
/// primes; two primes agreeing on the maximum give the standard probabilistic
/// confidence, persistent disagreement escalates to the exact backend.
pub fn rank_modular(m: &SparseMat, prime_count: usize, seed: u64) -> Result<RankReport, LinalgError> {
    if m.rows == 0 || m.cols == 0 || m.nnz() == 0 {
        return Ok(RankReport {
            rank: 0,
            method: RankMethod::Modular(vec![]),
            confidence: Confidence::Certified,
        });
    }
    let prime_count = prime_count.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks: Vec<(u64, usize)> = Vec::new();
    let mut draws = 0;
    while ranks.len() < prime_count + 3 {
        let p = sample_prime(&mut rng);
        draws += 1;
        if draws > prime_count + 32 {
            return Err(LinalgError::BadPrimes);
        }
        let Some(mut dm) = m.reduce_mod(p) else { continue };
        ranks.push((p, dm.rank()));
        if ranks.len() >= prime_count {
            let best = ranks.iter().map(|(_, r)| *r).max().unwrap();
            let agree = ranks.iter().filter(|(_, r)| *r == best).count();
            if agree >= 2 || prime_count == 1 {
                return Ok(RankReport {
                    rank: best,
                    method: RankMethod::Modular(ranks.iter().map(|(p, _)| *p).collect()),
                    confidence: Confidence::Probabilistic,
                });
            }
        }
    }
    // persistent disagreement: certify exactly
    Ok(rank_exact(m))
}

/// True rank over Q by fraction-free elimination with sparsest-column pivoting.
pub fn rank_exact(m: &SparseMat) -> RankReport {
    let rank = rank_fraction_free(m.to_int_rows(), m.cols);
    RankReport {
        rank,
        method: RankMethod::Exact,
        confidence: Confidence::Certified,
    }
}

/// Rank with the selected backend.
pub fn rank_with(m: &SparseMat, arith: &Arith) -> Result<RankReport, LinalgError> {
    match arith {
        Arith::Modular { primes, seed } => rank_modular(m, *primes, *seed),
        Arith::Exact => Ok(rank_exact(m)),
    }
}

/// Kernel basis over Q. The modular path computes the reduced kernel modulo
/// several primes, lifts by CRT plus rational reconstruction, and verifies
/// `m*v = 0` exactly; any failure falls back to the exact path.
pub fn kernel_basis(m: &SparseMat, arith: &Arith) -> Result<Vec<Vec<Rational>>, LinalgError> {
    match arith {
        Arith::Exact => Ok(kernel_rational(m.to_rows(), m.cols)),
        Arith::Modular { primes, seed } => {
            let want = (*primes).max(2);
            for attempt in 0..3 {
                match kernel_lift(m, want << attempt, seed.wrapping_add(attempt as u64)) {
                    Some(k) => return Ok(k),
                    None => continue,
                }
            }
            Ok(kernel_rational(m.to_rows(), m.cols))
        }
    }
}

type PrimeKernel = (u64, Vec<usize>, Vec<Vec<u64>>);

fn kernel_lift(m: &SparseMat, prime_count: usize, seed: u64) -> Option<Vec<Vec<Rational>>> {
    if m.cols == 0 {
        return Some(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // collect per-prime reduced kernels grouped by pivot structure
    let mut per_prime: Vec<PrimeKernel> = Vec::new();
    let mut draws = 0;
    while per_prime.len() < prime_count {
        if draws > prime_count + 32 {
            return None;
        }
        draws += 1;
        let p = sample_prime(&mut rng);
        let Some(mut dm) = m.reduce_mod(p) else { continue };
        let pivots = dm.rref();
        let kernel = dm.kernel_from_rref(&pivots);
        per_prime.push((p, pivots, kernel));
    }
    // majority pivot structure; unlucky primes show a different one
    let pivots = per_prime
        .iter()
        .map(|(_, piv, _)| piv.clone())
        .max_by_key(|piv| {
            per_prime
                .iter()
                .filter(|(_, other, _)| other == piv)
                .count()
        })?;
    let agreeing: Vec<&PrimeKernel> = per_prime
        .iter()
        .filter(|(_, piv, _)| *piv == pivots)
        .collect();
    if agreeing.len() < 2 {
        return None;
    }
    let dim = agreeing[0].2.len();
    let mut out = Vec::with_capacity(dim);
    for v_idx in 0..dim {
        let mut vec_q = vec![Rational::zero(); m.cols];
        for c in 0..m.cols {
            let residues: Vec<(u64, u64)> = agreeing
                .iter()
                .map(|(p, _, k)| (k[v_idx][c], *p))
                .collect();
            if residues.iter().all(|(r, _)| *r == 0) {
                continue;
            }
            let (val, modulus) = crt_combine(&residues);
            vec_q[c] = rational_reconstruct(&val, &modulus)?;
        }
        // exact verification over Q
        if m.apply(&vec_q).iter().any(|x| !x.is_zero()) {
            return None;
        }
        out.push(vec_q);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat2};
    use rand::Rng;

    fn mat(rows: usize, entries: &[(usize, usize, i64)], cols: usize) -> SparseMat {
        let mut columns = vec![Vec::new(); cols];
        for &(r, c, v) in entries {
            columns[c].push((r as u32, rat(v)));
        }
        for col in &mut columns {
            col.sort_by_key(|(r, _)| *r);
        }
        SparseMat::from_columns(rows, columns)
    }

    #[test]
    fn zero_and_empty_matrices() {
        let z = SparseMat::zero(4, 4);
        let rep = rank_modular(&z, 2, 1).unwrap();
        assert_eq!(rep.rank, 0);
        assert_eq!(rep.confidence, Confidence::Certified);
        let e = SparseMat::zero(0, 7);
        assert_eq!(rank_exact(&e).rank, 0);
    }

    #[test]
    fn identity_and_proportional() {
        let id = mat(5, &[(0, 0, 1), (1, 1, 1), (2, 2, 1), (3, 3, 1), (4, 4, 1)], 5);
        assert_eq!(rank_modular(&id, 2, 3).unwrap().rank, 5);
        let prop = mat(2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4)], 2);
        assert_eq!(rank_exact(&prop).rank, 1);
    }

    #[test]
    fn modular_agrees_with_exact_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..25 {
            let rows = 30;
            let cols = 30;
            let mut columns = vec![Vec::new(); cols];
            for col in columns.iter_mut() {
                for r in 0..rows {
                    if rng.gen_bool(0.2) {
                        let v = rng.gen_range(-9i64..=9);
                        if v != 0 {
                            col.push((r as u32, rat(v)));
                        }
                    }
                }
            }
            let m = SparseMat::from_columns(rows, columns);
            let rm = rank_modular(&m, 2, 1000 + trial).unwrap().rank;
            let re = rank_exact(&m).rank;
            assert_eq!(rm, re, "trial {}", trial);
        }
    }

    #[test]
    fn kernel_examples() {
        // single relation x + y = 0
        let m = mat(1, &[(0, 0, 1), (0, 1, 1)], 2);
        let k = kernel_basis(&m, &Arith::Modular { primes: 2, seed: 5 }).unwrap();
        assert_eq!(k.len(), 1);
        let ratio = &k[0][0] / &k[0][1];
        assert_eq!(ratio, rat(-1));
        // full-rank square matrix
        let fr = mat(2, &[(0, 0, 2), (1, 1, 3)], 2);
        assert!(kernel_basis(&fr, &Arith::Exact).unwrap().is_empty());
    }

    #[test]
    fn rank_plus_nullity_is_cols() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let rows = 12;
            let cols = 17;
            let mut columns = vec![Vec::new(); cols];
            for col in columns.iter_mut() {
                for r in 0..rows {
                    if rng.gen_bool(0.3) {
                        let v = rng.gen_range(-5i64..=5);
                        if v != 0 {
                            col.push((r as u32, rat(v)));
                        }
                    }
                }
            }
            let m = SparseMat::from_columns(rows, columns);
            let k = kernel_basis(&m, &Arith::Modular { primes: 2, seed: 99 + trial }).unwrap();
            let r = rank_exact(&m).rank;
            assert_eq!(r + k.len(), cols);
            for v in &k {
                assert!(m.apply(v).iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn rational_entries_reduce_correctly() {
        let mut columns = vec![Vec::new(); 2];
        columns[0].push((0u32, rat2(1, 3)));
        columns[1].push((0u32, rat2(2, 3)));
        let m = SparseMat::from_columns(1, columns);
        assert_eq!(rank_modular(&m, 2, 11).unwrap().rank, 1);
        let k = kernel_basis(&m, &Arith::Modular { primes: 2, seed: 11 }).unwrap();
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn dump_format() {
        let m = mat(2, &[(0, 0, 1), (1, 1, -3)], 2);
        let mut buf = Vec::new();
        m.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "2 2 2\n0 0 1/1\n1 1 -3/1\n");
    }
}
