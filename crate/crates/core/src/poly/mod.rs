//! Exact arithmetic on homogeneous polynomials in `n+1` variables.
//!
//! Everything downstream (differential forms, syzygies, spectral sequence
//! pages) is built on the types here: arbitrary-precision rational
//! coefficients, graded-lexicographic monomials and enumerated graded slices
//! of the polynomial ring.

mod parse;

pub use parse::{parse_poly, ParseError};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Exact rational scalar: always in lowest terms, positive denominator.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn rat2(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Binomial coefficient C(a, b) as usize (exact, via u128).
pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Dimension of the degree-`m` slice of a polynomial ring in `n+1` variables:
/// C(m+n, n) for m >= 0 and 0 for m < 0.
pub fn slice_dim(m: i64, n: usize) -> usize {
    if m < 0 {
        0
    } else {
        binomial(m as usize + n, n)
    }
}

/// Exponent vector of a monomial in a fixed set of variables.
///
/// The total order is graded lexicographic with `x0 > x1 > ... > xn`:
/// monomials compare first by total degree, then lexicographically on the
/// exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), &self.0).cmp(&(other.degree(), &other.0))
    }
}

/// Homogeneity of a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    /// The zero polynomial; its degree is undefined.
    Zero,
    /// Homogeneous of the given degree.
    Degree(usize),
    /// Terms of mixed degrees.
    Inhomogeneous,
}

/// Sparse polynomial with exact rational coefficients.
///
/// `nvars` is the number of variables (`n + 1` in the geometric setting);
/// zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(nvars), c);
        }
        p
    }

    pub fn variable(nvars: usize, idx: usize) -> Self {
        let mut p = Poly::zero(nvars);
        p.terms.insert(Monomial::var(nvars, idx), Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn homogeneity(&self) -> Homogeneity {
        let mut it = self.terms.keys();
        match it.next() {
            None => Homogeneity::Zero,
            Some(first) => {
                let d = first.degree();
                if it.all(|m| m.degree() == d) {
                    Homogeneity::Degree(d)
                } else {
                    Homogeneity::Inhomogeneous
                }
            }
        }
    }

    /// Degree of a nonzero homogeneous polynomial.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        match self.homogeneity() {
            Homogeneity::Degree(d) => Some(d),
            _ => None,
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiply by a single monomial with coefficient.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(mm, a)| (mm.mul(m), a * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m.mul(m2), c * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.nvars, Rational::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `idx`.
    pub fn derivative(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[idx] = e - 1;
                out.add_term(m2, c * rat(e as i64));
            }
        }
        out
    }

    /// Substitute the last variable by a linear form in the remaining ones
    /// and drop it; the coefficient slice has length `nvars - 1`.
    pub fn substitute_last(&self, coeffs: &[Rational]) -> Poly {
        assert!(self.nvars >= 2);
        assert_eq!(coeffs.len(), self.nvars - 1);
        let nv = self.nvars - 1;
        let mut linear = Poly::zero(nv);
        for (i, c) in coeffs.iter().enumerate() {
            linear.add_term(Monomial::var(nv, i), c.clone());
        }
        let max_e = self
            .terms
            .keys()
            .map(|m| m.0[nv] as u32)
            .max()
            .unwrap_or(0);
        let mut powers = Vec::with_capacity(max_e as usize + 1);
        powers.push(Poly::constant(nv, Rational::one()));
        for j in 1..=max_e {
            powers.push(powers[j as usize - 1].mul(&linear));
        }
        let mut out = Poly::zero(nv);
        for (m, c) in &self.terms {
            let e_last = m.0[nv];
            let base = Monomial(m.0[..nv].to_vec());
            out = out.add(&powers[e_last as usize].mul_term(&base, c));
        }
        out
    }

    /// Render with the given variable names, in decreasing monomial order.
    pub fn format_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mono = format_monomial(m, names);
            if mono.is_empty() {
                out.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format_rational(&abs));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }
}

fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn format_monomial(m: &Monomial, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{}", i)).collect();
        write!(f, "{}", self.format_with(&names))
    }
}

/// All partial derivatives of a homogeneous polynomial of degree >= 1.
pub fn partials(f: &Poly) -> Vec<Poly> {
    (0..f.nvars()).map(|i| f.derivative(i)).collect()
}

/// Ordered basis of all monomials of a fixed degree, with position lookup.
///
/// Monomials are listed in decreasing graded-lexicographic order, so the
/// basis of `S_m` starts at `x0^m` and ends at `xn^m`.
#[derive(Debug, Clone)]
pub struct SliceBasis {
    pub degree: i64,
    pub nvars: usize,
    pub monomials: Vec<Monomial>,
    index: HashMap<Monomial, u32>,
}

impl SliceBasis {
    pub fn new(degree: i64, nvars: usize) -> Self {
        let mut monomials = Vec::new();
        if degree >= 0 {
            let mut cur = vec![0u16; nvars];
            enumerate_rec(&mut cur, 0, degree as u16, nvars, &mut monomials);
        }
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        SliceBasis {
            degree,
            nvars,
            monomials,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn position(&self, m: &Monomial) -> u32 {
        *self
            .index
            .get(m)
            .unwrap_or_else(|| panic!("monomial {:?} not in slice of degree {}", m, self.degree))
    }
}

fn enumerate_rec(cur: &mut Vec<u16>, var: usize, remaining: u16, nvars: usize, out: &mut Vec<Monomial>) {
    if var == nvars - 1 {
        cur[var] = remaining;
        out.push(Monomial(cur.clone()));
        cur[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e;
        enumerate_rec(cur, var + 1, remaining - e, nvars, out);
    }
    cur[var] = 0;
}

/// Error raised when a random restriction keeps degenerating.
#[derive(Debug)]
pub struct DegenerateRestriction;

impl fmt::Display for DegenerateRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "random restriction degenerated repeatedly")
    }
}

impl std::error::Error for DegenerateRestriction {}

/// One-sided probabilistic squarefreeness test by restriction to random lines.
///
/// Returns `true` with certainty when some random line meets `f` in `deg f`
/// distinct points (a full-degree squarefree binary restriction certifies
/// squarefreeness). Returns `false` when three independent lines all carry a
/// repeated factor. Errors only if every sampled line degenerates.
pub fn squarefree_probabilistic(f: &Poly, seed: u64) -> Result<bool, DegenerateRestriction> {
    let d = f
        .homogeneous_degree()
        .expect("squarefree test requires a nonzero homogeneous polynomial");
    if d == 0 {
        return Ok(true);
    }
    let mut repeated_trials = 0;
    for trial in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(trial + 1)));
        let mut found = None;
        for _ in 0..16 {
            let a: Vec<i64> = (0..f.nvars()).map(|_| rng.gen_range(-99..=99)).collect();
            let b: Vec<i64> = (0..f.nvars()).map(|_| rng.gen_range(-99..=99)).collect();
            let u = restrict_to_line(f, &a, &b);
            // full degree in s requires f(a) != 0
            if u.len() == d + 1 && !u[d].is_zero() {
                found = Some(u);
                break;
            }
        }
        let u = match found {
            Some(u) => u,
            None => return Err(DegenerateRestriction),
        };
        let du: Vec<Rational> = (1..u.len()).map(|i| &u[i] * rat(i as i64)).collect();
        let g = univariate_gcd(&u, &du);
        if g.len() <= 1 {
            return Ok(true);
        }
        repeated_trials += 1;
    }
    debug_assert_eq!(repeated_trials, 3);
    Ok(false)
}

/// Coefficients (in s, with t := 1) of f(a*s + b), lowest degree first.
fn restrict_to_line(f: &Poly, a: &[i64], b: &[i64]) -> Vec<Rational> {
    let mut acc = vec![Rational::zero()];
    let mut any = false;
    for (m, c) in f.terms() {
        // product over variables of (a_i s + b_i)^{e_i}
        let mut term = vec![c.clone()];
        for (i, &e) in m.0.iter().enumerate() {
            for _ in 0..e {
                term = mul_linear(&term, a[i], b[i]);
            }
        }
        acc = add_vecs(&acc, &term);
        any = true;
    }
    if !any {
        return vec![];
    }
    while acc.len() > 1 && acc.last().unwrap().is_zero() {
        acc.pop();
    }
    acc
}

fn mul_linear(p: &[Rational], a: i64, b: i64) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.len() + 1];
    let (ra, rb) = (rat(a), rat(b));
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = c * &rb;
        out[i] += t;
        let t = c * &ra;
        out[i + 1] += t;
    }
    out
}

fn add_vecs(p: &[Rational], q: &[Rational]) -> Vec<Rational> {
    let n = p.len().max(q.len());
    let mut out = vec![Rational::zero(); n];
    for (i, c) in p.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in q.iter().enumerate() {
        out[i] += c;
    }
    out
}

/// Monic gcd of two univariate rational polynomials (low-to-high coefficients).
/// The result has length `deg + 1`; a constant gcd has length 1.
fn univariate_gcd(p: &[Rational], q: &[Rational]) -> Vec<Rational> {
    let trim = |v: &mut Vec<Rational>| {
        while !v.is_empty() && v.last().unwrap().is_zero() {
            v.pop();
        }
    };
    let mut a = p.to_vec();
    let mut b = q.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        while a.len() >= b.len() && !a.is_empty() {
            let k = a.len() - b.len();
            let factor = a.last().unwrap() / b.last().unwrap();
            for i in 0..b.len() {
                let t = &b[i] * &factor;
                a[k + i] -= t;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= lead.clone();
        }
    }
    a
}

/// Substitute the last variable by a seeded random rational linear form in
/// the others, producing the generic hyperplane section of `f`.
///
/// The section is only probabilistically generic: the caller must re-verify
/// squarefreeness and retry with a fresh seed on failure.
pub fn restrict_generic_hyperplane(f: &Poly, seed: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Rational> = (0..f.nvars() - 1)
        .map(|_| {
            let num: i64 = rng.gen_range(-99..=99);
            let den: i64 = rng.gen_range(1..=99);
            rat2(num, den)
        })
        .collect();
    f.substitute_last(&coeffs)
}

/// Generic hyperplane section with reducedness re-verified; retries with
/// derived seeds and errors if every attempt yields a non-reduced section.
pub fn restrict_reduced(f: &Poly, seed: u64) -> Result<Poly, DegenerateRestriction> {
    for attempt in 0..8u64 {
        let g = restrict_generic_hyperplane(f, seed.wrapping_add(attempt.wrapping_mul(0x5851_f42d_4c95_7f2d)));
        if g.homogeneous_degree() == f.homogeneous_degree()
            && squarefree_probabilistic(&g, seed ^ 0xa5a5)?
        {
            return Ok(g);
        }
    }
    Err(DegenerateRestriction)
}
