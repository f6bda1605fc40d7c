//! From a second page to monodromy data: pole-order spectrum, eigenspace
//! dimensions, Alexander polynomials assembled from cyclotomic factors, and
//! the consistency certificates that separate certified results from
//! conjectural ones.
//!
//! Eigenvalues are handled purely arithmetically: the class `k` in `[1, d]`
//! stands for the d-th root of unity `exp(-2 pi i k / d)`, whose order is
//! `d / gcd(d, k)`. Characteristic polynomials of the monodromy have
//! rational coefficients, so their root multiplicities are constant on the
//! classes of a common order; that constancy is checked, never assumed.

use crate::linalg::Confidence;
use crate::spectral::{E2Page, Mode};
use num_integer::Integer;
use std::collections::BTreeMap;
use std::fmt;

/// Euler totient.
pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(d: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for m in 1..=d {
        if d.is_multiple_of(m) {
            out.push(m);
        }
    }
    out
}

/// Product of cyclotomic polynomials `Phi_order ^ exponent`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CyclotomicPoly {
    factors: BTreeMap<u64, u64>,
}

impl CyclotomicPoly {
    pub fn one() -> Self {
        CyclotomicPoly::default()
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (u64, u64)>) -> Self {
        CyclotomicPoly {
            factors: factors.into_iter().filter(|(_, e)| *e > 0).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, order: u64) -> u64 {
        self.factors.get(&order).copied().unwrap_or(0)
    }

    pub fn factors(&self) -> impl Iterator<Item = (&u64, &u64)> {
        self.factors.iter()
    }

    pub fn degree(&self) -> u64 {
        self.factors
            .iter()
            .map(|(&o, &e)| e * euler_phi(o))
            .sum()
    }

    pub fn mul(&self, other: &CyclotomicPoly) -> CyclotomicPoly {
        let mut out = self.factors.clone();
        for (&o, &e) in &other.factors {
            *out.entry(o).or_insert(0) += e;
        }
        CyclotomicPoly { factors: out }
    }
}

impl fmt::Display for CyclotomicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(o, e)| {
                if *e == 1 {
                    format!("Phi_{}", o)
                } else {
                    format!("Phi_{}^{}", o, e)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Pole-order spectrum of the top cohomology: multiplicity at each exponent
/// `alpha = Q / d`, stored by the integer Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleSpectrum {
    pub d: usize,
    pub entries: BTreeMap<usize, usize>,
}

impl PoleSpectrum {
    pub fn total_mass(&self) -> usize {
        self.entries.values().sum()
    }
}

impl fmt::Display for PoleSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(q, m)| {
                if *m == 1 {
                    format!("t^{{{}/{}}}", q, self.d)
                } else {
                    format!("{}*t^{{{}/{}}}", m, q, self.d)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Spectrum read off a computed page: the entry at `Q = q*d + k` is the
/// dimension of the cell (q, k); zero cells are omitted.
pub fn spectrum_from_page(page: &E2Page) -> PoleSpectrum {
    let mut entries = BTreeMap::new();
    for ((q, k), cell) in &page.cells {
        if cell.dim > 0 {
            entries.insert(q * page.d + k, cell.dim);
        }
    }
    PoleSpectrum { d: page.d, entries }
}

/// Sum of the computed cell dimensions in the eigenvalue class `k`; under
/// top-computability this is the top Betti eigenspace dimension.
pub fn eigen_dims(page: &E2Page, k: usize) -> usize {
    page.cells
        .iter()
        .filter(|((_, kk), _)| *kk == k)
        .map(|(_, c)| c.dim)
        .sum()
}

/// The eigenvalue classes of each order dividing d must carry equal
/// dimensions; a violation means the page cannot be the limit page.
#[derive(Debug, Clone)]
pub struct GaloisViolation {
    pub order: u64,
    pub values: Vec<(usize, usize)>,
}

impl fmt::Display for GaloisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "inconsistent eigenspace dimensions for eigenvalue order {}: {:?}",
            self.order, self.values
        )
    }
}

impl std::error::Error for GaloisViolation {}

/// Per-order constancy record from a successful cyclotomic assembly.
#[derive(Debug, Clone)]
pub struct GaloisCert {
    pub orders: Vec<(u64, usize)>,
}

/// Characteristic polynomial of the monodromy on the top cohomology,
/// assembled by grouping the eigenvalue classes by order.
pub fn alexander_top(page: &E2Page) -> Result<(CyclotomicPoly, GaloisCert), GaloisViolation> {
    let d = page.d as u64;
    let mut factors = BTreeMap::new();
    let mut orders = Vec::new();
    for order in divisors(d) {
        let ks: Vec<usize> = (1..=page.d)
            .filter(|&k| d / d.gcd(&(k as u64)) == order)
            .collect();
        let values: Vec<(usize, usize)> = ks.iter().map(|&k| (k, eigen_dims(page, k))).collect();
        let common = values[0].1;
        if values.iter().any(|(_, v)| *v != common) {
            return Err(GaloisViolation { order, values });
        }
        orders.push((order, common));
        if common > 0 {
            factors.insert(order, common as u64);
        }
    }
    Ok((CyclotomicPoly { factors }, GaloisCert { orders }))
}

/// First Alexander polynomial of a reduced plane curve from a curve-mode
/// page: the multiplicity of the class `k < d` is the sum of the cells at
/// `k` and `d - k`, and of the class `d` the cell at `d`. This route is
/// certified, not conjectural.
pub fn alexander_curve(page: &E2Page) -> Result<CyclotomicPoly, GaloisViolation> {
    assert_eq!(page.mode, Mode::Curve, "alexander_curve needs a curve-mode page");
    assert_eq!(page.n, 2);
    let d = page.d;
    let mult = |k: usize| -> usize {
        if k == d {
            page.dim(0, d)
        } else {
            page.dim(0, k) + page.dim(0, d - k)
        }
    };
    let du = d as u64;
    let mut factors = BTreeMap::new();
    for order in divisors(du) {
        let ks: Vec<usize> = (1..=d)
            .filter(|&k| du / du.gcd(&(k as u64)) == order)
            .collect();
        let values: Vec<(usize, usize)> = ks.iter().map(|&k| (k, mult(k))).collect();
        let common = values[0].1;
        if values.iter().any(|(_, v)| *v != common) {
            return Err(GaloisViolation { order, values });
        }
        if common > 0 {
            factors.insert(order, common as u64);
        }
    }
    Ok(CyclotomicPoly { factors })
}

#[derive(Debug)]
pub enum EulerSolveError {
    WrongMissingCount(usize),
    NegativeExponent { order: u64, value: i64 },
}

impl fmt::Display for EulerSolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EulerSolveError::WrongMissingCount(c) => {
                write!(f, "exactly one polynomial must be missing, found {}", c)
            }
            EulerSolveError::NegativeExponent { order, value } => write!(
                f,
                "inconsistent inputs: solved exponent of Phi_{} is {}",
                order, value
            ),
        }
    }
}

impl std::error::Error for EulerSolveError {}

/// Solve the alternating product identity
/// `Delta^0 (Delta^1)^-1 ... (Delta^n)^(+-1) = (t^d - 1)^chi`
/// for the single missing polynomial, exponent-wise over each cyclotomic
/// order. `(t^d - 1)` contributes one `Phi_m` per divisor m of d.
pub fn euler_solve(
    deltas: &[Option<CyclotomicPoly>],
    chi: i64,
    d: usize,
) -> Result<CyclotomicPoly, EulerSolveError> {
    let missing: Vec<usize> = deltas
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_none())
        .map(|(j, _)| j)
        .collect();
    if missing.len() != 1 {
        return Err(EulerSolveError::WrongMissingCount(missing.len()));
    }
    let j0 = missing[0];
    let sign = |j: usize| -> i64 { if j.is_multiple_of(2) { 1 } else { -1 } };
    let mut orders: Vec<u64> = divisors(d as u64);
    for delta in deltas.iter().flatten() {
        for &o in delta.factors.keys() {
            if !orders.contains(&o) {
                orders.push(o);
            }
        }
    }
    orders.sort_unstable();
    let mut factors = BTreeMap::new();
    for &m in &orders {
        let rhs = if (d as u64).is_multiple_of(m) { chi } else { 0 };
        let mut known = 0i64;
        for (j, delta) in deltas.iter().enumerate() {
            if let Some(delta) = delta {
                known += sign(j) * delta.exponent(m) as i64;
            }
        }
        let value = sign(j0) * (rhs - known);
        if value < 0 {
            return Err(EulerSolveError::NegativeExponent { order: m, value });
        }
        if value > 0 {
            factors.insert(m, value as u64);
        }
    }
    Ok(CyclotomicPoly { factors })
}

/// Status of the top-computability check for one eigenvalue class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertStatus {
    Certified(CertSource),
    Conjectural,
    /// The page sum strictly exceeds the known eigenspace dimension, so the
    /// page cannot be the limit page on this column.
    StrictInequality { page_sum: usize, known: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertSource {
    NonresonantInput,
    ExternalBetti,
    Smooth,
    InequalityMet,
}

impl fmt::Display for CertSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertSource::NonresonantInput => write!(f, "nonresonant-input"),
            CertSource::ExternalBetti => write!(f, "external-betti"),
            CertSource::Smooth => write!(f, "smooth"),
            CertSource::InequalityMet => write!(f, "inequality-met"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopComputabilityCert {
    pub k: usize,
    pub m: usize,
    pub status: CertStatus,
    pub detail: String,
}

/// Externally supplied topological data.
#[derive(Debug, Clone, Default)]
pub struct ExternalData {
    /// Top Betti number of the Milnor fiber.
    pub bn: Option<usize>,
    /// Known eigenspace dimensions per class k.
    pub eigen: Option<BTreeMap<usize, usize>>,
    /// Classes declared non-resonant by lattice combinatorics.
    pub nonresonant: Vec<usize>,
    /// Euler characteristic of the complement.
    pub chi: Option<i64>,
    /// The input is certified smooth.
    pub smooth: bool,
}

#[derive(Debug)]
pub struct ExternalExceedsPage {
    pub k: Option<usize>,
    pub page_sum: usize,
    pub external: usize,
}

impl fmt::Display for ExternalExceedsPage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "external dimension {} exceeds the page sum {}{} (impossible: the page bounds it from above)",
            self.external,
            self.page_sum,
            self.k.map(|k| format!(" at k={}", k)).unwrap_or_default()
        )
    }
}

impl std::error::Error for ExternalExceedsPage {}

/// Compare the page sums against external data and tag each eigenvalue
/// class: equality certifies the page as the limit page on that column,
/// strict inequality refutes it, no data leaves it conjectural.
pub fn topcomputability_check(
    page: &E2Page,
    external: &ExternalData,
) -> Result<Vec<TopComputabilityCert>, ExternalExceedsPage> {
    let d = page.d;
    let n = page.n;
    let m_claim = match page.mode {
        Mode::General => n,
        _ => 1,
    };
    let mut certs = Vec::new();
    if page.mode == Mode::General {
        if let Some(bn) = external.bn {
            let total: usize = (1..=d).map(|k| eigen_dims(page, k)).sum();
            if total < bn {
                return Err(ExternalExceedsPage {
                    k: None,
                    page_sum: total,
                    external: bn,
                });
            }
            let status = if total == bn {
                CertStatus::Certified(CertSource::ExternalBetti)
            } else {
                CertStatus::StrictInequality {
                    page_sum: total,
                    known: bn,
                }
            };
            for k in 1..=d {
                certs.push(TopComputabilityCert {
                    k,
                    m: m_claim,
                    status: status.clone(),
                    detail: format!("page sum {} vs external top Betti number {}", total, bn),
                });
            }
            return Ok(certs);
        }
        if let Some(eigen) = &external.eigen {
            for k in 1..=d {
                let sum = eigen_dims(page, k);
                match eigen.get(&k) {
                    Some(&known) if known > sum => {
                        return Err(ExternalExceedsPage {
                            k: Some(k),
                            page_sum: sum,
                            external: known,
                        });
                    }
                    Some(&known) if known == sum => certs.push(TopComputabilityCert {
                        k,
                        m: m_claim,
                        status: CertStatus::Certified(CertSource::InequalityMet),
                        detail: format!("page sum equals the known dimension {}", known),
                    }),
                    Some(&known) => certs.push(TopComputabilityCert {
                        k,
                        m: m_claim,
                        status: CertStatus::StrictInequality {
                            page_sum: sum,
                            known,
                        },
                        detail: "page sum strictly exceeds the known dimension".into(),
                    }),
                    None => certs.push(TopComputabilityCert {
                        k,
                        m: m_claim,
                        status: CertStatus::Conjectural,
                        detail: "no external data for this class".into(),
                    }),
                }
            }
            return Ok(certs);
        }
    }
    if external.smooth {
        for k in 1..=d {
            certs.push(TopComputabilityCert {
                k,
                m: n,
                status: CertStatus::Certified(CertSource::Smooth),
                detail: "smooth hypersurface".into(),
            });
        }
        return Ok(certs);
    }
    for k in 1..=d {
        if external.nonresonant.contains(&k) {
            if let Some(chi) = external.chi {
                let sum = eigen_dims(page, k);
                let target = chi.unsigned_abs() as usize;
                if target > sum {
                    return Err(ExternalExceedsPage {
                        k: Some(k),
                        page_sum: sum,
                        external: target,
                    });
                }
                let status = if sum == target {
                    CertStatus::Certified(CertSource::NonresonantInput)
                } else {
                    CertStatus::StrictInequality {
                        page_sum: sum,
                        known: target,
                    }
                };
                certs.push(TopComputabilityCert {
                    k,
                    m: m_claim,
                    status,
                    detail: format!(
                        "non-resonant class: page sum {} vs |chi| = {}",
                        sum, target
                    ),
                });
                continue;
            }
        }
        certs.push(TopComputabilityCert {
            k,
            m: m_claim,
            status: CertStatus::Conjectural,
            detail: "no external data; page sums are upper bounds".into(),
        });
    }
    Ok(certs)
}

/// Coefficient of `t^a` in `((1 - t^{d-1}) / (1 - t))^{n+1}`, the page
/// dimension pattern of a smooth hypersurface. The coefficient is nonzero
/// for `1 <= a <= (n+1)(d-2)` and at `a = 0`.
pub fn smooth_mu(n: usize, d: usize, a: i64) -> usize {
    if a < 0 {
        return 0;
    }
    let mut coeffs = vec![1u128];
    let block = vec![1u128; d - 1]; // 1 + t + ... + t^{d-2}
    for _ in 0..=n {
        let mut next = vec![0u128; coeffs.len() + block.len() - 1];
        for (i, &c) in coeffs.iter().enumerate() {
            for (j, &b) in block.iter().enumerate() {
                next[i + j] += c * b;
            }
        }
        coeffs = next;
    }
    coeffs.get(a as usize).copied().unwrap_or(0) as usize
}

/// Mismatch list for the palindrome test of a spectrum: entries at Q and
/// 2d - Q must agree for every Q except d itself.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub mismatches: Vec<(usize, usize, usize, usize)>,
}

pub fn symmetry_report(spectrum: &PoleSpectrum) -> SymmetryReport {
    let d = spectrum.d;
    let at = |q: i64| -> usize {
        if q < 0 {
            0
        } else {
            spectrum.entries.get(&(q as usize)).copied().unwrap_or(0)
        }
    };
    let mut mismatches = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &q in spectrum.entries.keys() {
        if q == d {
            continue;
        }
        let mirror = 2 * d as i64 - q as i64;
        let key = (q.min(mirror.max(0) as usize), q.max(mirror.max(0) as usize));
        if !seen.insert(key) {
            continue;
        }
        let a = at(q as i64);
        let b = at(mirror);
        if a != b {
            mismatches.push((q, mirror.max(0) as usize, a, b));
        }
    }
    SymmetryReport {
        symmetric: mismatches.is_empty(),
        mismatches,
    }
}

/// Overall confidence of a page, folded with the constancy certificate.
pub fn page_confidence(page: &E2Page) -> Confidence {
    page.confidence()
}
