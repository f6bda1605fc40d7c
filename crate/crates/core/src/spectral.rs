//! Assembly of the graded linear maps whose ranks give the second page of
//! the pole-order spectral sequence, with two independent backends:
//!
//! * the syzygy backend streams columns `d(A * omega(r))` over a minimal
//!   generating set of AR(f) together with the Koszul columns `B * f_i`;
//! * the direct backend computes kernel dimensions of wedging with df on
//!   two consecutive slices and combines them.
//!
//! Both produce the same rank `R_Q`, and `dim E2 = C(Q-1, n) - R_Q`.

use crate::forms::{poly_to_column, FormKind, FormSliceBasis};
use crate::linalg::{rank_with, Arith, Confidence, LinalgError, RankReport, SparseMat};
use crate::poly::{binomial, partials, slice_dim, Poly, Rational, SliceBasis};
use crate::syzygy::SyzygyGens;
use num_traits::One;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

type CellResults = Result<Vec<((usize, usize), Cell)>, SpectralError>;

/// Which part of the page is computed and how far Q runs.
///
/// Arrangement and free locally quasi-homogeneous inputs only need the two
/// bottom rows q = 0, 1; a general hypersurface needs all q = 0..n. Curve
/// mode (n = 2) computes the subdiagonal dimensions that determine the
/// first Alexander polynomial of a plane curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Arrangement,
    FreeLqh,
    General,
    Curve,
}

impl Mode {
    pub fn q_values(&self, n: usize) -> Vec<usize> {
        match self {
            Mode::Arrangement | Mode::FreeLqh => vec![0, 1],
            Mode::General => (0..=n).collect(),
            Mode::Curve => vec![0],
        }
    }

    pub fn q_max(&self, n: usize, d: usize) -> usize {
        match self {
            Mode::Arrangement => 2 * d - 1,
            Mode::FreeLqh => 2 * d,
            Mode::General => (n + 1) * d,
            Mode::Curve => d,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Arrangement => "arrangement",
            Mode::FreeLqh => "free_lqh",
            Mode::General => "general",
            Mode::Curve => "curve",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Syzygy,
    Direct,
    Both,
}

/// One computed page entry.
#[derive(Debug, Clone)]
pub struct Cell {
    pub dim: usize,
    pub confidence: Confidence,
    /// True for the arrangement-mode (q, k) = (1, d) entry, which is zero
    /// because the weight filtration already exhausts the eigenvalue-one
    /// part in pole order n.
    pub set_by_theory: bool,
    pub millis: u128,
}

/// Dimensions `dim E2^{n-q, q}(f)_k` indexed by (q, k); `Q = q*d + k`.
#[derive(Debug, Clone)]
pub struct E2Page {
    pub n: usize,
    pub d: usize,
    pub mode: Mode,
    pub cells: BTreeMap<(usize, usize), Cell>,
}

impl E2Page {
    pub fn dim(&self, q: usize, k: usize) -> usize {
        self.cells.get(&(q, k)).map(|c| c.dim).unwrap_or(0)
    }

    /// Weakest confidence among computed cells.
    pub fn confidence(&self) -> Confidence {
        self.cells
            .values()
            .map(|c| c.confidence)
            .min()
            .unwrap_or(Confidence::Certified)
    }
}

#[derive(Debug)]
pub enum SpectralError {
    Linalg(LinalgError),
    BackendMismatch {
        q: usize,
        k: usize,
        syzygy: usize,
        direct: usize,
    },
    NegativeDim {
        q: usize,
        k: usize,
        codim: usize,
        rank: usize,
    },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::Linalg(e) => write!(f, "linear algebra failure: {}", e),
            SpectralError::BackendMismatch { q, k, syzygy, direct } => write!(
                f,
                "backends disagree at (q={}, k={}): syzygy rank {}, direct rank {}",
                q, k, syzygy, direct
            ),
            SpectralError::NegativeDim { q, k, codim, rank } => write!(
                f,
                "negative dimension at (q={}, k={}): codomain {}, rank {}",
                q, k, codim, rank
            ),
        }
    }
}

impl std::error::Error for SpectralError {}

impl From<LinalgError> for SpectralError {
    fn from(e: LinalgError) -> Self {
        SpectralError::Linalg(e)
    }
}

/// Matrix of the map `phi_Q` built from a generating set of AR(f): one
/// column `div(A * r)` per generator and multiplier monomial, then the
/// Koszul columns `B * f_i`. Rows are the monomials of degree Q - n - 1.
pub fn phi_syzygy_matrix(
    f: &Poly,
    grads: &[Poly],
    gens: &SyzygyGens,
    q_total: usize,
) -> SparseMat {
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().expect("f homogeneous");
    let row_deg = q_total as i64 - n as i64 - 1;
    if row_deg < 0 {
        return SparseMat::zero(0, 0);
    }
    let rows = SliceBasis::new(row_deg, n + 1);
    let mut columns = Vec::new();
    for g in &gens.gens {
        let mult_deg = q_total as i64 - g.degree as i64 - n as i64;
        if mult_deg < 0 {
            continue;
        }
        let mult = SliceBasis::new(mult_deg, n + 1);
        for a in &mult.monomials {
            let mut div = Poly::zero(n + 1);
            for (i, comp) in g.vec.iter().enumerate() {
                if !comp.is_zero() {
                    div = div.add(&comp.mul_term(a, &Rational::one()).derivative(i));
                }
            }
            columns.push(poly_to_column(&div, &rows));
        }
    }
    let kos_deg = q_total as i64 - d as i64 - n as i64;
    if kos_deg >= 0 {
        let mult = SliceBasis::new(kos_deg, n + 1);
        for g in grads {
            for b in &mult.monomials {
                columns.push(poly_to_column(&g.mul_term(b, &Rational::one()), &rows));
            }
        }
    }
    SparseMat::from_columns(rows.len(), columns)
}

/// Matrix of wedging with df from the n-form slice of graded degree
/// `q_total - d` to the top-form slice of graded degree `q_total`.
pub fn phi1_matrix(grads: &[Poly], q_total: usize, d: usize) -> SparseMat {
    let n = grads.len() - 1;
    let dom_deg = q_total as i64 - d as i64 - n as i64;
    let row_deg = q_total as i64 - n as i64 - 1;
    if dom_deg < 0 || row_deg < 0 {
        let cols = (n + 1) * slice_dim(dom_deg, n);
        return SparseMat::zero(slice_dim(row_deg, n), cols);
    }
    let rows = SliceBasis::new(row_deg, n + 1);
    let mult = SliceBasis::new(dom_deg, n + 1);
    let mut columns = Vec::with_capacity((n + 1) * mult.len());
    for g in grads {
        for a in &mult.monomials {
            columns.push(poly_to_column(&g.mul_term(a, &Rational::one()), &rows));
        }
    }
    SparseMat::from_columns(rows.len(), columns)
}

/// Matrix of the paired map `(eta1, eta2) -> (df^eta1 + d(eta2), df^eta2)`
/// on the n-form slices of graded degrees `q_total - d` and `q_total`.
pub fn phi2_matrix(grads: &[Poly], q_total: usize, d: usize) -> SparseMat {
    let n = grads.len() - 1;
    let rows1 = SliceBasis::new(q_total as i64 - n as i64 - 1, n + 1);
    let rows2 = SliceBasis::new((q_total + d) as i64 - n as i64 - 1, n + 1);
    let t1 = rows1.len();
    let dom1 = FormSliceBasis::new(FormKind::NForm, q_total.saturating_sub(d), n);
    let dom1_empty = q_total < d + n;
    let mut columns = Vec::new();
    if !dom1_empty {
        for g in grads {
            for a in &dom1.component_slice.monomials {
                let col = poly_to_column(&g.mul_term(a, &Rational::one()), &rows1);
                columns.push(col);
            }
        }
    }
    let dom2 = SliceBasis::new(q_total as i64 - n as i64, n + 1);
    for (i, g) in grads.iter().enumerate() {
        for a in &dom2.monomials {
            let mut col = Vec::new();
            // divergence part lands in the first row block
            let da = Poly::from_terms(n + 1, [(a.clone(), Rational::one())]).derivative(i);
            if !da.is_zero() && rows1.degree >= 0 {
                col.extend(poly_to_column(&da, &rows1));
            }
            // wedge part lands in the second row block
            for (r, v) in poly_to_column(&g.mul_term(a, &Rational::one()), &rows2) {
                col.push((r + t1 as u32, v));
            }
            col.sort_by_key(|(r, _)| *r);
            columns.push(col);
        }
    }
    SparseMat::from_columns(t1 + rows2.len(), columns)
}

fn dump_matrix(dir: &Option<PathBuf>, name: &str, m: &SparseMat) {
    if let Some(dir) = dir {
        let _ = std::fs::create_dir_all(dir);
        if let Ok(file) = std::fs::File::create(dir.join(name)) {
            let mut w = std::io::BufWriter::new(file);
            let _ = m.dump(&mut w);
        }
    }
}

/// Rank `R_Q` from the generator-based map.
pub fn rank_syzygy_backend(
    f: &Poly,
    grads: &[Poly],
    gens: &SyzygyGens,
    q_total: usize,
    arith: &Arith,
    dump: &Option<PathBuf>,
) -> Result<RankReport, LinalgError> {
    let m = phi_syzygy_matrix(f, grads, gens, q_total);
    dump_matrix(dump, &format!("phi_syzygy_Q{}.txt", q_total), &m);
    rank_with(&m, &arith.derive(0x5752_0000 + q_total as u64))
}

/// Rank `R_Q` from kernel dimensions of the two direct maps:
/// `R_Q = kappa1(Q+d) - kappa2(Q) + dim(n-form slice at Q-d)`.
pub fn rank_direct_backend(
    f: &Poly,
    grads: &[Poly],
    q_total: usize,
    arith: &Arith,
    dump: &Option<PathBuf>,
) -> Result<RankReport, LinalgError> {
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().expect("f homogeneous");
    let m1 = phi1_matrix(grads, q_total + d, d);
    dump_matrix(dump, &format!("phi1_Q{}.txt", q_total + d), &m1);
    let r1 = rank_with(&m1, &arith.derive(0xd1_0000 + q_total as u64))?;
    let kappa1 = m1.cols() - r1.rank;
    let m2 = phi2_matrix(grads, q_total, d);
    dump_matrix(dump, &format!("phi2_Q{}.txt", q_total), &m2);
    let r2 = rank_with(&m2, &arith.derive(0xd2_0000 + q_total as u64))?;
    let kappa2 = m2.cols() - r2.rank;
    let dom = (n + 1) * slice_dim(q_total as i64 - d as i64 - n as i64, n);
    let rank = kappa1 + dom - kappa2;
    Ok(RankReport {
        rank,
        method: r2.method,
        confidence: r1.confidence.min(r2.confidence),
    })
}

/// Dimension of the kernel of the direct wedge map whose codomain has
/// graded degree `q_total` (zero for `q_total < d + n`).
pub fn kappa1(grads: &[Poly], q_total: usize, d: usize, arith: &Arith) -> Result<usize, LinalgError> {
    let m = phi1_matrix(grads, q_total, d);
    let r = rank_with(&m, &arith.derive(0x4b1_0000 + q_total as u64))?;
    Ok(m.cols() - r.rank)
}

/// Dimension of the kernel of the paired direct map at graded degree
/// `q_total`.
pub fn kappa2(grads: &[Poly], q_total: usize, d: usize, arith: &Arith) -> Result<usize, LinalgError> {
    let m = phi2_matrix(grads, q_total, d);
    let r = rank_with(&m, &arith.derive(0x4b2_0000 + q_total as u64))?;
    Ok(m.cols() - r.rank)
}

/// Page computation configuration.
#[derive(Debug, Clone)]
pub struct PageConfig {
    pub mode: Mode,
    pub backend: Backend,
    pub arith: Arith,
    pub dump_dir: Option<PathBuf>,
    pub progress: bool,
    /// Optional cap on Q, clamped to the mode's own range.
    pub qmax: Option<usize>,
}

impl PageConfig {
    pub fn new(mode: Mode, backend: Backend, arith: Arith) -> Self {
        PageConfig {
            mode,
            backend,
            arith,
            dump_dir: None,
            progress: false,
            qmax: None,
        }
    }
}

/// Degree bound the generator scan must reach for a given page: only
/// generators of degree at most Q - n ever contribute columns.
pub fn generator_degree_bound(mode: Mode, n: usize, d: usize, qmax: Option<usize>) -> usize {
    let q_max = qmax
        .unwrap_or_else(|| mode.q_max(n, d))
        .min(mode.q_max(n, d));
    q_max.saturating_sub(n)
}

/// Compute every cell of the page for the selected mode.
///
/// Cells are independent and run in parallel in increasing-Q order. With
/// `Backend::Both` each cell asserts exact agreement of the two ranks.
pub fn compute_page(
    f: &Poly,
    gens: Option<&SyzygyGens>,
    cfg: &PageConfig,
) -> Result<E2Page, SpectralError> {
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().expect("f homogeneous");
    if cfg.mode == Mode::Curve {
        return compute_curve_page(f, cfg);
    }
    let grads = partials(f);
    let q_max = cfg
        .qmax
        .unwrap_or_else(|| cfg.mode.q_max(n, d))
        .min(cfg.mode.q_max(n, d));
    let needs_gens = cfg.backend != Backend::Direct;
    let own_gens;
    let gens = if needs_gens {
        match gens {
            Some(g) => Some(g),
            None => {
                own_gens = crate::syzygy::minimal_generators(
                    f,
                    generator_degree_bound(cfg.mode, n, d, cfg.qmax),
                    &cfg.arith,
                )?;
                Some(&own_gens)
            }
        }
    } else {
        None
    };
    let mut tasks: Vec<(usize, usize, usize)> = Vec::new();
    for q in cfg.mode.q_values(n) {
        for k in 1..=d {
            let q_total = q * d + k;
            if q_total > q_max {
                continue;
            }
            if cfg.mode == Mode::Arrangement && q == 1 && k == d {
                continue;
            }
            tasks.push((q_total, q, k));
        }
    }
    tasks.sort_unstable();
    let results: CellResults = tasks
        .par_iter()
        .map(|&(q_total, q, k)| {
            let start = Instant::now();
            let codim = if q_total > n {
                binomial(q_total - 1, n)
            } else {
                0
            };
            let report = match cfg.backend {
                Backend::Syzygy => rank_syzygy_backend(
                    f,
                    &grads,
                    gens.unwrap(),
                    q_total,
                    &cfg.arith,
                    &cfg.dump_dir,
                )?,
                Backend::Direct => {
                    rank_direct_backend(f, &grads, q_total, &cfg.arith, &cfg.dump_dir)?
                }
                Backend::Both => {
                    let s = rank_syzygy_backend(
                        f,
                        &grads,
                        gens.unwrap(),
                        q_total,
                        &cfg.arith,
                        &cfg.dump_dir,
                    )?;
                    let dd = rank_direct_backend(f, &grads, q_total, &cfg.arith, &cfg.dump_dir)?;
                    if s.rank != dd.rank {
                        return Err(SpectralError::BackendMismatch {
                            q,
                            k,
                            syzygy: s.rank,
                            direct: dd.rank,
                        });
                    }
                    RankReport {
                        rank: s.rank,
                        method: s.method,
                        confidence: s.confidence.min(dd.confidence),
                    }
                }
            };
            if report.rank > codim {
                return Err(SpectralError::NegativeDim {
                    q,
                    k,
                    codim,
                    rank: report.rank,
                });
            }
            let dim = codim - report.rank;
            let millis = start.elapsed().as_millis();
            if cfg.progress {
                let mut err = std::io::stderr().lock();
                let _ = writeln!(
                    err,
                    "Q={} q={} k={} dim={} ms={}",
                    q_total, q, k, dim, millis
                );
            }
            Ok((
                (q, k),
                Cell {
                    dim,
                    confidence: report.confidence,
                    set_by_theory: false,
                    millis,
                },
            ))
        })
        .collect();
    let mut cells: BTreeMap<(usize, usize), Cell> = results?.into_iter().collect();
    if cfg.mode == Mode::Arrangement {
        cells.insert(
            (1, d),
            Cell {
                dim: 0,
                confidence: Confidence::Certified,
                set_by_theory: true,
                millis: 0,
            },
        );
    }
    Ok(E2Page {
        n,
        d,
        mode: cfg.mode,
        cells,
    })
}

/// Page of subdiagonal dimensions for a reduced plane curve (n = 2): the
/// cell (0, k) holds the dimension that enters the first Alexander
/// polynomial. The Koszul cohomology below the relation level vanishes for
/// reduced curves, so the dimension is `kappa2(k) - kappa1(k)`.
fn compute_curve_page(f: &Poly, cfg: &PageConfig) -> Result<E2Page, SpectralError> {
    let n = f.nvars() - 1;
    assert_eq!(n, 2, "curve mode requires a plane curve in three variables");
    let d = f.homogeneous_degree().expect("f homogeneous");
    let grads = partials(f);
    let tasks: Vec<usize> = (1..=d).collect();
    let results: CellResults = tasks
        .par_iter()
        .map(|&k| {
            let start = Instant::now();
            let k1 = kappa1(&grads, k, d, &cfg.arith)?;
            let k2 = kappa2(&grads, k, d, &cfg.arith)?;
            assert!(k2 >= k1, "kernel containment violated at k={}", k);
            let millis = start.elapsed().as_millis();
            if cfg.progress {
                let mut err = std::io::stderr().lock();
                let _ = writeln!(err, "Q={} q=0 k={} dim={} ms={}", k, k, k2 - k1, millis);
            }
            let confidence = match cfg.arith {
                Arith::Exact => Confidence::Certified,
                Arith::Modular { .. } => Confidence::Probabilistic,
            };
            Ok((
                (0usize, k),
                Cell {
                    dim: k2 - k1,
                    confidence,
                    set_by_theory: false,
                    millis,
                },
            ))
        })
        .collect();
    Ok(E2Page {
        n,
        d,
        mode: Mode::Curve,
        cells: results?.into_iter().collect(),
    })
}

/// `dim E2^{n-q, q}(f)_k = C(Q-1, n) - R_Q` for a single cell.
pub fn e2_dim(
    f: &Poly,
    gens: &SyzygyGens,
    q: usize,
    k: usize,
    arith: &Arith,
) -> Result<usize, SpectralError> {
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().expect("f homogeneous");
    let q_total = q * d + k;
    let grads = partials(f);
    let codim = if q_total > n {
        binomial(q_total - 1, n)
    } else {
        0
    };
    let report = rank_syzygy_backend(f, &grads, gens, q_total, arith, &None)?;
    if report.rank > codim {
        return Err(SpectralError::NegativeDim {
            q,
            k,
            codim,
            rank: report.rank,
        });
    }
    Ok(codim - report.rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::syzygy::minimal_generators;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn modular(seed: u64) -> Arith {
        Arith::Modular { primes: 2, seed }
    }

    #[test]
    fn smooth_cubic_curve_page_matches_mu_pattern() {
        let f = parse_poly("x^3+y^3+z^3", &vars(&["x", "y", "z"])).unwrap();
        let cfg = PageConfig::new(Mode::General, Backend::Both, modular(1));
        let page = compute_page(&f, None, &cfg).unwrap();
        // coefficients of (1+t)^3 at a = Q - 3
        let mu = [1usize, 3, 3, 1];
        for q in 0..=2usize {
            for k in 1..=3usize {
                let q_total = 3 * q + k;
                let expect = if (3..=6).contains(&q_total) {
                    mu[q_total - 3]
                } else {
                    0
                };
                assert_eq!(page.dim(q, k), expect, "cell ({}, {})", q, k);
            }
        }
    }

    #[test]
    fn empty_codomain_gives_zero_rank_and_dim() {
        let f = parse_poly("x^3+y^3+z^3", &vars(&["x", "y", "z"])).unwrap();
        let gens = minimal_generators(&f, 2, &modular(2)).unwrap();
        // Q = n: the codomain slice is empty
        assert_eq!(e2_dim(&f, &gens, 0, 2, &modular(2)).unwrap(), 0);
    }

    #[test]
    fn discriminant_surface_page_is_zero_off_one_cell() {
        let f = parse_poly(
            "y^2*z^2-4*x*z^3-4*y^3*w+18*x*y*z*w-27*x^2*w^2",
            &vars(&["x", "y", "z", "w"]),
        )
        .unwrap();
        let cfg = PageConfig::new(Mode::FreeLqh, Backend::Syzygy, modular(3));
        let page = compute_page(&f, None, &cfg).unwrap();
        for ((q, k), cell) in &page.cells {
            let expect = if (*q, *k) == (0, 4) { 1 } else { 0 };
            assert_eq!(cell.dim, expect, "cell ({}, {})", q, k);
        }
    }

    #[test]
    fn nonfree_arrangement_spectrum_coefficients() {
        let f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars(&["x", "y", "z", "w"])).unwrap();
        let cfg = PageConfig::new(Mode::Arrangement, Backend::Syzygy, modular(4));
        let page = compute_page(&f, None, &cfg).unwrap();
        let expect: &[(usize, usize)] = &[
            (4, 1),
            (5, 2),
            (6, 8),
            (7, 2),
            (8, 2),
            (9, 2),
            (10, 1),
        ];
        for q in 0..=1usize {
            for k in 1..=6usize {
                let q_total = 6 * q + k;
                let want = expect
                    .iter()
                    .find(|(qq, _)| *qq == q_total)
                    .map(|(_, v)| *v)
                    .unwrap_or(0);
                if q_total <= 11 || (q, k) == (1, 6) {
                    assert_eq!(page.dim(q, k), want, "Q={}", q_total);
                }
            }
        }
        assert!(page.cells[&(1, 6)].set_by_theory);
    }

    #[test]
    fn backends_agree_on_the_nonfree_arrangement() {
        let f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars(&["x", "y", "z", "w"])).unwrap();
        let cfg = PageConfig::new(Mode::Arrangement, Backend::Both, modular(5));
        let page = compute_page(&f, None, &cfg).unwrap();
        assert_eq!(page.dim(0, 6), 8);
    }

    #[test]
    fn quartic_surface_rank_example() {
        // C(7,3) - R_8 = 1 for the non-free quartic at Q = 8
        let f = parse_poly(
            "x^3*z+x^2*y^2+y^3*w+y^2*w^2",
            &vars(&["x", "y", "z", "w"]),
        )
        .unwrap();
        let gens = minimal_generators(&f, 13, &modular(6)).unwrap();
        assert_eq!(e2_dim(&f, &gens, 1, 4, &modular(6)).unwrap(), 1);
    }

    #[test]
    fn curve_page_of_three_concurrent_lines() {
        let f = parse_poly("x*y*(x+y)", &vars(&["x", "y", "z"])).unwrap();
        let cfg = PageConfig::new(Mode::Curve, Backend::Direct, modular(7));
        let page = compute_page(&f, None, &cfg).unwrap();
        assert_eq!(page.dim(0, 1), 0);
        assert_eq!(page.dim(0, 2), 1);
        assert_eq!(page.dim(0, 3), 2);
    }

    #[test]
    fn curve_page_of_smooth_cubic_vanishes() {
        let f = parse_poly("x^3+y^3+z^3", &vars(&["x", "y", "z"])).unwrap();
        let cfg = PageConfig::new(Mode::Curve, Backend::Direct, modular(8));
        let page = compute_page(&f, None, &cfg).unwrap();
        for k in 1..=3 {
            assert_eq!(page.dim(0, k), 0);
        }
    }
}
