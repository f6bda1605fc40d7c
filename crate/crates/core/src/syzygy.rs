//! Degreewise computation of the module AR(f) of Jacobian relations,
//! extraction of a minimal generating set, freeness testing via Saito's
//! determinant criterion, and free-arrangement combinatorics.

use crate::forms::{poly_to_column, FormKind, FormSliceBasis};
use crate::linalg::{kernel_basis, rank_with, Arith, LinalgError, SparseMat};
use crate::poly::{partials, Poly, Rational, SliceBasis};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// One relation `sum_i r_i f_i = 0` with homogeneous components of a common
/// degree.
#[derive(Debug, Clone)]
pub struct SyzygyGen {
    pub vec: Vec<Poly>,
    pub degree: usize,
}

/// Minimal generating set of AR(f) up to a degree bound, degrees
/// nondecreasing. When Saito's criterion certifies freeness mid-scan the
/// scan stops there: a free basis generates everything above it.
#[derive(Debug, Clone)]
pub struct SyzygyGens {
    pub gens: Vec<SyzygyGen>,
    pub scanned_to: usize,
    pub freeness_stop: Option<FreenessReport>,
}

impl SyzygyGens {
    pub fn degrees(&self) -> Vec<usize> {
        self.gens.iter().map(|g| g.degree).collect()
    }
}

/// Outcome of Saito's criterion.
#[derive(Debug, Clone)]
pub struct FreenessReport {
    pub is_free: bool,
    /// Exponents d_1 <= ... <= d_n when free.
    pub exponents: Vec<usize>,
    /// The constant c with det = c * f when free.
    pub determinant_scale: Option<Rational>,
    pub note: String,
}

/// Matrix of the map `S_q^{n+1} -> S_{q+d-1}`, `(r_i) -> sum r_i f_i`,
/// with columns indexed component-major by the n-form slice of graded
/// degree q+n.
pub fn jacobian_relation_matrix(grads: &[Poly], d: usize, q: usize) -> (SparseMat, FormSliceBasis) {
    let n = grads.len() - 1;
    let col_basis = FormSliceBasis::new(FormKind::NForm, q + n, n);
    let row_basis = SliceBasis::new((q + d - 1) as i64, n + 1);
    let mut columns = Vec::with_capacity(col_basis.len());
    for g in grads {
        for m in &col_basis.component_slice.monomials {
            let p = g.mul_term(m, &Rational::one());
            columns.push(poly_to_column(&p, &row_basis));
        }
    }
    (SparseMat::from_columns(row_basis.len(), columns), col_basis)
}

/// Basis of the degree-q slice AR(f)_q, as vectors of n+1 polynomials.
pub fn ar_slice(f: &Poly, q: usize, arith: &Arith) -> Result<Vec<Vec<Poly>>, LinalgError> {
    let grads = partials(f);
    let d = f.homogeneous_degree().expect("f must be homogeneous");
    let (mat, col_basis) = jacobian_relation_matrix(&grads, d, q);
    let kernel = kernel_basis(&mat, &arith.derive(q as u64 + 1))?;
    Ok(kernel
        .into_iter()
        .map(|v| vector_to_polys(&v, &col_basis))
        .collect())
}

fn vector_to_polys(v: &[Rational], basis: &FormSliceBasis) -> Vec<Poly> {
    let per = basis.component_slice.len();
    let nvars = basis.nvars;
    (0..basis.components)
        .map(|i| {
            Poly::from_terms(
                nvars,
                basis.component_slice.monomials.iter().enumerate().filter_map(|(j, m)| {
                    let c = &v[i * per + j];
                    if c.is_zero() {
                        None
                    } else {
                        Some((m.clone(), c.clone()))
                    }
                }),
            )
        })
        .collect()
}

/// Scale a rational vector to a primitive integer vector with positive
/// leading entry.
fn normalize_primitive(v: &mut [Rational]) {
    let mut lcm = BigInt::one();
    for c in v.iter() {
        if !c.is_zero() {
            lcm = lcm.lcm(c.denom());
        }
    }
    let mut gcd = BigInt::zero();
    let scaled: Vec<BigInt> = v
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    for s in &scaled {
        gcd = gcd.gcd(s);
    }
    if gcd.is_zero() {
        return;
    }
    let sign = scaled
        .iter()
        .find(|s| !s.is_zero())
        .map(|s| if s.is_negative() { -1 } else { 1 })
        .unwrap_or(1);
    let gcd = gcd * BigInt::from(sign);
    for (c, s) in v.iter_mut().zip(scaled) {
        *c = Rational::from_integer(s / &gcd);
    }
}

/// Columns spanning the degree-q piece of the submodule generated by `gens`,
/// in the component-major coordinates of the n-form slice of graded degree
/// q+n.
fn old_span_columns(
    gens: &[SyzygyGen],
    q: usize,
    col_basis: &FormSliceBasis,
) -> Vec<Vec<(u32, Rational)>> {
    let mut columns = Vec::new();
    for g in gens {
        if g.degree > q {
            continue;
        }
        let mult = SliceBasis::new((q - g.degree) as i64, col_basis.nvars);
        for m in &mult.monomials {
            let mut col = Vec::new();
            for (i, comp) in g.vec.iter().enumerate() {
                for (mm, c) in comp.terms() {
                    col.push((col_basis.position(i, &mm.mul(m)), c.clone()));
                }
            }
            col.sort_by_key(|(r, _)| *r);
            columns.push(col);
        }
    }
    columns
}

/// Minimal generators of AR(f) found degree by degree up to `degree_bound`.
///
/// At each degree q the number of new generators is
/// `dim AR(f)_q - dim (span of lower-degree generators in degree q)`;
/// representatives are kernel vectors completing the pivot set of that span.
pub fn minimal_generators(
    f: &Poly,
    degree_bound: usize,
    arith: &Arith,
) -> Result<SyzygyGens, LinalgError> {
    let grads = partials(f);
    let d = f.homogeneous_degree().expect("f must be homogeneous");
    let n = f.nvars() - 1;
    let mut gens: Vec<SyzygyGen> = Vec::new();
    let mut freeness_stop = None;
    let mut scanned_to = 0;
    for q in 0..=degree_bound {
        scanned_to = q;
        let (mat, col_basis) = jacobian_relation_matrix(&grads, d, q);
        let rank = rank_with(&mat, &arith.derive(0x51_000 + q as u64))?.rank;
        let nullity = mat.cols() - rank;
        let old = old_span_columns(&gens, q, &col_basis);
        let old_count = old.len();
        let old_rank = if old.is_empty() {
            0
        } else {
            rank_with(
                &SparseMat::from_columns(col_basis.len(), old.clone()),
                &arith.derive(0x01d_000 + q as u64),
            )?
            .rank
        };
        if nullity > old_rank {
            // exact pass: kernel vectors that enlarge the span become the
            // new generators at this degree
            let kernel = kernel_basis(&mat, &arith.derive(0x004e_0000 + q as u64))?;
            let mut columns = old;
            for v in &kernel {
                let mut col: Vec<(u32, Rational)> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (i as u32, c.clone()))
                    .collect();
                col.sort_by_key(|(r, _)| *r);
                columns.push(col);
            }
            let combined = SparseMat::from_columns(col_basis.len(), columns);
            let mut rows = combined.to_rows();
            let pivots = crate::linalg::rref_rational(&mut rows, combined.cols());
            for &c in pivots.iter().filter(|&&c| c >= old_count) {
                let mut v = kernel[c - old_count].clone();
                normalize_primitive(&mut v);
                let polys = vector_to_polys(&v, &col_basis);
                debug_assert!(verify_syzygy(&grads, &polys));
                gens.push(SyzygyGen {
                    vec: polys,
                    degree: q,
                });
            }
        }
        if gens.len() == n && gens.iter().map(|g| g.degree).sum::<usize>() == d.saturating_sub(1) {
            let report = saito_check(f, &gens);
            if report.is_free {
                freeness_stop = Some(report);
                break;
            }
        }
    }
    Ok(SyzygyGens {
        gens,
        scanned_to,
        freeness_stop,
    })
}

/// Exact check that `sum r_i f_i = 0`.
pub fn verify_syzygy(grads: &[Poly], r: &[Poly]) -> bool {
    let mut acc = Poly::zero(grads.len());
    for (c, g) in r.iter().zip(grads) {
        acc = acc.add(&c.mul(g));
    }
    acc.is_zero()
}

/// Saito's criterion: n relations are a free basis of AR(f) iff the
/// (n+1)-square matrix with first row x_0..x_n and the relations below has
/// determinant a nonzero constant multiple of f.
pub fn saito_check(f: &Poly, gens: &[SyzygyGen]) -> FreenessReport {
    let nvars = f.nvars();
    let n = nvars - 1;
    if gens.len() != n {
        return FreenessReport {
            is_free: false,
            exponents: vec![],
            determinant_scale: None,
            note: format!("not free by count: {} generators, need {}", gens.len(), n),
        };
    }
    let mut matrix: Vec<Vec<Poly>> = Vec::with_capacity(nvars);
    matrix.push((0..nvars).map(|i| Poly::variable(nvars, i)).collect());
    for g in gens {
        matrix.push(g.vec.clone());
    }
    let det = poly_det(&matrix);
    if det.is_zero() {
        return FreenessReport {
            is_free: false,
            exponents: vec![],
            determinant_scale: None,
            note: "determinant vanishes".into(),
        };
    }
    // det must equal c * f exactly
    let (m0, c0) = f.terms().next().expect("f nonzero");
    let scale = det.coeff(m0) / c0;
    if !scale.is_zero() && det == f.scale(&scale) {
        let mut exponents = gens.iter().map(|g| g.degree).collect::<Vec<_>>();
        exponents.sort_unstable();
        let d = f.homogeneous_degree().unwrap();
        assert_eq!(exponents.iter().sum::<usize>(), d - 1);
        FreenessReport {
            is_free: true,
            exponents,
            determinant_scale: Some(scale),
            note: "saito determinant is a constant multiple of f".into(),
        }
    } else {
        FreenessReport {
            is_free: false,
            exponents: vec![],
            determinant_scale: None,
            note: "determinant is not a constant multiple of f".into(),
        }
    }
}

/// Determinant of a square polynomial matrix by cofactor expansion along the
/// first row; sizes here are at most 5x5.
fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let k = m.len();
    let nvars = m[0][0].nvars();
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(nvars);
    for j in 0..k {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cof = m[0][j].mul(&poly_det(&minor));
        acc = if j % 2 == 0 { acc.add(&cof) } else { acc.sub(&cof) };
    }
    acc
}

/// Coefficients of prod (1 + d_j t) and its value at t = -1, the Euler
/// characteristic of the complement of a free arrangement.
pub fn poincare_free(exponents: &[usize]) -> (Vec<i64>, i64) {
    let mut coeffs = vec![1i64];
    for &e in exponents {
        let mut next = vec![0i64; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * e as i64;
        }
        coeffs = next;
    }
    let chi = exponents.iter().map(|&e| 1 - e as i64).product();
    (coeffs, chi)
}

/// Smoothness certificate via the Jacobian ring: the quotient by the ideal
/// of partials is generated in degree one, so a single vanishing slice kills
/// everything above it, and for a smooth hypersurface the first vanishing
/// slice sits right above degree (n+1)(d-2). Confidence follows the rank
/// backend used.
pub fn smooth_certificate(f: &Poly, arith: &Arith) -> Result<bool, LinalgError> {
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().expect("f must be homogeneous");
    if d == 1 {
        return Ok(true);
    }
    let m = (n + 1) * (d - 2) + 1;
    let q = m + 1 - d;
    let grads = partials(f);
    let (mat, _) = jacobian_relation_matrix(&grads, d, q);
    let rank = rank_with(&mat, &arith.derive(0x500_0000 + m as u64))?.rank;
    Ok(rank == mat.rows())
}

/// The Koszul relations between a pair of partials, degree d-1 each.
pub fn koszul_syzygies(grads: &[Poly]) -> Vec<Vec<Poly>> {
    let nvars = grads.len();
    let mut out = Vec::new();
    for i in 0..nvars {
        for j in i + 1..nvars {
            let mut v = vec![Poly::zero(nvars); nvars];
            v[i] = grads[j].clone();
            v[j] = grads[i].neg();
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn vars4() -> Vec<String> {
        ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect()
    }

    fn modular(seed: u64) -> Arith {
        Arith::Modular { primes: 2, seed }
    }

    #[test]
    fn smooth_surface_has_no_low_degree_relations() {
        let f = parse_poly("x^4+y^4+z^4+w^4", &vars4()).unwrap();
        for q in 0..3 {
            assert!(ar_slice(&f, q, &modular(3)).unwrap().is_empty(), "q={}", q);
        }
    }

    #[test]
    fn smooth_quartic_generators_are_the_koszul_relations() {
        let f = parse_poly("x^4+y^4+z^4+w^4", &vars4()).unwrap();
        let gens = minimal_generators(&f, 3, &modular(5)).unwrap();
        assert_eq!(gens.degrees(), vec![3, 3, 3, 3, 3, 3]);
        let grads = partials(&f);
        for g in &gens.gens {
            assert!(verify_syzygy(&grads, &g.vec));
        }
    }

    #[test]
    fn nonfree_arrangement_generator_degrees() {
        let f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars4()).unwrap();
        let q2 = ar_slice(&f, 2, &modular(7)).unwrap();
        assert_eq!(q2.len(), 2);
        let gens = minimal_generators(&f, 5, &modular(7)).unwrap();
        assert_eq!(gens.degrees(), vec![2, 2, 3, 3, 3, 3]);
        assert!(gens.freeness_stop.is_none());
        let report = saito_check(&f, &gens.gens);
        assert!(!report.is_free);
        assert!(report.note.contains("not free by count"));
    }

    #[test]
    fn degree_two_relation_gives_a_graded_degree_five_form() {
        let f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars4()).unwrap();
        let r = &ar_slice(&f, 2, &modular(41)).unwrap()[0];
        let eta = crate::forms::omega_of(r, 2).unwrap();
        assert_eq!(eta.graded_degree, 5);
        assert!(crate::forms::wedge_df(&f, &eta).coeff.is_zero());
    }

    #[test]
    fn braid_arrangement_is_free_with_exponents_2_3_4() {
        let f = parse_poly(
            "x*y*z*w*(x-y)*(x-z)*(x-w)*(y-z)*(y-w)*(z-w)",
            &vars4(),
        )
        .unwrap();
        assert_eq!(ar_slice(&f, 2, &modular(11)).unwrap().len(), 1);
        let gens = minimal_generators(&f, 16, &modular(11)).unwrap();
        assert_eq!(gens.degrees(), vec![2, 3, 4]);
        let free = gens.freeness_stop.expect("saito stop");
        assert!(free.is_free);
        assert_eq!(free.exponents, vec![2, 3, 4]);
        // the scan stopped early at the saito certificate
        assert_eq!(gens.scanned_to, 4);
    }

    #[test]
    fn discriminant_surface_is_free_with_exponents_1_1_1() {
        let f = parse_poly(
            "y^2*z^2-4*x*z^3-4*y^3*w+18*x*y*z*w-27*x^2*w^2",
            &vars4(),
        )
        .unwrap();
        let gens = minimal_generators(&f, 1, &modular(13)).unwrap();
        assert_eq!(gens.degrees(), vec![1, 1, 1]);
        let report = gens.freeness_stop.expect("free");
        assert!(report.is_free);
        assert_eq!(report.exponents, vec![1, 1, 1]);
        assert!(!report.determinant_scale.unwrap().is_zero());
    }

    #[test]
    fn koszul_relations_lie_in_generated_module() {
        let f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars4()).unwrap();
        let d = f.homogeneous_degree().unwrap();
        let gens = minimal_generators(&f, d - 1, &modular(17)).unwrap();
        let grads = partials(&f);
        let col_basis = FormSliceBasis::new(FormKind::NForm, (d - 1) + 3, 3);
        let old = old_span_columns(&gens.gens, d - 1, &col_basis);
        let old_count = old.len();
        let mut columns = old;
        for k in koszul_syzygies(&grads) {
            let mut col = Vec::new();
            for (i, comp) in k.iter().enumerate() {
                for (m, c) in comp.terms() {
                    col.push((col_basis.position(i, m), c.clone()));
                }
            }
            col.sort_by_key(|(r, _)| *r);
            columns.push(col);
        }
        let with = SparseMat::from_columns(col_basis.len(), columns.clone());
        columns.truncate(old_count);
        let without = SparseMat::from_columns(col_basis.len(), columns);
        assert_eq!(
            crate::linalg::rank_exact(&with).rank,
            crate::linalg::rank_exact(&without).rank
        );
    }

    #[test]
    fn generator_degrees_agree_across_backends() {
        let f = parse_poly(
            "y^2*z^2-4*x*z^3-4*y^3*w+18*x*y*z*w-27*x^2*w^2",
            &vars4(),
        )
        .unwrap();
        let m = minimal_generators(&f, 3, &modular(19)).unwrap();
        let e = minimal_generators(&f, 3, &Arith::Exact).unwrap();
        assert_eq!(m.degrees(), e.degrees());
    }

    #[test]
    fn smoothness_certificate() {
        let smooth = parse_poly("x^4+y^4+z^4+w^4", &vars4()).unwrap();
        assert!(smooth_certificate(&smooth, &modular(29)).unwrap());
        let singular = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", &vars4()).unwrap();
        assert!(!smooth_certificate(&singular, &modular(29)).unwrap());
        let cubic = parse_poly(
            "x^3+y^3+z^3",
            &["x".into(), "y".into(), "z".into()],
        )
        .unwrap();
        assert!(smooth_certificate(&cubic, &Arith::Exact).unwrap());
    }

    #[test]
    fn poincare_polynomial_and_euler_characteristic() {
        assert_eq!(poincare_free(&[2, 3, 4]), (vec![1, 9, 26, 24], -6));
        assert_eq!(poincare_free(&[3, 3, 5]).1, -16);
        assert_eq!(poincare_free(&[4, 6, 7]).1, -90);
        assert_eq!(poincare_free(&[1, 3, 7]).1, 0);
    }

    #[test]
    fn saito_determinant_degree_matches() {
        let f = parse_poly(
            "y^2*z^2-4*x*z^3-4*y^3*w+18*x*y*z*w-27*x^2*w^2",
            &vars4(),
        )
        .unwrap();
        let gens = minimal_generators(&f, 1, &modular(23)).unwrap();
        let report = saito_check(&f, &gens.gens);
        assert!(report.is_free);
        // 1 + sum d_j = deg f
        assert_eq!(1 + report.exponents.iter().sum::<usize>(), 4);
    }
}
