//! Graded slices of polynomial differential n- and (n+1)-forms on C^{n+1},
//! and the two operators everything is assembled from: wedging with df and
//! exterior differentiation.
//!
//! Sign conventions are folded into the component bases, so wedging an
//! n-form with df is literally `sum_i r_i f_i` and exterior differentiation
//! is the divergence `sum_i d(r_i)/dx_i`.

use crate::poly::{partials, slice_dim, Monomial, Poly, Rational, SliceBasis};

/// Polynomial n-form: component `i` is the coefficient of
/// `(-1)^i dx0 ^ ... ^ dx_i-hat ^ ... ^ dxn`. Each `dx_j` contributes 1 to
/// the grading, so a nonzero component is homogeneous of degree
/// `graded_degree - n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NForm {
    pub comps: Vec<Poly>,
    pub graded_degree: usize,
}

/// Polynomial (n+1)-form: coefficient of `dx0 ^ ... ^ dxn`, homogeneous of
/// degree `graded_degree - (n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopForm {
    pub coeff: Poly,
    pub graded_degree: usize,
}

/// Which graded form module a slice basis enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    NForm,
    TopForm,
}

/// Deterministic ordered basis of a graded slice of form components:
/// `(component, monomial)` pairs for n-forms (component-major), monomials
/// for top forms.
#[derive(Debug, Clone)]
pub struct FormSliceBasis {
    pub kind: FormKind,
    pub graded_degree: usize,
    pub nvars: usize,
    /// Basis of the polynomial slice each component lives in.
    pub component_slice: SliceBasis,
    /// Number of components: n+1 for n-forms, 1 for top forms.
    pub components: usize,
}

impl FormSliceBasis {
    pub fn new(kind: FormKind, graded_degree: usize, n: usize) -> Self {
        let nvars = n + 1;
        let (components, comp_degree) = match kind {
            FormKind::NForm => (nvars, graded_degree as i64 - n as i64),
            FormKind::TopForm => (1, graded_degree as i64 - nvars as i64),
        };
        FormSliceBasis {
            kind,
            graded_degree,
            nvars,
            component_slice: SliceBasis::new(comp_degree, nvars),
            components,
        }
    }

    pub fn len(&self) -> usize {
        self.components * self.component_slice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, component: usize, m: &Monomial) -> u32 {
        debug_assert!(component < self.components);
        (component * self.component_slice.len()) as u32 + self.component_slice.position(m)
    }

    pub fn entry(&self, idx: usize) -> (usize, &Monomial) {
        let per = self.component_slice.len();
        (idx / per, &self.component_slice.monomials[idx % per])
    }
}

#[derive(Debug)]
pub struct MixedDegrees;

impl std::fmt::Display for MixedDegrees {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "components of mixed degrees")
    }
}

impl std::error::Error for MixedDegrees {}

/// The n-form attached to a vector of n+1 polynomials of common degree `q`;
/// its graded degree is `q + n`.
pub fn omega_of(r: &[Poly], q: usize) -> Result<NForm, MixedDegrees> {
    let n = r.len() - 1;
    for comp in r {
        if !comp.is_zero() && comp.homogeneous_degree() != Some(q) {
            return Err(MixedDegrees);
        }
    }
    Ok(NForm {
        comps: r.to_vec(),
        graded_degree: q + n,
    })
}

/// df ^ eta as a top form: coefficient `sum_i r_i f_i`, graded degree raised
/// by `deg f`.
pub fn wedge_df(f: &Poly, eta: &NForm) -> TopForm {
    let d = f.homogeneous_degree().expect("f must be nonzero homogeneous");
    let grads = partials(f);
    wedge_with_partials(&grads, eta, d)
}

/// Same as [`wedge_df`] with the partials precomputed.
pub fn wedge_with_partials(grads: &[Poly], eta: &NForm, d: usize) -> TopForm {
    let mut coeff = Poly::zero(grads.len());
    for (r, g) in eta.comps.iter().zip(grads) {
        if !r.is_zero() {
            coeff = coeff.add(&r.mul(g));
        }
    }
    TopForm {
        coeff,
        graded_degree: eta.graded_degree + d,
    }
}

/// Exterior derivative of an n-form: the divergence `sum_i d(r_i)/dx_i`,
/// preserving the graded degree.
pub fn ext_d(eta: &NForm) -> TopForm {
    let nvars = eta.comps.len();
    let mut coeff = Poly::zero(nvars);
    for (i, r) in eta.comps.iter().enumerate() {
        coeff = coeff.add(&r.derivative(i));
    }
    TopForm {
        coeff,
        graded_degree: eta.graded_degree,
    }
}

/// Coefficient vector of a polynomial in a row slice basis.
pub fn poly_to_column(p: &Poly, basis: &SliceBasis) -> Vec<(u32, Rational)> {
    let mut col: Vec<(u32, Rational)> = p
        .terms()
        .map(|(m, c)| (basis.position(m), c.clone()))
        .collect();
    col.sort_by_key(|(r, _)| *r);
    col
}

/// Dimension of the graded slice of n-forms of the given graded degree.
pub fn nform_slice_dim(graded_degree: i64, n: usize) -> usize {
    (n + 1) * slice_dim(graded_degree - n as i64, n)
}

/// Dimension of the graded slice of (n+1)-forms of the given graded degree.
pub fn topform_slice_dim(graded_degree: i64, n: usize) -> usize {
    slice_dim(graded_degree - n as i64 - 1, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, rat};

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn koszul_relation_wedges_to_zero() {
        let v = vars(&["x", "y", "z"]);
        let f = parse_poly("x^3+y^3+z^3", &v).unwrap();
        let g = partials(&f);
        // Koszul syzygy (f1, -f0, 0) of degree d-1
        let r = vec![g[1].clone(), g[0].neg(), Poly::zero(3)];
        let eta = omega_of(&r, 2).unwrap();
        assert_eq!(eta.graded_degree, 4);
        let w = wedge_df(&f, &eta);
        assert!(w.coeff.is_zero());
        assert_eq!(w.graded_degree, 7);
    }

    #[test]
    fn zero_vector_gives_zero_form() {
        let r = vec![Poly::zero(3), Poly::zero(3), Poly::zero(3)];
        let eta = omega_of(&r, 5).unwrap();
        assert!(ext_d(&eta).coeff.is_zero());
    }

    #[test]
    fn mixed_degrees_rejected() {
        let v = vars(&["x", "y", "z"]);
        let r = vec![
            parse_poly("x", &v).unwrap(),
            parse_poly("y^2", &v).unwrap(),
            Poly::zero(3),
        ];
        assert!(omega_of(&r, 1).is_err());
    }

    #[test]
    fn wedge_expansion_example() {
        // eta with components (x1, 0, 0), f = x0^2+x1^2+x2^2 -> 2*x0*x1
        let v = vars(&["x", "y", "z"]);
        let f = parse_poly("x^2+y^2+z^2", &v).unwrap();
        let r = vec![parse_poly("y", &v).unwrap(), Poly::zero(3), Poly::zero(3)];
        let eta = omega_of(&r, 1).unwrap();
        let w = wedge_df(&f, &eta);
        assert_eq!(w.coeff, parse_poly("2*x*y", &v).unwrap());
    }

    #[test]
    fn wedge_is_linear() {
        let v = vars(&["x", "y", "z"]);
        let f = parse_poly("x^3+x*y*z+z^3", &v).unwrap();
        let r1 = vec![
            parse_poly("x^2", &v).unwrap(),
            parse_poly("y^2", &v).unwrap(),
            parse_poly("x*z", &v).unwrap(),
        ];
        let r2 = vec![
            parse_poly("y*z", &v).unwrap(),
            Poly::zero(3),
            parse_poly("z^2-x^2", &v).unwrap(),
        ];
        let (a, b) = (rat(3), rat(-2));
        let comb: Vec<Poly> = (0..3)
            .map(|i| r1[i].scale(&a).add(&r2[i].scale(&b)))
            .collect();
        let lhs = wedge_df(&f, &omega_of(&comb, 2).unwrap()).coeff;
        let rhs = wedge_df(&f, &omega_of(&r1, 2).unwrap())
            .coeff
            .scale(&a)
            .add(&wedge_df(&f, &omega_of(&r2, 2).unwrap()).coeff.scale(&b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn divergence_of_constants_vanishes() {
        let r = vec![
            Poly::constant(3, rat(4)),
            Poly::constant(3, rat(-1)),
            Poly::constant(3, rat(7)),
        ];
        let eta = omega_of(&r, 0).unwrap();
        assert!(ext_d(&eta).coeff.is_zero());
    }

    #[test]
    fn euler_form_scaling() {
        // d(h * omega_n) has coefficient (m + n + 1) * h for h of degree m,
        // where omega_n has components x_i.
        let v = vars(&["x", "y", "z", "w"]);
        let h = parse_poly("x^2*w - y*z*w + z^3", &v).unwrap();
        let m = 3usize;
        let n = 3usize;
        let comps: Vec<Poly> = (0..4).map(|i| h.mul(&Poly::variable(4, i))).collect();
        let eta = omega_of(&comps, m + 1).unwrap();
        let dd = ext_d(&eta);
        assert_eq!(dd.coeff, h.scale(&rat((m + n + 1) as i64)));
    }

    #[test]
    fn leibniz_expansion_for_monomial_multiplier() {
        // d(m * eta) = sum_i d(m r_i)/dx_i expanded symbolically must agree
        // with m * div(r) + sum_i dm/dx_i * r_i.
        let v = vars(&["x", "y", "z"]);
        let r = vec![
            parse_poly("x*y", &v).unwrap(),
            parse_poly("z^2", &v).unwrap(),
            parse_poly("x^2-y^2", &v).unwrap(),
        ];
        let m = parse_poly("x*z^2", &v).unwrap();
        let scaled: Vec<Poly> = r.iter().map(|c| c.mul(&m)).collect();
        let lhs = ext_d(&omega_of(&scaled, 5).unwrap()).coeff;
        let mut rhs = ext_d(&omega_of(&r, 2).unwrap()).coeff.mul(&m);
        for (i, c) in r.iter().enumerate() {
            rhs = rhs.add(&m.derivative(i).mul(c));
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn slice_bases() {
        // top forms of graded degree n are empty, n-forms have n+1 constants
        let b = FormSliceBasis::new(FormKind::TopForm, 3, 3);
        assert!(b.is_empty());
        let b = FormSliceBasis::new(FormKind::NForm, 3, 3);
        assert_eq!(b.len(), 4);
        let b = FormSliceBasis::new(FormKind::TopForm, 12, 3);
        assert_eq!(b.len(), 165);
        assert_eq!(b.len(), topform_slice_dim(12, 3));
        let b = FormSliceBasis::new(FormKind::NForm, 12, 3);
        assert_eq!(b.len(), nform_slice_dim(12, 3));
    }

    #[test]
    fn grading_bookkeeping() {
        let v = vars(&["x", "y", "z"]);
        let f = parse_poly("x^4+y^4+z^4", &v).unwrap();
        let r = vec![
            parse_poly("x^2*y", &v).unwrap(),
            parse_poly("y^3", &v).unwrap(),
            Poly::zero(3),
        ];
        let eta = omega_of(&r, 3).unwrap();
        let n = 2;
        assert_eq!(eta.graded_degree, 3 + n);
        let w = wedge_df(&f, &eta);
        assert_eq!(w.graded_degree, eta.graded_degree + 4);
        assert_eq!(
            w.coeff.homogeneous_degree(),
            Some(w.graded_degree - (n + 1))
        );
        let dd = ext_d(&eta);
        assert_eq!(dd.graded_degree, eta.graded_degree);
        if !dd.coeff.is_zero() {
            assert_eq!(
                dd.coeff.homogeneous_degree(),
                Some(dd.graded_degree - (n + 1))
            );
        }
    }
}
