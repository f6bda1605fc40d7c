//! Exact elimination over Z and Q with sparse rows.
//!
//! Rank uses fraction-free row combinations with content stripping, pivoting
//! on the sparsest column. Kernels use a rational Gauss-Jordan pass with the
//! canonical leftmost pivot structure, so the basis is the reduced one with a
//! unit at each free column.

use crate::poly::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

type IntRow = Vec<(u32, BigInt)>;

/// Rank of an integer matrix given as sparse rows (sorted by column).
pub fn rank_fraction_free(mut rows: Vec<IntRow>, cols: usize) -> usize {
    rows.retain(|r| !r.is_empty());
    let mut rank = 0;
    while !rows.is_empty() {
        // pick the sparsest nonempty column, lowest index on ties
        let mut counts = vec![0u32; cols];
        for r in &rows {
            for (c, _) in r {
                counts[*c as usize] += 1;
            }
        }
        let pivot_col = match (0..cols)
            .filter(|&c| counts[c] > 0)
            .min_by_key(|&c| (counts[c], c))
        {
            Some(c) => c as u32,
            None => break,
        };
        // sparsest row containing the pivot column, lowest position on ties
        let pivot_idx = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.iter().any(|(c, _)| *c == pivot_col))
            .min_by_key(|(i, r)| (r.len(), *i))
            .map(|(i, _)| i)
            .unwrap();
        let pivot_row = rows.swap_remove(pivot_idx);
        let pivot_val = pivot_row
            .iter()
            .find(|(c, _)| *c == pivot_col)
            .unwrap()
            .1
            .clone();
        for row in rows.iter_mut() {
            let coef = match row.iter().find(|(c, _)| *c == pivot_col) {
                Some((_, v)) => v.clone(),
                None => continue,
            };
            // row := pivot_val * row - coef * pivot_row, then strip content
            let mut combined = combine(row, &pivot_val, &pivot_row, &coef);
            strip_content(&mut combined);
            *row = combined;
        }
        rows.retain(|r| !r.is_empty());
        rank += 1;
    }
    rank
}

fn combine(row: &IntRow, a: &BigInt, other: &IntRow, b: &BigInt) -> IntRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let mut i = 0;
    let mut j = 0;
    while i < row.len() || j < other.len() {
        let next = match (row.get(i), other.get(j)) {
            (Some((c1, v1)), Some((c2, v2))) => {
                if c1 < c2 {
                    i += 1;
                    (*c1, a * v1)
                } else if c2 < c1 {
                    j += 1;
                    (*c2, -(b * v2))
                } else {
                    let v = a * v1 - b * v2;
                    i += 1;
                    j += 1;
                    (*c1, v)
                }
            }
            (Some((c1, v1)), None) => {
                i += 1;
                (*c1, a * v1)
            }
            (None, Some((c2, v2))) => {
                j += 1;
                (*c2, -(b * v2))
            }
            (None, None) => unreachable!(),
        };
        if !next.1.is_zero() {
            out.push(next);
        }
    }
    out
}

fn strip_content(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g > BigInt::one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

type RatRow = Vec<(u32, Rational)>;

/// Reduced row echelon form over Q with leftmost pivots; returns the pivot
/// columns and mutates the rows into the reduced basis of the row space.
pub fn rref_rational(rows: &mut Vec<RatRow>, cols: usize) -> Vec<usize> {
    rows.retain(|r| !r.is_empty());
    let mut pivots: Vec<usize> = Vec::new();
    let mut pivot_rows: Vec<RatRow> = Vec::new();
    for c in 0..cols as u32 {
        // pick the sparsest remaining row with a leading entry at c
        let cand = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.first().map(|(cc, _)| *cc == c).unwrap_or(false))
            .min_by_key(|(i, r)| (r.len(), *i))
            .map(|(i, _)| i);
        let Some(idx) = cand else { continue };
        let mut prow = rows.swap_remove(idx);
        let lead = prow[0].1.clone();
        for (_, v) in prow.iter_mut() {
            *v /= lead.clone();
        }
        for row in rows.iter_mut() {
            eliminate(row, c, &prow);
        }
        for row in pivot_rows.iter_mut() {
            eliminate(row, c, &prow);
        }
        rows.retain(|r| !r.is_empty());
        pivots.push(c as usize);
        pivot_rows.push(prow);
    }
    *rows = pivot_rows;
    pivots
}

fn eliminate(row: &mut RatRow, c: u32, prow: &RatRow) {
    let coef = match row.iter().find(|(cc, _)| *cc == c) {
        Some((_, v)) => v.clone(),
        None => return,
    };
    let mut out = Vec::with_capacity(row.len() + prow.len());
    let mut i = 0;
    let mut j = 0;
    while i < row.len() || j < prow.len() {
        match (row.get(i), prow.get(j)) {
            (Some((c1, v1)), Some((c2, v2))) => {
                if c1 < c2 {
                    out.push((*c1, v1.clone()));
                    i += 1;
                } else if c2 < c1 {
                    out.push((*c2, -(&coef * v2)));
                    j += 1;
                } else {
                    let v = v1 - &coef * v2;
                    if !v.is_zero() {
                        out.push((*c1, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some((c1, v1)), None) => {
                out.push((*c1, v1.clone()));
                i += 1;
            }
            (None, Some((c2, v2))) => {
                out.push((*c2, -(&coef * v2)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    *row = out;
}

/// Kernel basis over Q from sparse rows; one reduced vector per free column.
pub fn kernel_rational(mut rows: Vec<RatRow>, cols: usize) -> Vec<Vec<Rational>> {
    let pivots = rref_rational(&mut rows, cols);
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut out = Vec::new();
    for f in 0..cols {
        if is_pivot[f] {
            continue;
        }
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (r, &c) in pivots.iter().enumerate() {
            if let Some((_, val)) = rows[r].iter().find(|(cc, _)| *cc as usize == f) {
                v[c] = -val.clone();
            }
        }
        out.push(v);
    }
    out
}
