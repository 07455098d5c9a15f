//! Exact rational feasibility LP: does `A x = b, x >= 0` have a solution?
//!
//! Phase I of the tableau simplex with one artificial per row. On infeasibility the
//! Farkas certificate is read off the reduced costs of the artificial columns.
//! Entering columns use Dantzig's rule; ties in the ratio test are broken
//! lexicographically on the rows of the basis inverse, which rules out cycling.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::{Error, Result};

/// A sparse column: `(row, value)` pairs.
pub type Column = Vec<(usize, BigRational)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// A non-negative `x` with `A x = b`.
    Feasible(Vec<BigRational>),
    /// A `y` with `y^T A >= 0` column-wise and `y^T b < 0`.
    Infeasible(Vec<BigRational>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpStats {
    pub pivots: usize,
    pub degenerate_pivots: usize,
}

/// Decides feasibility of `A x = b, x >= 0` for `rows x columns.len()` data.
pub fn solve(rows: usize, columns: &[Column], b: &[BigRational]) -> Result<(LpOutcome, LpStats)> {
    if b.len() != rows {
        return Err(Error::ArityMismatch {
            expected: rows,
            found: b.len(),
        });
    }
    let ncols = columns.len();
    let width = ncols + rows;
    let sign: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut t = vec![vec![BigRational::zero(); width]; rows];
    let mut rhs: Vec<BigRational> = b.iter().map(|v| v.abs()).collect();
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col {
            if *r >= rows {
                return Err(Error::invalid(format!("column {c} touches row {r} of {rows}")));
            }
            let v = if sign[*r] { -v.clone() } else { v.clone() };
            t[*r][c] += v;
        }
    }
    for (r, row) in t.iter_mut().enumerate() {
        row[ncols + r] = BigRational::one();
    }
    // Reduced costs of the phase-I objective `sum artificials`.
    let mut obj = vec![BigRational::zero(); width];
    let mut obj_rhs = BigRational::zero();
    for r in 0..rows {
        for c in 0..ncols {
            if !t[r][c].is_zero() {
                obj[c] -= &t[r][c];
            }
        }
        obj_rhs -= &rhs[r];
    }
    let mut basis: Vec<usize> = (ncols..width).collect();
    let mut stats = LpStats::default();

    loop {
        let mut entering: Option<usize> = None;
        for c in 0..width {
            if obj[c].is_negative() && entering.is_none_or(|b| obj[c] < obj[b]) {
                entering = Some(c);
            }
        }
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..rows {
            if !t[r][e].is_positive() {
                continue;
            }
            let ratio = &rhs[r] / &t[r][e];
            let better = match &leave {
                None => true,
                Some((lr, lv)) => match ratio.cmp(lv) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => lex_less(&t, ncols, e, r, *lr),
                },
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // Phase I is bounded below by 0, so a negative reduced cost always has a pivot row.
        let (p, theta) = leave.ok_or_else(|| Error::invalid("phase I became unbounded"))?;
        stats.pivots += 1;
        if theta.is_zero() {
            stats.degenerate_pivots += 1;
        }
        pivot(&mut t, &mut rhs, &mut obj, &mut obj_rhs, p, e);
        basis[p] = e;
    }

    if obj_rhs.is_zero() {
        let mut x = vec![BigRational::zero(); ncols];
        for (r, &c) in basis.iter().enumerate() {
            if c < ncols {
                x[c] = rhs[r].clone();
            }
        }
        Ok((LpOutcome::Feasible(x), stats))
    } else {
        // w_r = 1 - reduced cost of artificial r; undo the row sign flips and negate.
        let y = (0..rows)
            .map(|r| {
                let w = BigRational::one() - &obj[ncols + r];
                if sign[r] {
                    w
                } else {
                    -w
                }
            })
            .collect();
        Ok((LpOutcome::Infeasible(y), stats))
    }
}

/// Lexicographic comparison of rows `a` and `b` of the basis inverse, each scaled by
/// its entry in column `e`.
fn lex_less(t: &[Vec<BigRational>], ncols: usize, e: usize, a: usize, b: usize) -> bool {
    for c in ncols..t[a].len() {
        let va = &t[a][c] / &t[a][e];
        let vb = &t[b][c] / &t[b][e];
        match va.cmp(&vb) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    false
}

fn pivot(
    t: &mut [Vec<BigRational>],
    rhs: &mut [BigRational],
    obj: &mut [BigRational],
    obj_rhs: &mut BigRational,
    p: usize,
    e: usize,
) {
    let inv = t[p][e].recip();
    if !inv.is_one() {
        for v in t[p].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        rhs[p] *= &inv;
    }
    let nz: Vec<(usize, BigRational)> = t[p]
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(c, v)| (c, v.clone()))
        .collect();
    let prhs = rhs[p].clone();
    t.par_iter_mut()
        .zip(rhs.par_iter_mut())
        .enumerate()
        .for_each(|(r, (row, rv))| {
            if r == p || row[e].is_zero() {
                return;
            }
            let f = row[e].clone();
            for (c, v) in &nz {
                row[*c] -= &f * v;
            }
            if !prhs.is_zero() {
                *rv -= &f * &prhs;
            }
        });
    if !obj[e].is_zero() {
        let f = obj[e].clone();
        for (c, v) in &nz {
            obj[*c] -= &f * v;
        }
        *obj_rhs -= &f * &prhs;
    }
}

/// Checks an outcome against the data: `A x = b, x >= 0`, or `y^T A >= 0, y^T b < 0`.
pub fn verify(rows: usize, columns: &[Column], b: &[BigRational], outcome: &LpOutcome) -> bool {
    match outcome {
        LpOutcome::Feasible(x) => {
            if x.len() != columns.len() || x.iter().any(Signed::is_negative) {
                return false;
            }
            let mut lhs = vec![BigRational::zero(); rows];
            for (col, xv) in columns.iter().zip(x) {
                if xv.is_zero() {
                    continue;
                }
                for (r, v) in col {
                    lhs[*r] += v * xv;
                }
            }
            lhs.as_slice() == b
        }
        LpOutcome::Infeasible(y) => {
            let yb: BigRational = y.iter().zip(b).map(|(a, c)| a * c).sum();
            yb.is_negative()
                && columns.iter().all(|col| {
                    let s: BigRational = col.iter().map(|(r, v)| &y[*r] * v).sum();
                    !s.is_negative()
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::int;

    fn col(v: &[(usize, i64)]) -> Column {
        v.iter().map(|&(r, c)| (r, int(c))).collect()
    }

    #[test]
    fn feasible_system() {
        // x0 + x1 = 2, x1 - x2 = 1
        let cols = vec![col(&[(0, 1)]), col(&[(0, 1), (1, 1)]), col(&[(1, -1)])];
        let b = vec![int(2), int(1)];
        let (out, _) = solve(2, &cols, &b).unwrap();
        assert!(matches!(out, LpOutcome::Feasible(_)));
        assert!(verify(2, &cols, &b, &out));
    }

    #[test]
    fn infeasible_system() {
        // x0 = -1 with x0 >= 0
        let cols = vec![col(&[(0, 1)])];
        let b = vec![int(-1)];
        let (out, _) = solve(1, &cols, &b).unwrap();
        assert!(matches!(out, LpOutcome::Infeasible(_)));
        assert!(verify(1, &cols, &b, &out));
        // x0 + x1 = 1, x0 + x1 = 2
        let cols = vec![col(&[(0, 1), (1, 1)]), col(&[(0, 1), (1, 1)])];
        let b = vec![int(1), int(2)];
        let (out, _) = solve(2, &cols, &b).unwrap();
        assert!(matches!(out, LpOutcome::Infeasible(_)));
        assert!(verify(2, &cols, &b, &out));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale-style degenerate data; termination plus a verified answer is the point.
        let cols = vec![
            col(&[(0, 1), (1, 2)]),
            col(&[(0, -1), (1, -1), (2, 1)]),
            col(&[(0, 2), (1, 1), (2, -1)]),
            col(&[(0, -2), (2, 1)]),
        ];
        let b = vec![int(0), int(0), int(1)];
        let (out, _) = solve(3, &cols, &b).unwrap();
        assert!(verify(3, &cols, &b, &out));
    }
}
