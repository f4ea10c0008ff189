//! Smallest eigenpairs of `(A + UUᵀ) x = λ B x` for symmetric banded `A`,
//! symmetric positive definite banded `B` and a low-rank penalty `UUᵀ`.
//!
//! Eigenvalues are located by bisection on the Sylvester inertia of
//! `A - σB + UUᵀ`; eigenvectors by shifted inverse iteration with
//! `B`-orthogonal deflation.

use nalgebra::{DMatrix, DVector};

use super::banded::{BandLu, SymBanded};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// `B`-orthonormal.
    pub vectors: Vec<Vec<f64>>,
}

/// The `count` algebraically smallest eigenpairs of `A x = λ B x`.
pub fn smallest_eigenpairs(a: &SymBanded, metric: &SymBanded, count: usize) -> Result<EigenPairs> {
    smallest_eigenpairs_penalized(a, &[], metric, count)
}

/// As [`smallest_eigenpairs`] for `A + Σ u uᵀ` with `u` ranging over `penalty`.
pub fn smallest_eigenpairs_penalized(
    a: &SymBanded,
    penalty: &[Vec<f64>],
    metric: &SymBanded,
    count: usize,
) -> Result<EigenPairs> {
    let values = smallest_eigenvalues_penalized(a, penalty, metric, count)?;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (k, &lam) in values.iter().enumerate() {
        let solver = shifted_solver(a, penalty, metric, lam)?;
        let n = a.n();
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i * (k + 3)) as f64 * 0.618).sin())
            .collect();
        normalize(&mut v, metric, &vectors)?;
        for _ in 0..6 {
            let rhs = metric.matvec(&v);
            let mut x = solver.solve(&rhs);
            normalize(&mut x, metric, &vectors)?;
            let diff = v
                .iter()
                .zip(&x)
                .map(|(p, q)| (p - q).abs().min((p + q).abs()))
                .fold(0.0_f64, f64::max);
            v = x;
            if diff < 1e-13 {
                break;
            }
        }
        normalize(&mut v, metric, &vectors)?;
        vectors.push(v);
    }
    Ok(EigenPairs { values, vectors })
}

/// Eigenvalues only.
pub fn smallest_eigenvalues_penalized(
    a: &SymBanded,
    penalty: &[Vec<f64>],
    metric: &SymBanded,
    count: usize,
) -> Result<Vec<f64>> {
    let n = a.n();
    if metric.n() != n || penalty.iter().any(|u| u.len() != n) {
        return Err(Error::input(
            "operator, metric and penalty dimensions differ",
        ));
    }
    if count == 0 || count > n {
        return Err(Error::input(format!(
            "cannot extract {count} eigenvalues of a {n}-dimensional problem"
        )));
    }
    if metric.inertia().positive != n {
        return Err(Error::Conditioning(
            "metric is not positive definite".into(),
        ));
    }
    let counter = |sigma: f64| count_below(a, penalty, metric, sigma);

    let mut lo = -1.0;
    let mut guard = 0;
    while counter(lo)? > 0 {
        lo = 2.0 * lo - 1.0;
        guard += 1;
        if guard > 1100 {
            return Err(Error::Conditioning("spectrum unbounded below".into()));
        }
    }
    let mut hi = 1.0;
    guard = 0;
    while counter(hi)? < count {
        hi = 2.0 * hi + 1.0;
        guard += 1;
        if guard > 1100 {
            return Err(Error::Conditioning(
                "failed to bracket the requested eigenvalues".into(),
            ));
        }
    }

    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // smallest σ with at least k+1 eigenvalues below it
        let (mut a_, mut b_) = (out.last().copied().unwrap_or(lo), hi);
        if counter(a_)? > k {
            a_ = lo;
        }
        for _ in 0..400 {
            let mid = 0.5 * (a_ + b_);
            if mid <= a_ || mid >= b_ || (b_ - a_) <= 2.0 * f64::EPSILON * a_.abs().max(b_.abs()) {
                break;
            }
            if counter(mid)? > k {
                b_ = mid;
            } else {
                a_ = mid;
            }
        }
        out.push(0.5 * (a_ + b_));
    }
    Ok(out)
}

/// Number of eigenvalues strictly below `sigma`.
pub fn count_below(
    a: &SymBanded,
    penalty: &[Vec<f64>],
    metric: &SymBanded,
    sigma: f64,
) -> Result<usize> {
    let t = a.combine(1.0, metric, -sigma);
    let neg_t = t.inertia().negative;
    if penalty.is_empty() {
        return Ok(neg_t);
    }
    // Haynsworth: neg(T + UUᵀ) = neg(T) - #{nonpositive eigenvalues of I + UᵀT⁻¹U}.
    let lu = t.to_general().lu()?;
    let cap = capacitance(&lu, penalty);
    let eig = nalgebra::SymmetricEigen::new(cap.0);
    let nonpos = eig.eigenvalues.iter().filter(|&&e| e <= 0.0).count();
    neg_t
        .checked_sub(nonpos)
        .ok_or_else(|| Error::Conditioning(format!("inconsistent inertia at σ = {sigma}")))
}

fn capacitance(lu: &BandLu, penalty: &[Vec<f64>]) -> (DMatrix<f64>, Vec<Vec<f64>>) {
    let m = penalty.len();
    let tu: Vec<Vec<f64>> = penalty.iter().map(|u| lu.solve(u)).collect();
    let mut cap = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            cap[(i, j)] += dot(&penalty[i], &tu[j]);
        }
    }
    let sym = (&cap + cap.transpose()) * 0.5;
    (sym, tu)
}

struct ShiftedSolver<'a> {
    lu: BandLu,
    penalty: &'a [Vec<f64>],
    tu: Vec<Vec<f64>>,
    cap_lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl ShiftedSolver<'_> {
    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let mut y = self.lu.solve(r);
        if let Some(cap) = &self.cap_lu {
            let c =
                DVector::from_iterator(self.penalty.len(), self.penalty.iter().map(|u| dot(u, &y)));
            if let Some(z) = cap.solve(&c) {
                for (tu, zi) in self.tu.iter().zip(z.iter()) {
                    for (yi, ti) in y.iter_mut().zip(tu) {
                        *yi -= zi * ti;
                    }
                }
            }
        }
        y
    }
}

fn shifted_solver<'a>(
    a: &SymBanded,
    penalty: &'a [Vec<f64>],
    metric: &SymBanded,
    lam: f64,
) -> Result<ShiftedSolver<'a>> {
    let mut shift = lam;
    let mut last_err = None;
    for attempt in 0..8 {
        let t = a.combine(1.0, metric, -shift);
        match t.to_general().lu() {
            Ok(lu) => {
                let (cap, tu) = if penalty.is_empty() {
                    (DMatrix::zeros(0, 0), Vec::new())
                } else {
                    capacitance(&lu, penalty)
                };
                let cap_lu = (!penalty.is_empty()).then(|| cap.lu());
                return Ok(ShiftedSolver {
                    lu,
                    penalty,
                    tu,
                    cap_lu,
                });
            }
            Err(e) => {
                last_err = Some(e);
                shift = lam + (1e-13 * 10f64.powi(attempt)) * lam.abs().max(1e-8);
            }
        }
    }
    Err(last_err.unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Twice-repeated `B`-orthogonalization against `basis`, then `B`-normalization.
fn normalize(v: &mut [f64], metric: &SymBanded, basis: &[Vec<f64>]) -> Result<()> {
    for _ in 0..2 {
        for q in basis {
            let c = metric.dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    let norm = metric.dot(v, v).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Conditioning(
            "inverse iteration produced a null vector".into(),
        ));
    }
    // Fix the sign so that the largest component is positive.
    let big = v
        .iter()
        .copied()
        .fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = if big < 0.0 { -1.0 / norm } else { 1.0 / norm };
    v.iter_mut().for_each(|x| *x *= s);
    Ok(())
}
