//! Lowest eigenpair of a symmetric operator given only its action.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::RngExt;

use crate::error::{Error, Result};
use crate::rng;
use crate::tn::linalg::{dot, norm};

/// Ritz pairs are accepted once `‖Hv − λv‖ ≤ RESIDUAL_TOL · max(1, |λ|)`.
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_RESTARTS: usize = 4;
const MAX_RETRIES: usize = 3;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit norm.
    pub vector: Vec<f64>,
    pub matvecs: usize,
}

/// Restarted Lanczos with full reorthogonalization. Each cycle builds at
/// most `krylov_dim` basis vectors and restarts from the current Ritz
/// vector. A zero or non-finite start vector, or a non-finite result, is
/// retried from a perturbed start a bounded number of times.
pub fn lowest_eigenpair<F>(mut apply: F, start: &[f64], krylov_dim: usize) -> Result<Eigenpair>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = start.len();
    if dim == 0 || krylov_dim == 0 {
        return Err(Error::InvalidArgument(
            "Lanczos needs a non-empty space and at least one iteration".into(),
        ));
    }
    let mut v0 = start.to_vec();
    let mut perturb_rng = rng::seeded(dim as u64 ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..=MAX_RETRIES {
        let nrm = norm(&v0);
        if !(nrm.is_finite() && nrm > 1e-300) {
            v0 = (0..dim).map(|_| perturb_rng.random::<f64>() - 0.5).collect();
            continue;
        }
        v0.iter_mut().for_each(|x| *x /= nrm);
        if let Some(pair) = restarted(&mut apply, v0.clone(), krylov_dim) {
            return Ok(pair);
        }
        for x in v0.iter_mut() {
            *x = if x.is_finite() { *x } else { 0.0 } + 1e-3 * (perturb_rng.random::<f64>() - 0.5);
        }
    }
    Err(Error::Numeric(format!(
        "Lanczos failed after {MAX_RETRIES} perturbed restarts (dimension {dim})"
    )))
}

fn restarted<F>(apply: &mut F, mut v: Vec<f64>, krylov_dim: usize) -> Option<Eigenpair>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut matvecs = 0;
    let mut best: Option<Eigenpair> = None;
    for _ in 0..MAX_RESTARTS {
        let (pair, residual, used) = cycle(apply, &v, krylov_dim)?;
        matvecs += used;
        let done = residual <= RESIDUAL_TOL * pair.value.abs().max(1.0);
        v = pair.vector.clone();
        best = Some(Eigenpair { matvecs, ..pair });
        if done {
            break;
        }
    }
    best
}

/// One Krylov cycle from the unit vector `v`. Returns the Ritz pair, its
/// residual norm and the matvec count; `None` on non-finite arithmetic.
fn cycle<F>(apply: &mut F, v: &[f64], krylov_dim: usize) -> Option<(Eigenpair, f64, usize)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = v.len();
    let steps = krylov_dim.min(dim);
    let mut basis: Vec<Vec<f64>> = vec![v.to_vec()];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; dim];
    let mut matvecs = 0;
    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        matvecs += 1;
        let a = dot(&basis[j], &w);
        if !a.is_finite() {
            return None;
        }
        alpha.push(a);
        if alpha.len() == steps {
            break;
        }
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        if !b.is_finite() {
            return None;
        }
        if b <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }

    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let y = eig.eigenvectors.column(idx);
    let mut vector = vec![0.0; dim];
    for (q, c) in basis.iter().zip(y.iter()) {
        vector.iter_mut().zip(q).for_each(|(x, qv)| *x += c * qv);
    }
    let nrm = norm(&vector);
    if !(nrm.is_finite() && nrm > 0.0) || !value.is_finite() {
        return None;
    }
    vector.iter_mut().for_each(|x| *x /= nrm);
    // Exact residual costs one extra matvec but keeps the test honest.
    apply(&vector, &mut w);
    matvecs += 1;
    let residual = w
        .iter()
        .zip(&vector)
        .map(|(hv, x)| (hv - value * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Some((
        Eigenpair {
            value,
            vector,
            matvecs,
        },
        residual,
        matvecs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(m: &DMatrix<f64>) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            let n = x.len();
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = (0..n).map(|j| m[(i, j)] * x[j]).sum();
            }
        }
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut r = rng::seeded(3);
        for n in [1usize, 2, 5, 30, 80] {
            let a = DMatrix::from_fn(n, n, |_, _| r.random::<f64>() - 0.5);
            let m = &a + a.transpose();
            let want = m.clone().symmetric_eigen().eigenvalues.min();
            let start: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let pair = lowest_eigenpair(dense_apply(&m), &start, 40).unwrap();
            assert!((pair.value - want).abs() < 1e-8, "n={n}");
            let mut hv = vec![0.0; n];
            dense_apply(&m)(&pair.vector, &mut hv);
            for (h, v) in hv.iter().zip(&pair.vector) {
                assert!((h - pair.value * v).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_start_is_perturbed() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let pair = lowest_eigenpair(dense_apply(&m), &[0.0; 3], 10).unwrap();
        assert!((pair.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nan_start_is_perturbed() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5]));
        let pair = lowest_eigenpair(dense_apply(&m), &[f64::NAN, 1.0], 10).unwrap();
        assert!((pair.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn persistent_nan_is_an_error() {
        let err = lowest_eigenpair(|_, y: &mut [f64]| y.fill(f64::NAN), &[1.0, 0.0], 5);
        assert!(matches!(err, Err(Error::Numeric(_))));
    }

    #[test]
    fn never_above_start_rayleigh_quotient() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, -2.0, -2.0, 1.0]));
        let start = [0.5, 0.5, 0.5, 0.5];
        let pair = lowest_eigenpair(dense_apply(&m), &start, 2).unwrap();
        assert!(pair.value <= -0.25 + 1e-12);
    }
}
