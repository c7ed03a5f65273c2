//! Lowest eigenpairs of `K u = lambda B u` by Lanczos on `K^{-1} B` in the
//! `B` inner product, with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{SkylineCholesky, SparseSymForm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative residual `||K u - lambda B u|| / (lambda ||B u||)`.
    pub tol: f64,
    pub seed: u64,
    /// Cap on the Krylov dimension.
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            seed: 7,
            max_steps: 500,
        }
    }
}

/// Raw generalized eigenpair, `B`-normalized.
#[derive(Debug, Clone)]
pub struct RawEigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn relative_residual(k: &SparseSymForm, b: &SparseSymForm, lambda: f64, u: &[f64]) -> f64 {
    let ku = k.apply(u);
    let bu = b.apply(u);
    let r: Vec<f64> = ku.iter().zip(&bu).map(|(x, y)| x - lambda * y).collect();
    norm(&r) / (lambda.abs() * norm(&bu))
}

/// The `count` smallest eigenpairs of `K u = lambda B u`, ascending.
///
/// `K` and `B` must be symmetric positive definite. Eigenvectors are
/// `B`-normalized with their largest-magnitude entry positive.
pub fn lowest_eigenpairs(
    k: &SparseSymForm,
    b: &SparseSymForm,
    count: usize,
    opts: &SolverOptions,
) -> Result<Vec<RawEigenpair>> {
    let n = k.dim();
    if count == 0 {
        return Err(Error::Precondition("eigencount must be at least 1".into()));
    }
    if count > n {
        return Err(Error::Precondition(format!(
            "requested {count} eigenpairs from a problem of dimension {n}"
        )));
    }
    let chol = SkylineCholesky::factor(k)?;
    let max_steps = opts.max_steps.min(n).max(count);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut bq = b.apply(&q);
    let beta0 = dot(&q, &bq).sqrt();
    q.iter_mut().for_each(|v| *v /= beta0);
    bq.iter_mut().for_each(|v| *v /= beta0);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut b_basis: Vec<Vec<f64>> = vec![bq];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let first_check = (2 * count + 20).min(max_steps);
    let mut next_check = first_check;

    loop {
        let j = basis.len() - 1;
        let mut w = chol.solve(&b_basis[j]);
        let a = dot(&w, &b_basis[j]);
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * qi;
        }
        if j > 0 {
            let bprev = beta[j - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= bprev * qi;
            }
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for (qi, bqi) in basis.iter().zip(&b_basis) {
                let c = dot(&w, bqi);
                for (wv, qv) in w.iter_mut().zip(qi) {
                    *wv -= c * qv;
                }
            }
        }
        let bw = b.apply(&w);
        let bnorm = dot(&w, &bw).max(0.0).sqrt();
        let steps = alpha.len();
        let exhausted = bnorm <= 1e-14 * a.abs().max(f64::MIN_POSITIVE) || steps >= max_steps;

        if steps >= next_check || exhausted {
            let pairs = ritz_pairs(&alpha, &beta, &basis[..steps], count.min(steps));
            let mut out = Vec::with_capacity(pairs.len());
            let mut worst = 0.0f64;
            for mut y in pairs {
                let by = b.apply(&y);
                let ky = k.apply(&y);
                let lambda = dot(&y, &ky) / dot(&y, &by);
                let r: Vec<f64> = ky.iter().zip(&by).map(|(x, z)| x - lambda * z).collect();
                let residual = norm(&r) / (lambda.abs() * norm(&by));
                worst = worst.max(residual);
                let scale = dot(&y, &by).sqrt();
                let pivot = y
                    .iter()
                    .copied()
                    .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
                let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
                y.iter_mut().for_each(|v| *v *= sign / scale);
                out.push(RawEigenpair {
                    lambda,
                    vector: y,
                    residual,
                });
            }
            if out.len() == count && worst <= opts.tol {
                out.sort_by(|p, q| p.lambda.total_cmp(&q.lambda));
                return Ok(out);
            }
            if exhausted {
                return Err(Error::NotConverged {
                    steps,
                    residual: worst,
                });
            }
            next_check = steps + 10;
        }

        beta.push(bnorm);
        w.iter_mut().for_each(|v| *v /= bnorm);
        basis.push(w);
        b_basis.push(bw.into_iter().map(|v| v / bnorm).collect());
    }
}

/// Ritz vectors for the `count` largest eigenvalues of the tridiagonal
/// matrix, i.e. the smallest `lambda = 1 / theta`.
fn ritz_pairs(alpha: &[f64], beta: &[f64], basis: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let n = basis[0].len();
    idx.into_iter()
        .take(count)
        .map(|c| {
            let mut y = vec![0.0; n];
            for (i, qi) in basis.iter().enumerate() {
                let s = eig.eigenvectors[(i, c)];
                for (yv, qv) in y.iter_mut().zip(qi) {
                    *yv += s * qv;
                }
            }
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Dirichlet Laplacian (K) and lumped identity-like mass (B).
    fn chain(n: usize) -> (SparseSymForm, SparseSymForm) {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.push(i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut k = SparseSymForm::with_pattern(rows.clone());
        let mut b = SparseSymForm::with_pattern(rows);
        for i in 0..n {
            k.add(i, i, 2.0);
            b.add(i, i, 1.0);
            if i + 1 < n {
                k.add(i, i + 1, -1.0);
                k.add(i + 1, i, -1.0);
            }
        }
        (k, b)
    }

    #[test]
    fn matches_closed_form_chain_spectrum() {
        let n = 200;
        let (k, b) = chain(n);
        let pairs = lowest_eigenpairs(&k, &b, 6, &SolverOptions::default()).unwrap();
        for (j, p) in pairs.iter().enumerate() {
            let t = (j + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64);
            let exact = 4.0 * t.sin().powi(2);
            assert!((p.lambda - exact).abs() / exact < 1e-11, "mode {j}");
            assert!(p.residual <= 1e-10);
            assert!((b.bilinear(&p.vector, &p.vector) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (k, b) = chain(80);
        let opts = SolverOptions::default();
        let p = lowest_eigenpairs(&k, &b, 3, &opts).unwrap();
        let q = lowest_eigenpairs(&k, &b, 3, &opts).unwrap();
        for (x, y) in p.iter().zip(&q) {
            assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
            assert_eq!(x.vector, y.vector);
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        let (k, b) = chain(10);
        assert!(lowest_eigenpairs(&k, &b, 0, &SolverOptions::default()).is_err());
    }
}
