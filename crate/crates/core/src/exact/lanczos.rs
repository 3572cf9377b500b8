//! Lanczos iteration with full reorthogonalization, explicit restarts and
//! locking of converged eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::SparseOperator;

/// Tuning knobs of the eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Largest Krylov space per cycle; `None` picks by dimension.
    pub krylov: Option<usize>,
    /// Residual tolerance relative to the Gershgorin bound of the operator.
    pub tol: f64,
    pub max_cycles: usize,
    pub seed: u64,
    /// Relative gap below which eigenvalues count as equal.
    pub degeneracy_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov: None,
            tol: 1e-11,
            max_cycles: 400,
            seed: 0x5eed,
            degeneracy_tol: 1e-9,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            axpy(-c, u, v);
        }
    }
}

/// Lowest eigenpairs of a real symmetric sparse operator.
pub struct Lanczos<'a> {
    op: &'a SparseOperator,
    opts: LanczosOptions,
    rng: ChaCha8Rng,
    scale: f64,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    restart: Option<(Vec<f64>, f64)>,
    cycles: usize,
}

impl<'a> Lanczos<'a> {
    pub fn new(op: &'a SparseOperator, opts: LanczosOptions) -> Self {
        Self {
            op,
            opts,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            scale: op.norm_bound().max(1e-300),
            values: Vec::new(),
            vectors: Vec::new(),
            restart: None,
            cycles: 0,
        }
    }

    fn krylov_size(&self) -> usize {
        let dim = self.op.dim();
        self.opts
            .krylov
            .unwrap_or(if dim > 200_000 { 80 } else { 150 })
            .max(2)
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.op.dim())
            .map(|_| self.rng.random_range(-1.0..1.0))
            .collect()
    }

    fn equal(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.opts.degeneracy_tol * a.abs().max(b.abs()).max(1.0)
    }

    /// Eigenvalues found so far, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// Runs until the `k` lowest eigenpairs are locked and a fresh cycle in
    /// their orthogonal complement confirms that nothing lower was missed.
    pub fn ensure(&mut self, k: usize) -> Result<()> {
        let dim = self.op.dim();
        let k = k.min(dim);
        loop {
            if self.values.len() == dim {
                return Ok(());
            }
            let cutoff = (self.values.len() >= k && k > 0).then(|| self.values[k - 1]);
            let lowest = self.cycle()?;
            if let (Some(cut), Some(low)) = (cutoff, lowest) {
                if low >= cut || self.equal(low, cut) {
                    return Ok(());
                }
            }
            if self.cycles >= self.opts.max_cycles {
                return Err(Error::NoConvergence {
                    iterations: self.cycles,
                    residuals: vec![],
                });
            }
        }
    }

    /// One restarted Lanczos cycle. Returns the lowest Ritz value if it
    /// converged (and was locked).
    fn cycle(&mut self) -> Result<Option<f64>> {
        self.cycles += 1;
        let dim = self.op.dim();
        let free = dim - self.vectors.len();
        let m = self.krylov_size().min(free);

        let mut v0 = self.random_vector();
        if let Some((r, res)) = self.restart.take() {
            // the previous Ritz vectors, with random directions on the scale
            // of their residual
            let weight = (res / self.scale).min(0.1) * norm(&r) / norm(&v0);
            for (a, b) in v0.iter_mut().zip(&r) {
                *a = b + weight * *a;
            }
        }
        orthogonalize(&mut v0, &self.vectors);
        let n0 = norm(&v0);
        if n0 == 0.0 {
            return Ok(None);
        }
        v0.iter_mut().for_each(|x| *x /= n0);

        let mut basis: Vec<Vec<f64>> = vec![v0];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; dim];
        let mut last_beta = 0.0;
        for j in 0..m {
            self.op.apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                let b = beta[j - 1];
                axpy(-b, &basis[j - 1], &mut w);
            }
            orthogonalize(&mut w, &self.vectors);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if j + 1 == m {
                last_beta = b;
                break;
            }
            if b <= 1e-12 * self.scale {
                // invariant subspace: continue with an independent direction
                let mut r = self.random_vector();
                orthogonalize(&mut r, &self.vectors);
                orthogonalize(&mut r, &basis);
                let rn = norm(&r);
                if rn <= 1e-10 {
                    break;
                }
                r.iter_mut().for_each(|x| *x /= rn);
                beta.push(0.0);
                basis.push(r);
            } else {
                beta.push(b);
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let tol = self.opts.tol * self.scale;
        let ritz = |col: usize| -> Vec<f64> {
            let mut y = vec![0.0; dim];
            for (i, v) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, col)], v, &mut y);
            }
            let n = norm(&y);
            y.iter_mut().for_each(|x| *x /= n);
            y
        };
        let exhausted = m == free;
        let mut lowest = None;
        let mut residuals = Vec::new();
        let mut restart: Option<(Vec<f64>, f64)> = None;
        for (rank, &col) in order.iter().enumerate() {
            let theta = eig.eigenvalues[col];
            let estimate = (last_beta * eig.eigenvectors[(m - 1, col)]).abs();
            if estimate > 10.0 * tol && !exhausted {
                // first unconverged pair: restart from it and its neighbours
                let mut r = vec![0.0; dim];
                for &c in order.iter().skip(rank).take(3) {
                    axpy(1.0, &ritz(c), &mut r);
                }
                restart = Some((r, estimate));
                residuals.push(estimate);
                break;
            }
            let mut y = ritz(col);
            orthogonalize(&mut y, &self.vectors);
            let yn = norm(&y);
            y.iter_mut().for_each(|x| *x /= yn);
            let hy = self.op.apply_new(&y);
            let theta = {
                let rq = dot(&y, &hy);
                if rq.is_finite() {
                    rq
                } else {
                    theta
                }
            };
            let res = hy
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            residuals.push(res);
            if res > tol && !exhausted {
                restart = Some((y, res));
                break;
            }
            if rank == 0 {
                lowest = Some(theta);
            }
            let pos = self.values.partition_point(|&v| v <= theta);
            self.values.insert(pos, theta);
            self.vectors.insert(pos, y);
        }
        self.restart = restart;
        if self.cycles >= self.opts.max_cycles && lowest.is_none() {
            return Err(Error::NoConvergence {
                iterations: self.cycles,
                residuals,
            });
        }
        Ok(lowest)
    }
}

/// The `k` lowest eigenpairs of `op`, ascending.
pub fn lowest_eigenpairs(
    op: &SparseOperator,
    k: usize,
    opts: LanczosOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut solver = Lanczos::new(op, opts);
    solver.ensure(k)?;
    let k = k.min(op.dim());
    Ok((solver.values[..k].to_vec(), solver.vectors[..k].to_vec()))
}
