use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linear::SparseFactor;
use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};

/// Eigenvalues below `KERNEL_TOL` times the spectral-radius estimate are
/// counted as kernel and dropped.
pub const KERNEL_TOL: f64 = 1e-8;

/// Residual bound every reported pair must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Eigenvalues closest to `shift` are returned (0 gives the smallest).
    pub shift: f64,
    /// Largest dimension solved by dense reduction; above it shift-invert
    /// Lanczos is used.
    pub dense_limit: usize,
    pub kernel_tol: f64,
    /// Columns spanning the known kernel (e.g. the discrete gradient image);
    /// the iterative solver projects them out.
    pub kernel_basis: Option<SparseMatrix>,
    /// Krylov dimension cap for the iterative solver.
    pub max_krylov: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { shift: 0.0, dense_limit: 4000, kernel_tol: KERNEL_TOL, kernel_basis: None, max_krylov: 400 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    /// `omega^2` in geometry units, ascending.
    pub eigenvalues: Vec<f64>,
    /// M-normalized eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||K e - lambda M e|| / (lambda ||e||_M)` per pair.
    pub residuals: Vec<f64>,
    pub kernel_count: usize,
    /// `f = omega / 2 pi` in Hz, present when a length scale was supplied.
    pub frequencies: Option<Vec<f64>>,
}

/// Largest-eigenvalue estimate of the pencil `(K, M)`: Gershgorin row sums
/// of `K` scaled by the diagonal of `M`.
pub fn lambda_max_estimate(k: &SparseMatrix, m: &SparseMatrix) -> f64 {
    let md = m.diagonal();
    (0..k.nrows())
        .map(|i| {
            let r: f64 = k.row(i).map(|(_, v)| v.abs()).sum();
            if md[i] > 0.0 {
                r / md[i]
            } else {
                r
            }
        })
        .fold(0.0, f64::max)
}

fn check_pencil(k: &SparseMatrix, m: &SparseMatrix) -> Result<usize> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::validation("K and M must be square matrices of equal size"));
    }
    Ok(n)
}

/// Generalized symmetric eigenproblem `K e = lambda M e`.
///
/// Returns up to `count` eigenpairs above the kernel threshold, closest to
/// `opts.shift` and sorted ascending.
pub fn solve_eigs(k: &SparseMatrix, m: &SparseMatrix, count: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = check_pencil(k, m)?;
    let tau = opts.kernel_tol * lambda_max_estimate(k, m);
    let (values, vectors, kernel_count) =
        if n <= opts.dense_limit { dense(k, m, count, opts.shift, tau)? } else { lanczos(k, m, count, opts, tau)? };
    let mut residuals = Vec::with_capacity(values.len());
    for (lam, x) in values.iter().zip(&vectors) {
        let kx = k.matvec(x);
        let mx = m.matvec(x);
        let r = kx.iter().zip(&mx).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        let norm_m = x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>().sqrt();
        residuals.push(r / (lam.abs() * norm_m));
    }
    if let Some((i, r)) = residuals.iter().enumerate().find(|(_, r)| !(**r < RESIDUAL_TOL)) {
        return Err(Error::solver(format!(
            "eigenpair {i} (lambda = {}) has residual {r:e} above {RESIDUAL_TOL:e}",
            values[i]
        )));
    }
    Ok(EigenResult { eigenvalues: values, eigenvectors: vectors, residuals, kernel_count, frequencies: None })
}

fn to_dense(a: &SparseMatrix) -> Mat<f64> {
    let mut d = Mat::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] += v;
    }
    d
}

fn select(values: &[f64], idx: Vec<usize>, count: usize, shift: f64) -> Vec<usize> {
    let mut idx = idx;
    if shift != 0.0 {
        idx.sort_by(|&a, &b| (values[a] - shift).abs().total_cmp(&(values[b] - shift).abs()));
    }
    idx.truncate(count);
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

type Pairs = (Vec<f64>, Vec<Vec<f64>>, usize);

fn dense(k: &SparseMatrix, m: &SparseMatrix, count: usize, shift: f64, tau: f64) -> Result<Pairs> {
    let n = k.nrows();
    if n == 0 {
        return Ok((Vec::new(), Vec::new(), 0));
    }
    let par = faer::get_global_parallelism();
    let md = to_dense(m);
    let llt = md.llt(Side::Lower).map_err(|_| Error::solver("mass matrix is not positive definite"))?;
    let l = llt.L();
    let mut c = to_dense(k);
    solve_lower_triangular_in_place(l, c.as_mut(), par);
    let mut ct = c.transpose().to_owned();
    solve_lower_triangular_in_place(l, ct.as_mut(), par);
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let evd =
        sym.self_adjoint_eigen(Side::Lower).map_err(|e| Error::solver(format!("dense eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let all: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let kernel_count = all.iter().filter(|&&v| v < tau).count();
    let keep = select(&all, (0..n).filter(|&i| all[i] >= tau).collect(), count, shift);
    let u = evd.U();
    let mut y = Mat::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
    solve_upper_triangular_in_place(l.transpose(), y.as_mut(), par);
    let vectors = (0..keep.len()).map(|j| (0..n).map(|i| y[(i, j)]).collect()).collect();
    Ok((keep.iter().map(|&i| all[i]).collect(), vectors, kernel_count))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

// M-orthogonal projection onto the complement of range(G).
struct KernelProjector {
    g: SparseMatrix,
    gt: SparseMatrix,
    factor: SparseFactor,
}

impl KernelProjector {
    fn new(g: &SparseMatrix, m: &SparseMatrix) -> Result<Self> {
        let gt = g.transpose();
        let gmg = gt.matmul(&m.matmul(g)?)?;
        Ok(Self { g: g.clone(), gt, factor: SparseFactor::cholesky(&gmg)? })
    }

    fn apply(&self, v: &mut [f64], m: &SparseMatrix) {
        let a = self.factor.solve(&self.gt.matvec(&m.matvec(v)));
        let ga = self.g.matvec(&a);
        for (vi, gi) in v.iter_mut().zip(&ga) {
            *vi -= gi;
        }
    }
}

// Shift-invert Lanczos in the M inner product with full
// reorthogonalization.
fn lanczos(k: &SparseMatrix, m: &SparseMatrix, count: usize, opts: &EigenOptions, tau: f64) -> Result<Pairs> {
    let n = k.nrows();
    let projector = match &opts.kernel_basis {
        Some(g) => {
            if g.nrows() != n {
                return Err(Error::validation("kernel basis has the wrong number of rows"));
            }
            Some(KernelProjector::new(g, m)?)
        }
        None => None,
    };
    let sigma = if opts.shift != 0.0 { opts.shift } else { -tau.max(f64::MIN_POSITIVE) * 1e2 };
    let shifted = k.add_scaled(-sigma, m)?;
    let factor = SparseFactor::general(&shifted)?;
    let project = |v: &mut Vec<f64>| {
        if let Some(p) = &projector {
            p.apply(v, m);
        }
    };
    let m_norm = |v: &[f64]| dot(v, &m.matvec(v)).max(0.0).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    project(&mut v);
    let nv = m_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let max_m = opts.max_krylov.min(n);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut mbasis: Vec<Vec<f64>> = vec![m.matvec(&basis[0])];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut converged: Option<(Vec<f64>, Mat<f64>)> = None;
    let mut last_report = String::new();
    for j in 0..max_m {
        let mut w = factor.solve(&mbasis[j]);
        project(&mut w);
        let a = dot(&w, &mbasis[j]);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for (b, mb) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mb);
                axpy(-c, b, &mut w);
            }
        }
        let b = m_norm(&w);
        let steps = j + 1;
        let done = b < 1e-13 || steps == max_m;
        if steps >= count && (steps % 10 == 0 || done) {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta)?;
            // largest theta first
            let order: Vec<usize> = (0..steps).rev().collect();
            let wanted: Vec<usize> = order.into_iter().filter(|&i| theta[i] > 0.0).take(count).collect();
            let ok = wanted.len() == count.min(steps)
                && wanted.iter().all(|&i| (b * s[(steps - 1, i)]).abs() <= 1e-11 * theta[i].abs());
            last_report = wanted
                .iter()
                .map(|&i| format!("{:e}", (b * s[(steps - 1, i)]).abs() / theta[i].abs()))
                .collect::<Vec<_>>()
                .join(", ");
            if ok || b < 1e-13 {
                converged = Some((wanted.iter().map(|&i| theta[i]).collect(), {
                    Mat::from_fn(steps, wanted.len(), |r, c| s[(r, wanted[c])])
                }));
                break;
            }
        }
        if done {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        mbasis.push(m.matvec(&w));
        basis.push(w);
    }
    let (theta, s) = converged.ok_or_else(|| {
        Error::solver(format!("Lanczos did not converge in {max_m} steps; relative residual estimates: {last_report}"))
    })?;
    let mut pairs: Vec<(f64, Vec<f64>)> = theta
        .iter()
        .enumerate()
        .map(|(c, &t)| {
            let mut x = vec![0.0; n];
            for (r, b) in basis.iter().enumerate().take(s.nrows()) {
                axpy(s[(r, c)], b, &mut x);
            }
            let nx = m_norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            (sigma + 1.0 / t, x)
        })
        .filter(|(lam, _)| *lam >= tau)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kernel_count = opts.kernel_basis.as_ref().map_or(0, SparseMatrix::ncols);
    let (values, vectors) = pairs.into_iter().unzip();
    Ok((values, vectors, kernel_count))
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::solver(format!("tridiagonal eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    Ok(((0..m).map(|i| s[i]).collect(), evd.U().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> SparseMatrix {
        SparseMatrix::from_triplets(v.len(), v.len(), v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect()).unwrap()
    }

    #[test]
    fn diagonal_pencil_with_kernel() {
        let r = solve_eigs(&diag(&[0.0, 1.0, 2.0]), &SparseMatrix::identity(3), 5, &EigenOptions::default()).unwrap();
        assert_eq!(r.kernel_count, 1);
        assert_eq!(r.eigenvalues.len(), 2);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let err = solve_eigs(&diag(&[1.0, 2.0]), &diag(&[1.0, -1.0]), 1, &EigenOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    fn laplacian_1d(n: usize) -> (SparseMatrix, SparseMatrix) {
        let h = 1.0 / (n + 1) as f64;
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        for i in 0..n {
            kt.push((i, i, 2.0 / h));
            mt.push((i, i, 4.0 * h / 6.0));
            if i + 1 < n {
                for (a, b) in [(i, i + 1), (i + 1, i)] {
                    kt.push((a, b, -1.0 / h));
                    mt.push((a, b, h / 6.0));
                }
            }
        }
        (SparseMatrix::from_triplets(n, n, kt).unwrap(), SparseMatrix::from_triplets(n, n, mt).unwrap())
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let (k, m) = laplacian_1d(300);
        let dense = solve_eigs(&k, &m, 6, &EigenOptions::default()).unwrap();
        let opts = EigenOptions { dense_limit: 10, ..EigenOptions::default() };
        let iter = solve_eigs(&k, &m, 6, &opts).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&iter.eigenvalues) {
            assert!((a - b).abs() < 1e-9 * a, "{a} {b}");
        }
        assert!((dense.eigenvalues[0] / std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn eigenvectors_are_m_orthonormal() {
        let (k, m) = laplacian_1d(40);
        let r = solve_eigs(&k, &m, 5, &EigenOptions::default()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let mij = dot(&r.eigenvectors[i], &m.matvec(&r.eigenvectors[j]));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((mij - want).abs() < 1e-10);
            }
        }
    }
}
