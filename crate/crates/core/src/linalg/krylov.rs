//! Iterative solvers: PCG, flexible GMRES, and MINRES.

use nalgebra::DVector;

use crate::error::Error;

/// Convergence record of an iterative solve.
///
/// `residual_history` holds the relative residual norm before the first
/// iteration and after each one, so its length is `iterations + 1`.
#[derive(Debug, Clone)]
pub struct IterStats {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Why a Krylov solve stopped without meeting its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovFailureKind {
    MaxIterations,
    /// `p^T A p <= 0` was observed: the operator is not positive definite.
    IndefiniteOperator,
    /// `r^T M^{-1} r <= 0` was observed: the preconditioner is indefinite.
    IndefinitePreconditioner,
    /// Arnoldi normalization fell below 1e-14 relative with nonzero residual.
    Breakdown,
}

/// A failed Krylov solve, carrying the best iterate and its statistics.
#[derive(Debug, Clone)]
pub struct KrylovFailure {
    pub kind: KrylovFailureKind,
    pub solver: &'static str,
    pub x: DVector<f64>,
    pub stats: IterStats,
}

impl KrylovFailure {
    pub fn into_error(self) -> Error {
        match self.kind {
            KrylovFailureKind::Breakdown => Error::Breakdown {
                iteration: self.stats.iterations,
                h: 0.0,
            },
            _ => Error::MaxIterations {
                solver: self.solver,
                iterations: self.stats.iterations,
                residual: self.stats.residual_history.last().copied().unwrap_or(f64::NAN),
            },
        }
    }
}

impl std::fmt::Display for KrylovFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} failed ({:?}) after {} iterations",
            self.solver, self.kind, self.stats.iterations
        )
    }
}

impl std::error::Error for KrylovFailure {}

/// Preconditioned conjugate gradient for SPD operators.
///
/// Convergence is monitored on the true relative residual `||b - A x|| /
/// ||b||`, updated by the standard recurrence. The preconditioner must be
/// SPD as well; indefiniteness of either operator is detected and reported.
pub fn pcg(
    mut apply_a: impl FnMut(&DVector<f64>) -> DVector<f64>,
    mut apply_m: impl FnMut(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_it: usize,
) -> Result<(DVector<f64>, IterStats), KrylovFailure> {
    let n = b.len();
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok((
            DVector::zeros(n),
            IterStats {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
            },
        ));
    }

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = apply_m(&r);
    let mut rz = r.dot(&z);
    let mut p = z.clone();
    let mut history = vec![1.0];

    let fail = |kind, x: DVector<f64>, history: Vec<f64>| KrylovFailure {
        kind,
        solver: "pcg",
        stats: IterStats {
            iterations: history.len() - 1,
            residual_history: history,
            converged: false,
        },
        x,
    };

    if rz <= 0.0 {
        return Err(fail(KrylovFailureKind::IndefinitePreconditioner, x, history));
    }

    for _it in 1..=max_it {
        let q = apply_a(&p);
        let pq = p.dot(&q);
        if pq <= 0.0 {
            return Err(fail(KrylovFailureKind::IndefiniteOperator, x, history));
        }
        let alpha = rz / pq;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        let rel = r.norm() / b_norm;
        history.push(rel);
        if rel <= tol {
            return Ok((
                x,
                IterStats {
                    iterations: history.len() - 1,
                    residual_history: history,
                    converged: true,
                },
            ));
        }
        z = apply_m(&r);
        let rz_next = r.dot(&z);
        if rz_next <= 0.0 {
            return Err(fail(KrylovFailureKind::IndefinitePreconditioner, x, history));
        }
        let beta = rz_next / rz;
        rz = rz_next;
        p = &z + &p * beta;
    }

    Err(fail(KrylovFailureKind::MaxIterations, x, history))
}

/// Flexible GMRES, right-preconditioned, no restart.
///
/// The preconditioner may change from one iteration to the next (it is
/// re-applied to each new basis vector and the preconditioned vectors are
/// stored). With a fixed preconditioner this is exactly right-preconditioned
/// GMRES. The reported residuals are true residual norms of the original
/// system since the preconditioning is from the right.
pub fn fgmres(
    mut apply_a: impl FnMut(&DVector<f64>) -> DVector<f64>,
    mut apply_m: impl FnMut(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_it: usize,
) -> Result<(DVector<f64>, IterStats), KrylovFailure> {
    let n = b.len();
    let beta0 = b.norm();
    if beta0 == 0.0 {
        return Ok((
            DVector::zeros(n),
            IterStats {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
            },
        ));
    }

    let mut basis: Vec<DVector<f64>> = vec![b / beta0];
    let mut precond: Vec<DVector<f64>> = Vec::new();
    // Hessenberg columns after Givens, plus rotation pairs and rhs g
    let mut h_cols: Vec<Vec<f64>> = Vec::new();
    let mut givens: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta0];
    let mut history = vec![1.0];

    let solve_and_return = |h_cols: &[Vec<f64>],
                            g: &[f64],
                            precond: &[DVector<f64>],
                            k: usize|
     -> DVector<f64> {
        // back substitution on the k-by-k triangle
        let mut y = vec![0.0f64; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (j, yj) in y.iter().enumerate().take(k).skip(i + 1) {
                s -= h_cols[j][i] * yj;
            }
            y[i] = s / h_cols[i][i];
        }
        let mut x = DVector::zeros(n);
        for (j, yj) in y.iter().enumerate() {
            x.axpy(*yj, &precond[j], 1.0);
        }
        x
    };

    for j in 0..max_it {
        let z = apply_m(&basis[j]);
        let mut w = apply_a(&z);
        precond.push(z);

        let mut h = vec![0.0f64; j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = w.dot(v);
            h[i] = hij;
            w.axpy(-hij, v, 1.0);
        }
        // one re-orthogonalization pass for numerical robustness
        for (i, v) in basis.iter().enumerate() {
            let c = w.dot(v);
            if c != 0.0 {
                h[i] += c;
                w.axpy(-c, v, 1.0);
            }
        }
        let h_next = w.norm();
        h[j + 1] = h_next;

        // apply accumulated rotations, then a new one
        for (i, &(c, s)) in givens.iter().enumerate() {
            let t = c * h[i] + s * h[i + 1];
            h[i + 1] = -s * h[i] + c * h[i + 1];
            h[i] = t;
        }
        let (c, s) = {
            let (a, bb) = (h[j], h[j + 1]);
            let r = (a * a + bb * bb).sqrt();
            if r == 0.0 {
                (1.0, 0.0)
            } else {
                (a / r, bb / r)
            }
        };
        let r = c * h[j] + s * h[j + 1];
        h[j] = r;
        h[j + 1] = 0.0;
        givens.push((c, s));
        let g_next = -s * g[j];
        g[j] *= c;
        g.push(g_next);
        h_cols.push(h);

        let rel = g[j + 1].abs() / beta0;
        history.push(rel);

        if rel <= tol {
            let x = solve_and_return(&h_cols, &g, &precond, j + 1);
            return Ok((
                x,
                IterStats {
                    iterations: j + 1,
                    residual_history: history,
                    converged: true,
                },
            ));
        }

        if h_next <= 1e-14 * beta0 {
            // residual still above tolerance: genuine breakdown
            let x = solve_and_return(&h_cols, &g, &precond, j + 1);
            return Err(KrylovFailure {
                kind: KrylovFailureKind::Breakdown,
                solver: "fgmres",
                x,
                stats: IterStats {
                    iterations: j + 1,
                    residual_history: history,
                    converged: false,
                },
            });
        }
        basis.push(&w / h_next);
    }

    let x = solve_and_return(&h_cols, &g, &precond, h_cols.len());
    Err(KrylovFailure {
        kind: KrylovFailureKind::MaxIterations,
        solver: "fgmres",
        x,
        stats: IterStats {
            iterations: history.len() - 1,
            residual_history: history,
            converged: false,
        },
    })
}

/// MINRES for symmetric (possibly indefinite) systems, unpreconditioned.
///
/// Fallback used when negative curvature is detected in the inner interface
/// solve; convergence is monitored on the true relative residual.
pub fn minres(
    mut apply_a: impl FnMut(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_it: usize,
) -> Result<(DVector<f64>, IterStats), KrylovFailure> {
    let n = b.len();
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok((
            DVector::zeros(n),
            IterStats {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
            },
        ));
    }

    let mut x = DVector::zeros(n);
    let mut v_prev = DVector::zeros(n);
    let mut v = b / b_norm;
    let mut beta = 0.0f64;
    // Givens state
    let (mut c_prev, mut s_prev) = (1.0f64, 0.0f64);
    let (mut c_pprev, mut s_pprev) = (1.0f64, 0.0f64);
    let mut w_prev = DVector::zeros(n);
    let mut w_pprev = DVector::zeros(n);
    let mut eta = b_norm;
    let mut history = vec![1.0];

    for it in 1..=max_it {
        // Lanczos step
        let mut av = apply_a(&v);
        av.axpy(-beta, &v_prev, 1.0);
        let alpha = av.dot(&v);
        av.axpy(-alpha, &v, 1.0);
        let beta_next = av.norm();

        // previous rotations applied to the new column [beta, alpha, beta_next]
        let delta = c_prev * alpha - c_pprev * s_prev * beta;
        let rho2 = s_prev * alpha + c_pprev * c_prev * beta;
        let rho3 = s_pprev * beta;
        // new rotation
        let rho1 = (delta * delta + beta_next * beta_next).sqrt();
        let (c, s) = if rho1 == 0.0 {
            (1.0, 0.0)
        } else {
            (delta / rho1, beta_next / rho1)
        };

        let mut w = v.clone();
        w.axpy(-rho3, &w_pprev, 1.0);
        w.axpy(-rho2, &w_prev, 1.0);
        w /= rho1;

        x.axpy(c * eta, &w, 1.0);
        eta = -s * eta;

        w_pprev = std::mem::replace(&mut w_prev, w);
        c_pprev = c_prev;
        s_pprev = s_prev;
        c_prev = c;
        s_prev = s;

        let rel = eta.abs() / b_norm;
        history.push(rel);
        if rel <= tol {
            return Ok((
                x,
                IterStats {
                    iterations: it,
                    residual_history: history,
                    converged: true,
                },
            ));
        }

        if beta_next <= 1e-14 * b_norm {
            break;
        }
        v_prev = std::mem::replace(&mut v, &av / beta_next);
        beta = beta_next;
    }

    Err(KrylovFailure {
        kind: KrylovFailureKind::MaxIterations,
        solver: "minres",
        x,
        stats: IterStats {
            iterations: history.len() - 1,
            residual_history: history,
            converged: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_op(m: &DMatrix<f64>) -> impl FnMut(&DVector<f64>) -> DVector<f64> + '_ {
        move |v| m * v
    }

    fn ident() -> impl FnMut(&DVector<f64>) -> DVector<f64> {
        |v: &DVector<f64>| v.clone()
    }

    #[test]
    fn pcg_identity_converges_in_one_iteration() {
        let b = DVector::from_vec(vec![1.0, 2.0, -3.0]);
        let a = DMatrix::identity(3, 3);
        let (x, stats) = pcg(dense_op(&a), ident(), &b, 1e-12, 10).unwrap();
        assert_eq!(stats.iterations, 1);
        assert!(stats.converged);
        assert_relative_eq!(x, b, epsilon = 1e-14);
        assert_eq!(stats.residual_history.len(), stats.iterations + 1);
    }

    #[test]
    fn pcg_exact_preconditioner_converges_in_one_iteration() {
        let d = DVector::from_iterator(10, (1..=10).map(|i| i as f64));
        let a = DMatrix::from_diagonal(&d);
        let minv = DMatrix::from_diagonal(&d.map(|v| 1.0 / v));
        let b = DVector::from_fn(10, |i, _| (i as f64 + 1.0).cos());
        let (x, stats) = pcg(dense_op(&a), dense_op(&minv), &b, 1e-12, 20).unwrap();
        assert_eq!(stats.iterations, 1);
        let exact = DVector::from_fn(10, |i, _| b[i] / d[i]);
        assert_relative_eq!(x, exact, epsilon = 1e-12);
    }

    #[test]
    fn pcg_random_spd_matches_direct_solve() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 5.0;
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (x, stats) = pcg(dense_op(&a), ident(), &b, 1e-11, 500).unwrap();
        assert!(stats.converged);
        let exact = a.clone().lu().solve(&b).unwrap();
        assert!((x - &exact).norm() / exact.norm() <= 1e-9);
    }

    #[test]
    fn pcg_reports_indefinite_operator() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let err = pcg(dense_op(&a), ident(), &b, 1e-12, 10).unwrap_err();
        assert_eq!(err.kind, KrylovFailureKind::IndefiniteOperator);
    }

    #[test]
    fn fgmres_identity_converges_in_one_iteration() {
        let a = DMatrix::identity(4, 4);
        let b = DVector::from_vec(vec![1.0, -1.0, 2.0, 0.5]);
        let (x, stats) = fgmres(dense_op(&a), ident(), &b, 1e-12, 10).unwrap();
        assert_eq!(stats.iterations, 1);
        assert_relative_eq!(x, b, epsilon = 1e-13);
    }

    #[test]
    fn fgmres_exact_inverse_preconditioner_one_iteration() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 4.0;
        let ainv = a.clone().try_inverse().unwrap();
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (x, stats) = fgmres(dense_op(&a), dense_op(&ainv), &b, 1e-10, 20).unwrap();
        assert_eq!(stats.iterations, 1);
        let exact = &ainv * &b;
        assert!((x - &exact).norm() / exact.norm() <= 1e-10);
    }

    #[test]
    fn fgmres_nonsymmetric_matches_direct_solve() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
        for i in 0..n {
            a[(i, i)] += 4.0;
        }
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (x, stats) = fgmres(dense_op(&a), ident(), &b, 1e-12, 200).unwrap();
        assert!(stats.converged);
        let exact = a.clone().lu().solve(&b).unwrap();
        assert!((x - &exact).norm() / exact.norm() <= 1e-8);
    }

    /// With a fixed preconditioner, FGMRES must reproduce standard
    /// right-preconditioned GMRES. The reference implementation below is an
    /// independent textbook version that stores only the unpreconditioned
    /// basis and applies M at the end.
    #[test]
    fn fgmres_matches_fixed_right_preconditioned_gmres() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
        for i in 0..n {
            a[(i, i)] += 3.0;
        }
        let m_diag = DMatrix::from_diagonal(&a.diagonal().map(|v| 1.0 / v));
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));

        let (_, stats) = fgmres(dense_op(&a), dense_op(&m_diag), &b, 1e-13, 60).unwrap();

        // reference: classical right-preconditioned GMRES residual norms
        let reference = reference_right_gmres(&a, &m_diag, &b, 60);
        for (i, r) in stats.residual_history.iter().enumerate() {
            assert!(
                (r - reference[i]).abs() <= 1e-12 * reference[0].max(1.0),
                "residual {i}: {r} vs {}",
                reference[i]
            );
        }
    }

    fn reference_right_gmres(
        a: &DMatrix<f64>,
        m: &DMatrix<f64>,
        b: &DVector<f64>,
        max_it: usize,
    ) -> Vec<f64> {
        // Arnoldi on A*M with full-storage Hessenberg; residuals from the
        // least-squares problem solved densely each step.
        let beta = b.norm();
        let mut v = vec![b / beta];
        let mut h = DMatrix::<f64>::zeros(max_it + 1, max_it);
        let mut out = vec![1.0];
        for j in 0..max_it {
            let mut w = a * (m * &v[j]);
            for i in 0..=j {
                h[(i, j)] = w.dot(&v[i]);
                let hij = h[(i, j)];
                w.axpy(-hij, &v[i], 1.0);
            }
            for i in 0..=j {
                let c = w.dot(&v[i]);
                h[(i, j)] += c;
                w.axpy(-c, &v[i], 1.0);
            }
            h[(j + 1, j)] = w.norm();
            // min || beta e1 - H y ||
            let hj = h.view((0, 0), (j + 2, j + 1)).into_owned();
            let mut rhs = DVector::zeros(j + 2);
            rhs[0] = beta;
            let y = hj.clone().svd(true, true).solve(&rhs, 1e-300).unwrap();
            let res = (&rhs - &hj * y).norm() / beta;
            out.push(res);
            if res <= 1e-14 {
                break;
            }
            let next = &w / h[(j + 1, j)];
            v.push(next);
        }
        out
    }

    #[test]
    fn minres_solves_indefinite_system() {
        let n = 25;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let sym = (&m + m.transpose()) * 0.5;
        // shift to make it clearly indefinite but nonsingular
        let a = sym + DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            if i % 2 == 0 {
                6.0
            } else {
                -6.0
            }
        }));
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (x, stats) = minres(dense_op(&a), &b, 1e-10, 500).unwrap();
        assert!(stats.converged);
        let exact = a.clone().lu().solve(&b).unwrap();
        assert!((x - &exact).norm() / exact.norm() <= 1e-8);
    }
}
