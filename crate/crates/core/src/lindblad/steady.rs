//! Steady state of the Lindblad generator.
//!
//! `Lρ = 0` is singular, so the equation for ρ₀₀ is replaced by the trace
//! functional `Σᵢ ρᵢᵢ = 1`. Small systems use a sparse LU with two rounds of
//! iterative refinement; larger ones (or a failed factorization) use
//! Jacobi-preconditioned restarted GMRES on the same constrained system.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::liouvillian::{Liouvillian, SparseMatrix};
use super::operators::FockConfig;
use crate::error::{Error, Result};

/// Above this many unknowns the direct solve is skipped.
pub const DIRECT_SOLVE_LIMIT: usize = 250_000;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const MIN_EIGENVALUE: f64 = -1e-8;
pub const TAIL_THRESHOLD: f64 = 1e-6;

const REFINEMENT_STEPS: usize = 2;
const GMRES_RESTART: usize = 200;
const GMRES_MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    SparseLu,
    Gmres,
}

#[derive(Debug, Clone)]
pub struct SteadyDensityMatrix {
    /// Density matrix in the basis of [`FockConfig::index`].
    pub rho: Mat<c64>,
    pub fock: FockConfig,
    /// Population of the highest retained level of a, b and the mirror.
    pub tail_populations: [f64; 3],
    /// ‖Lρ‖₂ after symmetrization.
    pub residual: f64,
    /// max |ρ − ρ†| / 2 removed by symmetrization.
    pub symmetrization_delta: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub solver: SolverKind,
    pub residual_history: Vec<f64>,
    /// γ_m·n̄ of the mirror bath the state was solved with.
    pub thermal_rate: f64,
    /// False when the truncation audit fails.
    pub converged: bool,
}

impl SteadyDensityMatrix {
    pub fn dim(&self) -> usize {
        self.fock.dim()
    }

    /// Probability of basis state `idx`.
    pub fn population(&self, idx: usize) -> f64 {
        self.rho[(idx, idx)].re
    }

    /// Marginal occupation distribution of mode `k` (0 = a, 1 = b, 2 = mirror).
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.fock.levels()[k]];
        for idx in 0..self.dim() {
            out[self.fock.occupations(idx)[k]] += self.population(idx);
        }
        out
    }
}

/// Constrained system: L with row 0 replaced by the trace functional.
fn constrained(l: &Liouvillian) -> SparseMatrix {
    let n = l.hilbert_dim();
    let mut triplets: Vec<(usize, usize, c64)> = l.matrix.triplets().filter(|t| t.0 != 0).collect();
    triplets.extend((0..n).map(|i| (0, i + n * i, c64::new(1.0, 0.0))));
    SparseMatrix::from_triplets(n * n, triplets)
}

fn norm2(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual_vec(a: &SparseMatrix, x: &[c64], b: &[c64]) -> Vec<c64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

fn solve_direct(a: &SparseMatrix, b: &[c64], history: &mut Vec<f64>) -> Result<Vec<c64>> {
    let lu = a.to_faer()?.sp_lu().map_err(|e| Error::LinearSolve {
        reason: format!("sparse LU failed: {e:?}"),
        history: history.clone(),
    })?;
    let solve = |rhs: &[c64]| -> Vec<c64> {
        let mut m = Mat::<c64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        lu.solve_in_place(m.as_mut());
        (0..rhs.len()).map(|i| m[(i, 0)]).collect()
    };
    let mut x = solve(b);
    for _ in 0..REFINEMENT_STEPS {
        let r = residual_vec(a, &x, b);
        history.push(norm2(&r));
        let dx = solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    history.push(norm2(&residual_vec(a, &x, b)));
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::LinearSolve {
            reason: "sparse LU produced non-finite values".into(),
            history: history.clone(),
        });
    }
    Ok(x)
}

/// Restarted GMRES with right Jacobi preconditioning.
fn solve_gmres(a: &SparseMatrix, b: &[c64], tol: f64, history: &mut Vec<f64>) -> Result<Vec<c64>> {
    let n = a.n;
    let zero = c64::new(0.0, 0.0);
    let mut diag = vec![c64::new(1.0, 0.0); n];
    for c in 0..n {
        for k in a.col_ptr[c]..a.col_ptr[c + 1] {
            if a.row_idx[k] == c && a.values[k] != zero {
                diag[c] = a.values[k];
            }
        }
    }
    let precond = |v: &[c64]| -> Vec<c64> { v.iter().zip(&diag).map(|(x, d)| x / d).collect() };

    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = vec![zero; n];
    let mut iterations = 0;
    loop {
        let r = residual_vec(a, &x, b);
        let beta = norm2(&r);
        history.push(beta);
        if beta <= tol * bnorm {
            return Ok(x);
        }
        if iterations >= GMRES_MAX_ITERATIONS {
            return Err(Error::LinearSolve {
                reason: format!("GMRES stalled at relative residual {:.3e}", beta / bnorm),
                history: history.clone(),
            });
        }
        let m = GMRES_RESTART;
        let mut basis: Vec<Vec<c64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![zero; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = c64::new(beta, 0.0);
        let mut steps = 0;
        for j in 0..m {
            iterations += 1;
            let mut w = a.matvec(&precond(&basis[j]));
            for (i, v) in basis.iter().enumerate() {
                let hij: c64 = v.iter().zip(&w).map(|(vi, wi)| vi.conj() * wi).sum();
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm2(&w);
            h[j + 1][j] = c64::new(hnext, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j].norm_sqr() + h[j + 1][j].norm_sqr()).sqrt();
            if denom == 0.0 {
                steps = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = c64::new(denom, 0.0);
            h[j + 1][j] = zero;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            steps = j + 1;
            if g[j + 1].norm() <= tol * bnorm || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|z| z / hnext).collect());
        }
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let s: c64 = (i + 1..steps).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![zero; n];
        for (yi, v) in y.iter().zip(&basis) {
            for (uk, vk) in update.iter_mut().zip(v) {
                *uk += yi * vk;
            }
        }
        for (xi, ui) in x.iter_mut().zip(precond(&update)) {
            *xi += ui;
        }
    }
}

/// Solves for the steady state and checks trace, Hermiticity, positivity
/// and residual. A failed truncation audit leaves `converged == false`.
pub fn steady_density_matrix(l: &Liouvillian) -> Result<SteadyDensityMatrix> {
    steady_density_matrix_with(l, DIRECT_SOLVE_LIMIT)
}

pub fn steady_density_matrix_with(
    l: &Liouvillian,
    direct_limit: usize,
) -> Result<SteadyDensityMatrix> {
    let n = l.hilbert_dim();
    let a = constrained(l);
    let mut b = vec![c64::new(0.0, 0.0); n * n];
    b[0] = c64::new(1.0, 0.0);
    let mut history = Vec::new();

    let (x, solver) = if n * n <= direct_limit {
        match solve_direct(&a, &b, &mut history) {
            Ok(x) => (x, SolverKind::SparseLu),
            Err(_) => (solve_gmres(&a, &b, 1e-14, &mut history)?, SolverKind::Gmres),
        }
    } else {
        (solve_gmres(&a, &b, 1e-14, &mut history)?, SolverKind::Gmres)
    };

    let mut rho = Mat::<c64>::from_fn(n, n, |i, j| x[i + n * j]);
    let mut delta: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            delta = delta.max((rho[(i, j)] - avg).norm());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    let trace: c64 = (0..n).map(|i| rho[(i, i)]).sum();
    let trace_error = (trace - 1.0).norm();

    let sym: Vec<c64> = (0..n * n).map(|k| rho[(k % n, k / n)]).collect();
    let residual = norm2(&l.apply(&sym));
    history.push(residual);

    let hermiticity = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (rho[(i, j)] - rho[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    let min_eigenvalue = rho
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearSolve {
            reason: format!("eigenvalue check failed: {e:?}"),
            history: history.clone(),
        })?
        .first()
        .copied()
        .unwrap_or(0.0);

    let fail = |reason: String| Error::LinearSolve {
        reason,
        history: history.clone(),
    };
    if !(residual < RESIDUAL_TOL) {
        return Err(fail(format!(
            "steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    if !(trace_error < TRACE_TOL) {
        return Err(fail(format!(
            "trace deviates from one by {trace_error:.3e}"
        )));
    }
    if !(hermiticity < HERMITICITY_TOL) {
        return Err(fail(format!(
            "density matrix is not Hermitian ({hermiticity:.3e})"
        )));
    }
    if !(min_eigenvalue > MIN_EIGENVALUE) {
        return Err(fail(format!(
            "density matrix has eigenvalue {min_eigenvalue:.3e}"
        )));
    }

    let mut out = SteadyDensityMatrix {
        rho,
        fock: l.fock,
        tail_populations: [0.0; 3],
        residual,
        symmetrization_delta: delta,
        trace_error,
        min_eigenvalue,
        solver,
        residual_history: history,
        thermal_rate: l.gamma_m * l.thermal_phonons,
        converged: false,
    };
    let audit = super::correlations::truncation_audit(&out);
    out.tail_populations = audit.tail_populations;
    out.converged = audit.passed;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::liouvillian::build_liouvillian;
    use crate::model::SystemParams;
    use crate::spectral::steady::solve_steady_state;

    fn thermal(nbar: f64, k: usize) -> f64 {
        nbar.powi(k as i32) / (nbar + 1.0).powi(k as i32 + 1)
    }

    #[test]
    fn undriven_state_is_vacuum_times_truncated_thermal() {
        let p = SystemParams {
            eps_c: 0.0,
            temperature: 0.5,
            ..SystemParams::default()
        };
        let fock = FockConfig::new(3, 3, 5).unwrap();
        let l = build_liouvillian(&p, &fock).unwrap();
        let s = steady_density_matrix(&l).unwrap();
        let nbar = l.thermal_phonons;
        // detailed balance holds level by level, so truncation only renormalizes
        let z: f64 = (0..5).map(|k| thermal(nbar, k)).sum();
        let m = s.marginal(2);
        for k in 0..5 {
            assert!(
                (m[k] - thermal(nbar, k) / z).abs() < 1e-12,
                "{k}: {} vs {}",
                m[k],
                thermal(nbar, k) / z
            );
        }
        assert!(s.marginal(0)[0] > 1.0 - 1e-14);
        assert!(s.marginal(1)[0] > 1.0 - 1e-14);
        assert_eq!(s.solver, SolverKind::SparseLu);
    }

    #[test]
    fn analytic_fixed_point_is_annihilated() {
        let p = SystemParams {
            eps_c: 0.0,
            g0: 0.0,
            coupling: 0.0,
            temperature: 0.3,
            ..SystemParams::default()
        };
        let fock = FockConfig::new(3, 3, 6).unwrap();
        let l = build_liouvillian(&p, &fock).unwrap();
        let nbar = l.thermal_phonons;
        let n = fock.dim();
        let mut rho = vec![c64::new(0.0, 0.0); n * n];
        for k in 0..6 {
            let idx = fock.index(0, 0, k);
            rho[idx + n * idx] = c64::new(thermal(nbar, k), 0.0);
        }
        assert!(norm2(&l.apply(&rho)) < 1e-12);
    }

    #[test]
    fn coherent_product_state_without_mirror_coupling() {
        let p = SystemParams {
            g0: 0.0,
            coupling: 3.0,
            delta: 0.4,
            eps_c: 0.05,
            ..SystemParams::default()
        };
        let fock = FockConfig::new(5, 5, 5).unwrap();
        let s = steady_density_matrix(&build_liouvillian(&p, &fock).unwrap()).unwrap();
        let ss = solve_steady_state(&p).unwrap();
        let na: f64 = s
            .marginal(0)
            .iter()
            .enumerate()
            .map(|(k, w)| k as f64 * w)
            .sum();
        assert!((na - ss.alpha0.norm_sqr()).abs() < 1e-6 * ss.alpha0.norm_sqr().max(1e-6));
        assert!(s.converged);
    }

    #[test]
    fn gmres_agrees_with_direct_solve() {
        let p = SystemParams {
            omega_m: 10.0,
            coupling: 3.0,
            g0: 0.6,
            gamma_m: 0.01,
            temperature: 1e-4,
            ..SystemParams::default()
        };
        let fock = FockConfig::new(3, 3, 4).unwrap();
        let l = build_liouvillian(&p, &fock).unwrap();
        let direct = steady_density_matrix(&l).unwrap();
        let iterative = steady_density_matrix_with(&l, 0).unwrap();
        assert_eq!(iterative.solver, SolverKind::Gmres);
        let n = fock.dim();
        let mut diff: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                diff = diff.max((direct.rho[(i, j)] - iterative.rho[(i, j)]).norm());
            }
        }
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn operating_point_populations_fall_with_photon_number() {
        let p = SystemParams::default();
        let s =
            steady_density_matrix(&build_liouvillian(&p, &FockConfig::default()).unwrap()).unwrap();
        for k in 0..2 {
            let m = s.marginal(k);
            assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
        }
        assert!(s.converged);
        assert!(s.residual < RESIDUAL_TOL);
    }
}
