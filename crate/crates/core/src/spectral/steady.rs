//! Mean-field steady state and linear stability of the fluctuations.
//!
//! Eliminating α₀ and q₀ from the mean-field equations leaves a cubic in
//! x = |β₀|²:
//!
//! ```text
//! k²x³ − 2k·Im(c)·x² + |c|²x − |s|² = 0,
//! u = κ_a/2 + iΔ_a,  c = κ_b/2 + iΔ_b + J²/u,  s = −iJε_c/u,  k = g_b²/ω_m
//! ```
//!
//! All three roots are found in closed form; the physical one is the root
//! reached by Newton continuation in k from the linear (k = 0) solution.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

const CONTINUATION_STEPS: usize = 32;
const NEWTON_MAX_ITER: usize = 100;
/// Allowed mean-field residual, relative to ε_c.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateFields {
    #[serde(with = "complex_pair")]
    pub alpha0: c64,
    #[serde(with = "complex_pair")]
    pub beta0: c64,
    /// Mean mirror displacement in units of the zero-point quadrature.
    pub q0: f64,
    pub stable: bool,
    pub max_real_eigenvalue: f64,
    /// Largest mean-field equation residual divided by ε_c.
    pub residual: f64,
}

pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Coefficients of the reduced mean-field problem.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    u: c64,
    c: c64,
    s: c64,
    k: f64,
}

impl Reduced {
    fn new(p: &SystemParams) -> Self {
        let i = c64::i();
        let u = c64::new(0.5 * p.kappa_a, p.delta_a());
        let j = p.coupling;
        Self {
            u,
            c: c64::new(0.5 * p.kappa_b, p.delta_b()) + j * j / u,
            s: -i * j * p.eps_c / u,
            k: p.g_b() * p.g_b() / p.omega_m,
        }
    }

    /// f(x) = x·|c − ikx|² − |s|² at coupling `k`, with its derivative.
    fn eval(&self, x: f64, k: f64) -> (f64, f64) {
        let re = self.c.re;
        let im = self.c.im - k * x;
        let f = x * (re * re + im * im) - self.s.norm_sqr();
        let df = re * re + im * im - 2.0 * k * x * im;
        (f, df)
    }

    fn newton(&self, mut x: f64, k: f64) -> Result<f64> {
        let target = self.s.norm_sqr();
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (f, df) = self.eval(x, k);
            residual = f.abs() / target.max(f64::MIN_POSITIVE);
            if df == 0.0 {
                break;
            }
            let step = f / df;
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs() || f == 0.0 {
                return Ok(x);
            }
        }
        Err(Error::NonConvergence {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }

    /// The three roots of the cubic in x, in closed form.
    fn cubic_roots(&self) -> [c64; 3] {
        // x³ + a2 x² + a1 x + a0 = 0
        let k = self.k;
        let a2 = -2.0 * self.c.im / k;
        let a1 = self.c.norm_sqr() / (k * k);
        let a0 = -self.s.norm_sqr() / (k * k);
        cubic(a2, a1, a0)
    }
}

/// Roots of the monic cubic x³ + a x² + b x + c by Cardano's formula.
pub(crate) fn cubic(a: f64, b: f64, c: f64) -> [c64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = c64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u = (c64::new(-q / 2.0, 0.0) + disc).cbrt();
    if u.norm() == 0.0 {
        u = (c64::new(-q / 2.0, 0.0) - disc).cbrt();
    }
    let omega = c64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [c64::new(0.0, 0.0); 3];
    let mut uk = u;
    for r in roots.iter_mut() {
        let t = if uk.norm() == 0.0 {
            c64::new(0.0, 0.0)
        } else {
            uk - p / (3.0 * uk)
        };
        *r = t - shift;
        uk *= omega;
    }
    roots
}

/// Solves the mean-field equations and audits linear stability.
pub fn solve_steady_state(p: &SystemParams) -> Result<SteadyStateFields> {
    let red = Reduced::new(p);
    let i = c64::i();

    let x = if red.k == 0.0 || p.eps_c == 0.0 {
        red.s.norm_sqr() / red.c.norm_sqr()
    } else {
        let mut x = red.s.norm_sqr() / red.c.norm_sqr();
        for step in 1..=CONTINUATION_STEPS {
            let k = red.k * step as f64 / CONTINUATION_STEPS as f64;
            x = red.newton(x, k)?;
        }
        // Snap to the matching closed-form root and polish it.
        let best = red
            .cubic_roots()
            .iter()
            .filter_map(|r| red.newton(r.re, red.k).ok())
            .filter(|r| *r >= 0.0)
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()));
        match best {
            Some(r) if (r - x).abs() <= 1e-8 * x.abs().max(f64::MIN_POSITIVE) => r,
            _ => x,
        }
    };

    let q0 = -p.g_b() * x / p.omega_m;
    let beta0 = if p.eps_c == 0.0 {
        c64::new(0.0, 0.0)
    } else {
        red.s / (red.c - i * red.k * x)
    };
    let alpha0 = (p.eps_c - i * p.coupling * beta0) / red.u;

    let residual = mean_field_residual(p, alpha0, beta0, q0);
    if residual > RESIDUAL_TOLERANCE {
        return Err(Error::NonConvergence {
            iterations: CONTINUATION_STEPS,
            residual,
        });
    }

    let mut fields = SteadyStateFields {
        alpha0,
        beta0,
        q0,
        stable: false,
        max_real_eigenvalue: f64::NAN,
        residual,
    };
    let max_re = max_real_eigenvalue(&drift_matrix(p, &fields))?;
    fields.max_real_eigenvalue = max_re;
    fields.stable = max_re < 0.0;
    Ok(fields)
}

/// Largest residual of the three mean-field equations, divided by ε_c
/// (absolute when ε_c = 0).
pub fn mean_field_residual(p: &SystemParams, alpha0: c64, beta0: c64, q0: f64) -> f64 {
    let i = c64::i();
    let gb = p.g_b();
    let r1 =
        (c64::new(0.5 * p.kappa_a, p.delta_a()) * alpha0 + i * p.coupling * beta0 - p.eps_c).norm();
    let r2 =
        (c64::new(0.5 * p.kappa_b, p.delta_b() + gb * q0) * beta0 + i * p.coupling * alpha0).norm();
    let r3 = (p.omega_m * q0 + gb * beta0.norm_sqr()).abs();
    let scale = if p.eps_c > 0.0 { p.eps_c } else { 1.0 };
    r1.max(r2).max(r3) / scale
}

/// Drift matrix M of the linearized fluctuations, `d/dt x = M x + noise`,
/// in the basis (δa, δa†, δb, δb†, δq, δp).
pub fn drift_matrix(p: &SystemParams, ss: &SteadyStateFields) -> [[c64; 6]; 6] {
    let i = c64::i();
    let zero = c64::new(0.0, 0.0);
    let gb = p.g_b();
    let j = p.coupling;
    let db = p.delta_b() + gb * ss.q0;
    let b0 = ss.beta0;
    let mut m = [[zero; 6]; 6];
    m[0][0] = -c64::new(0.5 * p.kappa_a, p.delta_a());
    m[0][2] = -i * j;
    m[1][1] = -c64::new(0.5 * p.kappa_a, -p.delta_a());
    m[1][3] = i * j;
    m[2][2] = -c64::new(0.5 * p.kappa_b, db);
    m[2][0] = -i * j;
    m[2][4] = -i * gb * b0;
    m[3][3] = -c64::new(0.5 * p.kappa_b, -db);
    m[3][1] = i * j;
    m[3][4] = i * gb * b0.conj();
    m[4][5] = c64::new(p.omega_m, 0.0);
    m[5][4] = c64::new(-p.omega_m, 0.0);
    m[5][2] = -gb * b0.conj();
    m[5][3] = -gb * b0;
    m[5][5] = c64::new(-0.5 * p.gamma_m, 0.0);
    m
}

pub fn max_real_eigenvalue(m: &[[c64; 6]; 6]) -> Result<f64> {
    let mat = Mat::<c64>::from_fn(6, 6, |r, c| m[r][c]);
    let eig = mat
        .eigenvalues()
        .map_err(|e| Error::Domain(format!("drift-matrix eigensolver failed: {e:?}")))?;
    Ok(eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn solve2(m: [[c64; 2]; 2], rhs: [c64; 2]) -> [c64; 2] {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [
            (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
            (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
        ]
    }

    #[test]
    fn decoupled_driven_cavity() {
        let p = SystemParams {
            coupling: 0.0,
            g0: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&p).unwrap();
        let expected = p.eps_c / c64::new(0.5 * p.kappa_a, p.delta_a());
        assert_relative_eq!((ss.alpha0 - expected).norm(), 0.0, epsilon = 1e-18);
        assert_eq!(ss.beta0, c64::new(0.0, 0.0));
        assert_eq!(ss.q0, 0.0);
        assert!(ss.stable);
    }

    #[test]
    fn linear_limit_matches_two_by_two_solve() {
        let p = SystemParams {
            g0: 0.0,
            ..SystemParams::default()
        };
        let i = c64::i();
        let m = [
            [c64::new(0.5 * p.kappa_a, p.delta_a()), i * p.coupling],
            [i * p.coupling, c64::new(0.5 * p.kappa_b, p.delta_b())],
        ];
        let [a, b] = solve2(m, [c64::new(p.eps_c, 0.0), c64::new(0.0, 0.0)]);
        let ss = solve_steady_state(&p).unwrap();
        assert!((ss.alpha0 - a).norm() <= 1e-12 * a.norm());
        assert!((ss.beta0 - b).norm() <= 1e-12 * b.norm());
        assert_eq!(ss.q0, 0.0);
    }

    #[test]
    fn operating_point_matches_brute_force_cubic_root() {
        let p = SystemParams::default();
        let ss = solve_steady_state(&p).unwrap();
        assert!(ss.residual < RESIDUAL_TOLERANCE);
        assert!(ss.beta0.norm_sqr() < 1e-6);
        assert!(ss.q0.abs() < 1e-6);
        let q0 = -p.g_b() * ss.beta0.norm_sqr() / p.omega_m;
        assert!((ss.q0 - q0).abs() <= 1e-14 * q0.abs());
        assert!(ss.stable);

        // Brute force: scan the cubic in x on a log grid for sign changes and
        // bisect each bracket; the weak-drive root is the only physical one.
        let red = Reduced::new(&p);
        let f = |x: f64| red.eval(x, red.k).0;
        let mut roots = Vec::new();
        let grid: Vec<f64> = (0..4000)
            .map(|n| 10f64.powf(-20.0 + n as f64 * 0.01))
            .collect();
        for w in grid.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            if f(lo).signum() == f(hi).signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == f(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        assert!(!roots.is_empty());
        let smallest = roots[0];
        assert_relative_eq!(ss.beta0.norm_sqr(), smallest, max_relative = 1e-12);
    }

    #[test]
    fn cubic_formula_recovers_known_roots() {
        // (x − 1)(x − 2)(x + 3) = x³ − 7x + 6
        let mut r: Vec<f64> = cubic(0.0, -7.0, 6.0).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // x³ + x = 0 → 0, ±i
        let roots = cubic(0.0, 1.0, 0.0);
        assert!(roots.iter().any(|z| z.norm() < 1e-14));
        assert!(roots.iter().any(|z| (z - c64::i()).norm() < 1e-12));
    }

    #[test]
    fn strong_drive_bistable_branch_selection() {
        // Strong drive near the optomechanical resonance produces three
        // positive roots; continuation must stay on the lower branch.
        let p = SystemParams {
            eps_c: 30.0,
            g0: 2.0,
            delta: 30.5,
            ..SystemParams::default()
        };
        let red = Reduced::new(&p);
        let positive: Vec<f64> = red
            .cubic_roots()
            .iter()
            .filter(|z| z.im.abs() < 1e-6 * z.norm() && z.re > 0.0)
            .map(|z| z.re)
            .collect();
        let ss = solve_steady_state(&p).unwrap();
        assert!(ss.residual < RESIDUAL_TOLERANCE);
        let x = ss.beta0.norm_sqr();
        let lowest = positive.iter().cloned().fold(f64::INFINITY, f64::min);
        if positive.len() == 3 {
            assert_relative_eq!(x, lowest, max_relative = 1e-9);
        }
    }

    #[test]
    fn drift_matrix_of_decoupled_system() {
        let p = SystemParams {
            coupling: 0.0,
            g0: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&p).unwrap();
        // optical modes decay at κ/2, the mirror at γ_m/4
        assert_relative_eq!(
            ss.max_real_eigenvalue,
            -0.25 * p.gamma_m,
            max_relative = 1e-9
        );
    }
}
