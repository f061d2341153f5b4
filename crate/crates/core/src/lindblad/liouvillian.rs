//! Lindblad generator of the driven cavity / optomechanical cavity system in
//! the drive frame, as a sparse matrix on column-stacked density matrices
//! (`vec(ρ)[i + N·j] = ρ_ij`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`).

use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64 as c64;

use super::operators::{FockConfig, ModeOperators, Operator};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Default ceiling on the memory the generator and its factorization may use.
pub const DEFAULT_MEMORY_BUDGET: usize = 4 << 30;

/// Bytes per stored nonzero (value + row index) plus the expected LU fill
/// relative to the generator itself.
const BYTES_PER_NONZERO: usize = 24;
const FILL_FACTOR: usize = 40;

/// How the finite-temperature mirror bath is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalForm {
    /// (γ_m/2)(n̄+1)·D[c] + (γ_m/2)n̄·D[c†].
    Standard,
    /// (γ_m/2)·D[c] + γ_m n̄·(cρc† + c†ρc − c†cρ − ρcc†). Identical to the
    /// standard form when [c, c†] = 1, which fails only on the top retained
    /// phonon level.
    Grouped,
}

/// Compressed-column sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<c64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets, summing duplicates and
    /// dropping exact zeros.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, c64)>) -> Self {
        triplets.sort_unstable_by_key(|x| (x.1, x.0));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<c64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
                continue;
            }
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            n,
            col_ptr,
            row_idx,
            values,
        };
        m.prune();
        m
    }

    fn prune(&mut self) {
        let zero = c64::new(0.0, 0.0);
        let mut write = 0;
        let mut new_ptr = vec![0usize; self.n + 1];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if self.values[k] != zero {
                    self.row_idx[write] = self.row_idx[k];
                    self.values[write] = self.values[k];
                    write += 1;
                }
            }
            new_ptr[c + 1] = write;
        }
        self.row_idx.truncate(write);
        self.values.truncate(write);
        self.col_ptr = new_ptr;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.n).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1])
                .map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn matvec(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[c64], y: &mut [c64]) {
        y.fill(c64::new(0.0, 0.0));
        for c in 0..self.n {
            let xc = x[c];
            if xc == c64::new(0.0, 0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, c64>> {
        let trip: Vec<Triplet<usize, usize, c64>> = self
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip).map_err(|e| Error::LinearSolve {
            reason: format!("sparse assembly failed: {e:?}"),
            history: Vec::new(),
        })
    }
}

/// The generator L with `dρ/dt = L ρ`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub fock: FockConfig,
    pub matrix: SparseMatrix,
    /// Mean thermal phonon number used for the mirror bath.
    pub thermal_phonons: f64,
    pub gamma_m: f64,
}

impl Liouvillian {
    /// Hilbert-space dimension N (the generator is N² × N²).
    pub fn hilbert_dim(&self) -> usize {
        self.fock.dim()
    }

    /// L applied to a column-stacked ρ.
    pub fn apply(&self, rho_vec: &[c64]) -> Vec<c64> {
        self.matrix.matvec(rho_vec)
    }
}

/// Rotating-frame Hamiltonian
/// Δ_a a†a + Δ_b b†b + ω_m c†c + J(a†b + b†a) + g₀ b†b(c† + c) + iε_c(a† − a).
pub fn hamiltonian(p: &SystemParams, ops: &ModeOperators) -> Operator {
    let re = |x: f64| c64::new(x, 0.0);
    let (a, b, c) = (&ops.a, &ops.b, &ops.c);
    let (ad, bd, cd) = (a.adjoint(), b.adjoint(), c.adjoint());
    let nb = bd.mul(b);
    ad.mul(a)
        .scale(re(p.delta_a()))
        .add(&nb.scale(re(p.delta_b())))
        .add(&cd.mul(c).scale(re(p.omega_m)))
        .add(&ad.mul(b).add(&bd.mul(a)).scale(re(p.coupling)))
        .add(&nb.mul(&cd.add(c)).scale(re(p.g0)))
        .add(&ad.sub(a).scale(c64::new(0.0, p.eps_c)))
}

struct SuperBuilder {
    n: usize,
    triplets: Vec<(usize, usize, c64)>,
}

impl SuperBuilder {
    /// ρ ↦ s·Aρ
    fn pre(&mut self, a: &Operator, s: c64) {
        let n = self.n;
        for (i, k, v) in a.entries() {
            for j in 0..n {
                self.triplets.push((i + n * j, k + n * j, s * v));
            }
        }
    }

    /// ρ ↦ s·ρB
    fn post(&mut self, b: &Operator, s: c64) {
        let n = self.n;
        for (k, j, v) in b.entries() {
            for i in 0..n {
                self.triplets.push((i + n * j, i + n * k, s * v));
            }
        }
    }

    /// ρ ↦ s·AρB
    fn sandwich(&mut self, a: &Operator, b: &Operator, s: c64) {
        let n = self.n;
        for (i, k, va) in a.entries() {
            for (l, j, vb) in b.entries() {
                self.triplets.push((i + n * j, k + n * l, s * va * vb));
            }
        }
    }

    /// rate·(2LρL† − L†Lρ − ρL†L)/2
    fn dissipator(&mut self, l: &Operator, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let ld = l.adjoint();
        let ldl = ld.mul(l);
        self.sandwich(l, &ld, c64::new(rate, 0.0));
        self.pre(&ldl, c64::new(-0.5 * rate, 0.0));
        self.post(&ldl, c64::new(-0.5 * rate, 0.0));
    }
}

/// Rough memory need of the generator plus its sparse factorization.
pub fn estimated_bytes(p: &SystemParams, fock: &FockConfig) -> usize {
    let n = fock.dim();
    // Nonzeros per Hilbert row of H: diagonal, two hopping terms, two
    // phonon terms, two drive terms.
    let h_row = if p.eps_c != 0.0 { 7 } else { 5 };
    let per_column = 2 * h_row + 6;
    n.saturating_mul(n)
        .saturating_mul(per_column)
        .saturating_mul(BYTES_PER_NONZERO)
        .saturating_mul(FILL_FACTOR)
}

pub fn build_liouvillian(p: &SystemParams, fock: &FockConfig) -> Result<Liouvillian> {
    build_liouvillian_with(p, fock, ThermalForm::Standard, DEFAULT_MEMORY_BUDGET)
}

pub fn build_liouvillian_with(
    p: &SystemParams,
    fock: &FockConfig,
    form: ThermalForm,
    memory_budget: usize,
) -> Result<Liouvillian> {
    fock.validate()?;
    let required = estimated_bytes(p, fock);
    if required > memory_budget {
        return Err(Error::Resource {
            required,
            budget: memory_budget,
        });
    }
    let nbar = p.thermal_phonons()?;
    let ops = ModeOperators::new(fock);
    let h = hamiltonian(p, &ops);
    let n = fock.dim();
    let mut sb = SuperBuilder {
        n,
        triplets: Vec::with_capacity(n * n * 16),
    };

    // −i[H, ρ]
    sb.pre(&h, c64::new(0.0, -1.0));
    sb.post(&h, c64::new(0.0, 1.0));

    sb.dissipator(&ops.a, p.kappa_a);
    sb.dissipator(&ops.b, p.kappa_b);
    match form {
        ThermalForm::Standard => {
            sb.dissipator(&ops.c, p.gamma_m * (nbar + 1.0));
            sb.dissipator(&ops.c.adjoint(), p.gamma_m * nbar);
        }
        ThermalForm::Grouped => {
            sb.dissipator(&ops.c, p.gamma_m);
            let c = &ops.c;
            let cd = c.adjoint();
            let w = c64::new(p.gamma_m * nbar, 0.0);
            sb.sandwich(c, &cd, w);
            sb.sandwich(&cd, c, w);
            sb.pre(&cd.mul(c), -w);
            sb.post(&c.mul(&cd), -w);
        }
    }

    Ok(Liouvillian {
        fock: *fock,
        matrix: SparseMatrix::from_triplets(n * n, sb.triplets),
        thermal_phonons: nbar,
        gamma_m: p.gamma_m,
    })
}
