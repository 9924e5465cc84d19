//! Sparse Cholesky factorization with iterative refinement.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::LltRegularization;
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LltRef, SymbolicCholesky, SymmetricOrdering};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat, Par, Side};

use super::sparse::SymmetricCsc;
use crate::{Error, Result};

/// Target relative residual of the refined solution.
pub const TARGET_RESIDUAL: f64 = 1e-12;
/// Solutions with a larger relative residual are rejected.
pub const MAX_RESIDUAL: f64 = 1e-10;
const MAX_REFINEMENT: usize = 4;

pub struct Cholesky {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    /// Symmetric diagonal scaling `S = diag(1/√a_ii)`; the factor is of
    /// `S A S`.
    scale: Vec<f64>,
    par: Par,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub residual: f64,
    pub refinement_steps: usize,
    pub factor_entries: usize,
}

fn parallelism() -> Par {
    let threads = rayon::current_num_threads();
    if threads > 1 {
        Par::rayon(threads)
    } else {
        Par::Seq
    }
}

impl Cholesky {
    /// Factorizes the diagonally scaled matrix `S A S = L Lᵀ` after the
    /// symmetric permutation `order` (`order[new] = old`), or an approximate
    /// minimum degree ordering when none is given.
    pub fn factorize(matrix: &SymmetricCsc, order: Option<&[usize]>) -> Result<Self> {
        let n = matrix.dim();
        let mut scale = Vec::with_capacity(n);
        for i in 0..n {
            let d = matrix.get(i, i);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Solver(format!("matrix is not positive definite: diagonal entry {i} is {d:e}")));
            }
            scale.push(1.0 / d.sqrt());
        }
        let symbolic_a = SymbolicSparseColMatRef::new_checked(n, n, matrix.col_ptr(), None, matrix.row_idx());
        let inverse: Vec<usize>;
        let ordering = match order {
            Some(fwd) => {
                if fwd.len() != n {
                    return Err(Error::invalid("ordering length differs from the matrix dimension"));
                }
                let mut inv = vec![usize::MAX; n];
                for (new, &old) in fwd.iter().enumerate() {
                    if old >= n || inv[old] != usize::MAX {
                        return Err(Error::invalid("ordering is not a permutation"));
                    }
                    inv[old] = new;
                }
                inverse = inv;
                SymmetricOrdering::Custom(PermRef::new_checked(fwd, &inverse, n))
            }
            None => SymmetricOrdering::Amd,
        };
        let symbolic = factorize_symbolic_cholesky(symbolic_a, Side::Lower, ordering, Default::default())
            .map_err(|e| Error::Solver(format!("symbolic factorization failed: {e:?}")))?;
        let par = parallelism();
        let mut values = Vec::new();
        values
            .try_reserve_exact(symbolic.len_val())
            .map_err(|_| Error::Solver(format!("cannot allocate {} factor entries", symbolic.len_val())))?;
        values.resize(symbolic.len_val(), 0.0);
        let mut mem = MemBuffer::try_new(symbolic.factorize_numeric_llt_scratch::<f64>(par, Default::default()))
            .map_err(|_| Error::Solver("cannot allocate factorization workspace".into()))?;
        let mut scaled = matrix.values().to_vec();
        for j in 0..n {
            for p in matrix.col_ptr()[j]..matrix.col_ptr()[j + 1] {
                scaled[p] *= scale[matrix.row_idx()[p]] * scale[j];
            }
        }
        let a = SparseColMatRef::new(symbolic_a, &scaled);
        symbolic
            .factorize_numeric_llt(
                &mut values,
                a,
                Side::Lower,
                LltRegularization::default(),
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| Error::Solver(format!("matrix is not positive definite: {e:?}")))?;
        drop(scaled);
        Ok(Cholesky { symbolic, values, scale, par })
    }

    pub fn factor_entries(&self) -> usize {
        self.values.len()
    }

    /// Overwrites each column of `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut Mat<f64>) {
        let scale_rows = |m: &mut Mat<f64>| {
            for j in 0..m.ncols() {
                for (i, s) in self.scale.iter().enumerate() {
                    m[(i, j)] *= s;
                }
            }
        };
        scale_rows(rhs);
        let llt = LltRef::new(&self.symbolic, &self.values);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(rhs.ncols(), self.par));
        llt.solve_in_place_with_conj(Conj::No, rhs.as_mut(), self.par, MemStack::new(&mut mem));
        scale_rows(rhs);
    }

    /// Solves for every right-hand side, refining until the relative
    /// residual reaches [`TARGET_RESIDUAL`].
    pub fn solve(&self, matrix: &SymmetricCsc, rhs: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, SolveStats)>> {
        let n = matrix.dim();
        let k = rhs.len();
        let mut x = Mat::<f64>::from_fn(n, k, |i, j| rhs[j][i]);
        self.solve_in_place(&mut x);
        let mut steps = vec![0usize; k];
        let mut residuals = vec![0.0; k];
        let mut ax = vec![0.0; n];
        for _ in 0..=MAX_REFINEMENT {
            let mut correction = Mat::<f64>::zeros(n, k);
            let mut pending = false;
            for j in 0..k {
                let xj: Vec<f64> = (0..n).map(|i| x[(i, j)]).collect();
                matrix.mul_vec(&xj, &mut ax);
                let norm_b = norm(&rhs[j]);
                let mut r2 = 0.0;
                for i in 0..n {
                    let r = rhs[j][i] - ax[i];
                    correction[(i, j)] = r;
                    r2 += r * r;
                }
                residuals[j] = if norm_b > 0.0 { r2.sqrt() / norm_b } else { r2.sqrt() };
                if residuals[j] > TARGET_RESIDUAL && steps[j] < MAX_REFINEMENT {
                    pending = true;
                }
            }
            if !pending {
                break;
            }
            self.solve_in_place(&mut correction);
            for j in 0..k {
                if residuals[j] > TARGET_RESIDUAL && steps[j] < MAX_REFINEMENT {
                    steps[j] += 1;
                    for i in 0..n {
                        x[(i, j)] += correction[(i, j)];
                    }
                }
            }
        }
        (0..k)
            .map(|j| {
                if !(residuals[j] <= MAX_RESIDUAL) {
                    return Err(Error::Solver(format!(
                        "relative residual {:.3e} exceeds {MAX_RESIDUAL:e} after {} refinement steps",
                        residuals[j], steps[j]
                    )));
                }
                let stats =
                    SolveStats { residual: residuals[j], refinement_steps: steps[j], factor_entries: self.values.len() };
                Ok(((0..n).map(|i| x[(i, j)]).collect(), stats))
            })
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
