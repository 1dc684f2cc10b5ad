//! Block eigensystems: closed form on the resonance surface, and an
//! independent numerical route for arbitrary parameters.

use rayon::prelude::*;

use crate::dual_hahn::{lattice, DualHahnBasis, DualHahnParams};
use crate::error::{Error, Result};
use crate::fock::{BlockCoord, Sector};
use crate::hamiltonian::{build_block_direct, direct_tridiagonal, resonance_check, ModelParams, TridiagonalBlock, RESONANCE_TOL};
use crate::linalg::{symmetric_eigen, tridiagonal_eigen, Matrix, SymmetricEigen};
use crate::scalar::{cst, Real};

/// Eigenpairs of one block. Energies ascend; column `j` of `vectors` holds
/// the components of eigenvector `j` over `|2k+p, M-k>`, `k = 0..=M`.
#[derive(Clone, Debug)]
pub struct BlockEigensystem<T> {
    pub sector: Sector,
    pub energies: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> BlockEigensystem<T> {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max |H V - V diag(E)|`.
    pub fn residual(&self, h: &Matrix<T>) -> T {
        let hv = h.matmul(&self.vectors);
        let n = self.dim();
        let ve = Matrix::from_fn(n, n, |r, c| self.vectors[(r, c)] * self.energies[c]);
        hv.max_abs_diff(&ve)
    }

    pub fn orthogonality_residual(&self) -> T {
        self.vectors.orthogonality_residual()
    }

    /// Flip columns so the first component above a small relative threshold
    /// is positive.
    pub fn fix_signs(&mut self) {
        let n = self.dim();
        for c in 0..n {
            let col = self.vectors.column(c);
            let big = col.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let thresh = big * cst(1e-8);
            if let Some(first) = col.iter().find(|x| x.abs() > thresh) {
                if *first < T::zero() {
                    for r in 0..n {
                        self.vectors[(r, c)] = -self.vectors[(r, c)];
                    }
                }
            }
        }
    }

    pub fn energy_sum(&self) -> T {
        self.energies.iter().copied().sum()
    }

    pub fn energy_product(&self) -> T {
        self.energies.iter().fold(T::one(), |a, &e| a * e)
    }
}

/// Closed-form eigensystem via dual Hahn polynomials with `γ = p - 1/2`,
/// `δ = 0`, `N = M`. Requires the resonance constraints and `g != 0`.
///
/// Lattice-order eigenvalue `l` is `E_l = 2gλ_l + C_{p,M}`, eigenvector
/// components `sqrt(ρ_l) P_k(λ_l)`. For `g < 0` that order is descending, so
/// the columns are reversed to keep energies ascending.
pub fn solve_analytic<T: Real>(params: &ModelParams<T>, sector: Sector) -> Result<BlockEigensystem<T>> {
    params.validate()?;
    if params.g == T::zero() {
        return Err(Error::ZeroCoupling);
    }
    resonance_check(params, cst(RESONANCE_TOL)).into_result()?;
    let basis = DualHahnBasis::new(DualHahnParams::for_block(sector.p(), sector.m()))?;
    Ok(eigensystem_from_basis(params, sector, &basis))
}

pub(crate) fn analytic_energies<T: Real>(params: &ModelParams<T>, sector: Sector) -> Vec<T> {
    let two_g = cst::<T>(2.0) * params.g;
    let shift = params.block_shift(sector);
    lattice(&DualHahnParams::<T>::for_block(sector.p(), sector.m())).0.into_iter().map(|lam| two_g * lam + shift).collect()
}

fn eigensystem_from_basis<T: Real>(params: &ModelParams<T>, sector: Sector, basis: &DualHahnBasis<T>) -> BlockEigensystem<T> {
    let n = sector.dim();
    let energies = analytic_energies(params, sector);
    let w = basis.transform.matrix();
    let order: Vec<usize> = if params.g > T::zero() { (0..n).collect() } else { (0..n).rev().collect() };
    let vectors = Matrix::from_fn(n, n, |k, j| w[(order[j], k)]);
    BlockEigensystem { sector, energies: order.iter().map(|&l| energies[l]).collect(), vectors }
}

/// Numerical eigensystem of a tridiagonal block (implicit QL).
pub fn solve_numeric<T: Real>(block: &TridiagonalBlock<T>) -> Result<BlockEigensystem<T>> {
    let SymmetricEigen { values, vectors } = tridiagonal_eigen(&block.diag, &block.offdiag)
        .map_err(|_| Error::NoConvergence { p: block.sector.p(), m: block.sector.m() })?;
    let mut sys = BlockEigensystem { sector: block.sector, energies: values, vectors };
    sys.fix_signs();
    Ok(sys)
}

/// Numerical eigensystem of a dense symmetric block (Householder + QL).
pub fn solve_numeric_dense<T: Real>(sector: Sector, h: &Matrix<T>) -> Result<BlockEigensystem<T>> {
    if !h.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let SymmetricEigen { values, vectors } =
        symmetric_eigen(h).map_err(|_| Error::NoConvergence { p: sector.p(), m: sector.m() })?;
    let mut sys = BlockEigensystem { sector, energies: values, vectors };
    sys.fix_signs();
    Ok(sys)
}

/// How a block's eigensystem is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Closed form when the parameters are resonant, numeric otherwise.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

pub fn solve_block<T: Real>(params: &ModelParams<T>, sector: Sector, choice: SolverChoice) -> Result<BlockEigensystem<T>> {
    match choice {
        SolverChoice::Analytic => solve_analytic(params, sector),
        SolverChoice::Numeric => solve_numeric(&direct_tridiagonal(params, sector)),
        SolverChoice::Auto => {
            if resonance_check(params, cst(RESONANCE_TOL)).satisfied {
                solve_analytic(params, sector)
            } else {
                solve_numeric(&direct_tridiagonal(params, sector))
            }
        }
    }
}

/// Solve a set of blocks in parallel; output follows the input order.
pub fn solve_blocks<T: Real>(
    params: &ModelParams<T>,
    sectors: &[Sector],
    choice: SolverChoice,
) -> Result<Vec<BlockEigensystem<T>>> {
    sectors.par_iter().map(|&s| solve_block(params, s, choice)).collect()
}

/// Coefficients of `|2k+p, M-k>` over the eigenvectors, indexed by the
/// lattice label `l` (ascending `λ_l`): `sqrt(ρ_l) P_k(λ_l)`.
pub fn fock_in_eigenbasis<T: Real>(params: &ModelParams<T>, coord: BlockCoord) -> Result<Vec<T>> {
    params.validate()?;
    if params.g == T::zero() {
        return Err(Error::ZeroCoupling);
    }
    resonance_check(params, cst(RESONANCE_TOL)).into_result()?;
    let dh = DualHahnParams::for_block(coord.p(), coord.m());
    let w = crate::dual_hahn::transform_matrix(&dh)?;
    Ok((0..=coord.m()).map(|l| w.matrix()[(l, coord.k())]).collect())
}

/// Worst-case disagreement between two eigensystems of the same block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison<T> {
    /// `max_l |E_a - E_b| / (1 + max |E|)`.
    pub energy: T,
    /// Unscaled `max_l |E_a - E_b|`.
    pub energy_abs: T,
    /// Max-norm distance of sign-fixed vectors (or of cluster projectors
    /// for near-degenerate energies).
    pub vectors: T,
}

/// Gap below which eigenvalues are treated as one cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Compare two eigensystems by sorted energy order. Both are sign-fixed
/// first; near-degenerate clusters compare spectral projectors instead of
/// individual vectors.
pub fn compare<T: Real>(a: &BlockEigensystem<T>, b: &BlockEigensystem<T>) -> Comparison<T> {
    assert_eq!(a.dim(), b.dim(), "comparing blocks of different size");
    let mut a = a.clone();
    let mut b = b.clone();
    a.fix_signs();
    b.fix_signs();
    let n = a.dim();
    let scale = a.energies.iter().chain(&b.energies).fold(T::zero(), |m, e| m.max(e.abs()));
    let energy_abs = a.energies.iter().zip(&b.energies).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));

    let gap = cst::<T>(DEGENERACY_GAP);
    let mut vectors = T::zero();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (a.energies[end] - a.energies[end - 1]).abs() < gap * (T::one() + scale) {
            end += 1;
        }
        if end - start == 1 {
            for r in 0..n {
                vectors = vectors.max((a.vectors[(r, start)] - b.vectors[(r, start)]).abs());
            }
        } else {
            for r in 0..n {
                for c in 0..n {
                    let pa: T = (start..end).map(|j| a.vectors[(r, j)] * a.vectors[(c, j)]).sum();
                    let pb: T = (start..end).map(|j| b.vectors[(r, j)] * b.vectors[(c, j)]).sum();
                    vectors = vectors.max((pa - pb).abs());
                }
            }
        }
        start = end;
    }
    Comparison { energy: energy_abs / (T::one() + scale), energy_abs, vectors }
}

/// Eigenvalue count over all sectors with `2M + p <= r_max`.
pub fn eigenvalue_count(r_max: usize) -> usize {
    Sector::up_to_charge(r_max).iter().map(|s| s.dim()).sum()
}

/// Number of number states with `n1 + 2 n2 <= r_max`.
pub fn fock_state_count(r_max: usize) -> usize {
    (0..=r_max / 2).map(|n2| r_max - 2 * n2 + 1).sum()
}

/// Spectral residual scaled by the block norm, for both solvers.
pub fn scaled_residual<T: Real>(params: &ModelParams<T>, sys: &BlockEigensystem<T>) -> T {
    let h = build_block_direct(params, sys.sector);
    sys.residual(&h) / h.max_abs().max(T::one())
}
