//! Hamiltonian blocks
//!
//! ```text
//! H = ω₁ n₁ + ω₂ n₂ + K₁ n₁² + K₂ n₂² + g (√n₂ a₁² a₂† + a₁†² a₂ √n₂)
//! ```
//!
//! restricted to the sectors `(p, M)`. Each block is real symmetric
//! tridiagonal in the basis `|2k+p, M-k>`. It is built two ways: directly
//! from ladder-operator matrix elements (valid for every parameter set) and
//! from the closed-form coefficients `2g a_k + C`, `2g b_k` (needs `g != 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{decompose, FockLabel, Sector};
use crate::linalg::Matrix;
use crate::scalar::{cst, from_usize, to_f64, Real};

/// Residual tolerance used when deciding whether the closed-form spectrum applies.
pub const RESONANCE_TOL: f64 = 1e-9;

/// The five Hamiltonian constants (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams<T> {
    pub omega1: T,
    pub omega2: T,
    #[serde(rename = "K1")]
    pub k1: T,
    #[serde(rename = "K2")]
    pub k2: T,
    pub g: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(omega1: T, omega2: T, k1: T, k2: T, g: T) -> Result<Self> {
        let p = Self { omega1, omega2, k1, k2, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.omega1, self.omega2, self.k1, self.k2, self.g].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Point on the resonance surface with the given coupling and first-mode
    /// frequency: `ω₂ = 2ω₁ - g`, `K₁ = -g/2`, `K₂ = -2g`.
    pub fn resonance(g: T, omega1: T) -> Result<Self> {
        resonance_params(g, omega1)
    }

    /// Block constant `C_{p,M} = -2gM(p+1/2) + ω₁p + ω₂M + K₁p + K₂M²`.
    ///
    /// The `K₁p` term is written as in the block decomposition; it equals
    /// `K₁p²` since `p ∈ {0, 1}`.
    pub fn block_shift(&self, sector: Sector) -> T {
        let p = from_usize::<T>(sector.p() as usize);
        let m = from_usize::<T>(sector.m());
        -cst::<T>(2.0) * self.g * m * (p + cst(0.5)) + self.omega1 * p + self.omega2 * m + self.k1 * p + self.k2 * m * m
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: serde::de::DeserializeOwned,
    {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Diagonal matrix element `<n1,n2|H|n1,n2>`.
pub fn diagonal_energy<T: Real>(params: &ModelParams<T>, label: FockLabel) -> T {
    let n1 = from_usize::<T>(label.n1);
    let n2 = from_usize::<T>(label.n2);
    params.omega1 * n1 + params.omega2 * n2 + params.k1 * n1 * n1 + params.k2 * n2 * n2
}

/// `<row| H |col>` for arbitrary number states.
///
/// The down-conversion term connects `|n1, n2>` with `|n1+2, n2-1>`; with
/// `√n₂` acting as multiplication on number states its element is
/// `g · n₂ · sqrt((n1+1)(n1+2))`, where `n₂` is the mode-2 count of the state
/// carrying the extra pump photon.
pub fn matrix_element<T: Real>(params: &ModelParams<T>, row: FockLabel, col: FockLabel) -> T {
    if row == col {
        return diagonal_energy(params, col);
    }
    let pair = |lo: FockLabel, hi: FockLabel| hi.n1 == lo.n1 + 2 && lo.n2 == hi.n2 + 1;
    let lo = if pair(row, col) {
        row
    } else if pair(col, row) {
        col
    } else {
        return T::zero();
    };
    let n1 = from_usize::<T>(lo.n1);
    params.g * from_usize::<T>(lo.n2) * ((n1 + T::one()) * (n1 + cst(2.0))).sqrt()
}

/// One symmetric tridiagonal block: full diagonal, off-diagonal, and the
/// scalar shift `C_{p,M}` that is already included in `diag`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalBlock<T> {
    pub sector: Sector,
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
    pub shift: T,
}

impl<T: Real> TridiagonalBlock<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(n, n, |r, c| {
            if r == c {
                self.diag[r]
            } else if r + 1 == c {
                self.offdiag[r]
            } else if c + 1 == r {
                self.offdiag[c]
            } else {
                T::zero()
            }
        })
    }

    pub fn trace(&self) -> T {
        self.diag.iter().copied().sum()
    }

    pub fn max_abs(&self) -> T {
        self.diag.iter().chain(&self.offdiag).fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Determinant by the continuant recurrence.
    pub fn determinant(&self) -> T {
        let mut prev = T::one();
        let mut cur = match self.diag.first() {
            Some(&d) => d,
            None => return T::one(),
        };
        for k in 1..self.dim() {
            let next = self.diag[k] * cur - self.offdiag[k - 1] * self.offdiag[k - 1] * prev;
            prev = cur;
            cur = next;
        }
        cur
    }
}

/// Block from ladder-operator matrix elements, as a dense symmetric matrix.
pub fn build_block_direct<T: Real>(params: &ModelParams<T>, sector: Sector) -> Matrix<T> {
    let n = sector.dim();
    let labels: Vec<FockLabel> = sector.labels().collect();
    let mut h = Matrix::zeros(n, n);
    for k in 0..n {
        h[(k, k)] = matrix_element(params, labels[k], labels[k]);
        if k + 1 < n {
            let v = matrix_element(params, labels[k], labels[k + 1]);
            h[(k, k + 1)] = v;
            h[(k + 1, k)] = v;
        }
    }
    h
}

/// The direct block in tridiagonal storage (`shift` is zero here).
pub fn direct_tridiagonal<T: Real>(params: &ModelParams<T>, sector: Sector) -> TridiagonalBlock<T> {
    let labels: Vec<FockLabel> = sector.labels().collect();
    let diag = labels.iter().map(|&l| matrix_element(params, l, l)).collect();
    let offdiag = labels.windows(2).map(|w| matrix_element(params, w[0], w[1])).collect();
    TridiagonalBlock { sector, diag, offdiag, shift: T::zero() }
}

/// Block from the closed-form coefficients `a_k`, `b_k` and shift `C_{p,M}`.
pub fn build_block_formula<T: Real>(params: &ModelParams<T>, sector: Sector) -> Result<TridiagonalBlock<T>> {
    params.validate()?;
    if params.g == T::zero() {
        return Err(Error::ZeroCoupling);
    }
    let two_g = cst::<T>(2.0) * params.g;
    let p = from_usize::<T>(sector.p() as usize);
    let m = from_usize::<T>(sector.m());
    let half = cst::<T>(0.5);
    let quad = cst::<T>(4.0) * params.k1 + params.k2;
    let lin = cst::<T>(2.0) * params.omega1 - params.omega2 + cst::<T>(4.0) * p * params.k1
        - cst::<T>(2.0) * m * params.k2;
    let shift = params.block_shift(sector);

    let mut diag = Vec::with_capacity(sector.dim());
    let mut offdiag = Vec::with_capacity(sector.m());
    for k in 0..=sector.m() {
        let kk = from_usize::<T>(k);
        let a = kk * kk * quad / two_g + kk * lin / two_g + m * (p + half);
        diag.push(two_g * a + shift);
        if k < sector.m() {
            let b = (m - kk) * ((kk + T::one()) * (kk + p + half)).sqrt();
            offdiag.push(two_g * b);
        }
    }
    Ok(TridiagonalBlock { sector, diag, offdiag, shift })
}

/// Outcome of testing the three resonance constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceCheck<T> {
    /// `(2ω₁ - ω₂ - g, 2K₁ + g, K₂ + 2g)`.
    pub residuals: [T; 3],
    pub satisfied: bool,
}

impl<T: Real> ResonanceCheck<T> {
    pub fn into_result(self) -> Result<()> {
        if self.satisfied {
            Ok(())
        } else {
            let [a, b, c] = self.residuals;
            Err(Error::NotResonant(to_f64(a), to_f64(b), to_f64(c)))
        }
    }
}

/// Residuals of the resonance constraints. `g = 0` is never reported as
/// satisfied, since the closed-form spectrum needs a nonzero coupling.
pub fn resonance_check<T: Real>(params: &ModelParams<T>, tol: T) -> ResonanceCheck<T> {
    let two = cst::<T>(2.0);
    let residuals = [
        two * params.omega1 - params.omega2 - params.g,
        two * params.k1 + params.g,
        params.k2 + two * params.g,
    ];
    let satisfied = params.g != T::zero() && residuals.iter().all(|r| r.abs() <= tol);
    ResonanceCheck { residuals, satisfied }
}

pub fn resonance_params<T: Real>(g: T, omega1: T) -> Result<ModelParams<T>> {
    if g == T::zero() {
        return Err(Error::ZeroCoupling);
    }
    let two = cst::<T>(2.0);
    ModelParams::new(omega1, two * omega1 - g, -g / two, -two * g, g)
}

/// Whether `H` couples two number states that sit in different sectors.
pub fn couples_sectors<T: Real>(params: &ModelParams<T>, a: FockLabel, b: FockLabel) -> bool {
    decompose(a).sector() != decompose(b).sector() && matrix_element(params, a, b) != T::zero()
}
