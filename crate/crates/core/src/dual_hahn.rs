//! Orthonormal dual Hahn polynomials `P_k(λ_l; γ, δ, N)`.
//!
//! The family lives on the quadratic lattice `λ_l = l (l + γ + δ + 1)`,
//! `l = 0..=N`, and is fixed by the three-term recurrence
//!
//! ```text
//! λ P_k(λ) = b_k P_{k+1}(λ) + a_k P_k(λ) + b_{k-1} P_{k-1}(λ)
//! a_k = (k+γ+1)(N-k) + k(N+δ+1-k)
//! b_k = sqrt((k+1)(k+γ+1)(N-k)(N+δ-k))
//! ```
//!
//! with `b_k > 0` and `P_0` a positive constant. The lattice points are the
//! eigenvalues of the Jacobi matrix built from `(a_k, b_k)`, so the column
//! `(P_0(λ_l), …, P_N(λ_l))` is an eigenvector of that matrix.
//!
//! Two evaluation routes are provided:
//!
//! * [`recurrence_column`] runs the recurrence from both ends and splices the
//!   two runs where the local pivot is smallest. Plain forward recurrence
//!   loses all accuracy by `N ≈ 50` because the columns decay by thirty
//!   orders of magnitude across the lattice.
//! * [`eval_hypergeometric`] sums the terminating `₃F₂` closed form in exact
//!   rational arithmetic, then applies the square-root prefactor. The closed
//!   form carries the opposite sign convention: it equals `(-1)^k` times the
//!   recurrence values.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{cst, from_usize, ln_factorial, ln_pochhammer, to_f64, Real};

/// `(γ, δ, N)` with `γ > -1`, `δ > -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualHahnParams<T> {
    gamma: T,
    delta: T,
    n: usize,
}

impl<T: Real> DualHahnParams<T> {
    pub fn new(gamma: T, delta: T, n: usize) -> Result<Self> {
        if !(gamma > -T::one() && delta > -T::one()) {
            return Err(Error::DualHahnParams { gamma: to_f64(gamma), delta: to_f64(delta) });
        }
        Ok(Self { gamma, delta, n })
    }

    /// Parameters that diagonalize the Hamiltonian block `(p, M)` on the
    /// resonance surface: `γ = p - 1/2`, `δ = 0`, `N = M`.
    pub fn for_block(p: u8, m: usize) -> Self {
        Self { gamma: from_usize::<T>(p as usize) - cst(0.5), delta: T::zero(), n: m }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i > self.n {
            return Err(Error::OutOfRange { index: i, max: self.n });
        }
        Ok(())
    }
}

/// Lattice points `λ_0 < λ_1 < … < λ_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<T>(pub Vec<T>);

impl<T> Lattice<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }
}

pub fn lattice<T: Real>(params: &DualHahnParams<T>) -> Lattice<T> {
    let s = params.gamma + params.delta + T::one();
    Lattice((0..=params.n).map(|l| lattice_point(l, s)).collect())
}

fn lattice_point<T: Real>(l: usize, s: T) -> T {
    let l = from_usize::<T>(l);
    l * (l + s)
}

/// `(a_k, b_k)`; `b_N = 0`.
pub fn recurrence_coeffs<T: Real>(params: &DualHahnParams<T>, k: usize) -> Result<(T, T)> {
    params.check_index(k)?;
    Ok(coeffs_unchecked(params, k))
}

fn coeffs_unchecked<T: Real>(params: &DualHahnParams<T>, k: usize) -> (T, T) {
    let n = from_usize::<T>(params.n);
    let kk = from_usize::<T>(k);
    let (g, d) = (params.gamma, params.delta);
    let a = (kk + g + T::one()) * (n - kk) + kk * (n + d + T::one() - kk);
    let b = if k == params.n {
        T::zero()
    } else {
        ((kk + T::one()) * (kk + g + T::one()) * (n - kk) * (n + d - kk)).sqrt()
    };
    (a, b)
}

/// Weights `ρ_N(l; γ, δ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable<T>(pub Vec<T>);

impl<T: Real> WeightTable<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }
}

/// Orthogonality weights on the lattice.
///
/// The alternating factor `(-N)_l / (-1)^l` is replaced by `N!/(N-l)!`, so the
/// remaining factors are all accumulated as logarithms of positive numbers
/// (with sign tracking for the rare `γ + δ + 1 <= 0` case).
pub fn weights<T: Real>(params: &DualHahnParams<T>) -> Result<WeightTable<T>> {
    let n = params.n;
    let (g, d) = (params.gamma, params.delta);
    let s = g + d + T::one();
    let mut out = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let ll = from_usize::<T>(l);
        let lead = ll + ll + s;
        let (s1, p_gamma) = ln_pochhammer(g + T::one(), l);
        let (s2, p_shift) = ln_pochhammer(ll + s, n + 1);
        let (s3, p_delta) = ln_pochhammer(d + T::one(), l);
        let sign = lead.signum() * s1 * s2 * s3;
        if sign <= T::zero() || lead == T::zero() {
            return Err(Error::NonPositiveWeight { n, l });
        }
        let ln_rho = lead.abs().ln() + p_gamma + cst::<T>(2.0) * ln_factorial::<T>(n)
            - ln_factorial::<T>(n - l)
            - p_shift
            - p_delta
            - ln_factorial::<T>(l);
        let rho = ln_rho.exp();
        if !(rho > T::zero() && rho.is_finite()) {
            return Err(Error::WeightRange { n, l });
        }
        out.push(rho);
    }
    Ok(WeightTable(out))
}

/// `P_0 = sqrt(Γ(δ+N+1) / (N! Γ(δ+1)))`; equal to 1 when `δ = 0`.
pub fn p0<T: Real>(params: &DualHahnParams<T>) -> T {
    let d = params.delta;
    let n = params.n;
    let ln = (d + from_usize::<T>(n) + T::one()).ln_gamma() - ln_factorial::<T>(n) - (d + T::one()).ln_gamma();
    (cst::<T>(0.5) * ln).exp()
}

/// `(P_0(λ_l), …, P_N(λ_l))` in the recurrence convention.
///
/// The recurrence is run downward from `k = N` and upward from `k = 0`
/// (the pivots of the `LDLᵀ` and `UDUᵀ` factorizations of `J - λ_l`), and the
/// two runs are joined at the index where the twisted pivot is smallest.
/// The column is then scaled so that its first entry equals `P_0`.
pub fn recurrence_column<T: Real>(params: &DualHahnParams<T>, l: usize) -> Result<Vec<T>> {
    params.check_index(l)?;
    let n = params.n;
    let lambda = lattice_point(l, params.gamma + params.delta + T::one());
    let mut a = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n);
    for k in 0..=n {
        let (ak, bk) = coeffs_unchecked(params, k);
        a.push(ak - lambda);
        if k < n {
            if bk <= T::zero() {
                return Err(Error::DegenerateRecurrence { k, n });
            }
            b.push(bk);
        }
    }
    let scale = a.iter().chain(&b).fold(T::one(), |m, x| m.max(x.abs()));
    let tiny = T::epsilon() * T::epsilon() * scale;
    let guard = |x: T| if x == T::zero() { tiny } else { x };

    let mut fwd = vec![T::zero(); n + 1];
    fwd[0] = a[0];
    for k in 1..=n {
        fwd[k] = a[k] - b[k - 1] * b[k - 1] / guard(fwd[k - 1]);
    }
    let mut bwd = vec![T::zero(); n + 1];
    bwd[n] = a[n];
    for k in (0..n).rev() {
        bwd[k] = a[k] - b[k] * b[k] / guard(bwd[k + 1]);
    }
    let twist = (0..=n)
        .min_by(|&i, &j| {
            let gi = (fwd[i] + bwd[i] - a[i]).abs();
            let gj = (fwd[j] + bwd[j] - a[j]).abs();
            gi.partial_cmp(&gj).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);

    let mut z = vec![T::zero(); n + 1];
    z[twist] = T::one();
    for k in (0..twist).rev() {
        z[k] = -b[k] * z[k + 1] / guard(fwd[k]);
    }
    for k in twist..n {
        z[k + 1] = -b[k] * z[k] / guard(bwd[k + 1]);
    }
    let factor = p0(params) / z[0];
    for v in &mut z {
        *v = *v * factor;
    }
    Ok(z)
}

/// Naive upward recurrence from `P_0`. Kept for small-`N` cross checks and
/// to document the instability the twisted evaluation avoids.
pub fn forward_recurrence_column<T: Real>(params: &DualHahnParams<T>, l: usize) -> Result<Vec<T>> {
    params.check_index(l)?;
    let n = params.n;
    let lambda = lattice_point(l, params.gamma + params.delta + T::one());
    let mut out = Vec::with_capacity(n + 1);
    out.push(p0(params));
    for k in 0..n {
        let (ak, bk) = coeffs_unchecked(params, k);
        if bk <= T::zero() {
            return Err(Error::DegenerateRecurrence { k, n });
        }
        let prev = if k == 0 { T::zero() } else { coeffs_unchecked(params, k - 1).1 * out[k - 1] };
        out.push(((lambda - ak) * out[k] - prev) / bk);
    }
    Ok(out)
}

/// `P_k(λ_l)` in the recurrence convention.
pub fn eval_recurrence<T: Real>(params: &DualHahnParams<T>, k: usize, l: usize) -> Result<T> {
    params.check_index(k)?;
    Ok(recurrence_column(params, l)?[k])
}

/// Terminating `₃F₂(-k, -l, l+γ+δ+1; γ+1, -N | 1)` summed term by term in
/// whatever field `F` is supplied. With `F = BigRational` the sum is exact.
pub fn terminating_3f2<F>(k: usize, l: usize, gamma: &F, delta: &F, n: usize) -> F
where
    F: Num + Clone + FromPrimitive,
{
    let int = |x: i64| F::from_i64(x).expect("small integer fits the field");
    let one = F::one();
    let shift = int(l as i64) + gamma.clone() + delta.clone() + one.clone();
    let mut term = one.clone();
    let mut sum = F::zero();
    let top = k.min(l);
    for j in 0..=top {
        sum = sum + term.clone();
        if j == top {
            break;
        }
        let jj = int(j as i64);
        let num = (jj.clone() - int(k as i64)) * (jj.clone() - int(l as i64)) * (jj.clone() + shift.clone());
        let den = (jj.clone() + gamma.clone() + one.clone()) * (jj.clone() - int(n as i64)) * (jj + one.clone());
        term = term * num / den;
    }
    sum
}

/// `P_k(λ_l)` from the hypergeometric closed form (opposite sign
/// convention to [`eval_recurrence`]: the two differ by `(-1)^k`).
pub fn eval_hypergeometric<T: Real>(params: &DualHahnParams<T>, k: usize, l: usize) -> Result<T> {
    params.check_index(k)?;
    params.check_index(l)?;
    let exact = |x: T| {
        BigRational::from_float(to_f64(x)).ok_or_else(|| Error::Parse("non-finite dual Hahn parameter".into()))
    };
    let g = exact(params.gamma)?;
    let d = exact(params.delta)?;
    let sum = terminating_3f2(k, l, &g, &d, params.n);
    Ok(prefactor(params, k) * rational_to_real(&sum))
}

fn prefactor<T: Real>(params: &DualHahnParams<T>, k: usize) -> T {
    let (g, d) = (params.gamma, params.delta);
    let n = params.n;
    let ln = (g + from_usize::<T>(k) + T::one()).ln_gamma() + (d + from_usize::<T>(n - k) + T::one()).ln_gamma()
        - ln_factorial::<T>(k)
        - ln_factorial::<T>(n - k)
        - (g + T::one()).ln_gamma()
        - (d + T::one()).ln_gamma();
    (cst::<T>(0.5) * ln).exp()
}

fn rational_to_real<T: Real>(r: &BigRational) -> T {
    if r.is_zero() {
        return T::zero();
    }
    if let Some(x) = r.to_f64() {
        if x.is_finite() && x != 0.0 {
            return cst(x);
        }
    }
    // fall back to scaling by bit lengths when the direct conversion
    // overflows or underflows
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = num.bits() as i64 - den.bits() as i64;
    let (n2, d2) = if shift > 0 {
        (num, den << (shift as usize))
    } else {
        (num << ((-shift) as usize), den)
    };
    let mant = BigRational::new(n2, d2).to_f64().unwrap_or(f64::NAN);
    cst(sign * mant * 2f64.powi(shift as i32))
}

/// Orthogonal matrix `W[l][k] = sqrt(ρ_l) P_k(λ_l)` (recurrence convention).
#[derive(Clone, Debug, PartialEq)]
pub struct TransformMatrix<T>(pub Matrix<T>);

impl<T: Real> TransformMatrix<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    /// `max(|WᵀW - I|, |WWᵀ - I|)`.
    pub fn orthonormality_residual(&self) -> T {
        self.0.orthogonality_residual().max(self.0.transpose().orthogonality_residual())
    }
}

pub fn transform_matrix<T: Real>(params: &DualHahnParams<T>) -> Result<TransformMatrix<T>> {
    let rho = weights(params)?;
    transform_from_weights(params, &rho)
}

pub(crate) fn transform_from_weights<T: Real>(
    params: &DualHahnParams<T>,
    rho: &WeightTable<T>,
) -> Result<TransformMatrix<T>> {
    let n = params.n;
    let mut w = Matrix::zeros(n + 1, n + 1);
    for l in 0..=n {
        let col = recurrence_column(params, l)?;
        let s = rho.0[l].sqrt();
        for (k, v) in col.into_iter().enumerate() {
            w[(l, k)] = s * v;
        }
    }
    Ok(TransformMatrix(w))
}

/// Lattice, weights, polynomial table and transform for one parameter set.
#[derive(Clone, Debug)]
pub struct DualHahnBasis<T> {
    pub params: DualHahnParams<T>,
    pub lattice: Lattice<T>,
    pub weights: WeightTable<T>,
    /// `polys[(l, k)] = P_k(λ_l)`.
    pub polys: Matrix<T>,
    pub transform: TransformMatrix<T>,
}

impl<T: Real> DualHahnBasis<T> {
    pub fn new(params: DualHahnParams<T>) -> Result<Self> {
        let lattice = lattice(&params);
        let weights = weights(&params)?;
        let n = params.n;
        let mut polys = Matrix::zeros(n + 1, n + 1);
        for l in 0..=n {
            for (k, v) in recurrence_column(&params, l)?.into_iter().enumerate() {
                polys[(l, k)] = v;
            }
        }
        let transform = TransformMatrix(Matrix::from_fn(n + 1, n + 1, |l, k| weights.0[l].sqrt() * polys[(l, k)]));
        Ok(Self { params, lattice, weights, polys, transform })
    }

    /// Jacobi matrix of the recurrence; its spectrum is the lattice.
    pub fn jacobi_matrix(&self) -> (Vec<T>, Vec<T>) {
        jacobi_matrix(&self.params)
    }
}

/// Diagonal `a_k` and off-diagonal `b_k` of the Jacobi matrix.
pub fn jacobi_matrix<T: Real>(params: &DualHahnParams<T>) -> (Vec<T>, Vec<T>) {
    let n = params.n;
    let mut a = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n);
    for k in 0..=n {
        let (ak, bk) = coeffs_unchecked(params, k);
        a.push(ak);
        if k < n {
            b.push(bk);
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    fn half_odd(n: usize) -> DualHahnParams<f64> {
        DualHahnParams::new(-0.5, 0.0, n).unwrap()
    }

    /// Exact rational recurrence for γ = -1/2, δ = 0 in squared form, used as
    /// an oracle: returns `P_k(λ_l)²` and the sign, both exact.
    fn exact_squares(n: usize, l: usize) -> Vec<(f64, i8)> {
        // P_{k+1} = ((λ - a_k) P_k - b_{k-1} P_{k-1}) / b_k with b_k² rational.
        // Track Q_k = P_k * prod_{j<k} b_j, which is rational:
        // Q_{k+1} = (λ - a_k) Q_k - b_{k-1}² Q_{k-1}.
        let r = |x: i64, y: i64| BigRational::new(BigInt::from(x), BigInt::from(y));
        let g = r(-1, 2);
        let nn = r(n as i64, 1);
        let lam = r(l as i64, 1) * (r(l as i64, 1) + g.clone() + r(1, 1));
        let a = |k: usize| {
            let kk = r(k as i64, 1);
            (kk.clone() + g.clone() + r(1, 1)) * (nn.clone() - kk.clone()) + kk.clone() * (nn.clone() + r(1, 1) - kk)
        };
        let b2 = |k: usize| {
            let kk = r(k as i64, 1);
            (kk.clone() + r(1, 1)) * (kk.clone() + g.clone() + r(1, 1)) * (nn.clone() - kk.clone()) * (nn.clone() - kk)
        };
        let mut q = vec![BigRational::one()];
        for k in 0..n {
            let prev = if k == 0 { BigRational::zero() } else { b2(k - 1) * q[k - 1].clone() };
            q.push((lam.clone() - a(k)) * q[k].clone() - prev);
        }
        let mut prod_b2 = BigRational::one();
        let mut out = Vec::new();
        for (k, qk) in q.iter().enumerate() {
            if k > 0 {
                prod_b2 *= b2(k - 1);
            }
            let sq = qk.clone() * qk.clone() / prod_b2.clone();
            let sign = if qk.is_zero() { 0 } else if qk.is_negative() { -1 } else { 1 };
            out.push((rational_to_real::<f64>(&sq), sign));
        }
        out
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice(&half_odd(2)).0, vec![0.0, 1.5, 5.0]);
        let p = DualHahnParams::new(0.5, 0.0, 2).unwrap();
        assert_eq!(lattice(&p).0, vec![0.0, 2.5, 7.0]);
        let p = DualHahnParams::new(3.2, 0.7, 5).unwrap();
        assert_eq!(lattice(&p).0[0], 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(DualHahnParams::new(-1.0, 0.0, 3).is_err());
        assert!(DualHahnParams::new(0.0, -1.5, 3).is_err());
        assert!(DualHahnParams::new(f64::NAN, 0.0, 3).is_err());
    }

    #[test]
    fn recurrence_coefficient_examples() {
        let p = half_odd(1);
        let (a0, b0) = recurrence_coeffs(&p, 0).unwrap();
        assert!((a0 - 0.5).abs() < 1e-15);
        assert!((b0 - 0.5f64.sqrt()).abs() < 1e-15);
        let (a1, b1) = recurrence_coeffs(&p, 1).unwrap();
        assert!((a1 - 1.0).abs() < 1e-15);
        assert_eq!(b1, 0.0);
        assert!(recurrence_coeffs(&p, 2).is_err());
        let q = DualHahnParams::new(0.3, 1.7, 6).unwrap();
        assert_eq!(recurrence_coeffs(&q, 6).unwrap().1, 0.0);
        for k in 0..6 {
            assert!(recurrence_coeffs(&q, k).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn weight_examples() {
        let w = weights(&half_odd(1)).unwrap();
        assert!((w.0[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((w.0[1] - 1.0 / 3.0).abs() < 1e-14);
        let w = weights(&DualHahnParams::new(0.5, 0.0, 0).unwrap()).unwrap();
        assert!((w.0[0] - 1.0).abs() < 1e-14);
        for n in 0..=50 {
            for g in [-0.5, 0.5] {
                let w = weights(&DualHahnParams::new(g, 0.0, n).unwrap()).unwrap();
                assert!(w.0.iter().all(|&x| x > 0.0));
                assert!((w.sum() - 1.0).abs() < 1e-10, "N={n} γ={g} sum={}", w.sum());
            }
        }
    }

    #[test]
    fn weights_report_range_errors() {
        let err = weights(&half_odd(20_000)).unwrap_err();
        assert!(matches!(err, Error::WeightRange { .. }));
    }

    #[test]
    fn weight_sum_is_inverse_p0_squared_for_nonzero_delta() {
        let p = DualHahnParams::new(0.3, 1.4, 12).unwrap();
        let s = weights(&p).unwrap().sum();
        let p0 = p0(&p);
        assert!((s * p0 * p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recurrence_examples() {
        let p = half_odd(1);
        assert!((eval_recurrence(&p, 1, 0).unwrap() + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((eval_recurrence(&p, 1, 1).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let w = weights(&p).unwrap();
        let s: f64 = (0..2).map(|l| w.0[l] * eval_recurrence(&p, 1, l).unwrap().powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-14);
        let q = DualHahnParams::new(0.8, 0.4, 7).unwrap();
        let p0s: Vec<f64> = (0..=7).map(|l| eval_recurrence(&q, 0, l).unwrap()).collect();
        assert!(p0s.iter().all(|&x| (x - p0s[0]).abs() < 1e-14 && x > 0.0));
    }

    #[test]
    fn hypergeometric_examples() {
        let p = half_odd(1);
        assert!((eval_hypergeometric(&p, 1, 0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((eval_hypergeometric(&p, 1, 1).unwrap() + 2f64.sqrt()).abs() < 1e-14);
        let q = DualHahnParams::new(0.25, 0.75, 5).unwrap();
        for l in 0..=5 {
            assert!((eval_hypergeometric(&q, 0, l).unwrap() - p0(&q)).abs() < 1e-14);
        }
    }

    #[test]
    fn twisted_recurrence_matches_exact_rational_oracle() {
        for n in [5usize, 30, 50, 80] {
            let p = half_odd(n);
            for l in 0..=n {
                let col = recurrence_column(&p, l).unwrap();
                let exact = exact_squares(n, l);
                let scale = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                for k in 0..=n {
                    let (sq, sign) = exact[k];
                    let want = sign as f64 * sq.sqrt();
                    // entries are accurate relative to the column, so small entries (and
                    // exact zeros such as N=5, l=2, k=4) get an absolute floor
                    let tol = 1e-11 * want.abs() + 1e-13 * scale;
                    assert!((col[k] - want).abs() <= tol, "N={n} l={l} k={k}: {} vs {want}", col[k]);
                }
            }
        }
    }

    #[test]
    fn forward_recurrence_agrees_for_small_n() {
        let p = DualHahnParams::new(0.5f64, 0.0, 8).unwrap();
        for l in 0..=8 {
            let a = forward_recurrence_column(&p, l).unwrap();
            let b = recurrence_column(&p, l).unwrap();
            for k in 0..=8 {
                assert!((a[k] - b[k]).abs() < 1e-10 * b[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn transform_examples() {
        let w = transform_matrix(&half_odd(1)).unwrap();
        let want = [[(2.0f64 / 3.0).sqrt(), -(1.0f64 / 3.0).sqrt()], [(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()]];
        for l in 0..2 {
            for k in 0..2 {
                assert!((w.0[(l, k)] - want[l][k]).abs() < 1e-15);
            }
        }
        let w = transform_matrix(&DualHahnParams::new(0.5, 0.0, 0).unwrap()).unwrap();
        assert_eq!(w.0.as_slice(), &[1.0]);
        let w = transform_matrix(&DualHahnParams::new(0.5, 0.0, 20).unwrap()).unwrap();
        assert!(w.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn exact_3f2_in_rationals() {
        let r = |x: i64, y: i64| BigRational::new(BigInt::from(x), BigInt::from(y));
        // at l = 1, 3F2 = 1 - k (γ+δ+2) / ((γ+1) N)
        let s = terminating_3f2(2, 1, &r(-1, 2), &r(0, 1), 4);
        assert_eq!(s, r(1, 1) - r(2, 1) * r(3, 2) / (r(1, 2) * r(4, 1)));
        assert_eq!(s, r(-1, 2));
        let f = terminating_3f2(2, 1, &-0.5f64, &0.0, 4);
        assert!((f + 0.5).abs() < 1e-15);
    }
}
