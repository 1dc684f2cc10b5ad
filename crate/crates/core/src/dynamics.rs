//! Unitary time evolution `e^{-iHt}` (ħ = 1), applied sector by sector.
//!
//! An [`Evolver`] solves every sector a computation touches once, then serves
//! propagators, evolved states and expectation values from the cached
//! eigensystems. After construction it is read-only and can be shared across
//! threads.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dual_hahn::{lattice, recurrence_column, weights, DualHahnParams};
use crate::error::{Error, Result};
use crate::fock::{coherent_state_with_report, inner, FockLabel, Sector, StateVector};
use crate::hamiltonian::{resonance_check, ModelParams, RESONANCE_TOL};
use crate::linalg::Matrix;
use crate::observable::Observable;
use crate::scalar::{cst, from_usize, Real};
use crate::spectral::{solve_blocks, BlockEigensystem, SolverChoice};

/// `U[l][k] = <2l+p, M-l| e^{-iHt} |2k+p, M-k>`.
#[derive(Clone, Debug)]
pub struct PropagatorBlock<T> {
    pub sector: Sector,
    pub t: T,
    pub entries: Matrix<Complex<T>>,
}

impl<T: Real> PropagatorBlock<T> {
    /// `max |U U† - I|`.
    pub fn unitarity_residual(&self) -> T {
        let n = self.entries.rows();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc = acc + self.entries[(r, k)] * self.entries[(c, k)].conj();
                }
                let want = if r == c { T::one() } else { T::zero() };
                worst = worst.max((acc - Complex::new(want, T::zero())).norm());
            }
        }
        worst
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex<T> {
        let n = self.entries.rows();
        let mut a = self.entries.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(col);
            if a[(piv, col)].norm() == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            if piv != col {
                for c in 0..n {
                    let tmp = a[(col, c)];
                    a[(col, c)] = a[(piv, c)];
                    a[(piv, c)] = tmp;
                }
                det = -det;
            }
            let p = a[(col, col)];
            det = det * p;
            for r in (col + 1)..n {
                let f = a[(r, col)] / p;
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] = a[(r, c)] - f * v;
                }
            }
        }
        det
    }

    /// Largest entrywise distance to another block.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .as_slice()
            .iter()
            .zip(other.entries.as_slice())
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn matmul(&self, other: &Self) -> Matrix<Complex<T>> {
        self.entries.matmul(&other.entries)
    }
}

/// Expectation values sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |v_i - v_0|`.
    pub fn max_deviation_from_start(&self) -> T {
        match self.values.first() {
            Some(&v0) => self.values.iter().fold(T::zero(), |m, v| m.max((*v - v0).norm())),
            None => T::zero(),
        }
    }
}

fn phase<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

/// Cached per-sector eigensystems for one parameter set.
#[derive(Clone, Debug)]
pub struct Evolver<T> {
    params: ModelParams<T>,
    choice: SolverChoice,
    systems: BTreeMap<Sector, BlockEigensystem<T>>,
}

impl<T: Real> Evolver<T> {
    /// Solve the given sectors (in parallel) with the given solver policy.
    pub fn new(params: ModelParams<T>, sectors: &[Sector], choice: SolverChoice) -> Result<Self> {
        params.validate()?;
        let mut sectors = sectors.to_vec();
        sectors.sort();
        sectors.dedup();
        let systems = solve_blocks(&params, &sectors, choice)?;
        Ok(Self { params, choice, systems: sectors.into_iter().zip(systems).collect() })
    }

    /// Evolver covering every sector occupied by `state`.
    pub fn for_state(params: ModelParams<T>, state: &StateVector<T>) -> Result<Self> {
        Self::new(params, &state.sectors(), SolverChoice::Auto)
    }

    /// Evolver covering every sector occupied by `state` or reached from it by
    /// one application of `observable`.
    pub fn for_expectation(params: ModelParams<T>, state: &StateVector<T>, observable: &Observable<T>) -> Result<Self> {
        let mut sectors = state.sectors();
        sectors.extend(observable.apply(state).sectors());
        Self::new(params, &sectors, SolverChoice::Auto)
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Whether every cached block came from the closed form.
    pub fn is_analytic(&self) -> bool {
        match self.choice {
            SolverChoice::Analytic => true,
            SolverChoice::Numeric => false,
            SolverChoice::Auto => resonance_check(&self.params, cst(RESONANCE_TOL)).satisfied,
        }
    }

    pub fn system(&self, sector: Sector) -> Result<&BlockEigensystem<T>> {
        self.systems
            .get(&sector)
            .ok_or_else(|| Error::Parse(format!("sector {sector} was not prepared for evolution")))
    }

    /// `V diag(e^{-itE}) Vᵀ`.
    pub fn propagator(&self, sector: Sector, t: T) -> Result<PropagatorBlock<T>> {
        let sys = self.system(sector)?;
        let n = sys.dim();
        let ph: Vec<Complex<T>> = sys.energies.iter().map(|&e| phase(-e * t)).collect();
        let v = &sys.vectors;
        let entries = Matrix::from_fn(n, n, |l, k| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                acc = acc + ph[j] * (v[(l, j)] * v[(k, j)]);
            }
            acc
        });
        Ok(PropagatorBlock { sector, t, entries })
    }

    /// `e^{-iHt} psi`, computed as `V (e^{-itE} ⊙ (Vᵀ c))` per sector.
    pub fn evolve(&self, state: &StateVector<T>, t: T) -> Result<StateVector<T>> {
        let mut out = Vec::new();
        for (sector, comps) in state.by_sector() {
            let sys = self.system(sector)?;
            let n = sys.dim();
            let v = &sys.vectors;
            let mut coeff = vec![Complex::new(T::zero(), T::zero()); n];
            for (j, c) in coeff.iter_mut().enumerate() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc = acc + comps[k] * v[(k, j)];
                }
                *c = acc * phase(-sys.energies[j] * t);
            }
            let evolved = (0..n)
                .map(|k| coeff.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |a, (j, c)| a + *c * v[(k, j)]))
                .collect();
            out.push((sector, evolved));
        }
        Ok(StateVector::from_sectors(out))
    }

    /// `<psi(t)| X |psi(t)>`.
    pub fn expectation(&self, state: &StateVector<T>, observable: &Observable<T>, t: T) -> Result<Complex<T>> {
        let psi = self.evolve(state, t)?;
        Ok(inner(&psi, &observable.apply(&psi)))
    }

    /// `<X²> - <X>²` at time `t`, with `<X²> = ||X psi(t)||²`.
    pub fn variance(&self, state: &StateVector<T>, observable: &Observable<T>, t: T) -> Result<T> {
        if !observable.is_hermitian() {
            return Err(Error::NotHermitian(observable.name().to_string()));
        }
        let psi = self.evolve(state, t)?;
        let x_psi = observable.apply(&psi);
        let mean = inner(&psi, &x_psi).re;
        Ok(x_psi.norm_sqr() - mean * mean)
    }

    /// Expectation values over a strictly increasing grid, evaluated in parallel.
    pub fn time_series(&self, state: &StateVector<T>, observable: &Observable<T>, times: &[T]) -> Result<TimeSeries<T>> {
        check_grid(times)?;
        let values = times.par_iter().map(|&t| self.expectation(state, observable, t)).collect::<Result<Vec<_>>>()?;
        Ok(TimeSeries { times: times.to_vec(), values })
    }
}

pub(crate) fn check_grid<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::TimeGrid);
    }
    Ok(())
}

pub fn propagator_block<T: Real>(params: &ModelParams<T>, sector: Sector, t: T) -> Result<PropagatorBlock<T>> {
    Evolver::new(*params, &[sector], SolverChoice::Auto)?.propagator(sector, t)
}

pub fn evolve<T: Real>(params: &ModelParams<T>, state: &StateVector<T>, t: T) -> Result<StateVector<T>> {
    Evolver::for_state(*params, state)?.evolve(state, t)
}

pub fn expectation<T: Real>(
    params: &ModelParams<T>,
    state: &StateVector<T>,
    observable: &Observable<T>,
    t: T,
) -> Result<Complex<T>> {
    Evolver::for_state(*params, state)?.expectation(state, observable, t)
}

pub fn variance<T: Real>(params: &ModelParams<T>, state: &StateVector<T>, observable: &Observable<T>, t: T) -> Result<T> {
    Evolver::for_state(*params, state)?.variance(state, observable, t)
}

pub fn time_series<T: Real>(
    params: &ModelParams<T>,
    state: &StateVector<T>,
    observable: &Observable<T>,
    times: &[T],
) -> Result<TimeSeries<T>> {
    check_grid(times)?;
    Evolver::for_state(*params, state)?.time_series(state, observable, times)
}

/// Coherent-state expectation plus the truncation it was computed with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentExpectation<T> {
    pub value: Complex<T>,
    pub tail_epsilon: T,
    pub discarded_mass: T,
}

pub fn coherent_expectation<T: Real>(
    params: &ModelParams<T>,
    z1: Complex<T>,
    z2: Complex<T>,
    observable: &Observable<T>,
    t: T,
    tail_epsilon: T,
) -> Result<CoherentExpectation<T>> {
    let (state, report) = coherent_state_with_report(z1, z2, tail_epsilon)?;
    let value = expectation(params, &state, observable, t)?;
    Ok(CoherentExpectation { value, tail_epsilon, discarded_mass: report.discarded_mass })
}

/// `<n1>(t)` for the initial number state `|2l+p, M-l>` via the explicit
/// triple sum over lattice labels `j1, j2` and ladder index `k`:
///
/// ```text
/// p + 2 Σ k e^{-2itg(λ_j2 - λ_j1)} ρ_j1 ρ_j2 P_l(λ_j1) P_k(λ_j1) P_k(λ_j2) P_l(λ_j2)
/// ```
///
/// `O(M³)`; retained as a cross-check of the propagator route.
pub fn expect_n1_fock<T: Real>(params: &ModelParams<T>, l: usize, p: u8, m: usize, t: T) -> Result<T> {
    params.validate()?;
    if params.g == T::zero() {
        return Err(Error::ZeroCoupling);
    }
    resonance_check(params, cst(RESONANCE_TOL)).into_result()?;
    let sector = Sector::new(p, m)?;
    if l > m {
        return Err(Error::OutOfRange { index: l, max: m });
    }
    let dh = DualHahnParams::<T>::for_block(sector.p(), sector.m());
    let lam = lattice(&dh).0;
    let rho = weights(&dh)?.0;
    // poly[j][k] = P_k(λ_j)
    let poly: Vec<Vec<T>> = (0..=m).map(|j| recurrence_column(&dh, j)).collect::<Result<_>>()?;
    let two_g = cst::<T>(2.0) * params.g;
    let mut acc = Complex::new(T::zero(), T::zero());
    for j1 in 0..=m {
        for j2 in 0..=m {
            let ph = phase(-two_g * t * (lam[j2] - lam[j1]));
            let w = rho[j1] * rho[j2] * poly[j1][l] * poly[j2][l];
            let mut inner_sum = T::zero();
            for k in 1..=m {
                inner_sum = inner_sum + from_usize::<T>(k) * poly[j1][k] * poly[j2][k];
            }
            acc = acc + ph * (w * inner_sum);
        }
    }
    Ok(from_usize::<T>(p as usize) + cst::<T>(2.0) * acc.re)
}

/// `<psi| e^{iHt} X e^{-iHt} |psi>` through the explicit four-fold sum over
/// number-basis indices and propagator elements. Quadratic in the support
/// size per sector pair; kept as a cross-check of [`Evolver::expectation`].
pub fn expectation_quadruple_sum<T: Real>(
    params: &ModelParams<T>,
    state: &StateVector<T>,
    observable: &Observable<T>,
    t: T,
) -> Result<Complex<T>> {
    let mut sectors = state.sectors();
    sectors.extend(observable.apply(state).sectors());
    let evo = Evolver::new(*params, &sectors, SolverChoice::Auto)?;
    let blocks = state.by_sector();
    let props: BTreeMap<Sector, PropagatorBlock<T>> =
        blocks.keys().map(|&s| evo.propagator(s, t).map(|u| (s, u))).collect::<Result<_>>()?;
    let mut total = Complex::new(T::zero(), T::zero());
    for (&s1, c1) in &blocks {
        let u1 = &props[&s1].entries;
        for (&s4, c4) in &blocks {
            let u4 = &props[&s4].entries;
            for k2 in 0..s1.dim() {
                // <psi| e^{iHt} |k2> = conj(<k2| e^{-iHt} |psi>)
                let left: Complex<T> = (0..s1.dim()).fold(Complex::new(T::zero(), T::zero()), |a, k1| a + u1[(k2, k1)] * c1[k1]);
                if left.norm_sqr() == T::zero() {
                    continue;
                }
                for k3 in 0..s4.dim() {
                    let x = observable.element(s1.label(k2), s4.label(k3));
                    if x.norm_sqr() == T::zero() {
                        continue;
                    }
                    let right: Complex<T> = (0..s4.dim()).fold(Complex::new(T::zero(), T::zero()), |a, k4| a + u4[(k3, k4)] * c4[k4]);
                    total = total + left.conj() * x * right;
                }
            }
        }
    }
    Ok(total)
}

/// Labels of `R`-charge at most `r_max`.
pub fn labels_up_to_charge(r_max: usize) -> Vec<FockLabel> {
    Sector::up_to_charge(r_max).into_iter().flat_map(|s| s.labels().collect::<Vec<_>>()).collect()
}
