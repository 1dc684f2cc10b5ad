//! Invariant families checked by the `validate` command and the acceptance
//! suite. Every family reports its worst residual against a fixed threshold.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual_hahn::{
    eval_hypergeometric, jacobi_matrix, lattice, recurrence_column, transform_from_weights, weights, DualHahnParams,
};
use crate::dynamics::{expect_n1_fock, Evolver};
use crate::error::Result;
use crate::fock::{FockLabel, Sector, StateVector};
use crate::hamiltonian::{build_block_direct, build_block_formula, direct_tridiagonal, ModelParams};
use crate::linalg::tridiagonal_eigen;
use crate::observable::Observable;
use crate::spectral::{compare, eigenvalue_count, fock_state_count, scaled_residual, solve_analytic, solve_numeric, SolverChoice};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateConfig {
    pub max_m: usize,
    pub seed: u64,
    pub trials: usize,
    /// Perturb one dual Hahn weight so the orthonormality family must fail.
    pub corrupt_weights: bool,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { max_m: 40, seed: 0, trials: 20, corrupt_weights: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub name: &'static str,
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
    pub seconds: f64,
}

impl fmt::Display for FamilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} worst={:.3e} threshold={:.1e} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.threshold,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub families: Vec<FamilyReport>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(|f| f.passed)
    }

    pub fn get(&self, name: &str) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.name == name)
    }
}

fn family(name: &'static str, threshold: f64, body: impl FnOnce() -> Result<f64>) -> FamilyReport {
    let start = Instant::now();
    let worst = body().unwrap_or(f64::INFINITY);
    FamilyReport { name, worst, threshold, passed: worst.is_finite() && worst <= threshold, seconds: start.elapsed().as_secs_f64() }
}

fn sectors_up_to(max_m: usize) -> impl Iterator<Item = Sector> {
    (0..=max_m).flat_map(|m| (0..=1u8).map(move |p| Sector::new(p, m).expect("valid sector")))
}

fn gammas() -> [f64; 2] {
    [-0.5, 0.5]
}

/// Random parameters with `|g| ∈ [1e-3, 10]`.
pub fn random_params(rng: &mut impl Rng) -> ModelParams<f64> {
    let mag = 10f64.powf(rng.gen_range(-3.0..1.0));
    let g = if rng.gen_bool(0.5) { mag } else { -mag };
    ModelParams {
        omega1: rng.gen_range(-5.0..5.0),
        omega2: rng.gen_range(-5.0..5.0),
        k1: rng.gen_range(-2.0..2.0),
        k2: rng.gen_range(-2.0..2.0),
        g,
    }
}

/// Random normalized state supported on labels with `n1 + 2 n2 <= r_max`.
pub fn random_state(rng: &mut impl Rng, r_max: usize) -> StateVector<f64> {
    let labels = crate::dynamics::labels_up_to_charge(r_max);
    let count = rng.gen_range(1..=labels.len().min(12));
    let mut s = StateVector::new();
    for _ in 0..count {
        let l = labels[rng.gen_range(0..labels.len())];
        s.add(l, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    if s.norm() == 0.0 {
        s = StateVector::basis(labels[0]);
    }
    s.normalized().expect("nonzero random state")
}

pub fn construction_equivalence(max_m: usize, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let params = random_params(rng);
        for s in sectors_up_to(max_m) {
            let direct = build_block_direct(&params, s);
            if !direct.is_symmetric() {
                return Ok(f64::INFINITY);
            }
            let formula = build_block_formula(&params, s)?.to_dense();
            worst = worst.max(direct.max_abs_diff(&formula) / direct.max_abs().max(1.0));
        }
    }
    Ok(worst)
}

pub fn dual_hahn_orthonormality(max_n: usize, corrupt: bool) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in gammas() {
        for n in 0..=max_n {
            let p = DualHahnParams::new(g, 0.0, n)?;
            let mut rho = weights(&p)?;
            if corrupt {
                rho.0[0] *= 1.01;
            }
            let w = transform_from_weights(&p, &rho)?;
            worst = worst.max(w.orthonormality_residual());
        }
    }
    Ok(worst)
}

pub fn weight_sums(max_n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in gammas() {
        for n in 0..=max_n {
            let rho = weights(&DualHahnParams::new(g, 0.0, n)?)?;
            if rho.0.iter().any(|&x| x <= 0.0) {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((rho.sum() - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `max |P_rec - (-1)^k P_hyp| / max(1, |P_rec|)`.
pub fn dual_evaluation(max_n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in gammas() {
        for n in 0..=max_n {
            let p = DualHahnParams::new(g, 0.0, n)?;
            for l in 0..=n {
                let col = recurrence_column(&p, l)?;
                for (k, &rec) in col.iter().enumerate() {
                    let hyp = eval_hypergeometric(&p, k, l)?;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    worst = worst.max((rec - sign * hyp).abs() / rec.abs().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

pub fn jacobi_spectrum(max_n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in gammas() {
        for n in 0..=max_n {
            let p = DualHahnParams::new(g, 0.0, n)?;
            let (a, b) = jacobi_matrix(&p);
            let eig = tridiagonal_eigen(&a, &b).map_err(|_| crate::Error::NoConvergence { p: 0, m: n })?;
            for (e, l) in eig.values.iter().zip(lattice(&p).values().iter()) {
                worst = worst.max((e - l).abs() / l.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// `(energy deviation, vector deviation, worst scaled residual)` over all
/// resonant blocks with `M <= max_m`.
pub fn analytic_vs_numeric(params: &ModelParams<f64>, max_m: usize) -> Result<(f64, f64, f64)> {
    let (mut de, mut dv, mut res) = (0.0f64, 0.0f64, 0.0f64);
    for s in sectors_up_to(max_m) {
        let a = solve_analytic(params, s)?;
        let n = solve_numeric(&direct_tridiagonal(params, s))?;
        let c = compare(&a, &n);
        de = de.max(c.energy);
        dv = dv.max(c.vectors);
        res = res.max(scaled_residual(params, &a)).max(scaled_residual(params, &n));
    }
    Ok((de, dv, res))
}

pub fn trace_determinant(params: &ModelParams<f64>, max_m: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in sectors_up_to(max_m) {
        let block = direct_tridiagonal(params, s);
        let sys = solve_analytic(params, s)?;
        let tr = block.trace();
        worst = worst.max((tr - sys.energy_sum()).abs() / tr.abs().max(1.0));
        let det = block.determinant();
        let prod = sys.energy_product();
        worst = worst.max((det - prod).abs() / det.abs().max(prod.abs()).max(1.0));
    }
    Ok(worst)
}

/// `(unitarity residual, group-law residual)` over random blocks and times.
pub fn propagator_algebra(max_m: usize, trials: usize, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let (mut unit, mut group) = (0.0f64, 0.0f64);
    for trial in 0..trials {
        let params = if trial % 2 == 0 { ModelParams::resonance(1.0, 1.0)? } else { random_params(rng) };
        let s = Sector::new(rng.gen_range(0..=1u8), rng.gen_range(0..=max_m))?;
        let evo = Evolver::new(params, &[s], SolverChoice::Auto)?;
        let t1 = rng.gen_range(0.0..100.0);
        let t2 = rng.gen_range(0.0..100.0);
        let u1 = evo.propagator(s, t1)?;
        let u2 = evo.propagator(s, t2)?;
        let u12 = evo.propagator(s, t1 + t2)?;
        unit = unit.max(u1.unitarity_residual()).max(u2.unitarity_residual());
        let prod = u1.matmul(&u2);
        let diff = prod.as_slice().iter().zip(u12.entries.as_slice()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        group = group.max(diff);
    }
    Ok((unit, group))
}

/// Worst drift of norm, `<R>`, `<P>` and `<H>` over `t ∈ [0, 100]`.
pub fn conservation(r_max: usize, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let params = if trial % 2 == 0 { ModelParams::resonance(1.0, 1.0)? } else { random_params(rng) };
        let psi = random_state(rng, r_max);
        let evo = Evolver::for_state(params, &psi)?;
        let observables = [Observable::charge(), Observable::parity(), Observable::hamiltonian(params)];
        let start: Vec<Complex<f64>> =
            observables.iter().map(|o| evo.expectation(&psi, o, 0.0)).collect::<Result<_>>()?;
        let weights0 = psi.sector_weights();
        for i in 0..=10 {
            let t = 10.0 * i as f64;
            let psi_t = evo.evolve(&psi, t)?;
            worst = worst.max((psi_t.norm() - 1.0).abs());
            for (sector, w) in psi_t.sector_weights() {
                worst = worst.max((w - weights0.get(&sector).copied().unwrap_or(0.0)).abs());
            }
            for (o, s0) in observables.iter().zip(&start) {
                let v = crate::fock::inner(&psi_t, &o.apply(&psi_t));
                worst = worst.max((v - s0).norm());
            }
        }
    }
    Ok(worst)
}

/// Triple-sum photon number vs the propagator route.
pub fn cross_formula(max_m: usize, rng: &mut impl Rng) -> Result<f64> {
    let params = ModelParams::resonance(1.0, 1.0)?;
    let n1 = Observable::n1();
    let times: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..100.0)).collect();
    let mut worst = 0.0f64;
    for s in sectors_up_to(max_m) {
        for l in 0..=s.m() {
            let psi = StateVector::basis(s.label(l));
            let evo = Evolver::for_state(params, &psi)?;
            for &t in &times {
                let route = evo.expectation(&psi, &n1, t)?;
                let closed = expect_n1_fock(&params, l, s.p(), s.m(), t)?;
                worst = worst.max((route.re - closed).abs()).max(route.im.abs());
            }
        }
    }
    Ok(worst)
}

/// Expectations inside one resonant sector repeat with period `4π/g`.
pub fn periodicity(max_m: usize, rng: &mut impl Rng) -> Result<f64> {
    let params = ModelParams::resonance(1.0, 1.0)?;
    let period = 4.0 * PI / params.g;
    let mut worst = 0.0f64;
    for s in sectors_up_to(max_m.min(20)) {
        let mut psi = StateVector::new();
        for k in 0..=s.m() {
            psi.set(s.label(k), Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        let psi = psi.normalized()?;
        let evo = Evolver::for_state(params, &psi)?;
        let t = rng.gen_range(0.0..10.0);
        let a = evo.expectation(&psi, &Observable::n1(), t)?;
        let b = evo.expectation(&psi, &Observable::n1(), t + period)?;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

/// `<n1>(t)` for `|0,1>` against `(8/9)(1 - cos 3t)`, plus the two pinned
/// values at `t = π/3` and `t = 2π/3`.
pub fn two_level_recurrence() -> Result<f64> {
    let params = ModelParams::resonance(1.0, 1.0)?;
    let psi = StateVector::basis(FockLabel::new(0, 1));
    let evo = Evolver::for_state(params, &psi)?;
    let grid: Vec<f64> = (0..100).map(|i| i as f64 * (2.0 * PI / 3.0) / 99.0).collect();
    let ts = evo.time_series(&psi, &Observable::n1(), &grid)?;
    let mut worst = 0.0f64;
    for (t, v) in ts.times.iter().zip(&ts.values) {
        worst = worst.max((v.re - 8.0 / 9.0 * (1.0 - (3.0 * t).cos())).abs()).max(v.im.abs());
    }
    let at = |t: f64| evo.expectation(&psi, &Observable::n1(), t).map(|v| v.re);
    worst = worst.max((at(PI / 3.0)? - 16.0 / 9.0).abs());
    worst = worst.max(at(2.0 * PI / 3.0)?.abs());
    Ok(worst)
}

/// Run every family.
pub fn run(cfg: &ValidateConfig) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.max_m;
    let reso = ModelParams::resonance(1.0, 1.0).expect("g = 1 is a valid coupling");
    let mut families = vec![
        family("construction_equivalence", 1e-10, || construction_equivalence(m, cfg.trials, &mut rng)),
        family("dual_hahn_orthonormality", 1e-10, || dual_hahn_orthonormality(m, cfg.corrupt_weights)),
        family("dual_hahn_weight_sum", 1e-10, || weight_sums(m)),
        family("dual_evaluation_consistency", 1e-9, || dual_evaluation(m.min(30))),
        family("jacobi_spectrum", 1e-10, || jacobi_spectrum(m)),
    ];

    let spectral = analytic_vs_numeric(&reso, m);
    let pick = |f: fn(&(f64, f64, f64)) -> f64| spectral.as_ref().map(f).map_err(|e| crate::Error::Parse(e.to_string()));
    families.push(family("analytic_numeric_energies", 1e-8, || pick(|r| r.0)));
    families.push(family("analytic_numeric_vectors", 1e-7, || pick(|r| r.1)));
    families.push(family("spectral_residuals", 1e-10, || pick(|r| r.2)));
    families.push(family("completeness", 0.0, || {
        let r_max = 2 * m + 1;
        Ok((eigenvalue_count(r_max) as f64 - fock_state_count(r_max) as f64).abs())
    }));
    families.push(family("trace_determinant", 1e-9, || trace_determinant(&reso, m.min(20))));

    let algebra = propagator_algebra(m, cfg.trials, &mut rng);
    let pick2 = |f: fn(&(f64, f64)) -> f64| algebra.as_ref().map(f).map_err(|e| crate::Error::Parse(e.to_string()));
    families.push(family("propagator_unitarity", 1e-10, || pick2(|r| r.0)));
    families.push(family("propagator_group_law", 1e-9, || pick2(|r| r.1)));

    families.push(family("conservation", 1e-9, || conservation(30.min(2 * m + 1), cfg.trials, &mut rng)));
    families.push(family("cross_formula_n1", 1e-9, || cross_formula(m.min(15), &mut rng)));
    families.push(family("periodicity", 1e-8, || periodicity(m, &mut rng)));
    families.push(family("two_level_recurrence", 1e-9, two_level_recurrence));

    ValidationReport { families }
}
