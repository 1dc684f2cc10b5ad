//! Two-mode Fock space: labels, the invariant-sector decomposition and
//! block-sparse state vectors.
//!
//! The conserved charge `R = n1 + 2 n2` and the parity of `n1` split the
//! space into finite sectors `(p, M)` spanned by `|2k+p, M-k>`, `k = 0..=M`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cst, from_usize, ln_factorial, to_f64, Real};

/// Number state `|n1, n2>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockLabel {
    pub n1: usize,
    pub n2: usize,
}

impl FockLabel {
    pub const VACUUM: FockLabel = FockLabel { n1: 0, n2: 0 };

    pub const fn new(n1: usize, n2: usize) -> Self {
        Self { n1, n2 }
    }

    /// Eigenvalue of `R = n1 + 2 n2`.
    pub const fn r_charge(self) -> usize {
        self.n1 + 2 * self.n2
    }

    pub fn decompose(self) -> BlockCoord {
        decompose(self)
    }

    /// Shift by a signed offset; `None` if a count would go negative.
    pub fn offset(self, d1: i64, d2: i64) -> Option<Self> {
        let n1 = i64::try_from(self.n1).ok()? + d1;
        let n2 = i64::try_from(self.n2).ok()? + d2;
        if n1 < 0 || n2 < 0 {
            return None;
        }
        Some(Self::new(n1 as usize, n2 as usize))
    }

    /// Export ordering: by charge `R`, then by `n1`.
    pub fn charge_order_key(self) -> (usize, usize) {
        (self.r_charge(), self.n1)
    }
}

impl fmt::Display for FockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.n1, self.n2)
    }
}

/// Invariant sector `H_{p,M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    p: u8,
    m: usize,
}

impl Sector {
    pub fn new(p: u8, m: usize) -> Result<Self> {
        if p > 1 {
            return Err(Error::InvalidCoord { p, m, k: 0 });
        }
        Ok(Self { p, m })
    }

    pub fn p(self) -> u8 {
        self.p
    }

    pub fn m(self) -> usize {
        self.m
    }

    pub fn dim(self) -> usize {
        block_dim(self.p, self.m)
    }

    /// Basis vector `k` of this sector.
    pub fn label(self, k: usize) -> FockLabel {
        debug_assert!(k <= self.m);
        FockLabel::new(2 * k + self.p as usize, self.m - k)
    }

    pub fn labels(self) -> impl Iterator<Item = FockLabel> {
        (0..=self.m).map(move |k| self.label(k))
    }

    /// Eigenvalue `2M + p` of `R` on this sector.
    pub fn r_charge(self) -> usize {
        2 * self.m + self.p as usize
    }

    /// All sectors with `2M + p <= r_max`, ordered by charge.
    pub fn up_to_charge(r_max: usize) -> Vec<Sector> {
        (0..=r_max).map(|r| Sector { p: (r % 2) as u8, m: r / 2 }).collect()
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, M={})", self.p, self.m)
    }
}

/// Position `(p, M, k)` of a number state inside the sector decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockCoord {
    sector: Sector,
    k: usize,
}

impl BlockCoord {
    pub fn new(p: u8, m: usize, k: usize) -> Result<Self> {
        if p > 1 || k > m {
            return Err(Error::InvalidCoord { p, m, k });
        }
        Ok(Self { sector: Sector { p, m }, k })
    }

    pub fn sector(self) -> Sector {
        self.sector
    }

    pub fn p(self) -> u8 {
        self.sector.p
    }

    pub fn m(self) -> usize {
        self.sector.m
    }

    pub fn k(self) -> usize {
        self.k
    }
}

pub fn decompose(label: FockLabel) -> BlockCoord {
    let p = (label.n1 % 2) as u8;
    let k = label.n1 / 2;
    BlockCoord { sector: Sector { p, m: k + label.n2 }, k }
}

pub fn compose(coord: BlockCoord) -> FockLabel {
    coord.sector.label(coord.k)
}

pub fn r_charge(label: FockLabel) -> usize {
    label.r_charge()
}

pub fn block_dim(_p: u8, m: usize) -> usize {
    m + 1
}

/// Finite superposition of number states with complex amplitudes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector<T> {
    amplitudes: BTreeMap<FockLabel, Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new() -> Self {
        Self { amplitudes: BTreeMap::new() }
    }

    /// Normalized number state.
    pub fn basis(label: FockLabel) -> Self {
        let mut s = Self::new();
        s.amplitudes.insert(label, Complex::new(T::one(), T::zero()));
        s
    }

    pub fn from_amplitudes(items: impl IntoIterator<Item = (FockLabel, Complex<T>)>) -> Self {
        let mut s = Self::new();
        for (label, amp) in items {
            s.add(label, amp);
        }
        s
    }

    pub fn add(&mut self, label: FockLabel, amp: Complex<T>) {
        let slot = self.amplitudes.entry(label).or_insert_with(|| Complex::new(T::zero(), T::zero()));
        *slot = *slot + amp;
    }

    pub fn set(&mut self, label: FockLabel, amp: Complex<T>) {
        self.amplitudes.insert(label, amp);
    }

    pub fn get(&self, label: FockLabel) -> Complex<T> {
        self.amplitudes.get(&label).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FockLabel, Complex<T>)> + '_ {
        self.amplitudes.iter().map(|(l, a)| (*l, *a))
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, c: Complex<T>) {
        for a in self.amplitudes.values_mut() {
            *a = *a * c;
        }
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.scale(Complex::new(n.recip(), T::zero()));
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Sectors that carry at least one stored amplitude.
    pub fn sectors(&self) -> Vec<Sector> {
        let mut v: Vec<Sector> = self.amplitudes.keys().map(|l| decompose(*l).sector).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Dense component vectors per sector over the basis `|2k+p, M-k>`.
    pub fn by_sector(&self) -> BTreeMap<Sector, Vec<Complex<T>>> {
        let mut out: BTreeMap<Sector, Vec<Complex<T>>> = BTreeMap::new();
        for (label, amp) in &self.amplitudes {
            let c = decompose(*label);
            let v = out
                .entry(c.sector)
                .or_insert_with(|| vec![Complex::new(T::zero(), T::zero()); c.sector.dim()]);
            v[c.k] = *amp;
        }
        out
    }

    pub fn from_sectors(blocks: impl IntoIterator<Item = (Sector, Vec<Complex<T>>)>) -> Self {
        let mut s = Self::new();
        for (sector, comps) in blocks {
            debug_assert_eq!(comps.len(), sector.dim());
            for (k, a) in comps.into_iter().enumerate() {
                s.amplitudes.insert(sector.label(k), a);
            }
        }
        s
    }

    /// Probability weight `||P_{p,M} psi||²` of each occupied sector.
    pub fn sector_weights(&self) -> BTreeMap<Sector, T> {
        let mut out = BTreeMap::new();
        for (label, amp) in &self.amplitudes {
            let e = out.entry(decompose(*label).sector).or_insert(T::zero());
            *e = *e + amp.norm_sqr();
        }
        out
    }

    pub fn to_records(&self) -> Vec<AmplitudeRecord> {
        let mut labels: Vec<_> = self.amplitudes.keys().copied().collect();
        labels.sort_by_key(|l| l.charge_order_key());
        labels
            .into_iter()
            .map(|l| {
                let a = self.amplitudes[&l];
                AmplitudeRecord { n1: l.n1, n2: l.n2, re: to_f64(a.re), im: to_f64(a.im) }
            })
            .collect()
    }

    pub fn from_records(records: &[AmplitudeRecord]) -> Self {
        Self::from_amplitudes(
            records.iter().map(|r| (FockLabel::new(r.n1, r.n2), Complex::new(cst(r.re), cst(r.im)))),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_records())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let records: Vec<AmplitudeRecord> = serde_json::from_str(s)?;
        Ok(Self::from_records(&records))
    }
}

/// One serialized amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub n1: usize,
    pub n2: usize,
    pub re: f64,
    pub im: f64,
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Complex<T> {
    let (small, large, conj_small) = if a.len() <= b.len() { (a, b, true) } else { (b, a, false) };
    let mut acc = Complex::new(T::zero(), T::zero());
    for (label, x) in small.iter() {
        if let Some(y) = large.amplitudes.get(&label) {
            acc = acc + if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    acc
}

/// What the coherent-state truncation kept and dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport<T> {
    /// Largest `n1` kept.
    pub cutoff1: usize,
    /// Largest `n2` kept.
    pub cutoff2: usize,
    /// `1 - ||psi_truncated||²` before renormalization.
    pub discarded_mass: T,
    pub tail_epsilon: T,
}

/// Normalized two-mode coherent state `|z1, z2>` truncated so that less than
/// `tail_epsilon` probability is discarded.
pub fn coherent_state<T: Real>(z1: Complex<T>, z2: Complex<T>, tail_epsilon: T) -> Result<StateVector<T>> {
    coherent_state_with_report(z1, z2, tail_epsilon).map(|(s, _)| s)
}

pub fn coherent_state_with_report<T: Real>(
    z1: Complex<T>,
    z2: Complex<T>,
    tail_epsilon: T,
) -> Result<(StateVector<T>, TruncationReport<T>)> {
    if !(tail_epsilon > T::zero() && tail_epsilon < T::one()) {
        return Err(Error::TailEpsilon(to_f64(tail_epsilon)));
    }
    if !(z1.re.is_finite() && z1.im.is_finite() && z2.re.is_finite() && z2.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let half = tail_epsilon / cst(2.0);
    let mu1 = z1.norm_sqr();
    let mu2 = z2.norm_sqr();
    let cutoff1 = poisson_cutoff(mu1, half);
    let cutoff2 = poisson_cutoff(mu2, half);

    let mode1 = coherent_amplitudes(z1, cutoff1);
    let mode2 = coherent_amplitudes(z2, cutoff2);
    let mut state = StateVector::new();
    for (n1, a1) in mode1.iter().enumerate() {
        for (n2, a2) in mode2.iter().enumerate() {
            let amp = *a1 * *a2;
            if amp.norm_sqr() > T::zero() {
                state.set(FockLabel::new(n1, n2), amp);
            }
        }
    }
    let kept = state.norm_sqr();
    state.normalize()?;
    let report = TruncationReport { cutoff1, cutoff2, discarded_mass: T::one() - kept, tail_epsilon };
    Ok((state, report))
}

/// `e^{-|z|²/2} z^n / sqrt(n!)` for `n = 0..=cutoff`, evaluated in log-polar form.
fn coherent_amplitudes<T: Real>(z: Complex<T>, cutoff: usize) -> Vec<Complex<T>> {
    let mu = z.norm_sqr();
    if mu == T::zero() {
        return vec![Complex::new(T::one(), T::zero())];
    }
    let (r, theta) = z.to_polar();
    let half = cst::<T>(0.5);
    (0..=cutoff)
        .map(|n| {
            let nn = from_usize::<T>(n);
            let ln_mag = -half * mu + nn * r.ln() - half * ln_factorial::<T>(n);
            Complex::from_polar(ln_mag.exp(), nn * theta)
        })
        .collect()
}

fn ln_poisson_pmf<T: Real>(mu: T, j: usize) -> T {
    -mu + from_usize::<T>(j) * mu.ln() - ln_factorial::<T>(j)
}

/// `P(X > n)` for `X ~ Poisson(mu)`, summed directly over the upper tail.
pub(crate) fn poisson_upper_tail<T: Real>(mu: T, n: usize) -> T {
    if mu == T::zero() {
        return T::zero();
    }
    let mut total = T::zero();
    let mut j = n + 1;
    loop {
        let term = ln_poisson_pmf(mu, j).exp();
        total = total + term;
        // past the mode the terms decay at least geometrically
        if from_usize::<T>(j) > mu && term <= total * T::epsilon() {
            break;
        }
        if term == T::zero() && from_usize::<T>(j) > mu {
            break;
        }
        j += 1;
    }
    total
}

/// Smallest `n` with `P(X > n) < bound`. A Chernoff bound locates a safe
/// cutoff, then the exact tail walks it down.
pub(crate) fn poisson_cutoff<T: Real>(mu: T, bound: T) -> usize {
    if mu == T::zero() {
        return 0;
    }
    // P(X >= m) <= exp(-mu) (e mu / m)^m for m > mu
    let ln_bound = bound.ln();
    let mut m = mu.ceil().to_usize().unwrap_or(0) + 1;
    loop {
        let mm = from_usize::<T>(m);
        let chernoff = -mu + mm * (T::one() + mu.ln() - mm.ln());
        if chernoff < ln_bound {
            break;
        }
        m += 1;
    }
    let mut n = m - 1;
    while n > 0 && poisson_upper_tail(mu, n - 1) < bound {
        n -= 1;
    }
    n
}
