//! Observables given by their number-basis matrix elements on a finite band
//! of offsets `(n1' - n1, n2' - n2)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockLabel, StateVector};
use crate::hamiltonian::{matrix_element, ModelParams};
use crate::scalar::{cst, from_usize, Real};

type ElementFn<T> = dyn Fn(FockLabel, FockLabel) -> Complex<T> + Send + Sync;

/// `X` with `element(row, col) = <row|X|col>`, nonzero only when
/// `row - col` is one of `offsets`.
#[derive(Clone)]
pub struct Observable<T> {
    name: String,
    offsets: Vec<(i64, i64)>,
    hermitian: bool,
    element: Arc<ElementFn<T>>,
}

impl<T> fmt::Debug for Observable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("offsets", &self.offsets)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Real> Observable<T> {
    pub fn from_fn(
        name: impl Into<String>,
        offsets: Vec<(i64, i64)>,
        hermitian: bool,
        element: impl Fn(FockLabel, FockLabel) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), offsets, hermitian, element: Arc::new(element) }
    }

    /// Observable diagonal in the number basis.
    pub fn diagonal(name: impl Into<String>, f: impl Fn(FockLabel) -> T + Send + Sync + 'static) -> Self {
        Self::from_fn(name, vec![(0, 0)], true, move |r, c| if r == c { re(f(c)) } else { re(T::zero()) })
    }

    pub fn identity() -> Self {
        Self::diagonal("identity", |_| T::one())
    }

    pub fn n1() -> Self {
        Self::diagonal("n1", |l| from_usize(l.n1))
    }

    pub fn n2() -> Self {
        Self::diagonal("n2", |l| from_usize(l.n2))
    }

    /// Conserved charge `R = n1 + 2 n2`.
    pub fn charge() -> Self {
        Self::diagonal("R", |l| from_usize(l.r_charge()))
    }

    /// Projector onto odd `n1`.
    pub fn parity() -> Self {
        Self::diagonal("parity", |l| if l.n1 % 2 == 1 { T::one() } else { T::zero() })
    }

    /// The Hamiltonian itself.
    pub fn hamiltonian(params: ModelParams<T>) -> Self {
        Self::from_fn("H", vec![(0, 0), (2, -1), (-2, 1)], true, move |r, c| re(matrix_element(&params, r, c)))
    }

    /// Mode-1 annihilation operator; couples different sectors.
    pub fn a1() -> Self {
        Self::from_fn("a1", vec![(-1, 0)], false, |r, c| {
            if c.n1 == r.n1 + 1 && c.n2 == r.n2 {
                re(from_usize::<T>(c.n1).sqrt())
            } else {
                re(T::zero())
            }
        })
    }

    /// Quadrature `x1 = (a1 + a1†)/√2`.
    pub fn x1() -> Self {
        Self::from_fn("x1", vec![(-1, 0), (1, 0)], true, |r, c| {
            if r.n2 != c.n2 {
                return re(T::zero());
            }
            let top = if c.n1 == r.n1 + 1 {
                c.n1
            } else if r.n1 == c.n1 + 1 {
                r.n1
            } else {
                return re(T::zero());
            };
            re((from_usize::<T>(top) * cst(0.5)).sqrt())
        })
    }

    /// Built-in observable by name: `identity`, `n1`, `n2`, `R`, `parity`,
    /// `x1`, `a1`, or `H` (needs `params`).
    pub fn builtin(name: &str, params: Option<ModelParams<T>>) -> Result<Self> {
        Ok(match name {
            "identity" | "1" => Self::identity(),
            "n1" => Self::n1(),
            "n2" => Self::n2(),
            "R" => Self::charge(),
            "parity" | "P" => Self::parity(),
            "x1" => Self::x1(),
            "a1" => Self::a1(),
            "H" => Self::hamiltonian(params.ok_or_else(|| Error::Parse("observable H needs model parameters".into()))?),
            other => return Err(Error::Parse(format!("unknown observable {other:?}"))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn element(&self, row: FockLabel, col: FockLabel) -> Complex<T> {
        (self.element)(row, col)
    }

    /// `X |psi>`, exact on the finite support of `psi`.
    pub fn apply(&self, psi: &StateVector<T>) -> StateVector<T> {
        let mut out = StateVector::new();
        for (col, amp) in psi.iter() {
            for &(d1, d2) in &self.offsets {
                if let Some(row) = col.offset(d1, d2) {
                    let x = self.element(row, col);
                    if x != re(T::zero()) {
                        out.add(row, x * amp);
                    }
                }
            }
        }
        out
    }

    /// Largest `|X_ab - conj(X_ba)|` over pairs drawn from `labels`.
    pub fn hermiticity_residual(&self, labels: &[FockLabel]) -> T {
        let mut worst = T::zero();
        for &a in labels {
            for &(d1, d2) in &self.offsets {
                if let Some(b) = a.offset(d1, d2) {
                    let r = (self.element(b, a) - self.element(a, b).conj()).norm();
                    worst = worst.max(r);
                }
            }
        }
        worst
    }

    /// Product `self · other`, banded on the sums of offsets.
    pub fn compose(&self, other: &Observable<T>) -> Observable<T> {
        let mut offs: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(a1, a2) in &self.offsets {
            for &(b1, b2) in &other.offsets {
                offs.insert((a1 + b1, a2 + b2));
            }
        }
        let (x, y) = (self.clone(), other.clone());
        let inner_offsets = other.offsets.clone();
        Observable::from_fn(format!("{}*{}", self.name, other.name), offs.into_iter().collect(), false, move |r, c| {
            let mut acc = re(T::zero());
            for &(d1, d2) in &inner_offsets {
                if let Some(mid) = c.offset(d1, d2) {
                    acc = acc + x.element(r, mid) * y.element(mid, c);
                }
            }
            acc
        })
    }

    /// Observable from an explicit table of matrix elements.
    pub fn from_table(table: &ObservableTable) -> Result<Self> {
        let mut map: BTreeMap<(FockLabel, FockLabel), Complex<T>> = BTreeMap::new();
        let mut offs = BTreeSet::new();
        for e in &table.entries {
            let row = FockLabel::new(e.row[0], e.row[1]);
            let col = FockLabel::new(e.col[0], e.col[1]);
            offs.insert((row.n1 as i64 - col.n1 as i64, row.n2 as i64 - col.n2 as i64));
            let v = Complex::new(cst::<T>(e.re), cst::<T>(e.im));
            let slot = map.entry((row, col)).or_insert(re(T::zero()));
            *slot = *slot + v;
        }
        if table.hermitian {
            for (&(r, c), v) in &map {
                let mirror = map.get(&(c, r)).copied().unwrap_or(re(T::zero()));
                if (*v - mirror.conj()).norm() > cst(1e-12) {
                    return Err(Error::NotHermitian(table.name.clone()));
                }
            }
        }
        let map = Arc::new(map);
        Ok(Self::from_fn(table.name.clone(), offs.into_iter().collect(), table.hermitian, move |r, c| {
            map.get(&(r, c)).copied().unwrap_or(re(T::zero()))
        }))
    }
}

/// JSON form of a tabulated observable.
///
/// ```json
/// {"name": "hop", "hermitian": true,
///  "entries": [{"row": [1, 0], "col": [0, 0], "re": 1.0, "im": 0.0}, ...]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableTable {
    pub name: String,
    pub hermitian: bool,
    pub entries: Vec<TableEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub row: [usize; 2],
    pub col: [usize; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ObservableTable {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
