use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use pdc_kerr::{ModelParams64, Observable64};

use crate::{usage, Failure};

#[derive(Parser, Debug)]
#[command(name = "pdc-kerr", version, about = "Exact spectra and dynamics of the two-mode down-conversion Kerr model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Block energies for p in {0,1} and M up to --max-M.
    Spectrum(SpectrumArgs),
    /// Time series of an observable expectation value.
    Evolve(EvolveArgs),
    /// Run every invariant family and report worst residuals.
    Validate(ValidateArgs),
}

/// Model parameters: exactly one of `--resonance`, the five explicit values,
/// or `--config`.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Resonant parameter set, e.g. `g=1,omega1=1`.
    #[arg(long, value_name = "g=G,omega1=W")]
    pub resonance: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// JSON file with keys omega1, omega2, K1, K2, g.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ModelParams64, Failure> {
        let explicit = [self.omega1, self.omega2, self.k1, self.k2, self.g];
        let n_explicit = explicit.iter().filter(|x| x.is_some()).count();
        let sources = self.resonance.is_some() as usize + self.config.is_some() as usize + (n_explicit > 0) as usize;
        if sources != 1 {
            return Err(usage("give exactly one of --resonance, --config, or --omega1/--omega2/--k1/--k2/--g"));
        }
        if let Some(spec) = &self.resonance {
            let (g, w) = parse_resonance(spec)?;
            return ModelParams64::resonance(g, w).map_err(|e| usage(e.to_string()));
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            return ModelParams64::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())));
        }
        match explicit {
            [Some(w1), Some(w2), Some(k1), Some(k2), Some(g)] => {
                ModelParams64::new(w1, w2, k1, k2, g).map_err(|e| usage(e.to_string()))
            }
            _ => Err(usage("explicit parameters need all of --omega1 --omega2 --k1 --k2 --g")),
        }
    }
}

fn parse_resonance(spec: &str) -> Result<(f64, f64), Failure> {
    let (mut g, mut w) = (None, None);
    for part in spec.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| usage(format!("bad --resonance entry {part:?}")))?;
        let value: f64 = value.trim().parse().map_err(|_| usage(format!("bad number in --resonance: {value:?}")))?;
        match key.trim() {
            "g" => g = Some(value),
            "omega1" => w = Some(value),
            other => return Err(usage(format!("unknown --resonance key {other:?}"))),
        }
    }
    match (g, w) {
        (Some(g), Some(w)) => Ok((g, w)),
        _ => Err(usage("--resonance needs both g and omega1")),
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityChoice {
    #[value(name = "0")]
    Even,
    #[value(name = "1")]
    Odd,
    Both,
}

impl ParityChoice {
    pub fn values(self) -> &'static [u8] {
        match self {
            ParityChoice::Even => &[0],
            ParityChoice::Odd => &[1],
            ParityChoice::Both => &[0, 1],
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Analytic when the parameters are resonant, numeric otherwise.
    Auto,
    Analytic,
    Numeric,
    /// Both solvers plus their per-block deviation.
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub p: ParityChoice,
    #[arg(long = "max-M", alias = "max-m", value_name = "M")]
    pub max_m: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// `fock:n1,n2` or `coherent:z1re,z1im,z2re,z2im`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: String,
    /// Built-in name (n1, n2, R, parity, H, identity, x1, a1) or a JSON table file.
    #[arg(long)]
    pub observable: String,
    /// Time grid `start:stop:step`, or a single time.
    #[arg(long = "t", value_name = "START:STOP:STEP", allow_hyphen_values = true)]
    pub grid: String,
    /// Probability mass allowed outside a truncated coherent state.
    #[arg(long, default_value_t = 1e-12)]
    pub tail_epsilon: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when omitted. A `<out>.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script plotting the CSV output.
    #[arg(long, value_name = "FILE", requires = "out")]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long = "max-M", alias = "max-m", default_value_t = 40)]
    pub max_m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Perturb a dual Hahn weight to check that the harness catches it.
    #[arg(long, hide = true)]
    pub corrupt_weights: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Fock { n1: usize, n2: usize },
    Coherent { z1: [f64; 2], z2: [f64; 2] },
}

impl StateSpec {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| usage(format!("bad state descriptor {s:?}")))?;
        match kind {
            "fock" => {
                let v: Vec<usize> = parse_list(rest, s)?;
                match v[..] {
                    [n1, n2] => Ok(StateSpec::Fock { n1, n2 }),
                    _ => Err(usage(format!("fock state needs two counts: {s:?}"))),
                }
            }
            "coherent" => {
                let v: Vec<f64> = parse_list(rest, s)?;
                match v[..] {
                    [a, b, c, d] if v.iter().all(|x| x.is_finite()) => Ok(StateSpec::Coherent { z1: [a, b], z2: [c, d] }),
                    _ => Err(usage(format!("coherent state needs four finite numbers: {s:?}"))),
                }
            }
            _ => Err(usage(format!("unknown state kind {kind:?}"))),
        }
    }

    pub fn amplitudes(&self) -> Option<(Complex64, Complex64)> {
        match *self {
            StateSpec::Coherent { z1, z2 } => Some((Complex64::new(z1[0], z1[1]), Complex64::new(z2[0], z2[1]))),
            StateSpec::Fock { .. } => None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(rest: &str, whole: &str) -> Result<Vec<T>, Failure> {
    rest.split(',').map(|x| x.trim().parse().map_err(|_| usage(format!("bad number {x:?} in {whole:?}")))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    /// `start:stop:step` includes `stop` when it lies on the grid (up to a
    /// relative slack of 1e-9 steps). A bare number is a one-point grid.
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let parts: Vec<f64> = parse_list_sep(s, ':')?;
        let bad = || usage(format!("bad time grid {s:?}"));
        let grid = match parts[..] {
            [t] => Grid { start: t, stop: t, step: 0.0, count: 1 },
            [start, stop, step] => {
                if step.is_nan() || step <= 0.0 || stop < start {
                    return Err(bad());
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Grid { start, stop, step, count }
            }
            _ => return Err(bad()),
        };
        if !(grid.start.is_finite() && grid.stop.is_finite()) {
            return Err(bad());
        }
        Ok(grid)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn parse_list_sep(s: &str, sep: char) -> Result<Vec<f64>, Failure> {
    s.split(sep).map(|x| x.trim().parse().map_err(|_| usage(format!("bad number {x:?} in {s:?}")))).collect()
}

pub fn load_observable(name: &str, params: ModelParams64) -> Result<Observable64, Failure> {
    let path = std::path::Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{name}: {e}")))?;
        let table = pdc_kerr::ObservableTable::from_json(&text).map_err(|e| usage(format!("{name}: {e}")))?;
        return Observable64::from_table(&table).map_err(|e| usage(format!("{name}: {e}")));
    }
    Observable64::builtin(name, Some(params)).map_err(|e| usage(e.to_string()))
}
