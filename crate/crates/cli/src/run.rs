use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use pdc_kerr::export::{
    fmt_f64, write_spectrum_csv, write_spectrum_json, write_time_series_csv, write_time_series_json, SpectrumBlock,
};
use pdc_kerr::fock::coherent_state_with_report;
use pdc_kerr::hamiltonian::resonance_check;
use pdc_kerr::spectral::{solve_blocks, SolverChoice};
use pdc_kerr::validate::{self, ValidateConfig};
use pdc_kerr::{Evolver, FockLabel, ModelParams64, Sector, StateVector64, RESONANCE_TOL};
use serde::Serialize;

use crate::args::{load_observable, EvolveArgs, Format, Grid, Method, SpectrumArgs, StateSpec, ValidateArgs};
use crate::{usage, Failure};

const TOOL: &str = "pdc-kerr";
const VERSION: &str = env!("CARGO_PKG_VERSION");

fn is_resonant(params: &ModelParams64) -> bool {
    resonance_check(params, RESONANCE_TOL).satisfied
}

fn require_resonance(params: &ModelParams64) -> Result<(), Failure> {
    let check = resonance_check(params, RESONANCE_TOL);
    if check.satisfied {
        return Ok(());
    }
    if params.g == 0.0 {
        return Err(usage("the analytic method needs g != 0"));
    }
    let [a, b, c] = check.residuals;
    Err(usage(format!(
        "parameters are off resonance (2*omega1 - omega2 - g = {a:e}, 2*K1 + g = {b:e}, K2 + 2*g = {c:e}; tolerance {RESONANCE_TOL:e}); use --method numeric"
    )))
}

/// Buffered writer for `--out` or stdout.
fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_sidecar<M: Serialize>(out: &Path, meta: &M) -> Result<(), Failure> {
    let path = sidecar_path(out);
    let mut text = serde_json::to_string_pretty(meta).context("serializing metadata")?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumMeta<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    params: ModelParams64,
    p: &'a [u8],
    max_m: usize,
    method: &'a str,
    max_deviation: Option<f64>,
}

pub fn spectrum(a: SpectrumArgs) -> Result<u8, Failure> {
    let params = a.params.resolve()?;
    let resonant = is_resonant(&params);
    if matches!(a.method, Method::Analytic | Method::Both) {
        require_resonance(&params)?;
    }
    let sectors: Vec<Sector> = (0..=a.max_m)
        .flat_map(|m| a.p.values().iter().map(move |&p| Sector::new(p, m).expect("p is 0 or 1")))
        .collect();

    let primary = match a.method {
        Method::Analytic | Method::Both => SolverChoice::Analytic,
        Method::Numeric => SolverChoice::Numeric,
        Method::Auto if resonant => SolverChoice::Analytic,
        Method::Auto => SolverChoice::Numeric,
    };
    let method_name = match primary {
        SolverChoice::Analytic if a.method == Method::Both => "both",
        SolverChoice::Analytic => "analytic",
        _ => "numeric",
    };
    let systems = solve_blocks(&params, &sectors, primary).context("solving blocks")?;
    let numeric = if a.method == Method::Both {
        Some(solve_blocks(&params, &sectors, SolverChoice::Numeric).context("solving blocks numerically")?)
    } else {
        None
    };

    let mut worst: Option<f64> = None;
    let blocks: Vec<SpectrumBlock> = systems
        .iter()
        .enumerate()
        .map(|(i, sys)| {
            let num = numeric.as_ref().map(|n| n[i].energies.clone());
            let dev = num.as_ref().map(|n| {
                sys.energies.iter().zip(n).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            });
            if let Some(d) = dev {
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
            SpectrumBlock {
                p: sys.sector.p(),
                m: sys.sector.m(),
                energies: sys.energies.clone(),
                energies_numeric: num,
                max_deviation: dev,
            }
        })
        .collect();

    let meta = SpectrumMeta {
        tool: TOOL,
        version: VERSION,
        command: "spectrum",
        params,
        p: a.p.values(),
        max_m: a.max_m,
        method: method_name,
        max_deviation: worst,
    };
    let mut w = open_output(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_spectrum_csv(&mut w, &blocks),
        Format::Json => write_spectrum_json(&mut w, &meta, &blocks),
    }
    .context("writing spectrum")?;
    w.flush().context("writing spectrum")?;
    drop(w);
    if let Some(out) = &a.out {
        write_sidecar(out, &meta)?;
    }
    if let Some(d) = worst {
        eprintln!("max deviation analytic vs numeric: {}", fmt_f64(d));
    }
    Ok(0)
}

#[derive(Serialize)]
struct EvolveMeta<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    params: ModelParams64,
    state: &'a StateSpec,
    observable: &'a str,
    tail_epsilon: f64,
    discarded_mass: Option<f64>,
    grid: Grid,
    solver: &'a str,
}

pub fn evolve(a: EvolveArgs) -> Result<u8, Failure> {
    let params = a.params.resolve()?;
    let spec = StateSpec::parse(&a.state)?;
    let grid = Grid::parse(&a.grid)?;
    let observable = load_observable(&a.observable, params)?;
    if !(a.tail_epsilon > 0.0 && a.tail_epsilon < 1.0) {
        return Err(usage("--tail-epsilon must lie in (0, 1)"));
    }

    let (psi, discarded) = match &spec {
        StateSpec::Fock { n1, n2 } => (StateVector64::basis(FockLabel::new(*n1, *n2)), None),
        StateSpec::Coherent { .. } => {
            let (z1, z2) = spec.amplitudes().expect("coherent state");
            let (s, report) = coherent_state_with_report(z1, z2, a.tail_epsilon).map_err(|e| usage(e.to_string()))?;
            (s, Some(report.discarded_mass))
        }
    };
    let evolver = Evolver::for_state(params, &psi).context("diagonalizing blocks")?;
    let series = evolver.time_series(&psi, &observable, &grid.times()).context("evaluating time series")?;

    let meta = EvolveMeta {
        tool: TOOL,
        version: VERSION,
        command: "evolve",
        params,
        state: &spec,
        observable: &a.observable,
        tail_epsilon: a.tail_epsilon,
        discarded_mass: discarded,
        grid,
        solver: if evolver.is_analytic() { "analytic" } else { "numeric" },
    };
    let mut w = open_output(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_time_series_csv(&mut w, &series),
        Format::Json => write_time_series_json(&mut w, &meta, &series),
    }
    .context("writing time series")?;
    w.flush().context("writing time series")?;
    drop(w);
    if let Some(out) = &a.out {
        write_sidecar(out, &meta)?;
        if let Some(script) = &a.gnuplot {
            if a.format != Format::Csv {
                return Err(usage("--gnuplot needs --format csv"));
            }
            write_gnuplot(script, out, &a.observable)?;
        }
    }
    Ok(0)
}

fn write_gnuplot(script: &Path, data: &Path, observable: &str) -> Result<(), Failure> {
    let data = data.display().to_string().replace('\'', "''");
    let text = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set ylabel '<{observable}>'\n\
         plot '{data}' using 1:2 with lines title 'Re', \\\n     '{data}' using 1:3 with lines title 'Im'\n"
    );
    std::fs::write(script, text).with_context(|| format!("cannot write {}", script.display()))?;
    Ok(())
}

pub fn validate(a: ValidateArgs) -> Result<u8, Failure> {
    let cfg = ValidateConfig { max_m: a.max_m, seed: a.seed, trials: a.trials, corrupt_weights: a.corrupt_weights };
    let start = Instant::now();
    let report = validate::run(&cfg);
    for f in &report.families {
        println!("{f}");
    }
    let failed = report.families.iter().filter(|f| !f.passed).count();
    println!(
        "{} families, {} failed, {:.2}s (max-M={}, seed={}, trials={})",
        report.families.len(),
        failed,
        start.elapsed().as_secs_f64(),
        cfg.max_m,
        cfg.seed,
        cfg.trials
    );
    Ok(if failed == 0 { 0 } else { 1 })
}
