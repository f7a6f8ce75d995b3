use std::io::{Read, Write};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::payoff::Payoff;
use crate::experiment::rate::{fit_rate, RateFit};
use crate::experiment::reference::{reference_fake_bm, reference_target, require_fake_bm};
use crate::experiment::stats::mc_stats;
use crate::particle_schemes::{quad_var_variance, run_system, Scheme, SystemConfig};
use crate::stochastic_core::{derive_seed, NoiseSource, TimeGrid};

pub const CSV_COLUMNS: [&str; 14] = [
    "scheme",
    "payoff",
    "h",
    "N",
    "delta",
    "epsilon",
    "seed",
    "estimate",
    "stderr",
    "reference",
    "abs_error",
    "qv_variance",
    "clamp_count",
    "runtime_ms",
];

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scheme: String,
    pub payoff: String,
    pub h: f64,
    pub n: usize,
    pub delta: f64,
    /// Bandwidth of the kernel scheme; `None` for the half-step scheme.
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub qv_variance: f64,
    pub clamp_count: usize,
    pub runtime_ms: u64,
}

/// Coordinates of one simulation; every payoff is read off the same run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub scheme: Scheme,
    pub steps: usize,
    pub n: usize,
    pub delta: f64,
    pub epsilon: Option<f64>,
}

impl Cell {
    pub fn seed(&self, master: u64) -> u64 {
        let code = match self.scheme {
            Scheme::HalfStep => 1,
            Scheme::NwEuler => 2,
            Scheme::GaussianEuler => 3,
        };
        derive_seed(
            master,
            &[
                code,
                self.steps as u64,
                self.n as u64,
                self.delta.to_bits(),
                self.epsilon.map_or(0, f64::to_bits),
            ],
        )
    }
}

/// Cells in output order: scheme, step count, N, delta, epsilon.
pub fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for scheme in cfg.schemes()? {
        for steps in cfg.step_counts()? {
            let h = cfg.model.horizon / steps as f64;
            for &n in &cfg.sweep.n {
                for &delta in &cfg.sweep.delta {
                    let eps: Vec<Option<f64>> = match scheme {
                        Scheme::NwEuler => cfg.epsilons(h).into_iter().map(Some).collect(),
                        _ => vec![None],
                    };
                    for epsilon in eps {
                        out.push(Cell {
                            scheme,
                            steps,
                            n,
                            delta,
                            epsilon,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Reference value per payoff, in config order.
pub fn references(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let payoffs = cfg.payoffs()?;
    match cfg.reference.kind.as_str() {
        "fake_bm" => {
            require_fake_bm(&cfg.local_vol()?, cfg.model.x0, cfg.model.horizon)?;
            payoffs.iter().map(reference_fake_bm).collect()
        }
        "target_mc" => {
            if cfg.model.x0 != 0.0 {
                return Err(Error::Config("target_mc reference starts at x0 = 0".into()));
            }
            let seed = cfg.reference.seed.unwrap_or_else(|| derive_seed(cfg.seed, &[u64::MAX]));
            let vals = reference_target(&cfg.local_vol()?, &payoffs, seed, cfg.reference_setup())?;
            Ok(vals.into_iter().map(|(v, _)| v).collect())
        }
        _ => Ok(vec![f64::NAN; payoffs.len()]),
    }
}

pub fn system_config(cfg: &ExperimentConfig, cell: &Cell) -> Result<SystemConfig<f64>> {
    let grid = TimeGrid::with_steps(cfg.model.horizon, cell.steps)?;
    let params = cfg.params(cell.steps, cell.delta, cell.epsilon)?;
    let mut sys = SystemConfig::new(
        cell.scheme,
        grid,
        cell.n,
        cfg.local_vol()?,
        cfg.stoch_vol()?,
        params,
        cell.seed(cfg.seed),
    );
    sys.x0 = cfg.model.x0;
    sys.strict = cfg.scheme.strict;
    sys.mode = cfg.evaluation()?;
    sys.noise = NoiseSource {
        seed: cell.seed(cfg.seed),
        kind: cfg.noise_kind()?,
    };
    Ok(sys)
}

/// Runs one cell and returns one row per payoff.
pub fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    payoffs: &[Payoff],
    refs: &[f64],
) -> Vec<SweepResult> {
    let seed = cell.seed(cfg.seed);
    let h = cfg.model.horizon / cell.steps as f64;
    let row = |payoff: &Payoff, reference: f64| SweepResult {
        scheme: cell.scheme.name().to_string(),
        payoff: payoff.name().to_string(),
        h,
        n: cell.n,
        delta: cell.delta,
        epsilon: cell.epsilon,
        seed,
        estimate: f64::NAN,
        stderr: f64::NAN,
        reference,
        abs_error: f64::NAN,
        qv_variance: f64::NAN,
        clamp_count: 0,
        runtime_ms: 0,
    };
    let start = Instant::now();
    let out = system_config(cfg, cell).and_then(|sys| run_system(&sys));
    let elapsed = if cfg.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    match out {
        Ok(out) => {
            let qv = quad_var_variance(&out.stats).unwrap_or(f64::NAN);
            payoffs
                .iter()
                .zip(refs)
                .map(|(p, &r)| {
                    let v: Vec<f64> = out.stats.terminal_x.iter().map(|&x| p.eval(x)).collect();
                    let (estimate, stderr) = mc_stats(&v).unwrap_or((f64::NAN, f64::NAN));
                    SweepResult {
                        estimate,
                        stderr,
                        abs_error: (estimate - r).abs(),
                        qv_variance: qv,
                        clamp_count: out.state.clamp_count,
                        runtime_ms: elapsed,
                        ..row(p, r)
                    }
                })
                .collect()
        }
        Err(e) => {
            log::warn!("cell {cell:?} failed: {e}");
            payoffs
                .iter()
                .zip(refs)
                .map(|(p, &r)| SweepResult {
                    runtime_ms: elapsed,
                    ..row(p, r)
                })
                .collect()
        }
    }
}

/// All rows of the configured sweep, in deterministic order. A failing cell
/// yields NaN rows and a warning; the sweep continues.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    let payoffs = cfg.payoffs()?;
    let refs = references(cfg)?;
    let mut rows = Vec::new();
    for cell in cells(cfg)? {
        log::info!(
            "cell {} h={} N={} delta={}",
            cell.scheme,
            cfg.model.horizon / cell.steps as f64,
            cell.n,
            cell.delta
        );
        rows.extend(run_cell(cfg, &cell, &payoffs, &refs));
    }
    Ok(rows)
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(rows: &[SweepResult], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.payoff.clone(),
            fmt_f64(r.h),
            r.n.to_string(),
            fmt_f64(r.delta),
            r.epsilon.map(fmt_f64).unwrap_or_default(),
            r.seed.to_string(),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            fmt_f64(r.reference),
            fmt_f64(r.abs_error),
            fmt_f64(r.qv_variance),
            r.clamp_count.to_string(),
            r.runtime_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepResult>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Config(format!("unexpected csv header: {header:?}")));
    }
    let f = |s: &str| s.parse::<f64>().map_err(csv_err);
    let u = |s: &str| s.parse::<u64>().map_err(csv_err);
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(SweepResult {
                scheme: rec[0].to_string(),
                payoff: rec[1].to_string(),
                h: f(&rec[2])?,
                n: u(&rec[3])? as usize,
                delta: f(&rec[4])?,
                epsilon: if rec[5].is_empty() { None } else { Some(f(&rec[5])?) },
                seed: u(&rec[6])?,
                estimate: f(&rec[7])?,
                stderr: f(&rec[8])?,
                reference: f(&rec[9])?,
                abs_error: f(&rec[10])?,
                qv_variance: f(&rec[11])?,
                clamp_count: u(&rec[12])? as usize,
                runtime_ms: u(&rec[13])?,
            })
        })
        .collect()
}

/// Rate fit of `abs_error` against `h` for one `(scheme, N, delta)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRate {
    pub scheme: String,
    pub n: usize,
    pub delta: f64,
    pub fit: Result<RateFit>,
}

/// Fits a rate per `(scheme, N, delta)` group of rows with the given payoff.
/// Repeated step sizes within a group are averaged.
pub fn rates_by_group(rows: &[SweepResult], payoff: &str, window: usize) -> Vec<GroupRate> {
    let mut keys: Vec<(String, usize, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.payoff == payoff) {
        let k = (r.scheme.clone(), r.n, r.delta);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(scheme, n, delta)| {
            let mut hs: Vec<f64> = Vec::new();
            let mut errs: Vec<(f64, usize)> = Vec::new();
            for r in rows
                .iter()
                .filter(|r| r.payoff == payoff && r.scheme == scheme && r.n == n && r.delta == delta)
            {
                match hs.iter().position(|&h| h == r.h) {
                    Some(i) => {
                        errs[i].0 += r.abs_error;
                        errs[i].1 += 1;
                    }
                    None => {
                        hs.push(r.h);
                        errs.push((r.abs_error, 1));
                    }
                }
            }
            let e: Vec<f64> = errs.iter().map(|(s, c)| s / *c as f64).collect();
            GroupRate {
                scheme,
                n,
                delta,
                fit: fit_rate(&hs, &e, window),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
seed = 3
[model]
stoch_vol = "rough_bergomi"
[scheme]
c_min = 0.05
[sweep]
steps = [1, 2, 4]
n = [50, 100]
payoffs = ["cosine"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn cardinality_and_order() {
        let cfg = small();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].h, 1.0);
        assert_eq!((rows[1].h, rows[1].n), (1.0, 100));
        assert!(rows.iter().all(|r| r.abs_error == (r.estimate - r.reference).abs()));
    }

    #[test]
    fn csv_round_trip_is_byte_stable() {
        let cfg = small();
        let mut a = Vec::new();
        write_csv(&run_sweep(&cfg).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_sweep(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.starts_with("scheme,payoff,h,N,delta,epsilon,seed,estimate,stderr,reference,abs_error,qv_variance,clamp_count,runtime_ms\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&a[..]).unwrap();
        let mut c = Vec::new();
        write_csv(&back, &mut c).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn failing_cell_is_recorded() {
        let mut cfg = small();
        cfg.scheme.strict = true;
        cfg.scheme.c_min = Some(1.5);
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.estimate.is_nan()));
    }

    #[test]
    fn group_rates() {
        let mk = |h: f64, e: f64| SweepResult {
            scheme: "half_step".into(),
            payoff: "cosine".into(),
            h,
            n: 10,
            delta: 0.1,
            epsilon: None,
            seed: 0,
            estimate: 0.0,
            stderr: 0.0,
            reference: 0.0,
            abs_error: e,
            qv_variance: 0.0,
            clamp_count: 0,
            runtime_ms: 0,
        };
        let rows: Vec<_> = [1.0, 0.5, 0.25, 0.125].iter().map(|&h| mk(h, 2.0 * h)).collect();
        let g = rates_by_group(&rows, "cosine", 3);
        assert_eq!(g.len(), 1);
        assert!((g[0].fit.as_ref().unwrap().slope - 1.0).abs() < 1e-12);
    }
}
