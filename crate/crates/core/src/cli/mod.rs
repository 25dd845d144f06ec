//! Command-line front end.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use config::{parse_scenario, RawConfig};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::plant::{power_coefficient, TurbineParams};
use crate::sim::{self, RunMetrics, Scenario, WindSource};
use crate::wind::{generate_wind, WindSpec};

#[derive(Debug, Parser)]
#[command(
    name = "windsmc",
    version,
    about = "Region-2 wind turbine speed control simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override a scenario key, e.g. `--set smc.k2=12`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Override `sim.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario; writes record.csv and metrics.txt.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run two scenarios on the same wind and print a metrics table.
    Compare {
        /// Candidate first, baseline second. Pass twice or give two paths.
        #[arg(long, num_args = 1..=2, required = true, action = clap::ArgAction::Append)]
        scenario: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run scenarios over a parameter grid in parallel; writes sweep.csv.
    Sweep {
        #[arg(long, required = true)]
        scenario: Vec<PathBuf>,
        /// `key=v1,v2,...`. Repeatable; the grid is the Cartesian product.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        grid: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate Cp over a (lambda, beta) grid; writes cp_surface.csv.
    CpSurface {
        /// Takes the aerodynamic coefficients from this scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 12.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        lambda_step: f64,
        #[arg(long, default_value_t = 0.0)]
        beta_min: f64,
        #[arg(long, default_value_t = 0.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic wind series; writes wind.csv.
    WindGen {
        /// Takes wind.*, sim.t_end and sim.seed from this scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long)]
        turbulence_intensity: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs a parsed command and returns what it prints on stdout.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run { scenario, common } => run_cmd(&scenario, &common),
        Command::Compare { scenario, common } => match scenario.as_slice() {
            [a, b] => compare_cmd(a, b, &common),
            _ => Err(Error::config(
                "scenario",
                "compare needs exactly two scenarios",
            )),
        },
        Command::Sweep {
            scenario,
            grid,
            common,
        } => sweep_cmd(&scenario, &grid, &common),
        Command::CpSurface {
            scenario,
            lambda_min,
            lambda_max,
            lambda_step,
            beta_min,
            beta_max,
            beta_step,
            common,
        } => {
            let params = match scenario {
                Some(path) => parse_scenario(&path, &common.set, common.seed)?.params,
                None => TurbineParams::table1(),
            };
            let lambdas = axis("lambda", lambda_min, lambda_max, lambda_step)?;
            let betas = axis("beta", beta_min, beta_max, beta_step)?;
            cp_surface_cmd(&params, &lambdas, &betas, &common.out)
        }
        Command::WindGen {
            scenario,
            mean,
            turbulence_intensity,
            duration,
            dt,
            common,
        } => {
            let base = match scenario {
                Some(path) => parse_scenario(&path, &common.set, common.seed)?,
                None => Scenario {
                    seed: common.seed.unwrap_or(Scenario::default().seed),
                    ..Scenario::default()
                },
            };
            let (base_mean, base_ti, base_dt) = match base.wind {
                WindSource::Synthetic {
                    mean,
                    turbulence_intensity,
                    dt,
                } => (mean, turbulence_intensity, dt.unwrap_or(base.dt)),
                _ => {
                    return Err(Error::config(
                        "wind.source",
                        "wind-gen needs a synthetic source",
                    ))
                }
            };
            let spec = WindSpec {
                mean: mean.unwrap_or(base_mean),
                turbulence_intensity: turbulence_intensity.unwrap_or(base_ti),
                duration: duration.unwrap_or(base.t_end),
                dt: dt.unwrap_or(base_dt),
                seed: base.seed,
            };
            wind_gen_cmd(&spec, &common.out)
        }
    }
}

pub fn run_cmd(scenario_path: &Path, common: &Common) -> Result<String> {
    let sc = parse_scenario(scenario_path, &common.set, common.seed)?;
    let (record, metrics) = sim::run(&sc)?;
    create_out(&common.out)?;
    record.write_csv(&common.out.join("record.csv"))?;
    let text = metrics.to_key_values();
    write_text(&common.out.join("metrics.txt"), &text)?;
    Ok(format!("controller = {}\n{text}", sc.controller.name()))
}

pub fn compare_cmd(candidate: &Path, baseline: &Path, common: &Common) -> Result<String> {
    let a = parse_scenario(candidate, &common.set, common.seed)?;
    let b = parse_scenario(baseline, &common.set, common.seed)?;
    if !a.same_environment(&b) {
        return Err(Error::config(
            "scenario",
            "compared scenarios must share plant, wind, disturbance, horizon and seed",
        ));
    }
    let cmp = sim::compare(&a, &b)?;
    let (la, lb) = if a.controller == b.controller {
        ("a".to_owned(), "b".to_owned())
    } else {
        (
            a.controller.name().to_owned(),
            b.controller.name().to_owned(),
        )
    };
    let table = cmp.table(&la, &lb);
    create_out(&common.out)?;
    write_text(&common.out.join("comparison.txt"), &table)?;
    Ok(table)
}

/// Expands `key=v1,v2,...` specs into the list of override sets.
pub fn expand_grid(grid: &[String]) -> Result<Vec<Vec<(String, String)>>> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for spec in grid {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::config(spec.as_str(), "grid must look like key=v1,v2,..."))?;
        let values: Vec<&str> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::config(key.trim(), "grid has no values"));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.trim().to_owned(), (*v).to_owned()));
                    c
                })
            })
            .collect();
    }
    Ok(combos)
}

pub fn sweep_cmd(scenarios: &[PathBuf], grid: &[String], common: &Common) -> Result<String> {
    let combos = expand_grid(grid)?;
    let keys: Vec<String> = combos[0].iter().map(|(k, _)| k.clone()).collect();
    let mut jobs = Vec::new();
    for path in scenarios {
        for combo in &combos {
            let mut sets = common.set.clone();
            sets.extend(combo.iter().map(|(k, v)| format!("{k}={v}")));
            // Configuration errors abort the whole sweep before anything runs.
            let sc = parse_scenario(path, &sets, common.seed)?;
            jobs.push((path.clone(), combo.clone(), sc));
        }
    }
    let results: Vec<Result<RunMetrics>> = jobs
        .par_iter()
        .map(|(_, _, sc)| sim::run(sc).map(|(_, m)| m))
        .collect();

    let mut csv = String::from("scenario");
    for k in &keys {
        write!(csv, ",{k}").unwrap();
    }
    csv.push_str(
        ",mse_speed,mse_lambda,torque_std,energy_efficiency,min_stability_margin,status\n",
    );
    let mut best: Option<(f64, usize)> = None;
    let mut failures = 0usize;
    for (i, ((path, combo, _), res)) in jobs.iter().zip(&results).enumerate() {
        write!(csv, "{}", path.display()).unwrap();
        for (_, v) in combo {
            write!(csv, ",{v}").unwrap();
        }
        match res {
            Ok(m) => {
                writeln!(
                    csv,
                    ",{},{},{},{},{},ok",
                    sig9(m.mse_speed),
                    sig9(m.mse_lambda),
                    sig9(m.torque_std),
                    sig9(m.energy_efficiency),
                    sig9(m.monitors.min_stability_margin)
                )
                .unwrap();
                if best.is_none_or(|(b, _)| m.mse_speed < b) {
                    best = Some((m.mse_speed, i));
                }
            }
            Err(e) => {
                failures += 1;
                writeln!(csv, ",,,,,,\"{}\"", e.to_string().replace('"', "'")).unwrap();
            }
        }
    }
    create_out(&common.out)?;
    write_text(&common.out.join("sweep.csv"), &csv)?;

    let mut out = format!("{} runs, {} failed\n", jobs.len(), failures);
    if let Some((mse, i)) = best {
        let (path, combo, _) = &jobs[i];
        let settings: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(
            out,
            "best mse_speed = {} : {} {}",
            sig9(mse),
            path.display(),
            settings.join(" ")
        )
        .unwrap();
    }
    if failures > 0 {
        let first = results
            .into_iter()
            .find_map(|r| r.err())
            .expect("counted a failure");
        eprint!("{out}");
        return Err(first);
    }
    Ok(out)
}

/// Evenly spaced values min, min + step, ..., up to max inclusive.
pub fn axis(name: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && max >= min) {
        return Err(Error::config(
            format!("{name}-max"),
            "must be finite and >= the minimum",
        ));
    }
    if max == min {
        return Ok(vec![min]);
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config(format!("{name}-step"), "must be > 0"));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

pub fn cp_surface_cmd(
    params: &TurbineParams,
    lambdas: &[f64],
    betas: &[f64],
    out: &Path,
) -> Result<String> {
    let mut csv = String::from("lambda,beta,cp\n");
    let mut warnings = 0usize;
    let mut best: Option<(f64, f64, f64)> = None;
    for &beta in betas {
        for &lambda in lambdas {
            match power_coefficient(lambda, beta, params) {
                Ok(cp) => {
                    writeln!(csv, "{},{},{}", sig9(lambda), sig9(beta), sig9(cp)).unwrap();
                    if best.is_none_or(|(_, _, b)| cp > b) {
                        best = Some((lambda, beta, cp));
                    }
                }
                Err(Error::Singularity { .. }) | Err(Error::Domain(_)) => {
                    warnings += 1;
                    writeln!(csv, "{},{},", sig9(lambda), sig9(beta)).unwrap();
                }
                Err(e) => return Err(e),
            }
        }
    }
    create_out(out)?;
    write_text(&out.join("cp_surface.csv"), &csv)?;
    let mut text = String::new();
    match best {
        Some((l, b, cp)) => writeln!(
            text,
            "argmax: lambda* = {l:.3}, beta* = {b:.3}, cp* = {cp:.6}"
        )
        .unwrap(),
        None => writeln!(text, "argmax: none (no valid grid points)").unwrap(),
    }
    writeln!(
        text,
        "warnings: {warnings} singular or out-of-domain points"
    )
    .unwrap();
    Ok(text)
}

pub fn wind_gen_cmd(spec: &WindSpec, out: &Path) -> Result<String> {
    let profile = generate_wind(spec)?;
    create_out(out)?;
    profile.write_csv(&out.join("wind.csv"))?;
    Ok(format!(
        "{} samples, mean = {:.4} m/s, std = {:.4} m/s\n",
        profile.len(),
        profile.sample_mean(),
        profile.sample_std()
    ))
}
