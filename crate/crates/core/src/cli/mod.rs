//! Command-line front end: scenario files in, `report.json` and CSV files out.
//!
//! Defaults for every optional scenario parameter:
//!
//! | parameter          | default                                              |
//! |--------------------|------------------------------------------------------|
//! | `point`            | `1`                                                  |
//! | `seed`             | `0`                                                  |
//! | `radii`            | nine radii from `min(0.1, d(x,q)/4)` by `√10` steps for loxodromic maps, else `0.1, 0.03, 0.01, 0.003, 0.001` |
//! | `samples_per_ball` | `128`                                                |
//! | `n_max`            | `50` for `orbit`, `5000` for `gauge` and `verdict1`  |
//! | `t_max`            | `10`                                                 |
//! | `sample_count`     | `100`                                                |
//! | `grid_size`        | `64` for `verdict2`, `200` for `approx-seq`          |
//! | `m_max`            | `10000`                                              |
//! | `tolerances`       | `collapse_tol = 1e-4`, `candidate_radius = 0.1`      |
//!
//! Command-line flags override scenario values, which override defaults.

mod battery;

pub use battery::{run_battery, BatteryRow, SUITES};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::equibaire::{
    approximating_sequence, certify_linear_bound, default_radii, estimate_gauge, theorem1_verdict,
    theorem2_verdict, CollapseConfig, Evidence, FamilySpec, Theorem1Config, Theorem2Config,
};
use crate::error::{Error, Result};
use crate::flow::{FlowGenerator, SubgroupType};
use crate::moebius::{Basin, MoebiusMap, BASIN_TOL};
use crate::sphere::{SphereGrid, SpherePoint};

const DEFAULT_RADII: [f64; 5] = [0.1, 0.03, 0.01, 0.003, 0.001];
const DEFAULT_SAMPLES_PER_BALL: usize = 128;
const DEFAULT_ORBIT_N: usize = 50;
const DEFAULT_GAUGE_N: usize = 5000;
const DEFAULT_T_MAX: f64 = 10.0;
const DEFAULT_SAMPLE_COUNT: usize = 100;
const DEFAULT_VERDICT2_GRID: usize = 64;
const DEFAULT_APPROX_GRID: usize = 200;
const DEFAULT_M_MAX: usize = 10_000;
const TOLERANCE_KEYS: [&str; 2] = ["collapse_tol", "candidate_radius"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;

const AFTER_HELP: &str = "\
Output files (in --out):
  report.json     scenario echo and experiment result
  gauge.csv       r,S,S_over_r  (gauge, verdict1)
  trajectory.csv  t_or_n,re,im,is_inf,chordal_dist_to_limit  (orbit, flow)
                  re and im are empty at infinity; the distance is empty when no limit exists

Exit codes: 0 analysis completed (verdicts holds, fails and out_of_scope alike),
            2 malformed input, 3 internal basis disagreement.";

#[derive(Debug, Parser)]
#[command(name = "equibaire", version, about = "Möbius dynamics and Equi-Baire one verdicts", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Run a built-in battery: canonical-forms, theorem1, theorem2, metric-axioms.
    Battery {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    /// Output directory (created if missing).
    #[arg(long, default_value = "equibaire-out")]
    pub out: PathBuf,
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated descending radii.
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// JSON object, e.g. '{"collapse_tol": 1e-5}'.
    #[arg(long)]
    pub tolerance_overrides: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classify,
    Fixpoints,
    Normalize,
    Orbit,
    Flow,
    Gauge,
    Verdict1,
    Verdict2,
    ApproxSeq,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<SpherePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_ball: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MoebiusMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<FlowGenerator>,
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: Parameters,
}

fn field_value<T: serde::de::DeserializeOwned>(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<()> {
    if let Some(v) = obj.get(key) {
        serde_json::from_value::<T>(v.clone()).map_err(|e| Error::malformed(key, e.to_string()))?;
    }
    Ok(())
}

impl Scenario {
    /// Parses and validates a scenario; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::malformed("scenario", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::malformed("scenario", "expected a JSON object"))?;
        if !obj.contains_key("experiment") {
            return Err(Error::malformed("experiment", "missing field `experiment`"));
        }
        field_value::<MoebiusMap>(obj, "map")?;
        field_value::<FlowGenerator>(obj, "generator")?;
        field_value::<Experiment>(obj, "experiment")?;
        field_value::<Parameters>(obj, "parameters")?;
        let s: Scenario = serde_json::from_value(value)
            .map_err(|e| Error::malformed("scenario", e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        use Experiment::*;
        match (&self.map, &self.generator) {
            (Some(_), Some(_)) => {
                return Err(Error::malformed(
                    "map",
                    "give either `map` or `generator`, not both",
                ))
            }
            (None, None) => {
                return Err(Error::malformed(
                    "map",
                    "one of `map` or `generator` is required",
                ))
            }
            _ => {}
        }
        let needs_map = matches!(self.experiment, Fixpoints | Normalize | Orbit | Verdict1);
        let needs_gen = matches!(self.experiment, Flow | Verdict2 | ApproxSeq);
        if needs_map && self.map.is_none() {
            return Err(Error::malformed(
                "map",
                format!("experiment {:?} requires a map", self.experiment).to_lowercase(),
            ));
        }
        if needs_gen && self.generator.is_none() {
            return Err(Error::malformed(
                "generator",
                format!("experiment {:?} requires a generator", self.experiment).to_lowercase(),
            ));
        }
        let p = &self.parameters;
        if let Some(r) = &p.radii {
            if r.is_empty()
                || r.iter().any(|x| !(*x > 0.0 && *x < 1.0))
                || r.windows(2).any(|w| w[1] >= w[0])
            {
                return Err(Error::malformed(
                    "parameters.radii",
                    "radii must be strictly descending in (0, 1)",
                ));
            }
        }
        if let Some(t) = p.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::malformed(
                    "parameters.t_max",
                    "must be positive and finite",
                ));
            }
        }
        for (name, v) in [
            ("parameters.samples_per_ball", p.samples_per_ball),
            ("parameters.n_max", p.n_max),
            ("parameters.sample_count", p.sample_count),
            ("parameters.grid_size", p.grid_size),
            ("parameters.m_max", p.m_max),
        ] {
            if v == Some(0) {
                return Err(Error::malformed(name, "must be positive"));
            }
        }
        if let Some(tol) = &p.tolerances {
            for (k, v) in tol {
                if !TOLERANCE_KEYS.contains(&k.as_str()) {
                    return Err(Error::malformed(
                        format!("parameters.tolerances.{k}"),
                        format!("unknown tolerance; known: {}", TOLERANCE_KEYS.join(", ")),
                    ));
                }
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::malformed(
                        format!("parameters.tolerances.{k}"),
                        "must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Applies command-line overrides on top of the file's parameters.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        let p = &mut self.parameters;
        if let Some(seed) = o.seed {
            p.seed = Some(seed);
        }
        if let Some(csv) = &o.radii {
            let radii = csv
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::malformed("--radii", e.to_string()))?;
            p.radii = Some(radii);
        }
        if let Some(t) = o.tmax {
            p.t_max = Some(t);
        }
        if let Some(n) = o.nmax {
            p.n_max = Some(n);
        }
        if let Some(json) = &o.tolerance_overrides {
            let extra: BTreeMap<String, f64> = serde_json::from_str(json)
                .map_err(|e| Error::malformed("--tolerance-overrides", e.to_string()))?;
            p.tolerances.get_or_insert_with(BTreeMap::new).extend(extra);
        }
        self.validate()
    }
}

/// Files produced by one scenario run.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub report: serde_json::Value,
    pub gauge_csv: Option<String>,
    pub trajectory_csv: Option<String>,
}

fn point_csv(out: &mut String, t: f64, p: &SpherePoint, limit: Option<&SpherePoint>) {
    let dist = limit
        .map(|l| format!("{:e}", p.chordal_distance(l)))
        .unwrap_or_default();
    match p.affine() {
        Some(z) => {
            let _ = writeln!(out, "{t},{:e},{:e},0,{dist}", z.re, z.im);
        }
        None => {
            let _ = writeln!(out, "{t},,,1,{dist}");
        }
    }
}

fn trajectory_csv(params: &[f64], pts: &[SpherePoint], limit: Option<&SpherePoint>) -> String {
    let mut out = String::from("t_or_n,re,im,is_inf,chordal_dist_to_limit\n");
    for (t, p) in params.iter().zip(pts) {
        point_csv(&mut out, *t, p, limit);
    }
    out
}

/// Where the forward orbit of `x` under `f` ends up, if it converges.
fn orbit_limit(f: &MoebiusMap, x: &SpherePoint) -> Result<Option<SpherePoint>> {
    let tag = f.classify().tag;
    if tag.is_loxodromic_type() {
        let nf = f.normal_form()?;
        return Ok(Some(
            if f.in_attracting_basin(x)? == Basin::BoundaryUndecided {
                nf.repelling
            } else {
                nf.attracting
            },
        ));
    }
    if tag == crate::moebius::ClassTag::Parabolic {
        return Ok(f.fixed_points()?.points.first().copied());
    }
    Ok(None)
}

fn tolerance(s: &Scenario, key: &str, default: f64) -> f64 {
    s.parameters
        .tolerances
        .as_ref()
        .and_then(|t| t.get(key).copied())
        .unwrap_or(default)
}

/// Runs a validated scenario with `workers` threads.
pub fn run_scenario(s: &Scenario, workers: usize) -> Result<RunOutput> {
    let p = &s.parameters;
    let x = p.point.unwrap_or_else(|| {
        SpherePoint::from_affine(num_complex::Complex64::new(1.0, 0.0)).expect("finite")
    });
    let seed = p.seed.unwrap_or(0);
    let samples = p.samples_per_ball.unwrap_or(DEFAULT_SAMPLES_PER_BALL);
    let mut out = RunOutput::default();
    let result = match s.experiment {
        Experiment::Classify => match (&s.map, &s.generator) {
            (Some(f), _) => {
                serde_json::json!({ "class": f.classify(), "eigenvalues": f.eigenvalues() })
            }
            (_, Some(a)) => serde_json::json!({
                "subgroup": a.classify(),
                "mu": a.mu(),
                "compactness": a.relative_compactness(),
            }),
            _ => unreachable!("validated"),
        },
        Experiment::Fixpoints => {
            serde_json::to_value(s.map.as_ref().expect("validated").fixed_points()?)?
        }
        Experiment::Normalize => {
            let f = s.map.as_ref().expect("validated");
            let nf = f
                .normal_form()
                .map_err(|e| Error::malformed("map", e.to_string()))?;
            let grid = SphereGrid::fibonacci(100, seed)?;
            let (h, hinv) = (nf.conjugator, nf.conjugator.inverse());
            let residual = grid
                .points()
                .iter()
                .map(|y| {
                    let lhs = h.apply(&f.apply(&hinv.apply(y)));
                    let rhs = MoebiusMap::scaling(nf.lambda).map(|m| m.apply(y));
                    rhs.map(|r| lhs.chordal_distance(&r)).unwrap_or(f64::NAN)
                })
                .fold(0.0, f64::max);
            serde_json::json!({ "normal_form": nf, "conjugation_residual": residual })
        }
        Experiment::Orbit => {
            let f = s.map.as_ref().expect("validated");
            let n = p.n_max.unwrap_or(DEFAULT_ORBIT_N);
            let pts = f.iterate_orbit(&x, n)?;
            let limit = orbit_limit(f, &x)?;
            let params: Vec<f64> = (0..=n).map(|k| k as f64).collect();
            out.trajectory_csv = Some(trajectory_csv(&params, &pts, limit.as_ref()));
            serde_json::json!({ "points": pts, "limit": limit })
        }
        Experiment::Flow => {
            let a = s.generator.as_ref().expect("validated");
            let t_max = p.t_max.unwrap_or(DEFAULT_T_MAX);
            let count = p.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT);
            let times: Vec<f64> = (0..=count)
                .map(|k| k as f64 * t_max / count as f64)
                .collect();
            let pts = a.trajectory(&x, &times)?;
            let limit = match a.classify() {
                SubgroupType::Trivial | SubgroupType::Elliptic { .. } => None,
                _ => orbit_limit(&a.exp(1.0), &x)?,
            };
            out.trajectory_csv = Some(trajectory_csv(&times, &pts, limit.as_ref()));
            serde_json::json!({ "times": times, "points": pts, "limit": limit })
        }
        Experiment::Gauge => {
            let (family, radii) = match (&s.map, &s.generator) {
                (Some(f), _) => {
                    let radii = p.radii.clone().unwrap_or_else(|| match f.normal_form() {
                        Ok(nf)
                            if f.classify().tag.is_loxodromic_type()
                                && x.chordal_distance(&nf.repelling) > BASIN_TOL =>
                        {
                            default_radii(x.chordal_distance(&nf.repelling))
                        }
                        _ => DEFAULT_RADII.to_vec(),
                    });
                    (
                        FamilySpec::iterates(*f, p.n_max.unwrap_or(DEFAULT_GAUGE_N))?,
                        radii,
                    )
                }
                (_, Some(a)) => (
                    FamilySpec::flow(
                        *a,
                        p.t_max.unwrap_or(DEFAULT_T_MAX),
                        p.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT),
                    )?,
                    p.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec()),
                ),
                _ => unreachable!("validated"),
            };
            let gauge = estimate_gauge(&family, &x, &radii, samples, seed, workers)?;
            let bound = certify_linear_bound(&gauge)?;
            out.gauge_csv = Some(gauge.to_csv());
            serde_json::json!({ "gauge": gauge, "linear_bound": bound })
        }
        Experiment::Verdict1 => {
            let f = s.map.as_ref().expect("validated");
            let cfg = Theorem1Config {
                radii: p.radii.clone(),
                samples_per_ball: samples,
                n_max: p.n_max.unwrap_or(DEFAULT_GAUGE_N),
                seed,
                workers,
            };
            let report = theorem1_verdict(f, &x, &cfg)?;
            if let Evidence::Gauge { gauge, .. } = &report.evidence {
                out.gauge_csv = Some(gauge.to_csv());
            }
            serde_json::to_value(report)?
        }
        Experiment::Verdict2 => {
            let a = s.generator.as_ref().expect("validated");
            let k = SphereGrid::fibonacci(p.grid_size.unwrap_or(DEFAULT_VERDICT2_GRID), seed)?;
            let defaults = CollapseConfig::default();
            let cfg = Theorem2Config {
                collapse: CollapseConfig {
                    candidate_radius: tolerance(s, "candidate_radius", defaults.candidate_radius),
                    collapse_tol: tolerance(s, "collapse_tol", defaults.collapse_tol),
                    seed,
                    workers,
                    ..defaults
                },
            };
            serde_json::to_value(theorem2_verdict(a, &k, &cfg)?)?
        }
        Experiment::ApproxSeq => {
            let a = s.generator.as_ref().expect("validated");
            let k = SphereGrid::fibonacci(p.grid_size.unwrap_or(DEFAULT_APPROX_GRID), seed)?;
            let m_max = p.m_max.unwrap_or(DEFAULT_M_MAX);
            let seq = approximating_sequence(a, &k, m_max).map_err(|e| match e {
                Error::Precondition(m) => Error::malformed("generator", m),
                other => other,
            })?;
            serde_json::to_value(seq)?
        }
    };
    out.report = serde_json::json!({
        "scenario": s,
        "experiment": s.experiment,
        "result": result,
    });
    Ok(out)
}

fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(&out.report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    if let Some(csv) = &out.gauge_csv {
        fs::write(dir.join("gauge.csv"), csv)?;
    }
    if let Some(csv) = &out.trajectory_csv {
        fs::write(dir.join("trajectory.csv"), csv)?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BasisDisagreement(_) => EXIT_DISAGREEMENT,
        Error::Io(_) | Error::Json(_) => EXIT_FAILURE,
        _ => EXIT_MALFORMED,
    }
}

fn run_command(path: &Path, flags: &Overrides) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read scenario `{}`: {e}", path.display());
            return EXIT_MALFORMED;
        }
    };
    let scenario = Scenario::from_json(&text).and_then(|mut s| {
        s.apply_overrides(flags)?;
        Ok(s)
    });
    let scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_MALFORMED;
        }
    };
    match run_scenario(&scenario, flags.workers.max(1)) {
        Ok(out) => match write_outputs(&flags.out, &out) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Err(Error::BasisDisagreement(d)) => {
            let out = RunOutput {
                report: serde_json::json!({
                    "scenario": scenario,
                    "experiment": scenario.experiment,
                    "error": "basis-disagreement",
                    "disagreement": d,
                }),
                ..RunOutput::default()
            };
            eprintln!("error: internal inconsistency: {d}");
            if let Err(e) = write_outputs(&flags.out, &out) {
                eprintln!("error: {e}");
            }
            EXIT_DISAGREEMENT
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the `equibaire` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_MALFORMED
            } else {
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Run { scenario, flags } => run_command(&scenario, &flags),
        Command::Battery {
            suite,
            seed,
            workers,
        } => match run_battery(&suite, seed, workers) {
            Ok(rows) => {
                for row in &rows {
                    println!(
                        "{:<4}  {:<40}  {}",
                        if row.passed { "PASS" } else { "FAIL" },
                        row.name,
                        row.detail
                    );
                }
                let failed = rows.iter().filter(|r| !r.passed).count();
                println!("{} passed, {} failed", rows.len() - failed, failed);
                if failed == 0 {
                    EXIT_OK
                } else {
                    EXIT_FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = r#"{"map": {"a": [2,0], "b": [0,0], "c": [0,0], "d": [0.5,0]}, "experiment": "classify"}"#;
        let s = Scenario::from_json(text).unwrap();
        let echo = serde_json::to_string(&s).unwrap();
        assert_eq!(Scenario::from_json(&echo).unwrap(), s);
        let out = run_scenario(&s, 1).unwrap();
        assert_eq!(out.report["result"]["class"]["tag"], "hyperbolic");
        assert_eq!(out.report["result"]["class"]["trace"][0], 2.5);
    }

    #[test]
    fn errors_name_the_field() {
        let field = |text: &str| match Scenario::from_json(text) {
            Err(Error::MalformedInput { field, .. }) => field,
            other => panic!("expected malformed input, got {other:?}"),
        };
        let g = r#""generator": {"A": [[[0,1],[0,0]],[[0,0],[0,-1]]]}"#;
        assert_eq!(field(&format!("{{{g}}}")), "experiment");
        assert_eq!(
            field(&format!(r#"{{{g}, "experiment": "verdict1"}}"#)),
            "map"
        );
        assert_eq!(
            field(&format!(r#"{{{g}, "experiment": "spin"}}"#)),
            "experiment"
        );
        assert_eq!(
            field(
                r#"{"map": {"a": [0,0], "b": [0,0], "c": [0,0], "d": [0,0]}, "experiment": "classify"}"#
            ),
            "map"
        );
        assert_eq!(
            field(&format!(
                r#"{{{g}, "experiment": "flow", "parameters": {{"t_max": -1}}}}"#
            )),
            "parameters.t_max"
        );
        assert_eq!(
            field(&format!(
                r#"{{{g}, "experiment": "verdict2", "parameters": {{"tolerances": {{"nope": 1}}}}}}"#
            )),
            "parameters.tolerances.nope"
        );
        let e = Scenario::from_json(&format!(r#"{{{g}, "experiment": "flow", "colour": 1}}"#))
            .unwrap_err();
        assert!(e.to_string().contains("colour"));
    }

    #[test]
    fn overrides_take_precedence() {
        let text = r#"{"generator": {"A": [[[0,1],[0,0]],[[0,0],[0,-1]]]}, "experiment": "flow", "parameters": {"t_max": 3}}"#;
        let mut s = Scenario::from_json(text).unwrap();
        let o = Overrides {
            tmax: Some(5.0),
            seed: Some(9),
            radii: Some("0.1, 0.01".into()),
            ..Overrides::default()
        };
        s.apply_overrides(&o).unwrap();
        assert_eq!(s.parameters.t_max, Some(5.0));
        assert_eq!(s.parameters.seed, Some(9));
        assert_eq!(s.parameters.radii, Some(vec![0.1, 0.01]));
        let bad = Overrides {
            radii: Some("0.1,x".into()),
            ..Overrides::default()
        };
        assert!(s.apply_overrides(&bad).is_err());
    }

    #[test]
    fn trajectory_marks_infinity() {
        let pts = [SpherePoint::infinity(), SpherePoint::zero()];
        let csv = trajectory_csv(&[0.0, 1.0], &pts, Some(&SpherePoint::zero()));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "0,,,1,1e0");
        assert_eq!(lines[2], "1,0e0,0e0,0,0e0");
    }
}
