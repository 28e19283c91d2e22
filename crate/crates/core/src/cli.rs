//! The `simulate`, `ensemble` and `covariance` commands.
//!
//! Every command validates its configuration completely before touching
//! the file system, so a configuration error leaves no files behind. Each
//! artifact is written to a temporary file and renamed into place.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::covariance::{compare_frames, convergence_study, CovarianceError};
use crate::error::PhysicsError;
use crate::integrator::{integrate, integrate_ensemble, sample_hyperplane, Scheme, Termination};
use crate::output::{comparison_csv, convergence_csv, emit_svg, fmt_real, trajectory_csv, write_atomic};
use crate::wavefield::{ConfigPoint, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Ensemble,
    Covariance,
}

/// Command-line values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub scheme: Option<Scheme>,
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Physics(PhysicsError),
    #[error("frames disagree: {0}")]
    Comparison(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
            CliError::Physics(e) => exit::for_termination(Termination::from_error(e)),
            CliError::Comparison(_) => exit::COMPARISON,
        }
    }
}

pub mod exit {
    use crate::integrator::Termination;

    pub const SUCCESS: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NODE_ABORT: u8 = 3;
    pub const DEGENERATE_ABORT: u8 = 4;
    pub const BOUNDARY_ABORT: u8 = 5;
    pub const COMPARISON: u8 = 6;

    pub fn for_termination(t: Termination) -> u8 {
        match t {
            Termination::Completed => SUCCESS,
            Termination::NodeAbort => NODE_ABORT,
            Termination::DegenerateAbort => DEGENERATE_ABORT,
            Termination::BoundaryAbort => BOUNDARY_ABORT,
        }
    }
}

/// What a successful (artifact-writing) run produced.
#[derive(Clone, Debug)]
pub struct Report {
    pub exit_code: u8,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, relative: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        write_atomic(&path, contents).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }
}

/// Reads, parses and validates the configuration, then applies overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(s) = overrides.scheme {
        cfg.scheme = s;
    }
    if let (Some(seed), Some(e)) = (overrides.seed, cfg.ensemble.as_mut()) {
        e.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn require<T: Copy>(value: Option<T>, key: &str, message: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Config(ConfigError {
            line: None,
            key: key.into(),
            message: message.into(),
        })
    })
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    cfg.output.clone().ok_or_else(|| {
        CliError::Config(ConfigError {
            line: None,
            key: "output.directory".into(),
            message: "no output directory (set it in the file or pass --out)".into(),
        })
    })
}

/// The wave function as seen from the configured frame.
fn framed_model(cfg: &RunConfig) -> ModelSpec {
    ModelSpec {
        rapidity: cfg.boost,
        ..cfg.model
    }
}

pub fn run(command: Command, config: &Path, overrides: &Overrides) -> Result<Report, CliError> {
    let cfg = load_config(config, overrides)?;
    match command {
        Command::Simulate => cmd_simulate(&cfg),
        Command::Ensemble => cmd_ensemble(&cfg),
        Command::Covariance => cmd_covariance(&cfg),
    }
}

/// Integrates the configured initial point. With a boost, the wave
/// function and the initial point are both transformed and the run
/// happens in the moving frame.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let q0 = require(cfg.initial, "initial.point", "simulate needs an initial point")?;
    let dir = output_dir(cfg)?;
    let model = framed_model(cfg).build().map_err(CliError::Physics)?;
    let start = cfg.boost.map_or(q0, |a| q0.boosted(a));
    let traj = integrate(&*model, &start, cfg.epsilon, cfg.steps, cfg.scheme).map_err(CliError::Physics)?;
    let mut w = Writer::create(&dir)?;
    w.put("trajectory.csv", &trajectory_csv(&traj, &cfg.echo()))?;
    w.put("trajectory.svg", &emit_svg(&traj, &cfg.plot))?;
    Ok(Report {
        exit_code: exit::for_termination(traj.termination),
        files: w.files,
        summary: format!("{} after {} of {} steps", traj.termination, traj.steps(), cfg.steps),
    })
}

pub const SUMMARY_HEADER: &str = "member,weighting,z1_0,t1_0,z2_0,t2_0,termination,steps,z1,t1,z2,t2";

fn point_cells(q: &ConfigPoint) -> String {
    q.to_array().map(fmt_real).join(",")
}

/// Samples initial points on the `t1 = t2 = 0` hyperplane of the wells'
/// rest frame and integrates each of them. Members that abort are recorded
/// in the summary with their termination tag; the command still succeeds.
pub fn cmd_ensemble(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = require(cfg.ensemble, "ensemble", "ensemble needs an [ensemble] section")?;
    let dir = output_dir(cfg)?;
    let rest = cfg.model.rest_frame().map_err(CliError::Physics)?;
    let mut points = sample_hyperplane(&rest, cfg.model.width, spec.count, spec.weighting, spec.seed)
        .map_err(CliError::Physics)?;
    if let Some(a) = cfg.boost {
        points.iter_mut().for_each(|q| *q = q.boosted(a));
    }
    let model = framed_model(cfg).build().map_err(CliError::Physics)?;
    let results = integrate_ensemble(&*model, &points, cfg.epsilon, cfg.steps, cfg.scheme);

    let echo = cfg.echo();
    let mut w = Writer::create(&dir)?;
    let mut summary = String::new();
    for line in &echo {
        summary.push_str(&format!("# {line}\n"));
    }
    summary.push_str(SUMMARY_HEADER);
    summary.push('\n');
    let mut completed = 0;
    for (k, (q0, result)) in points.iter().zip(&results).enumerate() {
        let (tag, steps, last) = match result {
            Ok(traj) => {
                w.put(&format!("members/member_{k:04}.csv"), &trajectory_csv(traj, &echo))?;
                (traj.termination, traj.steps(), traj.last().q)
            }
            Err(e) => (Termination::from_error(e), 0, *q0),
        };
        if tag == Termination::Completed {
            completed += 1;
        }
        summary.push_str(&format!(
            "{k},{},{},{tag},{steps},{}\n",
            spec.weighting,
            point_cells(q0),
            point_cells(&last)
        ));
    }
    w.put("summary.csv", &summary)?;
    Ok(Report {
        exit_code: exit::SUCCESS,
        files: w.files,
        summary: format!("{completed} of {} members completed", spec.count),
    })
}

/// Integrates in the rest frame and in the boosted frame and writes the
/// per-step deviation; with a `[covariance]` step list, also the
/// convergence study.
pub fn cmd_covariance(cfg: &RunConfig) -> Result<Report, CliError> {
    let q0 = require(cfg.initial, "initial.point", "covariance needs an initial point")?;
    let alpha = require(cfg.boost, "boost", "covariance needs a [boost] section")?;
    if let Some(c) = &cfg.convergence {
        for e in &c.epsilons {
            let ratio = c.total_proper_time / e;
            if (ratio - ratio.round()).abs() > 1e-6 * ratio {
                return Err(CliError::Config(ConfigError {
                    line: None,
                    key: "covariance.epsilons".into(),
                    message: format!("{e} does not divide total_proper_time {}", c.total_proper_time),
                }));
            }
        }
    }
    let dir = output_dir(cfg)?;
    let rest = cfg.model.rest_frame().map_err(CliError::Physics)?;
    let cmp = compare_frames(&rest, &q0, alpha, cfg.epsilon, cfg.steps, cfg.scheme).map_err(CliError::Physics)?;
    if !cmp.is_consistent() {
        return Err(CliError::Comparison(format!(
            "rest frame: {} after {} steps, boosted frame: {} after {} steps",
            cmp.rest.termination,
            cmp.rest.steps(),
            cmp.moved.termination,
            cmp.moved.steps()
        )));
    }
    let report = match &cfg.convergence {
        Some(c) => Some(
            convergence_study(&rest, &q0, alpha, &c.epsilons, c.total_proper_time, cfg.scheme).map_err(
                |e| match e {
                    CovarianceError::Physics { source, .. } => CliError::Physics(source),
                    CovarianceError::InvalidEpsilons(m) => CliError::Config(ConfigError {
                        line: None,
                        key: "covariance.epsilons".into(),
                        message: m.into(),
                    }),
                    other @ CovarianceError::Mismatch { .. } => CliError::Comparison(other.to_string()),
                },
            )?,
        ),
        None => None,
    };
    let echo = cfg.echo();
    let mut w = Writer::create(&dir)?;
    w.put("comparison.csv", &comparison_csv(&cmp, &echo))?;
    let mut summary = format!("max deviation {:e} over {} steps", cmp.max_deviation, cmp.rest.steps());
    if let Some(r) = &report {
        w.put("convergence.csv", &convergence_csv(r, &echo))?;
        match r.fitted_order {
            Some(p) => summary.push_str(&format!(", fitted order {p:.3}")),
            None => summary.push_str(", fitted order n/a (deviations at rounding level)"),
        }
    }
    Ok(Report {
        exit_code: exit::for_termination(cmp.rest.termination),
        files: w.files,
        summary,
    })
}
