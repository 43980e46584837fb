//! The `obsreg` command line.
//!
//! ```text
//! obsreg simulate    --config c.toml [--out DIR] [--snapshot-every K]
//! obsreg observe     --config c.toml [--out DIR] [--h H | --N N]
//! obsreg interpolate [--out DIR]
//! obsreg monitor     --config c.toml [--out DIR] [--h H | --N N] [--c C] [--t0 T0]
//! obsreg nudge       --config c.toml [--out DIR] [--h H | --N N] [--mu MU] [--c C]
//! obsreg report      --config c.toml [--out DIR] [--c C] [--t0 T0]
//! ```
//!
//! Output directory: `--out`, else `$OBSREG_OUT`, else `output_dir` from the
//! config. Layout below it:
//!
//! ```text
//! snapshots/snap_NNNNN.bin, snapshots/index.csv       simulate
//! observations/obs_NNNNN.json                         observe
//! interpolate.json, interpolate.csv                   interpolate
//! monitor.json, mh_series.csv                         monitor
//! nudge.json, sync.csv                                nudge
//! report/energy.csv, report/mh_sweep.csv              report
//! ```
//!
//! `monitor`, `nudge` and `report` reuse stored snapshots when present and
//! otherwise integrate the reference in memory. Exit codes: 0 success,
//! 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::config::{ExperimentConfig, OUT_ENV};
use crate::io::observation::{self, list_observations, load_observation, save_observation, ObservationFile};
use crate::io::report::{emit_csv, emit_json, fmt_f64, sync_csv, write_text};
use crate::io::snapshot::{load_snapshot, save_snapshot, SnapshotFile, SnapshotKind};
use crate::monitor::{self, h_sweep, wh, CriterionInputs, GradientSource, ObservationSeries, Variant};
use crate::nudging::{default_gain, run_nudged, NudgeConfig};
use crate::observers::{available_modes, Observation, ObserverSpec};
use crate::solver::{run, Snapshot, Trajectory};
use crate::spectral::TorusConfig;
use crate::tetra::{h1_data_norms, mean_correct};

#[derive(Parser, Debug)]
#[command(name = "obsreg", version, about = "Observable regularity diagnostics for 3D Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides $OBSREG_OUT and `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Scale {
    /// Nodal observation at cube side ≈ H (rounded to L / n_cubes).
    #[arg(long = "h", conflicts_with = "cutoff")]
    h: Option<f64>,
    /// Modal observation keeping the N smallest Stokes eigenvalues.
    #[arg(long = "N", id = "cutoff")]
    cutoff: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the reference flow and store spectral snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Observe stored snapshots (modal or nodal).
    Observe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: Scale,
    },
    /// H¹ norms of the tetrahedral interpolant for stored nodal observations.
    Interpolate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the regularity criterion on the reference trajectory.
    Monitor {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: Scale,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
    },
    /// Run the nudged system against the reference.
    Nudge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: Scale,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Plot-ready CSV summaries (energy history, M_h sweep).
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
    },
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common, snapshot_every } => simulate(&common, snapshot_every),
        Command::Observe { common, scale } => observe(&common, &scale),
        Command::Interpolate { config, out } => interpolate(config.as_deref(), out),
        Command::Monitor { common, scale, c, t0 } => monitor_cmd(&common, &scale, c, t0),
        Command::Nudge { common, scale, mu, c } => nudge(&common, &scale, mu, c),
        Command::Report { common, c, t0 } => report(&common, c, t0),
    }
}

fn output_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    flag.unwrap_or_else(|| match cfg {
        Some(cfg) => cfg.resolved_output_dir(),
        None => std::env::var_os(OUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out")),
    })
}

fn setup(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let cfg = ExperimentConfig::load(&common.config)?;
    let out = output_dir(common.out.clone(), Some(&cfg));
    Ok((cfg, out))
}

fn observer_spec(cfg: &ExperimentConfig, scale: &Scale) -> Result<ObserverSpec> {
    let torus = cfg.torus()?;
    let spec = match (scale.h, scale.cutoff) {
        (Some(h), _) => ObserverSpec::Nodal {
            n_cubes: n_cubes_for(&torus, h)?,
        },
        (None, Some(cutoff)) => {
            let available = available_modes(&torus);
            if cutoff == 0 || cutoff > available {
                return Err(Error::CutoffTooLarge {
                    requested: cutoff,
                    available,
                });
            }
            ObserverSpec::Modal { cutoff }
        }
        (None, None) => cfg.observer_spec()?,
    };
    Ok(spec)
}

/// `round(L / h)`, at least 2.
fn n_cubes_for(torus: &TorusConfig, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidConfig(format!("--h must be positive, got {h}")));
    }
    Ok(((torus.length / h).round() as usize).max(2))
}

fn snapshot_dir(out: &Path) -> PathBuf {
    out.join("snapshots")
}

fn simulate(common: &Common, snapshot_every: Option<usize>) -> Result<()> {
    let (cfg, out) = setup(common)?;
    let every = snapshot_every.unwrap_or(cfg.solver.snapshot_every);
    let traj = run(&cfg.initial_field()?, &cfg.solver_config()?, every)?;
    let dir = snapshot_dir(&out);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut index = String::from("t,file\n");
    for (i, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{i:05}.bin");
        save_snapshot(
            &dir.join(&name),
            &SnapshotFile {
                time: s.t,
                kind: SnapshotKind::Velocity,
                field: s.field.clone(),
            },
        )?;
        index.push_str(&format!("{},{name}\n", fmt_f64(s.t)));
    }
    write_text(&dir.join("index.csv"), &index)?;
    println!("wrote {} snapshots to {}", traj.snapshots.len(), dir.display());
    Ok(())
}

fn load_trajectory(cfg: &ExperimentConfig, out: &Path) -> Result<Option<Trajectory>> {
    let dir = snapshot_dir(out);
    if !dir.is_dir() {
        return Ok(None);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Ok(None);
    }
    let solver = cfg.solver_config()?;
    let mut snapshots = Vec::with_capacity(files.len());
    for path in &files {
        let snap = load_snapshot(path)?;
        if snap.field.config() != solver.torus() {
            return Err(Error::ResolutionMismatch(format!(
                "{} has n_spec = {}, L = {}; the configuration has n_spec = {}, L = {}",
                path.display(),
                snap.field.config().n_spec,
                snap.field.config().length,
                solver.torus().n_spec,
                solver.torus().length
            )));
        }
        snapshots.push(Snapshot {
            t: snap.time,
            field: snap.field,
        });
    }
    Ok(Some(Trajectory { snapshots, solver }))
}

/// Stored snapshots if present, a fresh in-memory run otherwise.
fn reference(cfg: &ExperimentConfig, out: &Path) -> Result<Trajectory> {
    match load_trajectory(cfg, out)? {
        Some(t) => Ok(t),
        None => run(&cfg.initial_field()?, &cfg.solver_config()?, cfg.solver.snapshot_every),
    }
}

fn observe(common: &Common, scale: &Scale) -> Result<()> {
    let (cfg, out) = setup(common)?;
    let traj = load_trajectory(&cfg, &out)?.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "no snapshots under {}; run `obsreg simulate` first",
            snapshot_dir(&out).display()
        ))
    })?;
    let spec = observer_spec(&cfg, scale)?;
    let dir = out.join("observations");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut index = String::from("t,file\n");
    for (i, s) in traj.snapshots.iter().enumerate() {
        let name = observation::file_name(i);
        save_observation(
            &dir.join(&name),
            &ObservationFile {
                t: s.t,
                observation: spec.observe(&s.field)?,
            },
        )?;
        index.push_str(&format!("{},{name}\n", fmt_f64(s.t)));
    }
    write_text(&dir.join("index.csv"), &index)?;
    println!("wrote {} {spec:?} observations to {}", traj.snapshots.len(), dir.display());
    Ok(())
}

#[derive(Serialize)]
struct InterpolateRow {
    t: f64,
    n_cubes: usize,
    h: f64,
    exact: f64,
    data: f64,
    lower: f64,
    upper: f64,
    max_face_jump: f64,
}

fn interpolate(config: Option<&Path>, out: Option<PathBuf>) -> Result<()> {
    let cfg = config.map(ExperimentConfig::load).transpose()?;
    let out = output_dir(out, cfg.as_ref());
    let dir = out.join("observations");
    let files = list_observations(&dir)?;
    if files.is_empty() {
        return Err(Error::InvalidConfig(format!("no obs_*.json files in {}", dir.display())));
    }
    let mut rows = Vec::with_capacity(files.len());
    for path in &files {
        let file = load_observation(path)?;
        let Observation::Nodal(nodal) = file.observation else {
            return Err(Error::format(path, "interpolate needs nodal observations"));
        };
        let norms = h1_data_norms(&nodal);
        rows.push(InterpolateRow {
            t: file.t,
            n_cubes: nodal.n_cubes,
            h: nodal.h,
            exact: norms.exact,
            data: norms.data,
            lower: norms.lower,
            upper: norms.upper,
            max_face_jump: mean_correct(nodal).max_face_jump(),
        });
    }
    emit_json(&rows, &out.join("interpolate.json"))?;
    let csv: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.t, r.exact, r.data, r.lower, r.upper, r.max_face_jump])
        .collect();
    emit_csv(
        &["t", "exact", "data", "lower", "upper", "max_face_jump"],
        &csv,
        &out.join("interpolate.csv"),
    )?;
    println!("interpolated {} observations", rows.len());
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

fn window_start(t0: f64, traj: &Trajectory) -> Result<f64> {
    let t_end = traj.last().t;
    if !(t0 >= 0.0 && t0 <= t_end) {
        return Err(Error::InvalidConfig(format!("--t0 = {t0} must lie in [0, {t_end}]")));
    }
    Ok(t0)
}

fn monitor_cmd(common: &Common, scale: &Scale, c: Option<f64>, t0: Option<f64>) -> Result<()> {
    let (cfg, out) = setup(common)?;
    let c = positive("--c", c.unwrap_or(cfg.monitor.c))?;
    let traj = reference(&cfg, &out)?;
    let t0 = window_start(t0.unwrap_or(cfg.monitor.t0), &traj)?;
    let spec = observer_spec(&cfg, scale)?;
    let torus = *traj.torus();
    let window = (t0, traj.last().t);
    let series = ObservationSeries::from_trajectory(&traj, spec, window)?;
    let m2 = monitor::mh(&series)?;
    let nu = traj.solver.nu;
    let report = monitor::check(&CriterionInputs {
        nu,
        lambda1: torus.lambda1(),
        c,
        h: spec.scale(&torus)?,
        m2,
        w2: wh(m2, &traj.solver.forcing, nu, torus.lambda1(), c)?,
        initial_gradient: traj.at_or_before(t0).field.norms().h1,
        gradient_source: GradientSource::Reference,
        variant: Variant::for_window_start(t0),
        window,
    });
    emit_json(&report, &out.join("monitor.json"))?;
    let rows: Vec<Vec<f64>> = series.data_norms().into_iter().map(|(t, v)| vec![t, v]).collect();
    emit_csv(&["t", "mh_sq"], &rows, &out.join("mh_series.csv"))?;
    println!("satisfied: {}", report.satisfied);
    Ok(())
}

#[derive(Serialize)]
struct NudgeSummary {
    mu: f64,
    mu_source: &'static str,
    observer: ObserverSpec,
    project_feedback: bool,
    samples: usize,
    final_l2: f64,
    final_h1: f64,
    max_h1: f64,
}

fn nudge(common: &Common, scale: &Scale, mu: Option<f64>, c: Option<f64>) -> Result<()> {
    let (cfg, out) = setup(common)?;
    let c = positive("--c", c.unwrap_or(cfg.nudge.c))?;
    let traj = reference(&cfg, &out)?;
    let spec = observer_spec(&cfg, scale)?;
    let solver = cfg.solver_config()?;
    let torus = *solver.torus();
    let (mu, mu_source) = match mu.or(cfg.nudge.mu) {
        Some(mu) => (mu, "user"),
        None => (default_gain(solver.nu, torus.lambda1(), spec.scale(&torus)?, c), "default"),
    };
    let mut ncfg = NudgeConfig::new(mu, spec, solver)?;
    ncfg.project_feedback = cfg.nudge.project_feedback;
    let (_, sync) = run_nudged(&traj, &ncfg)?;
    write_text(&out.join("sync.csv"), &sync_csv(&sync))?;
    let last = sync.last().copied();
    let summary = NudgeSummary {
        mu,
        mu_source,
        observer: spec,
        project_feedback: ncfg.project_feedback,
        samples: sync.len(),
        final_l2: last.map_or(0.0, |e| e.l2),
        final_h1: last.map_or(0.0, |e| e.h1),
        max_h1: sync.max_h1(),
    };
    emit_json(&summary, &out.join("nudge.json"))?;
    println!("mu = {mu} ({mu_source}); final |u-w|_H1 = {}", summary.final_h1);
    Ok(())
}

fn report(common: &Common, c: Option<f64>, t0: Option<f64>) -> Result<()> {
    let (cfg, out) = setup(common)?;
    let c = positive("--c", c.unwrap_or(cfg.monitor.c))?;
    let traj = reference(&cfg, &out)?;
    let t0 = window_start(t0.unwrap_or(cfg.monitor.t0), &traj)?;
    let dir = out.join("report");

    let energy: Vec<Vec<f64>> = traj
        .snapshots
        .iter()
        .map(|s| {
            let n = s.field.norms();
            vec![s.t, 0.5 * n.l2 * n.l2, n.h1 * n.h1]
        })
        .collect();
    emit_csv(&["t", "energy", "enstrophy"], &energy, &dir.join("energy.csv"))?;

    let sweep = if cfg.monitor.n_cubes_sweep.is_empty() {
        vec![2, 4, 8, 16]
    } else {
        cfg.monitor.n_cubes_sweep.clone()
    };
    let reports = h_sweep(&traj, c, &sweep, t0, Variant::for_window_start(t0))?;
    let rows: Vec<Vec<f64>> = sweep
        .iter()
        .zip(&reports)
        .map(|(n, r)| {
            vec![
                r.h,
                *n as f64,
                r.m2,
                r.w2,
                r.max_term,
                r.threshold,
                if r.satisfied { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    emit_csv(
        &["h", "n_cubes", "m2", "w2", "max_term", "threshold", "satisfied"],
        &rows,
        &dir.join("mh_sweep.csv"),
    )?;
    match monitor::first_admissible(&reports) {
        Some(r) => println!("coarsest admissible h = {}", r.h),
        None => println!("no admissible h in the sweep"),
    }
    Ok(())
}
