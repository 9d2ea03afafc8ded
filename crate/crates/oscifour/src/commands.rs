//! The four subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use oscifour_core::averaging::averaged_compose_from;
use oscifour_core::problems::kepler::{cartesian_state, PhysicalTime, SsFieldWithTime};
use oscifour_core::problems::nls::NlsProblem;
use oscifour_core::reference::{
    error_curve, rk_solve_field, ErrorMetric, KeplerPosition, MappedMaxAbs, MaxAbs,
    PhysicalTimeError, ReferenceSolution,
};
use oscifour_core::tfcore::{tf_eval, tf_solve};
use oscifour_core::{TfCoefficients, TfConfig, C64};

use crate::config::{ProblemKind, ProblemSpec, RunConfig};
use crate::csv::{num, Table};
use crate::error::{CliError, CliResult};
use crate::files::{read_coefficients, write_coefficients};
use crate::problem::Problem;

/// A solved problem together with its coefficients.
pub struct Solved {
    pub spec: ProblemSpec,
    pub problem: Problem,
    pub coefficients: TfCoefficients,
    pub elapsed: Duration,
}

fn solver_config(cfg: &RunConfig, problem: &Problem) -> CliResult<TfConfig> {
    let omega = match cfg.omega {
        Some(w) if cfg.problem.kind() != ProblemKind::LinearTest => {
            return Err(CliError::config(format!(
                "key `omega` (= {w}) can only be overridden for linear-test; {} fixes its own frequency",
                cfg.problem.kind().name()
            )))
        }
        Some(w) => w,
        None => problem.omega(),
    };
    let mut tf = TfConfig::new(cfg.modes, cfg.degree, omega, problem.dim())
        .map_err(CliError::from_solver)?;
    tf.extra_passes = cfg.extra_passes;
    tf.real_fft = problem.field().is_real();
    Ok(tf)
}

fn solve_spec(cfg: &RunConfig, spec: ProblemSpec) -> CliResult<Solved> {
    let problem = Problem::build(&spec)?;
    let tf = solver_config(cfg, &problem)?;
    let start = Instant::now();
    let coefficients =
        tf_solve(&*problem.field(), &problem.initial(), &tf).map_err(CliError::from_solver)?;
    Ok(Solved {
        spec,
        problem,
        coefficients,
        elapsed: start.elapsed(),
    })
}

pub fn solve(cfg: &RunConfig) -> CliResult<Solved> {
    solve_spec(cfg, cfg.problem.clone())
}

fn required_times(cfg: &RunConfig, omega: f64) -> CliResult<Vec<f64>> {
    let spec = cfg
        .times
        .as_ref()
        .ok_or_else(|| CliError::config("missing output times: set `times` or `t_end`"))?;
    Ok(spec.resolve(cfg.time_unit, omega))
}

fn out_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.out.as_ref().map(PathBuf::from)
}

/// Writes `table` to the configured output, or to `stdout` without one.
fn emit(cfg: &RunConfig, table: &Table, stdout: &mut dyn Write) -> CliResult<()> {
    match out_path(cfg) {
        Some(p) => table.write_file(&p),
        None => stdout
            .write_all(table.to_string().as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn say(stdout: &mut dyn Write, line: &str) -> CliResult<()> {
    writeln!(stdout, "{line}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn cmd_solve(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let path = out_path(cfg)
        .ok_or_else(|| CliError::config("missing output path: pass --out or set `out`"))?;
    let s = solve(cfg)?;
    write_coefficients(&path, &s.spec.descriptor(), &s.coefficients)?;
    let c = s.coefficients.config();
    say(
        stdout,
        &format!(
            "solved {}: D={} M={} d={} omega={} passes={} time={:.3}s -> {}",
            s.spec.kind().name(),
            c.dim,
            c.modes,
            c.degree,
            c.omega,
            s.coefficients.degree(),
            s.elapsed.as_secs_f64(),
            path.display()
        ),
    )
}

fn complex_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n)
        .flat_map(|i| [format!("re({prefix}_{i})"), format!("im({prefix}_{i})")])
        .collect()
}

fn push_complex(row: &mut Vec<String>, v: &[C64]) {
    for z in v {
        row.push(num(z.re));
        row.push(num(z.im));
    }
}

/// NLS grid values `u = s·e^{ωtA} y` in original units.
fn nls_values(p: &NlsProblem, omega: f64, t: f64, y: &[C64]) -> Vec<C64> {
    let s = p.amplitude_scale();
    p.exp_action_vec(omega * t, y)
        .into_iter()
        .map(|v| v * s)
        .collect()
}

pub fn cmd_eval(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let (spec, problem, c) = match &cfg.coefficients {
        Some(path) => {
            let file = read_coefficients(Path::new(path))?;
            let spec = ProblemSpec::from_descriptor(&file.problem)?;
            (spec.clone(), Problem::build(&spec)?, file.coefficients)
        }
        None => {
            let s = solve(cfg)?;
            (s.spec, s.problem, s.coefficients)
        }
    };
    let omega = c.config().omega;
    let dim = c.config().dim;
    if problem.dim() != dim {
        return Err(CliError::config(format!(
            "coefficients have D={dim} but the problem descriptor implies D={}",
            problem.dim()
        )));
    }
    let times = required_times(cfg, omega)?;

    let mut header = vec!["t".to_string()];
    header.extend(complex_columns("y", dim));
    let time_map = match &problem {
        Problem::Nls(_) => {
            header.extend(complex_columns("u", dim));
            None
        }
        Problem::Kepler { state, .. } => {
            header.extend(
                ["q_1", "q_2", "q_3", "qdot_1", "qdot_2", "qdot_3", "t_phys"].map(String::from),
            );
            Some(PhysicalTime::new(&c, state.t0).map_err(CliError::Solver)?)
        }
        Problem::Linear { .. } => None,
    };
    let mut table = Table::new(header);
    let mut snapshots = Vec::new();
    for &t in &times {
        let y = tf_eval(&c, t);
        let mut row = vec![num(t)];
        push_complex(&mut row, &y);
        match &problem {
            Problem::Nls(p) => {
                let u = nls_values(p, omega, t, &y);
                push_complex(&mut row, &u);
                snapshots.push((t, u));
            }
            Problem::Kepler { .. } => {
                let (q, qdot) = cartesian_state(&y, omega, t).map_err(CliError::Solver)?;
                row.extend(q.iter().chain(&qdot).map(|v| num(*v)));
                row.push(num(time_map.as_ref().expect("kepler").eval(t)));
            }
            Problem::Linear { .. } => {}
        }
        table.push(row);
    }
    emit(cfg, &table, stdout)?;

    if let Some(dir) = &cfg.snapshots {
        let Problem::Nls(p) = &problem else {
            return Err(CliError::config(format!(
                "key `snapshots` is only supported for nls, not {}",
                spec.kind().name()
            )));
        };
        write_snapshots(Path::new(dir), &p.grid(), &snapshots)?;
    }
    Ok(())
}

/// One CSV per time with columns `t, x, re(u), im(u), abs(u)`.
pub fn write_snapshots(
    dir: &Path,
    grid: &[f64],
    snapshots: &[(f64, Vec<C64>)],
) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::new();
    for (i, (t, u)) in snapshots.iter().enumerate() {
        let mut table = Table::new(
            ["t", "x", "re(u)", "im(u)", "abs(u)"]
                .map(String::from)
                .to_vec(),
        );
        for (x, v) in grid.iter().zip(u) {
            table.push(vec![num(*t), num(*x), num(v.re), num(v.im), num(v.norm())]);
        }
        let path = dir.join(format!("snapshot_{i}.csv"));
        table.write_file(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Rows `(series, t, value)` of an error study.
pub type ErrorRows = Vec<(String, f64, f64)>;

fn oracle(
    field: &dyn oscifour_core::OscillatoryField,
    y0: &[C64],
    omega: f64,
    times: &[f64],
    tol: f64,
) -> CliResult<ReferenceSolution> {
    let t_end = *times.last().expect("non-empty");
    rk_solve_field(field, y0, omega, t_end, tol, times).map_err(CliError::Oracle)
}

fn curve(
    name: &str,
    c: &TfCoefficients,
    r: &ReferenceSolution,
    metric: &dyn ErrorMetric,
    times: &[f64],
) -> CliResult<ErrorRows> {
    let pts = error_curve(c, r, metric, times).map_err(CliError::Oracle)?;
    Ok(pts
        .into_iter()
        .map(|(t, e)| (name.to_string(), t, e))
        .collect())
}

/// Error of a solved problem against the reference integrator.
pub fn error_rows(cfg: &RunConfig, s: &Solved, times: &[f64]) -> CliResult<ErrorRows> {
    let c = &s.coefficients;
    let omega = c.config().omega;
    match &s.problem {
        Problem::Linear { .. } => {
            let r = oracle(
                &*s.problem.field(),
                &s.problem.initial(),
                omega,
                times,
                cfg.tol,
            )?;
            curve("abs", c, &r, &MaxAbs, times)
        }
        Problem::Nls(p) => {
            let r = oracle(p, &p.initial(), omega, times, cfg.tol)?;
            let metric = MappedMaxAbs {
                map: |t: f64, y: &[C64]| p.exp_action_vec(omega * t, y),
                scale: p.amplitude_scale(),
            };
            let name = if p.is_rescaled() {
                format!("max_node[eps={}]", p.epsilon())
            } else {
                "max_node".to_string()
            };
            curve(&name, c, &r, &metric, times)
        }
        Problem::Kepler { state, .. } => {
            let field = SsFieldWithTime {
                inner: state.field(),
            };
            let mut y0 = state.initial();
            y0.push(C64::new(state.t0, 0.0));
            let r = oracle(&field, &y0, omega, times, cfg.tol)?;
            let time = PhysicalTime::new(c, state.t0).map_err(CliError::Solver)?;
            let mut rows = curve("position_rel", c, &r, &KeplerPosition { omega }, times)?;
            rows.extend(curve(
                "time_abs",
                c,
                &r,
                &PhysicalTimeError { time },
                times,
            )?);
            Ok(rows)
        }
    }
}

/// Runs the configured error study: one series per metric, or one per `ε`
/// for an NLS ε-study (rescaled form, times in solver units).
pub fn errors(cfg: &RunConfig) -> CliResult<ErrorRows> {
    let mut rows = Vec::new();
    match (&cfg.problem, &cfg.epsilons) {
        (ProblemSpec::Nls { j, .. }, Some(eps)) => {
            for &epsilon in eps {
                let s = solve_spec(
                    cfg,
                    ProblemSpec::Nls {
                        j: *j,
                        epsilon,
                        rescaled: true,
                    },
                )?;
                let times = required_times(cfg, s.coefficients.config().omega)?;
                rows.extend(error_rows(cfg, &s, &times)?);
            }
        }
        _ => {
            let s = solve(cfg)?;
            let times = required_times(cfg, s.coefficients.config().omega)?;
            rows.extend(error_rows(cfg, &s, &times)?);
        }
    }
    Ok(rows)
}

pub fn cmd_errors(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let mut table = Table::new(["t", "metric", "value"].map(String::from).to_vec());
    for (name, t, v) in errors(cfg)? {
        table.push(vec![num(t), name, num(v)]);
    }
    emit(cfg, &table, stdout)
}

/// `(t, energy_error, position_diff_vs_tf)` rows.
///
/// Kepler: relative energy error of the composed solution and relative
/// position difference from `tf_eval`. Linear test: absolute error against
/// the closed form and absolute difference from `tf_eval`.
pub fn averaged(cfg: &RunConfig) -> CliResult<Vec<(f64, f64, f64)>> {
    let s = solve(cfg)?;
    let c = &s.coefficients;
    let omega = c.config().omega;
    let times = required_times(cfg, omega)?;
    let field = s.problem.field();
    let e0 = match &s.problem {
        Problem::Kepler { .. } => Some(s.problem.kepler_energy(c.y0(), omega, 0.0)?),
        Problem::Linear { .. } => None,
        Problem::Nls(_) => {
            return Err(CliError::config(
                "averaged supports kepler-j2 and linear-test, not nls",
            ))
        }
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let composed = averaged_compose_from(&*field, c, t).map_err(CliError::from_solver)?;
        let direct = tf_eval(c, t);
        let row = match &s.problem {
            Problem::Kepler { .. } => {
                let e0 = e0.expect("kepler energy");
                let e = s.problem.kepler_energy(&composed, omega, t)?;
                let (qa, _) = cartesian_state(&composed, omega, t).map_err(CliError::Solver)?;
                let (qb, _) = cartesian_state(&direct, omega, t).map_err(CliError::Solver)?;
                let diff = (0..3).map(|i| (qa[i] - qb[i]).powi(2)).sum::<f64>().sqrt();
                let norm = qb.iter().map(|v| v * v).sum::<f64>().sqrt();
                (t, ((e - e0) / e0).abs(), diff / norm)
            }
            Problem::Linear { field, y0 } => {
                let exact = field.exact(C64::new(*y0, 0.0), omega, t);
                (
                    t,
                    (composed[0] - exact).norm(),
                    (composed[0] - direct[0]).norm(),
                )
            }
            Problem::Nls(_) => unreachable!("rejected above"),
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn cmd_averaged(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let mut table = Table::new(
        ["t", "energy_error", "position_diff_vs_tf"]
            .map(String::from)
            .to_vec(),
    );
    for (t, e, p) in averaged(cfg)? {
        table.push(vec![num(t), num(e), num(p)]);
    }
    emit(cfg, &table, stdout)
}
