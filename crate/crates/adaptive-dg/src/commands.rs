use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use adaptive_dg_core::adapt::{
    adapt_loop, observed_constants, ConvergenceHistory, IterationView, ObservedConstants, RunConfig,
};
use adaptive_dg_core::assembly::{parse_methods, MethodKind};
use adaptive_dg_core::mesh::uniform_refinement;
use adaptive_dg_core::problem::{Problem, BUILT_IN};
use adaptive_dg_core::verify::{self, Bound, Check, VerifyConfig};

use crate::cli::{RunArgs, SweepArgs, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::formats;

/// First iteration included in the reported maximal contraction ratio.
pub const CONTRACTION_FROM: usize = 5;

pub fn load_problem(name: &str) -> CliResult<Problem> {
    if BUILT_IN.contains(&name) {
        return Ok(Problem::by_name(name)?);
    }
    let path = Path::new(name);
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "`{name}` is neither a built-in problem ({}) nor a mesh file",
            BUILT_IN.join(", ")
        )));
    }
    let file = File::open(path).map_err(|e| CliError::io(format!("opening {name}"), e))?;
    let mesh = formats::read_mesh(BufReader::new(file), path)?;
    Ok(Problem::from_mesh(mesh))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("creating {}", path.display()), e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult<()> {
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Outcome of one adaptive run, with files already written.
#[derive(Debug)]
pub struct RunOutcome {
    pub history: ConvergenceHistory,
    pub constants: ObservedConstants,
    pub out: PathBuf,
}

struct SnapshotWriter {
    dir: PathBuf,
    matrices: bool,
    error: Option<CliError>,
}

impl SnapshotWriter {
    fn write(&mut self, v: &IterationView<'_>) {
        if self.error.is_some() {
            return;
        }
        let k = v.record.iteration;
        let res = write_file(&self.dir.join(format!("mesh_{k:03}.txt")), |w| formats::write_mesh(w, v.mesh))
            .and_then(|()| {
                write_file(&self.dir.join(format!("mesh_{k:03}.vtk")), |w| {
                    formats::write_vtk(w, v.mesh, Some(v.solution), Some(v.estimate))
                })
            })
            .and_then(|()| {
                write_file(&self.dir.join(format!("estimator_{k:03}.csv")), |w| {
                    formats::write_estimator(w, v.mesh, v.estimate)
                })
            })
            .and_then(|()| {
                if self.matrices {
                    write_file(&self.dir.join(format!("matrix_{k:03}.txt")), |w| formats::write_matrix(w, v.matrix))
                } else {
                    Ok(())
                }
            });
        if let Err(e) = res {
            self.error = Some(e);
        }
    }
}

/// Runs the loop and writes `history.csv`, `timings.csv`, `report.txt` and,
/// optionally, per-iteration snapshots under `iterations/`.
pub fn run_to_dir(
    problem: &Problem,
    cfg: &RunConfig,
    out: &Path,
    snapshots: bool,
    matrices: bool,
    progress: &mut dyn FnMut(&IterationView<'_>),
) -> CliResult<RunOutcome> {
    let snapshot_dir = out.join("iterations");
    let dir = if snapshots { &snapshot_dir } else { out };
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut writer = SnapshotWriter {
        dir: snapshot_dir,
        matrices,
        error: None,
    };
    let t0 = Instant::now();
    let result = adapt_loop(problem, cfg, &mut || t0.elapsed().as_secs_f64(), &mut |v| {
        if snapshots {
            writer.write(v);
        }
        progress(v);
    });
    let history = match &result {
        Ok(h) => h.clone(),
        Err(f) => f.history.clone(),
    };
    write_file(&out.join("history.csv"), |w| formats::write_history(w, &history))?;
    write_file(&out.join("timings.csv"), |w| formats::write_timings(w, &history))?;
    let constants = observed_constants(&history, CONTRACTION_FROM);
    let failure = result.as_ref().err().map(|f| f.error.to_string());
    write_file(&out.join("report.txt"), |w| {
        write_report(w, problem, cfg, &history, &constants, failure.as_deref())
    })?;
    if let Some(e) = writer.error {
        return Err(e);
    }
    match result {
        Ok(history) => Ok(RunOutcome {
            history,
            constants,
            out: out.to_path_buf(),
        }),
        Err(f) => Err(CliError::Run(Box::new(f))),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "undefined".into())
}

pub fn write_report<W: Write>(
    w: &mut W,
    problem: &Problem,
    cfg: &RunConfig,
    history: &ConvergenceHistory,
    constants: &ObservedConstants,
    failure: Option<&str>,
) -> io::Result<()> {
    writeln!(w, "adaptive-dg run report")?;
    writeln!(w)?;
    writeln!(w, "problem            {} ({})", problem.name, problem.description)?;
    writeln!(w, "method             {}", cfg.method)?;
    writeln!(w, "alpha              {}", cfg.alpha)?;
    if cfg.uniform {
        writeln!(w, "refinement         uniform")?;
    } else {
        let m = &cfg.marking;
        writeln!(w, "marking            {}", m.strategy)?;
        writeln!(
            w,
            "marking parameters theta_ch={} theta_bms={} sigma={} sigma_osc={} gamma_switch={}",
            m.theta_ch, m.theta_bms, m.sigma, m.sigma_osc, m.gamma_switch
        )?;
    }
    writeln!(w, "gamma_monitor      {}", cfg.gamma_monitor)?;
    writeln!(w, "limits             max_dofs={} max_iterations={}", cfg.max_dofs, cfg.max_iterations)?;
    writeln!(w, "solver rel_tol     {:e}", cfg.rel_tol)?;
    writeln!(w)?;
    writeln!(w, "status             {}", failure.unwrap_or("completed"))?;
    writeln!(w, "iterations         {}", history.len())?;
    if let Some(last) = history.last() {
        writeln!(w, "final ndof         {}", last.ndof)?;
        writeln!(w, "final eta          {:.6e}", last.eta_sq_total.sqrt())?;
        writeln!(w, "final error        {}", fmt_opt(last.energy_error))?;
        let error_source = if last.uses_proxy() {
            "estimator (proxy, exact solution unknown)"
        } else {
            "exact energy error"
        };
        writeln!(w, "contraction error  {error_source}")?;
    }
    writeln!(w)?;
    writeln!(w, "observed constants")?;
    writeln!(w, "  C*_obs           {}", fmt_opt(constants.c_star))?;
    writeln!(w, "  rho2_obs         {}", fmt_opt(constants.rho2))?;
    writeln!(w, "  max ratio (k>={CONTRACTION_FROM}) {}", fmt_opt(constants.max_ratio))?;
    if let Some(c) = constants.c_star {
        let sqrt_c = c.sqrt();
        let checked: Vec<bool> = history
            .records
            .iter()
            .filter_map(|r| {
                let (e, e_cr) = (r.energy_error?, r.cr_error?);
                Some(e <= e_cr + sqrt_c * r.volume_total.sqrt() * (1.0 + 1e-12))
            })
            .collect();
        if !checked.is_empty() {
            let ok = checked.iter().filter(|&&b| b).count();
            writeln!(
                w,
                "  |u-u_h| <= |u-u_h*| + sqrt(C*_obs)|hf| holds on {ok} of {} iterations",
                checked.len()
            )?;
        }
    }
    Ok(())
}

pub fn run(args: &RunArgs) -> CliResult<RunOutcome> {
    let cfg = args.run_config()?;
    let problem = load_problem(&args.common.problem)?;
    println!(
        "{:>4} {:>9} {:>13} {:>13} {:>9}",
        "iter", "ndof", "eta", "error", "ratio"
    );
    let outcome = run_to_dir(
        &problem,
        &cfg,
        &args.out,
        !args.no_snapshots,
        args.export_matrix,
        &mut |v| {
            let r = v.record;
            println!(
                "{:>4} {:>9} {:>13.6e} {:>13} {:>9}",
                r.iteration,
                r.ndof,
                r.eta_sq_total.sqrt(),
                r.energy_error.map(|e| format!("{e:.6e}")).unwrap_or_else(|| "-".into()),
                r.ratio.map(|q| format!("{q:.4}")).unwrap_or_else(|| "-".into()),
            );
        },
    )?;
    println!("wrote {}", outcome.out.display());
    Ok(outcome)
}

fn bound_text(b: Bound) -> String {
    match b {
        Bound::AtMost(x) => format!("<= {x:.1e}"),
        Bound::Positive => "> 0".into(),
        Bound::Reported => "(reported)".into(),
    }
}

/// Runs the identity suite on the initial mesh and `levels` uniform
/// refinements of it.
pub fn verify_checks(args: &VerifyArgs) -> CliResult<Vec<(usize, Check)>> {
    let methods = args.methods()?;
    if !(args.rel_tol > 0.0 && args.rel_tol < 1.0) {
        return Err(CliError::Config(format!("--rel-tol {} must lie in (0, 1)", args.rel_tol)));
    }
    let problem = load_problem(&args.problem)?;
    let cfg = VerifyConfig {
        samples: args.samples,
        rel_tol: args.rel_tol,
    };
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut uniform = || rng.random_range(-1.0..1.0);
    let mut mesh = problem.mesh.clone();
    let mut out = Vec::new();
    for level in 0..=args.levels {
        if level > 0 {
            mesh = uniform_refinement(&mesh)?.0;
        }
        let checks = verify::run_suite(&mesh, &problem.f, &methods, &cfg, &mut uniform)?;
        out.extend(checks.into_iter().map(|c| (level, c)));
    }
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let checks = verify_checks(args)?;
    let mut failed = 0;
    for (level, c) in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            failed += 1;
        }
        println!(
            "{status} level {level} {:<48} {:>12.4e} {}",
            c.name,
            c.value,
            bound_text(c.bound)
        );
    }
    if failed > 0 {
        Err(CliError::Verification { failed })
    } else {
        println!("all {} checks passed", checks.len());
        Ok(())
    }
}

#[derive(Debug)]
pub struct SweepRow {
    pub method: MethodKind,
    pub marking: String,
    pub outcome: Result<RunOutcome, CliError>,
}

pub fn sweep(args: &SweepArgs) -> CliResult<Vec<SweepRow>> {
    let methods = parse_methods(&args.methods)?;
    let strategies = args.strategies()?;
    let problem = load_problem(&args.common.problem)?;
    let mut configs = Vec::new();
    for &method in &methods {
        for &strategy in &strategies {
            configs.push((method, strategy, args.common.run_config(method, strategy)?));
        }
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(format!("creating {}", args.out.display()), e))?;
    let mut rows = Vec::new();
    for (method, strategy, cfg) in configs {
        let dir = args.out.join(format!("{method}-{strategy}"));
        let outcome = run_to_dir(&problem, &cfg, &dir, args.snapshots, false, &mut |_| {});
        let status = match &outcome {
            Ok(o) => format!(
                "ok: {} iterations, max ratio {}",
                o.history.len(),
                fmt_opt(o.constants.max_ratio)
            ),
            Err(e) => format!("failed: {e}"),
        };
        println!("{method:>6} {strategy:>3}  {status}");
        rows.push(SweepRow {
            method,
            marking: strategy.to_string(),
            outcome,
        });
    }
    write_file(&args.out.join("sweep.csv"), |w| write_sweep_table(w, &rows))?;
    Ok(rows)
}

pub fn write_sweep_table<W: Write>(w: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(
        w,
        "method,marking,status,iterations,final_ndof,final_eta,final_error,c_star_obs,rho2_obs,max_ratio"
    )?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        match &row.outcome {
            Ok(o) => {
                let last = o.history.last();
                writeln!(
                    w,
                    "{},{},ok,{},{},{},{},{},{},{}",
                    row.method,
                    row.marking,
                    o.history.len(),
                    last.map(|r| r.ndof.to_string()).unwrap_or_default(),
                    opt(last.map(|r| r.eta_sq_total.sqrt())),
                    opt(last.and_then(|r| r.energy_error)),
                    opt(o.constants.c_star),
                    opt(o.constants.rho2),
                    opt(o.constants.max_ratio),
                )?;
            }
            Err(e) => writeln!(w, "{},{},failed (exit {}),,,,,,,", row.method, row.marking, e.exit_code())?,
        }
    }
    Ok(())
}
