use esjj::{
    apriori_bound, compare_fields, decay_constants, decay_rate_estimate, fd_solve, linear_solve, picard_solve, Field,
    GreenEvaluator, Grid, ProblemData,
};
use serde_json::json;

use crate::config::{parse_format, parse_solver, Format, RunConfig, SolverKind};
use crate::output::{write_field, write_json, write_table, write_table_json};
use crate::CliError;

const GREEN_COLUMNS: [&str; 6] = ["x", "xi", "t", "G", "G_t", "epsGtG"];
const DECAY_COLUMNS: [&str; 6] = ["t", "sup_u", "fitted_rate", "delta", "p_lambda", "q_lambda"];

fn problem(cfg: &RunConfig) -> Result<ProblemData, CliError> {
    Ok(ProblemData {
        h0: cfg.profile(&cfg.problem.h0)?,
        h1: cfg.profile(&cfg.problem.h1)?,
        source: cfg.source()?,
    })
}

fn evaluator_json(ev: &GreenEvaluator) -> serde_json::Value {
    json!({
        "n_max": ev.n_max(),
        "tail_bound": ev.truncation().tail_bound,
        "t_min": ev.truncation().t_min,
        "weight": format!("{:?}", ev.weight()),
    })
}

/// Output of one solver run together with its report.
struct Solved {
    field: Field,
    report: serde_json::Value,
}

fn run_solver(cfg: &RunConfig, kind: SolverKind, grid: &Grid) -> Result<Solved, CliError> {
    let p = cfg.parameters()?;
    let data = problem(cfg)?;
    let mut report = json!({ "params": p.raw(), "solver": format!("{kind:?}").to_lowercase() });
    let field = match kind {
        SolverKind::Linear => {
            let ev = cfg.evaluator()?;
            let q = cfg.quadrature()?;
            report["truncation"] = evaluator_json(&ev);
            report["quadrature"] = json!(q);
            linear_solve(&data.h0, &data.h1, &data.source, &ev, &q, grid)?
        }
        SolverKind::Picard => {
            let ev = cfg.evaluator()?;
            let q = cfg.quadrature()?;
            let pc = cfg.picard_config()?;
            let (u, rep) = picard_solve(&data.h0, &data.h1, &data.source, &ev, &q, grid, &pc)?;
            let bound = apriori_bound(&u, &data, &p);
            say!("{}", rep.to_key_value().trim_end());
            say!("{}", bound.to_key_value().trim_end());
            report["truncation"] = evaluator_json(&ev);
            report["quadrature"] = json!(q);
            report["picard"] = json!(rep);
            report["bound"] = json!(bound);
            u
        }
        SolverKind::Fd => {
            let g = cfg.fd_grid()?;
            report["fd"] = json!({ "nx": g.nx, "dt": g.dt, "scheme": format!("{:?}", g.scheme) });
            fd_solve(&data.h0, &data.h1, &data.source, &p, &g, &grid.t)?
        }
    };
    report["sup_norm"] = json!(field.sup_norm());
    report["boundary_defect"] = json!(field.boundary_defect());
    Ok(Solved { field, report })
}

pub fn green_eval(cfg: &RunConfig) -> Result<(), CliError> {
    let format = parse_format(&cfg.output.format)?;
    if format == Format::Bin {
        return Err(CliError::Config("green-eval writes csv or json".into()));
    }
    let ev = cfg.evaluator()?;
    let l = ev.params().length();
    let s = &cfg.green;
    let mut rows = Vec::with_capacity(s.x.len() * s.xi.len() * s.t.len());
    for &fx in &s.x {
        for &fxi in &s.xi {
            for &t in &s.t {
                let (x, xi) = (fx * l, fxi * l);
                rows.push(vec![
                    x,
                    xi,
                    t,
                    ev.green_eval(x, xi, t)?,
                    ev.green_dt(x, xi, t, 1)?,
                    ev.eps_gt_plus_g(x, xi, t, 0)?,
                ]);
            }
        }
    }
    let dir = &cfg.output.dir;
    let path = match format {
        Format::Json => {
            let path = dir.join("green.json");
            write_table_json(&path, &GREEN_COLUMNS, &rows)?;
            path
        }
        _ => {
            let path = dir.join("green.csv");
            write_table(&path, &GREEN_COLUMNS, &rows)?;
            path
        }
    };
    say!("modes: {}", ev.n_max());
    say!("wrote {}", path.display());
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let format = parse_format(&cfg.output.format)?;
    let kind = parse_solver(&cfg.solver.kind)?;
    let grid = cfg.grid()?;
    let mut solved = run_solver(cfg, kind, &grid)?;
    let dir = &cfg.output.dir;
    let files = write_field(dir, "u", &solved.field, format)?;
    solved.report["files"] = json!(files);
    write_json(&dir.join("report.json"), &solved.report)?;
    say!("sup_norm: {:e}", solved.field.sup_norm());
    for f in files {
        say!("wrote {}", f.display());
    }
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let kind = parse_solver(&cfg.solver.kind)?;
    if kind == SolverKind::Fd {
        return Err(CliError::Config("validate compares linear or picard against fd".into()));
    }
    let p = cfg.parameters()?;
    let data = problem(cfg)?;
    let g = cfg.fd_grid()?;
    let times = cfg.grid()?.t;
    let oracle = fd_solve(&data.h0, &data.h1, &data.source, &p, &g, &times)?;
    let candidate = run_solver(cfg, kind, &oracle.grid())?;
    let err = compare_fields(&candidate.field, &oracle)?;
    let report = json!({
        "candidate": candidate.report,
        "oracle": { "nx": g.nx, "dt": g.dt, "scheme": format!("{:?}", g.scheme) },
        "linf": err.linf,
        "l2": err.l2,
        "argmax": err.argmax,
        "per_time_max": err.per_time_max,
        "t": times,
    });
    let path = cfg.output.dir.join("validation.json");
    write_json(&path, &report)?;
    say!("linf: {:e}", err.linf);
    say!("l2: {:e}", err.l2);
    say!("argmax: x = {}, t = {}", err.argmax.0, err.argmax.1);
    say!("wrote {}", path.display());
    Ok(())
}

pub fn decay_study(cfg: &RunConfig) -> Result<(), CliError> {
    let format = parse_format(&cfg.output.format)?;
    let kind = parse_solver(&cfg.solver.kind)?;
    let p = cfg.parameters()?;
    let grid = cfg.grid()?;
    let solved = run_solver(cfg, kind, &grid)?;
    let (lo, hi) = cfg.decay_window();
    let fit = decay_rate_estimate(&solved.field, lo, hi)?;
    let dc = decay_constants(&p);
    let rows: Vec<Vec<f64>> = solved
        .field
        .t_grid
        .iter()
        .zip(solved.field.sup_in_space())
        .map(|(&t, s)| vec![t, s, fit.rate, dc.delta, dc.p_lambda, dc.q_lambda])
        .collect();
    let dir = &cfg.output.dir;
    let path = match format {
        Format::Json => {
            let path = dir.join("decay.json");
            write_table_json(&path, &DECAY_COLUMNS, &rows)?;
            path
        }
        Format::Csv => {
            let path = dir.join("decay.csv");
            write_table(&path, &DECAY_COLUMNS, &rows)?;
            path
        }
        Format::Bin => return Err(CliError::Config("decay-study writes csv or json".into())),
    };
    say!(
        "fitted_rate: {:.6} (r^2 {:.4}) over [{lo}, {hi}]",
        fit.rate,
        fit.r_squared
    );
    say!("delta: {:e}", dc.delta);
    say!("p_lambda: {:e}", dc.p_lambda);
    say!("q_lambda: {:e}", dc.q_lambda);
    say!("wrote {}", path.display());
    Ok(())
}
