//! Subcommands, each producing one result table.

use rayon::prelude::*;

use dyndist::battery::battery;
use dyndist::distribution::{derivative, leibniz_residual};
use dyndist::ode::frobenius::FROBENIUS_TOL;
use dyndist::ode::{frobenius_check, regularized_solve, shape_sensitivity, solve, ImpulsiveIvp};
use dyndist::{Distribution, DynamicFn, PiecewisePoly, TestFn};

use crate::problem::Problem;
use crate::table::{format_list, Cell, ResultTable};
use crate::CliError;

/// Residual below which the product rule counts as verified.
pub const LEIBNIZ_TOL: f64 = 1e-9;

fn unresolved(name: &str) -> CliError {
    CliError::Unresolved {
        line: 0,
        name: name.into(),
    }
}

fn arity(command: &str, args: &[String], n: usize, usage: &str) -> Result<(), CliError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{command} expects {usage}")))
    }
}

impl Problem {
    fn function(&self, name: &str) -> Result<&DynamicFn, CliError> {
        self.functions.get(name).ok_or_else(|| unresolved(name))
    }

    fn testfn(&self, name: &str) -> Result<&TestFn, CliError> {
        self.testfns.get(name).ok_or_else(|| unresolved(name))
    }

    fn distribution(&self, name: &str) -> Result<&Distribution, CliError> {
        self.distributions.get(name).ok_or_else(|| unresolved(name))
    }

    fn ivp(&self) -> Result<&ImpulsiveIvp, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::Usage("problem has no [system] section".into()))
    }
}

/// Runs `command` with `args` against the problem.
pub fn run(p: &Problem, command: &str, args: &[String]) -> Result<ResultTable, CliError> {
    match command {
        "pair" => {
            arity(command, args, 2, "DISTRIBUTION TESTFN")?;
            let value = p.distribution(&args[0])?.pair(p.testfn(&args[1])?)?;
            let mut t = ResultTable::new(["distribution", "testfn", "value"]);
            t.push(vec![args[0].as_str().into(), args[1].as_str().into(), value.into()]);
            Ok(t)
        }
        "product" => {
            arity(command, args, 2, "FUNCTION DISTRIBUTION")?;
            let d = p.distribution(&args[1])?.multiply(p.function(&args[0])?)?;
            Ok(distribution_table(&d))
        }
        "derivative" => {
            arity(command, args, 1, "FUNCTION")?;
            Ok(distribution_table(&derivative(p.function(&args[0])?)?))
        }
        "leibniz" => {
            arity(command, args, 2, "F G")?;
            leibniz(p, &args[0], &args[1])
        }
        "solve" => {
            arity(command, args, 0, "no arguments")?;
            solve_table(p)
        }
        "regularize" => {
            arity(command, args, 0, "no arguments")?;
            regularize(p)
        }
        "frobenius" => {
            arity(command, args, 0, "no arguments")?;
            frobenius(p)
        }
        "sweep-shapes" => {
            arity(command, args, 0, "no arguments")?;
            sweep(p)
        }
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

fn pieces_rows(t: &mut ResultTable, kind: &str, tau: Option<f64>, pw: &PiecewisePoly) {
    for i in 0..pw.pieces().len() {
        if pw.pieces()[i].is_zero() {
            continue;
        }
        let (a, b) = pw.piece_bounds(i);
        let coeffs = pw.piece_global(i);
        t.push(vec![
            kind.into(),
            tau.map_or(Cell::Empty, Cell::Num),
            a.into(),
            b.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            format_list(coeffs.coeffs()).into(),
        ]);
    }
}

/// Regular pieces, Stieltjes pieces, then every atom followed by its
/// normalized shape (or raw density when the mass vanishes). Coefficients
/// are ascending powers of `t` (pieces) or `s` (shapes).
pub fn distribution_table(d: &Distribution) -> ResultTable {
    let mut t = ResultTable::new(["kind", "tau", "lo", "hi", "right", "left", "mass", "coefficients"]);
    pieces_rows(&mut t, "regular", None, d.regular_part());
    pieces_rows(&mut t, "stieltjes", None, d.stieltjes_part());
    for atom in d.atoms() {
        t.push(vec![
            "atom".into(),
            atom.tau.into(),
            Cell::Empty,
            Cell::Empty,
            atom.right.into(),
            atom.left.into(),
            atom.mass().into(),
            Cell::Empty,
        ]);
        match atom.shape() {
            Some(shape) => pieces_rows(&mut t, "shape", Some(atom.tau), &shape),
            None => pieces_rows(&mut t, "density", Some(atom.tau), &atom.density),
        }
    }
    t
}

fn leibniz(p: &Problem, f_name: &str, g_name: &str) -> Result<ResultTable, CliError> {
    let (f, g) = (p.function(f_name)?, p.function(g_name)?);
    let mut points: Vec<f64> = f.profiles().iter().chain(g.profiles()).map(|(t, _)| *t).collect();
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();
    let tests = battery(p.lo, p.hi, &points, p.seed)?;
    let residual = leibniz_residual(f, g, &tests)?;
    let mut t = ResultTable::new(["f", "g", "battery", "seed", "residual", "verdict"]);
    t.push(vec![
        f_name.into(),
        g_name.into(),
        (tests.len() as f64).into(),
        format!("0x{:x}", p.seed).into(),
        residual.into(),
        if residual <= LEIBNIZ_TOL { "satisfied" } else { "NOT satisfied" }.into(),
    ]);
    Ok(t)
}

fn state_headers(first: &[&str], n: usize) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect()
}

fn state_row(head: Vec<Cell>, x: &[f64]) -> Vec<Cell> {
    head.into_iter().chain(x.iter().map(|v| Cell::Num(*v))).collect()
}

fn solve_table(p: &Problem) -> Result<ResultTable, CliError> {
    let ivp = p.ivp()?;
    let traj = solve(ivp, p.steps, p.jump_steps)?;
    let mut t = ResultTable::new(state_headers(&["event", "t"], ivp.dim()));
    t.push(state_row(vec!["start".into(), ivp.t0.into()], &ivp.x0));
    for jump in &traj.jumps {
        t.push(state_row(vec!["before".into(), jump.tau.into()], &jump.x_minus));
        t.push(state_row(vec!["after".into(), jump.tau.into()], &jump.x_plus));
    }
    t.push(state_row(vec!["end".into(), ivp.hi.into()], traj.endpoint()));
    Ok(t)
}

fn regularize(p: &Problem) -> Result<ResultTable, CliError> {
    let ivp = p.ivp()?;
    let reference = solve(ivp, p.steps, p.jump_steps)?;
    let target = reference.endpoint();
    let ends = p
        .m_list
        .par_iter()
        .map(|&m| regularized_solve(ivp, m, p.steps).map(|tab| tab.last().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = ResultTable::new(state_headers(&["m", "error"], ivp.dim()));
    for (m, x) in p.m_list.iter().zip(&ends) {
        let err = x.iter().zip(target).fold(0.0_f64, |e, (a, b)| e.max((a - b).abs()));
        t.push(state_row(vec![(*m as f64).into(), err.into()], x));
    }
    Ok(t)
}

fn frobenius(p: &Problem) -> Result<ResultTable, CliError> {
    let ivp = p.ivp()?;
    let x_box = p.x_box.clone().unwrap_or_else(|| vec![(-1.0, 1.0); ivp.dim()]);
    if x_box.len() != ivp.dim() {
        return Err(CliError::Usage(format!("box has {} axes, state has {}", x_box.len(), ivp.dim())));
    }
    let r = frobenius_check(&ivp.g, (ivp.t0, ivp.hi), &x_box);
    let mut t = ResultTable::new(["points", "max_residual", "tolerance", "worst_t", "worst_x", "verdict"]);
    t.push(vec![
        (r.points as f64).into(),
        r.max_residual.into(),
        FROBENIUS_TOL.into(),
        r.worst_t.into(),
        format_list(&r.worst_x).into(),
        if r.satisfied { "satisfied" } else { "NOT satisfied" }.into(),
    ]);
    Ok(t)
}

fn sweep(p: &Problem) -> Result<ResultTable, CliError> {
    let ivp = p.ivp()?;
    if p.sweep.is_empty() {
        return Err(CliError::Usage("sweep-shapes needs a 'sweep' key".into()));
    }
    let shapes: Vec<_> = p.sweep.iter().map(|(_, s)| s.clone()).collect();
    let r = shape_sensitivity(ivp, &shapes, p.jump_steps)?;
    let n = ivp.dim();
    let mut headers = state_headers(&["shapes"], n);
    headers.push("deviation".into());
    let mut t = ResultTable::new(headers);
    for ((label, _), x) in p.sweep.iter().zip(&r.endpoints) {
        let dev = x.iter().zip(&r.endpoints[0]).fold(0.0_f64, |e, (a, b)| e.max((a - b).abs()));
        let mut row = state_row(vec![label.as_str().into()], x);
        row.push(dev.into());
        t.push(row);
    }
    let mut last = vec![Cell::text("max_deviation")];
    last.extend(std::iter::repeat_n(Cell::Empty, n));
    last.push(r.max_deviation.into());
    t.push(last);
    Ok(t)
}
