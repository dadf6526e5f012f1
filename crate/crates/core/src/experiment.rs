//! Single runs and grid-refinement studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schemes::{advance, Solver, VariantConfig};
use crate::state::{l1_errors, State};

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub solver: Solver,
    pub initial: State,
    pub state: State,
    pub steps: usize,
}

pub fn run(problem: Problem, config: &VariantConfig, cells: usize, cfl: f64, t_end: f64) -> Result<RunResult> {
    let grid = problem.grid(cells)?;
    let solver = Solver::new(problem.model(), config.clone(), grid)?;
    let initial = problem.init(&grid, &config.layout())?;
    let mut steps = 0;
    let state = advance(&solver, initial.clone(), t_end, cfl, &mut |info| steps = info.step)?;
    Ok(RunResult {
        solver,
        initial,
        state,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub dx: f64,
    pub err_point: f64,
    pub err_avg: f64,
    /// Order relative to the previous (coarser) row.
    pub eoc_point: Option<f64>,
    pub eoc_avg: Option<f64>,
}

/// Experimental order `log(e_coarse / e_fine) / log(n_fine / n_coarse)`.
pub fn eoc(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// L1 errors against the exact solution on each grid, run in parallel.
pub fn convergence(
    problem: Problem,
    config: &VariantConfig,
    grids: &[usize],
    cfl: f64,
    t_end: f64,
) -> Result<Vec<ConvergenceRow>> {
    if grids.len() < 2 {
        return Err(Error::InvalidConfig("a convergence study needs at least two grids".into()));
    }
    if grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("grids must be strictly increasing".into()));
    }
    let exact = problem.exact(t_end)?;
    let errors = grids
        .par_iter()
        .map(|&n| {
            let r = run(problem, config, n, cfl, t_end)?;
            let grid = *r.solver.grid();
            let (ep, ea) = l1_errors(&r.state, exact.as_ref(), &grid);
            Ok((n, grid.dx(), ep, ea))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errors
        .iter()
        .enumerate()
        .map(|(j, &(n, dx, ep, ea))| {
            let prev = j.checked_sub(1).map(|k| errors[k]);
            ConvergenceRow {
                n_cells: n,
                dx,
                err_point: ep,
                err_avg: ea,
                eoc_point: prev.map(|(pn, _, pe, _)| eoc(pe, ep, pn, n)),
                eoc_avg: prev.map(|(pn, _, _, pa)| eoc(pa, ea, pn, n)),
            }
        })
        .collect())
}
