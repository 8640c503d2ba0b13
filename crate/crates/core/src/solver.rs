//! Optimal cop play against a known gamble.
//!
//! The optimal expected capture time from `u` satisfies
//!
//! `V(u) = min_{w in N[u]} 1 + (1 - p_w) V(w)`
//!
//! (move to `w`, get checked there). Value iteration from `V = 0` is
//! nondecreasing and stays below the least fixed point, so every iterate is
//! a lower bound. Evaluating the greedy policy exactly gives an upper bound.

use num_traits::One;
use thiserror::Error;

use crate::capture::{self, CaptureError, Expectation, Tail, Walk};
use crate::gamble::Gamble;
use crate::graph::Graph;
use crate::rational::{self, Rational};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("value iteration did not settle within {0} sweeps")]
    IterationCap(u64),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("size mismatch: graph on {graph} vertices, gamble on {gamble}")]
    SizeMismatch { graph: usize, gamble: usize },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("sandwich width {width:e} exceeds {limit:e} (lower {lower}, upper {upper})")]
    SandwichWidth { width: f64, limit: f64, lower: f64, upper: f64 },
    #[error(transparent)]
    Capture(#[from] CaptureError),
}

/// Solved values with their convergence certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
    /// `max_u |V(u) - (TV)(u)|` for the returned table.
    pub residual: f64,
    pub iterations: u64,
}

/// The Bellman operator of one (graph, gamble) pair.
#[derive(Debug, Clone)]
pub struct BellmanOperator<'a> {
    graph: &'a Graph,
    miss: Vec<f64>,
}

impl<'a> BellmanOperator<'a> {
    pub fn new(graph: &'a Graph, gamble: &Gamble) -> Result<Self, SolverError> {
        if graph.n() != gamble.n() {
            return Err(SolverError::SizeMismatch { graph: graph.n(), gamble: gamble.n() });
        }
        let miss = gamble.probs().iter().map(|p| rational::to_f64(&(Rational::one() - p))).collect();
        Ok(BellmanOperator { graph, miss })
    }

    fn q(&self, w: usize, v: &[f64]) -> f64 {
        1.0 + self.miss[w] * v[w]
    }

    /// Closed neighborhood of `u` in ascending order.
    fn closed(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let nb = self.graph.neighbors(u);
        let split = nb.partition_point(|&w| w < u);
        nb[..split].iter().copied().chain(std::iter::once(u)).chain(nb[split..].iter().copied())
    }

    /// One Jacobi sweep: reads only `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len()).map(|u| self.closed(u).map(|w| self.q(w, v)).fold(f64::INFINITY, f64::min)).collect()
    }

    /// Greedy successor of `u`: the minimizing `w`, with values within `tie`
    /// of the minimum treated as equal and resolved to the smallest id.
    pub fn argmin(&self, u: usize, v: &[f64], tie: f64) -> usize {
        let best = self.closed(u).map(|w| self.q(w, v)).fold(f64::INFINITY, f64::min);
        self.closed(u).find(|&w| self.q(w, v) <= best + tie).expect("closed neighborhood is nonempty")
    }

    pub fn residual(&self, v: &[f64]) -> f64 {
        sup_diff(&self.apply(v), v)
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Iterates from `v` until `stop(step, previous_step, values)` holds.
fn iterate(
    op: &BellmanOperator<'_>,
    mut v: Vec<f64>,
    max_iterations: u64,
    mut stop: impl FnMut(f64, f64, &[f64]) -> bool,
) -> Result<(Vec<f64>, u64), SolverError> {
    let mut prev_step = f64::INFINITY;
    for k in 1..=max_iterations {
        let next = op.apply(&v);
        let step = sup_diff(&next, &v);
        v = next;
        if stop(step, prev_step, &v) {
            return Ok((v, k));
        }
        prev_step = step;
    }
    Err(SolverError::IterationCap(max_iterations))
}

fn check_tol(tol: f64) -> Result<(), SolverError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolverError::BadTolerance(tol));
    }
    Ok(())
}

/// Value iteration from zero until the sup-norm step drops below `tol`.
pub fn solve_value(g: &Graph, gamble: &Gamble, tol: f64) -> Result<ValueTable, SolverError> {
    solve_value_capped(g, gamble, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn solve_value_capped(g: &Graph, gamble: &Gamble, tol: f64, max_iterations: u64) -> Result<ValueTable, SolverError> {
    check_tol(tol)?;
    let op = BellmanOperator::new(g, gamble)?;
    let (values, iterations) = iterate(&op, vec![0.0; g.n()], max_iterations, |step, _, _| step < tol)?;
    let residual = op.residual(&values);
    Ok(ValueTable { values, residual, iterations })
}

/// Continues iterating until the estimated distance to the fixed point,
/// `step * rho / (1 - rho)` with `rho` the observed contraction of
/// successive steps, is below `tol`, or the step reaches floating-point
/// resolution.
fn refine(g: &Graph, gamble: &Gamble, vt: &ValueTable, tol: f64) -> Result<ValueTable, SolverError> {
    let op = BellmanOperator::new(g, gamble)?;
    let (values, extra) = iterate(&op, vt.values.clone(), DEFAULT_MAX_ITERATIONS, |step, prev, v| {
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if step <= 8.0 * f64::EPSILON * scale {
            return true;
        }
        let rho = step / prev;
        rho < 1.0 && step * rho / (1.0 - rho) < tol
    })?;
    let residual = op.residual(&values);
    Ok(ValueTable { values, residual, iterations: vt.iterations + extra })
}

/// The greedy policy from `start`, followed until it stays put or revisits
/// a vertex. Near-ties (within `tie`) go to the smallest id.
pub fn extract_policy_walk_with_tie(
    g: &Graph,
    gamble: &Gamble,
    vt: &ValueTable,
    start: usize,
    tie: f64,
) -> Result<Walk, SolverError> {
    if start >= g.n() {
        return Err(SolverError::VertexOutOfRange { vertex: start, n: g.n() });
    }
    let op = BellmanOperator::new(g, gamble)?;
    let mut seq: Vec<usize> = Vec::new();
    let mut seen = vec![usize::MAX; g.n()];
    let mut cur = start;
    loop {
        let next = op.argmin(cur, &vt.values, tie);
        if next == cur {
            let prefix = seq.split_last().map(|(_, rest)| rest.to_vec()).unwrap_or_default();
            return Ok(Walk::new(g, start, prefix, Tail::Absorb(cur))?);
        }
        if seen[next] != usize::MAX {
            let at = seen[next];
            let cyc = seq.split_off(at);
            return Ok(Walk::new(g, start, seq, Tail::Loop(cyc))?);
        }
        seen[next] = seq.len();
        seq.push(next);
        cur = next;
    }
}

/// Greedy policy walk with the default tie window (the solve tolerance).
pub fn extract_policy_walk(g: &Graph, gamble: &Gamble, vt: &ValueTable, start: usize) -> Result<Walk, SolverError> {
    extract_policy_walk_with_tie(g, gamble, vt, start, DEFAULT_TOL)
}

/// Certified bracket on the optimal value from one start vertex.
#[derive(Debug, Clone)]
pub struct Sandwich {
    /// Value-iteration lower bound.
    pub lower: f64,
    /// Exact expectation of the extracted policy walk.
    pub upper: Expectation,
    pub walk: Walk,
    pub table: ValueTable,
}

impl Sandwich {
    pub fn width(&self) -> f64 {
        self.upper.to_f64() - self.lower
    }
}

pub fn value_sandwich(g: &Graph, gamble: &Gamble, start: usize, tol: f64) -> Result<Sandwich, SolverError> {
    if start >= g.n() {
        return Err(SolverError::VertexOutOfRange { vertex: start, n: g.n() });
    }
    let vt = refine(g, gamble, &solve_value(g, gamble, tol)?, tol)?;
    let walk = extract_policy_walk_with_tie(g, gamble, &vt, start, tol)?;
    let upper = capture::expected_capture_time(&walk, gamble)?;
    let lower = vt.values[start];
    let s = Sandwich { lower, upper, walk, table: vt };
    let limit = 10.0 * tol;
    let width = s.width();
    if width.is_nan() || width > limit {
        return Err(SolverError::SandwichWidth { width, limit, lower, upper: s.upper.to_f64() });
    }
    Ok(s)
}

/// Worst and best starting vertices for the cop, by solved value.
#[derive(Debug, Clone, PartialEq)]
pub struct StartAnalysis {
    pub worst: (usize, f64),
    pub best: (usize, f64),
    pub table: ValueTable,
}

pub fn start_position_analysis(g: &Graph, gamble: &Gamble, tol: f64) -> Result<StartAnalysis, SolverError> {
    let vt = solve_value(g, gamble, tol)?;
    let v = &vt.values;
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = v.iter().position(|&x| x >= hi - tol).expect("nonempty");
    let best = v.iter().position(|&x| x <= lo + tol).expect("nonempty");
    Ok(StartAnalysis { worst: (worst, v[worst]), best: (best, v[best]), table: vt })
}
