//! Multi-restart Nelder–Mead over unit vectors in `C^dim`.

use crate::linalg::C64;
use crate::random::{child_seed, gaussian_complex, seeded};
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;

/// Stop when the simplex values spread less than this.
const SD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct SearchResult {
    pub point: Vec<C64>,
    pub cost: f64,
    pub iterations: u64,
    pub evaluations: u64,
}

/// Real parameters `[re₀, im₀, re₁, …]`, normalized before the cost sees them.
pub(crate) fn to_unit(x: &[f64]) -> Option<Vec<C64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1e-12) || !norm.is_finite() {
        return None;
    }
    Some(x.chunks(2).map(|p| C64::new(p[0] / norm, p[1] / norm)).collect())
}

fn to_real(c: &[C64]) -> Vec<f64> {
    c.iter().flat_map(|z| [z.re, z.im]).collect()
}

struct Problem<'a, F> {
    cost: &'a F,
}

impl<F: Fn(&[C64]) -> f64> CostFunction for Problem<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok(match to_unit(x) {
            Some(c) => (self.cost)(&c),
            None => f64::MAX,
        })
    }
}

fn nelder_mead<F: Fn(&[C64]) -> f64>(cost: &F, start: Vec<f64>, step: f64, max_iters: u64) -> SearchResult {
    let mut simplex = vec![start.clone()];
    for k in 0..start.len() {
        let mut v = start.clone();
        v[k] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(SD_TOLERANCE).expect("tolerance is non-negative");
    let run = Executor::new(Problem { cost }, solver).configure(|s| s.max_iters(max_iters)).run();
    match run {
        Ok(res) => {
            let state = res.state();
            let best = state.get_best_param().cloned().unwrap_or(start);
            let evaluations = state.get_func_counts().values().sum();
            let point = to_unit(&best).expect("the best simplex vertex is finite");
            SearchResult { cost: cost(&point), point, iterations: state.get_iter(), evaluations }
        }
        Err(_) => {
            let point = to_unit(&start).expect("start vectors are nonzero");
            SearchResult { cost: cost(&point), point, iterations: 0, evaluations: 1 }
        }
    }
}

/// Minimizes `cost` over unit vectors: `restarts` random starts in parallel (the first few at
/// the standard basis vectors), then a tight Nelder–Mead polish of the winner.
pub(crate) fn minimize_on_sphere<F>(dim: usize, restarts: usize, seed: u64, cost: &F) -> SearchResult
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    assert!(dim > 0, "search space must be nonempty");
    if dim == 1 {
        let point = vec![C64::new(1.0, 0.0)];
        return SearchResult { cost: cost(&point), point, iterations: 0, evaluations: 1 };
    }
    let mut rng = seeded(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| child_seed(&mut rng)).collect();
    let max_iters = (400 * 2 * dim as u64).min(6000);
    let basis_starts = dim.min(restarts / 4);
    let runs: Vec<SearchResult> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| {
            let mut r = seeded(s);
            let mut start: Vec<C64> = (0..dim).map(|_| gaussian_complex(&mut r) * 0.05).collect();
            if k < basis_starts {
                start[k] += C64::new(1.0, 0.0);
            } else {
                start.iter_mut().for_each(|z| *z *= 20.0);
            }
            let start = to_unit(&to_real(&start)).expect("random start is nonzero");
            nelder_mead(cost, to_real(&start), 0.3, max_iters)
        })
        .collect();
    let iterations: u64 = runs.iter().map(|r| r.iterations).sum();
    let evaluations: u64 = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("at least one restart");
    let polished = nelder_mead(cost, to_real(&best.point), 0.02, max_iters);
    let winner = if polished.cost < best.cost { polished.clone() } else { best };
    SearchResult {
        iterations: iterations + polished.iterations,
        evaluations: evaluations + polished.evaluations,
        ..winner
    }
}
