//! Monte Carlo plays of cop strategies against gamblers.
//!
//! Trial `i` draws from ChaCha8 keyed by the master seed on stream `i`, so a
//! report depends only on `(inputs, master_seed)` and not on thread count or
//! scheduling. Accumulators are exact integers merged associatively.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gamble::{Gamble, MetaGamble};
use crate::strategies::CopStrategy;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("need at least one trial")]
    NoTrials,
    #[error("trial {trial} exceeded {cap} steps without capture; the pairing likely never captures")]
    Divergence { trial: u64, cap: u64 },
    #[error("size mismatch: strategy on {strategy} vertices, opponent on {opponent}")]
    SizeMismatch { strategy: usize, opponent: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// The gambler side of a simulated game.
#[derive(Debug, Clone)]
pub enum Opponent {
    Gamble(Gamble),
    Meta(MetaGamble),
}

impl Opponent {
    fn as_meta(&self) -> MetaGamble {
        match self {
            Opponent::Gamble(g) => MetaGamble::single(g.clone()),
            Opponent::Meta(m) => m.clone(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Opponent::Gamble(g) => g.n(),
            Opponent::Meta(m) => m.n(),
        }
    }
}

impl From<Gamble> for Opponent {
    fn from(g: Gamble) -> Self {
        Opponent::Gamble(g)
    }
}

impl From<MetaGamble> for Opponent {
    fn from(m: MetaGamble) -> Self {
        Opponent::Meta(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub mean: f64,
    pub sample_variance: f64,
    pub ci95_halfwidth: f64,
    pub master_seed: u64,
    pub capture_time_histogram: BTreeMap<u64, u64>,
}

impl SimReport {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.ci95_halfwidth / 1.96
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Per-trial step cap; `None` means `10^9 / trials` (at least 1000).
    pub step_cap: Option<u64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        SimConfig { trials, master_seed, step_cap: None, threads: None }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    fn cap(&self) -> u64 {
        self.step_cap.unwrap_or_else(|| (1_000_000_000 / self.trials.max(1)).max(1000))
    }
}

/// Cumulative table for inverse-CDF sampling of a vertex.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Sampler { cdf }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let x = rng.gen::<f64>() * total;
        // skip zero-mass vertices sitting on the boundary
        self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1)
    }
}

#[derive(Default)]
struct Acc {
    sum: u128,
    sum_sq: u128,
    hist: BTreeMap<u64, u64>,
}

impl Acc {
    fn push(mut self, t: u64) -> Self {
        self.sum += t as u128;
        self.sum_sq += (t as u128) * (t as u128);
        *self.hist.entry(t).or_default() += 1;
        self
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (t, c) in other.hist {
            *self.hist.entry(t).or_default() += c;
        }
        self
    }
}

/// Seeded generator for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

struct Game<'a> {
    strategy: &'a CopStrategy,
    meta_weights: Vec<f64>,
    samplers: Vec<Sampler>,
    cap: u64,
}

impl Game<'_> {
    fn play(&self, master_seed: u64, trial: u64) -> Result<u64, SimError> {
        let mut rng = trial_rng(master_seed, trial);
        let walk = self.strategy.sample_walk(&mut rng);
        let pick = if self.samplers.len() == 1 { 0 } else { Sampler::new(&self.meta_weights).sample(&mut rng) };
        let sampler = &self.samplers[pick];
        for t in 1..=self.cap {
            if sampler.sample(&mut rng) == walk.position(t) {
                return Ok(t);
            }
        }
        Err(SimError::Divergence { trial, cap: self.cap })
    }
}

pub fn simulate(strategy: &CopStrategy, opponent: &Opponent, cfg: SimConfig) -> Result<SimReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::NoTrials);
    }
    let n = match strategy {
        CopStrategy::Mixture(m) => m.n(),
        CopStrategy::Sweep(s) => s.leaves().len() + 1,
    };
    if n != opponent.n() {
        return Err(SimError::SizeMismatch { strategy: n, opponent: opponent.n() });
    }
    let meta = opponent.as_meta();
    let game = Game {
        strategy,
        meta_weights: meta.components().iter().map(|(w, _)| crate::rational::to_f64(w)).collect(),
        samplers: meta.components().iter().map(|(_, g)| Sampler::new(&g.to_f64())).collect(),
        cap: cfg.cap(),
    };
    let run = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| game.play(cfg.master_seed, i))
            .try_fold(Acc::default, |acc, t| t.map(|t| acc.push(t)))
            .try_reduce(Acc::default, |a, b| Ok(a.merge(b)))
    };
    let acc = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(summarize(acc, cfg))
}

fn summarize(acc: Acc, cfg: SimConfig) -> SimReport {
    let n = cfg.trials as f64;
    let mean = acc.sum as f64 / n;
    let sample_variance = if cfg.trials > 1 {
        // exact integer numerator: N * sum_sq - sum^2
        let num = cfg.trials as u128 * acc.sum_sq - acc.sum * acc.sum;
        num as f64 / (n * (n - 1.0))
    } else {
        0.0
    };
    SimReport {
        trials: cfg.trials,
        mean,
        sample_variance,
        ci95_halfwidth: 1.96 * (sample_variance / n).sqrt(),
        master_seed: cfg.master_seed,
        capture_time_histogram: acc.hist,
    }
}

/// One exact-vs-simulated check.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub label: String,
    pub exact: f64,
    pub mean: f64,
    pub std_error: f64,
    /// `|mean - exact|` in standard errors.
    pub z: f64,
    pub flagged: bool,
}

/// Flags every case whose simulated mean is more than four standard errors
/// from its exact value.
pub fn compare_exact_vs_mc<'a>(cases: impl IntoIterator<Item = (&'a str, f64, &'a SimReport)>) -> Vec<Comparison> {
    cases
        .into_iter()
        .map(|(label, exact, report)| {
            let se = report.std_error();
            let diff = (report.mean - exact).abs();
            let z = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
            Comparison { label: label.to_string(), exact, mean: report.mean, std_error: se, z, flagged: diff > 4.0 * se }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::{RandomizedStrategy, Walk};
    use crate::generate::{path, star};
    use crate::graph::Graph;
    use crate::rational::frac;

    fn stay(g: &Graph, v: usize) -> CopStrategy {
        CopStrategy::Mixture(RandomizedStrategy::pure(Walk::stay(g, v).unwrap()))
    }

    #[test]
    fn geometric_stay() {
        let g = path(2);
        let gm = Gamble::new(vec![frac(1, 2), frac(1, 2)]).unwrap();
        let r = simulate(&stay(&g, 0), &gm.into(), SimConfig::new(20_000, 11)).unwrap();
        assert!((r.mean - 2.0).abs() < 4.0 * r.std_error(), "{r:?}");
        assert_eq!(r.capture_time_histogram.values().sum::<u64>(), 20_000);
        assert!(r.mean >= 1.0);
    }

    #[test]
    fn deterministic_across_threads() {
        let g = star(5);
        let s = CopStrategy::Sweep(crate::strategies::StarSweep::new(&g, 1).unwrap());
        let m: Opponent = MetaGamble::random_sitter(5, &[1, 2, 3, 4]).unwrap().into();
        let a = simulate(&s, &m, SimConfig::new(5000, 3).with_threads(1)).unwrap();
        let b = simulate(&s, &m, SimConfig::new(5000, 3).with_threads(4)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&s, &m, SimConfig::new(5000, 4).with_threads(4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn divergence_is_reported() {
        let g = path(3);
        let d = Gamble::delta(3, 2).unwrap();
        let cfg = SimConfig { step_cap: Some(50), ..SimConfig::new(10, 1) };
        assert!(matches!(simulate(&stay(&g, 0), &d.into(), cfg), Err(SimError::Divergence { cap: 50, .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = path(3);
        assert_eq!(simulate(&stay(&g, 0), &Gamble::uniform(3).unwrap().into(), SimConfig::new(0, 1)), Err(SimError::NoTrials));
        assert!(matches!(
            simulate(&stay(&g, 0), &Gamble::uniform(4).unwrap().into(), SimConfig::new(5, 1)),
            Err(SimError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn comparison_flags_corrupted_values() {
        let g = path(2);
        let gm = Gamble::uniform(2).unwrap();
        let r = simulate(&stay(&g, 1), &gm.into(), SimConfig::new(10_000, 5)).unwrap();
        let out = compare_exact_vs_mc([("honest", 2.0, &r), ("corrupt", 2.5, &r)]);
        assert!(!out[0].flagged);
        assert!(out[1].flagged);
        assert!(compare_exact_vs_mc(std::iter::empty()).is_empty());
    }

    #[test]
    fn sampler_skips_zero_mass() {
        let s = Sampler::new(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let mut rng = trial_rng(9, 0);
        for _ in 0..1000 {
            let v = s.sample(&mut rng);
            assert!(v == 1 || v == 3);
        }
    }
}
