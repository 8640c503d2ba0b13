//! Exact expected capture times.
//!
//! A cop [`Walk`] occupies `start` at time 0, then the prefix at times
//! `1..=k`, then either stays at an absorbing vertex or repeats a loop
//! forever. Capture is checked at every `t >= 1`:
//!
//! `E[T] = sum_{t>=1} prod_{s<t} (1 - p(w_s))`
//!
//! which splits into a finite prefix sum and a geometric tail, so the
//! result is an exact rational (or infinite).

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::gamble::{Gamble, MetaGamble};
use crate::graph::Graph;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaptureError {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("illegal move {from} -> {to} at time {time}")]
    IllegalMove { from: usize, to: usize, time: usize },
    #[error("loop tail must be nonempty")]
    EmptyLoop,
    #[error("size mismatch: walk on {walk} vertices, gamble on {gamble}")]
    SizeMismatch { walk: usize, gamble: usize },
    #[error("mixture weights: {0}")]
    BadWeights(String),
    #[error("bad walk literal: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Stay at this vertex forever.
    Absorb(usize),
    /// Repeat this sequence forever.
    Loop(Vec<usize>),
}

/// An eventually periodic cop trajectory on a fixed graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    n: usize,
    start: usize,
    prefix: Vec<usize>,
    tail: Tail,
}

impl Walk {
    /// Validates every step (including the loop wrap-around) against `g`.
    pub fn new(g: &Graph, start: usize, prefix: Vec<usize>, tail: Tail) -> Result<Self, CaptureError> {
        let n = g.n();
        let tail_seq: &[usize] = match &tail {
            Tail::Absorb(a) => std::slice::from_ref(a),
            Tail::Loop(c) if c.is_empty() => return Err(CaptureError::EmptyLoop),
            Tail::Loop(c) => c,
        };
        let seq: Vec<usize> = std::iter::once(start).chain(prefix.iter().copied()).chain(tail_seq.iter().copied()).collect();
        if let Some(&vertex) = seq.iter().find(|&&v| v >= n) {
            return Err(CaptureError::VertexOutOfRange { vertex, n });
        }
        for (time, w) in seq.windows(2).enumerate() {
            if !g.can_step(w[0], w[1]) {
                return Err(CaptureError::IllegalMove { from: w[0], to: w[1], time: time + 1 });
            }
        }
        if let Tail::Loop(c) = &tail {
            let (last, first) = (c[c.len() - 1], c[0]);
            if !g.can_step(last, first) {
                return Err(CaptureError::IllegalMove { from: last, to: first, time: seq.len() });
            }
        }
        Ok(Walk { n, start, prefix, tail })
    }

    /// Stay at `v` forever.
    pub fn stay(g: &Graph, v: usize) -> Result<Self, CaptureError> {
        Walk::new(g, v, Vec::new(), Tail::Absorb(v))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Vertex occupied at time `t`.
    pub fn position(&self, t: u64) -> usize {
        if t == 0 {
            return self.start;
        }
        let k = self.prefix.len() as u64;
        if t <= k {
            return self.prefix[(t - 1) as usize];
        }
        match &self.tail {
            Tail::Absorb(a) => *a,
            Tail::Loop(c) => c[((t - k - 1) % c.len() as u64) as usize],
        }
    }

    /// Parses `start | p1 .. pk | absorb a` or `start | p1 .. pk | loop c1 .. cL`.
    pub fn parse(text: &str, g: &Graph) -> Result<Self, CaptureError> {
        let parts: Vec<&str> = text.split('|').map(str::trim).collect();
        let bad = |msg: &str| CaptureError::Malformed(format!("{msg} in {text:?}"));
        if parts.len() != 3 {
            return Err(bad("expected three '|'-separated fields"));
        }
        let ids = |s: &str| -> Result<Vec<usize>, CaptureError> {
            s.split_whitespace().map(|x| x.parse().map_err(|_| bad(&format!("bad vertex {x:?}")))).collect()
        };
        let start = match ids(parts[0])?.as_slice() {
            [s] => *s,
            _ => return Err(bad("expected a single start vertex")),
        };
        let prefix = ids(parts[1])?;
        let (kind, rest) = parts[2].split_once(char::is_whitespace).unwrap_or((parts[2], ""));
        let tail = match kind {
            "absorb" => match ids(rest)?.as_slice() {
                [a] => Tail::Absorb(*a),
                _ => return Err(bad("absorb takes exactly one vertex")),
            },
            "loop" => Tail::Loop(ids(rest)?),
            _ => return Err(bad("tail must be \"absorb\" or \"loop\"")),
        };
        Walk::new(g, start, prefix, tail)
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "{} | {} | ", self.start, join(&self.prefix))?;
        match &self.tail {
            Tail::Absorb(a) => write!(f, "absorb {a}"),
            Tail::Loop(c) => write!(f, "loop {}", join(c)),
        }
    }
}

/// Expected capture time, possibly infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Finite(Rational),
    Infinite,
}

impl Expectation {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Expectation::Finite(r) => Some(r),
            Expectation::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Expectation::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Expectation::Finite(r) => crate::rational::to_f64(r),
            Expectation::Infinite => f64::INFINITY,
        }
    }

    /// `self <= bound`, with infinity above every rational.
    pub fn le(&self, bound: &Rational) -> bool {
        self.finite().is_some_and(|r| r <= bound)
    }

    /// `self < bound`, with infinity above every rational.
    pub fn lt(&self, bound: &Rational) -> bool {
        self.finite().is_some_and(|r| r < bound)
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Finite(r) => f.write_str(&format_rational(r)),
            Expectation::Infinite => f.write_str("inf"),
        }
    }
}

fn check_sizes(w: &Walk, g: &Gamble) -> Result<(), CaptureError> {
    if w.n != g.n() {
        return Err(CaptureError::SizeMismatch { walk: w.n, gamble: g.n() });
    }
    Ok(())
}

/// Exact `E[T]` for a deterministic walk against a gamble.
pub fn expected_capture_time(w: &Walk, g: &Gamble) -> Result<Expectation, CaptureError> {
    check_sizes(w, g)?;
    let one = Rational::one();
    let mut survival = Rational::one();
    let mut total = Rational::zero();
    for &v in &w.prefix {
        total += &survival;
        survival *= &one - g.prob(v);
    }
    if survival.is_zero() {
        return Ok(Expectation::Finite(total));
    }
    match &w.tail {
        Tail::Absorb(a) => {
            let p = g.prob(*a);
            if p.is_zero() {
                return Ok(Expectation::Infinite);
            }
            total += survival / p;
        }
        Tail::Loop(c) => {
            let mut partial = Rational::zero();
            let mut rho = Rational::one();
            for &v in c {
                partial += &rho;
                rho *= &one - g.prob(v);
            }
            if rho.is_one() {
                return Ok(Expectation::Infinite);
            }
            total += survival * partial / (one - rho);
        }
    }
    Ok(Expectation::Finite(total))
}

/// `prod_{s=1}^{t} (1 - p(w_s))`: probability of no capture through time `t`.
pub fn survival_probability(w: &Walk, g: &Gamble, t: u64) -> Result<Rational, CaptureError> {
    check_sizes(w, g)?;
    let one = Rational::one();
    let k = w.prefix.len() as u64;
    let mut s = Rational::one();
    for &v in w.prefix.iter().take(t.min(k) as usize) {
        s *= &one - g.prob(v);
    }
    if t <= k || s.is_zero() {
        return Ok(s);
    }
    let rest = t - k;
    match &w.tail {
        Tail::Absorb(a) => {
            s *= pow(&(&one - g.prob(*a)), rest);
        }
        Tail::Loop(c) => {
            let len = c.len() as u64;
            let rho: Rational = c.iter().map(|&v| &one - g.prob(v)).product();
            s *= pow(&rho, rest / len);
            for &v in &c[..(rest % len) as usize] {
                s *= &one - g.prob(v);
            }
        }
    }
    Ok(s)
}

fn pow(base: &Rational, mut exp: u64) -> Rational {
    let mut acc = Rational::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        exp >>= 1;
    }
    acc
}

/// A cop mixture over walks with exact positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomizedStrategy {
    components: Vec<(Rational, Walk)>,
}

impl RandomizedStrategy {
    pub fn new(components: Vec<(Rational, Walk)>) -> Result<Self, CaptureError> {
        let n = components.first().ok_or_else(|| CaptureError::BadWeights("no components".into()))?.1.n;
        let mut total = Rational::zero();
        for (w, walk) in &components {
            if *w <= Rational::zero() {
                return Err(CaptureError::BadWeights(format!("nonpositive weight {}", format_rational(w))));
            }
            if walk.n != n {
                return Err(CaptureError::SizeMismatch { walk: walk.n, gamble: n });
            }
            total += w;
        }
        if !total.is_one() {
            return Err(CaptureError::BadWeights(format!("weights sum to {}", format_rational(&total))));
        }
        Ok(RandomizedStrategy { components })
    }

    pub fn pure(w: Walk) -> Self {
        RandomizedStrategy { components: vec![(Rational::one(), w)] }
    }

    /// Equal weights over the given walks.
    pub fn uniform(walks: Vec<Walk>) -> Result<Self, CaptureError> {
        let w = crate::rational::frac(1, walks.len().max(1) as i64);
        RandomizedStrategy::new(walks.into_iter().map(|walk| (w.clone(), walk)).collect())
    }

    /// Flattens a weighted mixture of mixtures.
    pub fn nest(parts: Vec<(Rational, RandomizedStrategy)>) -> Result<Self, CaptureError> {
        let flat = parts
            .into_iter()
            .flat_map(|(outer, s)| s.components.into_iter().map(move |(w, walk)| (&outer * w, walk)))
            .collect();
        RandomizedStrategy::new(flat)
    }

    pub fn components(&self) -> &[(Rational, Walk)] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components[0].1.n
    }
}

/// `sum_i weight_i * E[walk_i]`; infinite if any component is.
pub fn expected_capture_randomized(s: &RandomizedStrategy, g: &Gamble) -> Result<Expectation, CaptureError> {
    let mut total = Rational::zero();
    for (w, walk) in &s.components {
        match expected_capture_time(walk, g)? {
            Expectation::Finite(e) => total += w * e,
            Expectation::Infinite => return Ok(Expectation::Infinite),
        }
    }
    Ok(Expectation::Finite(total))
}

/// Cop randomness and the gambler's one-time choice are independent, so the
/// expectation is the doubly weighted sum.
pub fn expected_capture_meta(s: &RandomizedStrategy, m: &MetaGamble) -> Result<Expectation, CaptureError> {
    let mut total = Rational::zero();
    for (w, g) in m.components() {
        match expected_capture_randomized(s, g)? {
            Expectation::Finite(e) => total += w * e,
            Expectation::Infinite => return Ok(Expectation::Infinite),
        }
    }
    Ok(Expectation::Finite(total))
}
