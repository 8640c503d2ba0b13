//! Gambles (fixed vertex distributions) and meta-gambles (weighted mixtures
//! of gambles chosen once by an unknown gambler). All weights are exact.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::rational::{self, format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GambleError {
    #[error("gamble needs at least one vertex")]
    Empty,
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("negative probability {value} at vertex {vertex}")]
    Negative { vertex: usize, value: String },
    #[error("probabilities sum to {0}, expected exactly 1")]
    NotNormalized(String),
    #[error("empty support set")]
    EmptySupport,
    #[error("mixture weight {0} is not positive")]
    NonPositiveWeight(String),
    #[error("component sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("interval width {k} out of range 1..={n}")]
    WidthOutOfRange { k: usize, n: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// A fixed distribution `p_0 .. p_{n-1}` over the vertices; the gambler
/// sits at vertex `v` with probability `p_v` independently at every step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamble {
    probs: Vec<Rational>,
}

impl Gamble {
    pub fn new(probs: Vec<Rational>) -> Result<Self, GambleError> {
        if probs.is_empty() {
            return Err(GambleError::Empty);
        }
        if let Some((vertex, p)) = probs.iter().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(GambleError::Negative { vertex, value: format_rational(p) });
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(GambleError::NotNormalized(format_rational(&total)));
        }
        Ok(Gamble { probs })
    }

    /// Normalizes nonnegative integer weights. At least one weight must be
    /// positive.
    pub fn from_weights(weights: &[u64]) -> Result<Self, GambleError> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(GambleError::NotNormalized("0/1".into()));
        }
        let total = Rational::from_integer(total.into());
        Gamble::new(weights.iter().map(|&w| Rational::from_integer(w.into()) / &total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self, GambleError> {
        if n == 0 {
            return Err(GambleError::Empty);
        }
        Ok(Gamble { probs: vec![rational::frac(1, n as i64); n] })
    }

    pub fn delta(n: usize, v: usize) -> Result<Self, GambleError> {
        Gamble::uniform_on(n, &[v])
    }

    /// Uniform on the given vertex set (duplicates ignored).
    pub fn uniform_on(n: usize, support: &[usize]) -> Result<Self, GambleError> {
        if n == 0 {
            return Err(GambleError::Empty);
        }
        let set: BTreeSet<usize> = support.iter().copied().collect();
        if set.is_empty() {
            return Err(GambleError::EmptySupport);
        }
        if let Some(&vertex) = set.iter().find(|&&v| v >= n) {
            return Err(GambleError::VertexOutOfRange { vertex, n });
        }
        let p = rational::frac(1, set.len() as i64);
        let probs = (0..n).map(|v| if set.contains(&v) { p.clone() } else { Rational::zero() }).collect();
        Ok(Gamble { probs })
    }

    /// Integer weights drawn uniformly from `0..=max_weight` and normalized;
    /// redrawn in the (unlikely) all-zero case.
    pub fn random<R: Rng + ?Sized>(n: usize, max_weight: u64, rng: &mut R) -> Self {
        assert!(n > 0 && max_weight > 0);
        loop {
            let w: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max_weight)).collect();
            if let Ok(g) = Gamble::from_weights(&w) {
                return g;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, v: usize) -> &Rational {
        &self.probs[v]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational::to_f64).collect()
    }

    /// Vertices with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.probs[v].is_positive()).collect()
    }

    /// Some vertex carries all the mass.
    pub fn as_delta(&self) -> Option<usize> {
        self.probs.iter().position(|p| p.is_one())
    }

    /// Parses `v p` lines (`p` as `a/b` or decimal) for a graph with `n`
    /// vertices. Omitted vertices get 0; `#` starts a comment line.
    pub fn parse(text: &str, n: usize) -> Result<Self, GambleError> {
        if n == 0 {
            return Err(GambleError::Empty);
        }
        let mut probs = vec![Rational::zero(); n];
        let mut seen = vec![false; n];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let (v, p) = parse_entry(line, body, n)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(GambleError::Malformed { line, msg: format!("vertex {v} listed twice") });
            }
            probs[v] = p;
        }
        Gamble::new(probs)
    }

    /// One `v a/b` line per vertex with positive mass.
    pub fn to_text(&self) -> String {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(v, p)| format!("{v} {}\n", format_rational(p)))
            .collect()
    }
}

fn parse_entry(line: usize, body: &str, n: usize) -> Result<(usize, Rational), GambleError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GambleError::Malformed { line, msg: format!("expected \"v p\", got {body:?}") });
    }
    let v: usize = fields[0]
        .parse()
        .map_err(|_| GambleError::Malformed { line, msg: format!("not a vertex id: {:?}", fields[0]) })?;
    if v >= n {
        return Err(GambleError::VertexOutOfRange { vertex: v, n });
    }
    let p = parse_rational(fields[1])
        .ok_or_else(|| GambleError::Malformed { line, msg: format!("not a rational: {:?}", fields[1]) })?;
    Ok((v, p))
}

/// A finite mixture of gambles with exact positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaGamble {
    components: Vec<(Rational, Gamble)>,
}

impl MetaGamble {
    pub fn new(components: Vec<(Rational, Gamble)>) -> Result<Self, GambleError> {
        let first = components.first().ok_or(GambleError::EmptySupport)?.1.n();
        let mut total = Rational::zero();
        for (w, g) in &components {
            if !w.is_positive() {
                return Err(GambleError::NonPositiveWeight(format_rational(w)));
            }
            if g.n() != first {
                return Err(GambleError::SizeMismatch(first, g.n()));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(GambleError::NotNormalized(format_rational(&total)));
        }
        Ok(MetaGamble { components })
    }

    pub fn single(g: Gamble) -> Self {
        MetaGamble { components: vec![(Rational::one(), g)] }
    }

    /// The random sitter: a uniformly chosen vertex of `sites`, then a delta
    /// there. Duplicates are ignored.
    pub fn random_sitter(n: usize, sites: &[usize]) -> Result<Self, GambleError> {
        let set: BTreeSet<usize> = sites.iter().copied().collect();
        if set.is_empty() {
            return Err(GambleError::EmptySupport);
        }
        let w = rational::frac(1, set.len() as i64);
        let components = set
            .into_iter()
            .map(|v| Ok((w.clone(), Gamble::delta(n, v)?)))
            .collect::<Result<Vec<_>, GambleError>>()?;
        MetaGamble::new(components)
    }

    /// On the cycle `0..n` in index order: a uniformly chosen start `i`, then
    /// the gamble uniform on `{i, .., i+k-1 mod n}`.
    pub fn interval(n: usize, k: usize) -> Result<Self, GambleError> {
        if k == 0 || k > n {
            return Err(GambleError::WidthOutOfRange { k, n });
        }
        let w = rational::frac(1, n as i64);
        let components = (0..n)
            .map(|i| {
                let arc: Vec<usize> = (0..k).map(|j| (i + j) % n).collect();
                Ok((w.clone(), Gamble::uniform_on(n, &arc)?))
            })
            .collect::<Result<Vec<_>, GambleError>>()?;
        MetaGamble::new(components)
    }

    /// Interval width `ceil(sqrt(n))`.
    pub fn default_interval_width(n: usize) -> usize {
        let mut k = (n as f64).sqrt() as usize;
        while k * k < n {
            k += 1;
        }
        while k > 1 && (k - 1) * (k - 1) >= n {
            k -= 1;
        }
        k.max(1)
    }

    pub fn components(&self) -> &[(Rational, Gamble)] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components[0].1.n()
    }

    /// The marginal distribution of the gambler's position. Only a sanity
    /// check; the game itself is played against the mixture.
    pub fn averaged(&self) -> Gamble {
        let mut probs = vec![Rational::zero(); self.n()];
        for (w, g) in &self.components {
            for (acc, p) in probs.iter_mut().zip(g.probs()) {
                *acc += w * p;
            }
        }
        Gamble::new(probs).expect("mixture of gambles is a gamble")
    }

    /// Blocks introduced by `weight a/b`, each followed by `v p` lines.
    pub fn parse(text: &str, n: usize) -> Result<Self, GambleError> {
        let mut blocks: Vec<(usize, Rational, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            if let Some(w) = body.strip_prefix("weight") {
                let w = parse_rational(w)
                    .ok_or_else(|| GambleError::Malformed { line, msg: format!("bad weight {:?}", w.trim()) })?;
                blocks.push((line, w, String::new()));
            } else {
                let block = blocks
                    .last_mut()
                    .ok_or_else(|| GambleError::Malformed { line, msg: "entry before first \"weight\" line".into() })?;
                // keep original line numbers in diagnostics
                parse_entry(line, body, n)?;
                block.2.push_str(body);
                block.2.push('\n');
            }
        }
        let components = blocks
            .into_iter()
            .map(|(_, w, body)| Ok((w, Gamble::parse(&body, n)?)))
            .collect::<Result<Vec<_>, GambleError>>()?;
        MetaGamble::new(components)
    }
}
