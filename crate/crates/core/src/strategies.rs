//! Cop strategies: the greedy branch descent against a known gamble, its
//! spanning-tree lift to arbitrary graphs, and the unknown-gambler plans
//! (cycle circling, star sweeps, depth-first patrol).

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::capture::{self, CaptureError, Expectation, RandomizedStrategy, Tail, Walk};
use crate::gamble::{Gamble, MetaGamble};
use crate::graph::{Graph, GraphError, RootedTree};
use crate::rational::{frac, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("graph is not a cycle")]
    NotACycle,
    #[error("graph is not a star")]
    NotAStar,
    #[error("dwell must be 1 or 2, got {0}")]
    BadDwell(usize),
    #[error("strategy {0:?} needs a known gamble")]
    NeedsGamble(String),
    #[error("no exact route for this opponent: {0}")]
    NoExactRoute(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("size mismatch: graph on {graph} vertices, gamble on {gamble}")]
    SizeMismatch { graph: usize, gamble: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
}

/// Per-vertex branch size `m` and branch mass `c` relative to a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchTable {
    pub size: Vec<usize>,
    pub mass: Vec<Rational>,
}

impl BranchTable {
    /// Average gamble mass `c/m` of the branch at `v`.
    pub fn density(&self, v: usize) -> Rational {
        &self.mass[v] / int(self.size[v] as i64)
    }
}

pub fn branch_table(rt: &RootedTree, g: &Gamble) -> BranchTable {
    assert_eq!(rt.n(), g.n(), "tree and gamble sizes differ");
    let size = (0..rt.n()).map(|v| rt.subtree_size(v)).collect();
    let mut mass: Vec<Rational> = g.probs().to_vec();
    for &v in rt.preorder()[1..].iter().rev() {
        let c = mass[v].clone();
        mass[rt.parent(v)] += c;
    }
    BranchTable { size, mass }
}

/// The descent path `v_1 = root, .., v_k` of the greedy branch strategy.
///
/// At `v` the cop stops for good if `p(v) >= c(v)/m(v)` or `v` is a leaf;
/// otherwise she steps into the child branch of largest average mass
/// (ties to the smallest id).
pub fn tree_pursuit_path(rt: &RootedTree, g: &Gamble) -> Vec<usize> {
    let table = branch_table(rt, g);
    let mut path = vec![rt.root()];
    let mut v = rt.root();
    loop {
        let kids = rt.children(v);
        if kids.is_empty() || *g.prob(v) >= table.density(v) {
            return path;
        }
        let mut best = kids[0];
        let mut best_density = table.density(best);
        for &c in &kids[1..] {
            let d = table.density(c);
            if d > best_density {
                best = c;
                best_density = d;
            }
        }
        // c(v) > p(v) here, so some child branch carries mass
        assert!(!table.mass[best].is_zero(), "descent entered a zero-mass branch at {best}");
        path.push(best);
        v = best;
    }
}

fn walk_along(tree: &Graph, path: &[usize]) -> Walk {
    let (&last, inner) = path[1..].split_last().unwrap_or((&path[0], &[]));
    Walk::new(tree, path[0], inner.to_vec(), Tail::Absorb(last)).expect("descent path follows tree edges")
}

/// The greedy branch strategy as a walk: from the root along the descent
/// path, absorbing at its last vertex.
pub fn tree_pursuit_walk(rt: &RootedTree, g: &Gamble) -> Walk {
    walk_along(rt.tree(), &tree_pursuit_path(rt, g))
}

/// The remainder of the descent from the moment the cop occupies `path[i]`,
/// with that occupancy counted as the first capture check.
pub fn suffix_walk(rt: &RootedTree, path: &[usize], i: usize) -> Walk {
    let mut seq = vec![path[i]];
    seq.extend_from_slice(&path[i..]);
    walk_along(rt.tree(), &seq)
}

/// Spanning tree, rooted at `start`, then the greedy branch descent.
/// Expected capture time is at most `n`.
pub fn known_gamble_walk(g: &Graph, gamble: &Gamble, start: usize) -> Result<Walk, StrategyError> {
    if gamble.n() != g.n() {
        return Err(StrategyError::SizeMismatch { graph: g.n(), gamble: gamble.n() });
    }
    let rt = RootedTree::new(g.spanning_tree(), start)?;
    let w = tree_pursuit_walk(&rt, gamble);
    // re-validate against the full graph so the walk carries its arena
    Ok(Walk::new(g, w.start(), w.prefix().to_vec(), w.tail().clone())?)
}

/// Circle forever in a direction chosen by a fair coin.
pub fn cycle_circling_strategy(g: &Graph, start: usize) -> Result<RandomizedStrategy, StrategyError> {
    let order = g.cycle_order(start).ok_or(StrategyError::NotACycle)?;
    let one_way: Vec<usize> = order[1..].iter().copied().chain([start]).collect();
    let other_way: Vec<usize> = order[1..].iter().rev().copied().chain([start]).collect();
    Ok(RandomizedStrategy::uniform(vec![
        Walk::new(g, start, vec![], Tail::Loop(one_way))?,
        Walk::new(g, start, vec![], Tail::Loop(other_way))?,
    ])?)
}

/// One period of the repeated patrol: the tour minus its starting root
/// occupancy, plus a dwell at the root when the root is itself a leaf.
pub fn patrol_round(rt: &RootedTree, reversed: bool) -> Vec<usize> {
    let tour = rt.dfs_patrol_order(reversed);
    let mut round = tour[1..].to_vec();
    if rt.n() >= 2 && rt.tree().degree(rt.root()) == 1 {
        round.push(rt.root());
    }
    round
}

/// Repeated depth-first patrol, forward or backward by a fair coin.
pub fn dfs_patrol_strategy(rt: &RootedTree) -> RandomizedStrategy {
    let walks = [false, true]
        .map(|rev| Walk::new(rt.tree(), rt.root(), vec![], Tail::Loop(patrol_round(rt, rev))).expect("patrol is legal"));
    RandomizedStrategy::uniform(walks.to_vec()).expect("two equal weights")
}

/// Survival probability over one period of a looping walk.
pub fn round_survival(w: &Walk, g: &Gamble) -> Option<Rational> {
    match w.tail() {
        Tail::Loop(c) => Some(c.iter().map(|&v| Rational::one() - g.prob(v)).product()),
        Tail::Absorb(_) => None,
    }
}

/// Star sweep: starting at the center, the cop visits the leaves in a
/// uniformly random order, spending `dwell` turns at each leaf and one turn
/// at the center before each. With `dwell = 1` the leaves are occupied on
/// even moves. After a full pass the order repeats.
#[derive(Debug, Clone)]
pub struct StarSweep {
    graph: Graph,
    center: usize,
    leaves: Vec<usize>,
    dwell: usize,
}

impl StarSweep {
    pub fn new(g: &Graph, dwell: usize) -> Result<Self, StrategyError> {
        if !(1..=2).contains(&dwell) {
            return Err(StrategyError::BadDwell(dwell));
        }
        let center = g.star_center().ok_or(StrategyError::NotAStar)?;
        let leaves = (0..g.n()).filter(|&v| v != center).collect();
        Ok(StarSweep { graph: g.clone(), center, leaves, dwell })
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn dwell(&self) -> usize {
        self.dwell
    }

    /// The walk for a fixed leaf order.
    pub fn walk_for_order(&self, order: &[usize]) -> Walk {
        let mut cyc = Vec::with_capacity(order.len() * (self.dwell + 1));
        for &leaf in order {
            cyc.push(self.center);
            cyc.extend(std::iter::repeat_n(leaf, self.dwell));
        }
        Walk::new(&self.graph, self.center, vec![], Tail::Loop(cyc)).expect("sweep is legal on the star")
    }

    /// Uniform mixture over the cyclic rotations of the leaf list. Each leaf
    /// takes every rank exactly once, so against sitters and leaf-symmetric
    /// gambles it has the same expectation as a uniformly random order.
    pub fn rotation_mixture(&self) -> RandomizedStrategy {
        let l = self.leaves.len();
        let walks = (0..l)
            .map(|r| {
                let order: Vec<usize> = (0..l).map(|i| self.leaves[(i + r) % l]).collect();
                self.walk_for_order(&order)
            })
            .collect();
        RandomizedStrategy::uniform(walks).expect("nonempty leaf set")
    }

    /// A walk with a freshly drawn uniform leaf order.
    pub fn sample_walk<R: Rng + ?Sized>(&self, rng: &mut R) -> Walk {
        let mut order = self.leaves.clone();
        order.shuffle(rng);
        self.walk_for_order(&order)
    }

    /// Whether the rotation mixture is exact against `g`: a delta, or equal
    /// mass on every leaf.
    fn rotation_exact(&self, g: &Gamble) -> bool {
        g.as_delta().is_some() || self.leaves.iter().all(|&v| g.prob(v) == g.prob(self.leaves[0]))
    }

    /// Exact expectation against a meta-gamble whose components are deltas
    /// or leaf-symmetric gambles.
    pub fn exact_vs_meta(&self, m: &MetaGamble) -> Result<Expectation, StrategyError> {
        if let Some((_, g)) = m.components().iter().find(|(_, g)| !self.rotation_exact(g)) {
            return Err(StrategyError::NoExactRoute(format!(
                "component with support {:?} is neither a delta nor leaf-symmetric",
                g.support()
            )));
        }
        Ok(capture::expected_capture_meta(&self.rotation_mixture(), m)?)
    }

    pub fn exact_vs_gamble(&self, g: &Gamble) -> Result<Expectation, StrategyError> {
        self.exact_vs_meta(&MetaGamble::single(g.clone()))
    }

    /// Capture time of a sitter at the leaf of rank `r` (1-based).
    pub fn sitter_capture_time(&self, rank: usize) -> usize {
        (rank - 1) * (self.dwell + 1) + 2
    }

    /// Expectation against the random sitter over leaves: the sitter's rank
    /// is uniform on `1..=L`.
    pub fn rank_expectation_sitter(&self) -> Rational {
        let l = self.leaves.len() as i64;
        let total: i64 = (1..=self.leaves.len()).map(|r| self.sitter_capture_time(r) as i64).sum();
        frac(total, l)
    }

    /// Expectation against the uniform-on-leaves gamble: each block of
    /// `dwell + 1` moves has one center turn and `dwell` independent leaf
    /// trials at rate `q = 1/L`.
    pub fn rank_expectation_uniform_leaves(&self) -> Rational {
        let q = frac(1, self.leaves.len() as i64);
        let miss = Rational::one() - &q;
        let mut block = Rational::one();
        let mut survive = Rational::one();
        for _ in 0..self.dwell {
            block += &survive;
            survive *= &miss;
        }
        block / (Rational::one() - survive)
    }
}

/// Cop strategy names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyName {
    Tree,
    SpanningTree,
    CycleCircle,
    StarSweep(usize),
    DfsPatrol,
    Stay(usize),
}

impl FromStr for StrategyName {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "tree" => StrategyName::Tree,
            "spanning-tree" => StrategyName::SpanningTree,
            "cycle-circle" => StrategyName::CycleCircle,
            "star-sweep:1" => StrategyName::StarSweep(1),
            "star-sweep:2" => StrategyName::StarSweep(2),
            "dfs-patrol" => StrategyName::DfsPatrol,
            _ => match s.strip_prefix("stay:").and_then(|v| v.parse().ok()) {
                Some(v) => StrategyName::Stay(v),
                None => return Err(StrategyError::UnknownStrategy(s.into())),
            },
        })
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyName::Tree => write!(f, "tree"),
            StrategyName::SpanningTree => write!(f, "spanning-tree"),
            StrategyName::CycleCircle => write!(f, "cycle-circle"),
            StrategyName::StarSweep(d) => write!(f, "star-sweep:{d}"),
            StrategyName::DfsPatrol => write!(f, "dfs-patrol"),
            StrategyName::Stay(v) => write!(f, "stay:{v}"),
        }
    }
}

/// A constructed cop strategy: either an explicit finite mixture of walks
/// or a star sweep whose leaf order is drawn afresh.
#[derive(Debug, Clone)]
pub enum CopStrategy {
    Mixture(RandomizedStrategy),
    Sweep(StarSweep),
}

impl CopStrategy {
    /// Builds the named strategy on `g` with the cop starting at `start`
    /// (star sweeps always start at the center).
    pub fn build(name: StrategyName, g: &Graph, start: usize, gamble: Option<&Gamble>) -> Result<Self, StrategyError> {
        if start >= g.n() {
            return Err(StrategyError::VertexOutOfRange { vertex: start, n: g.n() });
        }
        let known = || gamble.ok_or_else(|| StrategyError::NeedsGamble(name.to_string()));
        Ok(match name {
            StrategyName::Tree => {
                if !g.is_tree() {
                    return Err(GraphError::NotATree { n: g.n(), edges: g.edge_count() }.into());
                }
                let rt = RootedTree::new(g.clone(), start)?;
                let gm = known()?;
                if gm.n() != g.n() {
                    return Err(StrategyError::SizeMismatch { graph: g.n(), gamble: gm.n() });
                }
                CopStrategy::Mixture(RandomizedStrategy::pure(tree_pursuit_walk(&rt, gm)))
            }
            StrategyName::SpanningTree => {
                CopStrategy::Mixture(RandomizedStrategy::pure(known_gamble_walk(g, known()?, start)?))
            }
            StrategyName::CycleCircle => CopStrategy::Mixture(cycle_circling_strategy(g, start)?),
            StrategyName::StarSweep(d) => CopStrategy::Sweep(StarSweep::new(g, d)?),
            StrategyName::DfsPatrol => {
                let rt = RootedTree::new(g.spanning_tree(), start)?;
                let s = dfs_patrol_strategy(&rt);
                // lift onto the full graph
                let comps = s
                    .components()
                    .iter()
                    .map(|(w, walk)| Ok((w.clone(), Walk::new(g, walk.start(), walk.prefix().to_vec(), walk.tail().clone())?)))
                    .collect::<Result<Vec<_>, CaptureError>>()?;
                CopStrategy::Mixture(RandomizedStrategy::new(comps)?)
            }
            StrategyName::Stay(v) => {
                if v >= g.n() {
                    return Err(StrategyError::VertexOutOfRange { vertex: v, n: g.n() });
                }
                CopStrategy::Mixture(RandomizedStrategy::pure(Walk::stay(g, v)?))
            }
        })
    }

    /// Draws the cop's walk for one play.
    pub fn sample_walk<R: Rng + ?Sized>(&self, rng: &mut R) -> Walk {
        match self {
            CopStrategy::Sweep(s) => s.sample_walk(rng),
            CopStrategy::Mixture(m) => {
                let comps = m.components();
                if comps.len() == 1 {
                    return comps[0].1.clone();
                }
                let weights: Vec<f64> = comps.iter().map(|(w, _)| crate::rational::to_f64(w)).collect();
                let dist = rand::distributions::WeightedIndex::new(&weights).expect("positive weights");
                comps[rand::distributions::Distribution::sample(&dist, rng)].1.clone()
            }
        }
    }

    pub fn exact_vs_meta(&self, m: &MetaGamble) -> Result<Expectation, StrategyError> {
        match self {
            CopStrategy::Mixture(s) => Ok(capture::expected_capture_meta(s, m)?),
            CopStrategy::Sweep(s) => s.exact_vs_meta(m),
        }
    }

    pub fn exact_vs_gamble(&self, g: &Gamble) -> Result<Expectation, StrategyError> {
        self.exact_vs_meta(&MetaGamble::single(g.clone()))
    }
}

/// `(e/(e-1) - 1/2) n + 1`, the circling guarantee on `C_n`.
pub fn cycle_circling_bound(n: usize) -> f64 {
    let e = std::f64::consts::E;
    (e / (e - 1.0) - 0.5) * n as f64 + 1.0
}

/// `(1 - 1/n)^k` exactly.
pub fn uniform_miss_power(n: usize, k: usize) -> Rational {
    let miss = Rational::one() - frac(1, n as i64);
    (0..k).fold(Rational::one(), |acc, _| acc * &miss)
}
