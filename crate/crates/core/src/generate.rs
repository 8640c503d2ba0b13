//! Random and exhaustive instance generators for tests and experiments.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::capture::{Tail, Walk};
use crate::graph::Graph;

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path")
}

/// `K_{1,n-1}` with center 0.
pub fn star(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (0, i))).expect("star")
}

/// `C_n` with edges `{i, i+1 mod n}`; requires `n >= 3`.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs n >= 3");
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("complete")
}

/// Uniform labeled tree on `n` vertices via a random Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Graph {
    assert!(n >= 1);
    if n <= 2 {
        return path(n);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = leaves.pop_first().expect("prufer leaf");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("prufer tree")
}

/// A random spanning tree plus each remaining pair independently with
/// probability `extra`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra: f64, rng: &mut R) -> Graph {
    let tree = random_tree(n, rng);
    let mut edges: Vec<(usize, usize)> = tree.edges().to_vec();
    for u in 0..n {
        for v in u + 1..n {
            if !tree.has_edge(u, v) && rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("connected supergraph of a tree")
}

/// A random legal walk: random start, random prefix of up to `max_len`
/// steps, then either an absorbing vertex or a random closed loop.
pub fn random_walk<R: Rng + ?Sized>(g: &Graph, max_len: usize, rng: &mut R) -> Walk {
    let n = g.n();
    let step = |u: usize, rng: &mut R| -> usize {
        let nb = g.neighbors(u);
        let k = rng.gen_range(0..=nb.len());
        if k == nb.len() { u } else { nb[k] }
    };
    let start = rng.gen_range(0..n);
    let mut prefix = Vec::new();
    let mut cur = start;
    for _ in 0..rng.gen_range(0..=max_len) {
        cur = step(cur, rng);
        prefix.push(cur);
    }
    let tail = if rng.gen_bool(0.3) {
        Tail::Absorb(step(cur, rng))
    } else {
        let first = step(cur, rng);
        let mut cyc = vec![first];
        let mut at = first;
        for _ in 0..rng.gen_range(0..=max_len.max(1)) {
            at = step(at, rng);
            cyc.push(at);
        }
        // close the loop along a shortest path back to `first`
        let dist = g.distances_from(first);
        while dist[at] > 1 {
            at = *g.neighbors(at).iter().find(|&&w| dist[w] + 1 == dist[at]).expect("bfs predecessor");
            cyc.push(at);
        }
        Tail::Loop(cyc)
    };
    Walk::new(g, start, prefix, tail).expect("generated walk is legal")
}

/// AHU canonical string of the subtree at `v` (parent `p`).
fn rooted_code(g: &Graph, v: usize, p: usize) -> String {
    let mut kids: Vec<String> = g.neighbors(v).iter().filter(|&&w| w != p).map(|&w| rooted_code(g, w, v)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// Canonical form of a free tree: the smallest rooted code over its
/// center(s).
pub fn tree_canonical_form(t: &Graph) -> String {
    assert!(t.is_tree());
    let n = t.n();
    let mut degree: Vec<usize> = (0..n).map(|v| t.degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in t.neighbors(v) {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| rooted_code(t, c, usize::MAX)).min().expect("tree has a center")
}

/// Every unlabeled tree on `n` vertices, one labeled representative each,
/// built by attaching a leaf to each tree on `n - 1` vertices.
pub fn unlabeled_trees(n: usize) -> Vec<Graph> {
    assert!(n >= 1);
    let mut level = vec![path(1)];
    for size in 2..=n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for v in 0..t.n() {
                let mut edges = t.edges().to_vec();
                edges.push((v, size - 1));
                let grown = Graph::new(size, edges).expect("leaf extension");
                if seen.insert(tree_canonical_form(&grown)) {
                    next.push(grown);
                }
            }
        }
        level = next;
    }
    level
}

/// Random permutation of `items`.
pub fn shuffled<T: Clone, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}
