//! Minimum-distance graphs of Steiner systems and exact graph colouring.
//!
//! Two blocks of an `S(t, k, n)` are adjacent when they share exactly
//! `t - 1` points. A colour class is then a family of blocks pairwise
//! meeting in at most `t - 2` points, and the chromatic number is the
//! fewest such classes covering the system.
//!
//! [`chromatic_number`] never returns a heuristic value: the reported `chi`
//! comes with a proper colouring and with a proof that `chi - 1` colours do
//! not suffice (a clique, a counting argument, or an exhausted search).

use std::fmt;

use thiserror::Error;

use crate::steiner::{intersection_size, Block, SteinerSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("minimum-distance graphs are not defined here for t = 1")]
    StrengthOne,
    #[error("search budget exhausted: {lower} <= chi <= {upper}")]
    BudgetExhausted {
        lower: usize,
        upper: usize,
        /// Best colouring found, with `upper` cells.
        best: Vec<Vec<usize>>,
        nodes: u64,
    },
    #[error("not a partition of the block set: {0}")]
    NotAPartition(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Fixed-size set of vertex indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { words: vec![0; len.div_ceil(64)] }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    wi * 64 + b
                })
            })
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Simple undirected graph on `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BitSet>,
}

impl Graph {
    pub fn new(order: usize) -> Self {
        Graph { adj: vec![BitSet::new(order); order] }
    }

    pub fn from_fn(order: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Graph::new(order);
        for u in 0..order {
            for v in u + 1..order {
                if adjacent(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "loops are not allowed");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.order())
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter().enumerate().all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    pub fn is_independent(&self, vs: &[usize]) -> bool {
        vs.iter().enumerate().all(|(i, &u)| vs[i + 1..].iter().all(|&v| !self.adjacent(u, v)))
    }

    /// True when `cells` partition the vertices into independent sets.
    pub fn is_proper_partition(&self, cells: &[Vec<usize>]) -> bool {
        let mut seen = vec![false; self.order()];
        for cell in cells {
            for &v in cell {
                if v >= self.order() || std::mem::replace(&mut seen[v], true) {
                    return false;
                }
            }
            if !self.is_independent(cell) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Blocks of a system as vertices, adjacent iff they share `t - 1` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinDistanceGraph {
    pub graph: Graph,
    pub t: usize,
    /// Upper bound on the size of an independent set, when one is known:
    /// for `t = 2` independent blocks are disjoint, so at most `n / k`.
    pub independence_bound: Option<usize>,
}

pub fn min_distance_graph(sys: &SteinerSystem) -> Result<MinDistanceGraph, ColoringError> {
    if sys.t() < 2 {
        return Err(ColoringError::StrengthOne);
    }
    let blocks = sys.blocks();
    let graph = Graph::from_fn(blocks.len(), |u, v| intersection_size(&blocks[u], &blocks[v]) == sys.t() - 1);
    Ok(MinDistanceGraph {
        graph,
        t: sys.t(),
        independence_bound: (sys.t() == 2).then(|| sys.n() / sys.k()),
    })
}

/// Why `chi - 1` colours are impossible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LowerBoundWitness {
    /// Pairwise adjacent vertices.
    Clique(Vec<usize>),
    /// `vertices` vertices, independent sets of size at most `max_independent`.
    Counting { vertices: usize, max_independent: usize },
    /// Exhaustive search refuted a colouring with `colors` colours.
    Exhaustive { colors: usize, nodes: u64 },
}

impl LowerBoundWitness {
    pub fn bound(&self) -> usize {
        match self {
            LowerBoundWitness::Clique(c) => c.len(),
            LowerBoundWitness::Counting { vertices, max_independent } => vertices.div_ceil(*max_independent),
            LowerBoundWitness::Exhaustive { colors, .. } => colors + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringResult {
    pub chi: usize,
    /// `chi` cells of vertex (block) indices, each sorted, ordered by their
    /// smallest member.
    pub partition: Vec<Vec<usize>>,
    pub lower_bound_witness: LowerBoundWitness,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 200_000_000 }
    }
}

/// Exact chromatic number of a minimum-distance graph.
pub fn chromatic_number(g: &MinDistanceGraph, budget: Budget) -> Result<ColoringResult, ColoringError> {
    color_exact(&g.graph, g.independence_bound, budget)
}

/// Exact chromatic number of any graph. `independence_bound`, if given,
/// must bound the size of every independent set.
pub fn color_exact(
    graph: &Graph,
    independence_bound: Option<usize>,
    budget: Budget,
) -> Result<ColoringResult, ColoringError> {
    let order = graph.order();
    if order == 0 {
        return Ok(ColoringResult {
            chi: 0,
            partition: Vec::new(),
            lower_bound_witness: LowerBoundWitness::Clique(Vec::new()),
            nodes: 0,
        });
    }
    let clique = greedy_clique(graph);
    let mut witness = LowerBoundWitness::Clique(clique.clone());
    if let Some(alpha) = independence_bound.filter(|&a| a > 0) {
        let counting = LowerBoundWitness::Counting { vertices: order, max_independent: alpha };
        if counting.bound() > witness.bound() {
            witness = counting;
        }
    }
    let mut best = dsatur_greedy(graph);
    let mut upper = best.iter().max().map_or(0, |&c| c + 1);
    let mut nodes = 0;
    let mut colors = witness.bound();
    while colors < upper {
        let mut search = Dsatur::new(graph, colors, independence_bound, &clique, budget.max_nodes - nodes);
        let outcome = search.run();
        nodes += search.nodes;
        match outcome {
            Some(true) => {
                best = search.colors.iter().map(|c| c.expect("complete colouring")).collect();
                upper = colors;
            }
            Some(false) => {
                witness = LowerBoundWitness::Exhaustive { colors, nodes: search.nodes };
                colors += 1;
            }
            None => {
                return Err(ColoringError::BudgetExhausted {
                    lower: colors,
                    upper,
                    best: cells_of(&best, upper),
                    nodes,
                })
            }
        }
    }
    let partition = cells_of(&best, upper);
    debug_assert!(graph.is_proper_partition(&partition));
    Ok(ColoringResult { chi: upper, partition, lower_bound_witness: witness, nodes })
}

fn cells_of(colors: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut cells = vec![Vec::new(); count];
    for (v, &c) in colors.iter().enumerate() {
        cells[c].push(v);
    }
    cells.retain(|c| !c.is_empty());
    cells.sort();
    cells
}

/// Largest clique found by greedily growing one from every start vertex.
pub fn greedy_clique(graph: &Graph) -> Vec<usize> {
    let mut best = Vec::new();
    for start in 0..graph.order() {
        let mut clique = vec![start];
        let mut cands: Vec<usize> = graph.neighbors(start).collect();
        while !cands.is_empty() {
            let pick = *cands
                .iter()
                .max_by_key(|&&u| {
                    let inner = cands.iter().filter(|&&w| graph.adjacent(u, w)).count();
                    (inner, std::cmp::Reverse(u))
                })
                .unwrap();
            clique.push(pick);
            cands.retain(|&w| w != pick && graph.adjacent(pick, w));
        }
        if clique.len() > best.len() {
            clique.sort_unstable();
            best = clique;
        }
    }
    best
}

/// DSATUR greedy colouring; colours are `0..`.
pub fn dsatur_greedy(graph: &Graph) -> Vec<usize> {
    let order = graph.order();
    let mut colors: Vec<Option<usize>> = vec![None; order];
    for _ in 0..order {
        let v = (0..order)
            .filter(|&v| colors[v].is_none())
            .max_by_key(|&v| {
                let mut seen: Vec<usize> = graph.neighbors(v).filter_map(|u| colors[u]).collect();
                seen.sort_unstable();
                seen.dedup();
                (seen.len(), graph.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        let used: Vec<usize> = graph.neighbors(v).filter_map(|u| colors[u]).collect();
        colors[v] = Some((0..).find(|c| !used.contains(c)).unwrap());
    }
    colors.into_iter().map(|c| c.unwrap()).collect()
}

/// Backtracking decision procedure: is the graph `k`-colourable?
struct Dsatur<'g> {
    graph: &'g Graph,
    k: usize,
    alpha: Option<usize>,
    colors: Vec<Option<usize>>,
    /// `neighbor_colors[v][c]`: neighbours of `v` coloured `c`.
    neighbor_colors: Vec<Vec<u32>>,
    saturation: Vec<usize>,
    class_sizes: Vec<usize>,
    used: usize,
    colored: usize,
    nodes: u64,
    max_nodes: u64,
}

impl<'g> Dsatur<'g> {
    fn new(graph: &'g Graph, k: usize, alpha: Option<usize>, clique: &[usize], max_nodes: u64) -> Self {
        let order = graph.order();
        let mut s = Dsatur {
            graph,
            k,
            alpha,
            colors: vec![None; order],
            neighbor_colors: vec![vec![0; k]; order],
            saturation: vec![0; order],
            class_sizes: vec![0; k],
            used: 0,
            colored: 0,
            nodes: 0,
            max_nodes,
        };
        // Colour an initial clique with distinct colours: every k-colouring
        // can be relabelled to agree with it.
        for &v in clique.iter().take(k) {
            let c = s.used;
            s.assign(v, c);
            s.used += 1;
        }
        s
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = Some(c);
        self.class_sizes[c] += 1;
        self.colored += 1;
        for u in self.graph.neighbors(v) {
            let slot = &mut self.neighbor_colors[u][c];
            if *slot == 0 {
                self.saturation[u] += 1;
            }
            *slot += 1;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colors[v] = None;
        self.class_sizes[c] -= 1;
        self.colored -= 1;
        for u in self.graph.neighbors(v) {
            let slot = &mut self.neighbor_colors[u][c];
            *slot -= 1;
            if *slot == 0 {
                self.saturation[u] -= 1;
            }
        }
    }

    /// `Some(found)` or `None` when the budget ran out.
    fn run(&mut self) -> Option<bool> {
        if self.colored < self.graph.order() && self.k == 0 {
            return Some(false);
        }
        self.search()
    }

    fn search(&mut self) -> Option<bool> {
        let order = self.graph.order();
        if self.colored == order {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return None;
        }
        if let Some(alpha) = self.alpha {
            let room: usize = self.class_sizes.iter().map(|&s| alpha.saturating_sub(s)).sum();
            if order - self.colored > room {
                return Some(false);
            }
        }
        let mut pick = usize::MAX;
        let mut key = (0, 0);
        for v in 0..order {
            if self.colors[v].is_some() {
                continue;
            }
            let sat = self.saturation[v];
            if sat == self.k {
                return Some(false);
            }
            let free_deg = self.graph.neighbors(v).filter(|&u| self.colors[u].is_none()).count();
            if pick == usize::MAX || (sat, free_deg) > key {
                pick = v;
                key = (sat, free_deg);
            }
        }
        let v = pick;
        let limit = (self.used + 1).min(self.k);
        for c in 0..limit {
            if self.neighbor_colors[v][c] != 0 || self.alpha.is_some_and(|a| self.class_sizes[c] >= a) {
                continue;
            }
            let fresh = c == self.used;
            if fresh {
                self.used += 1;
            }
            self.assign(v, c);
            match self.search() {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.unassign(v, c);
            if fresh {
                self.used -= 1;
            }
        }
        Some(false)
    }
}

/// Exact maximum clique (branch and bound with greedy-colouring bounds).
/// `None` if the node budget runs out.
pub fn max_clique(graph: &Graph, budget: Budget) -> Option<(Vec<usize>, u64)> {
    struct Mcq<'g> {
        graph: &'g Graph,
        best: Vec<usize>,
        nodes: u64,
        max_nodes: u64,
    }
    impl Mcq<'_> {
        /// Orders candidates by greedy colour class; returns the order and
        /// the colour number (a clique-size bound) of each prefix end.
        fn color_sort(&self, cands: &[usize]) -> (Vec<usize>, Vec<usize>) {
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for &v in cands {
                match classes.iter_mut().find(|cls| cls.iter().all(|&u| !self.graph.adjacent(u, v))) {
                    Some(cls) => cls.push(v),
                    None => classes.push(vec![v]),
                }
            }
            let mut order = Vec::with_capacity(cands.len());
            let mut bounds = Vec::with_capacity(cands.len());
            for (i, cls) in classes.into_iter().enumerate() {
                for v in cls {
                    order.push(v);
                    bounds.push(i + 1);
                }
            }
            (order, bounds)
        }

        fn expand(&mut self, clique: &mut Vec<usize>, cands: &[usize]) -> bool {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return false;
            }
            let (order, bounds) = self.color_sort(cands);
            for i in (0..order.len()).rev() {
                if clique.len() + bounds[i] <= self.best.len() {
                    return true;
                }
                let v = order[i];
                clique.push(v);
                let next: Vec<usize> = order[..i].iter().copied().filter(|&u| self.graph.adjacent(u, v)).collect();
                if next.is_empty() {
                    if clique.len() > self.best.len() {
                        self.best = clique.clone();
                    }
                } else if !self.expand(clique, &next) {
                    return false;
                }
                clique.pop();
            }
            true
        }
    }
    let mut cands: Vec<usize> = (0..graph.order()).collect();
    cands.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let mut mcq = Mcq { graph, best: Vec::new(), nodes: 0, max_nodes: budget.max_nodes };
    if !mcq.expand(&mut Vec::new(), &cands) {
        return None;
    }
    let mut best = mcq.best;
    best.sort_unstable();
    Some((best, mcq.nodes))
}

/// True iff `partition` is a partition of the block indices whose cells
/// hold blocks pairwise meeting in at most `t - 2` points.
pub fn verify_block_coloring(sys: &SteinerSystem, partition: &[Vec<usize>]) -> Result<bool, ColoringError> {
    let m = sys.block_count();
    let mut seen = vec![false; m];
    for cell in partition {
        for &b in cell {
            if b >= m {
                return Err(ColoringError::NotAPartition(format!("block index {b} out of range")));
            }
            if std::mem::replace(&mut seen[b], true) {
                return Err(ColoringError::NotAPartition(format!("block index {b} repeated")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(ColoringError::NotAPartition(format!("block index {missing} missing")));
    }
    let blocks = sys.blocks();
    let limit = sys.t() as isize - 2;
    Ok(partition.iter().all(|cell| {
        cell.iter().enumerate().all(|(i, &a)| {
            cell[i + 1..].iter().all(|&b| intersection_size(&blocks[a], &blocks[b]) as isize <= limit)
        })
    }))
}

/// Converts cells given as explicit blocks into block indices of `sys`.
pub fn partition_from_blocks(sys: &SteinerSystem, cells: &[Vec<Block>]) -> Result<Vec<Vec<usize>>, ColoringError> {
    cells
        .iter()
        .map(|cell| {
            cell.iter()
                .map(|b| {
                    let mut b = b.clone();
                    b.sort_unstable();
                    sys.index_of(&b)
                        .ok_or_else(|| ColoringError::NotAPartition(format!("{b:?} is not a block")))
                })
                .collect()
        })
        .collect()
}

/// Certificate text: one line per cell, 1-based block numbers (positions
/// in the system file).
pub fn format_partition(partition: &[Vec<usize>]) -> String {
    partition
        .iter()
        .map(|cell| cell.iter().map(|b| (b + 1).to_string()).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>, ColoringError> {
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cell = line
            .split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(b) if b >= 1 => Ok(b - 1),
                _ => Err(ColoringError::Parse { line: i + 1, message: format!("bad block number {tok:?}") }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(cell);
    }
    Ok(cells)
}

/// Parses cells written as blocks, one cell per line, blocks separated by
/// `|` (the format of the bundled `sts19_cells.txt`).
pub fn parse_block_cells(text: &str) -> Result<Vec<Vec<Block>>, ColoringError> {
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cell = line
            .split('|')
            .map(|blk| {
                blk.split_whitespace()
                    .map(|tok| tok.parse::<usize>())
                    .collect::<Result<Block, _>>()
                    .map_err(|_| ColoringError::Parse { line: i + 1, message: format!("bad block {blk:?}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(cell);
    }
    Ok(cells)
}
