//! Interaction graphs over a finite population.
//!
//! Text format:
//!
//! ```text
//! n 4
//! 0 1
//! 1 2
//! 2 3
//! 3 0
//! ```
//!
//! The first line declares the player count, every following non-blank line
//! is one undirected zero-indexed edge. Self-loops and duplicate edges (in
//! either orientation) are rejected, as is any player left without neighbours.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Complete,
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    n: usize,
    kind: Kind,
}

impl InteractionGraph {
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!(
                "complete graph needs at least 2 players, got {n}"
            )));
        }
        Ok(Self {
            n,
            kind: Kind::Complete,
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a player outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        if let Some(p) = adjacency.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!("player {p} has degree 0")));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            kind: Kind::Explicit(adjacency),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidGraph("empty graph file".into()))?;
        let mut head = header.split_whitespace();
        let n = match (head.next(), head.next(), head.next()) {
            (Some("n"), Some(count), None) => count
                .parse::<usize>()
                .map_err(|e| Error::InvalidGraph(format!("bad player count {count:?}: {e}")))?,
            _ => {
                return Err(Error::InvalidGraph(format!(
                    "first line must be \"n <count>\", got {header:?}"
                )))
            }
        };
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [u, v] = fields[..] else {
                return Err(Error::InvalidGraph(format!(
                    "line {lineno}: expected \"u v\", got {line:?}"
                )));
            };
            let parse = |x: &str| {
                x.parse::<usize>()
                    .map_err(|e| Error::InvalidGraph(format!("line {lineno}: bad index {x:?}: {e}")))
            };
            edges.push((parse(u)?, parse(v)?));
        }
        Self::from_edges(n, &edges)
    }

    /// Renders the graph in the text format accepted by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if u < v {
                    let _ = writeln!(out, "{u} {v}");
                }
            }
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.kind, Kind::Complete)
    }

    pub fn degree(&self, player: usize) -> usize {
        match &self.kind {
            Kind::Complete => self.n - 1,
            Kind::Explicit(adj) => adj[player].len(),
        }
    }

    /// Neighbours of `player` in ascending order.
    pub fn neighbors(&self, player: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.kind {
            Kind::Complete => Box::new((0..self.n).filter(move |&v| v != player)),
            Kind::Explicit(adj) => Box::new(adj[player].iter().copied()),
        }
    }

    /// The `i`-th neighbour in ascending order.
    pub fn neighbor_at(&self, player: usize, i: usize) -> usize {
        match &self.kind {
            Kind::Complete => {
                if i < player {
                    i
                } else {
                    i + 1
                }
            }
            Kind::Explicit(adj) => adj[player][i],
        }
    }
}
