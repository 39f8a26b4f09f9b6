//! The covering nerve, walks modulo stutter, and loop generators at a vertex.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::fincat::ObjId;
use crate::sheaf::{self, SheafError, SheafObject};
use crate::site::{CoveringFamily, Site};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NerveError {
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("paths do not compose: {0:?} ends at {1}, next starts at {2}")]
    NotComposable(Vec<usize>, usize, usize),
    #[error("invalid walk {0:?}")]
    InvalidWalk(Vec<usize>),
}

impl NerveError {
    pub fn code(&self) -> &'static str {
        match self {
            NerveError::Sheaf(e) => e.code(),
            NerveError::NotComposable(..) => "NOT_COMPOSABLE",
            NerveError::InvalidWalk(_) => "INVALID_WALK",
        }
    }
}

/// Vertices are family indices; `{i, j}` is an edge when the overlap
/// `y(X_i) × y(X_j)` is not the empty object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NerveGraph {
    pub members: Vec<ObjId>,
    pub names: Vec<String>,
    /// Sorted, with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub overlaps: BTreeMap<(usize, usize), SheafObject>,
    adjacency: Vec<Vec<usize>>,
}

impl NerveGraph {
    /// Builds a graph directly from edges (used for abstract local systems).
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let n = names.len();
        let mut norm: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        norm.sort();
        norm.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &norm {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        NerveGraph {
            members: Vec::new(),
            names,
            edges: norm,
            overlaps: BTreeMap::new(),
            adjacency,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn overlap(&self, i: usize, j: usize) -> Option<&SheafObject> {
        self.overlaps.get(&(i.min(j), i.max(j)))
    }

    /// Breadth-first parents from `root` (visiting neighbours in index order).
    pub fn bfs_tree(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.num_vertices()];
        let mut seen = vec![false; self.num_vertices()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    pub fn component_of(&self, i: usize) -> Vec<usize> {
        let parent = self.bfs_tree(i);
        (0..self.num_vertices())
            .filter(|&v| v == i || parent[v].is_some())
            .collect()
    }

    /// Components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_vertices()];
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            if !seen[v] {
                let c = self.component_of(v);
                for &w in &c {
                    seen[w] = true;
                }
                out.push(c);
            }
        }
        out
    }

    /// `E − V + 1` for the component containing `i`.
    pub fn cycle_rank(&self, i: usize) -> usize {
        let comp = self.component_of(i);
        let e = self
            .edges
            .iter()
            .filter(|(a, _)| comp.binary_search(a).is_ok())
            .count();
        e + 1 - comp.len()
    }

    /// Edges of the component of `root` not in its BFS tree, in edge order.
    pub fn chords(&self, root: usize) -> Vec<(usize, usize)> {
        let parent = self.bfs_tree(root);
        let comp = self.component_of(root);
        self.edges
            .iter()
            .copied()
            .filter(|&(a, b)| {
                comp.binary_search(&a).is_ok() && parent[a] != Some(b) && parent[b] != Some(a)
            })
            .collect()
    }

    pub fn validate_walk(&self, w: &Walk) -> Result<(), NerveError> {
        let ok = !w.0.is_empty()
            && w.0.iter().all(|&v| v < self.num_vertices())
            && w.0.windows(2).all(|p| p[0] == p[1] || self.adjacent(p[0], p[1]));
        if ok {
            Ok(())
        } else {
            Err(NerveError::InvalidWalk(w.0.clone()))
        }
    }

    pub fn display_path(&self, p: &[usize]) -> String {
        let names: Vec<&str> = p.iter().map(|&i| self.names[i].as_str()).collect();
        format!("({})", names.join(","))
    }
}

/// The nerve of a covering family. Representables of the members must be
/// sheaves.
pub fn nerve_graph(site: &Site, family: &CoveringFamily) -> Result<NerveGraph, NerveError> {
    let cat = &site.category;
    let reps: Vec<SheafObject> = family
        .members
        .iter()
        .map(|&x| SheafObject::representable(cat, x))
        .collect();
    for r in &reps {
        sheaf::check_subcanonical(site, r)?;
    }
    let n = reps.len();
    let mut edges = Vec::new();
    let mut overlaps = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = sheaf::product_unchecked(cat, &reps[i], &reps[j]);
            if !sheaf::is_empty_object(site, &p)? {
                edges.push((i, j));
                overlaps.insert((i, j), p);
            }
        }
    }
    let names = family
        .members
        .iter()
        .map(|&m| cat.object_name(m).to_string())
        .collect();
    let mut g = NerveGraph::from_edges(names, &edges);
    g.members = family.members.clone();
    g.overlaps = overlaps;
    Ok(g)
}

/// A sequence of vertices, consecutive ones equal or adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk(pub Vec<usize>);

/// Stutter-free representative of a walk class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathClass(pub Vec<usize>);

impl PathClass {
    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn end(&self) -> usize {
        *self.0.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    pub fn walk(&self) -> Walk {
        Walk(self.0.clone())
    }
}

impl fmt::Display for PathClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn reduce_walk(w: &Walk) -> PathClass {
    let mut out = w.0.clone();
    out.dedup();
    PathClass(out)
}

/// `x * y = (x_1, …, x_n, y_2, …, y_m)`.
pub fn compose_paths(x: &PathClass, y: &PathClass) -> Result<PathClass, NerveError> {
    if x.end() != y.start() {
        return Err(NerveError::NotComposable(x.0.clone(), x.end(), y.start()));
    }
    let mut out = x.0.clone();
    out.extend_from_slice(&y.0[1..]);
    Ok(reduce_walk(&Walk(out)))
}

pub fn invert_path(x: &PathClass) -> PathClass {
    PathClass(x.0.iter().rev().copied().collect())
}

fn tree_path_from_root(parent: &[Option<usize>], root: usize, v: usize) -> Vec<usize> {
    let mut path = vec![v];
    let mut cur = v;
    while cur != root {
        cur = parent[cur].expect("vertex in root component");
        path.push(cur);
    }
    path.reverse();
    path
}

/// One loop at `i` per chord `(a, b)`: tree path `i → a`, then `b`, then the
/// tree path back from `b` to `i`.
pub fn aut_generators(g: &NerveGraph, i: usize) -> Vec<PathClass> {
    let parent = g.bfs_tree(i);
    g.chords(i)
        .into_iter()
        .map(|(a, b)| {
            let mut w = tree_path_from_root(&parent, i, a);
            let mut back = tree_path_from_root(&parent, i, b);
            back.reverse();
            w.extend(back);
            reduce_walk(&Walk(w))
        })
        .collect()
}
