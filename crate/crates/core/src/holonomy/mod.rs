//! Transition bijections of a locally constant sheaf over a covering family,
//! holonomy of walks, holonomy groups and their comparison.

pub mod group;
pub mod perm;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use group::{FiniteGroup, GroupError, PermutationGroup, ORDER_BOUND};
pub use perm::Perm;

use crate::fincat::FiniteCategory;
use crate::nerve::{self, aut_generators, nerve_graph, NerveError, NerveGraph, PathClass, Walk};
use crate::sheaf::{self, Cells, Presheaf, SheafError, SheafObject};
use crate::site::{CoveringFamily, Site};

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HolonomyError {
    #[error(transparent)]
    Nerve(#[from] NerveError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("family member `{0}` does not trivialize the sheaf")]
    NotTrivializing(String),
    #[error("overlap of `{0}` and `{1}`: {2} sections over the overlap, fiber has {3}")]
    OverlapNotTrivial(String, String, usize, usize),
    #[error("vertex {0} is not in the nerve")]
    NoSuchVertex(usize),
}

impl HolonomyError {
    pub fn code(&self) -> &'static str {
        match self {
            HolonomyError::Nerve(e) => e.code(),
            HolonomyError::Sheaf(e) => e.code(),
            HolonomyError::Group(e) => e.code(),
            HolonomyError::NotTrivializing(_) => "NOT_TRIVIALIZING",
            HolonomyError::OverlapNotTrivial(..) => "OVERLAP_NOT_TRIVIAL",
            HolonomyError::NoSuchVertex(_) => "INVALID_WALK",
        }
    }
}

/// Edge transports `t_ij : F(X_j) → F(X_i)` over a nerve, stored for both
/// orientations with `t_ji = t_ij⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub graph: NerveGraph,
    pub fibers: Vec<usize>,
    transports: BTreeMap<(usize, usize), Perm>,
}

impl TransitionSystem {
    /// `transports` holds one bijection per edge `(i, j)` with `i < j`.
    pub fn from_transports(graph: NerveGraph, fibers: Vec<usize>, transports: &BTreeMap<(usize, usize), Perm>) -> Self {
        let mut ts = TransitionSystem {
            graph,
            fibers,
            transports: BTreeMap::new(),
        };
        let edges = ts.graph.edges.clone();
        for (i, j) in edges {
            let t = transports.get(&(i, j)).cloned().unwrap_or_else(|| Perm::identity(ts.fibers[j]));
            ts.set_transport(i, j, t);
        }
        ts
    }

    /// `t_ii` is the identity.
    pub fn transport(&self, i: usize, j: usize) -> Option<Perm> {
        if i == j {
            return Some(Perm::identity(self.fibers[i]));
        }
        self.transports.get(&(i, j)).cloned()
    }

    pub fn set_transport(&mut self, i: usize, j: usize, t: Perm) {
        self.transports.insert((j, i), t.inverse());
        self.transports.insert((i, j), t);
    }

    /// Replaces the trivialization at `k` by `σ ∘ (old)`: every `t_kj`
    /// becomes `σ ∘ t_kj` and every `t_jk` becomes `t_jk ∘ σ⁻¹`.
    pub fn gauge(&mut self, k: usize, sigma: &Perm) {
        for &j in self.graph.neighbors(k).to_vec().iter() {
            let t = self.transports[&(k, j)].clone();
            self.set_transport(k, j, sigma.after(&t));
        }
    }

    /// Gauge-equivalent system whose tree transports (BFS from `root`) are
    /// identities.
    pub fn tree_normalized(&self, root: usize) -> TransitionSystem {
        let parent = self.graph.bfs_tree(root);
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            for &w in self.graph.neighbors(v) {
                if parent[w] == Some(v) {
                    order.push(w);
                }
            }
            k += 1;
        }
        let mut out = self.clone();
        for &v in &order[1..] {
            let p = parent[v].unwrap();
            // Make t'_pv = id by gauging v with t'_pv itself.
            let t = out.transport(p, v).unwrap();
            out.gauge(v, &t);
        }
        out
    }

    /// `t_{i1 i2} ∘ … ∘ t_{i(n-1) in}` along the reduced walk.
    pub fn holonomy_of_walk(&self, w: &Walk) -> Result<Perm, HolonomyError> {
        self.graph.validate_walk(w)?;
        let p = nerve::reduce_walk(w).0;
        let mut acc = Perm::identity(self.fibers[*p.last().unwrap()]);
        for k in (0..p.len() - 1).rev() {
            acc = self.transport(p[k], p[k + 1]).unwrap().after(&acc);
        }
        Ok(acc)
    }

    pub fn generator_holonomies(&self, base: usize) -> Result<Vec<(PathClass, Perm)>, HolonomyError> {
        if base >= self.graph.num_vertices() {
            return Err(HolonomyError::NoSuchVertex(base));
        }
        aut_generators(&self.graph, base)
            .into_iter()
            .map(|g| {
                let h = self.holonomy_of_walk(&g.walk())?;
                Ok((g, h))
            })
            .collect()
    }

    pub fn holonomy_group(&self, base: usize, cap: usize) -> Result<PermutationGroup, HolonomyError> {
        let gens = self.generator_holonomies(base)?.into_iter().map(|(_, h)| h).collect();
        Ok(PermutationGroup::generate(self.fibers[base], gens, cap)?)
    }
}

/// The map `g_i : F(X_i) → Nat(overlap, F)`, `s ↦ ((u, v) ↦ F(u)(s))`, where
/// `side` picks the component of the overlap pair.
fn section_map(
    cat: &FiniteCategory,
    f: &Presheaf,
    overlap: &SheafObject,
    x: [crate::fincat::ObjId; 2],
    side: usize,
) -> Vec<Vec<usize>> {
    let cells = Cells::new(cat, &overlap.presheaf);
    let source = x[side];
    (0..f.size(source))
        .map(|s| {
            cells
                .cells
                .iter()
                .map(|&(w, k)| {
                    let nb = cat.hom(w, x[1]).len();
                    let idx = if side == 0 { k / nb } else { k % nb };
                    let u = cat.hom(w, x[side])[idx];
                    f.restrict(u, s)
                })
                .collect()
        })
        .collect()
}

/// Transition bijections `t_ij = g_i⁻¹ ∘ g_j` for a family trivializing `f`.
pub fn transition_isos(site: &Site, f: &Presheaf, family: &CoveringFamily) -> Result<TransitionSystem, HolonomyError> {
    let cat = &site.category;
    for &m in &family.members {
        if !sheaf::is_constant_on_slice(cat, f, m) {
            return Err(HolonomyError::NotTrivializing(cat.object_name(m).to_string()));
        }
    }
    let graph = nerve_graph(site, family)?;
    let fibers: Vec<usize> = family.members.iter().map(|&m| f.size(m)).collect();
    let mut transports = BTreeMap::new();
    for &(i, j) in &graph.edges {
        let x = [family.members[i], family.members[j]];
        let overlap = graph.overlap(i, j).unwrap();
        let sections = sheaf::sections_over(cat, &overlap.presheaf, f);
        let index: HashMap<&Vec<usize>, usize> = sections.iter().enumerate().map(|(k, s)| (s, k)).collect();
        let as_index = |side: usize| -> Result<Vec<usize>, HolonomyError> {
            let g = section_map(cat, f, overlap, x, side);
            let idx: Vec<usize> = g.iter().map(|s| index[s]).collect();
            if idx.len() != sections.len() || !Perm(idx.clone()).is_bijection() {
                return Err(HolonomyError::OverlapNotTrivial(
                    cat.object_name(x[0]).to_string(),
                    cat.object_name(x[1]).to_string(),
                    sections.len(),
                    f.size(x[side]),
                ));
            }
            Ok(idx)
        };
        let gi = Perm(as_index(0)?);
        let gj = Perm(as_index(1)?);
        transports.insert((i, j), gi.inverse().after(&gj));
    }
    Ok(TransitionSystem::from_transports(graph, fibers, &transports))
}

pub fn holonomy_group(
    site: &Site,
    f: &Presheaf,
    family: &CoveringFamily,
    base: usize,
    cap: usize,
) -> Result<PermutationGroup, HolonomyError> {
    transition_isos(site, f, family)?.holonomy_group(base, cap)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport {
    pub order_a: usize,
    pub order_b: usize,
    pub isomorphic: bool,
}

pub fn compare_groups(a: &PermutationGroup, b: &PermutationGroup) -> Result<RefinementReport, HolonomyError> {
    let (ga, gb) = (FiniteGroup::from_permutations(a), FiniteGroup::from_permutations(b));
    Ok(RefinementReport {
        order_a: a.order(),
        order_b: b.order(),
        isomorphic: ga.is_isomorphic(&gb)?,
    })
}

/// Holonomy groups over two trivializing families (based at each family's
/// first member), compared up to isomorphism.
pub fn refinement_invariance_check(
    site: &Site,
    f: &Presheaf,
    a: &CoveringFamily,
    b: &CoveringFamily,
    cap: usize,
) -> Result<RefinementReport, HolonomyError> {
    let ga = holonomy_group(site, f, a, 0, cap)?;
    let gb = holonomy_group(site, f, b, 0, cap)?;
    compare_groups(&ga, &gb)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProNode {
    pub label: String,
    pub group: PermutationGroup,
}

/// Finite diagram of holonomy groups with the surjections between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProGroupPresentation {
    pub nodes: Vec<ProNode>,
    /// `(j, i)`: a surjection `G_j → G_i` exists.
    pub surjections: Vec<(usize, usize)>,
    /// Image of the simultaneous representation on the product fiber.
    pub joint: PermutationGroup,
}

pub fn pro_pi1_presentation(
    site: &Site,
    family: &CoveringFamily,
    sheaves: &[(String, Presheaf)],
    cap: usize,
) -> Result<ProGroupPresentation, HolonomyError> {
    let systems: Vec<TransitionSystem> = sheaves
        .iter()
        .map(|(_, f)| transition_isos(site, f, family))
        .collect::<Result<_, _>>()?;
    let mut nodes = Vec::new();
    for ((label, _), ts) in sheaves.iter().zip(&systems) {
        nodes.push(ProNode {
            label: label.clone(),
            group: ts.holonomy_group(0, cap)?,
        });
    }
    let finite: Vec<FiniteGroup> = nodes.iter().map(|n| FiniteGroup::from_permutations(&n.group)).collect();
    let mut surjections = Vec::new();
    for j in 0..finite.len() {
        for i in 0..finite.len() {
            if i != j && finite[j].has_surjection_onto(&finite[i])? {
                surjections.push((j, i));
            }
        }
    }
    // Product fiber in mixed radix, first sheaf most significant.
    let sizes: Vec<usize> = systems.iter().map(|ts| ts.fibers[0]).collect();
    // With no sheaves the product fiber is a single point.
    let degree: usize = sizes.iter().product();
    let per_sheaf: Vec<Vec<Perm>> = systems
        .iter()
        .map(|ts| ts.generator_holonomies(0).map(|v| v.into_iter().map(|(_, h)| h).collect()))
        .collect::<Result<_, _>>()?;
    let num_gens = per_sheaf.first().map_or(0, Vec::len);
    let gens: Vec<Perm> = (0..num_gens)
        .map(|g| {
            Perm(
                (0..degree)
                    .map(|x| {
                        let mut digits = Vec::with_capacity(sizes.len());
                        let mut rest = x;
                        for &s in sizes.iter().rev() {
                            digits.push(rest % s);
                            rest /= s;
                        }
                        digits.reverse();
                        digits
                            .iter()
                            .zip(&per_sheaf)
                            .zip(&sizes)
                            .fold(0, |acc, ((&d, hs), &s)| acc * s + hs[g].apply(d))
                    })
                    .collect(),
            )
        })
        .collect();
    let joint = PermutationGroup::generate(degree, gens, cap)?;
    Ok(ProGroupPresentation {
        nodes,
        surjections,
        joint,
    })
}

/// Local systems with fiber `0..n` on the nerve: all chord transports, tree
/// transports fixed to the identity. With `normalized = false` every edge is
/// enumerated.
pub fn enumerate_local_systems(graph: &NerveGraph, n: usize, normalized: bool) -> Vec<TransitionSystem> {
    use itertools::Itertools;
    let free: Vec<(usize, usize)> = if normalized {
        let mut chords = Vec::new();
        for comp in graph.components() {
            chords.extend(graph.chords(comp[0]));
        }
        chords.sort();
        chords
    } else {
        graph.edges.clone()
    };
    let perms = Perm::all(n);
    let fibers = vec![n; graph.num_vertices()];
    if free.is_empty() {
        return vec![TransitionSystem::from_transports(graph.clone(), fibers, &BTreeMap::new())];
    }
    free.iter()
        .map(|_| perms.iter())
        .multi_cartesian_product()
        .map(|choice| {
            let map: BTreeMap<(usize, usize), Perm> =
                free.iter().copied().zip(choice.into_iter().cloned()).collect();
            TransitionSystem::from_transports(graph.clone(), fibers.clone(), &map)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplyConnectedReport {
    pub holds: bool,
    pub checked: usize,
    /// First local system with nontrivial holonomy.
    pub witness: Option<TransitionSystem>,
}

/// Every local system with fibers of size `≤ k` trivialized by the family
/// has trivial holonomy (i.e. is constant).
pub fn is_simply_connected_bounded(
    site: &Site,
    family: &CoveringFamily,
    k: usize,
    cap: usize,
) -> Result<SimplyConnectedReport, HolonomyError> {
    let graph = nerve_graph(site, family)?;
    let roots: Vec<usize> = graph.components().iter().map(|c| c[0]).collect();
    let mut checked = 0;
    for n in 1..=k {
        for ts in enumerate_local_systems(&graph, n, true) {
            checked += 1;
            for &r in &roots {
                if !ts.holonomy_group(r, cap)?.is_trivial() {
                    return Ok(SimplyConnectedReport {
                        holds: false,
                        checked,
                        witness: Some(ts),
                    });
                }
            }
        }
    }
    Ok(SimplyConnectedReport {
        holds: true,
        checked,
        witness: None,
    })
}
