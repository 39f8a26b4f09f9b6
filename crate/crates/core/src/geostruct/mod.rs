//! Geometric structures modelled on a site with a group of automorphisms:
//! atlases of slice isomorphisms, their transitions and derived objects.

mod bundle;
mod structure;

pub use bundle::*;
pub use structure::*;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::fincat::{slice_category, validate_functor, FiniteCategory, Functor, FunctorError, ObjId, Slice};
use crate::holonomy::{FiniteGroup, GroupError, HolonomyError, DEFAULT_CLOSURE_CAP};
use crate::nerve::{nerve_graph, NerveError, NerveGraph};
use crate::sheaf::SheafError;
use crate::site::{CoveringFamily, Site, SiteError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeoError {
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Nerve(#[from] NerveError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("`{0}` is not an automorphism of the model site: {1}")]
    NotAnAutomorphism(String, String),
    #[error("group closure exceeded {0} elements")]
    ClosureCapExceeded(usize),
    #[error("chart on `{0}` is not a local isomorphism: {1}")]
    ChartNotLocalIso(String, String),
    #[error("no group element carries chart `{1}` to chart `{0}` on their overlap")]
    NoTransitionExists(String, String),
    #[error("{2} group elements carry chart `{1}` to chart `{0}` on their overlap")]
    TransitionNotUnique(String, String, usize),
    #[error("cocycle fails on ({0}, {1}, {2})")]
    CocycleViolation(String, String, String),
    #[error("supplied transition ({0}, {1}) does not match the charts on the overlap")]
    TransitionIncompatible(String, String),
    #[error("section is incompatible on the overlap of `{0}` and `{1}`")]
    SectionIncompatible(String, String),
    #[error("section component on `{0}` is not a local isomorphism: {1}")]
    NotTransverse(String, String),
    #[error("model map is not equivariant at generator `{0}`")]
    NotEquivariant(String),
    #[error("assignment is not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("no group element solves the chart equation for `{0}`")]
    NoKExists(String),
    #[error("image of `{0}` lies in {1} target charts")]
    AmbiguousTargetChart(String, usize),
    #[error("functor does not preserve covers at `{0}`")]
    NotCoverPreserving(String),
    #[error("germ space has {0} germs, above the limit; choose basepoints")]
    GermSpaceTooLarge(usize),
    #[error("unknown group element `{0}`")]
    UnknownElement(String),
}

impl GeoError {
    pub fn code(&self) -> &'static str {
        match self {
            GeoError::Site(e) => e.code(),
            GeoError::Functor(e) => e.code(),
            GeoError::Nerve(e) => e.code(),
            GeoError::Sheaf(e) => e.code(),
            GeoError::Holonomy(e) => e.code(),
            GeoError::Group(e) => e.code(),
            GeoError::NotAnAutomorphism(..) => "NOT_AN_AUTOMORPHISM",
            GeoError::ClosureCapExceeded(_) => "CLOSURE_CAP_EXCEEDED",
            GeoError::ChartNotLocalIso(..) => "CHART_NOT_LOCAL_ISO",
            GeoError::NoTransitionExists(..) => "NO_TRANSITION_EXISTS",
            GeoError::TransitionNotUnique(..) => "TRANSITION_NOT_UNIQUE",
            GeoError::CocycleViolation(..) => "COCYCLE_VIOLATION",
            GeoError::TransitionIncompatible(..) => "TRANSITION_INCOMPATIBLE",
            GeoError::SectionIncompatible(..) => "SECTION_INCOMPATIBLE",
            GeoError::NotTransverse(..) => "NOT_TRANSVERSE",
            GeoError::NotEquivariant(_) => "NOT_EQUIVARIANT",
            GeoError::NotAHomomorphism(_) => "NOT_A_HOMOMORPHISM",
            GeoError::NoKExists(_) => "NO_K_EXISTS",
            GeoError::AmbiguousTargetChart(..) => "AMBIGUOUS_TARGET_CHART",
            GeoError::NotCoverPreserving(_) => "NOT_COVER_PRESERVING",
            GeoError::GermSpaceTooLarge(_) => "GERM_SPACE_TOO_LARGE",
            GeoError::UnknownElement(_) => "UNRESOLVED_REFERENCE",
        }
    }
}

/// A finite group of cover-preserving automorphisms of a site, closed from
/// named generators. Element 0 is the identity; `mul(g, h)` is `g ∘ h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismGroup {
    pub site: Site,
    pub generators: Vec<(String, usize)>,
    elements: Vec<Functor>,
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    inverses: Vec<usize>,
}

/// Checks that `f` is an automorphism of `site` preserving covers.
pub fn check_automorphism(site: &Site, f: &Functor) -> Result<(), String> {
    let cat = &site.category;
    validate_functor(f, cat, cat).map_err(|e| e.to_string())?;
    if f.inverse().is_none() {
        return Err("not bijective".into());
    }
    for s in cat.objects() {
        let covers = site.topology.covers(s);
        let image = site.topology.covers(f.obj(s));
        if covers.len() != image.len() {
            return Err(format!("J({}) and its image differ in size", cat.object_name(s)));
        }
        for r in covers {
            let mapped = crate::site::Sieve {
                target: f.obj(s),
                arrows: r.arrows.iter().map(|&a| f.arr(a)).collect(),
            };
            if !site.topology.is_covering(&mapped) {
                return Err(format!("image of {} is not covering", r.display(cat)));
            }
        }
    }
    Ok(())
}

fn word_label(word: &[(usize, usize)], names: &[String]) -> String {
    if word.is_empty() {
        return "id".into();
    }
    word.iter()
        .map(|&(g, k)| {
            if k == 1 {
                names[g].clone()
            } else {
                format!("{}^{k}", names[g])
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

impl AutomorphismGroup {
    pub fn generate(site: Site, generators: Vec<(String, Functor)>) -> Result<Self, GeoError> {
        AutomorphismGroup::generate_with_cap(site, generators, DEFAULT_CLOSURE_CAP)
    }

    /// Breadth-first closure; each element is labelled by its first word
    /// found, with runs of one generator written as powers.
    pub fn generate_with_cap(site: Site, generators: Vec<(String, Functor)>, cap: usize) -> Result<Self, GeoError> {
        for (name, f) in &generators {
            check_automorphism(&site, f).map_err(|r| GeoError::NotAnAutomorphism(name.clone(), r))?;
        }
        let names: Vec<String> = generators.iter().map(|(n, _)| n.clone()).collect();
        let id = Functor::identity(&site.category);
        let mut elements = vec![id.clone()];
        let mut words: Vec<Vec<(usize, usize)>> = vec![vec![]];
        let mut index: HashMap<Functor, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, (_, g)) in generators.iter().enumerate() {
                let y = elements[x].after(g);
                if index.contains_key(&y) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(GeoError::ClosureCapExceeded(cap));
                }
                let mut w = words[x].clone();
                match w.last_mut() {
                    Some((last, k)) if *last == gi => *k += 1,
                    _ => w.push((gi, 1)),
                }
                index.insert(y.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(y);
                words.push(w);
            }
        }
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&a.after(b)]).collect())
            .collect();
        let inverses = (0..elements.len())
            .map(|a| (0..elements.len()).find(|&b| table[a][b] == 0).unwrap())
            .collect();
        let labels = words.iter().map(|w| word_label(w, &names)).collect();
        let gens = generators
            .iter()
            .map(|(n, g)| (n.clone(), index[g]))
            .collect();
        Ok(AutomorphismGroup {
            site,
            generators: gens,
            elements,
            labels,
            table,
            inverses,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element(&self, g: usize) -> &Functor {
        &self.elements[g]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn by_label(&self, label: &str) -> Result<usize, GeoError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GeoError::UnknownElement(label.to_string()))
    }

    pub fn index_of(&self, f: &Functor) -> Option<usize> {
        self.elements.iter().position(|e| e == f)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn as_finite_group(&self) -> FiniteGroup {
        FiniteGroup::from_table(self.labels.clone(), self.table.clone())
    }

    pub fn element_order(&self, a: usize) -> usize {
        self.as_finite_group().element_order(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpaReport {
    pub holds: bool,
    /// `(g, h, X)` with `g ≠ h` equal on the slice over `X`.
    pub witness: Option<(usize, usize, ObjId)>,
}

/// `g` and `h` agree as functors on the slice over `x`: on every object
/// admitting an arrow to `x` and on every arrow between such objects.
pub fn agree_over(cat: &FiniteCategory, g: &Functor, h: &Functor, x: ObjId) -> bool {
    let below = cat.objects_over(x);
    below.iter().all(|&w| {
        g.obj(w) == h.obj(w) && cat.arrows_into(w).iter().all(|&a| g.arr(a) == h.arr(a))
    })
}

/// Distinct elements never agree on a slice.
pub fn check_ppa(g: &AutomorphismGroup) -> PpaReport {
    let cat = &g.site.category;
    for a in 0..g.order() {
        for b in a + 1..g.order() {
            for x in cat.objects() {
                if agree_over(cat, g.element(a), g.element(b), x) {
                    return PpaReport {
                        holds: false,
                        witness: Some((a, b, x)),
                    };
                }
            }
        }
    }
    PpaReport {
        holds: true,
        witness: None,
    }
}

/// Local isomorphism from a slice of `domain` into `model`: a validated
/// injective functor whose image is downward closed (hence full) and which
/// matches covering sieves in both directions. Returns the image objects.
pub fn check_local_iso(domain: &Site, slice: &Slice, f: &Functor, model: &Site) -> Result<BTreeSet<ObjId>, String> {
    let d = &domain.category;
    let c = &model.category;
    validate_functor(f, &slice.category, c).map_err(|e| e.to_string())?;
    if !f.is_injective() {
        return Err("not injective".into());
    }
    let image: BTreeSet<ObjId> = f.objects.iter().copied().collect();
    let image_arrows: BTreeSet<_> = f.arrows.iter().copied().collect();
    for &y in &image {
        for &a in c.arrows_into(y) {
            if !image_arrows.contains(&a) {
                return Err(format!(
                    "image is not downward closed: {} into {}",
                    c.arrow_name(a),
                    c.object_name(y)
                ));
            }
        }
    }
    for o in slice.category.objects() {
        let u = slice.object_over(o);
        let w = d.src(u);
        let mapped: BTreeSet<BTreeSet<_>> = domain
            .topology
            .covers(w)
            .iter()
            .map(|r| {
                r.arrows
                    .iter()
                    .map(|&k| f.arr(slice.arrow_of(k, u).expect("slice arrow")))
                    .collect()
            })
            .collect();
        let target: BTreeSet<BTreeSet<_>> = model
            .topology
            .covers(f.obj(o))
            .iter()
            .map(|r| r.arrows.clone())
            .collect();
        if mapped != target {
            return Err(format!("covering sieves differ at {}", d.arrow_name(u)));
        }
    }
    Ok(image)
}

/// Label form of an atlas; `transitions` may be empty (derived) or partial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasData {
    pub site: Site,
    pub model: AutomorphismGroup,
    pub family: CoveringFamily,
    /// `charts[i]` maps the slice over `family.members[i]` into the model.
    pub charts: Vec<Functor>,
    /// `(i, j) ↦ g_ij` as group element indices.
    pub transitions: BTreeMap<(usize, usize), usize>,
}

/// A validated atlas with a complete transition table on every ordered pair
/// `(i, j)` with `i = j` or a nonempty overlap.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub site: Site,
    pub model: AutomorphismGroup,
    pub family: CoveringFamily,
    pub charts: Vec<Functor>,
    pub transitions: BTreeMap<(usize, usize), usize>,
    pub slices: Vec<Slice>,
    pub images: Vec<BTreeSet<ObjId>>,
    pub graph: NerveGraph,
}

impl Atlas {
    pub fn transition(&self, i: usize, j: usize) -> usize {
        self.transitions[&(i, j)]
    }

    pub fn member_name(&self, i: usize) -> &str {
        self.site.category.object_name(self.family.members[i])
    }

    pub fn to_data(&self) -> AtlasData {
        AtlasData {
            site: self.site.clone(),
            model: self.model.clone(),
            family: self.family.clone(),
            charts: self.charts.clone(),
            transitions: self.transitions.clone(),
        }
    }

    /// `left` and `right` (functors on the slices over `X_i` and `X_j`)
    /// agree on the overlap: every `(W, u, v)` with `u: W → X_i`,
    /// `v: W → X_j`, including arrows into `W`.
    pub fn agree_on_overlap(&self, i: usize, j: usize, left: &Functor, right: &Functor) -> bool {
        overlap_agrees(&self.site.category, &self.slices[i], &self.slices[j], left, right)
    }

    /// The objects below `X_i`, `X_j` and `X_k` simultaneously.
    pub fn triple_overlap_nonempty(&self, i: usize, j: usize, k: usize) -> bool {
        let d = &self.site.category;
        let m = &self.family.members;
        d.objects()
            .any(|w| [i, j, k].iter().all(|&t| !d.hom(w, m[t]).is_empty()))
    }

    /// Ordered index pairs with an entry in the transition table.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.transitions.keys().copied().collect()
    }
}

fn overlap_agrees(d: &FiniteCategory, si: &Slice, sj: &Slice, left: &Functor, right: &Functor) -> bool {
    let (xi, xj) = (si.base, sj.base);
    for w in d.objects() {
        for &u in &d.hom(w, xi) {
            for &v in &d.hom(w, xj) {
                let (oi, oj) = (si.object_of(u).unwrap(), sj.object_of(v).unwrap());
                if left.obj(oi) != right.obj(oj) {
                    return false;
                }
                for &k in d.arrows_into(w) {
                    let (ai, aj) = (si.arrow_of(k, u).unwrap(), sj.arrow_of(k, v).unwrap());
                    if left.arr(ai) != right.arr(aj) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Group elements `g` with `g ∘ φ_j = φ_i` on the overlap.
fn transition_candidates(atlas: &Atlas, i: usize, j: usize) -> Vec<usize> {
    (0..atlas.model.order())
        .filter(|&g| {
            let right = atlas.model.element(g).after(&atlas.charts[j]);
            atlas.agree_on_overlap(i, j, &atlas.charts[i], &right)
        })
        .collect()
}

/// Validates charts, derives (or checks) transitions and verifies the
/// cocycle `g_ij · g_jk = g_ik` on every triple with nonempty overlaps,
/// repeated indices included.
pub fn validate_atlas(data: &AtlasData) -> Result<Atlas, GeoError> {
    let site = &data.site;
    let d = &site.category;
    let family = CoveringFamily::new(site, data.family.members.clone())?;
    let n = family.len();
    if data.charts.len() != n {
        return Err(GeoError::ChartNotLocalIso(
            format!("{} charts", data.charts.len()),
            format!("family has {n} members"),
        ));
    }
    let mut slices = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n);
    for (i, &x) in family.members.iter().enumerate() {
        let slice = slice_category(d, x).expect("member of the site");
        let image = check_local_iso(site, &slice, &data.charts[i], &data.model.site)
            .map_err(|r| GeoError::ChartNotLocalIso(d.object_name(x).to_string(), r))?;
        slices.push(slice);
        images.push(image);
    }
    let graph = nerve_graph(site, &family)?;
    let mut atlas = Atlas {
        site: site.clone(),
        model: data.model.clone(),
        family,
        charts: data.charts.clone(),
        transitions: BTreeMap::new(),
        slices,
        images,
        graph,
    };
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for &(i, j) in &atlas.graph.edges {
        pairs.push((i, j));
        pairs.push((j, i));
    }
    pairs.sort();
    let name = |i: usize| d.object_name(atlas.family.members[i]).to_string();
    let mut derived = BTreeMap::new();
    for &(i, j) in &pairs {
        if data.transitions.contains_key(&(i, j)) {
            continue;
        }
        if i == j {
            derived.insert((i, i), atlas.model.identity());
            continue;
        }
        let c = transition_candidates(&atlas, i, j);
        match c.len() {
            0 => return Err(GeoError::NoTransitionExists(name(i), name(j))),
            1 => {
                derived.insert((i, j), c[0]);
            }
            k => return Err(GeoError::TransitionNotUnique(name(i), name(j), k)),
        }
    }
    let mut table = derived;
    for (&(i, j), &g) in &data.transitions {
        if i >= n || j >= n {
            return Err(GeoError::UnknownElement(format!("transition ({i}, {j})")));
        }
        if pairs.binary_search(&(i, j)).is_err() {
            return Err(GeoError::TransitionIncompatible(name(i), name(j)));
        }
        if g >= atlas.model.order() {
            return Err(GeoError::UnknownElement(g.to_string()));
        }
        table.insert((i, j), g);
    }
    atlas.transitions = table;
    check_cocycle(&atlas)?;
    for &(i, j) in data.transitions.keys() {
        let right = atlas.model.element(atlas.transition(i, j)).after(&atlas.charts[j]);
        if !atlas.agree_on_overlap(i, j, &atlas.charts[i], &right) {
            return Err(GeoError::TransitionIncompatible(name(i), name(j)));
        }
    }
    Ok(atlas)
}

/// First triple `(i, j, k)` in canonical order violating the cocycle.
pub fn check_cocycle(atlas: &Atlas) -> Result<(), GeoError> {
    let n = atlas.family.len();
    let t = &atlas.transitions;
    for i in 0..n {
        for j in 0..n {
            let Some(&gij) = t.get(&(i, j)) else { continue };
            for k in 0..n {
                let (Some(&gjk), Some(&gik)) = (t.get(&(j, k)), t.get(&(i, k))) else {
                    continue;
                };
                if !atlas.triple_overlap_nonempty(i, j, k) {
                    continue;
                }
                if atlas.model.mul(gij, gjk) != gik {
                    return Err(GeoError::CocycleViolation(
                        atlas.member_name(i).to_string(),
                        atlas.member_name(j).to_string(),
                        atlas.member_name(k).to_string(),
                    ));
                }
            }
        }
    }
    Ok(())
}
