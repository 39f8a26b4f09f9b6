//! Sieves, Grothendieck topologies and covering families.
//!
//! A sieve on `S` is stored as a set of arrows into `S` closed under
//! precomposition rather than as a down-set of the slice over `S`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::fincat::{ArrowId, FiniteCategory, ObjId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sieve {
    pub target: ObjId,
    pub arrows: BTreeSet<ArrowId>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SiteError {
    #[error("generator `{arrow}` does not have codomain `{target}`")]
    WrongCodomain { arrow: String, target: String },
    #[error("cannot pull back a sieve on `{target}` along `{arrow}`")]
    TypeMismatch { arrow: String, target: String },
    #[error("J({0}) is empty")]
    EmptyJ(String),
    #[error("not stable: pullback of {sieve} along `{arrow}` is not in J({source_object})")]
    NotStable {
        sieve: String,
        arrow: String,
        source_object: String,
    },
    #[error("not local on `{object}`: {candidate} is locally covering for {cover} but not in J")]
    NotLocal {
        object: String,
        cover: String,
        candidate: String,
    },
    #[error("listed arrow set {0} is not a sieve")]
    NotASieve(String),
    #[error("object `{0}` has {1} incoming arrows, too many to enumerate its sieves")]
    TooManySieves(String, usize),
    #[error("covering family is empty or mentions an unknown object")]
    BadFamily,
    #[error("family does not cover `{0}`")]
    NotCovering(String),
    #[error("family member `{0}` is not connected")]
    MemberNotConnected(String),
}

impl SiteError {
    pub fn code(&self) -> &'static str {
        match self {
            SiteError::WrongCodomain { .. } => "WRONG_CODOMAIN",
            SiteError::TypeMismatch { .. } => "TYPE_MISMATCH",
            SiteError::EmptyJ(_) => "EMPTY_J",
            SiteError::NotStable { .. } => "NOT_STABLE",
            SiteError::NotLocal { .. } => "NOT_LOCAL",
            SiteError::NotASieve(_) => "NOT_A_SIEVE",
            SiteError::TooManySieves(..) => "TOO_MANY_SIEVES",
            SiteError::BadFamily => "BAD_FAMILY",
            SiteError::NotCovering(_) => "NOT_COVERING",
            SiteError::MemberNotConnected(_) => "NOT_CONNECTED",
        }
    }
}

/// Incoming-arrow bound for exhaustive sieve enumeration.
pub const MAX_SIEVE_ARROWS: usize = 20;

impl Sieve {
    pub fn empty(target: ObjId) -> Self {
        Sieve {
            target,
            arrows: BTreeSet::new(),
        }
    }

    pub fn maximal(cat: &FiniteCategory, target: ObjId) -> Self {
        Sieve {
            target,
            arrows: cat.arrows_into(target).iter().copied().collect(),
        }
    }

    pub fn is_maximal(&self, cat: &FiniteCategory) -> bool {
        self.arrows.len() == cat.arrows_into(self.target).len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn contains(&self, a: ArrowId) -> bool {
        self.arrows.contains(&a)
    }

    pub fn is_closed(&self, cat: &FiniteCategory) -> bool {
        self.arrows.iter().all(|&f| {
            cat.dst(f) == self.target
                && cat
                    .arrows_into(cat.src(f))
                    .iter()
                    .all(|&g| self.arrows.contains(&cat.compose(f, g).unwrap()))
        })
    }

    pub fn display(&self, cat: &FiniteCategory) -> String {
        let names: Vec<_> = self.arrows.iter().map(|&a| cat.arrow_name(a)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Smallest sieve on `target` containing `generators`.
pub fn generate_sieve(cat: &FiniteCategory, target: ObjId, generators: &[ArrowId]) -> Result<Sieve, SiteError> {
    let mut arrows = BTreeSet::new();
    for &f in generators {
        if cat.dst(f) != target {
            return Err(SiteError::WrongCodomain {
                arrow: cat.arrow_name(f).to_string(),
                target: cat.object_name(target).to_string(),
            });
        }
        for &g in cat.arrows_into(cat.src(f)) {
            arrows.insert(cat.compose(f, g).unwrap());
        }
    }
    Ok(Sieve { target, arrows })
}

/// `{g: W → T | f∘g ∈ R}` for `f: T → S`.
pub fn pullback_sieve(cat: &FiniteCategory, sieve: &Sieve, f: ArrowId) -> Result<Sieve, SiteError> {
    if cat.dst(f) != sieve.target {
        return Err(SiteError::TypeMismatch {
            arrow: cat.arrow_name(f).to_string(),
            target: cat.object_name(sieve.target).to_string(),
        });
    }
    let t = cat.src(f);
    let arrows = cat
        .arrows_into(t)
        .iter()
        .copied()
        .filter(|&g| sieve.contains(cat.compose(f, g).unwrap()))
        .collect();
    Ok(Sieve { target: t, arrows })
}

/// Every sieve on `target`, in canonical order.
pub fn all_sieves(cat: &FiniteCategory, target: ObjId) -> Result<Vec<Sieve>, SiteError> {
    let into = cat.arrows_into(target);
    if into.len() > MAX_SIEVE_ARROWS {
        return Err(SiteError::TooManySieves(
            cat.object_name(target).to_string(),
            into.len(),
        ));
    }
    let mut out = BTreeSet::new();
    for mask in 0u32..(1u32 << into.len()) {
        let arrows: BTreeSet<ArrowId> = into
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &a)| a)
            .collect();
        let s = Sieve { target, arrows };
        if s.is_closed(cat) {
            out.insert(s);
        }
    }
    Ok(out.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TopologyWarning {
    /// J(S) lacks the maximal sieve.
    MissingMaximal(ObjId),
    /// J(S) contains the empty sieve.
    Degenerate(ObjId),
}

/// A validated Grothendieck topology: `covers[S]` is J(S), sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrothendieckTopology {
    covers: Vec<Vec<Sieve>>,
    pub warnings: Vec<TopologyWarning>,
}

impl GrothendieckTopology {
    pub fn covers(&self, s: ObjId) -> &[Sieve] {
        &self.covers[s.0]
    }

    pub fn is_covering(&self, sieve: &Sieve) -> bool {
        self.covers[sieve.target.0].binary_search(sieve).is_ok()
    }

    pub fn is_degenerate(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, TopologyWarning::Degenerate(_)))
    }
}

/// Checks nonemptiness, stability and local character exhaustively.
///
/// `raw[S]` lists the sieves of J(S). Violations are reported in canonical
/// order (object, sieve, arrow).
pub fn validate_topology(cat: &FiniteCategory, raw: &[Vec<Sieve>]) -> Result<GrothendieckTopology, SiteError> {
    let mut covers: Vec<Vec<Sieve>> = Vec::with_capacity(cat.num_objects());
    for s in cat.objects() {
        let mut js: Vec<Sieve> = raw.get(s.0).cloned().unwrap_or_default();
        for r in &js {
            if r.target != s || !r.is_closed(cat) {
                return Err(SiteError::NotASieve(r.display(cat)));
            }
        }
        js.sort();
        js.dedup();
        if js.is_empty() {
            return Err(SiteError::EmptyJ(cat.object_name(s).to_string()));
        }
        covers.push(js);
    }
    let topo = GrothendieckTopology {
        covers,
        warnings: Vec::new(),
    };

    for s in cat.objects() {
        for r in topo.covers(s) {
            for &f in cat.arrows_into(s) {
                let pb = pullback_sieve(cat, r, f)?;
                if !topo.is_covering(&pb) {
                    return Err(SiteError::NotStable {
                        sieve: r.display(cat),
                        arrow: cat.arrow_name(f).to_string(),
                        source_object: cat.object_name(cat.src(f)).to_string(),
                    });
                }
            }
        }
    }

    for s in cat.objects() {
        let candidates = all_sieves(cat, s)?;
        for r in topo.covers(s) {
            for cand in &candidates {
                if topo.is_covering(cand) {
                    continue;
                }
                let local = r.arrows.iter().all(|&f| {
                    let pb = pullback_sieve(cat, cand, f).unwrap();
                    topo.is_covering(&pb)
                });
                if local {
                    return Err(SiteError::NotLocal {
                        object: cat.object_name(s).to_string(),
                        cover: r.display(cat),
                        candidate: cand.display(cat),
                    });
                }
            }
        }
    }

    let mut warnings = Vec::new();
    for s in cat.objects() {
        if !topo.covers(s).iter().any(|r| r.is_maximal(cat)) {
            warnings.push(TopologyWarning::MissingMaximal(s));
        }
        if topo.covers(s).iter().any(|r| r.is_empty()) {
            warnings.push(TopologyWarning::Degenerate(s));
        }
    }
    Ok(GrothendieckTopology { warnings, ..topo })
}

/// A category with a validated topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub category: FiniteCategory,
    pub topology: GrothendieckTopology,
}

impl Site {
    pub fn new(category: FiniteCategory, raw: &[Vec<Sieve>]) -> Result<Self, SiteError> {
        let topology = validate_topology(&category, raw)?;
        Ok(Site { category, topology })
    }

    /// The topology whose only covering sieves are the maximal ones.
    pub fn minimal(category: FiniteCategory) -> Self {
        let raw: Vec<Vec<Sieve>> = category
            .objects()
            .map(|s| vec![Sieve::maximal(&category, s)])
            .collect();
        Site::new(category, &raw).expect("the minimal topology is always valid")
    }

    /// Sieves of covering objects, one `Vec` per object, for re-validation.
    pub fn raw_covers(&self) -> Vec<Vec<Sieve>> {
        self.category
            .objects()
            .map(|s| self.topology.covers(s).to_vec())
            .collect()
    }
}

/// Covering verdict with every object whose induced sieve fails to cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub covering: bool,
    pub uncovered: Vec<ObjId>,
}

/// The sieve on `w` of arrows whose domain maps into some member.
pub fn family_sieve(cat: &FiniteCategory, members: &[ObjId], w: ObjId) -> Sieve {
    let small: BTreeSet<ObjId> = members.iter().flat_map(|&x| cat.objects_over(x)).collect();
    Sieve {
        target: w,
        arrows: cat
            .arrows_into(w)
            .iter()
            .copied()
            .filter(|&f| small.contains(&cat.src(f)))
            .collect(),
    }
}

pub fn is_covering_family(site: &Site, members: &[ObjId]) -> Coverage {
    let uncovered: Vec<ObjId> = site
        .category
        .objects()
        .filter(|&w| !site.topology.is_covering(&family_sieve(&site.category, members, w)))
        .collect();
    Coverage {
        covering: uncovered.is_empty(),
        uncovered,
    }
}

/// An object is connected when every covering sieve on it is nonempty and
/// connected as a full subcategory of the slice.
pub fn is_connected_object(site: &Site, x: ObjId) -> bool {
    let cat = &site.category;
    site.topology.covers(x).iter().all(|r| {
        let arrows: Vec<ArrowId> = r.arrows.iter().copied().collect();
        if arrows.is_empty() {
            return false;
        }
        let mut parent: Vec<usize> = (0..arrows.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            if p[i] != i {
                let root = find(p, p[i]);
                p[i] = root;
            }
            p[i]
        }
        for (i, &u) in arrows.iter().enumerate() {
            for &k in cat.arrows_into(cat.src(u)) {
                let v = cat.compose(u, k).unwrap();
                let j = arrows.iter().position(|&a| a == v).unwrap();
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (0..arrows.len()).all(|i| find(&mut parent, i) == root)
    })
}

/// A covering family `(X_i)_{i∈I}`; index `i` is the position in `members`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringFamily {
    pub members: Vec<ObjId>,
}

impl CoveringFamily {
    /// Validates coverage and connectedness of every member.
    pub fn new(site: &Site, members: Vec<ObjId>) -> Result<Self, SiteError> {
        if members.is_empty() || members.iter().any(|m| m.0 >= site.category.num_objects()) {
            return Err(SiteError::BadFamily);
        }
        let cov = is_covering_family(site, &members);
        if let Some(&w) = cov.uncovered.first() {
            return Err(SiteError::NotCovering(site.category.object_name(w).to_string()));
        }
        for &m in &members {
            if !is_connected_object(site, m) {
                return Err(SiteError::MemberNotConnected(
                    site.category.object_name(m).to_string(),
                ));
            }
        }
        Ok(CoveringFamily { members })
    }

    pub fn from_names(site: &Site, names: &[&str]) -> Result<Self, SiteError> {
        let members = names
            .iter()
            .map(|n| site.category.object(n).ok_or(SiteError::BadFamily))
            .collect::<Result<Vec<_>, _>>()?;
        CoveringFamily::new(site, members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, o: ObjId) -> Option<usize> {
        self.members.iter().position(|&m| m == o)
    }

    /// All objects of the site, in canonical order.
    pub fn all_objects(site: &Site) -> Result<Self, SiteError> {
        CoveringFamily::new(site, site.category.objects().collect())
    }
}
