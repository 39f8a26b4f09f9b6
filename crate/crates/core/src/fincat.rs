//! Finite categories, slice categories and functors between them.
//!
//! Objects and arrows are addressed by dense indices ([`ObjId`], [`ArrowId`]).
//! Both are sorted by label when a category is validated, so index order is the
//! lexicographic order of labels and every enumeration in the crate is
//! deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub usize);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Prefix of auto-generated identity arrow names.
pub const IDENTITY_PREFIX: &str = "id:";

pub fn identity_name(object: &str) -> String {
    format!("{IDENTITY_PREFIX}{object}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: ObjId,
    pub dst: ObjId,
}

/// Unvalidated category data, addressed by label.
///
/// Identities are generated (`id:<object>`) and need not be listed, nor do
/// composites involving an identity. `compose` lists `(g, f, g∘f)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCategory {
    pub objects: Vec<String>,
    pub arrows: Vec<(String, String, String)>,
    pub compose: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CategoryError {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label `{0}` contains a reserved character")]
    ReservedLabel(String),
    #[error("{context} refers to unknown `{name}`")]
    DanglingReference { context: String, name: String },
    #[error("composite {g}∘{f} is listed but the arrows are not composable")]
    NotComposable { g: String, f: String },
    #[error("composite {g}∘{f} is missing from the table")]
    MissingComposite { g: String, f: String },
    #[error("composite {g}∘{f} = {h} has the wrong endpoints")]
    CompositeEndpoints { g: String, f: String, h: String },
    #[error("identity law fails: {identity} composed with {arrow} gives {got}")]
    IdentityLaw {
        identity: String,
        arrow: String,
        got: String,
    },
    #[error("associativity fails on ({h}, {g}, {f}): {left} ≠ {right}")]
    Associativity {
        h: String,
        g: String,
        f: String,
        left: String,
        right: String,
    },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
}

impl CategoryError {
    pub fn code(&self) -> &'static str {
        match self {
            CategoryError::Associativity { .. } => "ASSOCIATIVITY",
            CategoryError::IdentityLaw { .. } => "IDENTITY_LAW",
            CategoryError::DanglingReference { .. } => "DANGLING_REFERENCE",
            CategoryError::UnknownObject(_) => "UNKNOWN_OBJECT",
            CategoryError::DuplicateLabel(_) | CategoryError::ReservedLabel(_) => "DUPLICATE_LABEL",
            CategoryError::NotComposable { .. }
            | CategoryError::MissingComposite { .. }
            | CategoryError::CompositeEndpoints { .. } => "COMPOSITION_TABLE",
        }
    }
}

/// A validated finite category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identities: Vec<ArrowId>,
    compose: HashMap<(ArrowId, ArrowId), ArrowId>,
    into: Vec<Vec<ArrowId>>,
    out_of: Vec<Vec<ArrowId>>,
    object_index: HashMap<String, ObjId>,
    arrow_index: HashMap<String, ArrowId>,
}

fn check_label(label: &str) -> Result<(), CategoryError> {
    if label.is_empty() || label.contains(',') {
        return Err(CategoryError::ReservedLabel(label.to_string()));
    }
    Ok(())
}

/// Validates raw category data, reporting the first violated law.
pub fn validate_category(raw: &RawCategory) -> Result<FiniteCategory, CategoryError> {
    let mut objects: Vec<String> = raw.objects.clone();
    objects.sort();
    for w in objects.windows(2) {
        if w[0] == w[1] {
            return Err(CategoryError::DuplicateLabel(w[0].clone()));
        }
    }
    for o in &objects {
        check_label(o)?;
    }
    let object_index: HashMap<String, ObjId> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.clone(), ObjId(i)))
        .collect();

    let mut named: Vec<(String, ObjId, ObjId, bool)> = Vec::new();
    for o in &objects {
        let id = object_index[o];
        named.push((identity_name(o), id, id, true));
    }
    for (name, src, dst) in &raw.arrows {
        check_label(name)?;
        let resolve = |x: &String| {
            object_index
                .get(x)
                .copied()
                .ok_or_else(|| CategoryError::DanglingReference {
                    context: format!("arrow `{name}`"),
                    name: x.clone(),
                })
        };
        named.push((name.clone(), resolve(src)?, resolve(dst)?, false));
    }
    named.sort_by(|a, b| a.0.cmp(&b.0));
    for w in named.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(CategoryError::DuplicateLabel(w[0].0.clone()));
        }
    }

    let arrows: Vec<Arrow> = named
        .iter()
        .map(|(n, s, d, _)| Arrow {
            name: n.clone(),
            src: *s,
            dst: *d,
        })
        .collect();
    let arrow_index: HashMap<String, ArrowId> = arrows
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name.clone(), ArrowId(i)))
        .collect();
    let mut identities = vec![ArrowId(0); objects.len()];
    for (i, entry) in named.iter().enumerate() {
        if entry.3 {
            identities[entry.1 .0] = ArrowId(i);
        }
    }
    let is_identity = |a: ArrowId| identities[arrows[a.0].src.0] == a && arrows[a.0].src == arrows[a.0].dst;

    let lookup = |name: &String, context: &str| {
        arrow_index
            .get(name)
            .copied()
            .ok_or_else(|| CategoryError::DanglingReference {
                context: context.to_string(),
                name: name.clone(),
            })
    };

    let mut table: HashMap<(ArrowId, ArrowId), ArrowId> = HashMap::new();
    for (g, f, h) in &raw.compose {
        let ctx = format!("composite {g}∘{f}");
        let (gi, fi, hi) = (lookup(g, &ctx)?, lookup(f, &ctx)?, lookup(h, &ctx)?);
        if arrows[fi.0].dst != arrows[gi.0].src {
            return Err(CategoryError::NotComposable {
                g: g.clone(),
                f: f.clone(),
            });
        }
        if arrows[hi.0].src != arrows[fi.0].src || arrows[hi.0].dst != arrows[gi.0].dst {
            return Err(CategoryError::CompositeEndpoints {
                g: g.clone(),
                f: f.clone(),
                h: h.clone(),
            });
        }
        if is_identity(gi) && hi != fi {
            return Err(CategoryError::IdentityLaw {
                identity: g.clone(),
                arrow: f.clone(),
                got: h.clone(),
            });
        }
        if is_identity(fi) && hi != gi {
            return Err(CategoryError::IdentityLaw {
                identity: f.clone(),
                arrow: g.clone(),
                got: h.clone(),
            });
        }
        if let Some(prev) = table.insert((gi, fi), hi) {
            if prev != hi {
                return Err(CategoryError::DuplicateLabel(ctx));
            }
        }
    }

    let mut into = vec![Vec::new(); objects.len()];
    let mut out_of = vec![Vec::new(); objects.len()];
    for (i, a) in arrows.iter().enumerate() {
        into[a.dst.0].push(ArrowId(i));
        out_of[a.src.0].push(ArrowId(i));
    }

    // Fill identity composites and require the rest of the composable pairs.
    let mut compose = HashMap::new();
    for (fi, f) in arrows.iter().enumerate() {
        for &gi in &out_of[f.dst.0] {
            let fi = ArrowId(fi);
            let h = if is_identity(gi) {
                fi
            } else if is_identity(fi) {
                gi
            } else {
                match table.get(&(gi, fi)) {
                    Some(&h) => h,
                    None => {
                        return Err(CategoryError::MissingComposite {
                            g: arrows[gi.0].name.clone(),
                            f: f.name.clone(),
                        })
                    }
                }
            };
            compose.insert((gi, fi), h);
        }
    }

    for fi in 0..arrows.len() {
        let f = ArrowId(fi);
        for &g in &out_of[arrows[fi].dst.0] {
            for &h in &out_of[arrows[g.0].dst.0] {
                let left = compose[&(h, compose[&(g, f)])];
                let right = compose[&(compose[&(h, g)], f)];
                if left != right {
                    return Err(CategoryError::Associativity {
                        h: arrows[h.0].name.clone(),
                        g: arrows[g.0].name.clone(),
                        f: arrows[fi].name.clone(),
                        left: arrows[left.0].name.clone(),
                        right: arrows[right.0].name.clone(),
                    });
                }
            }
        }
    }

    Ok(FiniteCategory {
        objects,
        arrows,
        identities,
        compose,
        into,
        out_of,
        object_index,
        arrow_index,
    })
}

impl FiniteCategory {
    /// Builds the poset category generated by `relations` (pairs `a ≤ b`).
    ///
    /// Arrows are named `a>b`; the reflexive-transitive closure is taken.
    pub fn poset(objects: &[&str], relations: &[(&str, &str)]) -> Result<Self, CategoryError> {
        let n = objects.len();
        let pos: HashMap<&str, usize> = objects.iter().enumerate().map(|(i, o)| (*o, i)).collect();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in relations {
            let (Some(&i), Some(&j)) = (pos.get(a), pos.get(b)) else {
                return Err(CategoryError::DanglingReference {
                    context: "poset relation".into(),
                    name: format!("{a}>{b}"),
                });
            };
            le[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        let name = |i: usize, j: usize| {
            if i == j {
                identity_name(objects[i])
            } else {
                format!("{}>{}", objects[i], objects[j])
            }
        };
        let mut raw = RawCategory {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        for i in 0..n {
            for j in 0..n {
                if i != j && le[i][j] {
                    raw.arrows.push((name(i, j), objects[i].into(), objects[j].into()));
                }
            }
        }
        for (i, row) in le.iter().enumerate() {
            for (j, &ij) in row.iter().enumerate() {
                for (k, &jk) in le[j].iter().enumerate() {
                    if i != j && j != k && ij && jk {
                        raw.compose.push((name(j, k), name(i, j), name(i, k)));
                    }
                }
            }
        }
        validate_category(&raw)
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = ObjId> {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn arrow_ids(&self) -> impl ExactSizeIterator<Item = ArrowId> {
        (0..self.arrows.len()).map(ArrowId)
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o.0]
    }

    pub fn arrow_name(&self, a: ArrowId) -> &str {
        &self.arrows[a.0].name
    }

    pub fn object(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    pub fn arrow(&self, name: &str) -> Option<ArrowId> {
        self.arrow_index.get(name).copied()
    }

    pub fn src(&self, a: ArrowId) -> ObjId {
        self.arrows[a.0].src
    }

    pub fn dst(&self, a: ArrowId) -> ObjId {
        self.arrows[a.0].dst
    }

    pub fn id(&self, o: ObjId) -> ArrowId {
        self.identities[o.0]
    }

    pub fn is_identity(&self, a: ArrowId) -> bool {
        self.identities[self.src(a).0] == a
    }

    /// `g∘f`, defined iff `dst(f) == src(g)`.
    pub fn compose(&self, g: ArrowId, f: ArrowId) -> Option<ArrowId> {
        self.compose.get(&(g, f)).copied()
    }

    /// Arrows with codomain `o`, in index order.
    pub fn arrows_into(&self, o: ObjId) -> &[ArrowId] {
        &self.into[o.0]
    }

    pub fn arrows_from(&self, o: ObjId) -> &[ArrowId] {
        &self.out_of[o.0]
    }

    pub fn hom(&self, a: ObjId, b: ObjId) -> Vec<ArrowId> {
        self.out_of[a.0]
            .iter()
            .copied()
            .filter(|&f| self.dst(f) == b)
            .collect()
    }

    /// Objects admitting at least one arrow into `o` (including `o`).
    pub fn objects_over(&self, o: ObjId) -> BTreeSet<ObjId> {
        self.into[o.0].iter().map(|&f| self.src(f)).collect()
    }

    /// Raw form with identities and identity composites omitted.
    pub fn to_raw(&self) -> RawCategory {
        let mut raw = RawCategory {
            objects: self.objects.clone(),
            ..Default::default()
        };
        for a in self.arrow_ids() {
            if !self.is_identity(a) {
                raw.arrows.push((
                    self.arrow_name(a).to_string(),
                    self.object_name(self.src(a)).to_string(),
                    self.object_name(self.dst(a)).to_string(),
                ));
            }
        }
        let mut entries: Vec<_> = self
            .compose
            .iter()
            .filter(|((g, f), _)| !self.is_identity(*g) && !self.is_identity(*f))
            .map(|((g, f), h)| {
                (
                    self.arrow_name(*g).to_string(),
                    self.arrow_name(*f).to_string(),
                    self.arrow_name(*h).to_string(),
                )
            })
            .collect();
        entries.sort();
        raw.compose = entries;
        raw
    }
}

/// The slice category over an object, with back-references into the base.
#[derive(Clone, Debug)]
pub struct Slice {
    pub base: ObjId,
    pub category: FiniteCategory,
    object_over: Vec<ArrowId>,
    arrow_over: Vec<ArrowId>,
    object_of: HashMap<ArrowId, ObjId>,
    arrow_of: HashMap<(ArrowId, ArrowId), ArrowId>,
}

impl Slice {
    /// Base arrow `u: A → X` underlying a slice object.
    pub fn object_over(&self, o: ObjId) -> ArrowId {
        self.object_over[o.0]
    }

    /// Base arrow underlying a slice arrow.
    pub fn arrow_over(&self, a: ArrowId) -> ArrowId {
        self.arrow_over[a.0]
    }

    pub fn object_of(&self, u: ArrowId) -> Option<ObjId> {
        self.object_of.get(&u).copied()
    }

    /// The slice arrow `(u∘k) → u` for base arrows `k` and `u`.
    pub fn arrow_of(&self, k: ArrowId, u: ArrowId) -> Option<ArrowId> {
        self.arrow_of.get(&(k, u)).copied()
    }
}

/// The category of objects over `x`: objects are arrows into `x`, arrows are
/// commuting triangles. Slice arrows over a non-identity `k` with target `u`
/// are named `k@u`.
pub fn slice_category(cat: &FiniteCategory, x: ObjId) -> Result<Slice, CategoryError> {
    if x.0 >= cat.num_objects() {
        return Err(CategoryError::UnknownObject(x.to_string()));
    }
    let over: Vec<ArrowId> = cat.arrows_into(x).to_vec();
    let mut raw = RawCategory {
        objects: over.iter().map(|&u| cat.arrow_name(u).to_string()).collect(),
        ..Default::default()
    };
    let label = |k: ArrowId, u: ArrowId| format!("{}@{}", cat.arrow_name(k), cat.arrow_name(u));
    // (k, u) pairs: k: A → B, u: B → x.
    let mut pairs = Vec::new();
    for &u in &over {
        for &k in cat.arrows_into(cat.src(u)) {
            pairs.push((k, u));
            if !cat.is_identity(k) {
                let src = cat.compose(u, k).expect("composable");
                raw.arrows.push((
                    label(k, u),
                    cat.arrow_name(src).to_string(),
                    cat.arrow_name(u).to_string(),
                ));
            }
        }
    }
    for &(k2, w) in &pairs {
        if cat.is_identity(k2) {
            continue;
        }
        let v = cat.compose(w, k2).unwrap();
        for &k1 in cat.arrows_into(cat.src(v)) {
            if cat.is_identity(k1) {
                continue;
            }
            let k = cat.compose(k2, k1).unwrap();
            let h = if cat.is_identity(k) {
                identity_name(cat.arrow_name(w))
            } else {
                label(k, w)
            };
            raw.compose.push((label(k2, w), label(k1, v), h));
        }
    }
    let category = validate_category(&raw)?;
    let mut object_over = vec![ArrowId(0); category.num_objects()];
    let mut object_of = HashMap::new();
    for &u in &over {
        let o = category.object(cat.arrow_name(u)).unwrap();
        object_over[o.0] = u;
        object_of.insert(u, o);
    }
    let mut arrow_over = vec![ArrowId(0); category.num_arrows()];
    let mut arrow_of = HashMap::new();
    for &(k, u) in &pairs {
        let name = if cat.is_identity(k) {
            identity_name(cat.arrow_name(u))
        } else {
            label(k, u)
        };
        let a = category.arrow(&name).unwrap();
        arrow_over[a.0] = k;
        arrow_of.insert((k, u), a);
    }
    Ok(Slice {
        base: x,
        category,
        object_over,
        arrow_over,
        object_of,
        arrow_of,
    })
}

/// Functor data addressed by label. Missing arrow images are inferred when
/// the target hom-set between the image objects has exactly one arrow.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctorData {
    pub objects: BTreeMap<String, String>,
    pub arrows: BTreeMap<String, String>,
}

/// A functor between finite categories as index maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Functor {
    pub objects: Vec<ObjId>,
    pub arrows: Vec<ArrowId>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FunctorError {
    #[error("functor mapping refers to unknown `{0}`")]
    UnresolvedReference(String),
    #[error("no image given for object `{0}`")]
    MissingObjectImage(String),
    #[error("no image given for arrow `{0}` and none can be inferred")]
    MissingArrowImage(String),
    #[error("not functorial at {witness}: {reason}")]
    NotFunctorial { witness: String, reason: String },
}

impl FunctorError {
    pub fn code(&self) -> &'static str {
        match self {
            FunctorError::UnresolvedReference(_) => "UNRESOLVED_REFERENCE",
            FunctorError::MissingObjectImage(_) | FunctorError::MissingArrowImage(_) => "BAD_FUNCTION_SHAPE",
            FunctorError::NotFunctorial { .. } => "NOT_FUNCTORIAL",
        }
    }
}

impl Functor {
    pub fn identity(cat: &FiniteCategory) -> Self {
        Functor {
            objects: cat.objects().collect(),
            arrows: cat.arrow_ids().collect(),
        }
    }

    /// Resolves label data against `src` and `dst` (no law checking).
    pub fn from_data(data: &FunctorData, src: &FiniteCategory, dst: &FiniteCategory) -> Result<Self, FunctorError> {
        for k in data.objects.keys() {
            if src.object(k).is_none() {
                return Err(FunctorError::UnresolvedReference(k.clone()));
            }
        }
        for k in data.arrows.keys() {
            if src.arrow(k).is_none() {
                return Err(FunctorError::UnresolvedReference(k.clone()));
            }
        }
        let mut objects = Vec::with_capacity(src.num_objects());
        for o in src.objects() {
            let name = src.object_name(o);
            let img = data
                .objects
                .get(name)
                .ok_or_else(|| FunctorError::MissingObjectImage(name.to_string()))?;
            objects.push(dst.object(img).ok_or_else(|| FunctorError::UnresolvedReference(img.clone()))?);
        }
        let mut arrows = Vec::with_capacity(src.num_arrows());
        for a in src.arrow_ids() {
            let name = src.arrow_name(a);
            let img = match data.arrows.get(name) {
                Some(img) => dst.arrow(img).ok_or_else(|| FunctorError::UnresolvedReference(img.clone()))?,
                None if src.is_identity(a) => dst.id(objects[src.src(a).0]),
                None => {
                    let hom = dst.hom(objects[src.src(a).0], objects[src.dst(a).0]);
                    if hom.len() != 1 {
                        return Err(FunctorError::MissingArrowImage(name.to_string()));
                    }
                    hom[0]
                }
            };
            arrows.push(img);
        }
        Ok(Functor { objects, arrows })
    }

    /// Label form, omitting arrow images that [`Functor::from_data`] would infer.
    pub fn to_data(&self, src: &FiniteCategory, dst: &FiniteCategory) -> FunctorData {
        let mut data = FunctorData::default();
        for o in src.objects() {
            data.objects.insert(
                src.object_name(o).to_string(),
                dst.object_name(self.objects[o.0]).to_string(),
            );
        }
        for a in src.arrow_ids() {
            let img = self.arrows[a.0];
            let inferred = if src.is_identity(a) {
                Some(dst.id(self.objects[src.src(a).0]))
            } else {
                let hom = dst.hom(self.objects[src.src(a).0], self.objects[src.dst(a).0]);
                (hom.len() == 1).then(|| hom[0])
            };
            if inferred != Some(img) {
                data.arrows
                    .insert(src.arrow_name(a).to_string(), dst.arrow_name(img).to_string());
            }
        }
        data
    }

    pub fn obj(&self, o: ObjId) -> ObjId {
        self.objects[o.0]
    }

    pub fn arr(&self, a: ArrowId) -> ArrowId {
        self.arrows[a.0]
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Functor) -> Functor {
        Functor {
            objects: first.objects.iter().map(|o| self.objects[o.0]).collect(),
            arrows: first.arrows.iter().map(|a| self.arrows[a.0]).collect(),
        }
    }

    /// Inverse of a bijective endofunctor.
    pub fn inverse(&self) -> Option<Functor> {
        let mut objects = vec![None; self.objects.len()];
        for (i, o) in self.objects.iter().enumerate() {
            if objects.get(o.0).copied().flatten().is_some() || o.0 >= objects.len() {
                return None;
            }
            objects[o.0] = Some(ObjId(i));
        }
        let mut arrows = vec![None; self.arrows.len()];
        for (i, a) in self.arrows.iter().enumerate() {
            if a.0 >= arrows.len() || arrows[a.0].is_some() {
                return None;
            }
            arrows[a.0] = Some(ArrowId(i));
        }
        Some(Functor {
            objects: objects.into_iter().collect::<Option<_>>()?,
            arrows: arrows.into_iter().collect::<Option<_>>()?,
        })
    }

    pub fn is_injective(&self) -> bool {
        let objs: BTreeSet<_> = self.objects.iter().collect();
        let arrs: BTreeSet<_> = self.arrows.iter().collect();
        objs.len() == self.objects.len() && arrs.len() == self.arrows.len()
    }
}

/// Checks that `f` preserves sources, targets, identities and composition.
pub fn validate_functor(f: &Functor, src: &FiniteCategory, dst: &FiniteCategory) -> Result<(), FunctorError> {
    if f.objects.len() != src.num_objects() || f.arrows.len() != src.num_arrows() {
        return Err(FunctorError::NotFunctorial {
            witness: "mapping".into(),
            reason: "mapping is not total on the source".into(),
        });
    }
    if f.objects.iter().any(|o| o.0 >= dst.num_objects()) || f.arrows.iter().any(|a| a.0 >= dst.num_arrows()) {
        return Err(FunctorError::NotFunctorial {
            witness: "mapping".into(),
            reason: "image outside the target".into(),
        });
    }
    for a in src.arrow_ids() {
        let img = f.arr(a);
        if dst.src(img) != f.obj(src.src(a)) || dst.dst(img) != f.obj(src.dst(a)) {
            return Err(FunctorError::NotFunctorial {
                witness: src.arrow_name(a).to_string(),
                reason: format!("image {} has the wrong endpoints", dst.arrow_name(img)),
            });
        }
    }
    for o in src.objects() {
        if f.arr(src.id(o)) != dst.id(f.obj(o)) {
            return Err(FunctorError::NotFunctorial {
                witness: src.arrow_name(src.id(o)).to_string(),
                reason: "identity not preserved".into(),
            });
        }
    }
    for fa in src.arrow_ids() {
        for &g in src.arrows_from(src.dst(fa)) {
            let gf = src.compose(g, fa).unwrap();
            if dst.compose(f.arr(g), f.arr(fa)) != Some(f.arr(gf)) {
                return Err(FunctorError::NotFunctorial {
                    witness: format!("({}, {})", src.arrow_name(g), src.arrow_name(fa)),
                    reason: "composition not preserved".into(),
                });
            }
        }
    }
    Ok(())
}
