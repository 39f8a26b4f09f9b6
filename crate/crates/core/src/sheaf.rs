//! Presheaves of finite sets, the sheaf condition, pointwise products and
//! natural-transformation enumeration.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use thiserror::Error;

use crate::fincat::{ArrowId, FiniteCategory, ObjId};
use crate::nerve;
use crate::site::{is_connected_object, CoveringFamily, Sieve, Site};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SheafError {
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(String),
    #[error("bad function shape: {0}")]
    BadFunctionShape(String),
    #[error("not functorial at {0}")]
    NotFunctorial(String),
    #[error("representable y({0}) is not a sheaf: topology is not subcanonical")]
    NotSubcanonical(String),
    #[error("site has an empty covering sieve")]
    DegenerateSite,
}

impl SheafError {
    pub fn code(&self) -> &'static str {
        match self {
            SheafError::UnresolvedReference(_) => "UNRESOLVED_REFERENCE",
            SheafError::BadFunctionShape(_) => "BAD_FUNCTION_SHAPE",
            SheafError::NotFunctorial(_) => "NOT_FUNCTORIAL",
            SheafError::NotSubcanonical(_) => "NOT_SUBCANONICAL",
            SheafError::DegenerateSite => "DEGENERATE_SITE",
        }
    }
}

/// A set-valued presheaf. `restrictions[f]` for `f: A → B` maps indices of
/// `F(B)` to indices of `F(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    values: Vec<Vec<String>>,
    restrictions: Vec<Vec<usize>>,
}

/// Label form of a presheaf. Omitted restrictions default to the identity on
/// labels when source and target value lists coincide.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawPresheaf {
    pub values: BTreeMap<String, Vec<String>>,
    pub restrictions: BTreeMap<String, BTreeMap<String, String>>,
}

impl Presheaf {
    pub fn constant(cat: &FiniteCategory, labels: &[String]) -> Self {
        Presheaf {
            values: vec![labels.to_vec(); cat.num_objects()],
            restrictions: vec![(0..labels.len()).collect(); cat.num_arrows()],
        }
    }

    pub fn terminal(cat: &FiniteCategory) -> Self {
        Presheaf::constant(cat, &["*".to_string()])
    }

    pub fn empty(cat: &FiniteCategory) -> Self {
        Presheaf::constant(cat, &[])
    }

    /// `y(x) = Hom(-, x)`, elements labelled by arrow names.
    pub fn representable(cat: &FiniteCategory, x: ObjId) -> Self {
        let mut values = Vec::with_capacity(cat.num_objects());
        let mut index: Vec<HashMap<ArrowId, usize>> = Vec::new();
        for w in cat.objects() {
            let hom = cat.hom(w, x);
            values.push(hom.iter().map(|&a| cat.arrow_name(a).to_string()).collect());
            index.push(hom.iter().enumerate().map(|(i, &a)| (a, i)).collect());
        }
        let restrictions = cat
            .arrow_ids()
            .map(|f| {
                let (a, b) = (cat.src(f), cat.dst(f));
                cat.hom(b, x)
                    .iter()
                    .map(|&u| index[a.0][&cat.compose(u, f).unwrap()])
                    .collect()
            })
            .collect();
        Presheaf { values, restrictions }
    }

    /// Replaces `F(o)` without checking restrictions; pair with
    /// [`Presheaf::set_restriction`] and re-validate.
    pub fn set_values(&mut self, o: ObjId, labels: Vec<String>) {
        self.values[o.0] = labels;
    }

    pub fn set_restriction(&mut self, f: ArrowId, map: Vec<usize>) {
        self.restrictions[f.0] = map;
    }

    pub fn values(&self, o: ObjId) -> &[String] {
        &self.values[o.0]
    }

    pub fn size(&self, o: ObjId) -> usize {
        self.values[o.0].len()
    }

    pub fn restriction(&self, f: ArrowId) -> &[usize] {
        &self.restrictions[f.0]
    }

    pub fn restrict(&self, f: ArrowId, x: usize) -> usize {
        self.restrictions[f.0][x]
    }

    /// Checks shapes and contravariant functoriality exhaustively.
    pub fn validate(&self, cat: &FiniteCategory) -> Result<(), SheafError> {
        if self.values.len() != cat.num_objects() || self.restrictions.len() != cat.num_arrows() {
            return Err(SheafError::BadFunctionShape("value or restriction table size".into()));
        }
        for f in cat.arrow_ids() {
            let (a, b) = (cat.src(f), cat.dst(f));
            let r = &self.restrictions[f.0];
            if r.len() != self.size(b) || r.iter().any(|&x| x >= self.size(a)) {
                return Err(SheafError::BadFunctionShape(format!(
                    "restriction along `{}`",
                    cat.arrow_name(f)
                )));
            }
        }
        for o in cat.objects() {
            let id = self.restriction(cat.id(o));
            if id.iter().enumerate().any(|(i, &x)| i != x) {
                return Err(SheafError::NotFunctorial(cat.arrow_name(cat.id(o)).to_string()));
            }
        }
        for f in cat.arrow_ids() {
            for &g in cat.arrows_from(cat.dst(f)) {
                let gf = cat.compose(g, f).unwrap();
                for x in 0..self.size(cat.dst(g)) {
                    if self.restrict(gf, x) != self.restrict(f, self.restrict(g, x)) {
                        return Err(SheafError::NotFunctorial(format!(
                            "({}, {})",
                            cat.arrow_name(g),
                            cat.arrow_name(f)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_raw(&self, cat: &FiniteCategory) -> RawPresheaf {
        let mut raw = RawPresheaf::default();
        for o in cat.objects() {
            raw.values
                .insert(cat.object_name(o).to_string(), self.values[o.0].clone());
        }
        for f in cat.arrow_ids() {
            if cat.is_identity(f) {
                continue;
            }
            let (a, b) = (cat.src(f), cat.dst(f));
            let map: BTreeMap<String, String> = self.restrictions[f.0]
                .iter()
                .enumerate()
                .map(|(x, &y)| (self.values[b.0][x].clone(), self.values[a.0][y].clone()))
                .collect();
            let default = self.values[a.0] == self.values[b.0] && map.iter().all(|(k, v)| k == v);
            if !default {
                raw.restrictions.insert(cat.arrow_name(f).to_string(), map);
            }
        }
        raw
    }
}

/// Builds and validates a presheaf from label data.
pub fn validate_presheaf(cat: &FiniteCategory, raw: &RawPresheaf) -> Result<Presheaf, SheafError> {
    for k in raw.values.keys() {
        if cat.object(k).is_none() {
            return Err(SheafError::UnresolvedReference(k.clone()));
        }
    }
    for k in raw.restrictions.keys() {
        if cat.arrow(k).is_none() {
            return Err(SheafError::UnresolvedReference(k.clone()));
        }
    }
    let mut values = Vec::new();
    for o in cat.objects() {
        let mut labels = raw
            .values
            .get(cat.object_name(o))
            .cloned()
            .ok_or_else(|| SheafError::BadFunctionShape(format!("no value for `{}`", cat.object_name(o))))?;
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(SheafError::BadFunctionShape(format!(
                "duplicate element in F({})",
                cat.object_name(o)
            )));
        }
        values.push(labels);
    }
    let mut restrictions = Vec::new();
    for f in cat.arrow_ids() {
        let (a, b) = (cat.src(f), cat.dst(f));
        let name = cat.arrow_name(f);
        let map = match raw.restrictions.get(name) {
            Some(m) => {
                if m.len() != values[b.0].len() {
                    return Err(SheafError::BadFunctionShape(format!("restriction along `{name}` is not total")));
                }
                values[b.0]
                    .iter()
                    .map(|x| {
                        let y = m.get(x).ok_or_else(|| {
                            SheafError::BadFunctionShape(format!("restriction along `{name}` misses `{x}`"))
                        })?;
                        values[a.0]
                            .binary_search(y)
                            .map_err(|_| SheafError::UnresolvedReference(format!("{name}: {y}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            None if values[a.0] == values[b.0] => (0..values[b.0].len()).collect(),
            None => {
                return Err(SheafError::BadFunctionShape(format!("missing restriction along `{name}`")));
            }
        };
        restrictions.push(map);
    }
    let p = Presheaf { values, restrictions };
    p.validate(cat)?;
    Ok(p)
}

/// Compatible families `(x_f)_{f∈R}` with `x_{f∘g} = F(g)(x_f)`, each indexed
/// by the arrows of `R` in order, returned sorted.
pub fn matching_families(cat: &FiniteCategory, f: &Presheaf, r: &Sieve) -> Vec<Vec<usize>> {
    let arrows: Vec<ArrowId> = r.arrows.iter().copied().collect();
    let pos: HashMap<ArrowId, usize> = arrows.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    // (i, g, j): x_j = F(g)(x_i), checked once both positions are assigned.
    let mut checks: Vec<Vec<(usize, ArrowId, usize)>> = vec![Vec::new(); arrows.len()];
    for (i, &a) in arrows.iter().enumerate() {
        for &g in cat.arrows_into(cat.src(a)) {
            let j = pos[&cat.compose(a, g).unwrap()];
            checks[i.max(j)].push((i, g, j));
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; arrows.len()];
    fn go(
        k: usize,
        arrows: &[ArrowId],
        cat: &FiniteCategory,
        f: &Presheaf,
        checks: &[Vec<(usize, ArrowId, usize)>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == arrows.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..f.size(cat.src(arrows[k])) {
            cur[k] = x;
            if checks[k].iter().all(|&(i, g, j)| cur[j] == f.restrict(g, cur[i])) {
                go(k + 1, arrows, cat, f, checks, cur, out);
            }
        }
    }
    go(0, &arrows, cat, f, &checks, &mut cur, &mut out);
    out
}

/// Image of `s ∈ F(S)` under the canonical map into matching families.
pub fn canonical_family(f: &Presheaf, r: &Sieve, s: usize) -> Vec<usize> {
    r.arrows.iter().map(|&a| f.restrict(a, s)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafWitness {
    pub object: ObjId,
    pub sieve: Sieve,
    pub sections: usize,
    pub families: usize,
    pub injective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafCheck {
    pub holds: bool,
    pub witness: Option<SheafWitness>,
}

/// The sheaf condition for every covering sieve, first failure as witness.
pub fn is_sheaf(site: &Site, f: &Presheaf) -> SheafCheck {
    let cat = &site.category;
    for s in cat.objects() {
        for r in site.topology.covers(s) {
            let families = matching_families(cat, f, r);
            let images: Vec<Vec<usize>> = (0..f.size(s)).map(|x| canonical_family(f, r, x)).collect();
            let injective = images.iter().all_unique();
            if !injective || families.len() != f.size(s) {
                return SheafCheck {
                    holds: false,
                    witness: Some(SheafWitness {
                        object: s,
                        sieve: r.clone(),
                        sections: f.size(s),
                        families: families.len(),
                        injective,
                    }),
                };
            }
        }
    }
    SheafCheck {
        holds: true,
        witness: None,
    }
}

/// A sheaf-object: an explicit presheaf remembering which representables
/// built it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafObject {
    pub presheaf: Presheaf,
    pub label: String,
    pub representables: Vec<ObjId>,
}

impl SheafObject {
    pub fn representable(cat: &FiniteCategory, x: ObjId) -> Self {
        SheafObject {
            presheaf: Presheaf::representable(cat, x),
            label: format!("y({})", cat.object_name(x)),
            representables: vec![x],
        }
    }

    pub fn terminal(cat: &FiniteCategory) -> Self {
        SheafObject {
            presheaf: Presheaf::terminal(cat),
            label: "1".into(),
            representables: vec![],
        }
    }

    pub fn empty(cat: &FiniteCategory) -> Self {
        SheafObject {
            presheaf: Presheaf::empty(cat),
            label: "0".into(),
            representables: vec![],
        }
    }

    pub fn explicit(presheaf: Presheaf, label: impl Into<String>) -> Self {
        SheafObject {
            presheaf,
            label: label.into(),
            representables: vec![],
        }
    }
}

/// Every representable factor of `e` must be a sheaf.
pub fn check_subcanonical(site: &Site, e: &SheafObject) -> Result<(), SheafError> {
    for &x in &e.representables {
        if !is_sheaf(site, &Presheaf::representable(&site.category, x)).holds {
            return Err(SheafError::NotSubcanonical(site.category.object_name(x).to_string()));
        }
    }
    Ok(())
}

/// Pointwise product without the subcanonicity check.
pub fn product_unchecked(cat: &FiniteCategory, a: &SheafObject, b: &SheafObject) -> SheafObject {
    let (pa, pb) = (&a.presheaf, &b.presheaf);
    let values = cat
        .objects()
        .map(|o| {
            pa.values(o)
                .iter()
                .cartesian_product(pb.values(o))
                .map(|(x, y)| format!("({x},{y})"))
                .collect()
        })
        .collect();
    let restrictions = cat
        .arrow_ids()
        .map(|f| {
            let nb = pb.size(cat.dst(f));
            let nb_src = pb.size(cat.src(f));
            (0..pa.size(cat.dst(f)))
                .cartesian_product(0..nb)
                .map(|(x, y)| pa.restrict(f, x) * nb_src + pb.restrict(f, y))
                .collect()
        })
        .collect();
    let mut representables = a.representables.clone();
    representables.extend(&b.representables);
    representables.sort();
    representables.dedup();
    SheafObject {
        presheaf: Presheaf { values, restrictions },
        label: format!("{}×{}", a.label, b.label),
        representables,
    }
}

pub fn product(site: &Site, a: &SheafObject, b: &SheafObject) -> Result<SheafObject, SheafError> {
    check_subcanonical(site, a)?;
    check_subcanonical(site, b)?;
    Ok(product_unchecked(&site.category, a, b))
}

pub fn is_empty_object(site: &Site, e: &SheafObject) -> Result<bool, SheafError> {
    if site.topology.is_degenerate() {
        return Err(SheafError::DegenerateSite);
    }
    Ok(site.category.objects().all(|o| e.presheaf.size(o) == 0))
}

/// Cell layout of a presheaf: one cell per (object, element).
#[derive(Clone, Debug)]
pub struct Cells {
    offsets: Vec<usize>,
    pub cells: Vec<(ObjId, usize)>,
}

impl Cells {
    pub fn new(cat: &FiniteCategory, e: &Presheaf) -> Self {
        let mut offsets = Vec::new();
        let mut cells = Vec::new();
        for o in cat.objects() {
            offsets.push(cells.len());
            cells.extend((0..e.size(o)).map(|x| (o, x)));
        }
        Cells { offsets, cells }
    }

    pub fn index(&self, o: ObjId, x: usize) -> usize {
        self.offsets[o.0] + x
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Natural transformations `E → F`, each flattened over [`Cells`] of `E`,
/// returned sorted.
pub fn sections_over(cat: &FiniteCategory, e: &Presheaf, f: &Presheaf) -> Vec<Vec<usize>> {
    let cells = Cells::new(cat, e);
    let n = cells.len();
    // down[c] = (arrow, target cell): α(target) = F(arrow)(α(c)).
    let mut down: Vec<Vec<(ArrowId, usize)>> = vec![Vec::new(); n];
    let mut up: Vec<Vec<(ArrowId, usize)>> = vec![Vec::new(); n];
    for (c, &(w, x)) in cells.cells.iter().enumerate() {
        for &g in cat.arrows_into(w) {
            if cat.is_identity(g) {
                continue;
            }
            let t = cells.index(cat.src(g), e.restrict(g, x));
            down[c].push((g, t));
            up[t].push((g, c));
        }
    }
    // Visit cells over objects with many incoming arrows first so that
    // assignments propagate downward.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(cat.arrows_into(cells.cells[c].0).len()), c));

    struct Search<'a> {
        f: &'a Presheaf,
        cells: &'a Cells,
        down: &'a [Vec<(ArrowId, usize)>],
        up: &'a [Vec<(ArrowId, usize)>],
        order: &'a [usize],
        value: Vec<Option<usize>>,
        trail: Vec<usize>,
        out: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn assign(&mut self, c: usize, v: usize) -> bool {
            let mut stack = vec![(c, v)];
            while let Some((c, v)) = stack.pop() {
                match self.value[c] {
                    Some(old) if old == v => continue,
                    Some(_) => return false,
                    None => {}
                }
                for &(g, src) in &self.up[c] {
                    if let Some(sv) = self.value[src] {
                        if self.f.restrict(g, sv) != v {
                            return false;
                        }
                    }
                }
                self.value[c] = Some(v);
                self.trail.push(c);
                for &(g, t) in &self.down[c] {
                    stack.push((t, self.f.restrict(g, v)));
                }
            }
            true
        }

        fn run(&mut self, k: usize) {
            let mut k = k;
            while k < self.order.len() && self.value[self.order[k]].is_some() {
                k += 1;
            }
            if k == self.order.len() {
                self.out.push(self.value.iter().map(|v| v.unwrap()).collect());
                return;
            }
            let c = self.order[k];
            let (w, _) = self.cells.cells[c];
            for v in 0..self.f.size(w) {
                let mark = self.trail.len();
                if self.assign(c, v) {
                    self.run(k + 1);
                }
                while self.trail.len() > mark {
                    let c = self.trail.pop().unwrap();
                    self.value[c] = None;
                }
            }
        }
    }

    let mut search = Search {
        f,
        cells: &cells,
        down: &down,
        up: &up,
        order: &order,
        value: vec![None; n],
        trail: Vec::new(),
        out: Vec::new(),
    };
    search.run(0);
    let mut out = search.out;
    out.sort();
    out
}

/// Global sections `Γ(F) = Nat(1, F)`, one value per object.
pub fn global_sections(cat: &FiniteCategory, f: &Presheaf) -> Vec<Vec<usize>> {
    sections_over(cat, &Presheaf::terminal(cat), f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub partition: Vec<Vec<usize>>,
    pub connected: bool,
}

/// Connected components of the covering nerve.
pub fn components(site: &Site, family: &CoveringFamily) -> Result<Components, SheafError> {
    let g = nerve::nerve_graph(site, family).map_err(|e| match e {
        nerve::NerveError::Sheaf(s) => s,
        other => SheafError::BadFunctionShape(other.to_string()),
    })?;
    let partition = g.components();
    Ok(Components {
        connected: partition.len() == 1,
        partition,
    })
}

/// Every restriction along arrows of the slice over `x` is bijective and
/// the fibers over the slice share one cardinality.
pub fn is_constant_on_slice(cat: &FiniteCategory, f: &Presheaf, x: ObjId) -> bool {
    let over = cat.objects_over(x);
    let n = f.size(x);
    if over.iter().any(|&o| f.size(o) != n) {
        return false;
    }
    over.iter().all(|&b| {
        cat.arrows_into(b).iter().all(|&h| {
            let r = f.restriction(h);
            r.iter().all_unique() && r.len() == n
        })
    })
}

/// `F` is isomorphic to a constant presheaf.
///
/// A natural transformation from the constant presheaf on `n` points is an
/// `n`-tuple of global sections; it is an isomorphism exactly when the
/// sections are pairwise distinct at every object.
pub fn is_constant(cat: &FiniteCategory, f: &Presheaf) -> bool {
    let Some(first) = cat.objects().next() else {
        return true;
    };
    let n = f.size(first);
    if cat.objects().any(|o| f.size(o) != n) {
        return false;
    }
    if n == 0 {
        return true;
    }
    let gamma = global_sections(cat, f);
    fn pick(gamma: &[Vec<usize>], start: usize, chosen: &mut Vec<usize>, n: usize) -> bool {
        if chosen.len() == n {
            return true;
        }
        for s in start..gamma.len() {
            let fresh = chosen
                .iter()
                .all(|&c| gamma[c].iter().zip(&gamma[s]).all(|(a, b)| a != b));
            if fresh {
                chosen.push(s);
                if pick(gamma, s + 1, chosen, n) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    pick(&gamma, 0, &mut Vec::new(), n)
}

pub const DEFAULT_TRIVIALIZING_CAP: usize = 4096;

/// First covering connected family on whose members `F` is slice-constant.
///
/// Candidates: the all-objects family, then subfamilies of the eligible
/// objects by size and lexicographically, at most `cap` of them.
pub fn trivializing_family(site: &Site, f: &Presheaf, cap: usize) -> Option<CoveringFamily> {
    let cat = &site.category;
    let eligible: Vec<ObjId> = cat
        .objects()
        .filter(|&o| is_constant_on_slice(cat, f, o) && is_connected_object(site, o))
        .collect();
    let all: Vec<ObjId> = cat.objects().collect();
    let mut tried = 0usize;
    let mut attempt = |members: Vec<ObjId>| -> Option<CoveringFamily> {
        if tried >= cap {
            return None;
        }
        tried += 1;
        if members.iter().all(|m| eligible.contains(m)) {
            CoveringFamily::new(site, members).ok()
        } else {
            None
        }
    };
    if let Some(fam) = attempt(all.clone()) {
        return Some(fam);
    }
    for size in 1..=eligible.len() {
        for combo in eligible.iter().copied().combinations(size) {
            if combo == all {
                continue;
            }
            if let Some(fam) = attempt(combo) {
                return Some(fam);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn presheaf_validation_examples() {
        let c4 = fixtures::c4_site().category;
        fixtures::constant_sheaf(&c4, 2).validate(&c4).unwrap();
        fixtures::swap_sheaf(&c4).validate(&c4).unwrap();

        let mut raw = fixtures::swap_sheaf(&c4).to_raw(&c4);
        assert_eq!(validate_presheaf(&c4, &raw).unwrap(), fixtures::swap_sheaf(&c4));
        raw.values.insert("e1".into(), vec!["0".into(), "1".into(), "2".into()]);
        raw.restrictions.remove("v4>e1");
        let err = validate_presheaf(&c4, &raw).unwrap_err();
        assert_eq!(err.code(), "BAD_FUNCTION_SHAPE");

        let mut raw = fixtures::swap_sheaf(&c4).to_raw(&c4);
        raw.restrictions.insert("nope".into(), BTreeMap::new());
        assert_eq!(validate_presheaf(&c4, &raw).unwrap_err().code(), "UNRESOLVED_REFERENCE");
    }

    #[test]
    fn non_functorial_presheaf_is_rejected() {
        let chain = FiniteCategory::poset(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let mut f = fixtures::constant_sheaf(&chain, 2);
        f.set_restriction(chain.arrow("a>c").unwrap(), vec![1, 0]);
        assert_eq!(f.validate(&chain).unwrap_err().code(), "NOT_FUNCTORIAL");
    }

    #[test]
    fn matching_family_examples() {
        let c4 = fixtures::c4_site().category;
        let e1 = c4.object("e1").unwrap();
        let swap = fixtures::swap_sheaf(&c4);
        assert_eq!(matching_families(&c4, &swap, &Sieve::empty(e1)), vec![Vec::<usize>::new()]);
        assert_eq!(matching_families(&c4, &swap, &Sieve::maximal(&c4, e1)).len(), 2);
        let vertex = crate::site::generate_sieve(
            &c4,
            e1,
            &[c4.arrow("v1>e1").unwrap(), c4.arrow("v4>e1").unwrap()],
        )
        .unwrap();
        let c2 = fixtures::constant_sheaf(&c4, 2);
        assert_eq!(matching_families(&c4, &c2, &vertex).len(), 4);
    }

    #[test]
    fn sheaf_condition_examples() {
        let c4 = fixtures::c4_site();
        let fine = fixtures::c4_fine_site();
        let swap = fixtures::swap_sheaf(&c4.category);
        assert!(is_sheaf(&c4, &swap).holds);
        let check = is_sheaf(&fine, &swap);
        assert!(!check.holds);
        let w = check.witness.unwrap();
        assert_eq!(fine.category.object_name(w.object), "e1");
        assert_eq!((w.sections, w.families), (2, 4));
        assert!(is_sheaf(&fine, &Presheaf::terminal(&fine.category)).holds);
    }

    #[test]
    fn product_examples() {
        let site = fixtures::c4_site();
        let cat = &site.category;
        let y = |n: &str| SheafObject::representable(cat, cat.object(n).unwrap());
        let p = product(&site, &y("e1"), &y("e2")).unwrap();
        for o in cat.objects() {
            let expected = usize::from(cat.object_name(o) == "v1");
            assert_eq!(p.presheaf.size(o), expected);
        }
        let q = product(&site, &y("e1"), &y("e3")).unwrap();
        assert!(is_empty_object(&site, &q).unwrap());
        let t = product(&site, &y("e1"), &SheafObject::terminal(cat)).unwrap();
        for o in cat.objects() {
            assert_eq!(t.presheaf.size(o), y("e1").presheaf.size(o));
        }
        assert!(!is_empty_object(&site, &SheafObject::terminal(cat)).unwrap());
        assert!(is_empty_object(&site, &SheafObject::empty(cat)).unwrap());
        let degenerate = fixtures::c4_degenerate_site();
        assert_eq!(
            is_empty_object(&degenerate, &SheafObject::empty(cat)).unwrap_err(),
            SheafError::DegenerateSite
        );
    }

    #[test]
    fn not_subcanonical_product_is_refused() {
        // On the chain a → b with {a>b} covering b, y(a)(b) = ∅ but the
        // family over {a>b} is {id:a}: y(a) is not a sheaf.
        let cat = FiniteCategory::poset(&["a", "b"], &[("a", "b")]).unwrap();
        let b = cat.object("b").unwrap();
        let mut raw = Site::minimal(cat.clone()).raw_covers();
        raw[b.0].push(crate::site::generate_sieve(&cat, b, &[cat.arrow("a>b").unwrap()]).unwrap());
        let site = Site::new(cat.clone(), &raw).unwrap();
        let ya = SheafObject::representable(&cat, cat.object("a").unwrap());
        assert_eq!(
            product(&site, &ya, &ya).unwrap_err().code(),
            "NOT_SUBCANONICAL"
        );
    }

    #[test]
    fn sections_over_examples() {
        let site = fixtures::c4_site();
        let cat = &site.category;
        let swap = fixtures::swap_sheaf(cat);
        let y = |n: &str| SheafObject::representable(cat, cat.object(n).unwrap());
        assert_eq!(sections_over(cat, &y("e1").presheaf, &swap).len(), 2);
        let overlap = product(&site, &y("e1"), &y("e2")).unwrap();
        assert_eq!(sections_over(cat, &overlap.presheaf, &swap).len(), 2);
        assert_eq!(sections_over(cat, &Presheaf::empty(cat), &swap), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn yoneda_agreement() {
        // Nat(y(X), F) ↔ F(X): the transformation is determined by the
        // image of id_X, read off the cell of id_X.
        let site = fixtures::c4_site();
        let cat = &site.category;
        for f in [fixtures::swap_sheaf(cat), fixtures::rot3_sheaf(cat)] {
            for x in cat.objects() {
                let y = Presheaf::representable(cat, x);
                let cells = Cells::new(cat, &y);
                let idx = y.values(x).iter().position(|l| l == cat.arrow_name(cat.id(x))).unwrap();
                let mut at_id: Vec<usize> = sections_over(cat, &y, &f)
                    .iter()
                    .map(|s| s[cells.index(x, idx)])
                    .collect();
                at_id.sort();
                assert_eq!(at_id, (0..f.size(x)).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn components_examples() {
        let c4 = fixtures::c4_site();
        assert_eq!(components(&c4, &fixtures::edges(&c4, 4, "e")).unwrap().partition.len(), 1);
        let two = fixtures::two_c4_site();
        let fam = CoveringFamily::from_names(&two, &["e1", "e2", "e3", "e4", "f1", "f2", "f3", "f4"]).unwrap();
        let comps = components(&two, &fam).unwrap();
        assert_eq!(comps.partition.len(), 2);
        assert!(!comps.connected);
        let p3 = fixtures::p3_site();
        let fam = CoveringFamily::from_names(&p3, &["a1", "a2", "a3"]).unwrap();
        assert!(components(&p3, &fam).unwrap().connected);
    }

    #[test]
    fn constancy_examples() {
        let cat = fixtures::c4_site().category;
        let e1 = cat.object("e1").unwrap();
        assert!(is_constant(&cat, &fixtures::constant_sheaf(&cat, 3)));
        let swap = fixtures::swap_sheaf(&cat);
        assert!(is_constant_on_slice(&cat, &swap, e1));
        assert!(!is_constant(&cat, &swap));
        assert!(!is_constant_on_slice(&cat, &fixtures::collapsing_sheaf(&cat), e1));
    }

    /// Independent oracle: search all componentwise bijections from the
    /// constant presheaf and test naturality directly.
    fn constant_by_brute_force(cat: &FiniteCategory, f: &Presheaf) -> bool {
        let n = f.size(ObjId(0));
        if cat.objects().any(|o| f.size(o) != n) {
            return false;
        }
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let objs: Vec<ObjId> = cat.objects().collect();
        objs.iter()
            .map(|_| perms.iter())
            .multi_cartesian_product()
            .any(|choice| {
                cat.arrow_ids().all(|g| {
                    let (a, b) = (cat.src(g), cat.dst(g));
                    (0..n).all(|k| f.restrict(g, choice[b.0][k]) == choice[a.0][k])
                })
            })
    }

    #[test]
    fn is_constant_matches_brute_force() {
        let cat = fixtures::cycle_category(3, "e", "v");
        let mut cases = vec![fixtures::constant_sheaf(&cat, 2)];
        let mut twisted = fixtures::constant_sheaf(&cat, 2);
        twisted.set_restriction(cat.arrow("v3>e1").unwrap(), vec![1, 0]);
        cases.push(twisted.clone());
        // Twisting twice is a coboundary: constant again.
        twisted.set_restriction(cat.arrow("v1>e1").unwrap(), vec![1, 0]);
        twisted.set_restriction(cat.arrow("v1>e2").unwrap(), vec![1, 0]);
        cases.push(twisted);
        for f in cases {
            f.validate(&cat).unwrap();
            assert_eq!(is_constant(&cat, &f), constant_by_brute_force(&cat, &f));
        }
    }

    #[test]
    fn trivializing_examples() {
        let site = fixtures::c4_site();
        let cat = &site.category;
        let all: Vec<ObjId> = cat.objects().collect();
        let fam = trivializing_family(&site, &fixtures::swap_sheaf(cat), DEFAULT_TRIVIALIZING_CAP).unwrap();
        assert_eq!(fam.members, all);
        let fam = trivializing_family(&site, &fixtures::constant_sheaf(cat, 2), DEFAULT_TRIVIALIZING_CAP).unwrap();
        assert_eq!(fam.members, all);
        assert!(trivializing_family(&site, &fixtures::collapsing_sheaf(cat), DEFAULT_TRIVIALIZING_CAP).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_c4_sheaf(twists: &[(usize, usize)]) -> Presheaf {
            let cat = fixtures::c4_site().category;
            let mut f = fixtures::constant_sheaf(&cat, 3);
            let perms: Vec<Vec<usize>> = (0..3).permutations(3).collect();
            let vertex_arrows: Vec<ArrowId> = cat.arrow_ids().filter(|&a| !cat.is_identity(a)).collect();
            for &(a, p) in twists {
                f.set_restriction(vertex_arrows[a % vertex_arrows.len()], perms[p % 6].clone());
            }
            f
        }

        proptest! {
            #[test]
            fn maximal_sieve_families_biject(twists in proptest::collection::vec((0usize..8, 0usize..6), 0..5)) {
                let cat = fixtures::c4_site().category;
                let f = random_c4_sheaf(&twists);
                prop_assert!(f.validate(&cat).is_ok());
                for s in cat.objects() {
                    let max = Sieve::maximal(&cat, s);
                    let fams = matching_families(&cat, &f, &max);
                    prop_assert_eq!(fams.len(), f.size(s));
                    let mut images: Vec<_> = (0..f.size(s)).map(|x| canonical_family(&f, &max, x)).collect();
                    images.sort();
                    prop_assert_eq!(images, fams);
                }
            }

            #[test]
            fn product_is_commutative_and_absorbs_empty(a in 0usize..8, b in 0usize..8, c in 0usize..8) {
                let site = fixtures::c4_site();
                let cat = &site.category;
                let y = |i: usize| SheafObject::representable(cat, ObjId(i));
                let ab = product(&site, &y(a), &y(b)).unwrap();
                let ba = product(&site, &y(b), &y(a)).unwrap();
                let ab_c = product(&site, &ab, &y(c)).unwrap();
                let bc = product(&site, &y(b), &y(c)).unwrap();
                let a_bc = product(&site, &y(a), &bc).unwrap();
                for o in cat.objects() {
                    prop_assert_eq!(ab.presheaf.size(o), ba.presheaf.size(o));
                    prop_assert_eq!(ab_c.presheaf.size(o), a_bc.presheaf.size(o));
                }
                let z = product(&site, &ab, &SheafObject::empty(cat)).unwrap();
                prop_assert!(is_empty_object(&site, &z).unwrap());
            }
        }
    }
}
