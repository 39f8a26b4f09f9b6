//! The sheaf associated with an atlas, its holonomy and the germ space with
//! its developing labelling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::fincat::{ArrowId, Functor, ObjId};
use crate::nerve::{aut_generators, PathClass};
use crate::sheaf::{matching_families, Presheaf};
use crate::site::family_sieve;

use super::{check_local_iso, Atlas, GeoError};

/// The structure sheaf `F`. Over objects below some chart domain an element
/// is the group value at the reference pair `(i, u)` (first member, first
/// arrow), so the element index is the group element index. Elsewhere an
/// element is a matching family over the family sieve.
#[derive(Clone, Debug)]
pub struct StructureSheaf {
    pub presheaf: Presheaf,
    pub reference: Vec<Option<(usize, ArrowId)>>,
}

impl StructureSheaf {
    pub fn is_small(&self, w: ObjId) -> bool {
        self.reference[w.0].is_some()
    }
}

pub fn structure_sheaf(atlas: &Atlas) -> StructureSheaf {
    let d = &atlas.site.category;
    let g = &atlas.model;
    let members = &atlas.family.members;
    let reference: Vec<Option<(usize, ArrowId)>> = d
        .objects()
        .map(|w| {
            members
                .iter()
                .enumerate()
                .find_map(|(i, &x)| d.hom(w, x).first().map(|&u| (i, u)))
        })
        .collect();
    let labels: Vec<String> = g.labels().to_vec();
    let n = g.order();
    // Small part first; non-small values are filled in below.
    let mut f = Presheaf::empty(d);
    for w in d.objects() {
        if reference[w.0].is_some() {
            f.set_values(w, labels.clone());
        }
    }
    for h in d.arrow_ids() {
        let (src, dst) = (d.src(h), d.dst(h));
        if let (Some((i1, _)), Some((i0, _))) = (reference[src.0], reference[dst.0]) {
            let t = atlas.transition(i1, i0);
            f.set_restriction(h, (0..n).map(|x| g.mul(t, x)).collect());
        }
    }
    let small = f.clone();
    let mut families: BTreeMap<ObjId, (Vec<ArrowId>, Vec<Vec<usize>>)> = BTreeMap::new();
    for w in d.objects() {
        if reference[w.0].is_none() {
            let r = family_sieve(d, members, w);
            let fams = matching_families(d, &small, &r);
            let vals = fams
                .iter()
                .map(|fam| {
                    let parts: Vec<&str> = fam.iter().map(|&x| labels[x].as_str()).collect();
                    format!("[{}]", parts.join(";"))
                })
                .collect();
            f.set_values(w, vals);
            families.insert(w, (r.arrows.iter().copied().collect(), fams));
        }
    }
    for h in d.arrow_ids() {
        let (src, dst) = (d.src(h), d.dst(h));
        let Some((arrows, fams)) = families.get(&dst) else { continue };
        let map = if reference[src.0].is_some() {
            let pos = arrows.iter().position(|&a| a == h).expect("small source lies in the sieve");
            fams.iter().map(|fam| fam[pos]).collect()
        } else {
            let (src_arrows, src_fams) = &families[&src];
            fams.iter()
                .map(|fam| {
                    let pulled: Vec<usize> = src_arrows
                        .iter()
                        .map(|&k| {
                            let hk = d.compose(h, k).unwrap();
                            fam[arrows.iter().position(|&a| a == hk).unwrap()]
                        })
                        .collect();
                    src_fams.binary_search(&pulled).expect("pullback is matching")
                })
                .collect()
        };
        f.set_restriction(h, map);
    }
    StructureSheaf { presheaf: f, reference }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureHolonomy {
    pub base: usize,
    /// Loop generators at the base with their images `g_{i1 i2} ⋯ g_{i(n-1) in}`.
    pub generators: Vec<(PathClass, usize)>,
    /// The image subgroup, sorted.
    pub image: Vec<usize>,
}

pub fn walk_product(atlas: &Atlas, path: &[usize]) -> usize {
    path.windows(2)
        .fold(atlas.model.identity(), |acc, p| atlas.model.mul(acc, atlas.transition(p[0], p[1])))
}

pub fn structure_holonomy(atlas: &Atlas, base: usize) -> Result<StructureHolonomy, GeoError> {
    if base >= atlas.family.len() {
        return Err(GeoError::UnknownElement(format!("basepoint {base}")));
    }
    let generators: Vec<(PathClass, usize)> = aut_generators(&atlas.graph, base)
        .into_iter()
        .map(|p| {
            let g = walk_product(atlas, &p.0);
            (p, g)
        })
        .collect();
    let gens: Vec<usize> = generators.iter().map(|(_, g)| *g).collect();
    let image = atlas.model.as_finite_group().subgroup(&gens);
    Ok(StructureHolonomy {
        base,
        generators,
        image,
    })
}

pub const GERM_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermComponent {
    /// Indices into [`GermSpace::germs`], sorted.
    pub germs: Vec<usize>,
    /// Germs over the first base object; `covering` says every object of the
    /// underlying component of the site has that many.
    pub degree: usize,
    pub covering: bool,
    /// Germs over family members.
    pub member_germs: usize,
    /// How many times the member germs cover their model images, when
    /// every image is hit equally often.
    pub wrapping: Option<usize>,
    pub dev_images: BTreeSet<ObjId>,
    /// Dev restricted to the slice over every member germ is a local iso.
    pub dev_local_iso: bool,
}

#[derive(Clone, Debug)]
pub struct GermSpace {
    /// `(X, s)` with `s ∈ F(X)`.
    pub germs: Vec<(ObjId, usize)>,
    /// Model object labelling each germ over a chart-covered object.
    pub dev: Vec<Option<ObjId>>,
    pub components: Vec<GermComponent>,
}

/// `Dev(X, s) = σ(i, u)⁻¹ ∘ φ_i(u)` at the reference pair.
pub fn dev_object(atlas: &Atlas, sheaf: &StructureSheaf, w: ObjId, s: usize) -> Option<ObjId> {
    let (i, u) = sheaf.reference[w.0]?;
    let o = atlas.slices[i].object_of(u)?;
    let g = atlas.model.element(atlas.model.inv(s));
    Some(g.obj(atlas.charts[i].obj(o)))
}

/// Dev on the germ arrow over `k: V → W` ending at `(W, s)`.
pub fn dev_arrow(atlas: &Atlas, sheaf: &StructureSheaf, k: ArrowId, s: usize) -> Option<ArrowId> {
    let w = atlas.site.category.dst(k);
    let (i, u) = sheaf.reference[w.0]?;
    let a = atlas.slices[i].arrow_of(k, u)?;
    let g = atlas.model.element(atlas.model.inv(s));
    Some(g.arr(atlas.charts[i].arr(a)))
}

/// The functor `(W, u) ↦ Dev(W, F(u)(s))` on the slice over member `i`.
pub fn dev_on_member(atlas: &Atlas, sheaf: &StructureSheaf, i: usize, s: usize) -> Functor {
    let slice = &atlas.slices[i];
    let d = &atlas.site.category;
    let f = &sheaf.presheaf;
    let objects = slice
        .category
        .objects()
        .map(|o| {
            let u = slice.object_over(o);
            dev_object(atlas, sheaf, d.src(u), f.restrict(u, s)).unwrap()
        })
        .collect();
    let arrows = slice
        .category
        .arrow_ids()
        .map(|a| {
            let target = slice.object_over(slice.category.dst(a));
            let k = slice.arrow_over(a);
            dev_arrow(atlas, sheaf, k, f.restrict(target, s)).unwrap()
        })
        .collect();
    Functor { objects, arrows }
}

/// Germ space components reachable from `basepoints` (all germs when
/// `None`, refused above [`GERM_LIMIT`]).
pub fn developing(atlas: &Atlas, sheaf: &StructureSheaf, basepoints: Option<&[(ObjId, usize)]>) -> Result<GermSpace, GeoError> {
    let d = &atlas.site.category;
    let f = &sheaf.presheaf;
    let mut offsets = Vec::new();
    let mut germs = Vec::new();
    for w in d.objects() {
        offsets.push(germs.len());
        germs.extend((0..f.size(w)).map(|s| (w, s)));
    }
    if basepoints.is_none() && germs.len() > GERM_LIMIT {
        return Err(GeoError::GermSpaceTooLarge(germs.len()));
    }
    let idx = |w: ObjId, s: usize| offsets[w.0] + s;
    let dev: Vec<Option<ObjId>> = germs.iter().map(|&(w, s)| dev_object(atlas, sheaf, w, s)).collect();

    // Underlying components of the site, for the covering check.
    let mut base_comp = vec![usize::MAX; d.num_objects()];
    for start in d.objects() {
        if base_comp[start.0] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        base_comp[start.0] = start.0;
        while let Some(w) = queue.pop_front() {
            let next = d.arrows_into(w).iter().map(|&a| d.src(a)).chain(d.arrows_from(w).iter().map(|&a| d.dst(a)));
            for v in next.collect::<Vec<_>>() {
                if base_comp[v.0] == usize::MAX {
                    base_comp[v.0] = start.0;
                    queue.push_back(v);
                }
            }
        }
    }

    let starts: Vec<usize> = match basepoints {
        Some(b) => b.iter().map(|&(w, s)| idx(w, s)).collect(),
        None => (0..germs.len()).collect(),
    };
    let mut seen = vec![false; germs.len()];
    let mut components = Vec::new();
    for start in starts {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut members = vec![start];
        while let Some(g) = queue.pop_front() {
            let (w, s) = germs[g];
            let mut next = Vec::new();
            for &h in d.arrows_into(w) {
                next.push(idx(d.src(h), f.restrict(h, s)));
            }
            for &h in d.arrows_from(w) {
                let t = d.dst(h);
                next.extend((0..f.size(t)).filter(|&y| f.restrict(h, y) == s).map(|y| idx(t, y)));
            }
            for n in next {
                if !seen[n] {
                    seen[n] = true;
                    members.push(n);
                    queue.push_back(n);
                }
            }
        }
        members.sort();
        components.push(summarize(atlas, sheaf, &germs, &dev, &base_comp, members));
    }
    Ok(GermSpace {
        germs,
        dev,
        components,
    })
}

fn summarize(
    atlas: &Atlas,
    sheaf: &StructureSheaf,
    germs: &[(ObjId, usize)],
    dev: &[Option<ObjId>],
    base_comp: &[usize],
    members: Vec<usize>,
) -> GermComponent {
    let d = &atlas.site.category;
    let mut per_object: BTreeMap<ObjId, usize> = BTreeMap::new();
    for &g in &members {
        *per_object.entry(germs[g].0).or_default() += 1;
    }
    let first = germs[members[0]].0;
    let degree = per_object[&first];
    let covering = d
        .objects()
        .filter(|w| base_comp[w.0] == base_comp[first.0])
        .all(|w| per_object.get(&w) == Some(&degree));
    let mut hits: BTreeMap<ObjId, usize> = BTreeMap::new();
    let mut member_germs = 0;
    let mut dev_local_iso = true;
    for &g in &members {
        let (w, s) = germs[g];
        if let Some(i) = atlas.family.index_of(w) {
            member_germs += 1;
            *hits.entry(dev[g].unwrap()).or_default() += 1;
            let functor = dev_on_member(atlas, sheaf, i, s);
            if check_local_iso(&atlas.site, &atlas.slices[i], &functor, &atlas.model.site).is_err() {
                dev_local_iso = false;
            }
        }
    }
    let counts: BTreeSet<usize> = hits.values().copied().collect();
    let wrapping = (counts.len() == 1).then(|| *counts.iter().next().unwrap());
    GermComponent {
        dev_images: members.iter().filter_map(|&g| dev[g]).collect(),
        germs: members,
        degree,
        covering,
        member_germs,
        wrapping,
        dev_local_iso,
    }
}
