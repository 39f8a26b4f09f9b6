//! The structural bundle and its sections, change of model, morphisms of
//! structured sites, and representations of holonomy groups.

use std::collections::BTreeMap;

use crate::fincat::{slice_category, validate_functor, Functor, ObjId};
use crate::holonomy::{FiniteGroup, Perm};
use crate::site::{generate_sieve, Site};

use super::{check_local_iso, validate_atlas, Atlas, AtlasData, AutomorphismGroup, GeoError};

/// Pieces `X_i × C` glued by `(j, c) ~ (i, g_ij(c))` over overlaps.
#[derive(Clone, Debug)]
pub struct StructuralBundle {
    pub atlas: Atlas,
}

impl StructuralBundle {
    pub fn pieces(&self) -> Vec<(usize, ObjId)> {
        let c = &self.atlas.model.site.category;
        (0..self.atlas.family.len())
            .flat_map(|i| c.objects().map(move |o| (i, o)))
            .collect()
    }

    /// The clutching map carrying piece `j` into piece `i`.
    pub fn clutch(&self, i: usize, j: usize, c: ObjId) -> Option<(usize, ObjId)> {
        let g = *self.atlas.transitions.get(&(i, j))?;
        Some((i, self.atlas.model.element(g).obj(c)))
    }

    pub fn projection(&self, piece: (usize, ObjId)) -> ObjId {
        self.atlas.family.members[piece.0]
    }

    /// Clutching composes: `ĝ_ij ∘ ĝ_jk = ĝ_ik` wherever defined.
    pub fn clutching_is_cocycle(&self) -> bool {
        super::check_cocycle(&self.atlas).is_ok()
    }
}

pub fn structural_bundle(atlas: &Atlas) -> StructuralBundle {
    StructuralBundle { atlas: atlas.clone() }
}

/// Per-member functors `s_i` on the slice over `X_i` into the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub maps: Vec<Functor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionReport {
    pub compatible: bool,
    pub transverse: bool,
    pub witness: Option<GeoError>,
}

pub fn tautological_section(bundle: &StructuralBundle) -> Section {
    Section {
        maps: bundle.atlas.charts.clone(),
    }
}

/// Checks `g_ij ∘ s_j = s_i` on every overlap, then that every `s_i` is a
/// local isomorphism.
pub fn validate_section(bundle: &StructuralBundle, s: &Section) -> Result<SectionReport, GeoError> {
    let a = &bundle.atlas;
    let c = &a.model.site.category;
    if s.maps.len() != a.family.len() {
        return Err(GeoError::NotAHomomorphism(format!(
            "section has {} components for {} members",
            s.maps.len(),
            a.family.len()
        )));
    }
    for (i, m) in s.maps.iter().enumerate() {
        validate_functor(m, &a.slices[i].category, c)?;
    }
    for (&(i, j), &g) in &a.transitions {
        let right = a.model.element(g).after(&s.maps[j]);
        if !a.agree_on_overlap(i, j, &s.maps[i], &right) {
            return Ok(SectionReport {
                compatible: false,
                transverse: false,
                witness: Some(GeoError::SectionIncompatible(
                    a.member_name(i).to_string(),
                    a.member_name(j).to_string(),
                )),
            });
        }
    }
    for (i, m) in s.maps.iter().enumerate() {
        if let Err(reason) = check_local_iso(&a.site, &a.slices[i], m, &a.model.site) {
            return Ok(SectionReport {
                compatible: true,
                transverse: false,
                witness: Some(GeoError::NotTransverse(a.member_name(i).to_string(), reason)),
            });
        }
    }
    Ok(SectionReport {
        compatible: true,
        transverse: true,
        witness: None,
    })
}

/// A transverse section read as an atlas with the bundle's transitions.
pub fn structure_from_section(bundle: &StructuralBundle, s: &Section) -> Result<Atlas, GeoError> {
    let report = validate_section(bundle, s)?;
    if let Some(w) = report.witness {
        return Err(w);
    }
    let a = &bundle.atlas;
    validate_atlas(&AtlasData {
        site: a.site.clone(),
        model: a.model.clone(),
        family: a.family.clone(),
        charts: s.maps.clone(),
        transitions: a.transitions.clone(),
    })
}

/// Extends generator images to a homomorphism `G → G′`.
pub fn homomorphism_from_generators(
    g: &AutomorphismGroup,
    target: &AutomorphismGroup,
    images: &BTreeMap<String, usize>,
) -> Result<Vec<usize>, GeoError> {
    let gens: Vec<usize> = g.generators.iter().map(|(_, e)| *e).collect();
    let imgs = g
        .generators
        .iter()
        .map(|(n, _)| images.get(n).copied().ok_or_else(|| GeoError::UnknownElement(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    g.as_finite_group()
        .extend(&target.as_finite_group(), &gens, &imgs)
        .ok_or_else(|| GeoError::NotAHomomorphism("generator images violate a relation".into()))
}

/// Pushes an atlas along `φ: C → C′` and `Φ: G → G′` with `φ ∘ g = Φ(g) ∘ φ`.
pub fn change_model(atlas: &Atlas, phi: &Functor, target: &AutomorphismGroup, big_phi: &[usize]) -> Result<Atlas, GeoError> {
    let c = &atlas.model.site.category;
    let c2 = &target.site.category;
    validate_functor(phi, c, c2)?;
    if !atlas.model.as_finite_group().is_homomorphism(&target.as_finite_group(), big_phi) {
        return Err(GeoError::NotAHomomorphism("group map".into()));
    }
    for (name, g) in &atlas.model.generators {
        let left = phi.after(atlas.model.element(*g));
        let right = target.element(big_phi[*g]).after(phi);
        if left != right {
            return Err(GeoError::NotEquivariant(name.clone()));
        }
    }
    validate_atlas(&AtlasData {
        site: atlas.site.clone(),
        model: target.clone(),
        family: atlas.family.clone(),
        charts: atlas.charts.iter().map(|ch| phi.after(ch)).collect(),
        transitions: atlas.transitions.iter().map(|(&k, &g)| (k, big_phi[g])).collect(),
    })
}

/// The image of every covering sieve generates a covering sieve.
pub fn check_cover_preserving(f: &Functor, src: &Site, dst: &Site) -> Result<(), GeoError> {
    validate_functor(f, &src.category, &dst.category)?;
    for s in src.category.objects() {
        for r in src.topology.covers(s) {
            let gens: Vec<_> = r.arrows.iter().map(|&a| f.arr(a)).collect();
            let img = generate_sieve(&dst.category, f.obj(s), &gens)?;
            if !dst.topology.is_covering(&img) {
                return Err(GeoError::NotCoverPreserving(src.category.object_name(s).to_string()));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CgMorphismReport {
    /// Target chart index `i(j)` for each source chart.
    pub targets: Vec<usize>,
    /// `k_i` with `φ′_{i(j)} ∘ f|X_i = k_i ∘ φ_i`.
    pub k: Vec<usize>,
}

/// Solves the chart equations of a morphism of structured sites.
pub fn check_cg_morphism(f: &Functor, a: &Atlas, b: &Atlas) -> Result<CgMorphismReport, GeoError> {
    check_cover_preserving(f, &a.site, &b.site)?;
    if a.model != b.model {
        return Err(GeoError::NotEquivariant("atlases use different models".into()));
    }
    let d = &a.site.category;
    let d2 = &b.site.category;
    let g = &a.model;
    let mut targets = Vec::new();
    let mut ks = Vec::new();
    for (i, &x) in a.family.members.iter().enumerate() {
        let fx = f.obj(x);
        let cands: Vec<usize> = (0..b.family.len())
            .filter(|&j| !d2.hom(fx, b.family.members[j]).is_empty())
            .collect();
        if cands.len() != 1 {
            return Err(GeoError::AmbiguousTargetChart(d.object_name(x).to_string(), cands.len()));
        }
        let j = cands[0];
        let c = d2.hom(fx, b.family.members[j])[0];
        let si = &a.slices[i];
        let sj = slice_category(d2, b.family.members[j]).expect("member");
        let psi_objects: Vec<ObjId> = si
            .category
            .objects()
            .map(|o| {
                let u = d2.compose(c, f.arr(si.object_over(o))).unwrap();
                b.charts[j].obj(sj.object_of(u).unwrap())
            })
            .collect();
        let psi_arrows = si
            .category
            .arrow_ids()
            .map(|ar| {
                let u = d2.compose(c, f.arr(si.object_over(si.category.dst(ar)))).unwrap();
                b.charts[j].arr(sj.arrow_of(f.arr(si.arrow_over(ar)), u).unwrap())
            })
            .collect();
        let psi = Functor {
            objects: psi_objects,
            arrows: psi_arrows,
        };
        let sols: Vec<usize> = (0..g.order())
            .filter(|&k| g.element(k).after(&a.charts[i]) == psi)
            .collect();
        match sols.len() {
            0 => return Err(GeoError::NoKExists(d.object_name(x).to_string())),
            1 => {}
            n => {
                return Err(GeoError::TransitionNotUnique(
                    d.object_name(x).to_string(),
                    d2.object_name(b.family.members[j]).to_string(),
                    n,
                ))
            }
        }
        targets.push(j);
        ks.push(sols[0]);
    }
    Ok(CgMorphismReport { targets, k: ks })
}

/// All homomorphisms `H → G`, exhaustively.
pub fn enumerate_representations(h: &FiniteGroup, g: &AutomorphismGroup) -> Result<Vec<Vec<usize>>, GeoError> {
    Ok(h.homomorphisms(&g.as_finite_group())?)
}

/// Flat bundle over a cover `T̂` with fiber the model objects:
/// `γ_h(x, y) = (x, ρ(h)(y))`, indexed `x · |C| + y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatBundle {
    pub base_size: usize,
    pub fiber_size: usize,
    pub gammas: Vec<Perm>,
    pub action_law_holds: bool,
}

pub fn flat_bundle(base_size: usize, h: &FiniteGroup, g: &AutomorphismGroup, rep: &[usize]) -> Result<FlatBundle, GeoError> {
    if rep.len() != h.order() || rep.iter().any(|&x| x >= g.order()) || !h.is_homomorphism(&g.as_finite_group(), rep) {
        return Err(GeoError::NotAHomomorphism(format!("{rep:?}")));
    }
    let c = &g.site.category;
    let fiber_size = c.num_objects();
    let gammas: Vec<Perm> = (0..h.order())
        .map(|e| {
            let act = g.element(rep[e]);
            Perm(
                (0..base_size * fiber_size)
                    .map(|p| {
                        let (x, y) = (p / fiber_size, p % fiber_size);
                        x * fiber_size + act.obj(ObjId(y)).0
                    })
                    .collect(),
            )
        })
        .collect();
    let action_law_holds = (0..h.order())
        .all(|a| (0..h.order()).all(|b| gammas[h.mul(a, b)] == gammas[a].after(&gammas[b])));
    Ok(FlatBundle {
        base_size,
        fiber_size,
        gammas,
        action_law_holds,
    })
}

/// Discrete distance on generators: 0 when every generator has the same
/// image, 1 otherwise.
pub fn representation_distance(h: &FiniteGroup, r1: &[usize], r2: &[usize]) -> usize {
    usize::from(h.generating_set().iter().any(|&x| r1[x] != r2[x]))
}
