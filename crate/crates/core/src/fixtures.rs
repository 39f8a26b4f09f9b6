//! Named sites, sheaves and atlases used throughout the tests and examples.
//!
//! Cycle sites `C_n` have edges `e1..en` and vertices `v1..vn` with
//! `v_i → e_i` and `v_i → e_{i+1}` (indices mod n). The interval `P3` has
//! edges `a1..a3` over vertices `p0..p3`. The bigon has arcs `U`, `V` both
//! lying over the points `a`, `b`.

use crate::fincat::{ArrowId, FiniteCategory, Functor, ObjId};
use crate::geostruct::{AtlasData, AutomorphismGroup};
use crate::sheaf::Presheaf;
use crate::site::{generate_sieve, CoveringFamily, Sieve, Site};

fn wrap(i: usize, n: usize) -> usize {
    (i + n - 1) % n + 1
}

pub fn cycle_category(n: usize, edge: &str, vertex: &str) -> FiniteCategory {
    let edges: Vec<String> = (1..=n).map(|i| format!("{edge}{i}")).collect();
    let verts: Vec<String> = (1..=n).map(|i| format!("{vertex}{i}")).collect();
    let mut objects: Vec<&str> = edges.iter().map(String::as_str).collect();
    objects.extend(verts.iter().map(String::as_str));
    let mut rel = Vec::new();
    for i in 1..=n {
        rel.push((verts[i - 1].as_str(), edges[i - 1].as_str()));
        rel.push((verts[i - 1].as_str(), edges[wrap(i + 1, n) - 1].as_str()));
    }
    rel.dedup();
    FiniteCategory::poset(&objects, &rel).expect("cycle poset")
}

/// `C_n` with the minimal topology.
pub fn cycle_site(n: usize, edge: &str, vertex: &str) -> Site {
    Site::minimal(cycle_category(n, edge, vertex))
}

pub fn c4_site() -> Site {
    cycle_site(4, "e", "v")
}

pub fn c6_site() -> Site {
    cycle_site(6, "f", "w")
}

/// Two disjoint copies of `C4`: `e/v` and `f/w`.
pub fn two_c4_site() -> Site {
    let mut objects: Vec<String> = Vec::new();
    let mut rel: Vec<(String, String)> = Vec::new();
    for (e, v) in [("e", "v"), ("f", "w")] {
        for i in 1..=4 {
            objects.push(format!("{e}{i}"));
            objects.push(format!("{v}{i}"));
            rel.push((format!("{v}{i}"), format!("{e}{i}")));
            rel.push((format!("{v}{i}"), format!("{e}{}", wrap(i + 1, 4))));
        }
    }
    let o: Vec<&str> = objects.iter().map(String::as_str).collect();
    let r: Vec<(&str, &str)> = rel.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Site::minimal(FiniteCategory::poset(&o, &r).unwrap())
}

pub fn p3_site() -> Site {
    let cat = FiniteCategory::poset(
        &["a1", "a2", "a3", "p0", "p1", "p2", "p3"],
        &[
            ("p0", "a1"),
            ("p1", "a1"),
            ("p1", "a2"),
            ("p2", "a2"),
            ("p2", "a3"),
            ("p3", "a3"),
        ],
    )
    .unwrap();
    Site::minimal(cat)
}

pub fn bigon_site() -> Site {
    let cat = FiniteCategory::poset(
        &["U", "V", "a", "b"],
        &[("a", "U"), ("b", "U"), ("a", "V"), ("b", "V")],
    )
    .unwrap();
    Site::minimal(cat)
}

fn sieve_of(cat: &FiniteCategory, target: &str, gens: &[&str]) -> Sieve {
    let t = cat.object(target).unwrap();
    let g: Vec<ArrowId> = gens.iter().map(|n| cat.arrow(n).unwrap()).collect();
    generate_sieve(cat, t, &g).unwrap()
}

/// `C4` where each edge is also covered by its two vertices.
pub fn c4_fine_site() -> Site {
    let cat = cycle_category(4, "e", "v");
    let mut raw = Site::minimal(cat.clone()).raw_covers();
    for i in 1..=4 {
        let e = format!("e{i}");
        let a = format!("v{i}>e{i}");
        let b = format!("v{}>e{i}", wrap(i + 3, 4));
        raw[cat.object(&e).unwrap().0].push(sieve_of(&cat, &e, &[&a, &b]));
    }
    Site::new(cat, &raw).expect("fine topology")
}

/// The minimal topology plus the empty sieve on `v1`.
pub fn c4_degenerate_site() -> Site {
    let cat = cycle_category(4, "e", "v");
    let mut raw = Site::minimal(cat.clone()).raw_covers();
    let v1 = cat.object("v1").unwrap();
    raw[v1.0].push(Sieve::empty(v1));
    Site::new(cat, &raw).expect("degenerate topology")
}

/// Covers where `{v1>e1}` covers `e1` but nothing else changes; unstable.
pub fn c4_unstable_covers(cat: &FiniteCategory) -> Vec<Vec<Sieve>> {
    let mut raw = Site::minimal(cat.clone()).raw_covers();
    raw[cat.object("e1").unwrap().0].push(sieve_of(cat, "e1", &["v1>e1"]));
    raw
}

/// Rotation of `C_n` by `k` steps on a cycle category with any prefixes.
pub fn cycle_rotation(cat: &FiniteCategory, n: usize, edge: &str, vertex: &str, k: usize) -> Functor {
    let rename = |name: &str| -> String {
        let (p, i) = if let Some(i) = name.strip_prefix(edge) {
            (edge, i)
        } else {
            (vertex, name.strip_prefix(vertex).unwrap())
        };
        let i: usize = i.parse().unwrap();
        format!("{p}{}", wrap(i + k, n))
    };
    let objects: Vec<ObjId> = cat
        .objects()
        .map(|o| cat.object(&rename(cat.object_name(o))).unwrap())
        .collect();
    let arrows = cat
        .arrow_ids()
        .map(|a| {
            let (s, d) = (objects[cat.src(a).0], objects[cat.dst(a).0]);
            cat.hom(s, d)[0]
        })
        .collect();
    Functor { objects, arrows }
}

pub fn c4_rotation(cat: &FiniteCategory, k: usize) -> Functor {
    cycle_rotation(cat, 4, "e", "v", k)
}

/// The reflection `f_i ↦ f_{n+1-i}`, `w_i ↦ w_{n-i}` of `C_n`.
pub fn cycle_reflection(cat: &FiniteCategory, n: usize, edge: &str, vertex: &str) -> Functor {
    let objects: Vec<ObjId> = cat
        .objects()
        .map(|o| {
            let name = cat.object_name(o);
            let target = if let Some(i) = name.strip_prefix(edge) {
                let i: usize = i.parse().unwrap();
                format!("{edge}{}", n + 1 - i)
            } else {
                let i: usize = name.strip_prefix(vertex).unwrap().parse().unwrap();
                format!("{vertex}{}", wrap(n - i, n))
            };
            cat.object(&target).unwrap()
        })
        .collect();
    let arrows = cat
        .arrow_ids()
        .map(|a| cat.hom(objects[cat.src(a).0], objects[cat.dst(a).0])[0])
        .collect();
    Functor { objects, arrows }
}

pub fn constant_sheaf(cat: &FiniteCategory, n: usize) -> Presheaf {
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    Presheaf::constant(cat, &labels)
}

/// Fiber `0..n` everywhere; every restriction is the identity except the one
/// along `v4 > e1`, which is `twist`.
pub fn twisted_c4_sheaf(cat: &FiniteCategory, twist: &[usize]) -> Presheaf {
    let n = twist.len();
    let mut f = constant_sheaf(cat, n);
    f.set_restriction(cat.arrow("v4>e1").unwrap(), twist.to_vec());
    f
}

/// The transposition local system on `C4`.
pub fn swap_sheaf(cat: &FiniteCategory) -> Presheaf {
    twisted_c4_sheaf(cat, &[1, 0])
}

/// The 3-cycle local system on `C4`.
pub fn rot3_sheaf(cat: &FiniteCategory) -> Presheaf {
    twisted_c4_sheaf(cat, &[1, 2, 0])
}

/// `F(e1) = {0,1}`, singletons elsewhere; not locally constant on `C4`.
pub fn collapsing_sheaf(cat: &FiniteCategory) -> Presheaf {
    let mut f = constant_sheaf(cat, 1);
    let e1 = cat.object("e1").unwrap();
    f.set_values(e1, vec!["0".into(), "1".into()]);
    for &a in cat.arrows_into(e1) {
        if cat.is_identity(a) {
            f.set_restriction(a, vec![0, 1]);
        } else {
            f.set_restriction(a, vec![0, 0]);
        }
    }
    f
}

pub fn edges(site: &Site, n: usize, prefix: &str) -> CoveringFamily {
    let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    CoveringFamily::from_names(site, &refs).unwrap()
}

/// `⟨ρ⟩` acting on `C4` (generator named `rho`).
pub fn c4_rotation_group() -> AutomorphismGroup {
    let site = c4_site();
    let rho = c4_rotation(&site.category, 1);
    AutomorphismGroup::generate(site, vec![("rho".into(), rho)]).unwrap()
}

pub fn trivial_group(site: Site) -> AutomorphismGroup {
    AutomorphismGroup::generate(site, vec![]).unwrap()
}

/// Chart functor wrapping arc `f_i` of `C_n` onto arc `e_k`, `k = i mod m`.
pub fn wrap_chart(domain: &Site, model: &FiniteCategory, n: usize, m: usize, i: usize) -> Functor {
    let d = &domain.category;
    let x = d.object(&format!("f{i}")).unwrap();
    let slice = crate::fincat::slice_category(d, x).unwrap();
    let k = wrap(i, m);
    let objects: Vec<ObjId> = slice
        .category
        .objects()
        .map(|o| {
            let u = slice.object_over(o);
            let src = d.object_name(d.src(u));
            let target = if src.starts_with('f') {
                format!("e{k}")
            } else {
                let j: usize = src[1..].parse().unwrap();
                if j == i {
                    format!("v{k}")
                } else {
                    debug_assert_eq!(j, wrap(i + n - 1, n));
                    format!("v{}", wrap(k + m - 1, m))
                }
            };
            model.object(&target).unwrap()
        })
        .collect();
    let arrows = slice
        .category
        .arrow_ids()
        .map(|a| model.hom(objects[slice.category.src(a).0], objects[slice.category.dst(a).0])[0])
        .collect();
    Functor { objects, arrows }
}

/// WRAP(n, m): `C_n` modelled on `(C_m, ⟨ρ⟩)`, transitions left for derivation.
pub fn wrap_atlas_data(n: usize, m: usize) -> AtlasData {
    let domain = cycle_site(n, "f", "w");
    let model_site = cycle_site(m, "e", "v");
    let rho = cycle_rotation(&model_site.category, m, "e", "v", 1);
    let model = AutomorphismGroup::generate(model_site, vec![("rho".into(), rho)]).unwrap();
    let family = edges(&domain, n, "f");
    let charts = (1..=n)
        .map(|i| wrap_chart(&domain, &model.site.category, n, m, i))
        .collect();
    AtlasData {
        site: domain,
        model,
        family,
        charts,
        transitions: Default::default(),
    }
}

/// Charts of the interval `P3` placed along three consecutive arcs of `C4`.
pub fn interval_atlas_data() -> AtlasData {
    let domain = p3_site();
    let model = c4_rotation_group();
    let family = CoveringFamily::from_names(&domain, &["a1", "a2", "a3"]).unwrap();
    let d = &domain.category;
    let c = &model.site.category;
    let charts = (1..=3)
        .map(|i| {
            let slice = crate::fincat::slice_category(d, d.object(&format!("a{i}")).unwrap()).unwrap();
            let objects: Vec<ObjId> = slice
                .category
                .objects()
                .map(|o| {
                    let src = d.object_name(d.src(slice.object_over(o)));
                    let target = if src.starts_with('a') {
                        format!("e{i}")
                    } else {
                        let j: usize = src[1..].parse().unwrap();
                        format!("v{}", wrap(j, 4))
                    };
                    c.object(&target).unwrap()
                })
                .collect();
            let arrows = slice
                .category
                .arrow_ids()
                .map(|a| c.hom(objects[slice.category.src(a).0], objects[slice.category.dst(a).0])[0])
                .collect();
            Functor { objects, arrows }
        })
        .collect();
    AtlasData {
        site: domain,
        model,
        family,
        charts,
        transitions: Default::default(),
    }
}
