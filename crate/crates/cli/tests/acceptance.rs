//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each check compares library output against a brute-force oracle
//! written here from first principles.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use toposforge::fincat::{FiniteCategory, Functor, ObjId};
use toposforge::fixtures;
use toposforge::geostruct::{
    developing, enumerate_representations, flat_bundle, representation_distance, structural_bundle, structure_from_section,
    structure_holonomy, structure_sheaf, tautological_section, validate_atlas, validate_section, Atlas, Section,
};
use toposforge::holonomy::{
    compare_groups, enumerate_local_systems, holonomy_group, is_simply_connected_bounded, refinement_invariance_check,
    transition_isos, FiniteGroup, Perm, TransitionSystem, DEFAULT_CLOSURE_CAP,
};
use toposforge::nerve::{compose_paths, invert_path, nerve_graph, reduce_walk, NerveGraph, Walk};
use toposforge::sheaf::{is_sheaf, Presheaf};
use toposforge::site::{validate_topology, CoveringFamily, Sieve, Site, SiteError};

use toposforge_cli::workspace::{parse_workspace, serialize};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const CAP: usize = DEFAULT_CLOSURE_CAP;

// ---------------------------------------------------------------- oracles

/// All assignments `r ↦ x_r ∈ F(dom r)` over a sieve that satisfy
/// `x_{r∘g} = F(g)(x_r)`.
fn oracle_matching_families(cat: &FiniteCategory, f: &Presheaf, sieve: &Sieve) -> Vec<Vec<usize>> {
    let arrows: Vec<_> = sieve.arrows.iter().copied().collect();
    let sizes: Vec<usize> = arrows.iter().map(|&a| f.size(cat.src(a))).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; arrows.len()];
    if sizes.contains(&0) {
        return out;
    }
    loop {
        let ok = arrows.iter().enumerate().all(|(p, &r)| {
            cat.arrows_into(cat.src(r)).iter().all(|&g| {
                let rg = cat.compose(r, g).unwrap();
                let q = arrows.iter().position(|&a| a == rg).expect("sieve is closed");
                choice[q] == f.restrict(g, choice[p])
            })
        });
        if ok {
            out.push(choice.clone());
        }
        let mut k = 0;
        loop {
            if k == arrows.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Sheaf iff sections map bijectively onto matching families for every
/// covering sieve. Returns the first failure as `(object, sections, families)`.
fn oracle_is_sheaf(site: &Site, f: &Presheaf) -> Option<(ObjId, usize, usize)> {
    let cat = &site.category;
    for s in cat.objects() {
        for r in site.topology.covers(s) {
            let fams = oracle_matching_families(cat, f, r);
            let images: BTreeSet<Vec<usize>> = (0..f.size(s))
                .map(|x| r.arrows.iter().map(|&a| f.restrict(a, x)).collect())
                .collect();
            if images.len() != f.size(s) || fams.len() != f.size(s) {
                return Some((s, f.size(s), fams.len()));
            }
        }
    }
    None
}

/// `t: F(X_j) → F(X_i)` agreeing under every pair `W → X_i`, `W → X_j`;
/// `None` when the members share nothing below them.
fn oracle_transport(cat: &FiniteCategory, f: &Presheaf, xi: ObjId, xj: ObjId) -> Option<Perm> {
    let spans: Vec<_> = cat
        .objects()
        .flat_map(|w| {
            let a = cat.hom(w, xi);
            let b = cat.hom(w, xj);
            a.iter().flat_map(|&u| b.iter().map(move |&v| (u, v))).collect::<Vec<_>>()
        })
        .collect();
    if spans.is_empty() {
        return None;
    }
    let map = (0..f.size(xj))
        .map(|x| {
            let ys: Vec<usize> = (0..f.size(xi))
                .filter(|&y| spans.iter().all(|&(u, v)| f.restrict(u, y) == f.restrict(v, x)))
                .collect();
            assert_eq!(ys.len(), 1, "overlap transport is a bijection");
            ys[0]
        })
        .collect();
    Some(Perm(map))
}

/// Holonomies of every closed walk of length `≤ max_len` at `base`.
fn oracle_walk_group(site: &Site, f: &Presheaf, members: &[ObjId], base: usize, max_len: usize) -> BTreeSet<Perm> {
    let cat = &site.category;
    let n = members.len();
    let mut t: BTreeMap<(usize, usize), Perm> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                if let Some(p) = oracle_transport(cat, f, members[i], members[j]) {
                    t.insert((i, j), p);
                }
            }
        }
    }
    let id = Perm::identity(f.size(members[base]));
    let mut out = BTreeSet::from([id.clone()]);
    // (current vertex, holonomy so far read from the base end)
    let mut frontier = vec![(base, id)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (v, h) in frontier {
            for w in 0..n {
                if let Some(p) = t.get(&(v, w)) {
                    let h2 = h.after(p);
                    if w == base {
                        out.insert(h2.clone());
                    }
                    next.push((w, h2));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Composite of transports along a raw walk, stutters read as identities.
fn oracle_walk_holonomy(ts: &TransitionSystem, w: &[usize]) -> Perm {
    let mut acc = Perm::identity(ts.fibers[w[0]]);
    for p in w.windows(2) {
        let t = if p[0] == p[1] {
            Perm::identity(ts.fibers[p[0]])
        } else {
            ts.transport(p[0], p[1]).expect("adjacent")
        };
        acc = acc.after(&t);
    }
    acc
}

fn oracle_cocycle(a: &Atlas) -> bool {
    let n = a.family.len();
    let d = &a.site.category;
    let m = &a.family.members;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let triple = d.objects().any(|w| [i, j, k].iter().all(|&t| !d.hom(w, m[t]).is_empty()));
                if !triple {
                    continue;
                }
                let (Some(&ij), Some(&jk), Some(&ik)) =
                    (a.transitions.get(&(i, j)), a.transitions.get(&(j, k)), a.transitions.get(&(i, k)))
                else {
                    return false;
                };
                if a.model.mul(ij, jk) != ik {
                    return false;
                }
            }
        }
    }
    true
}

fn oracle_hom_count(h: &FiniteGroup, g: &FiniteGroup) -> (usize, Vec<Vec<usize>>) {
    let n = h.order();
    let mut found = Vec::new();
    let mut map = vec![0usize; n];
    loop {
        if (0..n).all(|a| (0..n).all(|b| map[h.mul(a, b)] == g.mul(map[a], map[b]))) {
            found.push(map.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return (found.len(), found);
            }
            map[k] += 1;
            if map[k] < g.order() {
                break;
            }
            map[k] = 0;
            k += 1;
        }
    }
}

fn wrap(n: usize) -> Atlas {
    validate_atlas(&fixtures::wrap_atlas_data(n, 4)).expect("WRAP atlas")
}

fn rho_pow(a: &Atlas, k: usize) -> usize {
    let rho = a.model.by_label("rho").unwrap();
    (0..k % 4).fold(a.model.identity(), |acc, _| a.model.mul(acc, rho))
}

fn image_group(a: &Atlas, image: &[usize]) -> FiniteGroup {
    let pos: BTreeMap<usize, usize> = image.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let table = image
        .iter()
        .map(|&x| image.iter().map(|&y| pos[&a.model.mul(x, y)]).collect())
        .collect();
    FiniteGroup::from_table(image.iter().map(|&g| a.model.label(g).to_string()).collect(), table)
}

// ---------------------------------------------------------------- criteria

fn axioms() -> Check {
    for (name, site) in [
        ("P3", fixtures::p3_site()),
        ("C4", fixtures::c4_site()),
        ("C6", fixtures::c6_site()),
    ] {
        let cat = site.category.clone();
        // The minimal topology: only maximal sieves cover.
        let raw: Vec<Vec<Sieve>> = cat.objects().map(|o| vec![Sieve::maximal(&cat, o)]).collect();
        validate_topology(&cat, &raw).map_err(|e| format!("{name}: {e}"))?;
    }
    let cat = fixtures::c4_site().category;
    match validate_topology(&cat, &fixtures::c4_unstable_covers(&cat)) {
        Err(SiteError::NotStable { arrow, .. }) if arrow == "v4>e1" => {}
        other => return Err(format!("unstable fixture gave {other:?}")),
    }
    Ok("J_min valid on P3, C4, C6; NOT_STABLE along v4>e1".into())
}

fn sheaf_oracle() -> Check {
    let sheaves = {
        let cat = fixtures::c4_site().category;
        vec![
            ("const", fixtures::constant_sheaf(&cat, 2)),
            ("swap", fixtures::swap_sheaf(&cat)),
            ("rot3", fixtures::rot3_sheaf(&cat)),
        ]
    };
    let topologies = [
        ("min", fixtures::c4_site()),
        ("fine", fixtures::c4_fine_site()),
        ("degenerate", fixtures::c4_degenerate_site()),
    ];
    let mut pairs = 0;
    for (tn, site) in &topologies {
        for (sn, f) in &sheaves {
            let lib = is_sheaf(site, f);
            let oracle = oracle_is_sheaf(site, f);
            ensure(lib.holds == oracle.is_none(), || format!("{sn}/{tn}: library {} oracle {oracle:?}", lib.holds))?;
            pairs += 1;
        }
    }
    let fine = &topologies[1].1;
    let w = is_sheaf(fine, &sheaves[1].1).witness.ok_or("SWAP is a sheaf for fine")?;
    let e1 = fine.category.object("e1").unwrap();
    ensure(w.object == e1 && w.sections == 2 && w.families == 4, || format!("witness {w:?}"))?;
    let oracle = oracle_is_sheaf(fine, &sheaves[1].1).unwrap();
    ensure(oracle == (e1, 2, 4), || format!("oracle witness {oracle:?}"))?;
    Ok(format!("{pairs} pairs agree; SWAP/fine fails at e1 with 2 vs 4"))
}

fn holonomy_truth() -> Check {
    let site = fixtures::c4_site();
    let fam = fixtures::edges(&site, 4, "e");
    let cat = &site.category;
    let mut got = Vec::new();
    for (name, f, order) in [
        ("SWAP", fixtures::swap_sheaf(cat), 2),
        ("ROT3", fixtures::rot3_sheaf(cat), 3),
        ("const", fixtures::constant_sheaf(cat, 2), 1),
    ] {
        let g = holonomy_group(&site, &f, &fam, 0, CAP).map_err(|e| e.to_string())?;
        let lib: BTreeSet<Perm> = g.elements.iter().cloned().collect();
        let oracle = oracle_walk_group(&site, &f, &fam.members, 0, 12);
        ensure(g.order() == order, || format!("{name}: order {}", g.order()))?;
        ensure(lib == oracle, || format!("{name}: {lib:?} vs walks {oracle:?}"))?;
        got.push(format!("{name}={}", g.order()));
    }
    Ok(format!("{} match closed walks of length <= 12", got.join(", ")))
}

fn random_perm(rng: &mut StdRng, n: usize) -> Perm {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Perm(v)
}

fn refinement() -> Check {
    let site = fixtures::c4_site();
    let cat = &site.category;
    let swap = fixtures::swap_sheaf(cat);
    let edges = fixtures::edges(&site, 4, "e");
    let all = CoveringFamily::all_objects(&site).map_err(|e| e.to_string())?;
    ensure(all.len() == 8, || "all-objects family".into())?;
    let r = refinement_invariance_check(&site, &swap, &edges, &all, CAP).map_err(|e| e.to_string())?;
    ensure(r.isomorphic && r.order_a == 2 && r.order_b == 2, || format!("{r:?}"))?;
    let reference = holonomy_group(&site, &swap, &edges, 0, CAP).unwrap();
    let mut rng = StdRng::seed_from_u64(4);
    for trial in 0..100 {
        let fam = if trial % 2 == 0 { &edges } else { &all };
        let mut ts = transition_isos(&site, &swap, fam).unwrap();
        for k in 0..fam.len() {
            if rng.gen_bool(0.5) {
                let s = random_perm(&mut rng, 2);
                ts.gauge(k, &s);
            }
        }
        let g = ts.holonomy_group(rng.gen_range(0..fam.len()), CAP).unwrap();
        let c = compare_groups(&reference, &g).unwrap();
        ensure(c.isomorphic, || format!("gauge trial {trial}: orders {} vs {}", c.order_a, c.order_b))?;
    }
    Ok("edges ~ all-8 (order 2); 100 gauges keep the class".into())
}

fn random_walk(rng: &mut StdRng, g: &NerveGraph) -> Vec<usize> {
    let mut w = vec![rng.gen_range(0..g.num_vertices())];
    for _ in 0..rng.gen_range(0..24) {
        let v = *w.last().unwrap();
        if rng.gen_bool(0.25) || g.neighbors(v).is_empty() {
            w.push(v);
        } else {
            w.push(*g.neighbors(v).choose(rng).unwrap());
        }
    }
    w
}

fn walk_laws() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let c4 = fixtures::c4_site();
    let c6 = fixtures::c6_site();
    let p3 = fixtures::p3_site();
    let mut systems: Vec<(&str, TransitionSystem)> = vec![
        ("C4/edges", transition_isos(&c4, &fixtures::swap_sheaf(&c4.category), &fixtures::edges(&c4, 4, "e")).unwrap()),
        (
            "C4/all",
            transition_isos(&c4, &fixtures::rot3_sheaf(&c4.category), &CoveringFamily::all_objects(&c4).unwrap()).unwrap(),
        ),
    ];
    for (name, site, fam) in [
        ("C6/arcs", &c6, fixtures::edges(&c6, 6, "f")),
        ("P3/arcs", &p3, CoveringFamily::from_names(&p3, &["a1", "a2", "a3"]).unwrap()),
    ] {
        let graph = nerve_graph(site, &fam).unwrap();
        let t: BTreeMap<(usize, usize), Perm> =
            graph.edges.iter().map(|&e| (e, random_perm(&mut rng, 3))).collect();
        systems.push((name, TransitionSystem::from_transports(graph.clone(), vec![3; graph.num_vertices()], &t)));
    }
    for (name, ts) in &systems {
        for _ in 0..1000 {
            let w = random_walk(&mut rng, &ts.graph);
            let raw = oracle_walk_holonomy(ts, &w);
            let reduced = reduce_walk(&Walk(w.clone()));
            let lib = ts.holonomy_of_walk(&reduced.walk()).map_err(|e| e.to_string())?;
            ensure(raw == lib, || format!("{name}: hol(reduce {w:?}) differs"))?;
            let back = compose_paths(&reduced, &invert_path(&reduced)).unwrap();
            let h = ts.holonomy_of_walk(&back.walk()).unwrap();
            ensure(h.is_identity(), || format!("{name}: w * w^-1 = {h} for {w:?}"))?;
            let mut there_and_back = w.clone();
            there_and_back.extend(w.iter().rev().skip(1));
            ensure(oracle_walk_holonomy(ts, &there_and_back).is_identity(), || format!("{name}: oracle backtrack"))?;
        }
    }
    Ok(format!("1000 walks on each of {} nerves", systems.len()))
}

fn simple_connectedness() -> Check {
    let p3 = fixtures::p3_site();
    let arcs = CoveringFamily::from_names(&p3, &["a1", "a2", "a3"]).unwrap();
    let r = is_simply_connected_bounded(&p3, &arcs, 3, CAP).map_err(|e| e.to_string())?;
    ensure(r.holds, || "P3 reported not simply connected".into())?;
    let p3_checked = r.checked;
    // Oracle: every transport assignment on the tree nerve has trivial holonomy.
    let graph = nerve_graph(&p3, &arcs).unwrap();
    for n in 1..=3 {
        for ts in enumerate_local_systems(&graph, n, false) {
            let ok = (0..graph.num_vertices()).all(|b| oracle_walk_group_on(&ts, b, 8).len() == 1);
            ensure(ok, || "P3 local system with holonomy".into())?;
        }
    }
    let c4 = fixtures::c4_site();
    let edges = fixtures::edges(&c4, 4, "e");
    let r = is_simply_connected_bounded(&c4, &edges, 3, CAP).map_err(|e| e.to_string())?;
    ensure(!r.holds, || "C4 reported simply connected".into())?;
    let w = r.witness.ok_or("no witness")?;
    let swap = transition_isos(&c4, &fixtures::swap_sheaf(&c4.category), &edges).unwrap();
    let root = w.graph.components()[0][0];
    let witnesses: Vec<TransitionSystem> = enumerate_local_systems(&w.graph, 2, true)
        .into_iter()
        .filter(|ts| !ts.holonomy_group(root, CAP).unwrap().is_trivial())
        .collect();
    ensure(witnesses.contains(&swap.tree_normalized(root)), || "SWAP not among the fiber-2 witnesses".into())?;
    ensure(w == swap.tree_normalized(root), || "reported witness is not SWAP up to gauge".into())?;
    Ok(format!("P3 holds for k=3 ({p3_checked} systems); C4 fails with SWAP"))
}

/// Closed-walk holonomies of an abstract local system.
fn oracle_walk_group_on(ts: &TransitionSystem, base: usize, max_len: usize) -> BTreeSet<Perm> {
    let mut out = BTreeSet::from([Perm::identity(ts.fibers[base])]);
    let mut frontier = vec![vec![base]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in frontier {
            for &v in ts.graph.neighbors(*w.last().unwrap()) {
                let mut w2 = w.clone();
                w2.push(v);
                if v == base {
                    out.insert(oracle_walk_holonomy(ts, &w2));
                }
                next.push(w2);
            }
        }
        frontier = next;
    }
    out
}

fn cocycle() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let mut corruptions = 0;
    for n in [4, 6] {
        let base = wrap(n);
        ensure(oracle_cocycle(&base), || format!("WRAP({n},4) cocycle"))?;
        let mut atlases = vec![base.clone()];
        for _ in 0..50 {
            let gauge: Vec<usize> = (0..n).map(|_| rng.gen_range(0..base.model.order())).collect();
            let mut data = base.to_data();
            data.transitions.clear();
            for (i, c) in data.charts.iter_mut().enumerate() {
                *c = base.model.element(gauge[i]).after(c);
            }
            let a = validate_atlas(&data).map_err(|e| format!("gauged WRAP({n},4): {e}"))?;
            ensure(oracle_cocycle(&a), || format!("gauged WRAP({n},4) cocycle"))?;
            for (&(i, j), &g) in &a.transitions {
                let expect = base.model.mul(base.model.mul(gauge[i], base.transition(i, j)), base.model.inv(gauge[j]));
                ensure(g == expect, || format!("gauged g_{i}{j}"))?;
            }
            atlases.push(a);
        }
        for a in &atlases {
            for (&(i, j), &g) in &a.transitions {
                if i == j {
                    continue;
                }
                for bad in (0..a.model.order()).filter(|&x| x != g) {
                    let mut data = a.to_data();
                    data.transitions.insert((i, j), bad);
                    let code = validate_atlas(&data).err().map(|e| e.code());
                    ensure(code == Some("COCYCLE_VIOLATION"), || format!("WRAP({n},4) ({i},{j})->{bad}: {code:?}"))?;
                    corruptions += 1;
                }
            }
        }
    }
    Ok(format!("WRAP44/64 + 50 gauges each; {corruptions} corruptions caught"))
}

fn cg_holonomy() -> Check {
    let a64 = wrap(6);
    let a44 = wrap(4);
    let img = structure_holonomy(&a64, 0).map_err(|e| e.to_string())?.image;
    let expect: Vec<usize> = {
        let mut v = vec![a64.model.identity(), rho_pow(&a64, 2)];
        v.sort();
        v
    };
    ensure(img == expect, || format!("WRAP64 image {img:?}"))?;
    ensure(structure_holonomy(&a44, 0).unwrap().image == [a44.model.identity()], || "WRAP44 not trivial".into())?;
    for a in [&a64, &a44] {
        let f = structure_sheaf(a);
        for base in 0..a.family.len() {
            let image = structure_holonomy(a, base).unwrap().image;
            let left: BTreeSet<Perm> = image
                .iter()
                .map(|&g| Perm((0..a.model.order()).map(|x| a.model.mul(g, x)).collect()))
                .collect();
            let h = holonomy_group(&a.site, &f.presheaf, &a.family, base, CAP).map_err(|e| e.to_string())?;
            let got: BTreeSet<Perm> = h.elements.iter().cloned().collect();
            ensure(got == left, || format!("base {base}: sheaf holonomy differs"))?;
            // Brute-force walk products on the atlas nerve.
            let walks = oracle_walk_group(&a.site, &f.presheaf, &a.family.members, base, 8);
            ensure(walks == left, || format!("base {base}: walk oracle differs"))?;
        }
    }
    Ok("WRAP64 image <rho^2>, WRAP44 trivial; matches structure-sheaf holonomy".into())
}

fn germ_components_oracle(a: &Atlas) -> usize {
    let f = structure_sheaf(a).presheaf;
    let d = &a.site.category;
    let mut germs = Vec::new();
    for w in d.objects() {
        for s in 0..f.size(w) {
            germs.push((w, s));
        }
    }
    let index: BTreeMap<(ObjId, usize), usize> = germs.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let mut parent: Vec<usize> = (0..germs.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for h in d.arrow_ids() {
        for s in 0..f.size(d.dst(h)) {
            let a = find(&mut parent, index[&(d.dst(h), s)]);
            let b = find(&mut parent, index[&(d.src(h), f.restrict(h, s))]);
            parent[a] = b;
        }
    }
    (0..germs.len()).filter(|&x| find(&mut parent, x) == x).count()
}

fn developing_check() -> Check {
    let a = wrap(6);
    let f = structure_sheaf(&a);
    let space = developing(&a, &f, None).map_err(|e| e.to_string())?;
    ensure(space.components.len() == germ_components_oracle(&a), || "component count vs union-find".into())?;
    let all: BTreeSet<ObjId> = a.model.site.category.objects().collect();
    for c in &space.components {
        ensure(c.degree == 2 && c.covering, || format!("degree {} covering {}", c.degree, c.covering))?;
        ensure(c.member_germs == 12, || format!("{} arc germs", c.member_germs))?;
        ensure(c.wrapping == Some(3), || format!("wrapping {:?}", c.wrapping))?;
        ensure(c.dev_local_iso && c.dev_images == all, || "Dev not a local iso onto C4".into())?;
    }
    let b = wrap(4);
    let f = structure_sheaf(&b);
    let space = developing(&b, &f, None).map_err(|e| e.to_string())?;
    ensure(space.components.len() == b.model.order(), || format!("WRAP44: {} components", space.components.len()))?;
    ensure(germ_components_oracle(&b) == 4, || "WRAP44 union-find".into())?;
    ensure(space.components.iter().all(|c| c.degree == 1 && c.covering), || "WRAP44 components not trivial".into())?;
    Ok("WRAP64: degree-2 cover, 12 arcs, wraps 3x, locally iso; WRAP44: 4 sheets".into())
}

fn round_trip() -> Check {
    for n in [4, 6] {
        let a = wrap(n);
        let bundle = structural_bundle(&a);
        ensure(bundle.clutching_is_cocycle(), || "clutching".into())?;
        let b = structure_from_section(&bundle, &tautological_section(&bundle)).map_err(|e| e.to_string())?;
        let h0 = structure_holonomy(&a, 0).unwrap().image;
        let h1 = structure_holonomy(&b, 0).unwrap().image;
        ensure(h0 == h1, || format!("WRAP({n},4): {h0:?} -> {h1:?}"))?;
    }
    let a = wrap(4);
    let bundle = structural_bundle(&a);
    let c = &a.model.site.category;
    let v1 = c.object("v1").unwrap();
    let collapse = Section {
        maps: a
            .slices
            .iter()
            .map(|s| Functor {
                objects: vec![v1; s.category.num_objects()],
                arrows: vec![c.id(v1); s.category.num_arrows()],
            })
            .collect(),
    };
    let r = validate_section(&bundle, &collapse).map_err(|e| e.to_string())?;
    let code = r.witness.as_ref().map(|w| w.code());
    ensure(r.compatible && code == Some("NOT_TRANSVERSE"), || format!("collapse: {r:?}"))?;
    Ok("holonomy preserved on WRAP44/64; collapse is NOT_TRANSVERSE".into())
}

fn deformations() -> Check {
    let a = wrap(6);
    let g = &a.model;
    let gf = g.as_finite_group();
    let h2 = image_group(&a, &structure_holonomy(&a, 0).unwrap().image);
    let c4 = fixtures::c4_site();
    let rot3 = holonomy_group(&c4, &fixtures::rot3_sheaf(&c4.category), &fixtures::edges(&c4, 4, "e"), 0, CAP).unwrap();
    let h3 = FiniteGroup::from_permutations(&rot3);
    let mut counts = Vec::new();
    for (h, expect) in [(&h2, 2), (&h3, 1)] {
        let reps = enumerate_representations(h, g).map_err(|e| e.to_string())?;
        let (n, oracle) = oracle_hom_count(h, &gf);
        let lib: BTreeSet<Vec<usize>> = reps.iter().cloned().collect();
        ensure(reps.len() == expect && n == expect, || format!("|Hom(Z{}, Z4)| = {} (oracle {n})", h.order(), reps.len()))?;
        ensure(lib == oracle.into_iter().collect(), || "representation sets differ".into())?;
        for rep in &reps {
            let fb = flat_bundle(24, h, g, rep).map_err(|e| e.to_string())?;
            ensure(fb.action_law_holds, || "action law flag".into())?;
            for x in 0..h.order() {
                for y in 0..h.order() {
                    let lhs = &fb.gammas[h.mul(x, y)];
                    let composite: Vec<usize> = (0..lhs.degree()).map(|p| fb.gammas[x].apply(fb.gammas[y].apply(p))).collect();
                    ensure(lhs.0 == composite, || format!("gamma law at ({x},{y})"))?;
                }
            }
        }
        counts.push(reps.len());
    }
    Ok(format!("|Hom(Z2,Z4)| = {}, |Hom(Z3,Z4)| = {}; action law on all pairs", counts[0], counts[1]))
}

fn discrete_distance() -> Check {
    let a = wrap(6);
    let gf = a.model.as_finite_group();
    let mut pairs = 0;
    for h in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(4), FiniteGroup::cyclic(3), gf.clone()] {
        let (_, reps) = oracle_hom_count(&h, &gf);
        for r1 in &reps {
            for r2 in &reps {
                if representation_distance(&h, r1, r2) == 0 {
                    ensure(r1 == r2, || format!("{r1:?} ~ {r2:?} at distance 0"))?;
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} representation pairs"))
}

fn cli() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["c4.json", "wrap.json", "p3.json", "bigon.json"] {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string())?;
        let ws = parse_workspace(&text, CAP).map_err(|e| format!("{name}: {e}"))?;
        let out = serialize(&ws);
        ensure(out == text, || format!("{name} is not byte-identical after a round trip"))?;
        let back = parse_workspace(&out, CAP).map_err(|e| e.to_string())?;
        ensure(serialize(&back) == out, || format!("{name}: second round trip"))?;
    }
    let bin = env!("CARGO_BIN_EXE_toposforge");
    let c4 = dir.join("c4.json");
    let wrapf = dir.join("wrap.json");
    let run = |ws: &Path, args: &[&str]| {
        let o = Command::new(bin)
            .arg("-w")
            .arg(ws)
            .args(args)
            .env_remove("TOPOSFORGE_CLOSURE_CAP")
            .output()
            .expect("binary runs");
        (o.status.code(), String::from_utf8_lossy(&o.stdout).into_owned())
    };
    let (code, out) = run(&c4, &["holonomy", "--sheaf", "swap", "--family", "edges", "--base", "e1"]);
    ensure(code == Some(0) && out.starts_with("holonomy group order 2\n"), || format!("holonomy: {code:?} {out}"))?;
    let (code, out) = run(&wrapf, &["cg-check", "--atlas", "wrap64"]);
    ensure(code == Some(0) && out.starts_with("cocycle verified; holonomy image order 2\n"), || format!("cg-check: {code:?} {out}"))?;
    let (code, out) = run(&c4, &["--json", "sheaf-check", "--sheaf", "swap", "--topology", "fine"]);
    let report: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let w = &report["witnesses"][0];
    ensure(code == Some(1) && w["object"] == "e1" && w["cover"].is_array(), || format!("sheaf-check: {code:?} {out}"))?;
    let (code, _) = run(&dir.join("invalid/unknown_arrow.json"), &["check"]);
    ensure(code == Some(2), || format!("unknown arrow: {code:?}"))?;
    let (code, _) = run(&c4, &["holonomy", "--sheaf", "nope", "--family", "edges", "--base", "e1"]);
    ensure(code == Some(2), || format!("unknown name: {code:?}"))?;
    Ok("4 fixtures byte-identical; exit codes 0, 0, 1, 2, 2".into())
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("topology axioms", axioms),
        ("sheaf condition vs matching families", sheaf_oracle),
        ("holonomy ground truth", holonomy_truth),
        ("refinement invariance", refinement),
        ("stutter and backtrack laws", walk_laws),
        ("simple connectedness", simple_connectedness),
        ("cocycle condition", cocycle),
        ("structure holonomy", cg_holonomy),
        ("developing map", developing_check),
        ("bundle round trip", round_trip),
        ("deformation enumeration", deformations),
        ("discrete distance", discrete_distance),
        ("CLI round trip and exit codes", cli),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = t.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({ms} ms)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({ms} ms)", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
