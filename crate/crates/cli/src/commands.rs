//! Command implementations. Each returns an [`Outcome`]; a [`Diagnostic`]
//! error means the input itself was unusable.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use toposforge::fincat::{FiniteCategory, ObjId};
use toposforge::geostruct::{
    check_cg_morphism, check_ppa, developing, enumerate_representations, flat_bundle, representation_distance,
    structural_bundle, structure_from_section, structure_holonomy, structure_sheaf, tautological_section,
    validate_atlas, validate_section, Atlas, GeoError,
};
use toposforge::holonomy::{
    compare_groups, is_simply_connected_bounded, pro_pi1_presentation, transition_isos, FiniteGroup, Perm,
};
use toposforge::nerve::nerve_graph;
use toposforge::sheaf::{components, is_constant, is_sheaf, trivializing_family, Presheaf, DEFAULT_TRIVIALIZING_CAP};
use toposforge::site::{CoveringFamily, Sieve, Site};

use crate::workspace::{serialize, Diagnostic, Workspace};

/// What a command found: `holds` selects exit code 0 or 1.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub holds: bool,
    pub lines: Vec<String>,
    pub result: Value,
    pub witnesses: Vec<Value>,
}

impl Outcome {
    fn holds(lines: Vec<String>, result: Value) -> Self {
        Outcome {
            holds: true,
            lines,
            result,
            witnesses: Vec::new(),
        }
    }

    /// A failure carried by a library error code.
    fn failed(mut lines: Vec<String>, result: Value, code: &str, message: String, extra: Value) -> Self {
        lines.push(format!("fails [{code}]: {message}"));
        let mut w = json!({ "code": code, "message": message });
        if let (Value::Object(m), Value::Object(e)) = (&mut w, extra) {
            m.extend(e);
        }
        Outcome {
            holds: false,
            lines,
            result,
            witnesses: vec![w],
        }
    }
}

fn usage(code: &str, entity: String, message: String) -> Diagnostic {
    Diagnostic {
        code: code.to_string(),
        entity: Some(entity),
        pointer: String::new(),
        message,
        line: None,
        column: None,
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T, Diagnostic> {
    map.get(name).ok_or_else(|| {
        let known: Vec<&str> = map.keys().map(String::as_str).collect();
        usage(
            "UNRESOLVED_REFERENCE",
            format!("{kind} `{name}`"),
            format!("no {kind} named `{name}` (known: {})", known.join(", ")),
        )
    })
}

fn sieve_names(cat: &FiniteCategory, s: &Sieve) -> Vec<String> {
    s.arrows.iter().map(|&a| cat.arrow_name(a).to_string()).collect()
}

fn names(cat: &FiniteCategory, objs: &[ObjId]) -> Vec<String> {
    objs.iter().map(|&o| cat.object_name(o).to_string()).collect()
}

/// The family's site with the sheaf checked to live on its category.
fn sheaf_on<'a>(ws: &'a Workspace, sheaf: &str, topology: &str) -> Result<&'a Presheaf, Diagnostic> {
    let s = lookup(&ws.sheaves, "sheaf", sheaf)?;
    let t = lookup(&ws.topologies, "topology", topology)?;
    if s.on != t.on {
        return Err(usage(
            "UNRESOLVED_REFERENCE",
            format!("sheaf `{sheaf}`"),
            format!("sheaf lives on `{}` but topology `{topology}` is on `{}`", s.on, t.on),
        ));
    }
    Ok(&s.presheaf)
}

fn family<'a>(ws: &'a Workspace, name: &str) -> Result<(&'a Site, &'a CoveringFamily, &'a str), Diagnostic> {
    let f = lookup(&ws.families, "family", name)?;
    Ok((&ws.topologies[&f.topology].site, &f.family, f.topology.as_str()))
}

fn member_index(site: &Site, fam: &CoveringFamily, name: &str) -> Result<usize, Diagnostic> {
    site.category
        .object(name)
        .and_then(|o| fam.index_of(o))
        .ok_or_else(|| usage("UNRESOLVED_REFERENCE", format!("base `{name}`"), format!("`{name}` is not a family member")))
}

pub fn check(ws: &Workspace) -> Outcome {
    let mut lines = Vec::new();
    let mut result = serde_json::Map::new();
    let mut cats = serde_json::Map::new();
    for (name, c) in &ws.categories {
        lines.push(format!("category {name}: {} objects, {} arrows", c.num_objects(), c.num_arrows()));
        cats.insert(name.clone(), json!({ "objects": c.num_objects(), "arrows": c.num_arrows() }));
    }
    result.insert("categories".into(), Value::Object(cats));
    let mut tops = serde_json::Map::new();
    for (name, t) in &ws.topologies {
        let cat = &t.site.category;
        let sieves: usize = cat.objects().map(|o| t.site.topology.covers(o).len()).sum();
        let degenerate = t.site.topology.is_degenerate();
        lines.push(format!(
            "topology {name} on {}: {sieves} covering sieves{}",
            t.on,
            if degenerate { " (degenerate: an empty sieve covers)" } else { "" }
        ));
        tops.insert(name.clone(), json!({ "on": t.on, "covering_sieves": sieves, "degenerate": degenerate }));
    }
    result.insert("topologies".into(), Value::Object(tops));
    let mut sheaves = serde_json::Map::new();
    for (name, s) in &ws.sheaves {
        let cat = &ws.categories[&s.on];
        let total: usize = cat.objects().map(|o| s.presheaf.size(o)).sum();
        lines.push(format!("presheaf {name} on {}: {total} elements", s.on));
        sheaves.insert(name.clone(), json!({ "on": s.on, "elements": total }));
    }
    result.insert("sheaves".into(), Value::Object(sheaves));
    let mut fams = serde_json::Map::new();
    for (name, f) in &ws.families {
        let cat = &ws.topologies[&f.topology].site.category;
        lines.push(format!("family {name}: {} connected covering members", f.family.len()));
        fams.insert(name.clone(), json!({ "topology": f.topology, "members": names(cat, &f.family.members) }));
    }
    result.insert("families".into(), Value::Object(fams));
    let mut groups = serde_json::Map::new();
    for (name, g) in &ws.groups {
        let ppa = check_ppa(&g.group);
        lines.push(format!(
            "group {name}: order {}, unique continuation {}",
            g.group.order(),
            if ppa.holds { "holds" } else { "fails" }
        ));
        groups.insert(name.clone(), json!({ "order": g.group.order(), "ppa": ppa.holds }));
    }
    result.insert("groups".into(), Value::Object(groups));
    for (name, a) in &ws.atlases {
        lines.push(format!("atlas {name}: {} charts into {}", a.data.charts.len(), a.model));
    }
    result.insert("atlases".into(), json!(ws.atlases.keys().collect::<Vec<_>>()));
    result.insert("sections".into(), json!(ws.sections.keys().collect::<Vec<_>>()));
    result.insert("functors".into(), json!(ws.functors.keys().collect::<Vec<_>>()));
    Outcome::holds(lines, Value::Object(result))
}

pub fn fmt(ws: &Workspace, original: &str) -> Outcome {
    let canonical = serialize(ws);
    let same = canonical == original;
    Outcome {
        holds: same,
        lines: vec![canonical.clone()],
        result: json!({ "canonical": same, "text": canonical }),
        witnesses: if same {
            Vec::new()
        } else {
            vec![json!({ "code": "NOT_CANONICAL", "message": "file differs from its canonical form" })]
        },
    }
}

pub fn components_cmd(ws: &Workspace, fam: &str) -> Result<Outcome, Diagnostic> {
    let (site, family, _) = family(ws, fam)?;
    let cat = &site.category;
    let comps = match components(site, family) {
        Ok(c) => c,
        Err(e) => return Ok(Outcome::failed(vec![], Value::Null, e.code(), e.to_string(), json!({}))),
    };
    let parts: Vec<Vec<String>> = comps
        .partition
        .iter()
        .map(|p| p.iter().map(|&i| cat.object_name(family.members[i]).to_string()).collect())
        .collect();
    let mut lines: Vec<String> = parts
        .iter()
        .enumerate()
        .map(|(k, p)| format!("component {}: {}", k + 1, p.join(", ")))
        .collect();
    let result = json!({ "components": parts, "connected": comps.connected });
    if comps.connected {
        lines.push("connected".into());
        Ok(Outcome::holds(lines, result))
    } else {
        lines.push(format!("not connected: {} components", parts.len()));
        Ok(Outcome {
            holds: false,
            lines,
            result,
            witnesses: vec![json!({ "code": "NOT_CONNECTED", "components": parts })],
        })
    }
}

pub fn sheaf_check(ws: &Workspace, sheaf: &str, topology: &str) -> Result<Outcome, Diagnostic> {
    let f = sheaf_on(ws, sheaf, topology)?;
    let site = &ws.topologies[topology].site;
    let cat = &site.category;
    let check = is_sheaf(site, f);
    if let Some(w) = check.witness {
        let cover = sieve_names(cat, &w.sieve);
        let object = cat.object_name(w.object).to_string();
        let line = format!(
            "not a sheaf: at {object} over cover {{{}}}: {} sections vs {} matching families{}",
            cover.join(", "),
            w.sections,
            w.families,
            if w.injective { "" } else { " (restriction not injective)" }
        );
        return Ok(Outcome {
            holds: false,
            lines: vec![line],
            result: json!({ "sheaf": false }),
            witnesses: vec![json!({
                "code": "NOT_A_SHEAF",
                "object": object,
                "cover": cover,
                "sections": w.sections,
                "matching_families": w.families,
                "injective": w.injective,
            })],
        });
    }
    let constant = is_constant(cat, f);
    let triv = trivializing_family(site, f, DEFAULT_TRIVIALIZING_CAP);
    let mut lines = vec![format!("{sheaf} is a sheaf for {topology}")];
    lines.push(format!("constant: {}", if constant { "yes" } else { "no" }));
    let triv_names = triv.as_ref().map(|t| names(cat, &t.members));
    match &triv_names {
        Some(n) => lines.push(format!("locally constant, trivialized by {{{}}}", n.join(", "))),
        None => lines.push("not locally constant within the search bound".into()),
    }
    Ok(Outcome::holds(
        lines,
        json!({ "sheaf": true, "constant": constant, "trivializing_family": triv_names }),
    ))
}

/// Resource limits say nothing about the property, so they are input errors.
const LIMIT_CODES: [&str; 3] = ["CLOSURE_CAP_EXCEEDED", "ORDER_BOUND_EXCEEDED", "GERM_SPACE_TOO_LARGE"];

fn limit_or(code: &str, message: String, lines: Vec<String>) -> Result<Outcome, Diagnostic> {
    if LIMIT_CODES.contains(&code) {
        return Err(usage(code, "limits".into(), message));
    }
    Ok(Outcome::failed(lines, Value::Null, code, message, json!({})))
}

fn holonomy_fail(e: &toposforge::holonomy::HolonomyError) -> Result<Outcome, Diagnostic> {
    limit_or(e.code(), e.to_string(), vec![])
}

pub fn holonomy(ws: &Workspace, sheaf: &str, fam: &str, base: &str, compare: Option<&str>, cap: usize) -> Result<Outcome, Diagnostic> {
    let (site, family, topology) = family(ws, fam)?;
    let f = sheaf_on(ws, sheaf, topology)?;
    let b = member_index(site, family, base)?;
    let ts = match transition_isos(site, f, family) {
        Ok(ts) => ts,
        Err(e) => return holonomy_fail(&e),
    };
    let group = match ts.holonomy_group(b, cap) {
        Ok(g) => g,
        Err(e) => return holonomy_fail(&e),
    };
    let gens = ts.generator_holonomies(b).expect("base checked");
    let labels = f.values(family.members[b]).to_vec();
    let mut lines = vec![format!("holonomy group order {}", group.order())];
    let mut gen_json = Vec::new();
    for (p, h) in &gens {
        let path = ts.graph.display_path(&p.0);
        let perm = h.display_with(&labels);
        lines.push(format!("  loop {path}: {perm}"));
        gen_json.push(json!({ "loop": path, "holonomy": perm }));
    }
    let elements: Vec<String> = group.elements.iter().map(|p| p.display_with(&labels)).collect();
    let mut result = json!({
        "base": base,
        "order": group.order(),
        "generators": gen_json,
        "elements": elements,
    });
    if let Some(other) = compare {
        let (site_b, family_b, topology_b) = self::family(ws, other)?;
        if topology_b != topology {
            return Err(usage(
                "UNRESOLVED_REFERENCE",
                format!("family `{other}`"),
                format!("family lives on `{topology_b}`, not `{topology}`"),
            ));
        }
        let gb = match transition_isos(site_b, f, family_b).and_then(|t| t.holonomy_group(0, cap)) {
            Ok(g) => g,
            Err(e) => return holonomy_fail(&e),
        };
        let report = match compare_groups(&group, &gb) {
            Ok(r) => r,
            Err(e) => return holonomy_fail(&e),
        };
        lines.push(format!(
            "refinement: order {} vs {} over {other}, {}",
            report.order_a,
            report.order_b,
            if report.isomorphic { "isomorphic" } else { "not isomorphic" }
        ));
        result["refinement"] = json!({
            "family": other,
            "order_a": report.order_a,
            "order_b": report.order_b,
            "isomorphic": report.isomorphic,
        });
        if !report.isomorphic {
            return Ok(Outcome {
                holds: false,
                lines,
                result,
                witnesses: vec![json!({
                    "code": "NOT_ISOMORPHIC",
                    "order_a": report.order_a,
                    "order_b": report.order_b,
                })],
            });
        }
    }
    Ok(Outcome::holds(lines, result))
}

pub fn pi1(ws: &Workspace, fam: &str, sheaves: &[String], cap: usize) -> Result<Outcome, Diagnostic> {
    let (site, family, topology) = family(ws, fam)?;
    let mut list = Vec::new();
    for s in sheaves {
        list.push((s.clone(), sheaf_on(ws, s, topology)?.clone()));
    }
    if list.is_empty() {
        return Err(usage("USAGE", "--sheaf".into(), "at least one sheaf is required".into()));
    }
    let pres = match pro_pi1_presentation(site, family, &list, cap) {
        Ok(p) => p,
        Err(e) => return holonomy_fail(&e),
    };
    let mut lines = Vec::new();
    for n in &pres.nodes {
        lines.push(format!("node {}: order {}", n.label, n.group.order()));
    }
    let surj: Vec<(String, String)> = pres
        .surjections
        .iter()
        .map(|&(j, i)| (pres.nodes[j].label.clone(), pres.nodes[i].label.clone()))
        .collect();
    for (a, b) in &surj {
        lines.push(format!("surjection {a} ->> {b}"));
    }
    if surj.is_empty() {
        lines.push("no surjections between distinct nodes".into());
    }
    lines.push(format!("joint group order {}", pres.joint.order()));
    let nodes: Vec<Value> = pres
        .nodes
        .iter()
        .map(|n| json!({ "sheaf": n.label, "order": n.group.order() }))
        .collect();
    Ok(Outcome::holds(
        lines,
        json!({ "nodes": nodes, "surjections": surj, "joint_order": pres.joint.order() }),
    ))
}

pub fn simply_connected(ws: &Workspace, fam: &str, k: usize, cap: usize) -> Result<Outcome, Diagnostic> {
    let (site, family, _) = family(ws, fam)?;
    let report = match is_simply_connected_bounded(site, family, k, cap) {
        Ok(r) => r,
        Err(e) => return holonomy_fail(&e),
    };
    let result = json!({ "simply_connected": report.holds, "fiber_bound": k, "systems_checked": report.checked });
    match report.witness {
        None => Ok(Outcome::holds(
            vec![format!(
                "simply connected up to fiber size {k} ({} local systems checked)",
                report.checked
            )],
            result,
        )),
        Some(ts) => {
            let mut transports = BTreeMap::new();
            for &(i, j) in &ts.graph.edges {
                let t = ts.transport(i, j).expect("edge");
                if !t.is_identity() {
                    transports.insert(format!("{},{}", ts.graph.names[i], ts.graph.names[j]), t.to_string());
                }
            }
            let mut lines = vec![format!("not simply connected: a local system with fiber size {} has holonomy", ts.fibers[0])];
            for (e, t) in &transports {
                lines.push(format!("  transport {e}: {t}"));
            }
            Ok(Outcome {
                holds: false,
                lines,
                result,
                witnesses: vec![json!({ "code": "NONTRIVIAL_LOCAL_SYSTEM", "fiber": ts.fibers[0], "transports": transports })],
            })
        }
    }
}

fn geo_fail(lines: Vec<String>, e: &GeoError) -> Result<Outcome, Diagnostic> {
    limit_or(e.code(), e.to_string(), lines)
}

fn atlas_of(ws: &Workspace, name: &str) -> Result<Result<Atlas, GeoError>, Diagnostic> {
    Ok(validate_atlas(&lookup(&ws.atlases, "atlas", name)?.data))
}

fn transitions_json(a: &Atlas) -> BTreeMap<String, String> {
    a.transitions
        .iter()
        .map(|(&(i, j), &g)| (format!("{},{}", a.member_name(i), a.member_name(j)), a.model.label(g).to_string()))
        .collect()
}

pub fn cg_check(ws: &Workspace, atlas: &str, base: Option<&str>, morphism: Option<(&str, &str)>) -> Result<Outcome, Diagnostic> {
    let a = match atlas_of(ws, atlas)? {
        Ok(a) => a,
        Err(e) => return geo_fail(vec![], &e),
    };
    let b = match base {
        Some(x) => member_index(&a.site, &a.family, x)?,
        None => 0,
    };
    let hol = structure_holonomy(&a, b).expect("base checked");
    let mut lines = vec![format!("cocycle verified; holonomy image order {}", hol.image.len())];
    for (&(i, j), &g) in &a.transitions {
        if i < j && g != a.model.identity() {
            lines.push(format!("  g({},{}) = {}", a.member_name(i), a.member_name(j), a.model.label(g)));
        }
    }
    let gens: Vec<Value> = hol
        .generators
        .iter()
        .map(|(p, g)| json!({ "loop": a.graph.display_path(&p.0), "image": a.model.label(*g) }))
        .collect();
    for (p, g) in &hol.generators {
        lines.push(format!("  loop {} -> {}", a.graph.display_path(&p.0), a.model.label(*g)));
    }
    let image: Vec<&str> = hol.image.iter().map(|&g| a.model.label(g)).collect();
    let mut result = json!({
        "cocycle": true,
        "transitions": transitions_json(&a),
        "holonomy": { "base": a.member_name(b), "generators": gens, "image": image },
    });
    if let Some((fname, target)) = morphism {
        let f = lookup(&ws.functors, "functor", fname)?;
        let t = match atlas_of(ws, target)? {
            Ok(t) => t,
            Err(e) => return geo_fail(lines, &e),
        };
        let ae = &ws.atlases[atlas];
        let te = &ws.atlases[target];
        if f.from != ae.topology || f.to != te.topology {
            return Err(usage(
                "UNRESOLVED_REFERENCE",
                format!("functor `{fname}`"),
                format!("functor runs {} -> {}, atlases live on {} and {}", f.from, f.to, ae.topology, te.topology),
            ));
        }
        match check_cg_morphism(&f.functor, &a, &t) {
            Ok(r) => {
                let mut table = BTreeMap::new();
                for (i, (&j, &k)) in r.targets.iter().zip(&r.k).enumerate() {
                    lines.push(format!("  {} -> {}: k = {}", a.member_name(i), t.member_name(j), a.model.label(k)));
                    table.insert(a.member_name(i).to_string(), json!({ "target": t.member_name(j), "k": a.model.label(k) }));
                }
                lines.push(format!("{fname} is a morphism of structures"));
                result["morphism"] = json!({ "functor": fname, "target": target, "k": table });
            }
            Err(e) => return Ok(Outcome::failed(lines, result, e.code(), e.to_string(), json!({ "functor": fname }))),
        }
    }
    Ok(Outcome::holds(lines, result))
}

pub fn develop(ws: &Workspace, atlas: &str, basepoint: Option<&str>) -> Result<Outcome, Diagnostic> {
    let a = match atlas_of(ws, atlas)? {
        Ok(a) => a,
        Err(e) => return geo_fail(vec![], &e),
    };
    let sheaf = structure_sheaf(&a);
    let d = &a.site.category;
    let c = &a.model.site.category;
    let points = match basepoint {
        None => None,
        Some(bp) => {
            let bad = || {
                usage(
                    "UNRESOLVED_REFERENCE",
                    format!("basepoint `{bp}`"),
                    "expected <object>:<germ label>".to_string(),
                )
            };
            let (o, s) = bp.split_once(':').ok_or_else(bad)?;
            let o = d.object(o).ok_or_else(bad)?;
            let s = sheaf.presheaf.values(o).iter().position(|v| v == s).ok_or_else(bad)?;
            Some(vec![(o, s)])
        }
    };
    let space = match developing(&a, &sheaf, points.as_deref()) {
        Ok(s) => s,
        Err(e) => return geo_fail(vec![], &e),
    };
    let mut lines = vec![format!("{} germ component(s)", space.components.len())];
    let mut comps = Vec::new();
    let mut ok = true;
    for (k, comp) in space.components.iter().enumerate() {
        let (w, s) = space.germs[comp.germs[0]];
        let through = format!("{}:{}", d.object_name(w), sheaf.presheaf.values(w)[s]);
        let wrap = comp.wrapping.map_or("unevenly".to_string(), |n| format!("{n} time(s)"));
        lines.push(format!(
            "component {} through {through}: {} germs, {}degree {} over the site, {} member germs; Dev wraps {wrap} onto {} model objects{}",
            k + 1,
            comp.germs.len(),
            if comp.covering { "" } else { "NOT a cover, " },
            comp.degree,
            comp.member_germs,
            comp.dev_images.len(),
            if comp.dev_local_iso { ", locally iso" } else { ", NOT locally iso" }
        ));
        ok &= comp.covering && comp.dev_local_iso;
        comps.push(json!({
            "through": through,
            "germs": comp.germs.len(),
            "degree": comp.degree,
            "covering": comp.covering,
            "member_germs": comp.member_germs,
            "wrapping": comp.wrapping,
            "dev_images": comp.dev_images.iter().map(|&o| c.object_name(o)).collect::<Vec<_>>(),
            "dev_local_iso": comp.dev_local_iso,
        }));
    }
    let result = json!({ "total_germs": space.germs.len(), "components": comps });
    if ok {
        Ok(Outcome::holds(lines, result))
    } else {
        Ok(Outcome {
            holds: false,
            lines,
            result,
            witnesses: vec![json!({ "code": "NOT_A_COVERING", "message": "a germ component is not a locally iso cover" })],
        })
    }
}

pub fn bundle(ws: &Workspace, atlas: &str, section: Option<&str>) -> Result<Outcome, Diagnostic> {
    let a = match atlas_of(ws, atlas)? {
        Ok(a) => a,
        Err(e) => return geo_fail(vec![], &e),
    };
    let b = structural_bundle(&a);
    let mut lines = vec![format!(
        "structural bundle: {} pieces over {} charts, clutching cocycle {}",
        b.pieces().len(),
        a.family.len(),
        if b.clutching_is_cocycle() { "holds" } else { "fails" }
    )];
    let s0 = tautological_section(&b);
    let back = match structure_from_section(&b, &s0) {
        Ok(x) => x,
        Err(e) => return geo_fail(lines, &e),
    };
    let h0 = structure_holonomy(&a, 0).expect("base 0").image;
    let h1 = structure_holonomy(&back, 0).expect("base 0").image;
    let preserved = h0 == h1;
    lines.push("tautological section: compatible, transverse".into());
    lines.push(format!(
        "round trip: holonomy image order {} {}",
        h1.len(),
        if preserved { "preserved" } else { "CHANGED" }
    ));
    let mut result = json!({
        "pieces": b.pieces().len(),
        "round_trip_preserves_holonomy": preserved,
        "holonomy_order": h1.len(),
    });
    if !preserved {
        return Ok(Outcome {
            holds: false,
            lines,
            result,
            witnesses: vec![json!({ "code": "ROUND_TRIP_CHANGED", "before": h0.len(), "after": h1.len() })],
        });
    }
    if let Some(sname) = section {
        let s = lookup(&ws.sections, "section", sname)?;
        if s.atlas != atlas {
            return Err(usage(
                "UNRESOLVED_REFERENCE",
                format!("section `{sname}`"),
                format!("section belongs to atlas `{}`", s.atlas),
            ));
        }
        let report = match validate_section(&b, &s.section) {
            Ok(r) => r,
            Err(e) => return geo_fail(lines, &e),
        };
        result["section"] = json!({ "name": sname, "compatible": report.compatible, "transverse": report.transverse });
        if let Some(w) = report.witness {
            lines.push(format!(
                "section {sname}: {}, {}",
                if report.compatible { "compatible" } else { "incompatible" },
                if report.transverse { "transverse" } else { "not transverse" }
            ));
            return Ok(Outcome::failed(lines, result, w.code(), w.to_string(), json!({ "section": sname })));
        }
        let derived = structure_from_section(&b, &s.section).expect("transverse section");
        let h = structure_holonomy(&derived, 0).expect("base 0").image;
        lines.push(format!("section {sname}: compatible, transverse; holonomy image order {}", h.len()));
    }
    Ok(Outcome::holds(lines, result))
}

/// The holonomy image as an abstract group, with its embedding into `G`.
fn image_group(a: &Atlas, image: &[usize]) -> (FiniteGroup, Vec<usize>) {
    let pos: BTreeMap<usize, usize> = image.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let table = image
        .iter()
        .map(|&x| image.iter().map(|&y| pos[&a.model.mul(x, y)]).collect())
        .collect();
    let labels = image.iter().map(|&g| a.model.label(g).to_string()).collect();
    (FiniteGroup::from_table(labels, table), image.to_vec())
}

pub fn deform(ws: &Workspace, atlas: &str, base: Option<&str>) -> Result<Outcome, Diagnostic> {
    let a = match atlas_of(ws, atlas)? {
        Ok(a) => a,
        Err(e) => return geo_fail(vec![], &e),
    };
    let b = match base {
        Some(x) => member_index(&a.site, &a.family, x)?,
        None => 0,
    };
    let hol = structure_holonomy(&a, b).expect("base checked");
    let (h, _) = image_group(&a, &hol.image);
    let reps = match enumerate_representations(&h, &a.model) {
        Ok(r) => r,
        Err(e) => return geo_fail(vec![], &e),
    };
    let sheaf = structure_sheaf(&a);
    let x = a.family.members[b];
    let id = a.model.identity();
    let space = match developing(&a, &sheaf, Some(&[(x, id)])) {
        Ok(s) => s,
        Err(e) => return geo_fail(vec![], &e),
    };
    let cover = space.components[0].germs.len();
    let mut lines = vec![format!(
        "Hom(hol, {}): {} representation(s) of the order-{} holonomy image; holonomy cover has {cover} germs",
        ws.atlases[atlas].model,
        reps.len(),
        h.order()
    )];
    let mut entries = Vec::new();
    let mut all_ok = true;
    let gens = h.generating_set();
    for (k, rep) in reps.iter().enumerate() {
        let fb = match flat_bundle(cover, &h, &a.model, rep) {
            Ok(fb) => fb,
            Err(e) => return geo_fail(lines, &e),
        };
        all_ok &= fb.action_law_holds;
        let on_gens: BTreeMap<String, String> = gens
            .iter()
            .map(|&g| (h.labels[g].clone(), a.model.label(rep[g]).to_string()))
            .collect();
        let desc: Vec<String> = on_gens.iter().map(|(s, t)| format!("{s} -> {t}")).collect();
        let fiber_moves: Vec<usize> = gens
            .iter()
            .map(|&g| (0..fb.fiber_size).filter(|&y| fb.gammas[g].apply(y) != y).count())
            .collect();
        lines.push(format!(
            "  rep {}: {}; action law {}",
            k + 1,
            if desc.is_empty() { "trivial".to_string() } else { desc.join(", ") },
            if fb.action_law_holds { "holds" } else { "FAILS" }
        ));
        let distances: Vec<usize> = reps.iter().map(|r| representation_distance(&h, rep, r)).collect();
        entries.push(json!({
            "generators": on_gens,
            "action_law": fb.action_law_holds,
            "moved_fiber_points": fiber_moves,
            "distances": distances,
        }));
    }
    let result = json!({
        "holonomy_order": h.order(),
        "cover_germs": cover,
        "representations": entries,
    });
    if all_ok {
        Ok(Outcome::holds(lines, result))
    } else {
        Ok(Outcome {
            holds: false,
            lines,
            result,
            witnesses: vec![json!({ "code": "ACTION_LAW", "message": "a flat bundle fails the action law" })],
        })
    }
}

/// Every perm in the group displayed by fiber labels.
pub fn display_perms(perms: &[Perm], labels: &[String]) -> Vec<String> {
    perms.iter().map(|p| p.display_with(labels)).collect()
}

/// Nerve summary used by `components --verbose`.
pub fn nerve_edges(site: &Site, family: &CoveringFamily) -> Vec<String> {
    match nerve_graph(site, family) {
        Ok(g) => g
            .edges
            .iter()
            .map(|&(i, j)| format!("{}-{}", g.names[i], g.names[j]))
            .collect(),
        Err(_) => Vec::new(),
    }
}
