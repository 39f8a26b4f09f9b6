//! Workspace files: the raw JSON model, loading with located diagnostics,
//! and canonical serialization.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use toposforge::fincat::{slice_category, validate_category, validate_functor, FiniteCategory, Functor, FunctorData, RawCategory};
use toposforge::geostruct::{AtlasData, AutomorphismGroup, Section};
use toposforge::sheaf::{validate_presheaf, Presheaf, RawPresheaf};
use toposforge::site::{generate_sieve, CoveringFamily, Sieve, Site};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWorkspace {
    #[serde(default)]
    pub categories: BTreeMap<String, RawCat>,
    #[serde(default)]
    pub topologies: BTreeMap<String, RawTopology>,
    #[serde(default)]
    pub sheaves: BTreeMap<String, RawSheaf>,
    #[serde(default)]
    pub families: BTreeMap<String, RawFamily>,
    #[serde(default)]
    pub groups: BTreeMap<String, RawGroup>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functors: BTreeMap<String, RawFunctor>,
    #[serde(default)]
    pub atlases: BTreeMap<String, RawAtlas>,
    #[serde(default)]
    pub sections: BTreeMap<String, RawSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCat {
    pub objects: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<RawArrow>,
    /// `"g,f": "h"` for `g∘f = h`.
    #[serde(default)]
    pub compose: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawArrow {
    pub name: String,
    pub src: String,
    pub dst: String,
}

/// Covering sieves per object, each as a list of generating arrows. The
/// maximal sieve is always added.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTopology {
    pub on: String,
    #[serde(default)]
    pub covers: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSheaf {
    pub on: String,
    pub values: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub restrictions: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFamily {
    pub topology: String,
    pub members: Vec<String>,
}

/// Object and arrow images by label; arrows are inferred where the target
/// hom-set is a singleton.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    #[serde(default)]
    pub objects: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arrows: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGroup {
    pub topology: String,
    #[serde(default)]
    pub generators: BTreeMap<String, RawMap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFunctor {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub objects: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arrows: BTreeMap<String, String>,
}

/// Charts are keyed by family member; slice objects are named by their
/// structure arrow (`w1>f1`, `id:f1`), slice arrows `k@u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtlas {
    pub topology: String,
    pub model: String,
    pub family: String,
    pub charts: BTreeMap<String, RawMap>,
    /// `"Xi,Xj": "<group element label>"`; omitted entries are derived.
    #[serde(default)]
    pub transitions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSection {
    pub atlas: String,
    pub maps: BTreeMap<String, RawMap>,
}

/// A load failure located by entity and JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub entity: Option<String>,
    pub pointer: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if !self.pointer.is_empty() {
            write!(f, " at {}", self.pointer)?;
        }
        if let Some(e) = &self.entity {
            write!(f, " ({e})")?;
        }
        write!(f, ": {}", self.message)
    }
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

/// JSON pointer from reference tokens.
pub fn pointer(tokens: &[&str]) -> String {
    tokens.iter().map(|t| format!("/{}", escape(t))).collect()
}

fn diag(code: &str, entity: String, tokens: &[&str], message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        code: code.to_string(),
        entity: Some(entity),
        pointer: pointer(tokens),
        message: message.into(),
        line: None,
        column: None,
    }
}

fn unresolved(entity: String, tokens: &[&str], what: &str, name: &str) -> Diagnostic {
    diag("UNRESOLVED_REFERENCE", entity, tokens, format!("unknown {what} `{name}`"))
}

#[derive(Clone, Debug)]
pub struct TopologyEntry {
    pub on: String,
    pub site: Site,
}

#[derive(Clone, Debug)]
pub struct SheafEntry {
    pub on: String,
    pub presheaf: Presheaf,
}

#[derive(Clone, Debug)]
pub struct FamilyEntry {
    pub topology: String,
    pub family: CoveringFamily,
}

#[derive(Clone, Debug)]
pub struct GroupEntry {
    pub topology: String,
    pub group: AutomorphismGroup,
}

#[derive(Clone, Debug)]
pub struct FunctorEntry {
    pub from: String,
    pub to: String,
    pub functor: Functor,
}

/// Atlas data with names resolved; the atlas laws are checked by commands.
#[derive(Clone, Debug)]
pub struct AtlasEntry {
    pub topology: String,
    pub model: String,
    pub family: String,
    pub data: AtlasData,
}

#[derive(Clone, Debug)]
pub struct SectionEntry {
    pub atlas: String,
    pub section: Section,
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub categories: BTreeMap<String, FiniteCategory>,
    pub topologies: BTreeMap<String, TopologyEntry>,
    pub sheaves: BTreeMap<String, SheafEntry>,
    pub families: BTreeMap<String, FamilyEntry>,
    pub groups: BTreeMap<String, GroupEntry>,
    pub functors: BTreeMap<String, FunctorEntry>,
    pub atlases: BTreeMap<String, AtlasEntry>,
    pub sections: BTreeMap<String, SectionEntry>,
}

/// Parses JSON text, reporting syntax errors with line and column.
pub fn parse_raw(text: &str) -> Result<RawWorkspace, Diagnostic> {
    serde_json::from_str(text).map_err(|e| Diagnostic {
        code: if e.is_syntax() || e.is_eof() { "SYNTAX" } else { "SCHEMA" }.to_string(),
        entity: None,
        pointer: String::new(),
        message: e.to_string(),
        line: Some(e.line()),
        column: Some(e.column()),
    })
}

pub fn parse_workspace(text: &str, closure_cap: usize) -> Result<Workspace, Diagnostic> {
    load(&parse_raw(text)?, closure_cap)
}

fn resolve_map(
    raw: &RawMap,
    src: &FiniteCategory,
    dst: &FiniteCategory,
    entity: &str,
    tokens: &[&str],
) -> Result<Functor, Diagnostic> {
    let data = FunctorData {
        objects: raw.objects.clone(),
        arrows: raw.arrows.clone(),
    };
    Functor::from_data(&data, src, dst).map_err(|e| diag(e.code(), entity.to_string(), tokens, e.to_string()))
}

/// Validates every entity in dependency order.
pub fn load(raw: &RawWorkspace, closure_cap: usize) -> Result<Workspace, Diagnostic> {
    let mut ws = Workspace::default();

    for (name, c) in &raw.categories {
        let entity = format!("category `{name}`");
        let mut compose = Vec::new();
        for (key, h) in &c.compose {
            let Some((g, f)) = key.split_once(',') else {
                return Err(diag(
                    "SCHEMA",
                    entity,
                    &["categories", name, "compose", key],
                    "composite keys are written `g,f`",
                ));
            };
            compose.push((g.to_string(), f.to_string(), h.clone()));
        }
        let rc = RawCategory {
            objects: c.objects.clone(),
            arrows: c.arrows.iter().map(|a| (a.name.clone(), a.src.clone(), a.dst.clone())).collect(),
            compose,
        };
        let cat = validate_category(&rc).map_err(|e| diag(e.code(), entity, &["categories", name], e.to_string()))?;
        ws.categories.insert(name.clone(), cat);
    }

    for (name, t) in &raw.topologies {
        let entity = format!("topology `{name}`");
        let cat = ws
            .categories
            .get(&t.on)
            .ok_or_else(|| unresolved(entity.clone(), &["topologies", name, "on"], "category", &t.on))?;
        let mut covers: Vec<Vec<Sieve>> = cat.objects().map(|o| vec![Sieve::maximal(cat, o)]).collect();
        for (obj, sieves) in &t.covers {
            let here = ["topologies", name, "covers", obj.as_str()];
            let o = cat.object(obj).ok_or_else(|| unresolved(entity.clone(), &here, "object", obj))?;
            for (k, gens) in sieves.iter().enumerate() {
                let idx = k.to_string();
                let at = ["topologies", name, "covers", obj.as_str(), idx.as_str()];
                let arrows = gens
                    .iter()
                    .map(|a| cat.arrow(a).ok_or_else(|| unresolved(entity.clone(), &at, "arrow", a)))
                    .collect::<Result<Vec<_>, _>>()?;
                let s = generate_sieve(cat, o, &arrows).map_err(|e| diag(e.code(), entity.clone(), &at, e.to_string()))?;
                covers[o.0].push(s);
            }
        }
        let site = Site::new(cat.clone(), &covers)
            .map_err(|e| diag(e.code(), entity.clone(), &["topologies", name, "covers"], e.to_string()))?;
        ws.topologies.insert(
            name.clone(),
            TopologyEntry {
                on: t.on.clone(),
                site,
            },
        );
    }

    for (name, s) in &raw.sheaves {
        let entity = format!("sheaf `{name}`");
        let cat = ws
            .categories
            .get(&s.on)
            .ok_or_else(|| unresolved(entity.clone(), &["sheaves", name, "on"], "category", &s.on))?;
        let rp = RawPresheaf {
            values: s.values.clone(),
            restrictions: s.restrictions.clone(),
        };
        let presheaf = validate_presheaf(cat, &rp).map_err(|e| {
            let tokens: Vec<&str> = match &e {
                toposforge::sheaf::SheafError::UnresolvedReference(r) => {
                    let key = r.split(':').next().unwrap_or(r);
                    if s.values.contains_key(key) {
                        vec!["sheaves", name, "values", key]
                    } else if s.restrictions.contains_key(key) {
                        vec!["sheaves", name, "restrictions", key]
                    } else {
                        vec!["sheaves", name]
                    }
                }
                _ => vec!["sheaves", name],
            };
            diag(e.code(), entity.clone(), &tokens, e.to_string())
        })?;
        ws.sheaves.insert(
            name.clone(),
            SheafEntry {
                on: s.on.clone(),
                presheaf,
            },
        );
    }

    for (name, f) in &raw.families {
        let entity = format!("family `{name}`");
        let site = &ws
            .topologies
            .get(&f.topology)
            .ok_or_else(|| unresolved(entity.clone(), &["families", name, "topology"], "topology", &f.topology))?
            .site;
        let members = f
            .members
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let idx = k.to_string();
                site.category
                    .object(m)
                    .ok_or_else(|| unresolved(entity.clone(), &["families", name, "members", &idx], "object", m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let family = CoveringFamily::new(site, members)
            .map_err(|e| diag(e.code(), entity.clone(), &["families", name, "members"], e.to_string()))?;
        ws.families.insert(
            name.clone(),
            FamilyEntry {
                topology: f.topology.clone(),
                family,
            },
        );
    }

    for (name, g) in &raw.groups {
        let entity = format!("group `{name}`");
        let site = &ws
            .topologies
            .get(&g.topology)
            .ok_or_else(|| unresolved(entity.clone(), &["groups", name, "topology"], "topology", &g.topology))?
            .site;
        let mut gens = Vec::new();
        for (gname, m) in &g.generators {
            let f = resolve_map(m, &site.category, &site.category, &entity, &["groups", name, "generators", gname])?;
            gens.push((gname.clone(), f));
        }
        let group = AutomorphismGroup::generate_with_cap(site.clone(), gens, closure_cap)
            .map_err(|e| diag(e.code(), entity.clone(), &["groups", name, "generators"], e.to_string()))?;
        ws.groups.insert(
            name.clone(),
            GroupEntry {
                topology: g.topology.clone(),
                group,
            },
        );
    }

    for (name, f) in &raw.functors {
        let entity = format!("functor `{name}`");
        let src = &ws
            .topologies
            .get(&f.from)
            .ok_or_else(|| unresolved(entity.clone(), &["functors", name, "from"], "topology", &f.from))?
            .site;
        let dst = &ws
            .topologies
            .get(&f.to)
            .ok_or_else(|| unresolved(entity.clone(), &["functors", name, "to"], "topology", &f.to))?
            .site;
        let m = RawMap {
            objects: f.objects.clone(),
            arrows: f.arrows.clone(),
        };
        let functor = resolve_map(&m, &src.category, &dst.category, &entity, &["functors", name])?;
        validate_functor(&functor, &src.category, &dst.category)
            .map_err(|e| diag(e.code(), entity.clone(), &["functors", name], e.to_string()))?;
        ws.functors.insert(
            name.clone(),
            FunctorEntry {
                from: f.from.clone(),
                to: f.to.clone(),
                functor,
            },
        );
    }

    for (name, a) in &raw.atlases {
        let entity = format!("atlas `{name}`");
        let site = ws
            .topologies
            .get(&a.topology)
            .ok_or_else(|| unresolved(entity.clone(), &["atlases", name, "topology"], "topology", &a.topology))?
            .site
            .clone();
        let model = ws
            .groups
            .get(&a.model)
            .ok_or_else(|| unresolved(entity.clone(), &["atlases", name, "model"], "group", &a.model))?
            .group
            .clone();
        let fam = ws
            .families
            .get(&a.family)
            .ok_or_else(|| unresolved(entity.clone(), &["atlases", name, "family"], "family", &a.family))?;
        if fam.topology != a.topology {
            return Err(diag(
                "UNRESOLVED_REFERENCE",
                entity,
                &["atlases", name, "family"],
                format!("family `{}` lives on topology `{}`", a.family, fam.topology),
            ));
        }
        let family = fam.family.clone();
        let d = &site.category;
        let member_names: Vec<&str> = family.members.iter().map(|&m| d.object_name(m)).collect();
        for key in a.charts.keys() {
            if !member_names.contains(&key.as_str()) {
                return Err(unresolved(entity, &["atlases", name, "charts", key], "family member", key));
            }
        }
        let mut charts = Vec::new();
        for (&x, &mname) in family.members.iter().zip(&member_names) {
            let tokens = ["atlases", name.as_str(), "charts", mname];
            let m = a
                .charts
                .get(mname)
                .ok_or_else(|| diag("BAD_FUNCTION_SHAPE", entity.clone(), &tokens, format!("no chart for `{mname}`")))?;
            let slice = slice_category(d, x).expect("member of the site");
            charts.push(resolve_map(m, &slice.category, &model.site.category, &entity, &tokens)?);
        }
        let mut transitions = BTreeMap::new();
        for (key, label) in &a.transitions {
            let tokens = ["atlases", name.as_str(), "transitions", key.as_str()];
            let (xi, xj) = key
                .split_once(',')
                .ok_or_else(|| diag("SCHEMA", entity.clone(), &tokens, "transition keys are written `Xi,Xj`"))?;
            let i = member_names
                .iter()
                .position(|&m| m == xi)
                .ok_or_else(|| unresolved(entity.clone(), &tokens, "family member", xi))?;
            let j = member_names
                .iter()
                .position(|&m| m == xj)
                .ok_or_else(|| unresolved(entity.clone(), &tokens, "family member", xj))?;
            let g = model
                .by_label(label)
                .map_err(|_| unresolved(entity.clone(), &tokens, "group element", label))?;
            transitions.insert((i, j), g);
        }
        ws.atlases.insert(
            name.clone(),
            AtlasEntry {
                topology: a.topology.clone(),
                model: a.model.clone(),
                family: a.family.clone(),
                data: AtlasData {
                    site,
                    model,
                    family,
                    charts,
                    transitions,
                },
            },
        );
    }

    for (name, s) in &raw.sections {
        let entity = format!("section `{name}`");
        let atlas = ws
            .atlases
            .get(&s.atlas)
            .ok_or_else(|| unresolved(entity.clone(), &["sections", name, "atlas"], "atlas", &s.atlas))?;
        let d = &atlas.data.site.category;
        let names: Vec<&str> = atlas.data.family.members.iter().map(|&m| d.object_name(m)).collect();
        for key in s.maps.keys() {
            if !names.contains(&key.as_str()) {
                return Err(unresolved(entity, &["sections", name, "maps", key], "family member", key));
            }
        }
        let mut maps = Vec::new();
        for (&x, &mname) in atlas.data.family.members.iter().zip(&names) {
            let tokens = ["sections", name.as_str(), "maps", mname];
            let m = s
                .maps
                .get(mname)
                .ok_or_else(|| diag("BAD_FUNCTION_SHAPE", entity.clone(), &tokens, format!("no map for `{mname}`")))?;
            let slice = slice_category(d, x).expect("member of the site");
            maps.push(resolve_map(m, &slice.category, &atlas.data.model.site.category, &entity, &tokens)?);
        }
        ws.sections.insert(
            name.clone(),
            SectionEntry {
                atlas: s.atlas.clone(),
                section: Section { maps },
            },
        );
    }
    Ok(ws)
}

fn raw_map(f: &Functor, src: &FiniteCategory, dst: &FiniteCategory) -> RawMap {
    let d = f.to_data(src, dst);
    RawMap {
        objects: d.objects,
        arrows: d.arrows,
    }
}

/// The canonical raw form of a validated workspace.
pub fn to_raw(ws: &Workspace) -> RawWorkspace {
    let mut raw = RawWorkspace::default();
    for (name, cat) in &ws.categories {
        let rc = cat.to_raw();
        raw.categories.insert(
            name.clone(),
            RawCat {
                objects: rc.objects,
                arrows: rc
                    .arrows
                    .into_iter()
                    .map(|(name, src, dst)| RawArrow { name, src, dst })
                    .collect(),
                compose: rc.compose.into_iter().map(|(g, f, h)| (format!("{g},{f}"), h)).collect(),
            },
        );
    }
    for (name, t) in &ws.topologies {
        let cat = &t.site.category;
        let mut covers = BTreeMap::new();
        for o in cat.objects() {
            let listed: Vec<Vec<String>> = t
                .site
                .topology
                .covers(o)
                .iter()
                .filter(|s| !s.is_maximal(cat))
                .map(|s| s.arrows.iter().map(|&a| cat.arrow_name(a).to_string()).collect())
                .collect();
            if !listed.is_empty() {
                covers.insert(cat.object_name(o).to_string(), listed);
            }
        }
        raw.topologies.insert(
            name.clone(),
            RawTopology {
                on: t.on.clone(),
                covers,
            },
        );
    }
    for (name, s) in &ws.sheaves {
        let rp = s.presheaf.to_raw(&ws.categories[&s.on]);
        raw.sheaves.insert(
            name.clone(),
            RawSheaf {
                on: s.on.clone(),
                values: rp.values,
                restrictions: rp.restrictions,
            },
        );
    }
    for (name, f) in &ws.families {
        let cat = &ws.topologies[&f.topology].site.category;
        raw.families.insert(
            name.clone(),
            RawFamily {
                topology: f.topology.clone(),
                members: f.family.members.iter().map(|&m| cat.object_name(m).to_string()).collect(),
            },
        );
    }
    for (name, g) in &ws.groups {
        let cat = &g.group.site.category;
        raw.groups.insert(
            name.clone(),
            RawGroup {
                topology: g.topology.clone(),
                generators: g
                    .group
                    .generators
                    .iter()
                    .map(|(n, e)| (n.clone(), raw_map(g.group.element(*e), cat, cat)))
                    .collect(),
            },
        );
    }
    for (name, f) in &ws.functors {
        let src = &ws.topologies[&f.from].site.category;
        let dst = &ws.topologies[&f.to].site.category;
        let m = raw_map(&f.functor, src, dst);
        raw.functors.insert(
            name.clone(),
            RawFunctor {
                from: f.from.clone(),
                to: f.to.clone(),
                objects: m.objects,
                arrows: m.arrows,
            },
        );
    }
    for (name, a) in &ws.atlases {
        let data = &a.data;
        let d = &data.site.category;
        let c = &data.model.site.category;
        let member = |i: usize| d.object_name(data.family.members[i]).to_string();
        let charts = data
            .family
            .members
            .iter()
            .zip(&data.charts)
            .map(|(&x, ch)| {
                let slice = slice_category(d, x).expect("member of the site");
                (d.object_name(x).to_string(), raw_map(ch, &slice.category, c))
            })
            .collect();
        let transitions = data
            .transitions
            .iter()
            .map(|(&(i, j), &g)| (format!("{},{}", member(i), member(j)), data.model.label(g).to_string()))
            .collect();
        raw.atlases.insert(
            name.clone(),
            RawAtlas {
                topology: a.topology.clone(),
                model: a.model.clone(),
                family: a.family.clone(),
                charts,
                transitions,
            },
        );
    }
    for (name, s) in &ws.sections {
        let data = &ws.atlases[&s.atlas].data;
        let d = &data.site.category;
        let c = &data.model.site.category;
        let maps = data
            .family
            .members
            .iter()
            .zip(&s.section.maps)
            .map(|(&x, m)| {
                let slice = slice_category(d, x).expect("member of the site");
                (d.object_name(x).to_string(), raw_map(m, &slice.category, c))
            })
            .collect();
        raw.sections.insert(
            name.clone(),
            RawSection {
                atlas: s.atlas.clone(),
                maps,
            },
        );
    }
    raw
}

/// Canonical text: two-space indented JSON, sorted keys, trailing newline.
pub fn serialize(ws: &Workspace) -> String {
    let mut s = serde_json::to_string_pretty(&to_raw(ws)).expect("workspace serializes");
    s.push('\n');
    s
}
