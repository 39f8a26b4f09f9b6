//! Permutation-group closure and small abstract groups given by Cayley
//! tables, with exhaustive homomorphism search.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use super::perm::Perm;

pub const ORDER_BOUND: usize = 64;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("permutation closure exceeded the cap of {0} elements")]
    ClosureCapExceeded(usize),
    #[error("group of order {0} exceeds the search bound {ORDER_BOUND}")]
    OrderBoundExceeded(usize),
}

impl GroupError {
    pub fn code(&self) -> &'static str {
        match self {
            GroupError::ClosureCapExceeded(_) => "CLOSURE_CAP_EXCEEDED",
            GroupError::OrderBoundExceeded(_) => "ORDER_BOUND_EXCEEDED",
        }
    }
}

/// A subgroup of `Sym(0..degree)`; `elements` is sorted and contains the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationGroup {
    pub degree: usize,
    pub generators: Vec<Perm>,
    pub elements: Vec<Perm>,
}

impl PermutationGroup {
    pub fn generate(degree: usize, generators: Vec<Perm>, cap: usize) -> Result<Self, GroupError> {
        let mut seen: BTreeSet<Perm> = BTreeSet::new();
        let id = Perm::identity(degree);
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(p) = queue.pop_front() {
            for g in &generators {
                let q = p.after(g);
                if !seen.contains(&q) {
                    if seen.len() >= cap {
                        return Err(GroupError::ClosureCapExceeded(cap));
                    }
                    seen.insert(q.clone());
                    queue.push_back(q);
                }
            }
        }
        Ok(PermutationGroup {
            degree,
            generators,
            elements: seen.into_iter().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }
}

/// A finite group by Cayley table: `table[a][b] = a·b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub labels: Vec<String>,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Trusts the table to be a group table.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Self {
        let n = table.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .expect("group table has an identity");
        let inverses = (0..n)
            .map(|x| (0..n).find(|&y| table[x][y] == identity).expect("inverse"))
            .collect();
        FiniteGroup {
            labels,
            table,
            identity,
            inverses,
        }
    }

    pub fn from_permutations(g: &PermutationGroup) -> Self {
        let labels = g.elements.iter().map(|p| p.to_string()).collect();
        let table = g
            .elements
            .iter()
            .map(|a| {
                g.elements
                    .iter()
                    .map(|b| g.index_of(&a.after(b)).expect("closed"))
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(labels, table)
    }

    pub fn trivial() -> Self {
        FiniteGroup::from_table(vec!["id".into()], vec![vec![0]])
    }

    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|k| k.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(labels, table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order()).map(|a| self.element_order(a)).collect();
        v.sort();
        v
    }

    /// Closure of a set of elements under multiplication.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&x| seen[x]).collect()
    }

    /// Greedy generating set: each element not yet generated, in index order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = self.subgroup(&gens);
        for x in 0..self.order() {
            if span.binary_search(&x).is_err() {
                gens.push(x);
                span = self.subgroup(&gens);
            }
        }
        gens
    }

    pub fn is_homomorphism(&self, target: &FiniteGroup, map: &[usize]) -> bool {
        map.len() == self.order()
            && (0..self.order()).all(|a| {
                (0..self.order()).all(|b| map[self.mul(a, b)] == target.mul(map[a], map[b]))
            })
    }

    /// Extends generator images to a map, or `None` if they violate a
    /// relation. Consistency on every `(x, generator)` pair is equivalent to
    /// being a homomorphism.
    pub fn extend(&self, target: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order()];
        map[self.identity] = target.identity;
        let mut queue = VecDeque::from([self.identity]);
        let mut visited = 0;
        while let Some(x) = queue.pop_front() {
            visited += 1;
            for (&g, &t) in gens.iter().zip(images) {
                let y = self.mul(x, g);
                let val = target.mul(map[x], t);
                if map[y] == usize::MAX {
                    map[y] = val;
                    queue.push_back(y);
                } else if map[y] != val {
                    return None;
                }
            }
        }
        (visited == self.order()).then_some(map)
    }

    /// Visits every homomorphism `self → target` in canonical order until
    /// `visit` returns `false`.
    pub fn for_each_homomorphism(
        &self,
        target: &FiniteGroup,
        mut visit: impl FnMut(&[usize]) -> bool,
    ) -> Result<(), GroupError> {
        if self.order() > ORDER_BOUND {
            return Err(GroupError::OrderBoundExceeded(self.order()));
        }
        let gens = self.generating_set();
        let candidates: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| {
                let k = self.element_order(g);
                (0..target.order())
                    .filter(|&t| k.is_multiple_of(target.element_order(t)))
                    .collect()
            })
            .collect();
        let mut images = vec![0; gens.len()];
        fn go(
            h: &FiniteGroup,
            g: &FiniteGroup,
            gens: &[usize],
            cands: &[Vec<usize>],
            k: usize,
            images: &mut Vec<usize>,
            visit: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if k == gens.len() {
                return match h.extend(g, gens, images) {
                    Some(map) => visit(&map),
                    None => true,
                };
            }
            for &t in &cands[k] {
                images[k] = t;
                if !go(h, g, gens, cands, k + 1, images, visit) {
                    return false;
                }
            }
            true
        }
        go(self, target, &gens, &candidates, 0, &mut images, &mut visit);
        Ok(())
    }

    pub fn homomorphisms(&self, target: &FiniteGroup) -> Result<Vec<Vec<usize>>, GroupError> {
        let mut out = Vec::new();
        self.for_each_homomorphism(target, |m| {
            out.push(m.to_vec());
            true
        })?;
        out.sort();
        Ok(out)
    }

    pub fn has_surjection_onto(&self, target: &FiniteGroup) -> Result<bool, GroupError> {
        if target.order() > self.order() || !self.order().is_multiple_of(target.order()) {
            self.check_bound()?;
            return Ok(false);
        }
        let mut found = false;
        self.for_each_homomorphism(target, |m| {
            let image: BTreeSet<usize> = m.iter().copied().collect();
            found = image.len() == target.order();
            !found
        })?;
        Ok(found)
    }

    pub fn is_isomorphic(&self, other: &FiniteGroup) -> Result<bool, GroupError> {
        self.check_bound()?;
        other.check_bound()?;
        if self.order() != other.order() || self.order_profile() != other.order_profile() {
            return Ok(false);
        }
        let mut found = false;
        self.for_each_homomorphism(other, |m| {
            found = m.iter().collect::<BTreeSet<_>>().len() == m.len();
            !found
        })?;
        Ok(found)
    }

    fn check_bound(&self) -> Result<(), GroupError> {
        if self.order() > ORDER_BOUND {
            Err(GroupError::OrderBoundExceeded(self.order()))
        } else {
            Ok(())
        }
    }
}
