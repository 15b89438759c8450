use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::grammar::{Sym, ZGrammar};
use super::vec::SparseVec;

/// A (partial) derivation tree.
///
/// `Dangling` leaves are nonterminals that have not been expanded; a complete
/// derivation has none. A pump is a tree with exactly one dangling leaf whose
/// label equals the root nonterminal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivationTree {
    Leaf(char),
    Dangling(String),
    Node {
        nonterminal: String,
        prod: String,
        children: Vec<DerivationTree>,
    },
}

impl DerivationTree {
    /// Builds the one-level tree of a single production: its right-hand-side
    /// nonterminals are dangling.
    pub fn of_production(g: &ZGrammar, prod_id: &str) -> Option<DerivationTree> {
        let p = g.production(prod_id)?;
        Some(DerivationTree::Node {
            nonterminal: p.lhs.clone(),
            prod: p.id.clone(),
            children: p
                .rhs
                .iter()
                .map(|s| match s {
                    Sym::T(c) => DerivationTree::Leaf(*c),
                    Sym::Nt(n) => DerivationTree::Dangling(n.clone()),
                })
                .collect(),
        })
    }

    pub fn root_label(&self) -> Option<&str> {
        match self {
            DerivationTree::Node { nonterminal, .. } => Some(nonterminal),
            DerivationTree::Dangling(n) => Some(n),
            DerivationTree::Leaf(_) => None,
        }
    }

    /// Parikh image over productions: how often each production is applied.
    pub fn parikh(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        self.parikh_into(&mut out);
        out
    }

    fn parikh_into(&self, out: &mut BTreeMap<String, u64>) {
        if let DerivationTree::Node { prod, children, .. } = self {
            *out.entry(prod.clone()).or_insert(0) += 1;
            for c in children {
                c.parikh_into(out);
            }
        }
    }

    /// Sum of the effect vectors of all applied productions.
    pub fn kappa(&self, g: &ZGrammar) -> SparseVec {
        let mut total = SparseVec::new();
        for (p, n) in self.parikh() {
            if let Some(prod) = g.production(&p) {
                total.add_vec(&prod.effect.scaled(n as i64));
            }
        }
        total
    }

    /// Terminal yield; dangling leaves contribute nothing.
    pub fn yield_word(&self) -> String {
        let mut out = String::new();
        self.yield_into(&mut out);
        out
    }

    fn yield_into(&self, out: &mut String) {
        match self {
            DerivationTree::Leaf(c) => out.push(*c),
            DerivationTree::Dangling(_) => {}
            DerivationTree::Node { children, .. } => {
                for c in children {
                    c.yield_into(out);
                }
            }
        }
    }

    /// Terminal yield split around the first dangling leaf: `(u, v)` such
    /// that the frontier reads `u X v` for a pump with dangling label `X`.
    pub fn yield_sides(&self) -> (String, String) {
        let mut left = String::new();
        let mut right = String::new();
        let mut seen = false;
        self.sides_into(&mut left, &mut right, &mut seen);
        (left, right)
    }

    fn sides_into(&self, left: &mut String, right: &mut String, seen: &mut bool) {
        match self {
            DerivationTree::Leaf(c) => {
                if *seen {
                    right.push(*c);
                } else {
                    left.push(*c);
                }
            }
            DerivationTree::Dangling(_) => *seen = true,
            DerivationTree::Node { children, .. } => {
                for c in children {
                    c.sides_into(left, right, seen);
                }
            }
        }
    }

    pub fn dangling_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.dangling_into(&mut out);
        out
    }

    fn dangling_into(&self, out: &mut Vec<String>) {
        match self {
            DerivationTree::Dangling(n) => out.push(n.clone()),
            DerivationTree::Node { children, .. } => {
                for c in children {
                    c.dangling_into(out);
                }
            }
            DerivationTree::Leaf(_) => {}
        }
    }

    /// True iff this is a derivation `A => * u A v`.
    pub fn is_pump(&self) -> bool {
        let d = self.dangling_labels();
        matches!(self.root_label(), Some(root) if d.len() == 1 && d[0] == root)
            && matches!(self, DerivationTree::Node { .. })
    }

    /// True iff this is a complete zero-effect derivation from the start
    /// symbol of `g`.
    pub fn is_complete(&self, g: &ZGrammar) -> bool {
        self.root_label() == Some(g.start.as_str())
            && self.dangling_labels().is_empty()
            && self.kappa(g).is_zero()
    }

    /// Nonterminals occurring anywhere in the tree.
    pub fn nonterminals(&self) -> alloc::collections::BTreeSet<String> {
        let mut out = alloc::collections::BTreeSet::new();
        self.nts_into(&mut out);
        out
    }

    fn nts_into(&self, out: &mut alloc::collections::BTreeSet<String>) {
        match self {
            DerivationTree::Node {
                nonterminal,
                children,
                ..
            } => {
                out.insert(nonterminal.clone());
                for c in children {
                    c.nts_into(out);
                }
            }
            DerivationTree::Dangling(n) => {
                out.insert(n.clone());
            }
            DerivationTree::Leaf(_) => {}
        }
    }

    /// Replaces the first dangling leaf labelled `label` by `subtree`.
    /// Returns false (leaving the tree unchanged) if there is none.
    pub fn graft(&mut self, label: &str, subtree: DerivationTree) -> bool {
        let mut slot = Some(subtree);
        self.graft_inner(label, &mut slot);
        slot.is_none()
    }

    fn graft_inner(&mut self, label: &str, slot: &mut Option<DerivationTree>) {
        if slot.is_none() {
            return;
        }
        match self {
            DerivationTree::Dangling(n) if n == label => {
                *self = slot.take().unwrap();
            }
            DerivationTree::Node { children, .. } => {
                for c in children {
                    c.graft_inner(label, slot);
                    if slot.is_none() {
                        return;
                    }
                }
            }
            _ => {}
        }
    }

    /// Replaces the first internal node labelled `label` by
    /// `wrap(subtree_at_that_node)`. Used to insert pumps into a derivation.
    pub fn wrap_at(
        &mut self,
        label: &str,
        wrap: &mut dyn FnMut(DerivationTree) -> DerivationTree,
    ) -> bool {
        match self {
            DerivationTree::Node {
                nonterminal,
                children,
                ..
            } => {
                if nonterminal == label {
                    let old = core::mem::replace(self, DerivationTree::Leaf('\0'));
                    *self = wrap(old);
                    return true;
                }
                for c in children {
                    if c.wrap_at(label, wrap) {
                        return true;
                    }
                }
                false
            }
            _ => false,
        }
    }
}
