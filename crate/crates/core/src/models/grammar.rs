use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::vec::SparseVec;

/// A grammar symbol: nonterminal or terminal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Nt(String),
    T(char),
}

impl Sym {
    pub fn as_nt(&self) -> Option<&str> {
        match self {
            Sym::Nt(n) => Some(n),
            Sym::T(_) => None,
        }
    }
}

/// A production with a stable identifier and an integer effect vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Production {
    pub id: String,
    pub lhs: String,
    pub rhs: Vec<Sym>,
    pub effect: SparseVec,
}

/// Context-free grammar whose productions carry vectors from `Z^dimension`.
///
/// A word belongs to the language iff it has a derivation whose production
/// effects sum to the zero vector. With `dimension = 0` this is an ordinary
/// context-free grammar; a left-linear grammar of dimension 0 is an NFA in
/// grammar clothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZGrammar {
    pub nonterminals: BTreeSet<String>,
    pub terminals: BTreeSet<char>,
    pub start: String,
    pub dimension: usize,
    pub productions: Vec<Production>,
}

impl ZGrammar {
    pub fn production(&self, id: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.id == id)
    }

    /// True iff every right-hand side consists of terminals followed by at
    /// most one trailing nonterminal, i.e. the grammar is linear in the shape
    /// of a finite automaton read left to right.
    pub fn is_left_linear(&self) -> bool {
        self.productions.iter().all(|p| {
            let mut seen_nt = false;
            for s in &p.rhs {
                match s {
                    Sym::Nt(_) if seen_nt => return false,
                    Sym::Nt(_) => seen_nt = true,
                    Sym::T(_) if seen_nt => return false,
                    Sym::T(_) => {}
                }
            }
            true
        })
    }

    /// Nonterminals that derive at least one terminal word, ignoring effects.
    pub fn productive(&self) -> BTreeSet<String> {
        let mut productive: BTreeSet<String> = BTreeSet::new();
        loop {
            let mut changed = false;
            for p in &self.productions {
                if productive.contains(&p.lhs) {
                    continue;
                }
                let ok = p.rhs.iter().all(|s| match s {
                    Sym::T(_) => true,
                    Sym::Nt(n) => productive.contains(n),
                });
                if ok {
                    productive.insert(p.lhs.clone());
                    changed = true;
                }
            }
            if !changed {
                return productive;
            }
        }
    }

    /// Nonterminals reachable from the start symbol, ignoring effects.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut reach: BTreeSet<String> = BTreeSet::new();
        reach.insert(self.start.clone());
        let mut frontier: Vec<String> = alloc::vec![self.start.clone()];
        while let Some(a) = frontier.pop() {
            for p in &self.productions {
                if p.lhs != a {
                    continue;
                }
                for s in &p.rhs {
                    if let Sym::Nt(n) = s {
                        if reach.insert(n.clone()) {
                            frontier.push(n.clone());
                        }
                    }
                }
            }
        }
        reach
    }

    /// Removes nonterminals that are unreachable or unproductive, together
    /// with every production mentioning them. Language-preserving.
    pub fn trimmed(&self) -> ZGrammar {
        let productive = self.productive();
        let mut g = self.clone();
        g.productions.retain(|p| {
            productive.contains(&p.lhs)
                && p.rhs
                    .iter()
                    .all(|s| s.as_nt().map_or(true, |n| productive.contains(n)))
        });
        let reach = g.reachable();
        g.productions.retain(|p| reach.contains(&p.lhs));
        let mut used: BTreeSet<String> = BTreeSet::new();
        used.insert(g.start.clone());
        for p in &g.productions {
            used.insert(p.lhs.clone());
            for s in &p.rhs {
                if let Sym::Nt(n) = s {
                    used.insert(n.clone());
                }
            }
        }
        g.nonterminals = used;
        g
    }

    /// Drops effects, yielding the underlying context-free grammar.
    pub fn forget_effects(&self) -> ZGrammar {
        let mut g = self.clone();
        g.dimension = 0;
        for p in &mut g.productions {
            p.effect = SparseVec::new();
        }
        g
    }
}
