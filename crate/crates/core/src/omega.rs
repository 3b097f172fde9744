//! LTL to Büchi translation, lasso membership, arena product emptiness and
//! determinization to parity automata.
//!
//! Letters are bitmasks over an automaton's sorted atom list: bit `k` is
//! set when `atoms[k]` holds. Parity acceptance is max-even throughout.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::arena::{Arena, Lasso};
use crate::graph;
use crate::rltl::{Formula, FormulaError, Labelling};
use alloc::string::String;

pub type Letter = u64;

/// Conjunction of literals: every bit of `pos` set and every bit of `neg`
/// clear.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub pos: Letter,
    pub neg: Letter,
}

impl Guard {
    pub fn matches(self, letter: Letter) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }
}

/// Maps labels to letters over a fixed atom list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    pub atoms: Vec<String>,
}

impl Alphabet {
    pub fn new(atoms: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = atoms.into_iter().collect();
        assert!(set.len() <= 64, "at most 64 atoms per automaton");
        Alphabet {
            atoms: set.into_iter().collect(),
        }
    }

    pub fn letter<L: Labelling + ?Sized>(&self, labels: &L) -> Letter {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, p)| labels.holds(p))
            .fold(0, |acc, (k, _)| acc | (1 << k))
    }

    pub fn arena_letters(&self, arena: &Arena) -> Vec<Letter> {
        arena
            .positions()
            .map(|v| self.letter(arena.labels(v)))
            .collect()
    }

    pub fn lasso_letters<L: Labelling>(&self, word: &Lasso<L>) -> Lasso<Letter> {
        word.map(|l| self.letter(l))
    }

    pub fn size(&self) -> usize {
        self.atoms.len()
    }
}

/// Nondeterministic Büchi automaton with state-based acceptance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub alphabet: Alphabet,
    pub initial: Vec<usize>,
    pub transitions: Vec<Vec<(Guard, usize)>>,
    pub accepting: Vec<bool>,
}

impl BuchiAutomaton {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn successors(&self, s: usize, letter: Letter) -> impl Iterator<Item = usize> + '_ {
        self.transitions[s]
            .iter()
            .filter(move |(g, _)| g.matches(letter))
            .map(|&(_, t)| t)
    }

    /// Whether `stem · cycle^ω` is accepted.
    pub fn accepts_lasso(&self, word: &Lasso<Letter>) -> bool {
        let span = word.span();
        let id = |s: usize, i: usize| s * span + i;
        let mut succ = vec![Vec::new(); self.len() * span];
        let mut accepting = vec![false; self.len() * span];
        for s in 0..self.len() {
            for i in 0..span {
                accepting[id(s, i)] = self.accepting[s];
                let j = word.next_index(i);
                succ[id(s, i)] = self.successors(s, *word.at(i)).map(|t| id(t, j)).collect();
            }
        }
        let initials: Vec<usize> = self.initial.iter().map(|&s| id(s, 0)).collect();
        graph::find_accepting_lasso(&succ, &initials, &accepting).is_some()
    }

    /// Membership of a word over arbitrary labels.
    pub fn accepts<L: Labelling>(&self, word: &Lasso<L>) -> bool {
        self.accepts_lasso(&self.alphabet.lasso_letters(word))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct NnfPool {
    nodes: Vec<Nnf>,
    index: BTreeMap<Nnf, usize>,
}

impl NnfPool {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.index.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn build(&mut self, f: &Formula, neg: bool, alphabet: &Alphabet) -> usize {
        let n = match f {
            Formula::True => {
                if neg {
                    Nnf::False
                } else {
                    Nnf::True
                }
            }
            Formula::Atom(p) => {
                let k = alphabet.atoms.binary_search(p).expect("atom in alphabet");
                Nnf::Lit(k, !neg)
            }
            Formula::Not(a) => return self.build(a, !neg, alphabet),
            Formula::And(a, b) => {
                let (x, y) = (self.build(a, neg, alphabet), self.build(b, neg, alphabet));
                if neg {
                    Nnf::Or(x, y)
                } else {
                    Nnf::And(x, y)
                }
            }
            Formula::Next(a) => Nnf::Next(self.build(a, neg, alphabet)),
            Formula::Until(a, b) => {
                let (x, y) = (self.build(a, neg, alphabet), self.build(b, neg, alphabet));
                if neg {
                    Nnf::Release(x, y)
                } else {
                    Nnf::Until(x, y)
                }
            }
            Formula::Rel(_) => unreachable!("checked by caller"),
        };
        self.intern(n)
    }
}

#[derive(Clone)]
struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

struct Tableau {
    incoming: Vec<BTreeSet<usize>>,
    old: Vec<BTreeSet<usize>>,
    next: Vec<BTreeSet<usize>>,
}

const INIT: usize = usize::MAX;

/// On-the-fly tableau expansion of a formula in negation normal form.
fn expand(pool: &NnfPool, root: usize) -> Tableau {
    let mut done = Tableau {
        incoming: Vec::new(),
        old: Vec::new(),
        next: Vec::new(),
    };
    let mut keys: BTreeMap<(BTreeSet<usize>, BTreeSet<usize>), usize> = BTreeMap::new();
    let mut stack = vec![Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    'nodes: while let Some(mut n) = stack.pop() {
        loop {
            let Some(eta) = n.new.pop_first() else {
                let key = (n.old.clone(), n.next.clone());
                if let Some(&k) = keys.get(&key) {
                    done.incoming[k].extend(n.incoming);
                } else {
                    let id = done.old.len();
                    keys.insert(key, id);
                    done.incoming.push(n.incoming);
                    done.old.push(n.old);
                    done.next.push(n.next.clone());
                    stack.push(Pending {
                        incoming: BTreeSet::from([id]),
                        new: n.next,
                        old: BTreeSet::new(),
                        next: BTreeSet::new(),
                    });
                }
                continue 'nodes;
            };
            if n.old.contains(&eta) {
                continue;
            }
            let add = |set: &mut BTreeSet<usize>, old: &BTreeSet<usize>, f: usize| {
                if !old.contains(&f) {
                    set.insert(f);
                }
            };
            match pool.nodes[eta] {
                Nnf::True => {
                    n.old.insert(eta);
                }
                Nnf::False => continue 'nodes,
                Nnf::Lit(k, b) => {
                    if let Some(neg) = pool.index.get(&Nnf::Lit(k, !b)) {
                        if n.old.contains(neg) {
                            continue 'nodes;
                        }
                    }
                    n.old.insert(eta);
                }
                Nnf::And(a, b) => {
                    n.old.insert(eta);
                    add(&mut n.new, &n.old, a);
                    add(&mut n.new, &n.old, b);
                }
                Nnf::Next(a) => {
                    n.old.insert(eta);
                    n.next.insert(a);
                }
                Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                    n.old.insert(eta);
                    let mut other = n.clone();
                    match pool.nodes[eta] {
                        Nnf::Or(..) => {
                            add(&mut n.new, &n.old, a);
                            add(&mut other.new, &other.old, b);
                        }
                        Nnf::Until(..) => {
                            add(&mut n.new, &n.old, a);
                            n.next.insert(eta);
                            add(&mut other.new, &other.old, b);
                        }
                        _ => {
                            add(&mut n.new, &n.old, b);
                            n.next.insert(eta);
                            add(&mut other.new, &other.old, a);
                            add(&mut other.new, &other.old, b);
                        }
                    }
                    stack.push(other);
                }
            }
        }
    }
    done
}

/// Translates an `R`-free formula into a Büchi automaton accepting exactly
/// the letter sequences satisfying it at index 0.
pub fn ltl_to_nba(f: &Formula) -> Result<BuchiAutomaton, FormulaError> {
    ltl_to_nba_over(f, Alphabet::new(f.atoms()))
}

/// As [`ltl_to_nba`], over a given alphabet (which must contain the
/// formula's atoms).
pub fn ltl_to_nba_over(f: &Formula, alphabet: Alphabet) -> Result<BuchiAutomaton, FormulaError> {
    if !f.is_r_free() {
        return Err(FormulaError::ContainsModality);
    }
    let mut pool = NnfPool::default();
    let root = pool.build(f, false, &alphabet);
    let tab = expand(&pool, root);
    let nodes = tab.old.len();

    // Generalized acceptance: one set per until subformula.
    let untils: Vec<(usize, usize)> = pool
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match *n {
            Nnf::Until(_, b) => Some((i, b)),
            _ => None,
        })
        .collect();
    let in_set = |node: usize, k: usize| {
        let (u, b) = untils[k];
        !tab.old[node].contains(&u) || tab.old[node].contains(&b)
    };
    let guard_of = |node: usize| {
        let mut g = Guard::default();
        for &f in &tab.old[node] {
            if let Nnf::Lit(k, b) = pool.nodes[f] {
                if b {
                    g.pos |= 1 << k;
                } else {
                    g.neg |= 1 << k;
                }
            }
        }
        g
    };
    // Generalized automaton over states 0 (start) and 1..=nodes.
    let mut gsucc: Vec<Vec<usize>> = vec![Vec::new(); nodes + 1];
    for q in 0..nodes {
        for &p in &tab.incoming[q] {
            let src = if p == INIT { 0 } else { p + 1 };
            gsucc[src].push(q + 1);
        }
    }
    let guards: Vec<Guard> = core::iter::once(Guard::default())
        .chain((0..nodes).map(guard_of))
        .collect();

    // Degeneralize with a level counter.
    let levels = untils.len().max(1);
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut states: Vec<(usize, usize)> = vec![(0, 0)];
    index.insert((0, 0), 0);
    let mut transitions: Vec<Vec<(Guard, usize)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let (g, level) = states[id];
        let next_level = if g != 0 && !untils.is_empty() && in_set(g - 1, level) {
            (level + 1) % levels
        } else {
            level
        };
        let mut out = Vec::new();
        for &h in &gsucc[g] {
            let key = (h, next_level);
            let tid = *index.entry(key).or_insert_with(|| {
                states.push(key);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            out.push((guards[h], tid));
        }
        if transitions.len() <= id {
            transitions.resize(id + 1, Vec::new());
        }
        transitions[id] = out;
    }
    transitions.resize(states.len(), Vec::new());
    let accepting: Vec<bool> = states
        .iter()
        .map(|&(g, level)| {
            g != 0 && (untils.is_empty() || (level == levels - 1 && in_set(g - 1, level)))
        })
        .collect();

    Ok(prune(BuchiAutomaton {
        alphabet,
        initial: vec![0],
        transitions,
        accepting,
    }))
}

/// Removes states that cannot reach an accepting cycle (the initial states
/// are always kept).
fn prune(a: BuchiAutomaton) -> BuchiAutomaton {
    let succ: Vec<Vec<usize>> = a
        .transitions
        .iter()
        .map(|ts| ts.iter().map(|t| t.1).collect())
        .collect();
    let mut keep = graph::reaching_accepting_cycle(&succ, &a.accepting);
    let reach = graph::forward_reach(&succ, &a.initial);
    for s in 0..a.len() {
        keep[s] &= reach[s];
    }
    for &s in &a.initial {
        keep[s] = true;
    }
    let mut remap = vec![usize::MAX; a.len()];
    let mut n = 0;
    for s in 0..a.len() {
        if keep[s] {
            remap[s] = n;
            n += 1;
        }
    }
    let transitions = (0..a.len())
        .filter(|&s| keep[s])
        .map(|s| {
            a.transitions[s]
                .iter()
                .filter(|t| keep[t.1] && t.0.pos & t.0.neg == 0)
                .map(|&(g, t)| (g, remap[t]))
                .collect()
        })
        .collect();
    let accepting = (0..a.len())
        .filter(|&s| keep[s])
        .map(|s| a.accepting[s])
        .collect();
    BuchiAutomaton {
        alphabet: a.alphabet,
        initial: a.initial.iter().map(|&s| remap[s]).collect(),
        transitions,
        accepting,
    }
}

/// Searches the product of a letter-labelled graph with a Büchi automaton
/// for an accepted infinite path from `start`. Returns the path as a lasso
/// of graph nodes.
pub fn product_accepting_lasso(
    succ: &[Vec<usize>],
    letters: &[Letter],
    start: usize,
    a: &BuchiAutomaton,
) -> Option<Lasso<usize>> {
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut psucc: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for &s in &a.initial {
        index.insert((start, s), nodes.len());
        queue.push_back(nodes.len());
        nodes.push((start, s));
    }
    let initials: Vec<usize> = (0..nodes.len()).collect();
    while let Some(id) = queue.pop_front() {
        let (v, s) = nodes[id];
        let mut out = Vec::new();
        for t in a.successors(s, letters[v]) {
            for &w in &succ[v] {
                let pid = *index.entry((w, t)).or_insert_with(|| {
                    nodes.push((w, t));
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                });
                out.push(pid);
            }
        }
        if psucc.len() <= id {
            psucc.resize(id + 1, Vec::new());
        }
        psucc[id] = out;
    }
    psucc.resize(nodes.len(), Vec::new());
    let accepting: Vec<bool> = nodes.iter().map(|&(_, s)| a.accepting[s]).collect();
    let (stem, cycle) = graph::find_accepting_lasso(&psucc, &initials, &accepting)?;
    Some(Lasso::new(
        stem.iter().map(|&p| nodes[p].0).collect(),
        cycle.iter().map(|&p| nodes[p].0).collect(),
    ))
}

/// True iff no infinite play from `start` (ignoring ownership) is accepted.
pub fn product_emptiness(arena: &Arena, start: usize, a: &BuchiAutomaton) -> bool {
    let letters = a.alphabet.arena_letters(arena);
    product_accepting_lasso(arena.successor_graph(), &letters, start, a).is_none()
}

/// For every position, whether no infinite path from it is accepted. One
/// product over all start positions.
pub fn empty_from_each(succ: &[Vec<usize>], letters: &[Letter], a: &BuchiAutomaton) -> Vec<bool> {
    let n = succ.len();
    let sn = a.len();
    let id = |v: usize, s: usize| v * sn + s;
    let mut psucc = vec![Vec::new(); n * sn];
    let mut accepting = vec![false; n * sn];
    for v in 0..n {
        for s in 0..sn {
            accepting[id(v, s)] = a.accepting[s];
            for t in a.successors(s, letters[v]) {
                for &w in &succ[v] {
                    psucc[id(v, s)].push(id(w, t));
                }
            }
        }
    }
    let bad = graph::reaching_accepting_cycle(&psucc, &accepting);
    (0..n)
        .map(|v| a.initial.iter().all(|&s| !bad[id(v, s)]))
        .collect()
}

/// Positions of `arena` from which every infinite path satisfies the
/// `R`-free formula `f`.
pub fn universal_positions(arena: &Arena, f: &Formula) -> Result<Vec<bool>, FormulaError> {
    let negated = ltl_to_nba(&Formula::not(f.clone()))?;
    let letters = negated.alphabet.arena_letters(arena);
    Ok(empty_from_each(arena.successor_graph(), &letters, &negated))
}

/// Safra tree in compact form: nodes listed by age, so a node's index is
/// its rank and parents precede children.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SafraTree {
    /// `(parent index or u32::MAX for the root, sorted label)`
    pub nodes: Vec<(u32, Vec<u32>)>,
}

const ROOT: u32 = u32::MAX;

/// Deterministic parity automaton built lazily from a Büchi automaton.
/// Priorities sit on transitions; acceptance is max-even.
#[derive(Clone, Debug)]
pub struct DetParityAutomaton {
    nba: BuchiAutomaton,
    trees: Vec<SafraTree>,
    index: BTreeMap<SafraTree, usize>,
    delta: BTreeMap<(usize, Letter), (usize, u32)>,
}

impl DetParityAutomaton {
    /// Starts the construction; transitions are computed on demand.
    pub fn new(nba: BuchiAutomaton) -> Self {
        let mut init: Vec<u32> = nba.initial.iter().map(|&s| s as u32).collect();
        init.sort_unstable();
        init.dedup();
        let root = if init.is_empty() {
            SafraTree::default()
        } else {
            SafraTree {
                nodes: vec![(ROOT, init)],
            }
        };
        let mut index = BTreeMap::new();
        index.insert(root.clone(), 0);
        DetParityAutomaton {
            nba,
            trees: vec![root],
            index,
            delta: BTreeMap::new(),
        }
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.nba.alphabet
    }

    /// States discovered so far.
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tree(&self, q: usize) -> &SafraTree {
        &self.trees[q]
    }

    /// Largest priority any transition can carry.
    pub fn max_priority(&self) -> u32 {
        2 * self.nba.len() as u32 + 1
    }

    /// Successor state and priority.
    pub fn step(&mut self, q: usize, letter: Letter) -> (usize, u32) {
        if let Some(&r) = self.delta.get(&(q, letter)) {
            return r;
        }
        let (tree, prio) = self.safra_step(q, letter);
        let next = match self.index.get(&tree) {
            Some(&i) => i,
            None => {
                self.trees.push(tree.clone());
                self.index.insert(tree, self.trees.len() - 1);
                self.trees.len() - 1
            }
        };
        self.delta.insert((q, letter), (next, prio));
        (next, prio)
    }

    /// Explores every state reachable over `letters`.
    pub fn explore(&mut self, letters: &[Letter]) {
        let mut q = 0;
        while q < self.trees.len() {
            for &l in letters {
                self.step(q, l);
            }
            q += 1;
        }
    }

    /// Whether the word is accepted: the largest priority seen infinitely
    /// often is even.
    pub fn accepts_lasso(&mut self, word: &Lasso<Letter>) -> bool {
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut trace: Vec<u32> = Vec::new();
        let (mut q, mut i) = (self.initial(), 0);
        loop {
            if let Some(&start) = seen.get(&(q, i)) {
                let top = trace[start..]
                    .iter()
                    .copied()
                    .max()
                    .expect("nonempty cycle");
                return top % 2 == 0;
            }
            seen.insert((q, i), trace.len());
            let (q2, p) = self.step(q, *word.at(i));
            trace.push(p);
            q = q2;
            i = word.next_index(i);
        }
    }

    fn safra_step(&self, q: usize, letter: Letter) -> (SafraTree, u32) {
        let n = self.nba.len() as u32;
        let tree = &self.trees[q];
        let old = tree.nodes.len();
        let mut parent: Vec<u32> = tree.nodes.iter().map(|n| n.0).collect();
        let mut label: Vec<BTreeSet<u32>> = tree
            .nodes
            .iter()
            .map(|n| n.1.iter().copied().collect())
            .collect();

        // Spawn a child holding the accepting states of each node.
        for i in 0..old {
            let acc: BTreeSet<u32> = label[i]
                .iter()
                .copied()
                .filter(|&s| self.nba.accepting[s as usize])
                .collect();
            if !acc.is_empty() {
                parent.push(i as u32);
                label.push(acc);
            }
        }
        // Move every label along the letter.
        for l in label.iter_mut() {
            *l = l
                .iter()
                .flat_map(|&s| self.nba.successors(s as usize, letter))
                .map(|s| s as u32)
                .collect();
        }
        // A state stays only in the oldest sibling subtree that holds it.
        let total = label.len();
        let mut claimed: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); total];
        for i in 0..total {
            let p = parent[i];
            if p == ROOT {
                continue;
            }
            let p = p as usize;
            let kept: BTreeSet<u32> = label[i]
                .intersection(&label[p])
                .filter(|s| !claimed[p].contains(s))
                .copied()
                .collect();
            claimed[p].extend(kept.iter().copied());
            label[i] = kept;
        }
        let mut removed: Vec<bool> = label.iter().map(BTreeSet::is_empty).collect();
        // Collapse nodes whose children cover their label.
        let mut green = vec![false; total];
        for i in 0..total {
            if removed[i] {
                continue;
            }
            let mut union = BTreeSet::new();
            let mut any_child = false;
            for j in (i + 1)..total {
                if parent[j] == i as u32 && !removed[j] {
                    any_child = true;
                    union.extend(label[j].iter().copied());
                }
            }
            if any_child && union == label[i] {
                green[i] = true;
                let mut dead = vec![false; total];
                dead[i] = true;
                for j in (i + 1)..total {
                    if parent[j] != ROOT && dead[parent[j] as usize] {
                        dead[j] = true;
                        removed[j] = true;
                    }
                }
            }
        }
        // Ranks are 1-based positions among the nodes that existed before.
        let lost = (0..old).find(|&i| removed[i]).map(|i| i as u32 + 1);
        let lit = (0..old).find(|&i| green[i]).map(|i| i as u32 + 1);
        let mut min_prio = 2 * n + 1;
        if let Some(f) = lost {
            min_prio = min_prio.min(2 * f - 1);
        }
        if let Some(e) = lit {
            min_prio = min_prio.min(2 * e);
        }
        let mut remap = vec![u32::MAX; total];
        let mut nodes = Vec::new();
        for i in 0..total {
            if !removed[i] {
                remap[i] = nodes.len() as u32;
                let p = if parent[i] == ROOT {
                    ROOT
                } else {
                    remap[parent[i] as usize]
                };
                nodes.push((p, label[i].iter().copied().collect()));
            }
        }
        // Min-parity to max-parity, preserving parity.
        (SafraTree { nodes }, 2 * n + 2 - min_prio)
    }
}

/// Determinizes over the full letter space of the automaton's alphabet.
pub fn determinize_to_parity(nba: &BuchiAutomaton) -> DetParityAutomaton {
    let k = nba.alphabet.size();
    assert!(k <= 16, "full-alphabet determinization limited to 16 atoms");
    let letters: Vec<Letter> = (0..(1u64 << k)).collect();
    let mut dpa = DetParityAutomaton::new(nba.clone());
    dpa.explore(&letters);
    dpa
}
