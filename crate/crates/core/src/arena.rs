//! Arenas, plays, finite-memory strategies and outcome graphs.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// An unchecked arena description, as read from a file or produced by a
/// generator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawArena {
    pub name: String,
    pub positions: Vec<RawPosition>,
    pub edges: Vec<(String, String)>,
    pub init: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPosition {
    pub id: String,
    pub owner: Player,
    pub props: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("arena has no positions")]
    Empty,
    #[error("duplicate position {0}")]
    DuplicatePosition(String),
    #[error("unknown position {0}")]
    UnknownPosition(String),
    #[error("non-bipartite edge {0} -> {1}")]
    NonBipartiteEdge(String, String),
    #[error("missing initial position")]
    MissingInitial,
    #[error("dead-end position {0}")]
    DeadEnd(String),
}

/// A finite two-player turn-based arena.
///
/// Positions are dense indices. For arenas built by [`validate_arena`] the
/// index order is the identifier order, so iterating indices iterates
/// identifiers in sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    name: String,
    names: Vec<String>,
    owner: Vec<Player>,
    succ: Vec<Vec<usize>>,
    initial: usize,
    labels: Vec<BTreeSet<String>>,
    index: BTreeMap<String, usize>,
}

/// Checks a raw description against the arena invariants, reporting the
/// first violation found.
pub fn validate_arena(raw: &RawArena) -> Result<Arena, ArenaError> {
    if raw.positions.is_empty() {
        return Err(ArenaError::Empty);
    }
    let mut sorted: Vec<&RawPosition> = raw.positions.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for w in sorted.windows(2) {
        if w[0].id == w[1].id {
            return Err(ArenaError::DuplicatePosition(w[0].id.clone()));
        }
    }
    let index: BTreeMap<String, usize> = sorted
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.clone(), i))
        .collect();
    let owner: Vec<Player> = sorted.iter().map(|p| p.owner).collect();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sorted.len()];
    for (src, dst) in &raw.edges {
        let s = *index
            .get(src)
            .ok_or_else(|| ArenaError::UnknownPosition(src.clone()))?;
        let d = *index
            .get(dst)
            .ok_or_else(|| ArenaError::UnknownPosition(dst.clone()))?;
        if owner[s] == owner[d] {
            return Err(ArenaError::NonBipartiteEdge(src.clone(), dst.clone()));
        }
        succ[s].insert(d);
    }
    let init = raw.init.as_ref().ok_or(ArenaError::MissingInitial)?;
    let initial = *index
        .get(init)
        .ok_or_else(|| ArenaError::UnknownPosition(init.clone()))?;
    if let Some(v) = succ.iter().position(|s| s.is_empty()) {
        return Err(ArenaError::DeadEnd(sorted[v].id.clone()));
    }
    Ok(Arena {
        name: raw.name.clone(),
        names: sorted.iter().map(|p| p.id.clone()).collect(),
        owner,
        succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
        initial,
        labels: sorted
            .iter()
            .map(|p| p.props.iter().cloned().collect())
            .collect(),
        index,
    })
}

impl Arena {
    /// Assembles an arena from already-consistent parts. Used for derived
    /// arenas (powered layers, outcome graphs) whose invariants follow from
    /// their construction.
    pub fn from_parts(
        name: String,
        names: Vec<String>,
        owner: Vec<Player>,
        succ: Vec<Vec<usize>>,
        initial: usize,
        labels: Vec<BTreeSet<String>>,
    ) -> Arena {
        debug_assert_eq!(names.len(), owner.len());
        debug_assert_eq!(names.len(), succ.len());
        debug_assert_eq!(names.len(), labels.len());
        debug_assert!(initial < names.len());
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Arena {
            name,
            names,
            owner,
            succ,
            initial,
            labels,
            index,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn positions(&self) -> core::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn labels(&self, v: usize) -> &BTreeSet<String> {
        &self.labels[v]
    }

    pub fn holds(&self, v: usize, prop: &str) -> bool {
        self.labels[v].contains(prop)
    }

    /// Successors of `v` in index order.
    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    /// Successors of the position named `id`, by identifier.
    pub fn successors_of(&self, id: &str) -> Result<Vec<&str>, ArenaError> {
        let v = self
            .position(id)
            .ok_or_else(|| ArenaError::UnknownPosition(id.into()))?;
        Ok(self.succ[v].iter().map(|&w| self.id(w)).collect())
    }

    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.succ[v].contains(&w)
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// All proposition names used by the valuation.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.labels.iter().flat_map(|l| l.iter().cloned()).collect()
    }

    pub fn successor_graph(&self) -> &[Vec<usize>] {
        &self.succ
    }

    /// Same graph with the ownership partition exchanged.
    pub fn with_owners_swapped(&self) -> Arena {
        let mut a = self.clone();
        for o in &mut a.owner {
            *o = o.opponent();
        }
        a
    }

    /// Converts back to a raw description (identifier-sorted).
    pub fn to_raw(&self) -> RawArena {
        RawArena {
            name: self.name.clone(),
            positions: self
                .positions()
                .map(|v| RawPosition {
                    id: self.names[v].clone(),
                    owner: self.owner[v],
                    props: self.labels[v].iter().cloned().collect(),
                })
                .collect(),
            edges: self
                .positions()
                .flat_map(|v| self.succ[v].iter().map(move |&w| (v, w)))
                .map(|(v, w)| (self.names[v].clone(), self.names[w].clone()))
                .collect(),
            init: Some(self.names[self.initial].clone()),
        }
    }

    /// Whether `seq` is a nonempty finite play: starts at the initial
    /// position and follows edges.
    pub fn is_play(&self, seq: &[usize]) -> bool {
        match seq.first() {
            Some(&v) if v == self.initial => {}
            _ => return false,
        }
        seq.iter().all(|&v| v < self.len()) && seq.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Whether `stem · cycle^ω` is an infinite play.
    pub fn is_lasso_play(&self, lasso: &Lasso<usize>) -> bool {
        if lasso.cycle.is_empty() {
            return false;
        }
        let mut seq = lasso.stem.clone();
        seq.extend_from_slice(&lasso.cycle);
        seq.push(lasso.cycle[0]);
        self.is_play(&seq)
    }

    pub fn is_play_ids(&self, ids: &[&str]) -> bool {
        let mut seq = Vec::with_capacity(ids.len());
        for id in ids {
            match self.position(id) {
                Some(v) => seq.push(v),
                None => return false,
            }
        }
        self.is_play(&seq)
    }

    pub fn ids<'a>(&'a self, seq: &'a [usize]) -> impl Iterator<Item = &'a str> + 'a {
        seq.iter().map(move |&v| self.id(v))
    }
}

/// A nonempty finite play.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinitePlay(Vec<usize>);

impl FinitePlay {
    pub fn new(arena: &Arena, seq: Vec<usize>) -> Option<FinitePlay> {
        arena.is_play(&seq).then_some(FinitePlay(seq))
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("plays are nonempty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// An ultimately periodic infinite word `stem · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso<T> {
    pub stem: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T> Lasso<T> {
    pub fn new(stem: Vec<T>, cycle: Vec<T>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        Lasso { stem, cycle }
    }

    /// Number of distinct indices, `|stem| + |cycle|`.
    pub fn span(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Folds an arbitrary index back into `0..span()`.
    pub fn normalize(&self, i: usize) -> usize {
        if i < self.stem.len() {
            i
        } else {
            self.stem.len() + (i - self.stem.len()) % self.cycle.len()
        }
    }

    /// Successor of a normalized index.
    pub fn next_index(&self, i: usize) -> usize {
        if i + 1 < self.span() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    pub fn at(&self, i: usize) -> &T {
        let i = self.normalize(i);
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[i - self.stem.len()]
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Lasso<U> {
        Lasso {
            stem: self.stem.iter().map(&mut f).collect(),
            cycle: self.cycle.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + PartialEq> Lasso<T> {
    /// Shortest equivalent presentation: the cycle is reduced to its
    /// primitive root and rolled back into the stem as far as possible.
    pub fn minimized(&self) -> Lasso<T> {
        let mut stem = self.stem.clone();
        let mut cycle = self.cycle.clone();
        let n = cycle.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| cycle[i] == cycle[i - p]) {
                cycle.truncate(p);
                break;
            }
        }
        while let Some(last) = stem.last() {
            if *last == cycle[cycle.len() - 1] {
                let x = stem.pop().expect("nonempty");
                cycle.rotate_right(1);
                cycle[0] = x;
            } else {
                break;
            }
        }
        Lasso { stem, cycle }
    }
}

/// A finite-memory (Mealy-style) strategy for Player 1.
///
/// At a position `v` with current memory `m`, Player 1 moves to
/// `output(m, v)` when `v` is hers, and the memory becomes `update(m, v)`
/// whoever owns `v`. Missing update entries keep the memory unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyMachine {
    pub name: String,
    pub memory: Vec<String>,
    pub initial: usize,
    pub updates: BTreeMap<(usize, usize), usize>,
    pub moves: BTreeMap<(usize, usize), usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("strategy has no move at reachable position {position} with memory {memory}")]
    MissingMove { memory: String, position: String },
    #[error("strategy move {position} -> {target} with memory {memory} is not an edge")]
    IllegalMove {
        memory: String,
        position: String,
        target: String,
    },
    #[error("strategy refers to unknown memory index {0}")]
    UnknownMemory(usize),
}

impl StrategyMachine {
    /// A memoryless strategy given by one successor per Player-1 position.
    pub fn positional(name: &str, moves: impl IntoIterator<Item = (usize, usize)>) -> Self {
        StrategyMachine {
            name: name.into(),
            memory: vec!["m0".into()],
            initial: 0,
            updates: BTreeMap::new(),
            moves: moves.into_iter().map(|(v, w)| ((0, v), w)).collect(),
        }
    }

    pub fn memory_size(&self) -> usize {
        self.memory.len()
    }

    pub fn update(&self, m: usize, v: usize) -> usize {
        self.updates.get(&(m, v)).copied().unwrap_or(m)
    }

    pub fn output(&self, m: usize, v: usize) -> Option<usize> {
        self.moves.get(&(m, v)).copied()
    }

    /// Successors the strategy allows from `(v, m)`, each paired with the
    /// memory after reading `v`.
    pub fn step(
        &self,
        arena: &Arena,
        v: usize,
        m: usize,
    ) -> Result<Vec<(usize, usize)>, MachineError> {
        if m >= self.memory.len() {
            return Err(MachineError::UnknownMemory(m));
        }
        let m2 = self.update(m, v);
        if m2 >= self.memory.len() {
            return Err(MachineError::UnknownMemory(m2));
        }
        match arena.owner(v) {
            Player::One => {
                let w = self.output(m, v).ok_or_else(|| MachineError::MissingMove {
                    memory: self.memory[m].clone(),
                    position: arena.id(v).into(),
                })?;
                if w >= arena.len() || !arena.has_edge(v, w) {
                    return Err(MachineError::IllegalMove {
                        memory: self.memory[m].clone(),
                        position: arena.id(v).into(),
                        target: if w < arena.len() {
                            arena.id(w).into()
                        } else {
                            format!("#{w}")
                        },
                    });
                }
                Ok(vec![(w, m2)])
            }
            Player::Two => Ok(arena.successors(v).iter().map(|&w| (w, m2)).collect()),
        }
    }

    /// The play the machine induces when Player 2's choices are fixed by
    /// `choose` (called with the position and its successors).
    pub fn run(
        &self,
        arena: &Arena,
        steps: usize,
        mut choose: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Vec<usize>, MachineError> {
        let mut play = vec![arena.initial()];
        let mut m = self.initial;
        for _ in 0..steps {
            let v = *play.last().expect("nonempty");
            let next = self.step(arena, v, m)?;
            let (w, m2) = if next.len() == 1 {
                next[0]
            } else {
                let targets: Vec<usize> = next.iter().map(|p| p.0).collect();
                let w = choose(v, &targets);
                (w, next[0].1)
            };
            play.push(w);
            m = m2;
        }
        Ok(play)
    }
}

/// The finite graph of reachable (position, memory) pairs of an arena
/// played under a strategy machine. Its infinite paths from node 0 project
/// exactly onto the outcome of the strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeProduct {
    /// `(position, memory)`; memory is the value before reading the position.
    pub nodes: Vec<(usize, usize)>,
    pub succ: Vec<Vec<usize>>,
}

impl OutcomeProduct {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, n: usize) -> usize {
        self.nodes[n].0
    }

    /// Views the outcome graph as an arena (positions named `v|m`, labels
    /// and owners inherited) together with the projection to base positions.
    pub fn to_arena(&self, base: &Arena, machine: &StrategyMachine) -> (Arena, Vec<usize>) {
        let names = self
            .nodes
            .iter()
            .map(|&(v, m)| format!("{}|{}", base.id(v), machine.memory[m]))
            .collect();
        let owner = self.nodes.iter().map(|&(v, _)| base.owner(v)).collect();
        let labels = self
            .nodes
            .iter()
            .map(|&(v, _)| base.labels(v).clone())
            .collect();
        let proj = self.nodes.iter().map(|&(v, _)| v).collect();
        let arena = Arena::from_parts(
            format!("{}*{}", base.name(), machine.name),
            names,
            owner,
            self.succ.clone(),
            0,
            labels,
        );
        (arena, proj)
    }
}

/// Builds the outcome graph of `machine` on `arena`.
pub fn outcome_product(
    arena: &Arena,
    machine: &StrategyMachine,
) -> Result<OutcomeProduct, MachineError> {
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let start = (arena.initial(), machine.initial);
    let mut nodes = vec![start];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let (v, m) = nodes[n];
        let mut out = Vec::new();
        for key in machine.step(arena, v, m)? {
            let id = *index.entry(key).or_insert_with(|| {
                nodes.push(key);
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            });
            out.push(id);
        }
        if succ.len() <= n {
            succ.resize(n + 1, Vec::new());
        }
        succ[n] = out;
    }
    succ.resize(nodes.len(), Vec::new());
    Ok(OutcomeProduct { nodes, succ })
}
