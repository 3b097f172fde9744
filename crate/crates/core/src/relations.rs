//! Rational relations between finite plays, given as two-tape finite-state
//! transducers, and the information-set tracking used to evaluate `R`.
//!
//! An [`InfoState`] summarises every partial run of the transducer on the
//! input read so far: a set of configurations `(state, last output)` where
//! the last output is the position reached by the output tape, or `⊥` while
//! nothing has been emitted. Outputs are only followed while they spell a
//! valid play of the tracked arena, so the positions held by final
//! configurations are exactly the information set of the input play.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arena::{Arena, Player};

/// One normalized transition: at most one letter per tape. Letters are
/// positions of the base arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub input: Option<usize>,
    pub output: Option<usize>,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationTransducer {
    pub name: String,
    pub states: Vec<String>,
    pub initial: usize,
    pub finals: Vec<bool>,
    pub transitions: Vec<Transition>,
}

/// Unchecked transducer description. Transition words may hold several
/// letters; they are split into single-letter steps when built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawTransducer {
    pub name: String,
    /// `(id, initial, final)`
    pub states: Vec<(String, bool, bool)>,
    /// `(from, input word, output word, to)`
    pub transitions: Vec<(String, Vec<String>, Vec<String>, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransducerError {
    #[error("duplicate transducer state {0}")]
    DuplicateState(String),
    #[error("unknown transducer state {0}")]
    UnknownState(String),
    #[error("letter {0} is not a position of the arena")]
    UnknownLetter(String),
    #[error("transducer needs exactly one initial state, found {0}")]
    InitialCount(usize),
    #[error("arena is not an imperfect-information arena: {0}")]
    NotObservationShaped(String),
    #[error("{0} is not a Player-1 position")]
    NotObserverPosition(String),
    #[error("indistinguishable positions {0} and {1} offer different actions")]
    ActionMismatch(String, String),
}

impl RelationTransducer {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Builds and normalizes a transducer whose letters name positions of
    /// `arena`.
    pub fn from_raw(raw: &RawTransducer, arena: &Arena) -> Result<Self, TransducerError> {
        let mut states = Vec::new();
        let mut index = BTreeMap::new();
        let mut finals = Vec::new();
        let mut initials = Vec::new();
        for (id, init, fin) in &raw.states {
            if index.insert(id.clone(), states.len()).is_some() {
                return Err(TransducerError::DuplicateState(id.clone()));
            }
            if *init {
                initials.push(states.len());
            }
            states.push(id.clone());
            finals.push(*fin);
        }
        if initials.len() != 1 {
            return Err(TransducerError::InitialCount(initials.len()));
        }
        let letter = |name: &String| {
            arena
                .position(name)
                .ok_or_else(|| TransducerError::UnknownLetter(name.clone()))
        };
        let mut transitions = Vec::new();
        for (from, input, output, to) in &raw.transitions {
            let from = *index
                .get(from)
                .ok_or_else(|| TransducerError::UnknownState(from.clone()))?;
            let to = *index
                .get(to)
                .ok_or_else(|| TransducerError::UnknownState(to.clone()))?;
            let input: Vec<usize> = input.iter().map(letter).collect::<Result<_, _>>()?;
            let output: Vec<usize> = output.iter().map(letter).collect::<Result<_, _>>()?;
            let steps = input.len().max(output.len()).max(1);
            let mut cur = from;
            for k in 0..steps {
                let next = if k + 1 == steps {
                    to
                } else {
                    states.push(format!("{}~{}", states[from], states.len()));
                    finals.push(false);
                    states.len() - 1
                };
                transitions.push(Transition {
                    from: cur,
                    input: input.get(k).copied(),
                    output: output.get(k).copied(),
                    to: next,
                });
                cur = next;
            }
        }
        transitions.sort();
        transitions.dedup();
        Ok(RelationTransducer {
            name: raw.name.clone(),
            states,
            initial: initials[0],
            finals,
            transitions,
        })
    }

    /// Back to a raw description with single-letter words.
    pub fn to_raw(&self, arena: &Arena) -> RawTransducer {
        let word = |l: Option<usize>| {
            l.map(|v| vec![String::from(arena.id(v))])
                .unwrap_or_default()
        };
        RawTransducer {
            name: self.name.clone(),
            states: (0..self.len())
                .map(|q| (self.states[q].clone(), q == self.initial, self.finals[q]))
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| {
                    (
                        self.states[t.from].clone(),
                        word(t.input),
                        word(t.output),
                        self.states[t.to].clone(),
                    )
                })
                .collect(),
        }
    }

    /// Whether every transition reads and writes exactly one letter.
    pub fn is_synchronous(&self) -> bool {
        self.transitions
            .iter()
            .all(|t| t.input.is_some() && t.output.is_some())
    }
}

/// The identity relation `{(ρ, ρ)}`.
pub fn identity_transducer(arena: &Arena) -> RelationTransducer {
    RelationTransducer {
        name: "identity".into(),
        states: vec!["q".into()],
        initial: 0,
        finals: vec![true],
        transitions: arena
            .positions()
            .map(|v| Transition {
                from: 0,
                input: Some(v),
                output: Some(v),
                to: 0,
            })
            .collect(),
    }
}

/// Action structure of an imperfect-information arena: Player-1 positions
/// carry `p1`, every Player-2 position has a single predecessor and carries
/// exactly one action proposition, and the successors of a Player-1
/// position carry distinct actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationShape {
    /// Action proposition of each Player-2 position.
    pub action: Vec<Option<String>>,
}

impl ObservationShape {
    pub fn of(arena: &Arena) -> Result<Self, TransducerError> {
        let bad = |m: String| Err(TransducerError::NotObservationShaped(m));
        if arena.owner(arena.initial()) != Player::One {
            return bad("initial position must belong to Player 1".into());
        }
        let mut preds = vec![0usize; arena.len()];
        for v in arena.positions() {
            for &w in arena.successors(v) {
                preds[w] += 1;
            }
        }
        let mut action = vec![None; arena.len()];
        for v in arena.positions() {
            match arena.owner(v) {
                Player::One => {
                    if !arena.holds(v, "p1") {
                        return bad(format!("Player-1 position {} lacks p1", arena.id(v)));
                    }
                }
                Player::Two => {
                    let labels = arena.labels(v);
                    if labels.len() != 1 {
                        return bad(format!(
                            "Player-2 position {} must carry exactly one action",
                            arena.id(v)
                        ));
                    }
                    if preds[v] != 1 {
                        return bad(format!(
                            "action position {} must have exactly one predecessor",
                            arena.id(v)
                        ));
                    }
                    action[v] = labels.iter().next().cloned();
                }
            }
        }
        for v in arena.positions().filter(|&v| arena.owner(v) == Player::One) {
            let acts: BTreeSet<&String> = arena
                .successors(v)
                .iter()
                .filter_map(|&w| action[w].as_ref())
                .collect();
            if acts.len() != arena.successors(v).len() {
                return bad(format!("position {} offers an action twice", arena.id(v)));
            }
        }
        Ok(ObservationShape { action })
    }

    pub fn actions_at(&self, arena: &Arena, v: usize) -> BTreeSet<String> {
        arena
            .successors(v)
            .iter()
            .filter_map(|&w| self.action[w].clone())
            .collect()
    }
}

/// Equivalence classes of Player-1 positions generated by `pairs`
/// (reflexive, symmetric, transitive closure). Returns a class id per
/// position (`None` for Player-2 positions).
pub fn observation_classes(
    arena: &Arena,
    pairs: &[(usize, usize)],
) -> Result<Vec<Option<usize>>, TransducerError> {
    let mut parent: Vec<usize> = arena.positions().collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let n = parent[c];
            parent[c] = r;
            c = n;
        }
        r
    }
    for &(u, w) in pairs {
        for x in [u, w] {
            if arena.owner(x) != Player::One {
                return Err(TransducerError::NotObserverPosition(arena.id(x).into()));
            }
        }
        let (ru, rw) = (find(&mut parent, u), find(&mut parent, w));
        if ru != rw {
            parent[ru.max(rw)] = ru.min(rw);
        }
    }
    Ok(arena
        .positions()
        .map(|v| (arena.owner(v) == Player::One).then(|| find(&mut parent, v)))
        .collect())
}

/// The transducer for play indistinguishability: `v0 (v0,a1) v1 …` is
/// related to `v0 (v0,a1') v1' …` iff `v_i ∼ v_i'` and `a_i = a_i'` for
/// all `i`. `pairs` generates `∼`.
pub fn obs_equiv_transducer(
    arena: &Arena,
    pairs: &[(usize, usize)],
) -> Result<RelationTransducer, TransducerError> {
    let shape = ObservationShape::of(arena)?;
    let class = observation_classes(arena, pairs)?;
    let p1: Vec<usize> = arena
        .positions()
        .filter(|&v| arena.owner(v) == Player::One)
        .collect();
    for &u in &p1 {
        for &w in &p1 {
            if u < w
                && class[u] == class[w]
                && shape.actions_at(arena, u) != shape.actions_at(arena, w)
            {
                return Err(TransducerError::ActionMismatch(
                    arena.id(u).into(),
                    arena.id(w).into(),
                ));
            }
        }
    }
    let mut transitions = Vec::new();
    for u in arena.positions() {
        for w in arena.positions() {
            let related = match (arena.owner(u), arena.owner(w)) {
                (Player::One, Player::One) => class[u] == class[w],
                (Player::Two, Player::Two) => shape.action[u] == shape.action[w],
                _ => false,
            };
            if related {
                transitions.push(Transition {
                    from: 0,
                    input: Some(u),
                    output: Some(w),
                    to: 0,
                });
            }
        }
    }
    Ok(RelationTransducer {
        name: "obs".into(),
        states: vec!["q".into()],
        initial: 0,
        finals: vec![true],
        transitions,
    })
}

/// Decides `(rho, rho2) ∈ [T]` by breadth-first search over
/// `(state, input index, output index)`.
pub fn relates(t: &RelationTransducer, rho: &[usize], rho2: &[usize]) -> bool {
    let (n, m) = (rho.len(), rho2.len());
    let idx = |q: usize, i: usize, j: usize| (q * (n + 1) + i) * (m + 1) + j;
    let mut seen = vec![false; t.len() * (n + 1) * (m + 1)];
    let mut stack = vec![(t.initial, 0usize, 0usize)];
    seen[idx(t.initial, 0, 0)] = true;
    while let Some((q, i, j)) = stack.pop() {
        if i == n && j == m && t.finals[q] {
            return true;
        }
        for tr in t.transitions.iter().filter(|tr| tr.from == q) {
            let i2 = match tr.input {
                None => i,
                Some(a) if i < n && rho[i] == a => i + 1,
                _ => continue,
            };
            let j2 = match tr.output {
                None => j,
                Some(b) if j < m && rho2[j] == b => j + 1,
                _ => continue,
            };
            if !seen[idx(tr.to, i2, j2)] {
                seen[idx(tr.to, i2, j2)] = true;
                stack.push((tr.to, i2, j2));
            }
        }
    }
    false
}

/// Marker for "nothing emitted yet" in a configuration.
pub const BOTTOM: u32 = u32::MAX;

/// A canonical set of transducer configurations `(state, last output)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfoState(Vec<(u32, u32)>);

impl InfoState {
    pub fn from_configs(mut configs: Vec<(u32, u32)>) -> Self {
        configs.sort_unstable();
        configs.dedup();
        InfoState(configs)
    }

    pub fn configs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Positions held by final configurations: the information set.
    pub fn extract(&self, t: &RelationTransducer) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .0
            .iter()
            .filter(|&&(q, x)| x != BOTTOM && t.finals[q as usize])
            .map(|&(_, x)| x as usize)
            .collect();
        set.into_iter().collect()
    }
}

/// Runs a transducer along plays of a tracked arena. Input letters are the
/// base letters `proj[v]` of tracked positions; emitted base letters move
/// the last-output component to the unique tracked successor with that
/// projection.
pub struct InfoTracker<'a> {
    t: &'a RelationTransducer,
    arena: &'a Arena,
    proj: &'a [usize],
    by_input: Vec<Vec<(usize, Option<usize>, usize)>>,
    eps_input: Vec<Vec<(Option<usize>, usize)>>,
}

impl<'a> InfoTracker<'a> {
    pub fn new(t: &'a RelationTransducer, arena: &'a Arena, proj: &'a [usize]) -> Self {
        debug_assert_eq!(proj.len(), arena.len());
        let mut by_input = vec![Vec::new(); t.len()];
        let mut eps_input = vec![Vec::new(); t.len()];
        for tr in &t.transitions {
            match tr.input {
                Some(a) => by_input[tr.from].push((a, tr.output, tr.to)),
                None => eps_input[tr.from].push((tr.output, tr.to)),
            }
        }
        InfoTracker {
            t,
            arena,
            proj,
            by_input,
            eps_input,
        }
    }

    pub fn transducer(&self) -> &RelationTransducer {
        self.t
    }

    /// Extends a last-output position by an emitted letter, if the result
    /// is still a play.
    fn extend(&self, last: u32, letter: Option<usize>) -> Option<u32> {
        let Some(b) = letter else { return Some(last) };
        if last == BOTTOM {
            let init = self.arena.initial();
            (self.proj[init] == b).then_some(init as u32)
        } else {
            self.arena
                .successors(last as usize)
                .iter()
                .find(|&&w| self.proj[w] == b)
                .map(|&w| w as u32)
        }
    }

    fn close(&self, mut configs: BTreeSet<(u32, u32)>) -> InfoState {
        let mut work: Vec<(u32, u32)> = configs.iter().copied().collect();
        while let Some((q, x)) = work.pop() {
            for &(out, to) in &self.eps_input[q as usize] {
                if let Some(x2) = self.extend(x, out) {
                    if configs.insert((to as u32, x2)) {
                        work.push((to as u32, x2));
                    }
                }
            }
        }
        InfoState(configs.into_iter().collect())
    }

    /// Closure of `{(q0, ⊥)}`: the state before any input.
    pub fn initial(&self) -> InfoState {
        self.close(BTreeSet::from([(self.t.initial as u32, BOTTOM)]))
    }

    /// Reads tracked position `v`.
    pub fn step(&self, s: &InfoState, v: usize) -> InfoState {
        let a = self.proj[v];
        let mut next = BTreeSet::new();
        for &(q, x) in &s.0 {
            for &(inp, out, to) in &self.by_input[q as usize] {
                if inp == a {
                    if let Some(x2) = self.extend(x, out) {
                        next.insert((to as u32, x2));
                    }
                }
            }
        }
        self.close(next)
    }

    /// State after reading a whole play.
    pub fn run(&self, play: &[usize]) -> InfoState {
        play.iter().fold(self.initial(), |s, &v| self.step(&s, v))
    }

    /// Information set of a play.
    pub fn information_set(&self, play: &[usize]) -> Vec<usize> {
        self.run(play).extract(self.t)
    }
}

/// Identity projection for tracking a base arena directly.
pub fn identity_projection(arena: &Arena) -> Vec<usize> {
    arena.positions().collect()
}
