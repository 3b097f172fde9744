//! Removal of `R` modalities by layered information-set constructions.
//!
//! Each round takes the current arena (the base arena, or the previous
//! layer), computes for every innermost `R ψ` the set of positions from
//! which every continuation satisfies `ψ`, and builds a powered arena whose
//! positions pair a position of the current arena with the information
//! state of the transducer after the play so far. A fresh atom `@Rk` labels
//! the powered positions whose information set lies inside the universal
//! set of the k-th subformula, and the formula is rewritten with `@Rk` in
//! place of `R ψ`. After one round per nesting level the formula is plain
//! LTL over the last layer.
//!
//! The transducer always reads and writes base letters. Later rounds track
//! output plays through the previous layer, whose positions are a
//! deterministic function of the base history, so an emitted base letter
//! advances a layer position in at most one way.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arena::{Arena, Lasso};
use crate::omega;
use crate::relations::{InfoState, InfoTracker, RelationTransducer};
use crate::rltl::{Formula, FormulaError};

/// Default cap on the number of positions of a powered arena.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("powered arena of round {round} exceeds {cap} positions")]
    ResourceGuard { round: usize, cap: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Size figures of one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerStats {
    pub round: usize,
    /// Positions of the arena the round was built over.
    pub input_positions: usize,
    pub transducer_states: usize,
    pub positions: usize,
    pub edges: usize,
    pub infostates: usize,
    /// `|Q| · (|V| + 1)`: log2 of the number of possible information states.
    pub bound_exponent: usize,
}

impl LayerStats {
    /// Whether `positions ≤ |V| · 2^(|Q|·(|V|+1))`.
    pub fn within_bound(&self) -> bool {
        if self.bound_exponent >= 64 {
            return true;
        }
        let bound = (self.input_positions as u128) << self.bound_exponent;
        (self.positions as u128) <= bound
    }
}

/// One powered arena.
#[derive(Clone, Debug)]
pub struct Layer {
    pub arena: Arena,
    /// Position of the previous layer (or tracked base) each position refines.
    pub parent: Vec<usize>,
    /// Index into `infostates` for each position.
    pub infostate: Vec<usize>,
    pub infostates: Vec<InfoState>,
    /// Fresh atoms introduced in this round and the subformulas they replace.
    pub fresh: Vec<(String, Formula)>,
    /// For each fresh atom, the universal set over the previous layer.
    pub universal: Vec<Vec<bool>>,
    /// The formula after this round's substitution.
    pub formula: Formula,
    pub stats: LayerStats,
}

/// Result of eliminating every `R` of a formula.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// The arena the first round was built over.
    pub tracked: Arena,
    /// Base letter of each tracked position.
    pub tracked_letters: Vec<usize>,
    pub layers: Vec<Layer>,
    /// The `R`-free formula over the last layer.
    pub formula: Formula,
}

/// One round: replaces every innermost `R ψ` of `f` by a fresh atom.
/// `letters` maps positions of `arena` to the transducer's alphabet and
/// `next_fresh` numbers the first fresh atom.
pub fn eliminate_innermost(
    arena: &Arena,
    letters: &[usize],
    t: &RelationTransducer,
    f: &Formula,
    next_fresh: usize,
    round: usize,
    cap: usize,
) -> Result<(Layer, Vec<usize>), ElimError> {
    let targets = f.innermost_r_subformulas()?;
    let mut fresh = Vec::new();
    let mut universal = Vec::new();
    let mut map = BTreeMap::new();
    for (k, rel) in targets.iter().enumerate() {
        let Formula::Rel(body) = rel else {
            unreachable!("innermost subformulas are R nodes")
        };
        let atom = format!("@R{}", next_fresh + k);
        universal.push(omega::universal_positions(arena, body)?);
        map.insert(rel.clone(), atom.clone());
        fresh.push((atom, rel.clone()));
    }
    let formula = f.substitute(&map);

    let tracker = InfoTracker::new(t, arena, letters);
    let mut states: Vec<InfoState> = Vec::new();
    let mut state_index: BTreeMap<InfoState, usize> = BTreeMap::new();
    let mut intern = |s: InfoState, states: &mut Vec<InfoState>| -> usize {
        *state_index.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            states.len() - 1
        })
    };

    let x0 = arena.initial();
    let s0 = tracker.step(&tracker.initial(), x0);
    let s0 = intern(s0, &mut states);
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut nodes: Vec<(usize, usize)> = vec![(x0, s0)];
    index.insert((x0, s0), 0);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let (x, s) = nodes[id];
        let mut out = Vec::with_capacity(arena.successors(x).len());
        for &y in arena.successors(x) {
            let sy = tracker.step(&states[s], y);
            let sy = intern(sy, &mut states);
            let key = (y, sy);
            let nid = match index.get(&key) {
                Some(&n) => n,
                None => {
                    if nodes.len() >= cap {
                        return Err(ElimError::ResourceGuard { round, cap });
                    }
                    nodes.push(key);
                    index.insert(key, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            out.push(nid);
        }
        if succ.len() <= id {
            succ.resize(id + 1, Vec::new());
        }
        succ[id] = out;
    }
    succ.resize(nodes.len(), Vec::new());

    let labels: Vec<BTreeSet<String>> = nodes
        .iter()
        .map(|&(x, s)| {
            let info = states[s].extract(t);
            let mut l = arena.labels(x).clone();
            for (k, (atom, _)) in fresh.iter().enumerate() {
                if info.iter().all(|&v| universal[k][v]) {
                    l.insert(atom.clone());
                }
            }
            l
        })
        .collect();
    let powered = Arena::from_parts(
        format!("{}^{}", arena.name(), round),
        nodes
            .iter()
            .map(|&(x, s)| format!("{}#{}", arena.id(x), s))
            .collect(),
        nodes.iter().map(|&(x, _)| arena.owner(x)).collect(),
        succ,
        0,
        labels,
    );
    let stats = LayerStats {
        round,
        input_positions: arena.len(),
        transducer_states: t.len(),
        positions: powered.len(),
        edges: powered.edge_count(),
        infostates: states.len(),
        bound_exponent: t.len() * (arena.len() + 1),
    };
    assert!(
        stats.within_bound(),
        "powered arena exceeds the information-state bound"
    );
    let new_letters = nodes.iter().map(|&(x, _)| letters[x]).collect();
    let layer = Layer {
        arena: powered,
        parent: nodes.iter().map(|&(x, _)| x).collect(),
        infostate: nodes.iter().map(|&(_, s)| s).collect(),
        infostates: states,
        fresh,
        universal,
        formula,
        stats,
    };
    Ok((layer, new_letters))
}

/// Eliminates every `R` of `f` over a base arena.
pub fn eliminate_all(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
) -> Result<Elimination, ElimError> {
    eliminate_all_capped(arena, t, f, DEFAULT_CAP)
}

pub fn eliminate_all_capped(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
    cap: usize,
) -> Result<Elimination, ElimError> {
    let letters: Vec<usize> = arena.positions().collect();
    eliminate_all_tracked(arena, &letters, t, f, cap)
}

/// Eliminates every `R` of `f` over an arena whose positions project to
/// base letters through `letters` (for instance an outcome graph, so that
/// related plays range over a strategy's outcomes only).
pub fn eliminate_all_tracked(
    arena: &Arena,
    letters: &[usize],
    t: &RelationTransducer,
    f: &Formula,
    cap: usize,
) -> Result<Elimination, ElimError> {
    let mut layers: Vec<Layer> = Vec::new();
    let mut formula = f.clone();
    let mut cur_letters = letters.to_vec();
    let mut next_fresh = 1;
    while formula.r_depth() > 0 {
        let current = layers.last().map(|l| &l.arena).unwrap_or(arena);
        let (layer, new_letters) = eliminate_innermost(
            current,
            &cur_letters,
            t,
            &formula,
            next_fresh,
            layers.len() + 1,
            cap,
        )?;
        debug_assert_eq!(layer.formula.r_depth() + 1, formula.r_depth());
        next_fresh += layer.fresh.len();
        formula = layer.formula.clone();
        cur_letters = new_letters;
        layers.push(layer);
    }
    Ok(Elimination {
        tracked: arena.clone(),
        tracked_letters: letters.to_vec(),
        layers,
        formula,
    })
}

impl Elimination {
    /// The arena the final formula is interpreted over.
    pub fn final_arena(&self) -> &Arena {
        self.layers
            .last()
            .map(|l| &l.arena)
            .unwrap_or(&self.tracked)
    }

    /// Projects a final-layer position to the tracked arena.
    pub fn to_tracked(&self, mut y: usize) -> usize {
        for layer in self.layers.iter().rev() {
            y = layer.parent[y];
        }
        y
    }

    /// Base letter of a final-layer position.
    pub fn letter(&self, y: usize) -> usize {
        self.tracked_letters[self.to_tracked(y)]
    }

    /// Componentwise projection of a final-layer play.
    pub fn trace_back_play(&self, play: &[usize]) -> Vec<usize> {
        play.iter().map(|&y| self.to_tracked(y)).collect()
    }

    /// Successor of final-layer position `y` refining tracked position `v`.
    pub fn lift_step(&self, y: usize, v: usize) -> Option<usize> {
        self.final_arena()
            .successors(y)
            .iter()
            .copied()
            .find(|&z| self.to_tracked(z) == v)
    }

    /// The unique final-layer play refining a tracked play.
    pub fn lift_play(&self, play: &[usize]) -> Option<Vec<usize>> {
        let arena = self.final_arena();
        let (&first, rest) = play.split_first()?;
        if self.to_tracked(arena.initial()) != first {
            return None;
        }
        let mut out = vec![arena.initial()];
        for &v in rest {
            let y = self.lift_step(*out.last().expect("nonempty"), v)?;
            out.push(y);
        }
        Some(out)
    }

    /// Lifts an infinite tracked play given as a lasso. The lifted lasso
    /// may have a longer stem and a cycle that is a multiple of the
    /// original one.
    pub fn lift_lasso(&self, word: &Lasso<usize>) -> Option<Lasso<usize>> {
        let arena = self.final_arena();
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out: Vec<usize> = Vec::new();
        let mut i = 0;
        let mut y = arena.initial();
        if self.to_tracked(y) != *word.at(0) {
            return None;
        }
        loop {
            if let Some(&start) = seen.get(&(y, i)) {
                let cycle = out.split_off(start);
                return Some(Lasso::new(out, cycle));
            }
            seen.insert((y, i), out.len());
            out.push(y);
            i = word.next_index(i);
            y = self.lift_step(y, *word.at(i))?;
        }
    }

    pub fn stats(&self) -> Vec<LayerStats> {
        self.layers.iter().map(|l| l.stats.clone()).collect()
    }

    /// Fresh atoms of all rounds with the subformula each replaced.
    pub fn registry(&self) -> Vec<(String, Formula)> {
        self.layers
            .iter()
            .flat_map(|l| l.fresh.iter().cloned())
            .collect()
    }
}
