//! Checking given strategies against uniform specifications.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arena::{outcome_product, Arena, Lasso, MachineError, Player, StrategyMachine};
use crate::elimination::{eliminate_all_capped, eliminate_all_tracked, ElimError, Elimination};
use crate::omega::{ltl_to_nba_over, product_accepting_lasso, Alphabet, BuchiAutomaton};
use crate::relations::{
    identity_projection, InfoTracker, ObservationShape, RelationTransducer, TransducerError,
};
use crate::rltl::{eval_ltl_lasso_all, Formula, FormulaError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Elimination(#[from] ElimError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error("observation relation must be letter-to-letter")]
    NotSynchronous,
    #[error("more than {0} strategy machines to enumerate")]
    SizeGuard(usize),
}

impl From<core::convert::Infallible> for VerifyError {
    fn from(e: core::convert::Infallible) -> Self {
        match e {}
    }
}

/// Result of checking a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// An outcome play violating the formula, as a lasso of base positions,
    /// and the first index at which the body of a top-level `G` fails (0
    /// for formulas of another shape).
    Fails {
        play: Lasso<usize>,
        index: usize,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Which plays the `R` modality ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniformity {
    /// All plays of the arena.
    Fully,
    /// Outcomes of the strategy under consideration.
    Strictly,
}

fn failure_index(
    f: &Formula,
    word: &Lasso<&alloc::collections::BTreeSet<String>>,
) -> Result<usize, FormulaError> {
    let Some(body) = f.globally_body() else {
        return Ok(0);
    };
    let truth = eval_ltl_lasso_all(&body, word)?;
    Ok(truth.iter().position(|&b| !b).unwrap_or(0))
}

fn negated_nba(f: &Formula) -> Result<BuchiAutomaton, FormulaError> {
    let neg = Formula::not(f.clone());
    ltl_to_nba_over(&neg, Alphabet::new(neg.atoms()))
}

/// Reusable fully-uniform checker: the elimination depends only on the
/// arena, relation and formula, so it is built once for many machines.
pub struct FullyUniformChecker {
    base: Arena,
    elim: Elimination,
    negated: BuchiAutomaton,
    letters: Vec<u64>,
}

impl FullyUniformChecker {
    pub fn new(
        arena: &Arena,
        t: &RelationTransducer,
        f: &Formula,
        cap: usize,
    ) -> Result<Self, VerifyError> {
        let elim = eliminate_all_capped(arena, t, f, cap)?;
        let negated = negated_nba(&elim.formula)?;
        let letters = negated.alphabet.arena_letters(elim.final_arena());
        Ok(FullyUniformChecker {
            base: arena.clone(),
            elim,
            negated,
            letters,
        })
    }

    pub fn elimination(&self) -> &Elimination {
        &self.elim
    }

    pub fn check(&self, machine: &StrategyMachine) -> Result<Verdict, VerifyError> {
        let layer = self.elim.final_arena();
        let start = (layer.initial(), machine.initial);
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut nodes = vec![start];
        index.insert(start, 0);
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut k = 0;
        while k < nodes.len() {
            let (y, m) = nodes[k];
            let v = self.elim.to_tracked(y);
            let mut out = Vec::new();
            for (w, m2) in machine.step(&self.base, v, m)? {
                let y2 = self
                    .elim
                    .lift_step(y, w)
                    .expect("every base edge has a layer counterpart");
                let key = (y2, m2);
                let id = *index.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                out.push(id);
            }
            succ.push(out);
            k += 1;
        }
        let letters: Vec<u64> = nodes.iter().map(|&(y, _)| self.letters[y]).collect();
        let Some(bad) = product_accepting_lasso(&succ, &letters, 0, &self.negated) else {
            return Ok(Verdict::Holds);
        };
        let layer_play = bad.map(|&n| nodes[n].0);
        let index = failure_index(&self.elim.formula, &layer_play.map(|&y| layer.labels(y)))?;
        let play = layer_play.map(|&y| self.elim.to_tracked(y)).minimized();
        Ok(Verdict::Fails { play, index })
    }
}

/// Checks that every outcome of `machine` satisfies `f` when `R` ranges
/// over all plays of the arena.
pub fn check_fully_uniform(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
    machine: &StrategyMachine,
    cap: usize,
) -> Result<Verdict, VerifyError> {
    FullyUniformChecker::new(arena, t, f, cap)?.check(machine)
}

/// Checks that every outcome of `machine` satisfies `f` when `R` ranges
/// over the outcomes of `machine` only.
pub fn check_strictly_uniform(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
    machine: &StrategyMachine,
    cap: usize,
) -> Result<Verdict, VerifyError> {
    let product = outcome_product(arena, machine)?;
    let (tracked, proj) = product.to_arena(arena, machine);
    let elim = eliminate_all_tracked(&tracked, &proj, t, f, cap)?;
    let negated = negated_nba(&elim.formula)?;
    let fin = elim.final_arena();
    let letters = negated.alphabet.arena_letters(fin);
    let Some(bad) =
        product_accepting_lasso(fin.successor_graph(), &letters, fin.initial(), &negated)
    else {
        return Ok(Verdict::Holds);
    };
    let index = failure_index(&elim.formula, &bad.map(|&y| fin.labels(y)))?;
    let play = bad.map(|&y| elim.letter(y)).minimized();
    Ok(Verdict::Fails { play, index })
}

/// Checks that `machine` plays the same action after observationally
/// equivalent histories ending in Player-1 positions. `t` must be the
/// letter-to-letter observation relation of an observation-shaped arena.
pub fn check_observation_based(
    arena: &Arena,
    t: &RelationTransducer,
    machine: &StrategyMachine,
) -> Result<bool, VerifyError> {
    if !t.is_synchronous() {
        return Err(VerifyError::NotSynchronous);
    }
    let shape = ObservationShape::of(arena)?;
    let product = outcome_product(arena, machine)?;
    let mut by_state: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); t.len()];
    for tr in &t.transitions {
        if let (Some(a), Some(b)) = (tr.input, tr.output) {
            by_state[tr.from].push((a, b, tr.to));
        }
    }
    let action = |n: usize| -> Option<&String> {
        let succ = &product.succ[n];
        shape.action[product.position(succ[0])].as_ref()
    };
    let mut seen: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let v0 = arena.initial();
    for &(a, b, q) in &by_state[t.initial] {
        if a == v0 && b == v0 && seen.insert((0, 0, q)) {
            queue.push_back((0, 0, q));
        }
    }
    while let Some((n1, n2, q)) = queue.pop_front() {
        let (v1, v2) = (product.position(n1), product.position(n2));
        if t.finals[q]
            && arena.owner(v1) == Player::One
            && arena.owner(v2) == Player::One
            && action(n1) != action(n2)
        {
            return Ok(false);
        }
        for &s1 in &product.succ[n1] {
            for &s2 in &product.succ[n2] {
                let (w1, w2) = (product.position(s1), product.position(s2));
                for &(a, b, q2) in &by_state[q] {
                    if a == w1 && b == w2 && seen.insert((s1, s2, q2)) {
                        queue.push_back((s1, s2, q2));
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Opacity of a secret under a strategy: after no outcome prefix ending in
/// an observer position (one owned by Player 2) is the observer's
/// information set contained in the secret positions.
pub fn check_opacity(
    arena: &Arena,
    t: &RelationTransducer,
    secret: &[bool],
    machine: &StrategyMachine,
) -> Result<bool, VerifyError> {
    let product = outcome_product(arena, machine)?;
    let proj = identity_projection(arena);
    let tracker = InfoTracker::new(t, arena, &proj);
    let s0 = tracker.step(&tracker.initial(), arena.initial());
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert((0usize, s0.clone()));
    queue.push_back((0usize, s0));
    while let Some((n, s)) = queue.pop_front() {
        let v = product.position(n);
        if arena.owner(v) == Player::Two && s.extract(t).iter().all(|&u| secret[u]) {
            return Ok(false);
        }
        for &n2 in &product.succ[n] {
            let s2 = tracker.step(&s, product.position(n2));
            if seen.insert((n2, s2.clone())) {
                queue.push_back((n2, s2));
            }
        }
    }
    Ok(true)
}

/// Enumerates every strategy machine with at most `bound` memory states
/// (up to renaming of memory and up to entries off the reachable part) and
/// returns those whose outcomes satisfy `f` under the given uniformity.
/// Fails with `SizeGuard` once more than `max_machines` have been built.
pub fn enumerate_and_verify(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
    mode: Uniformity,
    bound: usize,
    max_machines: usize,
    cap: usize,
) -> Result<Vec<StrategyMachine>, VerifyError> {
    let fully = match mode {
        Uniformity::Fully => Some(FullyUniformChecker::new(arena, t, f, cap)?),
        Uniformity::Strictly => None,
    };
    let mut found = Vec::new();
    let mut count = 0usize;
    enumerate_machines(arena, bound, &mut |m| {
        count += 1;
        if count > max_machines {
            return Err(VerifyError::SizeGuard(max_machines));
        }
        let verdict = match &fully {
            Some(c) => c.check(m)?,
            None => check_strictly_uniform(arena, t, f, m, cap)?,
        };
        if verdict.holds() {
            found.push(m.clone());
        }
        Ok(())
    })?;
    Ok(found)
}

/// Calls `visit` on every machine with at most `bound` memory states whose
/// entries are exactly those on its reachable (position, memory) pairs.
/// New memory states are introduced in order, so each machine appears once
/// up to renaming.
pub fn enumerate_machines<E>(
    arena: &Arena,
    bound: usize,
    visit: &mut impl FnMut(&StrategyMachine) -> Result<(), E>,
) -> Result<(), E> {
    let mut partial = Partial {
        updates: BTreeMap::new(),
        moves: BTreeMap::new(),
        used: 1,
    };
    extend(arena, bound.max(1), &mut partial, visit)
}

struct Partial {
    updates: BTreeMap<(usize, usize), usize>,
    moves: BTreeMap<(usize, usize), usize>,
    used: usize,
}

enum Pending {
    Update(usize, usize),
    Move(usize, usize),
}

fn first_pending(arena: &Arena, p: &Partial) -> Option<Pending> {
    let start = (arena.initial(), 0usize);
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((v, m)) = queue.pop_front() {
        let Some(&m2) = p.updates.get(&(m, v)) else {
            return Some(Pending::Update(m, v));
        };
        let targets: Vec<usize> = if arena.owner(v) == Player::One {
            match p.moves.get(&(m, v)) {
                Some(&w) => vec![w],
                None => return Some(Pending::Move(m, v)),
            }
        } else {
            arena.successors(v).to_vec()
        };
        for w in targets {
            if seen.insert((w, m2)) {
                queue.push_back((w, m2));
            }
        }
    }
    None
}

fn extend<E>(
    arena: &Arena,
    bound: usize,
    p: &mut Partial,
    visit: &mut impl FnMut(&StrategyMachine) -> Result<(), E>,
) -> Result<(), E> {
    match first_pending(arena, p) {
        None => {
            let machine = StrategyMachine {
                name: format!("enum{}", p.used),
                memory: (0..p.used).map(|k| format!("m{k}")).collect(),
                initial: 0,
                updates: p.updates.clone(),
                moves: p.moves.clone(),
            };
            visit(&machine)
        }
        Some(Pending::Update(m, v)) => {
            let limit = (p.used + 1).min(bound);
            for m2 in 0..limit {
                let grew = m2 == p.used;
                if grew {
                    p.used += 1;
                }
                p.updates.insert((m, v), m2);
                let r = extend(arena, bound, p, visit);
                p.updates.remove(&(m, v));
                if grew {
                    p.used -= 1;
                }
                r?;
            }
            Ok(())
        }
        Some(Pending::Move(m, v)) => {
            for &w in arena.successors(v) {
                p.moves.insert((m, v), w);
                let r = extend(arena, bound, p, visit);
                p.moves.remove(&(m, v));
                r?;
            }
            Ok(())
        }
    }
}
