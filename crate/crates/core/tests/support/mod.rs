//! Random instance generators and brute-force oracles shared by the
//! integration tests. Nothing here calls the information-state tracker,
//! the elimination or the game solver: related plays are enumerated
//! explicitly and confirmed with `relates`.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unisynt_core::arena::{validate_arena, RawPosition};
use unisynt_core::omega::universal_positions;
use unisynt_core::relations::{relates, Transition};
use unisynt_core::rltl::eval_ltl_lasso;
use unisynt_core::{
    Arena, Elimination, Formula, Lasso, ParityGame, Player, RawArena, RelationTransducer,
    StrategyMachine,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A bipartite arena with `2..=max` positions, out-degree 1 or 2, and
/// random labels over `props`.
pub fn random_arena(rng: &mut ChaCha8Rng, max: usize, props: &[&str]) -> Arena {
    let n = rng.gen_range(2..=max.max(2));
    let mut owner: Vec<Player> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Player::One
            } else {
                Player::Two
            }
        })
        .collect();
    owner[0] = Player::One;
    owner[1] = Player::Two;
    let mut raw = RawArena {
        name: "rand".into(),
        positions: Vec::new(),
        edges: Vec::new(),
        init: Some("s0".into()),
    };
    for (v, &o) in owner.iter().enumerate() {
        let labels = props
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|p| p.to_string())
            .collect();
        raw.positions.push(RawPosition {
            id: format!("s{v}"),
            owner: o,
            props: labels,
        });
    }
    for v in 0..n {
        let others: Vec<usize> = (0..n).filter(|&w| owner[w] != owner[v]).collect();
        let k = rng.gen_range(1..=2.min(others.len()));
        for &w in others.choose_multiple(rng, k) {
            raw.edges.push((format!("s{v}"), format!("s{w}")));
        }
    }
    validate_arena(&raw).expect("generated arena is valid")
}

/// A transducer with `1..=max_states` states over the positions of
/// `arena`. With `synchronous`, every transition reads and writes one
/// letter.
pub fn random_transducer(
    rng: &mut ChaCha8Rng,
    arena: &Arena,
    max_states: usize,
    synchronous: bool,
) -> RelationTransducer {
    let n = rng.gen_range(1..=max_states);
    let mut finals: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let f = rng.gen_range(0..n);
    finals[f] = true;
    let letter = |rng: &mut ChaCha8Rng, eps: bool| -> Option<usize> {
        if eps && rng.gen_bool(0.25) {
            None
        } else {
            Some(rng.gen_range(0..arena.len()))
        }
    };
    let mut transitions = Vec::new();
    for q in 0..n {
        // mostly letter-preserving moves so that relations are not empty
        for v in arena.positions() {
            if rng.gen_bool(0.6) {
                let to = rng.gen_range(0..n);
                transitions.push(Transition {
                    from: q,
                    input: Some(v),
                    output: Some(v),
                    to,
                });
            }
        }
        for _ in 0..rng.gen_range(0..=3) {
            let input = letter(rng, !synchronous);
            let output = letter(rng, !synchronous);
            let to = rng.gen_range(0..n);
            transitions.push(Transition {
                from: q,
                input,
                output,
                to,
            });
        }
    }
    transitions.sort();
    transitions.dedup();
    RelationTransducer {
        name: "rand".into(),
        states: (0..n).map(|q| format!("t{q}")).collect(),
        initial: 0,
        finals,
        transitions,
    }
}

/// A random `R`-free formula with about `size` nodes.
pub fn random_ltl(rng: &mut ChaCha8Rng, size: usize, atoms: &[&str]) -> Formula {
    random_formula(rng, size, atoms, &mut |_| None)
}

fn random_formula(
    rng: &mut ChaCha8Rng,
    size: usize,
    atoms: &[&str],
    leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> Option<Formula>,
) -> Formula {
    if size <= 1 {
        if let Some(f) = leaf(rng) {
            return f;
        }
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            _ => Formula::atom(*atoms.choose(rng).expect("atoms")),
        };
    }
    match rng.gen_range(0..7) {
        0 => Formula::not(random_formula(rng, size - 1, atoms, leaf)),
        1 => Formula::next(random_formula(rng, size - 1, atoms, leaf)),
        2 => Formula::globally(random_formula(rng, size - 1, atoms, leaf)),
        3 => Formula::eventually(random_formula(rng, size - 1, atoms, leaf)),
        k => {
            let left = rng.gen_range(1..size);
            let a = random_formula(rng, left, atoms, leaf);
            let b = random_formula(rng, (size - 1).saturating_sub(left).max(1), atoms, leaf);
            match k {
                4 => Formula::and(a, b),
                5 => Formula::or(a, b),
                _ => Formula::until(a, b),
            }
        }
    }
}

/// A formula of `R`-depth exactly 1.
pub fn random_depth1(rng: &mut ChaCha8Rng, size: usize, atoms: &[&str]) -> Formula {
    loop {
        let inner_atoms = atoms.to_vec();
        let f = random_formula(rng, size, atoms, &mut |rng| {
            rng.gen_bool(0.4).then(|| {
                let s = rng.gen_range(1..=3);
                Formula::rel(random_ltl(rng, s, &inner_atoms))
            })
        });
        if f.r_depth() == 1 {
            return f;
        }
        if f.r_depth() == 0 && size >= 2 {
            let s = rng.gen_range(1..=2);
            let r = Formula::rel(random_ltl(rng, s, atoms));
            let g = if rng.gen_bool(0.5) {
                Formula::and(f, r)
            } else {
                Formula::until(f, r)
            };
            if g.r_depth() == 1 {
                return g;
            }
        }
    }
}

/// Boolean and `X` combinations only.
fn random_local(
    rng: &mut ChaCha8Rng,
    size: usize,
    atoms: &[&str],
    leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> Option<Formula>,
) -> Formula {
    if size <= 1 {
        if let Some(f) = leaf(rng) {
            return f;
        }
        return Formula::atom(*atoms.choose(rng).expect("atoms"));
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_local(rng, size - 1, atoms, leaf)),
        1 => Formula::next(random_local(rng, size - 1, atoms, leaf)),
        k => {
            let a = random_local(rng, size / 2, atoms, leaf);
            let b = random_local(rng, size - 1 - size / 2, atoms, leaf);
            if k == 2 {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
    }
}

/// A formula of `R`-depth 2 whose outer `R` bodies use only Boolean
/// connectives and `X` around inner `R ψ` (the shape the nested oracle
/// below can evaluate exactly).
pub fn random_depth2(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Formula {
    loop {
        let inner = |rng: &mut ChaCha8Rng| {
            let s = rng.gen_range(1..=2);
            Formula::rel(random_ltl(rng, s, atoms))
        };
        let depth = rng.gen_range(1..=3);
        let body = random_local(rng, depth, atoms, &mut |rng| {
            rng.gen_bool(0.5).then(|| inner(rng))
        });
        let body = if body.r_depth() == 0 {
            Formula::and(body, inner(rng))
        } else {
            body
        };
        let outer = Formula::rel(body);
        let top = match rng.gen_range(0..4) {
            0 => outer,
            1 => Formula::globally(Formula::or(Formula::atom(atoms[0]), outer)),
            2 => Formula::eventually(Formula::not(outer)),
            _ => Formula::until(Formula::atom(*atoms.choose(rng).expect("atoms")), outer),
        };
        if top.r_depth() == 2 {
            return top;
        }
    }
}

/// A lasso play with stem plus cycle of at most `max_len` positions.
pub fn random_lasso_play(rng: &mut ChaCha8Rng, arena: &Arena, max_len: usize) -> Lasso<usize> {
    loop {
        let len = rng.gen_range(1..=max_len);
        let mut walk = vec![arena.initial()];
        while walk.len() < len {
            let v = *walk.last().expect("nonempty");
            walk.push(*arena.successors(v).choose(rng).expect("no dead ends"));
        }
        let last = *walk.last().expect("nonempty");
        let starts: Vec<usize> = (0..walk.len())
            .filter(|&i| arena.has_edge(last, walk[i]))
            .collect();
        if let Some(&i) = starts.choose(rng) {
            let cycle = walk.split_off(i);
            let l = Lasso::new(walk, cycle);
            assert!(arena.is_lasso_play(&l));
            return l;
        }
    }
}

pub fn prefix(word: &Lasso<usize>, i: usize) -> Vec<usize> {
    (0..=i).map(|k| *word.at(k)).collect()
}

/// Last positions of all plays `ρ'` with `relates(t, ρ, ρ')`.
///
/// Depth-first search over output words ρ' that are plays of the arena.
/// Each search node records the set of pairs (state, number of input
/// letters consumed) reachable while writing exactly ρ'; nodes with equal
/// last position and equal set have equal futures, which bounds the search.
/// Every witness found is re-checked with `relates`.
pub fn direct_info_set(t: &RelationTransducer, arena: &Arena, rho: &[usize]) -> BTreeSet<usize> {
    let n = rho.len();
    let close = |set: BTreeSet<(usize, usize)>| -> BTreeSet<(usize, usize)> {
        let mut out = set.clone();
        let mut stack: Vec<(usize, usize)> = set.into_iter().collect();
        while let Some((q, i)) = stack.pop() {
            for tr in t
                .transitions
                .iter()
                .filter(|tr| tr.from == q && tr.output.is_none())
            {
                let next = match tr.input {
                    None => (tr.to, i),
                    Some(a) if i < n && rho[i] == a => (tr.to, i + 1),
                    _ => continue,
                };
                if out.insert(next) {
                    stack.push(next);
                }
            }
        }
        out
    };
    let advance = |set: &BTreeSet<(usize, usize)>, w: usize| -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &(q, i) in set {
            for tr in t
                .transitions
                .iter()
                .filter(|tr| tr.from == q && tr.output == Some(w))
            {
                match tr.input {
                    None => {
                        out.insert((tr.to, i));
                    }
                    Some(a) if i < n && rho[i] == a => {
                        out.insert((tr.to, i + 1));
                    }
                    _ => {}
                }
            }
        }
        close(out)
    };
    let start = close(BTreeSet::from([(t.initial, 0)]));
    let mut found = BTreeSet::new();
    let mut seen: BTreeSet<(usize, BTreeSet<(usize, usize)>)> = BTreeSet::new();
    type Node = (Vec<usize>, BTreeSet<(usize, usize)>);
    let mut stack: Vec<Node> = Vec::new();
    let first = advance(&start, arena.initial());
    if !first.is_empty() {
        stack.push((vec![arena.initial()], first));
    }
    while let Some((path, set)) = stack.pop() {
        let last = *path.last().expect("nonempty");
        if !seen.insert((last, set.clone())) {
            continue;
        }
        if set.iter().any(|&(q, i)| i == n && t.finals[q]) {
            assert!(relates(t, rho, &path), "oracle witness rejected by relates");
            found.insert(last);
        }
        for &w in arena.successors(last) {
            let next = advance(&set, w);
            if !next.is_empty() {
                let mut p = path.clone();
                p.push(w);
                stack.push((p, next));
            }
        }
    }
    found
}

/// All plays `ρ'` of the same length as `ρ` with `relates(t, ρ, ρ')`, for
/// letter-to-letter transducers. Branches are cut once no transducer state
/// is reachable.
pub fn related_plays_sync(t: &RelationTransducer, arena: &Arena, rho: &[usize]) -> Vec<Vec<usize>> {
    assert!(t.is_synchronous());
    let step = |states: &BTreeSet<usize>, a: usize, b: usize| -> BTreeSet<usize> {
        t.transitions
            .iter()
            .filter(|tr| states.contains(&tr.from) && tr.input == Some(a) && tr.output == Some(b))
            .map(|tr| tr.to)
            .collect()
    };
    let mut out = Vec::new();
    let start = step(&BTreeSet::from([t.initial]), rho[0], arena.initial());
    let mut stack = Vec::new();
    if !start.is_empty() {
        stack.push((vec![arena.initial()], start));
    }
    while let Some((path, states)) = stack.pop() {
        if path.len() == rho.len() {
            if states.iter().any(|&q| t.finals[q]) {
                assert!(relates(t, rho, &path));
                out.push(path);
            }
            continue;
        }
        let last = *path.last().expect("nonempty");
        for &w in arena.successors(last) {
            let next = step(&states, rho[path.len()], w);
            if !next.is_empty() {
                let mut p = path.clone();
                p.push(w);
                stack.push((p, next));
            }
        }
    }
    out
}

/// Direct fully-uniform semantics of `R` subformulas, memoized per
/// (subformula, prefix).
pub struct DirectSemantics<'a> {
    pub arena: &'a Arena,
    pub t: &'a RelationTransducer,
    universal: BTreeMap<Formula, Vec<bool>>,
    memo: HashMap<(Formula, Vec<usize>), bool>,
}

fn x_depth(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::Atom(_) | Formula::Rel(_) => 0,
        Formula::Not(a) => x_depth(a),
        Formula::Next(a) => 1 + x_depth(a),
        Formula::And(a, b) | Formula::Until(a, b) => x_depth(a).max(x_depth(b)),
    }
}

impl<'a> DirectSemantics<'a> {
    pub fn new(arena: &'a Arena, t: &'a RelationTransducer) -> Self {
        DirectSemantics {
            arena,
            t,
            universal: BTreeMap::new(),
            memo: HashMap::new(),
        }
    }

    fn universal(&mut self, body: &Formula) -> Vec<bool> {
        if let Some(u) = self.universal.get(body) {
            return u.clone();
        }
        let u = universal_positions(self.arena, body).expect("R-free body");
        self.universal.insert(body.clone(), u.clone());
        u
    }

    /// Truth of `rel` (an `R` node) after the finite play `prefix`.
    pub fn r_truth(&mut self, rel: &Formula, prefix: &[usize]) -> bool {
        let Formula::Rel(body) = rel else {
            panic!("not an R node")
        };
        let key = (rel.clone(), prefix.to_vec());
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let value = if body.is_r_free() {
            // The body only depends on the suffix from the last related
            // position, so universality per position decides it.
            let u = self.universal(body);
            direct_info_set(self.t, self.arena, prefix)
                .iter()
                .all(|&v| u[v])
        } else {
            let related = related_plays_sync(self.t, self.arena, prefix);
            related
                .iter()
                .all(|rho2| self.holds_on_all_extensions(body, rho2))
        };
        self.memo.insert(key, value);
        value
    }

    /// `body` (Boolean/`X` over atoms and `R` nodes) at the last index of
    /// `rho` on every continuation.
    fn holds_on_all_extensions(&mut self, body: &Formula, rho: &[usize]) -> bool {
        let d = x_depth(body);
        let mut exts = vec![rho.to_vec()];
        for _ in 0..d {
            let mut next = Vec::new();
            for e in &exts {
                for &w in self.arena.successors(*e.last().expect("nonempty")) {
                    let mut e2 = e.clone();
                    e2.push(w);
                    next.push(e2);
                }
            }
            exts = next;
        }
        let j = rho.len() - 1;
        exts.iter().all(|e| self.eval_local(body, e, j))
    }

    fn eval_local(&mut self, f: &Formula, word: &[usize], i: usize) -> bool {
        match f {
            Formula::True => true,
            Formula::Atom(p) => self.arena.holds(word[i], p),
            Formula::Not(a) => !self.eval_local(a, word, i),
            Formula::And(a, b) => self.eval_local(a, word, i) && self.eval_local(b, word, i),
            Formula::Next(a) => self.eval_local(a, word, i + 1),
            Formula::Rel(_) => self.r_truth(f, &word[..=i]),
            Formula::Until(..) => panic!("until under a nested R is outside the oracle's fragment"),
        }
    }
}

/// Outermost `R` subformulas of `f`, deduplicated.
pub fn outermost_r(f: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::Rel(_) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::True | Formula::Atom(_) => {}
            Formula::Not(a) | Formula::Next(a) => walk(a, out),
            Formula::And(a, b) | Formula::Until(a, b) => {
                walk(a, out);
                walk(b, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

/// Truth of `f` at index 0 of the base play `play`, evaluated on a lasso
/// of shape `(stem_len, cycle_len)` (a representation of the same play in
/// which every `R` truth value is periodic). Periodicity is checked over
/// one extra cycle. Also returns the truth of each outermost `R` node per
/// index.
pub fn direct_truth(
    sem: &mut DirectSemantics<'_>,
    f: &Formula,
    play: &Lasso<usize>,
    stem_len: usize,
    cycle_len: usize,
) -> (bool, Vec<(Formula, Vec<bool>)>) {
    let nodes = outermost_r(f);
    let horizon = stem_len + 2 * cycle_len;
    let mut table = Vec::new();
    for node in &nodes {
        let truth: Vec<bool> = (0..horizon)
            .map(|i| sem.r_truth(node, &prefix(play, i)))
            .collect();
        for i in stem_len..stem_len + cycle_len {
            assert_eq!(
                truth[i],
                truth[i + cycle_len],
                "R truth not periodic on the lifted shape"
            );
        }
        table.push((node.clone(), truth));
    }
    let names: BTreeMap<Formula, String> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), format!("oracle{k}")))
        .collect();
    let g = f.substitute(&names);
    let labels = |i: usize| -> BTreeSet<String> {
        let mut l = sem.arena.labels(*play.at(i)).clone();
        for (k, (_, truth)) in table.iter().enumerate() {
            if truth[i] {
                l.insert(format!("oracle{k}"));
            }
        }
        l
    };
    let word = Lasso::new(
        (0..stem_len).map(labels).collect::<Vec<_>>(),
        (stem_len..stem_len + cycle_len)
            .map(labels)
            .collect::<Vec<_>>(),
    );
    (
        eval_ltl_lasso(&g, &word, 0).expect("R-free after substitution"),
        table,
    )
}

/// Random strategy machine with at most `bound` memory states, defined on
/// all its reachable (position, memory) pairs.
pub fn random_machine(rng: &mut ChaCha8Rng, arena: &Arena, bound: usize) -> StrategyMachine {
    let mut updates = BTreeMap::new();
    let mut moves = BTreeMap::new();
    let mut seen = BTreeSet::from([(arena.initial(), 0usize)]);
    let mut stack = vec![(arena.initial(), 0usize)];
    while let Some((v, m)) = stack.pop() {
        let m2 = rng.gen_range(0..bound);
        updates.insert((m, v), m2);
        let targets: Vec<usize> = if arena.owner(v) == Player::One {
            let w = *arena.successors(v).choose(rng).expect("no dead ends");
            moves.insert((m, v), w);
            vec![w]
        } else {
            arena.successors(v).to_vec()
        };
        for w in targets {
            if seen.insert((w, m2)) {
                stack.push((w, m2));
            }
        }
    }
    StrategyMachine {
        name: "random".into(),
        memory: (0..bound).map(|k| format!("m{k}")).collect(),
        initial: 0,
        updates,
        moves,
    }
}

pub fn random_parity_game(rng: &mut ChaCha8Rng, max_nodes: usize, max_priority: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_nodes);
    let owner = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Player::One
            } else {
                Player::Two
            }
        })
        .collect();
    let succ = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=2.min(n));
            let all: Vec<usize> = (0..n).collect();
            all.choose_multiple(rng, k).copied().collect()
        })
        .collect();
    let priority = (0..n).map(|_| rng.gen_range(0..=max_priority)).collect();
    ParityGame {
        owner,
        succ,
        priority,
    }
}

fn choice_vectors(game: &ParityGame, player: Player) -> Vec<Vec<usize>> {
    let mut all = vec![vec![usize::MAX; game.len()]];
    for v in (0..game.len()).filter(|&v| game.owner[v] == player) {
        all = all
            .into_iter()
            .flat_map(|c| {
                game.succ[v].iter().map(move |&w| {
                    let mut c2 = c.clone();
                    c2[v] = w;
                    c2
                })
            })
            .collect();
    }
    all
}

/// Winner of the play from `v` when both players follow positional
/// choices.
pub fn play_winner(game: &ParityGame, choice1: &[usize], choice2: &[usize], v: usize) -> Player {
    let mut order = vec![usize::MAX; game.len()];
    let mut path = Vec::new();
    let mut u = v;
    while order[u] == usize::MAX {
        order[u] = path.len();
        path.push(u);
        u = if game.owner[u] == Player::One {
            choice1[u]
        } else {
            choice2[u]
        };
    }
    let top = path[order[u]..]
        .iter()
        .map(|&w| game.priority[w])
        .max()
        .expect("cycle");
    if top % 2 == 0 {
        Player::One
    } else {
        Player::Two
    }
}

/// Winning regions by enumerating all positional strategy pairs.
pub fn brute_parity(game: &ParityGame) -> Vec<Player> {
    let s1 = choice_vectors(game, Player::One);
    let s2 = choice_vectors(game, Player::Two);
    (0..game.len())
        .map(|v| {
            let wins = s1.iter().any(|c1| {
                s2.iter()
                    .all(|c2| play_winner(game, c1, c2, v) == Player::One)
            });
            if wins {
                Player::One
            } else {
                Player::Two
            }
        })
        .collect()
}

/// Whether Player 1's positional `strategy` wins from `v` against every
/// positional reply (enough by positional determinacy).
pub fn positional_strategy_wins(
    game: &ParityGame,
    strategy: &[Option<usize>],
    v: usize,
    player: Player,
) -> bool {
    let fixed: Vec<usize> = (0..game.len())
        .map(|u| strategy[u].unwrap_or(game.succ[u][0]))
        .collect();
    let others = choice_vectors(game, player.opponent());
    others.iter().all(|c| {
        let (c1, c2) = if player == Player::One {
            (&fixed, c)
        } else {
            (c, &fixed)
        };
        play_winner(game, c1, c2, v) == player
    })
}

/// All lasso plays from `start` with stem and cycle lengths bounded by
/// `max`, as position sequences.
pub fn all_lassos_from(arena: &Arena, start: usize, max: usize) -> Vec<Lasso<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![start]];
    while let Some(walk) = stack.pop() {
        let last = *walk.last().expect("nonempty");
        for i in 0..walk.len() {
            if arena.has_edge(last, walk[i]) && i <= max && walk.len() - i <= max {
                out.push(Lasso::new(walk[..i].to_vec(), walk[i..].to_vec()));
            }
        }
        if walk.len() < 2 * max {
            for &w in arena.successors(last) {
                let mut w2 = walk.clone();
                w2.push(w);
                stack.push(w2);
            }
        }
    }
    out
}

/// Replaces fresh atoms by the subformulas they stand for, recursively.
pub fn expand(f: &Formula, registry: &[(String, Formula)]) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::Atom(p) => match registry.iter().find(|(name, _)| name == p) {
            Some((_, g)) => expand(g, registry),
            None => f.clone(),
        },
        Formula::Not(a) => Formula::Not(Box::new(expand(a, registry))),
        Formula::Next(a) => Formula::Next(Box::new(expand(a, registry))),
        Formula::Rel(a) => Formula::Rel(Box::new(expand(a, registry))),
        Formula::And(a, b) => {
            Formula::And(Box::new(expand(a, registry)), Box::new(expand(b, registry)))
        }
        Formula::Until(a, b) => {
            Formula::Until(Box::new(expand(a, registry)), Box::new(expand(b, registry)))
        }
    }
}

/// Projects a final-layer position to layer `k`.
pub fn to_layer(elim: &Elimination, mut y: usize, k: usize) -> usize {
    for layer in elim.layers[k + 1..].iter().rev() {
        y = layer.parent[y];
    }
    y
}

/// Compares an elimination against the direct semantics along one base
/// play: the lifted play must project back to it, every fresh atom must
/// hold exactly where its subformula holds, and the final formula on the
/// lifted play must agree with `f` on the base play. Returns the truth
/// of `f`.
pub fn elimination_agrees(
    elim: &Elimination,
    sem: &mut DirectSemantics<'_>,
    f: &Formula,
    play: &Lasso<usize>,
) -> Result<bool, String> {
    let lifted = elim.lift_lasso(play).ok_or("play does not lift")?;
    let horizon = lifted.span() + play.span();
    for i in 0..horizon {
        if elim.to_tracked(*lifted.at(i)) != *play.at(i) {
            return Err(format!("lifted play projects wrongly at {i}"));
        }
    }
    for (k, layer) in elim.layers.iter().enumerate() {
        let registry = elim.registry();
        for (atom, rel) in &layer.fresh {
            let original = expand(rel, &registry);
            for i in 0..horizon {
                let y = to_layer(elim, *lifted.at(i), k);
                let expected = sem.r_truth(&original, &prefix(play, i));
                if layer.arena.holds(y, atom) != expected {
                    return Err(format!(
                        "{atom} = {original} wrong at index {i} of {play:?}"
                    ));
                }
            }
        }
    }
    let arena = elim.final_arena();
    let word = lifted.map(|&y| arena.labels(y).clone());
    let got = eval_ltl_lasso(&elim.formula, &word, 0).map_err(|e| e.to_string())?;
    let (expected, _) = direct_truth(sem, f, play, lifted.stem.len(), lifted.cycle.len());
    if got != expected {
        return Err(format!(
            "{f} on {play:?}: elimination says {got}, direct semantics {expected}"
        ));
    }
    Ok(expected)
}

/// Outcome graph of a machine built directly from its tables: nodes are
/// (position, memory before reading it). Returns the nodes and successors.
pub fn outcome_graph(
    arena: &Arena,
    machine: &StrategyMachine,
) -> (Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let mut nodes = vec![(arena.initial(), machine.initial)];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < nodes.len() {
        let (v, m) = nodes[k];
        let m2 = machine.updates.get(&(m, v)).copied().unwrap_or(m);
        let targets = if arena.owner(v) == Player::One {
            vec![*machine
                .moves
                .get(&(m, v))
                .expect("machine defined on reachable nodes")]
        } else {
            arena.successors(v).to_vec()
        };
        let mut out = Vec::new();
        for w in targets {
            let node = (w, m2);
            let i = match nodes.iter().position(|&n| n == node) {
                Some(i) => i,
                None => {
                    nodes.push(node);
                    nodes.len() - 1
                }
            };
            out.push(i);
        }
        succ.push(out);
        k += 1;
    }
    (nodes, succ)
}

/// An outcome of `machine` violating the `R`-free `f`, among lassos of the
/// outcome graph with stem and cycle of at most `max` nodes (raised to the
/// size of the outcome graph, so every simple cycle is seen).
pub fn machine_violation(
    arena: &Arena,
    machine: &StrategyMachine,
    f: &Formula,
    max: usize,
) -> Option<Lasso<usize>> {
    let (nodes, succ) = outcome_graph(arena, machine);
    let max = max.max(nodes.len());
    let mut stack = vec![vec![0usize]];
    while let Some(walk) = stack.pop() {
        let last = *walk.last().expect("nonempty");
        for i in 0..walk.len() {
            if succ[last].contains(&walk[i]) && i <= max && walk.len() - i <= max {
                let l = Lasso::new(walk[..i].to_vec(), walk[i..].to_vec()).map(|&n| nodes[n].0);
                let word = l.map(|&v| arena.labels(v).clone());
                if !eval_ltl_lasso(f, &word, 0).expect("R-free") {
                    return Some(l);
                }
            }
        }
        if walk.len() < 2 * max {
            for &w in &succ[last] {
                let mut w2 = walk.clone();
                w2.push(w);
                stack.push(w2);
            }
        }
    }
    None
}

/// All positional machines (one memory state) of an arena.
pub fn positional_machines(arena: &Arena) -> Vec<StrategyMachine> {
    let mut all = vec![BTreeMap::new()];
    for v in arena.positions().filter(|&v| arena.owner(v) == Player::One) {
        all = all
            .into_iter()
            .flat_map(|moves: BTreeMap<(usize, usize), usize>| {
                arena.successors(v).iter().map(move |&w| {
                    let mut m = moves.clone();
                    m.insert((0, v), w);
                    m
                })
            })
            .collect();
    }
    all.into_iter()
        .map(|moves| StrategyMachine {
            name: "positional".into(),
            memory: vec!["m0".into()],
            initial: 0,
            updates: BTreeMap::new(),
            moves,
        })
        .collect()
}
