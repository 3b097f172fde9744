//! Parity games, LTL games on arenas and fully-uniform synthesis.
//!
//! Parity convention: the highest priority seen infinitely often decides,
//! even priorities are good for Player 1.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::arena::{Arena, Player, StrategyMachine};
use crate::elimination::{eliminate_all_capped, ElimError, Elimination, LayerStats};
use crate::omega::{ltl_to_nba_over, Alphabet, DetParityAutomaton};
use crate::relations::RelationTransducer;
use crate::rltl::{Formula, FormulaError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub succ: Vec<Vec<usize>>,
    pub priority: Vec<u32>,
}

/// Winning regions and positional winning strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySolution {
    pub winner: Vec<Player>,
    /// For every node, the successor its owner plays if the owner wins there.
    pub strategy: Vec<Option<usize>>,
}

impl ParityGame {
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, ws) in self.succ.iter().enumerate() {
            for &w in ws {
                pred[w].push(v);
            }
        }
        pred
    }
}

fn player_of(p: u32) -> Player {
    if p.is_multiple_of(2) {
        Player::One
    } else {
        Player::Two
    }
}

struct Solver<'a> {
    game: &'a ParityGame,
    pred: Vec<Vec<usize>>,
}

impl Solver<'_> {
    /// Attractor for `player` to `target` inside the subgame `mask`. Fills
    /// `strategy` for attracted nodes of `player` outside the target.
    fn attractor(
        &self,
        mask: &[bool],
        player: Player,
        target: &[bool],
        strategy: &mut [Option<usize>],
    ) -> Vec<bool> {
        let g = self.game;
        let mut attr = target.to_vec();
        let mut count: Vec<usize> = (0..g.len())
            .map(|v| {
                if mask[v] {
                    g.succ[v].iter().filter(|&&w| mask[w]).count()
                } else {
                    0
                }
            })
            .collect();
        let mut queue: VecDeque<usize> = (0..g.len()).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop_front() {
            for &v in &self.pred[w] {
                if !mask[v] || attr[v] {
                    continue;
                }
                if g.owner[v] == player {
                    attr[v] = true;
                    strategy[v] = Some(w);
                    queue.push_back(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        attr
    }

    fn solve(&self, mask: &[bool], winner: &mut [Player], strategy: &mut [Option<usize>]) {
        let g = self.game;
        let Some(p) = (0..g.len())
            .filter(|&v| mask[v])
            .map(|v| g.priority[v])
            .max()
        else {
            return;
        };
        let alpha = player_of(p);
        let top: Vec<bool> = (0..g.len())
            .map(|v| mask[v] && g.priority[v] == p)
            .collect();
        let mut attr_strategy = vec![None; g.len()];
        let a = self.attractor(mask, alpha, &top, &mut attr_strategy);
        let rest: Vec<bool> = (0..g.len()).map(|v| mask[v] && !a[v]).collect();
        self.solve(&rest, winner, strategy);
        let opp_wins: Vec<bool> = (0..g.len())
            .map(|v| rest[v] && winner[v] != alpha)
            .collect();
        if !opp_wins.iter().any(|&b| b) {
            for v in (0..g.len()).filter(|&v| a[v]) {
                winner[v] = alpha;
                if g.owner[v] == alpha {
                    strategy[v] = if top[v] {
                        g.succ[v].iter().copied().find(|&w| mask[w])
                    } else {
                        attr_strategy[v]
                    };
                }
            }
            return;
        }
        let mut b_strategy = vec![None; g.len()];
        let b = self.attractor(mask, alpha.opponent(), &opp_wins, &mut b_strategy);
        let rest2: Vec<bool> = (0..g.len()).map(|v| mask[v] && !b[v]).collect();
        for v in (0..g.len()).filter(|&v| b[v]) {
            winner[v] = alpha.opponent();
            if !opp_wins[v] && g.owner[v] == alpha.opponent() {
                strategy[v] = b_strategy[v];
            }
        }
        self.solve(&rest2, winner, strategy);
    }
}

/// Solves a parity game with Zielonka's recursive algorithm.
pub fn zielonka_solve(game: &ParityGame) -> ParitySolution {
    let solver = Solver {
        game,
        pred: game.predecessors(),
    };
    let mut winner = vec![Player::One; game.len()];
    let mut strategy = vec![None; game.len()];
    solver.solve(&vec![true; game.len()], &mut winner, &mut strategy);
    for v in 0..game.len() {
        if winner[v] != game.owner[v] {
            strategy[v] = None;
        }
    }
    ParitySolution { winner, strategy }
}

/// Winner of the play `stem · cycle^ω` of a parity game.
pub fn cycle_winner(game: &ParityGame, cycle: &[usize]) -> Player {
    let p = cycle
        .iter()
        .map(|&v| game.priority[v])
        .max()
        .expect("nonempty cycle");
    player_of(p)
}

/// Checks that `strategy` is positional and winning for `player` from every
/// node of `region`: the region is closed under the strategy and opponent
/// moves, and every cycle of the restricted graph is won by `player`.
pub fn strategy_is_winning(
    game: &ParityGame,
    player: Player,
    region: &[bool],
    strategy: &[Option<usize>],
) -> bool {
    let n = game.len();
    let mut succ = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| region[v]) {
        if game.owner[v] == player {
            match strategy[v] {
                Some(w) if game.succ[v].contains(&w) && region[w] => succ[v].push(w),
                _ => return false,
            }
        } else {
            for &w in &game.succ[v] {
                if !region[w] {
                    return false;
                }
                succ[v].push(w);
            }
        }
    }
    // A losing cycle exists iff for some losing priority p, the subgraph of
    // nodes with priority <= p has a cycle through a node of priority p.
    let mut priorities: Vec<u32> = (0..n)
        .filter(|&v| region[v])
        .map(|v| game.priority[v])
        .collect();
    priorities.sort_unstable();
    priorities.dedup();
    for p in priorities.into_iter().filter(|&p| player_of(p) != player) {
        let sub: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if region[v] && game.priority[v] <= p {
                    succ[v]
                        .iter()
                        .copied()
                        .filter(|&w| game.priority[w] <= p)
                        .collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let (comp, count) = crate::graph::sccs(&sub);
        let cyclic = crate::graph::cyclic_components(&sub, &comp, count);
        if (0..n).any(|v| region[v] && game.priority[v] == p && cyclic[comp[v]]) {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GameStats {
    pub nba_states: usize,
    pub dpa_states: usize,
    pub game_nodes: usize,
    pub max_priority: u32,
}

/// Outcome of solving an LTL game.
#[derive(Clone, Debug)]
pub struct LtlGameResult {
    pub realizable: bool,
    /// Winning strategy for Player 1 from the initial position; its memory
    /// states are states of the deterministic parity automaton.
    pub machine: Option<StrategyMachine>,
    pub stats: GameStats,
}

/// Solves the game on `arena` in which Player 1 must ensure the `R`-free
/// formula `f`.
pub fn ltl_game(arena: &Arena, f: &Formula) -> Result<LtlGameResult, FormulaError> {
    if !f.is_r_free() {
        return Err(FormulaError::ContainsModality);
    }
    let alphabet = Alphabet::new(f.atoms());
    let letters = alphabet.arena_letters(arena);
    let nba = ltl_to_nba_over(f, alphabet)?;
    let nba_states = nba.len();
    let mut dpa = DetParityAutomaton::new(nba);

    let start = (arena.initial(), dpa.initial());
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut nodes = vec![start];
    index.insert(start, 0);
    let mut game = ParityGame {
        owner: Vec::new(),
        succ: Vec::new(),
        priority: Vec::new(),
    };
    let mut next_state = Vec::new();
    let mut k = 0;
    while k < nodes.len() {
        let (v, d) = nodes[k];
        let (d2, p) = dpa.step(d, letters[v]);
        let mut out = Vec::new();
        for &w in arena.successors(v) {
            let key = (w, d2);
            let id = *index.entry(key).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            });
            out.push(id);
        }
        game.owner.push(arena.owner(v));
        game.succ.push(out);
        game.priority.push(p);
        next_state.push(d2);
        k += 1;
    }
    let solution = zielonka_solve(&game);
    let stats = GameStats {
        nba_states,
        dpa_states: dpa.len(),
        game_nodes: game.len(),
        max_priority: game.priority.iter().copied().max().unwrap_or(0),
    };
    if solution.winner[0] != Player::One {
        return Ok(LtlGameResult {
            realizable: false,
            machine: None,
            stats,
        });
    }

    // Memory is the automaton state before reading the position.
    let mut mem_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut memory = Vec::new();
    let mut mem = |d: usize, memory: &mut Vec<String>| -> usize {
        *mem_index.entry(d).or_insert_with(|| {
            memory.push(format!("q{d}"));
            memory.len() - 1
        })
    };
    let initial = mem(nodes[0].1, &mut memory);
    let mut updates = BTreeMap::new();
    let mut moves = BTreeMap::new();
    let mut seen = vec![false; game.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let (v, d) = nodes[n];
        let m = mem(d, &mut memory);
        let m2 = mem(next_state[n], &mut memory);
        updates.insert((m, v), m2);
        let targets: Vec<usize> = if game.owner[n] == Player::One {
            let t = solution.strategy[n].expect("winning Player-1 node has a move");
            moves.insert((m, v), nodes[t].0);
            vec![t]
        } else {
            game.succ[n].clone()
        };
        for t in targets {
            debug_assert_eq!(solution.winner[t], Player::One);
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    let machine = StrategyMachine {
        name: format!("{}-winner", arena.name()),
        memory,
        initial,
        updates,
        moves,
    };
    Ok(LtlGameResult {
        realizable: true,
        machine: Some(machine),
        stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisStats {
    pub layers: Vec<LayerStats>,
    pub game: GameStats,
    pub machine_memory: usize,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub realizable: bool,
    /// A finite-memory strategy on the base arena, when realizable.
    pub machine: Option<StrategyMachine>,
    pub formula: Formula,
    pub stats: SynthesisStats,
}

/// Decides whether Player 1 has a fully-uniform strategy for `f` and
/// returns one as a machine over the base arena.
pub fn synthesize_fully_uniform(
    arena: &Arena,
    t: &RelationTransducer,
    f: &Formula,
    cap: usize,
) -> Result<SynthesisResult, ElimError> {
    let elim = eliminate_all_capped(arena, t, f, cap)?;
    let game = ltl_game(elim.final_arena(), &elim.formula)?;
    let machine = game
        .machine
        .as_ref()
        .map(|m| trace_back_machine(arena, &elim, m));
    let stats = SynthesisStats {
        layers: elim.stats(),
        game: game.stats.clone(),
        machine_memory: machine.as_ref().map_or(0, |m| m.memory_size()),
    };
    Ok(SynthesisResult {
        realizable: game.realizable,
        machine,
        formula: elim.formula.clone(),
        stats,
    })
}

/// Turns a strategy on the last layer into one on the base arena. The base
/// memory records the current layer position (none before the first move)
/// and the layer strategy's memory.
pub fn trace_back_machine(
    base: &Arena,
    elim: &Elimination,
    layer_machine: &StrategyMachine,
) -> StrategyMachine {
    type Key = (Option<usize>, usize);
    let layer = elim.final_arena();
    let mut index: BTreeMap<Key, usize> = BTreeMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut intern = |k: Key, keys: &mut Vec<Key>| -> usize {
        *index.entry(k).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        })
    };
    let start: Key = (None, layer_machine.initial);
    let initial = intern(start, &mut keys);
    let mut updates = BTreeMap::new();
    let mut moves = BTreeMap::new();
    let mut seen: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    let mut queue = VecDeque::from([(base.initial(), initial)]);
    seen.insert((base.initial(), initial), ());
    while let Some((v, m)) = queue.pop_front() {
        let (prev, lm) = keys[m];
        let y = match prev {
            None => layer.initial(),
            Some(p) => elim
                .lift_step(p, v)
                .expect("base move has a layer counterpart"),
        };
        debug_assert_eq!(elim.to_tracked(y), v);
        let m2 = intern((Some(y), layer_machine.update(lm, y)), &mut keys);
        updates.insert((m, v), m2);
        let targets: Vec<usize> = if base.owner(v) == Player::One {
            let y2 = layer_machine
                .output(lm, y)
                .expect("layer strategy is defined on its outcome");
            let w = elim.to_tracked(y2);
            moves.insert((m, v), w);
            vec![w]
        } else {
            base.successors(v).to_vec()
        };
        for w in targets {
            if seen.insert((w, m2), ()).is_none() {
                queue.push_back((w, m2));
            }
        }
    }
    StrategyMachine {
        name: format!("{}-uniform", base.name()),
        memory: (0..keys.len()).map(|k| format!("m{k}")).collect(),
        initial,
        updates,
        moves,
    }
}
