//! Graphviz exports and the elimination debug dump.

use std::fmt::Write as _;

use unisynt_core::omega::BuchiAutomaton;
use unisynt_core::{Arena, Elimination, Lasso, Player, RelationTransducer, StrategyMachine};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn node_label(arena: &Arena, v: usize) -> String {
    let props: Vec<&str> = arena.labels(v).iter().map(String::as_str).collect();
    format!("{} | {}", arena.id(v), props.join(","))
}

/// Player-1 positions are diamonds, Player-2 positions boxes.
pub fn arena_dot(arena: &Arena) -> String {
    let mut out = format!("digraph {} {{\n", quote(arena.name()));
    out.push_str("  start [shape=point];\n");
    for v in arena.positions() {
        let shape = match arena.owner(v) {
            Player::One => "diamond",
            Player::Two => "box",
        };
        let _ = writeln!(
            out,
            "  n{v} [shape={shape}, label={}];",
            quote(&node_label(arena, v))
        );
    }
    let _ = writeln!(out, "  start -> n{};", arena.initial());
    for v in arena.positions() {
        for &w in arena.successors(v) {
            let _ = writeln!(out, "  n{v} -> n{w};");
        }
    }
    out.push_str("}\n");
    out
}

/// Memory states as nodes; an edge `m -> m'` labelled `v / w` for every
/// update at position `v`, with the move `w` when `v` is a Player-1
/// position.
pub fn machine_dot(machine: &StrategyMachine, arena: &Arena) -> String {
    let mut out = format!("digraph {} {{\n", quote(&machine.name));
    out.push_str("  start [shape=point];\n");
    for (m, id) in machine.memory.iter().enumerate() {
        let _ = writeln!(out, "  m{m} [shape=circle, label={}];", quote(id));
    }
    let _ = writeln!(out, "  start -> m{};", machine.initial);
    let mut keys: Vec<(usize, usize)> = machine
        .updates
        .keys()
        .chain(machine.moves.keys())
        .copied()
        .collect();
    keys.sort_unstable();
    keys.dedup();
    for (m, v) in keys {
        let m2 = machine.update(m, v);
        let label = match machine.output(m, v) {
            Some(w) => format!("{} / {}", arena.id(v), arena.id(w)),
            None => arena.id(v).to_string(),
        };
        let _ = writeln!(out, "  m{m} -> m{m2} [label={}];", quote(&label));
    }
    out.push_str("}\n");
    out
}

/// A lasso play drawn as a path closing into its cycle.
pub fn lasso_dot(arena: &Arena, lasso: &Lasso<usize>) -> String {
    let mut out = String::from("digraph counterexample {\n  rankdir=LR;\n");
    let all: Vec<usize> = lasso
        .stem
        .iter()
        .chain(lasso.cycle.iter())
        .copied()
        .collect();
    for (i, &v) in all.iter().enumerate() {
        let shape = if arena.owner(v) == Player::One {
            "diamond"
        } else {
            "box"
        };
        let _ = writeln!(
            out,
            "  s{i} [shape={shape}, label={}];",
            quote(&format!("{i}: {}", node_label(arena, v)))
        );
    }
    for i in 1..all.len() {
        let _ = writeln!(out, "  s{} -> s{i};", i - 1);
    }
    let _ = writeln!(out, "  s{} -> s{};", all.len() - 1, lasso.stem.len());
    out.push_str("}\n");
    out
}

pub fn nba_dot(a: &BuchiAutomaton) -> String {
    let atoms: Vec<&String> = a.alphabet.atoms.iter().collect();
    let mut out = String::from("digraph nba {\n  start [shape=point];\n");
    for s in 0..a.len() {
        let shape = if a.accepting[s] {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  s{s} [shape={shape}];");
    }
    for &s in &a.initial {
        let _ = writeln!(out, "  start -> s{s};");
    }
    for (s, ts) in a.transitions.iter().enumerate() {
        for (g, t) in ts {
            let mut lits = Vec::new();
            for (k, atom) in atoms.iter().enumerate() {
                if g.pos >> k & 1 == 1 {
                    lits.push(atom.to_string());
                } else if g.neg >> k & 1 == 1 {
                    lits.push(format!("!{atom}"));
                }
            }
            let label = if lits.is_empty() {
                "true".to_string()
            } else {
                lits.join(" & ")
            };
            let _ = writeln!(out, "  s{s} -> s{t} [label={}];", quote(&label));
        }
    }
    out.push_str("}\n");
    out
}

/// Text dump of every layer: fresh atoms, positions with their information
/// states, and edges.
pub fn elimination_dump(elim: &Elimination, t: &RelationTransducer, base: &Arena) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "formula {}", elim.formula);
    for layer in &elim.layers {
        let s = &layer.stats;
        let _ = writeln!(
            out,
            "layer {} positions={} infostates={}",
            s.round, s.positions, s.infostates
        );
        for (atom, f) in &layer.fresh {
            let _ = writeln!(out, "  fresh {atom} := {f}");
        }
        let prev = |x: usize| -> String {
            if s.round == 1 {
                elim.tracked.id(x).to_string()
            } else {
                x.to_string()
            }
        };
        for y in layer.arena.positions() {
            let info = &layer.infostates[layer.infostate[y]];
            let configs: Vec<String> = info
                .configs()
                .iter()
                .map(|&(q, last)| {
                    let last = if last == unisynt_core::relations::BOTTOM {
                        "_".to_string()
                    } else if s.round == 1 {
                        elim.tracked.id(last as usize).to_string()
                    } else {
                        last.to_string()
                    };
                    format!("({},{})", t.states[q as usize], last)
                })
                .collect();
            let props: Vec<&str> = layer.arena.labels(y).iter().map(String::as_str).collect();
            let succ: Vec<String> = layer
                .arena
                .successors(y)
                .iter()
                .map(|z| z.to_string())
                .collect();
            let _ = writeln!(
                out,
                "  {y}: over {} base {} S={{{}}} props={} -> {}",
                prev(layer.parent[y]),
                base.id(elim.letter(y)),
                configs.join(","),
                props.join(","),
                succ.join(",")
            );
        }
    }
    out
}
