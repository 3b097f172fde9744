//! Line-based text formats for arenas, transducers, observation pairs and
//! strategy machines. Blank lines and `#` comments are ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use unisynt_core::arena::{Player, RawArena, RawPosition};
use unisynt_core::relations::RawTransducer;
use unisynt_core::{Arena, Lasso, StrategyMachine};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let words: Vec<&str> = l.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

pub fn parse_arena(text: &str) -> Result<RawArena, FormatError> {
    let mut raw = RawArena::default();
    let mut named = false;
    for (n, words) in lines(text) {
        match words[0] {
            "arena" if words.len() == 2 && !named => {
                raw.name = words[1].into();
                named = true;
            }
            "position" if words.len() == 4 => {
                let owner = match words[2] {
                    "owner=1" => Player::One,
                    "owner=2" => Player::Two,
                    other => return err(n, format!("bad owner field {other}")),
                };
                let Some(props) = words[3].strip_prefix("props=") else {
                    return err(n, format!("bad props field {}", words[3]));
                };
                let props = match props {
                    "-" => Vec::new(),
                    p => p.split(',').map(String::from).collect(),
                };
                if props.iter().any(|p| p.is_empty()) {
                    return err(n, "empty proposition name");
                }
                raw.positions.push(RawPosition {
                    id: words[1].into(),
                    owner,
                    props,
                });
            }
            "edge" if words.len() == 3 => raw.edges.push((words[1].into(), words[2].into())),
            "init" if words.len() == 2 => {
                if raw.init.is_some() {
                    return err(n, "second init line");
                }
                raw.init = Some(words[1].into());
            }
            _ => return err(n, format!("unexpected line `{}`", words.join(" "))),
        }
    }
    if !named {
        return err(0, "missing `arena <name>` line");
    }
    Ok(raw)
}

pub fn print_arena(arena: &Arena) -> String {
    let mut out = format!("arena {}\n", arena.name());
    for v in arena.positions() {
        let props: Vec<&str> = arena.labels(v).iter().map(String::as_str).collect();
        let props = if props.is_empty() {
            "-".to_string()
        } else {
            props.join(",")
        };
        let _ = writeln!(
            out,
            "position {} owner={} props={}",
            arena.id(v),
            arena.owner(v).number(),
            props
        );
    }
    for v in arena.positions() {
        for &w in arena.successors(v) {
            let _ = writeln!(out, "edge {} {}", arena.id(v), arena.id(w));
        }
    }
    let _ = writeln!(out, "init {}", arena.id(arena.initial()));
    out
}

fn word(field: &str) -> Vec<String> {
    if field == "-" {
        Vec::new()
    } else {
        field.split(',').map(String::from).collect()
    }
}

pub fn parse_transducer(text: &str) -> Result<RawTransducer, FormatError> {
    let mut raw = RawTransducer::default();
    let mut named = false;
    for (n, words) in lines(text) {
        match words[0] {
            "transducer" if words.len() == 2 && !named => {
                raw.name = words[1].into();
                named = true;
            }
            "state" if (2..=4).contains(&words.len()) => {
                let mut initial = false;
                let mut fin = false;
                for flag in &words[2..] {
                    match *flag {
                        "initial" => initial = true,
                        "final" => fin = true,
                        other => return err(n, format!("unknown state flag {other}")),
                    }
                }
                raw.states.push((words[1].into(), initial, fin));
            }
            "trans" if words.len() == 5 => {
                raw.transitions.push((
                    words[1].into(),
                    word(words[2]),
                    word(words[3]),
                    words[4].into(),
                ));
            }
            _ => return err(n, format!("unexpected line `{}`", words.join(" "))),
        }
    }
    if !named {
        return err(0, "missing `transducer <name>` line");
    }
    Ok(raw)
}

pub fn print_transducer(raw: &RawTransducer) -> String {
    let mut out = format!("transducer {}\n", raw.name);
    for (id, initial, fin) in &raw.states {
        out.push_str("state ");
        out.push_str(id);
        if *initial {
            out.push_str(" initial");
        }
        if *fin {
            out.push_str(" final");
        }
        out.push('\n');
    }
    let show = |w: &[String]| {
        if w.is_empty() {
            "-".to_string()
        } else {
            w.join(",")
        }
    };
    for (from, input, output, to) in &raw.transitions {
        let _ = writeln!(
            out,
            "trans {} {} {} {}",
            from,
            show(input),
            show(output),
            to
        );
    }
    out
}

/// `sim <u> <u'>` lines.
pub fn parse_sim(text: &str) -> Result<Vec<(String, String)>, FormatError> {
    lines(text)
        .map(|(n, words)| match words.as_slice() {
            ["sim", u, w] => Ok((u.to_string(), w.to_string())),
            _ => err(
                n,
                format!("expected `sim <u> <u'>`, got `{}`", words.join(" ")),
            ),
        })
        .collect()
}

pub fn print_sim(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(u, w)| format!("sim {u} {w}\n"))
        .collect()
}

/// Resolves `sim` pairs to positions of `arena`.
pub fn resolve_sim(
    arena: &Arena,
    pairs: &[(String, String)],
) -> Result<Vec<(usize, usize)>, FormatError> {
    pairs
        .iter()
        .map(|(u, w)| match (arena.position(u), arena.position(w)) {
            (Some(a), Some(b)) => Ok((a, b)),
            (None, _) => err(0, format!("unknown position {u} in sim pair")),
            (_, None) => err(0, format!("unknown position {w} in sim pair")),
        })
        .collect()
}

/// Parses a strategy machine whose positions refer to `arena`.
pub fn parse_strategy(text: &str, arena: &Arena) -> Result<StrategyMachine, FormatError> {
    let mut name = None;
    let mut memory: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut initial = None;
    let mut pending: Vec<(usize, Vec<String>)> = Vec::new();
    for (n, words) in lines(text) {
        match words[0] {
            "strategy" if words.len() == 2 && name.is_none() => name = Some(words[1].to_string()),
            "memory" if words.len() == 2 || (words.len() == 3 && words[2] == "initial") => {
                if index.insert(words[1].into(), memory.len()).is_some() {
                    return err(n, format!("duplicate memory state {}", words[1]));
                }
                if words.len() == 3 {
                    if initial.is_some() {
                        return err(n, "second initial memory state");
                    }
                    initial = Some(memory.len());
                }
                memory.push(words[1].into());
            }
            "update" | "move" if words.len() == 4 => {
                pending.push((n, words.iter().map(|w| w.to_string()).collect()));
            }
            _ => return err(n, format!("unexpected line `{}`", words.join(" "))),
        }
    }
    let Some(name) = name else {
        return err(0, "missing `strategy <name>` line");
    };
    let Some(initial) = initial else {
        return err(0, "no initial memory state");
    };
    let mut updates = BTreeMap::new();
    let mut moves = BTreeMap::new();
    for (n, words) in pending {
        let Some(&m) = index.get(&words[1]) else {
            return err(n, format!("unknown memory state {}", words[1]));
        };
        let Some(v) = arena.position(&words[2]) else {
            return err(n, format!("unknown position {}", words[2]));
        };
        let table = if words[0] == "update" {
            &mut updates
        } else {
            &mut moves
        };
        let target = if words[0] == "update" {
            index
                .get(&words[3])
                .copied()
                .ok_or_else(|| format!("unknown memory state {}", words[3]))
        } else {
            arena
                .position(&words[3])
                .ok_or_else(|| format!("unknown position {}", words[3]))
        };
        let target = match target {
            Ok(t) => t,
            Err(message) => return err(n, message),
        };
        if table.insert((m, v), target).is_some() {
            return err(
                n,
                format!("duplicate {} entry for {} {}", words[0], words[1], words[2]),
            );
        }
    }
    Ok(StrategyMachine {
        name,
        memory,
        initial,
        updates,
        moves,
    })
}

pub fn print_strategy(machine: &StrategyMachine, arena: &Arena) -> String {
    let mut out = format!("strategy {}\n", machine.name);
    for (m, id) in machine.memory.iter().enumerate() {
        let flag = if m == machine.initial { " initial" } else { "" };
        let _ = writeln!(out, "memory {id}{flag}");
    }
    for (&(m, v), &m2) in &machine.updates {
        let _ = writeln!(
            out,
            "update {} {} {}",
            machine.memory[m],
            arena.id(v),
            machine.memory[m2]
        );
    }
    for (&(m, v), &w) in &machine.moves {
        let _ = writeln!(
            out,
            "move {} {} {}",
            machine.memory[m],
            arena.id(v),
            arena.id(w)
        );
    }
    out
}

/// `a b (c d)^w`
pub fn format_lasso(arena: &Arena, lasso: &Lasso<usize>) -> String {
    let stem: Vec<&str> = lasso.stem.iter().map(|&v| arena.id(v)).collect();
    let cycle: Vec<&str> = lasso.cycle.iter().map(|&v| arena.id(v)).collect();
    let mut out = stem.join(" ");
    if !out.is_empty() {
        out.push(' ');
    }
    let _ = write!(out, "({})^w", cycle.join(" "));
    out
}

/// Inverse of [`format_lasso`].
pub fn parse_lasso(arena: &Arena, text: &str) -> Option<Lasso<usize>> {
    let open = text.find('(')?;
    let close = text.rfind(")^w")?;
    let ids = |s: &str| {
        s.split_whitespace()
            .map(|id| arena.position(id))
            .collect::<Option<Vec<usize>>>()
    };
    let stem = ids(&text[..open])?;
    let cycle = ids(&text[open + 1..close])?;
    (!cycle.is_empty()).then(|| Lasso::new(stem, cycle))
}
