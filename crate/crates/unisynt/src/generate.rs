//! Random imperfect-information and opacity instances.
//!
//! Both generators build the same kind of arena: observer positions `v<i>`
//! (owned by the observer, labelled `p1`) where the observer picks an
//! action, and one action position `v<i>_<a>` (labelled `p<a>`) per
//! available action, from which the other player picks the next observer
//! position. Observer positions are grouped into indistinguishability
//! classes sharing the same actions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use unisynt_core::arena::{validate_arena, Player, RawArena, RawPosition};
use unisynt_core::relations::{obs_equiv_transducer, RawTransducer};
use unisynt_core::{parse, Arena, Formula};

pub const ACTIONS: [&str; 4] = ["x", "y", "z", "w"];
pub const MAX_OBSERVER_POSITIONS: usize = 64;
pub const SECRET: &str = "pS";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("size must be between 1 and {MAX_OBSERVER_POSITIONS}")]
    Size,
    #[error("action count must be between 1 and {}", ACTIONS.len())]
    Actions,
    #[error("secret count must be between 1 and the size")]
    Secrets,
    #[error("generated instance is invalid: {0}")]
    Invalid(String),
}

/// How the generated relation is written out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationFile {
    /// `sim` pairs of an imperfect-information arena.
    Sim(Vec<(String, String)>),
    /// An explicit transducer.
    Fst(RawTransducer),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub arena: Arena,
    pub relation: RelationFile,
    pub formula: Formula,
    /// The formula as written to the formula file.
    pub formula_text: String,
    /// Observer positions equivalent to the original initial position.
    pub initial_class: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    /// Number of observer positions.
    pub size: usize,
    pub actions: usize,
    pub secrets: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            size: 3,
            actions: 2,
            secrets: 1,
            seed: 0,
        }
    }
}

pub fn action_prop(a: &str) -> String {
    format!("p{a}")
}

/// The formula requiring the same action in all related histories of
/// observer positions: `G (p1 -> (R X p<a> | ...))`.
pub fn same_act_text(actions: &[&str]) -> String {
    let choices: Vec<String> = actions
        .iter()
        .map(|a| format!("R X {}", action_prop(a)))
        .collect();
    format!("G (p1 -> ({}))", choices.join(" | "))
}

pub fn same_act(actions: &[&str]) -> Formula {
    parse(&same_act_text(actions)).expect("well-formed")
}

struct Skeleton {
    raw: RawArena,
    /// Class of each observer position.
    class: Vec<usize>,
}

fn skeleton(p: &Params, rng: &mut ChaCha8Rng) -> Result<Skeleton, GenError> {
    if p.size == 0 || p.size > MAX_OBSERVER_POSITIONS {
        return Err(GenError::Size);
    }
    if p.actions == 0 || p.actions > ACTIONS.len() {
        return Err(GenError::Actions);
    }
    let mut class = vec![0usize];
    let mut classes = 1;
    for _ in 1..p.size {
        let c = rng.gen_range(0..=classes);
        if c == classes {
            classes += 1;
        }
        class.push(c);
    }
    let acts: Vec<Vec<&str>> = (0..classes)
        .map(|_| {
            let k = rng.gen_range(1..=p.actions);
            let mut chosen: Vec<&str> = ACTIONS[..p.actions]
                .choose_multiple(rng, k)
                .copied()
                .collect();
            chosen.sort_unstable();
            chosen
        })
        .collect();
    let mut raw = RawArena {
        name: String::new(),
        positions: Vec::new(),
        edges: Vec::new(),
        init: Some("v0".into()),
    };
    for i in 0..p.size {
        raw.positions.push(RawPosition {
            id: format!("v{i}"),
            owner: Player::One,
            props: vec!["p1".into()],
        });
    }
    let observers: Vec<usize> = (0..p.size).collect();
    for i in 0..p.size {
        for a in &acts[class[i]] {
            let id = format!("v{i}_{a}");
            raw.positions.push(RawPosition {
                id: id.clone(),
                owner: Player::Two,
                props: vec![action_prop(a)],
            });
            raw.edges.push((format!("v{i}"), id.clone()));
            let k = rng.gen_range(1..=2.min(p.size));
            for &j in observers.choose_multiple(rng, k) {
                raw.edges.push((id.clone(), format!("v{j}")));
            }
        }
    }
    Ok(Skeleton { raw, class })
}

fn sim_pairs(class: &[usize]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for i in 0..class.len() {
        if let Some(first) = (0..i).find(|&j| class[j] == class[i]) {
            pairs.push((format!("v{first}"), format!("v{i}")));
        }
    }
    pairs
}

fn resolve(arena: &Arena, pairs: &[(String, String)]) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .map(|(u, w)| {
            (
                arena.position(u).expect("generated id"),
                arena.position(w).expect("generated id"),
            )
        })
        .collect()
}

/// An imperfect-information arena with its `sim` pairs and the same-action
/// formula over the declared actions. With `subjective`, a fresh initial
/// observer position `vinit` is added whose single action leads to every
/// position equivalent to `v0`.
pub fn imperfect(p: &Params, subjective: bool) -> Result<Instance, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let Skeleton { mut raw, class } = skeleton(p, &mut rng)?;
    raw.name = format!("imperfect_s{}_n{}", p.seed, p.size);
    let initial_class: Vec<String> = (0..p.size)
        .filter(|&i| class[i] == class[0])
        .map(|i| format!("v{i}"))
        .collect();
    if subjective {
        let a = ACTIONS[0];
        let act = format!("vinit_{a}");
        raw.positions.push(RawPosition {
            id: "vinit".into(),
            owner: Player::One,
            props: vec!["p1".into()],
        });
        raw.positions.push(RawPosition {
            id: act.clone(),
            owner: Player::Two,
            props: vec![action_prop(a)],
        });
        raw.edges.push(("vinit".into(), act.clone()));
        for u in &initial_class {
            raw.edges.push((act.clone(), u.clone()));
        }
        raw.init = Some("vinit".into());
        raw.name.push_str("_subjective");
    }
    let arena = validate_arena(&raw).map_err(|e| GenError::Invalid(e.to_string()))?;
    let pairs = sim_pairs(&class);
    obs_equiv_transducer(&arena, &resolve(&arena, &pairs))
        .map_err(|e| GenError::Invalid(e.to_string()))?;
    let formula_text = same_act_text(&ACTIONS[..p.actions]);
    let formula = parse(&formula_text).expect("well-formed");
    Ok(Instance {
        arena,
        relation: RelationFile::Sim(pairs),
        formula,
        formula_text,
        initial_class,
    })
}

/// An opacity instance: `p.secrets` observer positions carry `pS`, the
/// owners are swapped so that the player hiding the secret is Player 1,
/// and the relation is the observer's indistinguishability written as an
/// explicit transducer. The formula is `G ! R pS`.
pub fn opacity(p: &Params) -> Result<Instance, GenError> {
    if p.secrets == 0 || p.secrets > p.size {
        return Err(GenError::Secrets);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let Skeleton { mut raw, class } = skeleton(p, &mut rng)?;
    raw.name = format!("opacity_s{}_n{}", p.seed, p.size);
    let observers: Vec<usize> = (0..p.size).collect();
    for &i in observers.choose_multiple(&mut rng, p.secrets) {
        raw.positions[i].props.push(SECRET.into());
    }
    let observed = validate_arena(&raw).map_err(|e| GenError::Invalid(e.to_string()))?;
    let pairs = sim_pairs(&class);
    let t = obs_equiv_transducer(&observed, &resolve(&observed, &pairs))
        .map_err(|e| GenError::Invalid(e.to_string()))?;
    let arena = observed.with_owners_swapped();
    let mut fst = t.to_raw(&arena);
    fst.name = "observer".into();
    let initial_class = (0..p.size)
        .filter(|&i| class[i] == class[0])
        .map(|i| format!("v{i}"))
        .collect();
    let formula_text = format!("G ! R {SECRET}");
    let formula = parse(&formula_text).expect("well-formed");
    Ok(Instance {
        arena,
        relation: RelationFile::Fst(fst),
        formula,
        formula_text,
        initial_class,
    })
}
