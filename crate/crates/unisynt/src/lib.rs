//! File formats, DOT export, example generators and input loading for the
//! `unisynt` command-line tool. The algorithms live in `unisynt_core`.

pub mod dot;
pub mod format;
pub mod generate;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use unisynt_core::arena::validate_arena;
use unisynt_core::relations::{identity_transducer, obs_equiv_transducer};
use unisynt_core::{Arena, RelationTransducer};

use crate::format::FormatError;
use crate::generate::{Instance, RelationFile};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("relation must be `identity`, `obs:<file>` or `fst:<file>`, got `{0}`")]
    RelationSpec(String),
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.into(),
        source,
    })
}

pub fn load_arena(path: &Path) -> Result<Arena, LoadError> {
    let raw = format::parse_arena(&read(path)?).map_err(|source| LoadError::Format {
        path: path.into(),
        source,
    })?;
    validate_arena(&raw).map_err(|e| LoadError::Invalid {
        path: path.into(),
        message: e.to_string(),
    })
}

/// How the relation between plays is given on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationSpec {
    Identity,
    Obs(PathBuf),
    Fst(PathBuf),
}

impl std::str::FromStr for RelationSpec {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "identity" {
            Ok(RelationSpec::Identity)
        } else if let Some(p) = s.strip_prefix("obs:") {
            Ok(RelationSpec::Obs(p.into()))
        } else if let Some(p) = s.strip_prefix("fst:") {
            Ok(RelationSpec::Fst(p.into()))
        } else {
            Err(LoadError::RelationSpec(s.into()))
        }
    }
}

pub fn load_relation(spec: &RelationSpec, arena: &Arena) -> Result<RelationTransducer, LoadError> {
    match spec {
        RelationSpec::Identity => Ok(identity_transducer(arena)),
        RelationSpec::Obs(path) => {
            let pairs = format::parse_sim(&read(path)?).map_err(|source| LoadError::Format {
                path: path.clone(),
                source,
            })?;
            let pairs = format::resolve_sim(arena, &pairs).map_err(|e| LoadError::Invalid {
                path: path.clone(),
                message: e.message,
            })?;
            obs_equiv_transducer(arena, &pairs).map_err(|e| LoadError::Invalid {
                path: path.clone(),
                message: e.to_string(),
            })
        }
        RelationSpec::Fst(path) => {
            let raw =
                format::parse_transducer(&read(path)?).map_err(|source| LoadError::Format {
                    path: path.clone(),
                    source,
                })?;
            RelationTransducer::from_raw(&raw, arena).map_err(|e| LoadError::Invalid {
                path: path.clone(),
                message: e.to_string(),
            })
        }
    }
}

pub fn load_strategy(
    path: &Path,
    arena: &Arena,
) -> Result<unisynt_core::StrategyMachine, LoadError> {
    format::parse_strategy(&read(path)?, arena).map_err(|source| LoadError::Format {
        path: path.into(),
        source,
    })
}

/// Paths of the files written for a generated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrittenInstance {
    pub arena: PathBuf,
    pub relation: PathBuf,
    /// Value for `--relation`.
    pub relation_spec: String,
    pub formula: PathBuf,
}

/// Writes `arena.txt`, `relation.sim` or `relation.fst`, and `formula.txt`.
pub fn write_instance(inst: &Instance, dir: &Path) -> std::io::Result<WrittenInstance> {
    fs::create_dir_all(dir)?;
    let arena = dir.join("arena.txt");
    fs::write(&arena, format::print_arena(&inst.arena))?;
    let (relation, text, kind) = match &inst.relation {
        RelationFile::Sim(pairs) => (dir.join("relation.sim"), format::print_sim(pairs), "obs"),
        RelationFile::Fst(raw) => (
            dir.join("relation.fst"),
            format::print_transducer(raw),
            "fst",
        ),
    };
    fs::write(&relation, text)?;
    let formula = dir.join("formula.txt");
    fs::write(&formula, format!("{}\n", inst.formula_text))?;
    let relation_spec = format!("{kind}:{}", relation.display());
    Ok(WrittenInstance {
        arena,
        relation,
        relation_spec,
        formula,
    })
}
