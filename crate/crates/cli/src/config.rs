use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use rekindle_core::dialogue::PatternError;
use rekindle_core::kg::KgError;
use rekindle_core::retrieval::{load_corpus, RetrievalError};
use rekindle_core::{build_index, EntityGraph, Index, PatternSet, RankError, RankParams, Resources, RetrievalCaps};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path:?}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config {path:?}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{0} path is not configured")]
    Missing(&'static str),
    #[error("{what} {path:?} does not exist")]
    NotFound { what: &'static str, path: PathBuf },
    #[error("invalid listen address {0:?}")]
    Listen(String),
    #[error(transparent)]
    Params(#[from] RankError),
    #[error("retrieval caps must be at least 1")]
    Caps,
    #[error("loading corpus: {0}")]
    Corpus(#[from] RetrievalError),
    #[error("loading knowledge graph: {0}")]
    Kg(#[from] KgError),
    #[error("loading patterns: {0}")]
    Patterns(#[from] PatternError),
}

/// On-disk TOML layout. Relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    index: Option<PathBuf>,
    kg: Option<PathBuf>,
    patterns: Option<PathBuf>,
    listen: Option<String>,
    auto_create_sessions: Option<bool>,
    #[serde(default)]
    params: Option<RankParams>,
    #[serde(default)]
    caps: Option<RetrievalCaps>,
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub kg: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub mu: Option<f64>,
    pub alpha_x: Option<f64>,
    pub alpha_y: Option<f64>,
    /// Global convergence tolerance.
    pub tol: Option<f64>,
    pub port: Option<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub corpus: Option<PathBuf>,
    /// A persisted index; used instead of `corpus` when set.
    pub index: Option<PathBuf>,
    pub kg: Option<PathBuf>,
    /// `None` means the bundled filters.
    pub patterns: Option<PathBuf>,
    pub params: RankParams,
    pub caps: RetrievalCaps,
    pub listen: SocketAddr,
    pub auto_create_sessions: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            index: None,
            kg: None,
            patterns: None,
            params: RankParams::default(),
            caps: RetrievalCaps::default(),
            listen: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            auto_create_sessions: false,
        }
    }
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

impl ServiceConfig {
    pub fn from_toml(src: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let file: FileConfig =
            toml::from_str(src).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), source: Box::new(e) })?;
        let mut cfg = Self {
            corpus: file.corpus.map(|p| resolve(base, p)),
            index: file.index.map(|p| resolve(base, p)),
            kg: file.kg.map(|p| resolve(base, p)),
            patterns: file.patterns.map(|p| resolve(base, p)),
            ..Self::default()
        };
        if let Some(listen) = file.listen {
            cfg.listen = listen.parse().map_err(|_| ConfigError::Listen(listen))?;
        }
        if let Some(a) = file.auto_create_sessions {
            cfg.auto_create_sessions = a;
        }
        if let Some(p) = file.params {
            cfg.params = p;
        }
        if let Some(c) = file.caps {
            cfg.caps = c;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&src, base, path)
    }

    /// Builds the effective config: file (if any), then overrides.
    pub fn resolve(config: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.corpus {
            self.corpus = Some(p.clone());
            self.index = None;
        }
        if let Some(p) = &o.index {
            self.index = Some(p.clone());
        }
        if let Some(p) = &o.kg {
            self.kg = Some(p.clone());
        }
        if let Some(p) = &o.patterns {
            self.patterns = Some(p.clone());
        }
        if let Some(v) = o.mu {
            self.params.mu = v;
        }
        if let Some(v) = o.alpha_x {
            self.params.alpha_x = v;
        }
        if let Some(v) = o.alpha_y {
            self.params.alpha_y = v;
        }
        if let Some(v) = o.tol {
            self.params.global_tol = v;
        }
        if let Some(port) = o.port {
            self.listen.set_port(port);
        }
    }

    /// Checks everything needed to answer messages, without loading data.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate()?;
        if self.caps.per_entity == 0 || self.caps.total == 0 {
            return Err(ConfigError::Caps);
        }
        match (&self.index, &self.corpus) {
            (Some(p), _) => exists("index", p)?,
            (None, Some(p)) => exists("corpus", p)?,
            (None, None) => return Err(ConfigError::Missing("corpus")),
        }
        exists("knowledge graph", self.kg.as_ref().ok_or(ConfigError::Missing("knowledge graph"))?)?;
        if let Some(p) = &self.patterns {
            exists("patterns", p)?;
        }
        Ok(())
    }

    pub fn load_resources(&self) -> Result<Resources, ConfigError> {
        self.validate()?;
        let index: Index = match (&self.index, &self.corpus) {
            (Some(p), _) => Index::load(p)?,
            (None, Some(p)) => build_index(load_corpus(p)?)?,
            (None, None) => return Err(ConfigError::Missing("corpus")),
        };
        let graph = EntityGraph::load(self.kg.as_ref().ok_or(ConfigError::Missing("knowledge graph"))?)?;
        let patterns = match &self.patterns {
            Some(p) => PatternSet::load(p)?,
            None => PatternSet::builtin(),
        };
        let mut res = Resources::new(index, graph, patterns);
        res.params = self.params;
        res.caps = self.caps;
        Ok(res)
    }
}

fn exists(what: &'static str, p: &Path) -> Result<(), ConfigError> {
    if p.exists() {
        Ok(())
    } else {
        Err(ConfigError::NotFound { what, path: p.to_path_buf() })
    }
}
