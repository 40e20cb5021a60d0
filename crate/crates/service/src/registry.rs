use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use glitter_core::backends::{Backend, BackendError, ContextLimited, HttpBackend, ModelFormatError, NgramModel, PrecomputedBackend};
use thiserror::Error;

use crate::config::BackendSpec;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {1}", path = .0.display())]
    Io(PathBuf, String),
    #[error("model file {path}: {1}", path = .0.display())]
    Model(PathBuf, ModelFormatError),
    #[error("backend {0}: {1}")]
    Backend(String, BackendError),
    #[error("duplicate backend id {0:?}")]
    DuplicateId(String),
    #[error("default backend {0:?} is not configured")]
    UnknownDefault(String),
}

/// Immutable set of loaded backends, ordered by id.
#[derive(Clone, Default)]
pub struct Registry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
    default: Option<String>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry").field("backends", &self.backends.keys().collect::<Vec<_>>()).field("default", &self.default).finish()
    }
}

pub fn load_backend(spec: &BackendSpec) -> Result<Arc<dyn Backend>, LoadError> {
    Ok(match spec {
        BackendSpec::Demo { id } => {
            Arc::new(glitter_core::demo::demo_model().map_err(|e| LoadError::Backend(id.clone(), e.into()))?)
        }
        BackendSpec::Ngram { path, smoothing, max_context_tokens, .. } => {
            let bytes = std::fs::read(path).map_err(|e| LoadError::Io(path.clone(), e.to_string()))?;
            let mut model = NgramModel::from_bytes(&bytes).map_err(|e| LoadError::Model(path.clone(), e))?;
            if let Some(s) = smoothing {
                model = model.with_smoothing(*s);
            }
            match max_context_tokens {
                Some(n) => Arc::new(ContextLimited::new(model, *n)),
                None => Arc::new(model),
            }
        }
        BackendSpec::Http { id, config } => {
            Arc::new(HttpBackend::new(config.clone()).map_err(|e| LoadError::Backend(id.clone(), e))?)
        }
        BackendSpec::Precomputed { id, path } => {
            let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.clone(), e.to_string()))?;
            Arc::new(PrecomputedBackend::from_ndjson(&text).map_err(|e| LoadError::Backend(id.clone(), e))?)
        }
    })
}

impl Registry {
    /// Loads every backend eagerly; the first failure aborts.
    pub fn load(specs: &[BackendSpec], default: Option<&str>) -> Result<Self, LoadError> {
        let mut registry = Registry::default();
        for spec in specs {
            let backend = load_backend(spec)?;
            registry.insert(spec.id(), backend)?;
        }
        if let Some(d) = default {
            if !registry.backends.contains_key(d) {
                return Err(LoadError::UnknownDefault(d.to_owned()));
            }
            registry.default = Some(d.to_owned());
        }
        Ok(registry)
    }

    pub fn insert(&mut self, id: &str, backend: Arc<dyn Backend>) -> Result<(), LoadError> {
        if self.backends.contains_key(id) {
            return Err(LoadError::DuplicateId(id.to_owned()));
        }
        self.backends.insert(id.to_owned(), backend);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn Backend>> {
        self.backends.get(id)
    }

    /// The configured default, or else the first backend by id.
    pub fn default_id(&self) -> Option<&str> {
        self.default.as_deref().or_else(|| self.backends.keys().next().map(String::as_str))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<dyn Backend>)> {
        self.backends.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.backends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backends.is_empty()
    }
}
