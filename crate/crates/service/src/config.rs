use std::path::{Path, PathBuf};

use glitter_core::backends::{HttpBackendConfig, Smoothing};
use serde::{Deserialize, Serialize};

use crate::registry::LoadError;

fn default_listen() -> String {
    "127.0.0.1:8080".to_owned()
}
fn default_max_text_chars() -> usize {
    200_000
}
fn default_max_tokens() -> usize {
    50_000
}
fn default_backends() -> Vec<BackendSpec> {
    vec![BackendSpec::Demo { id: glitter_core::demo::DEMO_BACKEND_ID.to_owned() }]
}

/// Service configuration, read from a TOML file.
///
/// ```toml
/// listen = "0.0.0.0:8080"
/// max_text_chars = 200000
/// cors_origins = ["http://localhost:5173"]
///
/// [[backends]]
/// type = "ngram"
/// id = "admin"
/// path = "models/admin.glng"
///
/// [[backends]]
/// type = "http"
/// id = "gpt2"
/// endpoint = "http://localhost:8000/v1/completions"
/// model = "gpt2"
/// api_key_env = "LOGPROB_API_KEY"
/// ```
///
/// Without a `backends` key the bundled demo model is served; an explicit
/// empty list serves nothing and every request answers 503.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_max_text_chars")]
    pub max_text_chars: usize,
    /// Per-request token budget.
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
    /// Origins allowed to call the API from a browser. Empty disables CORS.
    #[serde(default)]
    pub cors_origins: Vec<String>,
    /// Palette file handed to clients that render themselves.
    #[serde(default)]
    pub palette: Option<PathBuf>,
    /// Backend used when a request names none. Defaults to the first
    /// backend in id order.
    #[serde(default)]
    pub default_backend: Option<String>,
    #[serde(default = "default_backends")]
    pub backends: Vec<BackendSpec>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: default_listen(),
            max_text_chars: default_max_text_chars(),
            max_tokens: default_max_tokens(),
            cors_origins: Vec::new(),
            palette: None,
            default_backend: None,
            backends: default_backends(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    /// The bundled demonstration model.
    Demo { id: String },
    /// A model file written by `glitter train`.
    Ngram {
        id: String,
        path: PathBuf,
        #[serde(default)]
        smoothing: Option<Smoothing>,
        #[serde(default)]
        max_context_tokens: Option<usize>,
    },
    /// An OpenAI-compatible completions server.
    Http {
        id: String,
        #[serde(flatten)]
        config: HttpBackendConfig,
    },
    /// A recorded logprob dump.
    Precomputed { id: String, path: PathBuf },
}

impl BackendSpec {
    pub fn id(&self) -> &str {
        match self {
            BackendSpec::Demo { id }
            | BackendSpec::Ngram { id, .. }
            | BackendSpec::Http { id, .. }
            | BackendSpec::Precomputed { id, .. } => id,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(input: &str) -> Result<Self, LoadError> {
        toml::from_str(input).map_err(|e| LoadError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_owned(), e.to_string()))?;
        let mut config = ServiceConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for spec in &mut config.backends {
            match spec {
                BackendSpec::Ngram { path, .. } | BackendSpec::Precomputed { path, .. } => resolve(path),
                BackendSpec::Demo { .. } | BackendSpec::Http { .. } => {}
            }
        }
        if let Some(p) = &mut config.palette {
            resolve(p);
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ServiceConfig::from_toml("").unwrap(), ServiceConfig::default());
    }

    #[test]
    fn backend_table_parses() {
        let c = ServiceConfig::from_toml(
            r#"
            listen = "0.0.0.0:9000"
            cors_origins = ["http://localhost:5173"]
            [[backends]]
            type = "ngram"
            id = "admin"
            path = "m.glng"
            [[backends]]
            type = "http"
            id = "gpt2"
            endpoint = "http://localhost:8000/v1/completions"
            model = "gpt2"
            whitespace_markers = "byte_bpe"
            "#,
        )
        .unwrap();
        assert_eq!(c.backends.len(), 2);
        assert_eq!(c.backends[1].id(), "gpt2");
        match &c.backends[1] {
            BackendSpec::Http { config, .. } => {
                assert_eq!(config.model, "gpt2");
                assert_eq!(config.top_k, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_empty_backend_list_is_kept() {
        assert!(ServiceConfig::from_toml("backends = []").unwrap().backends.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ServiceConfig::from_toml("listn = \"x\"").is_err());
    }
}
