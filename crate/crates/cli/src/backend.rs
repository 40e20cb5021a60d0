use std::sync::Arc;

use glitter_core::backends::{Backend, ContextLimited, HttpBackendConfig};
use glitter_core::demo::DEMO_BACKEND_ID;
use glitter_service::{BackendSpec, ServiceConfig};

use crate::args::BackendArgs;
use crate::Failure;

fn load(spec: &BackendSpec) -> Result<Arc<dyn Backend>, Failure> {
    glitter_service::registry::load_backend(spec).map_err(|e| Failure::Backend(e.to_string()))
}

/// The backend id used in provenance, and the backend itself.
pub fn resolve(args: &BackendArgs) -> Result<(String, Arc<dyn Backend>), Failure> {
    let (id, backend) = if let Some(path) = &args.model {
        let id = path.file_stem().map_or_else(|| "ngram".to_owned(), |s| s.to_string_lossy().into_owned());
        let spec = BackendSpec::Ngram { id: id.clone(), path: path.clone(), smoothing: None, max_context_tokens: None };
        (id, load(&spec)?)
    } else if let Some(endpoint) = &args.endpoint {
        let config = HttpBackendConfig { api_key_env: args.api_key_env.clone(), ..HttpBackendConfig::new(endpoint, &args.endpoint_model) };
        let id = args.endpoint_model.clone();
        (id.clone(), load(&BackendSpec::Http { id, config })?)
    } else if let Some(path) = &args.dump_file {
        let id = path.file_stem().map_or_else(|| "dump".to_owned(), |s| s.to_string_lossy().into_owned());
        (id.clone(), load(&BackendSpec::Precomputed { id, path: path.clone() })?)
    } else {
        let config = match &args.config {
            Some(p) => ServiceConfig::from_file(p).map_err(|e| Failure::Input(e.to_string()))?,
            None => ServiceConfig::default(),
        };
        // Only the requested backend is loaded.
        let wanted = match (&args.backend, &config.default_backend) {
            (Some(id), _) | (None, Some(id)) => id.clone(),
            (None, None) => {
                let mut ids: Vec<&str> = config.backends.iter().map(BackendSpec::id).collect();
                ids.sort_unstable();
                ids.first().map_or_else(|| DEMO_BACKEND_ID.to_owned(), |s| (*s).to_owned())
            }
        };
        let spec = config
            .backends
            .iter()
            .find(|s| s.id() == wanted)
            .ok_or_else(|| Failure::Usage(format!("no backend with id {wanted:?} is configured")))?;
        let backend = load(spec)?;
        (wanted, backend)
    };
    Ok(match args.max_context {
        Some(n) => (id, Arc::new(ContextLimited::new(backend, n))),
        None => (id, backend),
    })
}
