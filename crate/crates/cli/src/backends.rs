//! Builds inference backends from config.

use std::sync::Arc;

use ombudsman_core::backends::{
    GenerativeBackend, HttpGenerative, HttpNli, NliBackend, RecordingGenerative, RecordingNli,
    ReplayCache, ResponseStyle, RuleAnnotator, RuleNli,
};
use ombudsman_core::cascade::CascadeBackends;

use crate::config::{BackendConfig, BackendsSection, RuleStyle};

fn api_key(var: &Option<String>) -> Option<String> {
    var.as_ref().and_then(|v| std::env::var(v).ok())
}

fn open_cache(path: &std::path::Path) -> anyhow::Result<Arc<ReplayCache>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(Arc::new(ReplayCache::open(path)?))
}

pub fn nli_backend(cfg: &BackendConfig) -> anyhow::Result<Arc<dyn NliBackend>> {
    Ok(match cfg {
        BackendConfig::Rule {
            max_premise_chars, ..
        } => Arc::new(RuleNli {
            max_premise_chars: *max_premise_chars,
        }),
        BackendConfig::Http {
            url,
            model,
            api_key_env,
            max_premise_chars,
            cache,
            cache_mode,
        } => {
            let http: Arc<dyn NliBackend> = Arc::new(HttpNli::new(
                url.clone(),
                model.clone(),
                api_key(api_key_env),
                *max_premise_chars,
            )?);
            match cache {
                Some(path) => Arc::new(RecordingNli::new(http, open_cache(path)?, *cache_mode)),
                None => http,
            }
        }
        BackendConfig::Replay { model, cache } => {
            Arc::new(RecordingNli::replay_only(model.clone(), open_cache(cache)?))
        }
    })
}

pub fn generative_backend(cfg: &BackendConfig) -> anyhow::Result<Arc<dyn GenerativeBackend>> {
    Ok(match cfg {
        BackendConfig::Rule { style, .. } => Arc::new(RuleAnnotator::new(match style {
            RuleStyle::Plain => ResponseStyle::Plain,
            RuleStyle::Chatty => ResponseStyle::Chatty,
        })),
        BackendConfig::Http {
            url,
            model,
            api_key_env,
            cache,
            cache_mode,
            ..
        } => {
            let http: Arc<dyn GenerativeBackend> = Arc::new(HttpGenerative::new(
                url.clone(),
                model.clone(),
                api_key(api_key_env),
            )?);
            match cache {
                Some(path) => Arc::new(RecordingGenerative::new(
                    http,
                    open_cache(path)?,
                    *cache_mode,
                )),
                None => http,
            }
        }
        BackendConfig::Replay { model, cache } => Arc::new(RecordingGenerative::replay_only(
            model.clone(),
            open_cache(cache)?,
        )),
    })
}

pub fn cascade_backends(cfg: &BackendsSection) -> anyhow::Result<CascadeBackends> {
    Ok(CascadeBackends {
        nli: nli_backend(&cfg.nli)?,
        generative: generative_backend(&cfg.generative)?,
    })
}
