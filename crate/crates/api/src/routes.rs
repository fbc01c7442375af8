use std::str::FromStr;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{HeaderValue, Method};
use axum::routing::get;
use axum::{Json, Router};
use tower_http::cors::{Any, CorsLayer};
use tweetscope_core::aggregate::{query, Metric, Series};
use tweetscope_core::controversy::{CooccurrenceTable, TermsView};
use tweetscope_core::period::{parse_day, Period};
use tweetscope_core::topics::WeekTopics;
use tweetscope_core::{Granularity, WeekKey};

use crate::artifacts::{Artifacts, Meta};
use crate::config::ConfigError;
use crate::error::ApiError;
use crate::AppState;

pub const DEFAULT_N_WORDS: usize = 10;
pub const MAX_N_WORDS: usize = 50;
pub const DEFAULT_TOP_N: usize = 20;
pub const MAX_TOP_N: usize = 1000;

type QueryPairs = Result<Query<Vec<(String, String)>>, QueryRejection>;

/// Query parameters restricted to a known set of names, each given at most once.
struct Params(Vec<(String, String)>);

impl Params {
    fn parse(q: QueryPairs, allowed: &[&str]) -> Result<Self, ApiError> {
        let Query(pairs) = q.map_err(|e| ApiError::bad_parameter(e.body_text()))?;
        for (i, (k, _)) in pairs.iter().enumerate() {
            if !allowed.contains(&k.as_str()) {
                return Err(ApiError::bad_parameter(format!(
                    "unknown parameter {k:?}; expected one of {}",
                    allowed.join(", ")
                )));
            }
            if pairs[..i].iter().any(|(prev, _)| prev == k) {
                return Err(ApiError::bad_parameter(format!("parameter {k:?} given twice")));
            }
        }
        Ok(Self(pairs))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, ApiError> {
        self.get(key)
            .ok_or_else(|| ApiError::bad_parameter(format!("missing parameter {key:?}")))
    }

    fn bounded(&self, key: &str, default: usize, max: usize) -> Result<usize, ApiError> {
        let Some(raw) = self.get(key) else {
            return Ok(default);
        };
        match raw.parse::<usize>() {
            Ok(n) if (1..=max).contains(&n) => Ok(n),
            _ => Err(ApiError::bad_parameter(format!("{key} must be an integer in 1..={max}"))),
        }
    }
}

fn loaded(state: &AppState) -> Result<Arc<Artifacts>, ApiError> {
    state
        .current()
        .ok_or_else(|| ApiError::not_ready("no snapshot loaded yet"))
}

fn country_param(raw: Option<&str>) -> Result<Option<String>, ApiError> {
    match raw {
        None | Some("") | Some("all") => Ok(None),
        Some(c) if c.len() == 2 && c.bytes().all(|b| b.is_ascii_alphabetic()) => {
            Ok(Some(c.to_ascii_uppercase()))
        }
        Some(c) => Err(ApiError::bad_parameter(format!(
            "country must be an ISO 3166-1 alpha-2 code, got {c:?}"
        ))),
    }
}

/// Default range bound: the snapshot's first or last day, in the requested granularity.
fn default_bound(day: Option<&str>, granularity: Granularity) -> Result<String, ApiError> {
    let day = day.ok_or_else(|| ApiError::bad_parameter("snapshot is empty; from and to are required"))?;
    let day = parse_day(day).map_err(|e| ApiError::bad_parameter(e.to_string()))?;
    Ok(Period::of(granularity, day).to_string())
}

async fn series(metric: Metric, state: AppState, q: QueryPairs) -> Result<Json<Series>, ApiError> {
    let p = Params::parse(q, &["granularity", "from", "to", "country"])?;
    let artifacts = loaded(&state)?;
    let granularity = match p.get("granularity") {
        None => Granularity::Week,
        Some(g) => Granularity::from_str(g).map_err(|e| ApiError::bad_parameter(e.to_string()))?,
    };
    let country = country_param(p.get("country"))?;
    let meta = if p.get("from").is_none() || p.get("to").is_none() {
        Some(artifacts.snapshot.meta())
    } else {
        None
    };
    let from = match p.get("from") {
        Some(f) => f.to_string(),
        None => default_bound(meta.as_ref().and_then(|m| m.first_day.as_deref()), granularity)?,
    };
    let to = match p.get("to") {
        Some(t) => t.to_string(),
        None => default_bound(meta.as_ref().and_then(|m| m.last_day.as_deref()), granularity)?,
    };
    let s = query(&artifacts.snapshot, metric, granularity, &from, &to, country.as_deref())?;
    Ok(Json(s))
}

async fn volume(State(state): State<AppState>, q: QueryPairs) -> Result<Json<Series>, ApiError> {
    series(Metric::Volume, state, q).await
}

async fn sentiment(State(state): State<AppState>, q: QueryPairs) -> Result<Json<Series>, ApiError> {
    series(Metric::Sentiment, state, q).await
}

async fn emotions(State(state): State<AppState>, q: QueryPairs) -> Result<Json<Series>, ApiError> {
    series(Metric::Emotions, state, q).await
}

async fn topics(State(state): State<AppState>, q: QueryPairs) -> Result<Json<WeekTopics>, ApiError> {
    let p = Params::parse(q, &["week", "n_words"])?;
    let artifacts = loaded(&state)?;
    let raw = p.required("week")?;
    let week = WeekKey::from_str(raw).map_err(|e| ApiError::bad_parameter(e.to_string()))?;
    let n_words = p.bounded("n_words", DEFAULT_N_WORDS, MAX_N_WORDS)?;
    let export = artifacts
        .topics
        .as_ref()
        .ok_or_else(|| ApiError::not_ready("no topic export loaded"))?;
    export
        .week_topics(week, n_words)
        .map(Json)
        .ok_or_else(|| ApiError::unknown_week(raw))
}

async fn controversy_terms(State(state): State<AppState>, q: QueryPairs) -> Result<Json<serde_json::Value>, ApiError> {
    Params::parse(q, &[])?;
    let artifacts = loaded(&state)?;
    let export = artifacts
        .controversy
        .as_ref()
        .ok_or_else(|| ApiError::not_ready("no controversy results loaded"))?;
    let view: TermsView<'_> = export.terms_view();
    Ok(Json(serde_json::to_value(view).expect("view serializes")))
}

async fn cooccurrence(State(state): State<AppState>, q: QueryPairs) -> Result<Json<CooccurrenceTable>, ApiError> {
    let p = Params::parse(q, &["term", "top_n"])?;
    let artifacts = loaded(&state)?;
    let term = p.required("term")?;
    let top_n = p.bounded("top_n", DEFAULT_TOP_N, MAX_TOP_N)?;
    let export = artifacts
        .controversy
        .as_ref()
        .ok_or_else(|| ApiError::not_ready("no controversy results loaded"))?;
    export
        .cooccurrence_table(term, top_n)
        .map(Json)
        .map_err(|_| ApiError::unknown_term(term))
}

async fn meta(State(state): State<AppState>, q: QueryPairs) -> Result<Json<Meta>, ApiError> {
    Params::parse(q, &[])?;
    Ok(Json(loaded(&state)?.meta()))
}

async fn not_found() -> ApiError {
    ApiError::bad_parameter("no such endpoint")
        .with_status(axum::http::StatusCode::NOT_FOUND)
}

fn cors(origin: &str) -> Result<CorsLayer, ConfigError> {
    let layer = CorsLayer::new().allow_methods([Method::GET]);
    if origin == "*" {
        return Ok(layer.allow_origin(Any));
    }
    let value = HeaderValue::from_str(origin).map_err(|e| ConfigError::Parse {
        line: 0,
        message: format!("cors_origin {origin:?}: {e}"),
    })?;
    Ok(layer.allow_origin(value))
}

/// The `/api/v1` router, with CORS for `cors_origin` when given.
pub fn router(state: AppState, cors_origin: Option<&str>) -> Result<Router, ConfigError> {
    let app = Router::new()
        .route("/api/v1/volume", get(volume))
        .route("/api/v1/sentiment", get(sentiment))
        .route("/api/v1/emotions", get(emotions))
        .route("/api/v1/topics", get(topics))
        .route("/api/v1/controversy/terms", get(controversy_terms))
        .route("/api/v1/controversy/cooccurrence", get(cooccurrence))
        .route("/api/v1/meta", get(meta))
        .fallback(not_found)
        .with_state(state);
    Ok(match cors_origin {
        Some(origin) => app.layer(cors(origin)?),
        None => app,
    })
}
