//! HTTP session service.
//!
//! Sessions live in memory behind one lock each: mutations are serialized per
//! session, reads take a consistent snapshot. Every mutation carries the
//! revision it was based on; a stale revision is rejected with 409 before
//! anything changes.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dcm_core::exact::{parse_exact, Exact};
use dcm_core::io::{fixtures, SessionDerived, SessionDocument, ValidationReport, ZSource};
use dcm_core::robustness::ScenarioGrid;
use dcm_core::scale::Judgment;
use dcm_core::weights::{ClosenessJudgments, SwingRanking};
use dcm_core::Execution;

use crate::error::GatewayError;
use crate::ops::{self, Inputs, Overrides, SweepParams};
use crate::views::{DerivedView, ValueFunctionView, WeightsView};

pub struct ApiSession {
    pub document: SessionDocument,
    pub derived: SessionDerived,
    pub revision: u64,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<RwLock<ApiSession>>>>>,
    next_id: Arc<AtomicU64>,
    data_dir: PathBuf,
    exec: Execution,
}

impl AppState {
    pub fn new(data_dir: PathBuf) -> Self {
        AppState {
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            data_dir,
            exec: Execution::default(),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<RwLock<ApiSession>>, ApiError> {
        self.sessions
            .read()
            .expect("session table")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("session {id}")))
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Stale { current: u64, supplied: u64 },
    Invalid { message: String, violations: serde_json::Value },
    Internal(String),
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::Core { context, source } => core_error(&context, source),
            GatewayError::Inconsistent(report) => ApiError::Invalid {
                message: "inconsistent judgments".into(),
                violations: json!(report),
            },
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

fn core_error(context: &str, e: dcm_core::Error) -> ApiError {
    use dcm_core::Error as E;
    let message = format!("{context}: {e}");
    match e {
        E::InconsistentTable { report, .. } | E::InconsistentCloseness(report) => ApiError::Invalid {
            message,
            violations: json!(report),
        },
        E::UnknownCriterion(_) => ApiError::NotFound(message),
        E::Io(_) => ApiError::Internal(message),
        _ => ApiError::Invalid {
            message,
            violations: json!([]),
        },
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({"error": "not-found", "message": m})),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({"error": "bad-request", "message": m})),
            ApiError::Stale { current, supplied } => (
                StatusCode::CONFLICT,
                json!({"error": "stale-revision", "current_revision": current, "supplied_revision": supplied}),
            ),
            ApiError::Invalid { message, violations } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "validation", "message": message, "violations": violations}),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": m})),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Serialize)]
struct SessionView {
    id: String,
    revision: u64,
    derived: DerivedView,
    validation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    document: Option<SessionDocument>,
}

#[derive(Serialize)]
struct MutationView {
    revision: u64,
    derived: DerivedView,
}

fn derive(doc: &SessionDocument) -> ApiResult<SessionDerived> {
    let report = doc.validate();
    if !report.is_valid() {
        let message = report.errors.first().cloned().unwrap_or_else(|| "inconsistent judgments".into());
        return Err(ApiError::Invalid {
            message,
            violations: json!({"scales": report.scales, "closeness": report.closeness}),
        });
    }
    doc.derive().map_err(|e| core_error("session", e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    document: Option<SessionDocument>,
    /// Name of a saved session in the data directory.
    #[serde(default)]
    load: Option<String>,
    /// `"sample"` starts from the bundled session.
    #[serde(default)]
    template: Option<String>,
}

fn check_name(name: &str) -> ApiResult<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(ApiError::BadRequest(format!("invalid session name {name:?}")));
    }
    Ok(())
}

async fn create_session(State(state): State<AppState>, Json(body): Json<CreateBody>) -> ApiResult<Response> {
    let document = match (body.document, body.load, body.template.as_deref()) {
        (Some(doc), None, None) => doc,
        (None, Some(name), None) => {
            check_name(&name)?;
            let path = state.data_dir.join(format!("{name}.json"));
            if !path.exists() {
                return Err(ApiError::NotFound(format!("saved session {name}")));
            }
            SessionDocument::load(&path).map_err(|e| core_error("load", e))?
        }
        (None, None, Some("sample")) => fixtures::reference_session(),
        _ => return Err(ApiError::BadRequest("give exactly one of document, load or template".into())),
    };
    let derived = derive(&document)?;
    let id = state.next_id.fetch_add(1, Ordering::SeqCst).to_string();
    let view = SessionView {
        id: id.clone(),
        revision: 0,
        derived: (&derived).into(),
        validation: document.validate(),
        document: None,
    };
    let session = ApiSession {
        document,
        derived,
        revision: 0,
    };
    state
        .sessions
        .write()
        .expect("session table")
        .insert(id, Arc::new(RwLock::new(session)));
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let s = state.session(&id)?;
    let s = s.read().expect("session lock");
    Ok(Json(SessionView {
        id,
        revision: s.revision,
        derived: (&s.derived).into(),
        validation: s.document.validate(),
        document: Some(s.document.clone()),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveBody {
    name: String,
}

async fn save_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SaveBody>,
) -> ApiResult<Json<serde_json::Value>> {
    check_name(&body.name)?;
    let s = state.session(&id)?;
    let s = s.read().expect("session lock");
    std::fs::create_dir_all(&state.data_dir).map_err(|e| ApiError::Internal(e.to_string()))?;
    let path = state.data_dir.join(format!("{}.json", body.name));
    s.document.save(&path).map_err(|e| core_error("save", e))?;
    Ok(Json(json!({"name": body.name, "revision": s.revision})))
}

/// Applies `edit` to a copy of the document; commits only if the revision
/// matches and the edited session derives cleanly.
fn mutate(
    state: &AppState,
    id: &str,
    revision: u64,
    edit: impl FnOnce(&mut SessionDocument) -> ApiResult<()>,
) -> ApiResult<Json<MutationView>> {
    let s = state.session(id)?;
    let mut s = s.write().expect("session lock");
    if s.revision != revision {
        return Err(ApiError::Stale {
            current: s.revision,
            supplied: revision,
        });
    }
    let mut doc = s.document.clone();
    edit(&mut doc)?;
    let derived = derive(&doc)?;
    s.document = doc;
    s.derived = derived;
    s.revision += 1;
    Ok(Json(MutationView {
        revision: s.revision,
        derived: (&s.derived).into(),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CardsBody {
    revision: u64,
    cards: Vec<i64>,
}

async fn put_cards(
    State(state): State<AppState>,
    Path((id, criterion)): Path<(String, String)>,
    Json(body): Json<CardsBody>,
) -> ApiResult<Json<MutationView>> {
    mutate(&state, &id, body.revision, |doc| {
        let scale = doc
            .scale_mut(&criterion)
            .ok_or_else(|| ApiError::NotFound(format!("criterion {criterion}")))?;
        scale.adjacent_cards = body.cards;
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CardBody {
    revision: u64,
    cards: i64,
}

async fn put_card(
    State(state): State<AppState>,
    Path((id, criterion, index)): Path<(String, String, usize)>,
    Json(body): Json<CardBody>,
) -> ApiResult<Json<MutationView>> {
    mutate(&state, &id, body.revision, |doc| {
        let scale = doc
            .scale_mut(&criterion)
            .ok_or_else(|| ApiError::NotFound(format!("criterion {criterion}")))?;
        let slot = scale
            .adjacent_cards
            .get_mut(index)
            .ok_or_else(|| ApiError::NotFound(format!("adjacency {index} of {criterion}")))?;
        *slot = body.cards;
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RankingBody {
    revision: u64,
    /// Worst to best; inner lists are ties.
    groups: Vec<Vec<String>>,
}

async fn put_ranking(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<RankingBody>,
) -> ApiResult<Json<MutationView>> {
    mutate(&state, &id, body.revision, |doc| {
        doc.weighting.ranking = SwingRanking { groups: body.groups };
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CardsSpec {
    /// One count per non-top swing, in ranking order.
    List(Vec<u32>),
    ByCriterion(BTreeMap<String, u32>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosenessBody {
    revision: u64,
    cards: CardsSpec,
    /// Replaces the stored pairwise judgments when present.
    #[serde(default)]
    extra: Option<Vec<Judgment>>,
}

async fn put_closeness(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ClosenessBody>,
) -> ApiResult<Json<MutationView>> {
    mutate(&state, &id, body.revision, |doc| {
        let cards = match body.cards {
            CardsSpec::ByCriterion(m) => m,
            CardsSpec::List(list) => {
                let groups = &doc.weighting.ranking.groups;
                let rest = &groups[..groups.len().saturating_sub(1)];
                if list.len() != rest.len() {
                    return Err(ApiError::Invalid {
                        message: format!("expected {} closeness counts, got {}", rest.len(), list.len()),
                        violations: json!([]),
                    });
                }
                rest.iter()
                    .zip(list)
                    .flat_map(|(g, n)| g.iter().map(move |c| (c.clone(), n)))
                    .collect()
            }
        };
        let extra = body.extra.unwrap_or_else(|| doc.weighting.closeness.extra.clone());
        doc.weighting.closeness = ClosenessJudgments {
            cards_to_reference: cards,
            extra,
        };
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZBody {
    revision: u64,
    /// Performance of the top swing at indifference, e.g. `"15"` or `"medium"`.
    #[serde(default)]
    indifference: Option<String>,
    /// Explicit ratio, e.g. `"17/4"` or `"4.25"`.
    #[serde(default)]
    z: Option<String>,
}

async fn put_z(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ZBody>,
) -> ApiResult<Json<MutationView>> {
    mutate(&state, &id, body.revision, |doc| {
        doc.weighting.z_source = match (body.indifference, body.z) {
            (Some(token), None) => {
                let top = doc
                    .weighting
                    .ranking
                    .top()
                    .cloned()
                    .ok_or_else(|| ApiError::BadRequest("no ranking".into()))?;
                let criterion = doc.framework.criterion(&top).map_err(|e| core_error("z", e))?;
                let performance = criterion.parse_performance(&token).map_err(|e| core_error("z", e))?;
                ZSource::Indifference { performance }
            }
            (None, Some(z)) => ZSource::Explicit {
                z: parse_number(&z)?,
            },
            _ => return Err(ApiError::BadRequest("give exactly one of indifference or z".into())),
        };
        Ok(())
    })
}

fn parse_number(text: &str) -> ApiResult<Exact> {
    parse_exact(text).map_err(|e| ApiError::BadRequest(e.to_string()))
}

#[derive(Serialize)]
struct ValueFunctionsView {
    revision: u64,
    value_functions: BTreeMap<String, ValueFunctionView>,
}

async fn get_value_functions(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<ValueFunctionsView>> {
    let s = state.session(&id)?;
    let s = s.read().expect("session lock");
    Ok(Json(ValueFunctionsView {
        revision: s.revision,
        value_functions: s.derived.value_functions.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
    }))
}

#[derive(Serialize)]
struct WeightsResponse {
    revision: u64,
    weights: WeightsView,
}

async fn get_weights(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<WeightsResponse>> {
    let s = state.session(&id)?;
    let s = s.read().expect("session lock");
    Ok(Json(WeightsResponse {
        revision: s.revision,
        weights: (&s.derived.weights).into(),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyBody {
    /// Fleet CSV text.
    fleet: String,
    /// Reference-lists JSON text, needed for raw fleets.
    #[serde(default)]
    lists: Option<String>,
    #[serde(default)]
    lambda23: Option<String>,
    #[serde(default)]
    lambda12: Option<String>,
    #[serde(default)]
    z: Option<String>,
    #[serde(default)]
    lenient: bool,
}

fn overrides(
    lambda23: &Option<String>,
    lambda12: &Option<String>,
    z: &Option<String>,
    lenient: bool,
) -> ApiResult<Overrides> {
    let opt = |v: &Option<String>| v.as_deref().map(parse_number).transpose();
    Ok(Overrides {
        lambda_23: opt(lambda23)?,
        lambda_12: opt(lambda12)?,
        z: opt(z)?,
        lenient,
    })
}

fn snapshot(state: &AppState, id: &str) -> ApiResult<(SessionDocument, u64)> {
    let s = state.session(id)?;
    let s = s.read().expect("session lock");
    Ok((s.document.clone(), s.revision))
}

async fn classify(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ClassifyBody>,
) -> ApiResult<Json<serde_json::Value>> {
    let (doc, revision) = snapshot(&state, &id)?;
    let overrides = overrides(&body.lambda23, &body.lambda12, &body.z, body.lenient)?;
    let inputs = Inputs {
        session: &doc,
        fleet: &body.fleet,
        lists: body.lists.as_deref(),
        overrides: &overrides,
    };
    let out = ops::classify(&inputs, state.exec)?;
    Ok(Json(json!({"revision": revision, "output": out})))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepBody {
    fleet: String,
    #[serde(default)]
    lists: Option<String>,
    #[serde(default)]
    lambda23: Option<String>,
    #[serde(default)]
    lambda12: Option<String>,
    #[serde(default)]
    z: Option<String>,
    #[serde(default)]
    lenient: bool,
    #[serde(default)]
    lambda_values: Option<Vec<String>>,
    #[serde(default)]
    z_values: Option<Vec<String>>,
    /// `ship,category` CSV text.
    #[serde(default)]
    baseline: Option<String>,
    #[serde(default)]
    ship: Option<String>,
}

async fn run_sweep(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SweepBody>,
) -> ApiResult<Json<serde_json::Value>> {
    let (doc, revision) = snapshot(&state, &id)?;
    let overrides = overrides(&body.lambda23, &body.lambda12, &body.z, body.lenient)?;
    let list = |v: &Option<Vec<String>>| -> ApiResult<Option<Vec<Exact>>> {
        v.as_ref()
            .map(|xs| xs.iter().map(|x| parse_number(x)).collect())
            .transpose()
    };
    let grid = match (list(&body.lambda_values)?, list(&body.z_values)?) {
        (None, None) => None,
        (l, z) => {
            let d = ScenarioGrid::default_grid();
            Some(ScenarioGrid {
                lambda_values: l.unwrap_or(d.lambda_values),
                z_values: z.unwrap_or(d.z_values),
            })
        }
    };
    let inputs = Inputs {
        session: &doc,
        fleet: &body.fleet,
        lists: body.lists.as_deref(),
        overrides: &overrides,
    };
    let params = SweepParams {
        grid,
        baseline: body.baseline.as_deref(),
        ship: body.ship.as_deref(),
    };
    let out = ops::run_sweep(&inputs, &params, state.exec)?;
    Ok(Json(json!({"revision": revision, "output": out})))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/save", post(save_session))
        .route("/sessions/{id}/scales/{criterion}/cards", put(put_cards))
        .route("/sessions/{id}/scales/{criterion}/cards/{index}", put(put_card))
        .route("/sessions/{id}/ranking", put(put_ranking))
        .route("/sessions/{id}/closeness", put(put_closeness))
        .route("/sessions/{id}/z", put(put_z))
        .route("/sessions/{id}/value-functions", get(get_value_functions))
        .route("/sessions/{id}/weights", get(get_weights))
        .route("/sessions/{id}/classify", post(classify))
        .route("/sessions/{id}/sweep", post(run_sweep))
        .with_state(state)
}

pub async fn serve(config: crate::config::ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config.data_dir)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
