//! Session-oriented HTTP interface for interactive segmentation.
//!
//! Each session owns an immutable image plus mutable seeds and settings.
//! Every accepted mutation bumps the session revision and schedules a
//! recompute on a background worker. At most one recompute runs per session;
//! mutations that arrive meanwhile are coalesced into a single follow-up run
//! on the latest state. Clients poll `GET /sessions/{id}/result`.

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use base64::Engine as _;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cutbuilder::{BuildConfig, RefinementSeed};
use crate::error::Error;
use crate::geom::Point;
use crate::imaging::{decode_grid, png_from_gray8, ImageFormat, Mask, ScalarGrid};
use crate::segmenter::{segment, SegmentationRequest, SegmentationResult};
use crate::templates::Template;

pub const DEFAULT_IDLE_TTL: Duration = Duration::from_secs(30 * 60);
const MAX_UPLOAD_BYTES: usize = 512 * 1024 * 1024;
pub const PRIMARY_SEED_ID: &str = "primary";

/// Failure of a service operation, mapped onto an HTTP status.
#[derive(Debug)]
pub enum ServiceError {
    NotFound(String),
    BadRequest(String),
}

impl ServiceError {
    fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::BadRequest(_) => "bad_request",
        }
    }

    fn message(&self) -> &str {
        match self {
            ServiceError::NotFound(m) | ServiceError::BadRequest(m) => m,
        }
    }
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for ServiceError {}

impl From<Error> for ServiceError {
    fn from(e: Error) -> Self {
        ServiceError::BadRequest(e.to_string())
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "kind": self.kind(), "message": self.message() } });
        (self.status(), Json(body)).into_response()
    }
}

type ServiceResult<T> = std::result::Result<T, ServiceError>;

/// Why the latest recompute produced no segmentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<(String, String)>,
}

impl From<&Error> for ComputeError {
    fn from(e: &Error) -> Self {
        let (kind, conflicts) = match e {
            Error::ConflictingRefinements { conflicts } => ("conflicting_refinements", conflicts.clone()),
            Error::InfeasibleCut => ("infeasible_cut", Vec::new()),
            e if e.is_validation() => ("validation", Vec::new()),
            _ => ("runtime", Vec::new()),
        };
        Self {
            kind,
            message: e.to_string(),
            conflicts,
        }
    }
}

#[derive(Debug, Clone)]
struct Published {
    revision: u64,
    outcome: std::result::Result<Arc<SegmentationResult>, ComputeError>,
}

#[derive(Debug)]
struct SessionState {
    template: Template,
    config: BuildConfig,
    primary: Option<Point>,
    refinements: Vec<RefinementSeed>,
    next_refinement: u64,
    revision: u64,
    published: Option<Published>,
    computing: bool,
    recomputes: u64,
    last_access: Instant,
}

/// One interactive segmentation session.
#[derive(Debug)]
pub struct Session {
    id: String,
    grid: Arc<ScalarGrid>,
    state: Mutex<SessionState>,
    settled: Condvar,
}

/// Seed as listed in session documents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedView {
    pub id: String,
    pub kind: &'static str,
    pub position: Point,
}

/// Snapshot of the latest published outcome.
#[derive(Debug, Clone)]
pub struct ResultView {
    /// Revision the result was computed at (0 when none exists yet).
    pub revision: u64,
    pub current_revision: u64,
    pub stale: bool,
    pub result: Option<Arc<SegmentationResult>>,
    pub error: Option<ComputeError>,
}

impl ResultView {
    pub fn to_json(&self) -> Value {
        json!({
            "revision": self.revision,
            "current_revision": self.current_revision,
            "stale": self.stale,
            "result": self.result.as_deref(),
            "error": self.error,
        })
    }
}

/// Partial update of the segmentation settings.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub delta: Option<usize>,
    pub rays: Option<usize>,
    pub nodes_per_ray: Option<usize>,
    pub lat_rows: Option<usize>,
    pub mean_radius_mm: Option<f64>,
    pub include_refinement_in_mean: Option<bool>,
    pub template: Option<Template>,
    pub client_revision: Option<u64>,
}

impl ConfigPatch {
    fn apply(&self, config: &mut BuildConfig, template: &mut Template) {
        if let Some(v) = self.delta {
            config.delta = v;
        }
        if let Some(v) = self.rays {
            config.rays = v;
        }
        if let Some(v) = self.nodes_per_ray {
            config.nodes_per_ray = v;
        }
        if let Some(v) = self.lat_rows {
            config.lat_rows = Some(v);
        }
        if let Some(v) = self.mean_radius_mm {
            config.mean_radius_mm = v;
        }
        if let Some(v) = self.include_refinement_in_mean {
            config.include_refinement_in_mean = v;
        }
        if let Some(t) = &self.template {
            *template = t.clone();
        }
    }
}

impl Session {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn grid(&self) -> &ScalarGrid {
        &self.grid
    }

    fn lock(&self) -> MutexGuard<'_, SessionState> {
        let mut st = self.state.lock().unwrap_or_else(|p| p.into_inner());
        st.last_access = Instant::now();
        st
    }

    pub fn revision(&self) -> u64 {
        self.lock().revision
    }

    /// Number of recomputes finished so far.
    pub fn recompute_count(&self) -> u64 {
        self.lock().recomputes
    }

    pub fn config(&self) -> (BuildConfig, Template) {
        let st = self.lock();
        (st.config.clone(), st.template.clone())
    }

    pub fn seeds(&self) -> Vec<SeedView> {
        let st = self.lock();
        let mut out: Vec<SeedView> = st
            .primary
            .map(|p| SeedView {
                id: PRIMARY_SEED_ID.to_string(),
                kind: "primary",
                position: p,
            })
            .into_iter()
            .collect();
        out.extend(st.refinements.iter().map(|s| SeedView {
            id: s.id.clone(),
            kind: "refine",
            position: s.position,
        }));
        out
    }

    /// The segmentation request for the current state, if a primary seed exists.
    pub fn current_request(&self) -> Option<SegmentationRequest> {
        request_of(&self.lock())
    }

    fn check_position(&self, p: Point) -> ServiceResult<Point> {
        if !p.is_finite() {
            return Err(ServiceError::BadRequest("position must be finite".into()));
        }
        let p = if self.grid.ndim() == 2 { Point::xy(p.x, p.y) } else { p };
        for (a, (lo, hi)) in self.grid.world_bounds().into_iter().enumerate() {
            let margin = (hi - lo).max(self.grid.spacing()[a]);
            if p.axis(a) < lo - margin || p.axis(a) > hi + margin {
                return Err(ServiceError::BadRequest(format!(
                    "position {p:?} is far outside the image on axis {a}"
                )));
            }
        }
        Ok(p)
    }

    fn commit(self: &Arc<Self>, mut st: MutexGuard<'_, SessionState>) -> u64 {
        st.revision += 1;
        let rev = st.revision;
        if st.primary.is_none() {
            st.published = None;
        } else if !st.computing {
            st.computing = true;
            let session = Arc::clone(self);
            std::thread::spawn(move || session.run_worker());
        }
        rev
    }

    /// Places or moves the primary seed.
    pub fn set_primary(self: &Arc<Self>, position: Point) -> ServiceResult<u64> {
        let p = self.check_position(position)?;
        let mut st = self.lock();
        st.primary = Some(p);
        Ok(self.commit(st))
    }

    /// Adds a refinement seed and returns its id with the new revision.
    pub fn add_refinement(self: &Arc<Self>, position: Point) -> ServiceResult<(String, u64)> {
        let p = self.check_position(position)?;
        let mut st = self.lock();
        st.next_refinement += 1;
        let id = format!("r{}", st.next_refinement);
        st.refinements.push(RefinementSeed::new(id.clone(), p));
        Ok((id, self.commit(st)))
    }

    pub fn move_seed(self: &Arc<Self>, seed_id: &str, position: Point) -> ServiceResult<u64> {
        let p = self.check_position(position)?;
        let mut st = self.lock();
        if seed_id == PRIMARY_SEED_ID {
            if st.primary.is_none() {
                return Err(ServiceError::NotFound("no primary seed placed yet".into()));
            }
            st.primary = Some(p);
        } else {
            let seed = st
                .refinements
                .iter_mut()
                .find(|s| s.id == seed_id)
                .ok_or_else(|| ServiceError::NotFound(format!("unknown seed {seed_id}")))?;
            seed.position = p;
            seed.snapped = None;
        }
        Ok(self.commit(st))
    }

    pub fn delete_seed(self: &Arc<Self>, seed_id: &str) -> ServiceResult<u64> {
        let mut st = self.lock();
        if seed_id == PRIMARY_SEED_ID {
            if st.primary.take().is_none() {
                return Err(ServiceError::NotFound("no primary seed placed yet".into()));
            }
        } else {
            let before = st.refinements.len();
            st.refinements.retain(|s| s.id != seed_id);
            if st.refinements.len() == before {
                return Err(ServiceError::NotFound(format!("unknown seed {seed_id}")));
            }
        }
        Ok(self.commit(st))
    }

    pub fn update_config(self: &Arc<Self>, patch: &ConfigPatch) -> ServiceResult<u64> {
        let mut st = self.lock();
        let (mut config, mut template) = (st.config.clone(), st.template.clone());
        patch.apply(&mut config, &mut template);
        validate_settings(&self.grid, &config, &template)?;
        st.config = config;
        st.template = template;
        Ok(self.commit(st))
    }

    pub fn result(&self) -> ResultView {
        let st = self.lock();
        let (revision, result, error) = match &st.published {
            None => (0, None, None),
            Some(p) => match &p.outcome {
                Ok(r) => (p.revision, Some(Arc::clone(r)), None),
                Err(e) => (p.revision, None, Some(e.clone())),
            },
        };
        let stale = st.computing || (st.primary.is_some() && revision < st.revision);
        ResultView {
            revision,
            current_revision: st.revision,
            stale,
            result,
            error,
        }
    }

    /// Blocks until no recompute is running or pending. Returns false on timeout.
    pub fn wait_settled(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut st = self.lock();
        while st.computing {
            let now = Instant::now();
            if now >= deadline {
                return false;
            }
            st = self
                .settled
                .wait_timeout(st, deadline - now)
                .unwrap_or_else(|p| p.into_inner())
                .0;
        }
        true
    }

    fn run_worker(self: Arc<Self>) {
        loop {
            let (revision, request) = {
                let mut st = self.lock();
                match request_of(&st) {
                    Some(req) => (st.revision, req),
                    None => {
                        st.computing = false;
                        self.settled.notify_all();
                        return;
                    }
                }
            };
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| segment(&self.grid, &request)))
                .unwrap_or_else(|_| Err(Error::validation("segmentation panicked")));
            let mut st = self.lock();
            st.recomputes += 1;
            if st.primary.is_some() && st.published.as_ref().is_none_or(|p| p.revision < revision) {
                st.published = Some(Published {
                    revision,
                    outcome: outcome.map(Arc::new).map_err(|e| ComputeError::from(&e)),
                });
            }
            if st.revision == revision || st.primary.is_none() {
                st.computing = false;
                self.settled.notify_all();
                return;
            }
        }
    }
}

fn request_of(st: &SessionState) -> Option<SegmentationRequest> {
    st.primary.map(|p| SegmentationRequest {
        template: st.template.clone(),
        primary_seed: p,
        refinement_seeds: st.refinements.clone(),
        config: st.config.clone(),
    })
}

fn validate_settings(grid: &ScalarGrid, config: &BuildConfig, template: &Template) -> ServiceResult<()> {
    config.validate()?;
    if template.ndim() != grid.ndim() {
        return Err(ServiceError::BadRequest(format!(
            "{}D template does not fit a {}D image",
            template.ndim(),
            grid.ndim()
        )));
    }
    let probe = SegmentationRequest::new(template.clone(), Point::ORIGIN, config.clone());
    probe.layout()?;
    Ok(())
}

/// All live sessions.
#[derive(Debug)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    idle_ttl: Duration,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_IDLE_TTL)
    }
}

impl SessionStore {
    pub fn new(idle_ttl: Duration) -> Self {
        Self {
            sessions: Mutex::new(HashMap::new()),
            idle_ttl,
        }
    }

    fn map(&self) -> MutexGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn create(&self, grid: ScalarGrid, template: Template, config: BuildConfig) -> ServiceResult<Arc<Session>> {
        validate_settings(&grid, &config, &template)?;
        let mut map = self.map();
        let mut rng = rand::rng();
        let id = loop {
            let id = format!("{:016x}", rng.random::<u64>());
            if !map.contains_key(&id) {
                break id;
            }
        };
        let session = Arc::new(Session {
            id: id.clone(),
            grid: Arc::new(grid),
            state: Mutex::new(SessionState {
                template,
                config,
                primary: None,
                refinements: Vec::new(),
                next_refinement: 0,
                revision: 0,
                published: None,
                computing: false,
                recomputes: 0,
                last_access: Instant::now(),
            }),
            settled: Condvar::new(),
        });
        map.insert(id, Arc::clone(&session));
        Ok(session)
    }

    pub fn get(&self, id: &str) -> ServiceResult<Arc<Session>> {
        self.map()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("unknown session {id}")))
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the configured TTL; returns how many.
    pub fn expire_idle(&self) -> usize {
        self.expire_idle_at(Instant::now())
    }

    fn expire_idle_at(&self, now: Instant) -> usize {
        let mut map = self.map();
        let before = map.len();
        map.retain(|_, s| {
            let st = s.state.lock().unwrap_or_else(|p| p.into_inner());
            now.saturating_duration_since(st.last_access) <= self.idle_ttl
        });
        before - map.len()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    format: String,
    image_base64: String,
    #[serde(default)]
    config: Option<ConfigPatch>,
    #[serde(default)]
    template: Option<Template>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedBody {
    #[serde(default)]
    kind: Option<String>,
    position: Point,
    #[serde(default)]
    client_revision: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveBody {
    position: Point,
    #[serde(default)]
    client_revision: Option<u64>,
}

type Shared = State<Arc<SessionStore>>;

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> ServiceResult<T> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("malformed request document: {e}")))
}

async fn create_session(State(store): Shared, body: axum::body::Bytes) -> ServiceResult<Response> {
    let body: CreateBody = parse_json(&body)?;
    let format = ImageFormat::parse(&body.format)?;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(body.image_base64.trim())
        .map_err(|e| ServiceError::BadRequest(format!("image_base64 is not valid base64: {e}")))?;
    let grid = decode_grid(&bytes, format)?;
    let template = match body.template {
        Some(t) => t,
        None if grid.ndim() == 3 => Template::sphere(80.0)?,
        None => Template::circle(80.0)?,
    };
    let mut config = BuildConfig::default();
    let mut template = template;
    if let Some(patch) = &body.config {
        patch.apply(&mut config, &mut template);
    }
    let session = store.create(grid, template, config)?;
    let doc = json!({
        "id": session.id(),
        "revision": 0,
        "dims": session.grid().dims(),
        "spacing": session.grid().spacing(),
        "origin": session.grid().origin(),
    });
    Ok((StatusCode::CREATED, Json(doc)).into_response())
}

async fn get_session(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Value>> {
    let s = store.get(&id)?;
    let (config, template) = s.config();
    Ok(Json(json!({
        "id": s.id(),
        "dims": s.grid().dims(),
        "spacing": s.grid().spacing(),
        "origin": s.grid().origin(),
        "revision": s.revision(),
        "config": config,
        "template": template,
        "seeds": s.seeds(),
        "recomputes": s.recompute_count(),
    })))
}

fn mutation_doc(seed_id: &str, revision: u64, client_revision: Option<u64>) -> Json<Value> {
    Json(json!({ "seed_id": seed_id, "revision": revision, "client_revision": client_revision }))
}

async fn add_seed(State(store): Shared, Path(id): Path<String>, body: axum::body::Bytes) -> ServiceResult<Json<Value>> {
    let s = store.get(&id)?;
    let body: SeedBody = parse_json(&body)?;
    match body.kind.as_deref().unwrap_or("refine") {
        "primary" => {
            let rev = s.set_primary(body.position)?;
            Ok(mutation_doc(PRIMARY_SEED_ID, rev, body.client_revision))
        }
        "refine" => {
            let (sid, rev) = s.add_refinement(body.position)?;
            Ok(mutation_doc(&sid, rev, body.client_revision))
        }
        other => Err(ServiceError::BadRequest(format!(
            "seed kind must be 'primary' or 'refine', got '{other}'"
        ))),
    }
}

async fn move_seed(
    State(store): Shared,
    Path((id, sid)): Path<(String, String)>,
    body: axum::body::Bytes,
) -> ServiceResult<Json<Value>> {
    let s = store.get(&id)?;
    let body: MoveBody = parse_json(&body)?;
    let rev = s.move_seed(&sid, body.position)?;
    Ok(mutation_doc(&sid, rev, body.client_revision))
}

async fn delete_seed(State(store): Shared, Path((id, sid)): Path<(String, String)>) -> ServiceResult<Json<Value>> {
    let s = store.get(&id)?;
    let rev = s.delete_seed(&sid)?;
    Ok(mutation_doc(&sid, rev, None))
}

async fn patch_config(
    State(store): Shared,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> ServiceResult<Json<Value>> {
    let s = store.get(&id)?;
    let patch: ConfigPatch = parse_json(&body)?;
    let rev = s.update_config(&patch)?;
    let (config, template) = s.config();
    Ok(Json(json!({
        "revision": rev,
        "client_revision": patch.client_revision,
        "config": config,
        "template": template,
    })))
}

async fn get_result(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Value>> {
    Ok(Json(store.get(&id)?.result().to_json()))
}

fn parse_axis(axis: &str) -> ServiceResult<usize> {
    match axis {
        "0" | "x" => Ok(0),
        "1" | "y" => Ok(1),
        "2" | "z" => Ok(2),
        other => Err(ServiceError::BadRequest(format!(
            "axis must be 0, 1, 2 or x, y, z, got '{other}'"
        ))),
    }
}

fn png_response(width: usize, height: usize, pixels: Vec<u8>) -> Response {
    (
        [(header::CONTENT_TYPE, "image/png")],
        png_from_gray8(width, height, pixels),
    )
        .into_response()
}

async fn image_slice(
    State(store): Shared,
    Path((id, axis, index)): Path<(String, String, usize)>,
) -> ServiceResult<Response> {
    let s = store.get(&id)?;
    let (w, h, px) = s.grid().render_slice(parse_axis(&axis)?, index)?;
    Ok(png_response(w, h, px))
}

fn mask_as_grid(mask: &Mask) -> ScalarGrid {
    let values = mask.labels().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    ScalarGrid::with_unit_spacing(mask.dims().to_vec(), values).expect("mask dims are valid")
}

/// Binary slice (0/255) of the latest published mask, for drawing outlines.
async fn mask_slice(
    State(store): Shared,
    Path((id, axis, index)): Path<(String, String, usize)>,
) -> ServiceResult<Response> {
    let s = store.get(&id)?;
    let view = s.result();
    let result = view
        .result
        .ok_or_else(|| ServiceError::NotFound("no segmentation result yet".into()))?;
    let (w, h, px) = mask_as_grid(&result.mask).render_slice(parse_axis(&axis)?, index)?;
    Ok(png_response(w, h, px))
}

/// The HTTP routes over a shared session store.
pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/seeds", post(add_seed))
        .route("/sessions/{id}/seeds/{sid}", patch(move_seed).delete(delete_seed))
        .route("/sessions/{id}/config", patch(patch_config))
        .route("/sessions/{id}/result", get(get_result))
        .route("/sessions/{id}/image/slice/{axis}/{index}", get(image_slice))
        .route("/sessions/{id}/result/mask/slice/{axis}/{index}", get(mask_slice))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(store)
}

/// Serves the API on `listener` until the process ends, expiring idle
/// sessions once a minute.
pub async fn serve(listener: tokio::net::TcpListener, store: Arc<SessionStore>) -> std::io::Result<()> {
    let reaper = Arc::clone(&store);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            reaper.expire_idle();
        }
    });
    axum::serve(listener, router(store)).await
}
