use axum::extract::{Multipart, Path, State};
use axum::Json;
use hetree::ingest::{self, InputFormat};
use hetree::params::estimate_params;
use hetree::{
    build_tree, AdaptTarget, AdaptationReport, BuildCounters, EstimateOptions, ExplorationSession, NodeId, StartRequest,
    TreeParams, Variant, ValueKind, ViewDocument, VisBounds,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::AppState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub dataset_id: u64,
    pub size: usize,
    pub minv: f64,
    pub maxv: f64,
    pub kind: ValueKind,
    pub predicate: String,
    /// Input lines or rows that were not usable.
    pub skipped: usize,
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

/// Multipart fields: `file` (required), `format` (`nt` or `csv`; else guessed from the file
/// name), `predicate` (optional).
pub async fn upload_dataset(State(state): State<AppState>, mut form: Multipart) -> Result<Json<DatasetInfo>, ApiError> {
    let (mut bytes, mut file_name, mut format, mut predicate) = (None, None, None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::Invalid(e.to_string()))? {
        let name = field.name().unwrap_or_default().to_owned();
        match name.as_str() {
            "file" => {
                file_name = field.file_name().map(str::to_owned);
                bytes = Some(field.bytes().await.map_err(|e| ApiError::Invalid(e.to_string()))?);
            }
            "format" | "predicate" => {
                let text = field.text().await.map_err(|e| ApiError::Invalid(e.to_string()))?;
                let text = text.trim().to_owned();
                if !text.is_empty() {
                    if name == "format" {
                        format = Some(text);
                    } else {
                        predicate = Some(text);
                    }
                }
            }
            _ => {}
        }
    }
    let bytes = bytes.ok_or_else(|| ApiError::Invalid("multipart field `file` is required".into()))?;
    let format: InputFormat = match (format, file_name) {
        (Some(f), _) => f.parse().map_err(ApiError::Invalid)?,
        (None, Some(n)) if n.to_ascii_lowercase().ends_with(".csv") => InputFormat::Csv,
        _ => InputFormat::Ntriples,
    };
    let dataset = blocking(move || Ok(ingest::parse(&bytes, format, predicate.as_deref())?)).await?;
    let (size, minv, maxv) = (dataset.len(), dataset.minv().unwrap_or(0.0), dataset.maxv().unwrap_or(0.0));
    let (kind, predicate, skipped) = (dataset.kind(), dataset.predicate().to_owned(), dataset.skipped());
    let (dataset_id, _) = state.registry.add_dataset(dataset);
    Ok(Json(DatasetInfo { dataset_id, size, minv, maxv, kind, predicate, skipped }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Bsc,
    Res,
    Ran,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub dataset_id: u64,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub leaves: Option<usize>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub lambda_min: Option<usize>,
    #[serde(default)]
    pub lambda_max: Option<usize>,
    pub scenario: ScenarioName,
    #[serde(default)]
    pub resource: Option<String>,
    /// `[lower, upper]` for the range scenario.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    #[serde(default)]
    pub incremental: bool,
}

impl CreateSession {
    fn start(&self) -> Result<StartRequest, ApiError> {
        Ok(match self.scenario {
            ScenarioName::Bsc => StartRequest::Bsc,
            ScenarioName::Res => StartRequest::Res {
                resource: self.resource.clone().ok_or_else(|| ApiError::Invalid("scenario res needs `resource`".into()))?,
            },
            ScenarioName::Ran => {
                let (lower, upper) = self.range.ok_or_else(|| ApiError::Invalid("scenario ran needs `range`".into()))?;
                StartRequest::Ran { lower, upper }
            }
        })
    }

    /// Explicit ℓ and d win; whichever is missing comes from the estimate.
    fn params(&self, n: usize, state: &AppState) -> Result<TreeParams, ApiError> {
        let variant = self.variant.unwrap_or(Variant::C);
        if let (Some(leaves), Some(degree)) = (self.leaves, self.degree) {
            return Ok(TreeParams::new(variant, leaves, degree));
        }
        let bounds = match (self.lambda_min, self.lambda_max) {
            (None, None) => state.config.bounds,
            (lo, hi) => VisBounds::new(lo.unwrap_or(state.config.bounds.lambda_min), hi.unwrap_or(state.config.bounds.lambda_max))?,
        };
        let opts = EstimateOptions { d_max: state.config.d_max, ..Default::default() };
        let est = estimate_params(n, bounds, variant, opts)?;
        Ok(TreeParams::new(variant, self.leaves.unwrap_or(est.leaves), self.degree.unwrap_or(est.degree)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: u64,
    pub dataset_id: u64,
    pub params: TreeParams,
    pub incremental: bool,
    pub view: ViewDocument,
}

pub async fn create_session(State(state): State<AppState>, Json(req): Json<CreateSession>) -> Result<Json<SessionCreated>, ApiError> {
    let dataset = state.registry.dataset(req.dataset_id)?;
    let start = req.start()?;
    let params = req.params(dataset.raw.len(), &state)?;
    let incremental = req.incremental;
    let session = blocking(move || {
        Ok(if incremental {
            ExplorationSession::incremental(dataset.raw.clone(), params, &start)?
        } else {
            let (tree, counters) = build_tree(dataset.sorted(), params)?;
            ExplorationSession::full(tree, counters, &start)?
        })
    })
    .await?;
    let view = session.view();
    let session_id = state.registry.add_session(req.dataset_id, session);
    Ok(Json(SessionCreated { session_id, dataset_id: req.dataset_id, params, incremental, view }))
}

/// Runs `f` with exclusive access, or refuses with 409 if the session is in use.
async fn mutate<T: Send + 'static>(
    state: &AppState,
    id: u64,
    f: impl FnOnce(&mut ExplorationSession) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let entry = state.registry.session(id)?;
    let mut guard = entry.session.clone().try_write_owned().map_err(|_| ApiError::Busy(id))?;
    blocking(move || f(&mut guard)).await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrillRequest {
    pub node_id: NodeId,
}

pub async fn drill(State(state): State<AppState>, Path(id): Path<u64>, Json(req): Json<DrillRequest>) -> Result<Json<ViewDocument>, ApiError> {
    mutate(&state, id, move |s| {
        s.drill_down(req.node_id)?;
        Ok(Json(s.view()))
    })
    .await
}

pub async fn rollup(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<ViewDocument>, ApiError> {
    mutate(&state, id, |s| {
        s.roll_up()?;
        Ok(Json(s.view()))
    })
    .await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptRequest {
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub leaves: Option<usize>,
    #[serde(default)]
    pub root_node_id: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptResponse {
    pub view: ViewDocument,
    pub adaptation_report: AdaptationReport,
}

pub async fn adapt(State(state): State<AppState>, Path(id): Path<u64>, Json(req): Json<AdaptRequest>) -> Result<Json<AdaptResponse>, ApiError> {
    let target = match (req.degree, req.leaves) {
        (Some(d), None) => AdaptTarget::Degree(d),
        (None, Some(l)) => AdaptTarget::Leaves(l),
        _ => return Err(ApiError::Invalid("give exactly one of `degree` and `leaves`".into())),
    };
    mutate(&state, id, move |s| {
        // Work on a copy so a failure leaves the session as it was.
        let mut next = s.clone();
        let report = next.adapt(target, req.root_node_id)?;
        *s = next;
        Ok(Json(AdaptResponse { view: s.view(), adaptation_report: report }))
    })
    .await
}

pub async fn view(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<ViewDocument>, ApiError> {
    let entry = state.registry.session(id)?;
    let s = entry.session.read().await;
    Ok(Json(s.view()))
}

pub async fn counters(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<BuildCounters>, ApiError> {
    let entry = state.registry.session(id)?;
    let s = entry.session.read().await;
    Ok(Json(s.counters()))
}
