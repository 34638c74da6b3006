use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    compute_layers, AcceptedQuest, Child, Env, LayerKind, Layers, LogRecord, PlatformError, RecordLog, Registry, Store,
    SyncOutcome,
};
use crate::analytics::{efficiency_score, EfficiencyScore};
use crate::anthro::{assess, Indicator, Measurement, ZScoreResult};
use crate::game::{leaderboard, Leaderboard, LeaderboardMember, Quest};
use crate::integrity::{Alert, AlertKind, AlertSeverity};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", content = "chw_id", rename_all = "lowercase")]
pub enum Role {
    Chw(String),
    Supervisor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncBatch {
    pub batch_id: String,
    pub chw_id: String,
    pub client_timestamp: DateTime<Utc>,
    pub measurements: Vec<Measurement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncResponse {
    pub batch_id: String,
    pub outcomes: Vec<SyncOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestView {
    #[serde(flatten)]
    pub quest: Quest,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlertFilter {
    pub chw_id: Option<String>,
    pub kind: Option<AlertKind>,
    pub min_severity: Option<AlertSeverity>,
}

/// Groups a measurement stream into one sync batch per CHW and day, in the
/// order the first record of each batch was taken.
pub fn sync_batches(measurements: &[Measurement]) -> Vec<SyncBatch> {
    let mut index: BTreeMap<(String, chrono::NaiveDate), usize> = BTreeMap::new();
    let mut batches: Vec<SyncBatch> = Vec::new();
    for m in measurements {
        let key = (m.chw_id.clone(), m.timestamp.date_naive());
        let i = *index.entry(key.clone()).or_insert_with(|| {
            batches.push(SyncBatch {
                batch_id: format!("b-{}-{}", key.0, key.1),
                chw_id: key.0.clone(),
                client_timestamp: m.timestamp,
                measurements: Vec::new(),
            });
            batches.len() - 1
        });
        let b = &mut batches[i];
        b.client_timestamp = b.client_timestamp.max(m.timestamp + chrono::Duration::hours(1));
        b.measurements.push(m.clone());
    }
    batches
}

struct Inner {
    store: Store,
    log: RecordLog,
}

/// The service: one writer for the store and log, readers see snapshots,
/// and map layers are published by atomic swap.
pub struct Platform {
    env: Arc<Env>,
    inner: RwLock<Inner>,
    layers: RwLock<Arc<Layers>>,
}

impl Platform {
    /// Starts a new store whose log begins with `registry`.
    pub fn create(mut log: RecordLog, registry: Registry, env: Env) -> Result<Self, PlatformError> {
        if !log.is_empty() {
            return Err(PlatformError::Log("create needs an empty log".into()));
        }
        let rec = LogRecord::Registry { registry };
        log.append(&rec)?;
        log.sync()?;
        let mut store = Store::default();
        store.apply(&rec, &env);
        Ok(Self::from_parts(store, log, env))
    }

    pub fn create_file(path: &Path, registry: Registry, env: Env) -> Result<Self, PlatformError> {
        Self::create(RecordLog::create(path)?, registry, env)
    }

    /// Recovers from an existing log.
    pub fn open(path: &Path, env: Env) -> Result<Self, PlatformError> {
        let (log, records) = RecordLog::open(path)?;
        let store = Store::rebuild(&records, &env);
        Ok(Self::from_parts(store, log, env))
    }

    fn from_parts(store: Store, log: RecordLog, env: Env) -> Self {
        Self {
            env: Arc::new(env),
            inner: RwLock::new(Inner { store, log }),
            layers: RwLock::new(Arc::new(Layers::empty())),
        }
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn authenticate(&self, token: &str) -> Result<Role, PlatformError> {
        self.env.config.tokens.get(token).cloned().ok_or(PlatformError::Unauthorized)
    }

    /// Read access to a consistent snapshot of the store.
    pub fn with_store<T>(&self, f: impl FnOnce(&Store) -> T) -> T {
        f(&self.inner.read().expect("store lock").store)
    }

    pub fn log_bytes(&self) -> Result<Vec<u8>, PlatformError> {
        self.inner.read().expect("store lock").log.bytes()
    }

    pub fn layers(&self) -> Arc<Layers> {
        self.layers.read().expect("layer lock").clone()
    }

    /// Processes a batch in order. Each new valid measurement is appended to
    /// the log before it touches the in-memory state.
    pub fn submit_batch(&self, role: &Role, batch: &SyncBatch) -> Result<SyncResponse, PlatformError> {
        match role {
            Role::Chw(id) if *id == batch.chw_id => {}
            _ => return Err(PlatformError::Forbidden(format!("token may not submit for {}", batch.chw_id))),
        }
        let mut guard = self.inner.write().expect("store lock");
        let inner = &mut *guard;
        let mut outcomes = Vec::with_capacity(batch.measurements.len());
        let mut wrote = false;
        for m in &batch.measurements {
            let (outcome, record) = inner.store.process(m, &batch.chw_id, &self.env);
            if let Some(rec) = record {
                inner.log.append(&rec)?;
                inner.store.apply(&rec, &self.env);
                wrote = true;
            }
            outcomes.push(outcome);
        }
        if wrote {
            inner.log.sync()?;
        }
        Ok(SyncResponse { batch_id: batch.batch_id.clone(), outcomes })
    }

    /// Rebuilds layers and quests from the current snapshot and publishes them.
    pub fn recompute_layers(&self, now: DateTime<Utc>) -> Result<Arc<Layers>, PlatformError> {
        let layers = Arc::new(self.with_store(|s| compute_layers(s, &self.env, now))?);
        *self.layers.write().expect("layer lock") = layers.clone();
        Ok(layers)
    }

    fn chw_scope(&self, role: &Role, chw_id: Option<&str>) -> Result<String, PlatformError> {
        match (role, chw_id) {
            (Role::Chw(me), None) => Ok(me.clone()),
            (Role::Chw(me), Some(id)) if id == me => Ok(me.clone()),
            (Role::Chw(_), Some(id)) => Err(PlatformError::Forbidden(format!("cannot view {id}"))),
            (Role::Supervisor, Some(id)) => Ok(id.to_string()),
            (Role::Supervisor, None) => Err(PlatformError::BadRequest("chw_id is required".into())),
        }
    }

    fn known_chw(&self, id: &str) -> Result<(), PlatformError> {
        self.with_store(|s| {
            s.registry().chw(id).map(|_| ()).ok_or_else(|| PlatformError::NotFound(format!("CHW {id}")))
        })
    }

    /// Unexpired accepted quests first, then fresh ones from the last recompute.
    pub fn get_quests(&self, role: &Role, chw_id: Option<&str>, max: usize) -> Result<Vec<QuestView>, PlatformError> {
        let chw = self.chw_scope(role, chw_id)?;
        self.known_chw(&chw)?;
        let layers = self.layers();
        let Some(now) = layers.generated_at else { return Ok(vec![]) };
        let mut accepted: Vec<AcceptedQuest> = self.with_store(|s| {
            s.accepted_quests().filter(|q| q.quest.chw_id == chw && q.quest.expires_at > now).cloned().collect()
        });
        accepted.sort_by(|a, b| a.accepted_at.cmp(&b.accepted_at).then_with(|| a.quest.id.cmp(&b.quest.id)));
        let taken: Vec<usize> = accepted.iter().map(|q| q.quest.target_cell).collect();
        let mut out: Vec<QuestView> =
            accepted.into_iter().map(|q| QuestView { quest: q.quest, accepted: true }).collect();
        for q in layers.quests.get(&chw).into_iter().flatten() {
            if !taken.contains(&q.target_cell) {
                out.push(QuestView { quest: q.clone(), accepted: false });
            }
        }
        out.truncate(max);
        Ok(out)
    }

    pub fn accept_quest(&self, role: &Role, quest_id: &str, at: DateTime<Utc>) -> Result<Quest, PlatformError> {
        let Role::Chw(chw) = role else {
            return Err(PlatformError::Forbidden("only CHWs accept quests".into()));
        };
        let layers = self.layers();
        let quest = layers
            .quests
            .get(chw)
            .and_then(|qs| qs.iter().find(|q| q.id == quest_id))
            .cloned()
            .ok_or_else(|| PlatformError::NotFound(format!("quest {quest_id}")))?;
        if at >= quest.expires_at {
            return Err(PlatformError::BadRequest(format!("quest {quest_id} has expired")));
        }
        let mut guard = self.inner.write().expect("store lock");
        let inner = &mut *guard;
        if inner.store.quest(quest_id).is_some() {
            return Ok(quest);
        }
        let rec = LogRecord::QuestAccepted { quest: quest.clone(), accepted_at: at };
        inner.log.append(&rec)?;
        inner.log.sync()?;
        inner.store.apply(&rec, &self.env);
        Ok(quest)
    }

    pub fn get_leaderboard(&self, _role: &Role, from: DateTime<Utc>, to: DateTime<Utc>) -> Leaderboard {
        self.with_store(|s| {
            let members: Vec<LeaderboardMember> = s
                .registry()
                .chws()
                .map(|w| LeaderboardMember { chw_id: w.id.clone(), team_id: w.team_id.clone(), opted_out: w.opt_out })
                .collect();
            leaderboard(s.states(), &members, from, to)
        })
    }

    pub fn get_hotspots(&self, _role: &Role, indicator: Indicator, kind: LayerKind) -> Value {
        self.layers().geojson(indicator, kind)
    }

    pub fn get_coverage(&self, _role: &Role) -> Value {
        self.layers().coverage_geojson().clone()
    }

    pub fn get_alerts(&self, role: &Role, filter: &AlertFilter) -> Result<Vec<Alert>, PlatformError> {
        if *role != Role::Supervisor {
            return Err(PlatformError::Forbidden("alerts need the supervisor role".into()));
        }
        Ok(self
            .with_store(|s| s.all_alerts(&self.env))
            .into_iter()
            .filter(|a| filter.chw_id.as_ref().is_none_or(|c| *c == a.chw_id))
            .filter(|a| filter.kind.is_none_or(|k| k == a.kind))
            .filter(|a| filter.min_severity.is_none_or(|s| a.severity >= s))
            .collect())
    }

    /// One CHW's score (own for a CHW) or, for a supervisor without an id, every CHW's.
    pub fn get_efficiency(
        &self,
        role: &Role,
        chw_id: Option<&str>,
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    ) -> Result<Vec<EfficiencyScore>, PlatformError> {
        let ids: Vec<String> = match (role, chw_id) {
            (Role::Supervisor, None) => self.with_store(|s| s.registry().chws().map(|w| w.id.clone()).collect()),
            _ => {
                let id = self.chw_scope(role, chw_id)?;
                self.known_chw(&id)?;
                vec![id]
            }
        };
        self.with_store(|s| {
            let alerts = s.all_alerts(&self.env);
            ids.iter()
                .map(|id| {
                    let recs = s.submissions(id, &alerts);
                    efficiency_score(id, &recs, &s.registry().assigned(id), from, to, &self.env.config.efficiency)
                        .map_err(|e| PlatformError::BadRequest(e.to_string()))
                })
                .collect()
        })
    }

    /// Authoritative z-scores for a measurement that has not been synced.
    /// Nothing is stored.
    pub fn preview(&self, role: &Role, m: &Measurement) -> Result<ZScoreResult, PlatformError> {
        m.validate().map_err(|e| PlatformError::Invalid(e.to_string()))?;
        let profile = self.with_store(|s| {
            let child = s
                .registry()
                .child(&m.child_id)
                .ok_or_else(|| PlatformError::NotFound(format!("child {}", m.child_id)))?;
            if let Role::Chw(me) = role {
                if &child.chw_id != me {
                    return Err(PlatformError::Forbidden(format!("child {} is not assigned to {me}", m.child_id)));
                }
            }
            Ok(child.profile())
        })?;
        let env = &self.env;
        Ok(assess(m, &profile, &env.reference, &env.cutoffs, &env.config.assess))
    }

    /// Children visible to the caller: a CHW sees only their own.
    pub fn get_children(&self, role: &Role) -> Vec<Child> {
        self.with_store(|s| match role {
            Role::Supervisor => s.registry().children().cloned().collect(),
            Role::Chw(me) => s.registry().children_of(me).cloned().collect(),
        })
    }

    pub fn health(&self) -> BTreeMap<&'static str, Value> {
        let (n, records) = {
            let g = self.inner.read().expect("store lock");
            (g.store.len(), g.log.len())
        };
        let layers = self.layers();
        BTreeMap::from([
            ("status", Value::from("ok")),
            ("measurements", Value::from(n)),
            ("log_records", Value::from(records)),
            ("layers_generated_at", serde_json::to_value(layers.generated_at).unwrap_or(Value::Null)),
        ])
    }
}
