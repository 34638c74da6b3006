use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use super::args::*;
use super::{CliError, CommandOutcome};
use crate::analytics::{
    format_table, normal_approx_sample_size, sample_size, stats_csv, t_tests, Phase, PowerParams, TrialRecord,
};
use crate::anthro::{assess, HeightMode, Indicator, Measurement, Sex, ZFlag, ZScoreResult};
use crate::config::Config;
use crate::fmt::{sig6, zfmt};
use crate::geostat::geojson::hotspot_geojson;
use crate::geostat::{parse_matrix, write_matrix, CoverageStatus, GridSpec, HotspotClass, HotspotLayer, LatLon};
use crate::integrity::{alerts_to_csv, AlertSeverity};
use crate::io::read_csv;
use crate::platform::{
    sync_batches, AlertFilter, Child, ChildRow, Chw, ChwRow, Env, LayerKind, MeasurementRow, Platform, RecordLog,
    Registry, RejectReason, Role, SyncOutcome, SyncResponse,
};
use crate::simkit::{generate_population, simulate_measurements, simulate_trial, write_dataset, SimConfig};

pub(super) fn run(cli: Cli, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let cfg_path = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => simulate(cfg_path, a),
        Command::Power(a) => power(a, out),
        Command::TrialStats(a) => trial_stats(a, out),
        cmd => {
            let config = match cfg_path {
                Some(p) => Config::load(p)?,
                None => Config::default(),
            };
            let env = Env::from_config(config)?;
            match cmd {
                Command::Ingest(a) => ingest(env, a),
                Command::Zscore(a) => zscore(env, a, out, false),
                Command::Classify(a) => zscore(env, a, out, true),
                Command::Hotspot(a) => hotspot(env, a, out),
                Command::Coverage(a) => coverage(env, a, out),
                Command::Quests(a) => quests(env, a, out),
                Command::Screen(a) => screen(env, a, out),
                Command::Efficiency(a) => efficiency(env, a, out),
                Command::Serve(a) => serve(env, a),
                Command::Simulate(_) | Command::Power(_) | Command::TrialStats(_) => unreachable!(),
            }
        }
    }
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(BufReader::new(f)).map_err(|e| CliError::parse(path, e))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => out.write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serialisable");
    s.push(b'\n');
    s
}

fn registry(store: &StoreArgs) -> Result<Option<Registry>, CliError> {
    match (&store.children, &store.chws) {
        (None, None) => Ok(None),
        (Some(c), Some(w)) => {
            let children: Vec<Child> = read_rows::<ChildRow>(c)?.into_iter().map(Child::from).collect();
            let chws: Vec<Chw> = read_rows::<ChwRow>(w)?.into_iter().map(Chw::from).collect();
            Ok(Some(Registry::new(children, chws)?))
        }
        _ => Err(CliError::Usage("--children and --chws go together".into())),
    }
}

fn measurements(store: &StoreArgs) -> Result<Vec<Measurement>, CliError> {
    match &store.measurements {
        Some(p) => Ok(read_rows::<MeasurementRow>(p)?.into_iter().map(Measurement::from).collect()),
        None => Ok(Vec::new()),
    }
}

fn submit(p: &Platform, ms: &[Measurement]) -> Result<Vec<SyncResponse>, CliError> {
    sync_batches(ms).iter().map(|b| p.submit_batch(&Role::Chw(b.chw_id.clone()), b).map_err(CliError::from)).collect()
}

/// The store a read-only command works on.
fn open_store(env: Env, store: &StoreArgs) -> Result<Platform, CliError> {
    if let Some(log) = &store.log {
        if store.children.is_some() || store.measurements.is_some() {
            return Err(CliError::Usage("read the log alone, or use `ingest` to add files to it".into()));
        }
        return Ok(Platform::open(log, env)?);
    }
    let reg = registry(store)?.ok_or_else(|| CliError::Usage("need --log, or --children and --chws".into()))?;
    let p = Platform::create(RecordLog::in_memory(), reg, env)?;
    submit(&p, &measurements(store)?)?;
    Ok(p)
}

/// `--at`, else the newest measurement, else the epoch: never the wall clock.
fn at_or_latest(p: &Platform, at: Option<DateTime<Utc>>) -> DateTime<Utc> {
    at.or_else(|| p.with_store(|s| s.latest_timestamp())).unwrap_or(DateTime::UNIX_EPOCH)
}

fn ingest(env: Env, a: IngestArgs) -> Result<CommandOutcome, CliError> {
    let log = a.store.log.as_deref().ok_or_else(|| CliError::Usage("ingest needs --log".into()))?;
    let reg = registry(&a.store)?;
    let p = if log.exists() {
        if reg.is_some() {
            return Err(CliError::Usage(format!("{} already holds a registry", log.display())));
        }
        Platform::open(log, env)?
    } else {
        let reg = reg.ok_or_else(|| CliError::Usage("a new log needs --children and --chws".into()))?;
        Platform::create_file(log, reg, env)?
    };
    let responses = submit(&p, &measurements(&a.store)?)?;
    let (mut accepted, mut dup, mut blocked, mut rejected) = (0, 0, 0, 0);
    for o in responses.iter().flat_map(|r| &r.outcomes) {
        match o {
            SyncOutcome::Accepted { .. } => accepted += 1,
            SyncOutcome::Duplicate { .. } => dup += 1,
            SyncOutcome::Rejected { reason: RejectReason::Blocked(_), .. } => blocked += 1,
            SyncOutcome::Rejected { .. } => rejected += 1,
        }
    }
    if let Some(out) = &a.out {
        std::fs::write(out, json_bytes(&responses)).map_err(|e| CliError::io(out, e))?;
    }
    let records = p.health()["log_records"].clone();
    Ok(CommandOutcome::new(format!(
        "{accepted} accepted, {dup} duplicates, {blocked} held for review, {rejected} rejected; log has {records} records"
    ))
    .report(a.out.as_deref())
    .report(Some(log)))
}

#[derive(Debug, Deserialize)]
struct MeasureRow {
    id: String,
    sex: Sex,
    age_days: i64,
    weight: Option<f64>,
    height: Option<f64>,
    height_mode: Option<HeightMode>,
    muac: Option<f64>,
}

fn flag_str(f: &ZFlag) -> String {
    match f {
        ZFlag::OutsideReference(i) => format!("outside_reference:{i}"),
        ZFlag::Implausible(i) => format!("implausible:{i}"),
        ZFlag::NegativeAge => "negative_age".into(),
    }
}

fn assess_row(env: &Env, row: &MeasureRow) -> Result<ZScoreResult, CliError> {
    let birth = NaiveDate::from_ymd_opt(2000, 1, 1).expect("date");
    let at = birth.and_hms_opt(12, 0, 0).expect("time").and_utc() + Duration::days(row.age_days);
    let mode = row.height_mode.unwrap_or(if row.age_days < env.config.assess.recumbent_below_days {
        HeightMode::Recumbent
    } else {
        HeightMode::Standing
    });
    let m = Measurement {
        id: row.id.clone(),
        child_id: row.id.clone(),
        chw_id: String::new(),
        timestamp: at,
        location: LatLon::new(0.0, 0.0),
        weight: row.weight,
        height: row.height,
        height_mode: mode,
        muac: row.muac,
        entry_duration: 0.0,
    };
    m.validate().map_err(|e| CliError::Domain(format!("row {}: {e}", row.id)))?;
    let profile = crate::anthro::ChildProfile { sex: row.sex, birth_date: birth };
    Ok(assess(&m, &profile, &env.reference, &env.cutoffs, &env.config.assess))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

fn zscore(env: Env, a: MeasureArgs, out: &mut dyn Write, classify: bool) -> Result<CommandOutcome, CliError> {
    let single = a.input.is_none();
    let rows = match &a.input {
        Some(p) => read_rows::<MeasureRow>(p)?,
        None => {
            let (Some(sex), Some(age_days)) = (a.sex, a.age_days) else {
                return Err(CliError::Usage("need --input, or --sex and --age-days".into()));
            };
            let height_mode = match a.mode {
                ModeArg::Auto => None,
                ModeArg::Standing => Some(HeightMode::Standing),
                ModeArg::Recumbent => Some(HeightMode::Recumbent),
            };
            vec![MeasureRow {
                id: "1".into(),
                sex,
                age_days,
                weight: a.weight,
                height: a.height,
                height_mode,
                muac: a.muac,
            }]
        }
    };
    let results: Vec<ZScoreResult> = rows.iter().map(|r| assess_row(&env, r)).collect::<Result<_, _>>()?;
    let mut text = String::new();
    if single {
        let r = &results[0];
        if classify {
            let c = r.classification;
            text += &format!(
                "stunting {}\nwasting {}\nunderweight {}\nmuac_band {}\n",
                opt(c.stunting),
                opt(c.wasting),
                opt(c.underweight),
                opt(c.muac_band)
            );
        } else {
            for (name, ind) in [
                ("waz", Indicator::Wfa),
                ("haz", Indicator::Hfa),
                ("whz", Indicator::Wfh),
                ("muacz", Indicator::Muacfa),
            ] {
                text += &format!("{name} {}\n", r.z.get(ind).map_or_else(|| "NA".into(), zfmt));
            }
        }
        if !r.flags.is_empty() {
            text += &format!("flags {}\n", r.flags.iter().map(flag_str).collect::<Vec<_>>().join(";"));
        }
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        let z = |v: Option<f64>| v.map(zfmt).unwrap_or_default();
        let s = |v: Option<String>| v.unwrap_or_default();
        if classify {
            w.write_record(["id", "stunting", "wasting", "underweight", "muac_band", "flags"]).ok();
        } else {
            w.write_record(["id", "waz", "haz", "whz", "muacz", "flags"]).ok();
        }
        for (row, r) in rows.iter().zip(&results) {
            let flags = r.flags.iter().map(flag_str).collect::<Vec<_>>().join(";");
            let c = r.classification;
            let rec = if classify {
                [
                    row.id.clone(),
                    s(c.stunting.map(|x| x.to_string())),
                    s(c.wasting.map(|x| x.to_string())),
                    s(c.underweight.map(|x| x.to_string())),
                    s(c.muac_band.map(|x| x.to_string())),
                    flags,
                ]
            } else {
                [row.id.clone(), z(r.z.waz), z(r.z.haz), z(r.z.whz), z(r.z.muacz), flags]
            };
            w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
        }
        text = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("utf8");
    }
    emit(out, a.out.as_deref(), text.as_bytes())?;
    let flagged = results.iter().filter(|r| !r.flags.is_empty()).count();
    Ok(CommandOutcome::new(format!("{} rows, {flagged} flagged", results.len())).report(a.out.as_deref()))
}

fn class_counts(layer: &HotspotLayer) -> (usize, usize) {
    let hot = layer.class.iter().filter(|c| matches!(c, Some(HotspotClass::Hot95 | HotspotClass::Hot99))).count();
    let cold = layer.class.iter().filter(|c| matches!(c, Some(HotspotClass::Cold95 | HotspotClass::Cold99))).count();
    (hot, cold)
}

fn hotspot(env: Env, a: HotspotArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let cfg = &env.config;
    let radius = a.radius.unwrap_or(cfg.gistar_radius);
    let fdr = a.fdr || cfg.gistar_fdr;
    let (bytes, summary) = if let Some(path) = &a.values {
        if a.layer != LayerKind::Gistar {
            return Err(CliError::Usage("a value matrix only supports the gistar layer".into()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let (rows, cols, values) = parse_matrix(&text).map_err(|e| CliError::parse(path, e))?;
        let grid = GridSpec { rows, cols, ..cfg.grid };
        let layer = HotspotLayer::build(grid, values, radius, fdr, a.at.unwrap_or(DateTime::UNIX_EPOCH))
            .map_err(|e| CliError::Domain(e.to_string()))?;
        let (hot, cold) = class_counts(&layer);
        let bytes = match a.format {
            MapFormat::Geojson => json_bytes(&hotspot_geojson(&layer)),
            MapFormat::Matrix => write_matrix(&grid, &layer.gi_star).into_bytes(),
        };
        (bytes, format!("{rows}x{cols} grid: {hot} hot and {cold} cold cells at p < 0.05"))
    } else {
        let grid = cfg.grid;
        let p = open_store(env, &a.store)?;
        if a.radius.is_some() || a.fdr {
            return Err(CliError::Usage("set gistar.radius and gistar.fdr in the config for store layers".into()));
        }
        let at = at_or_latest(&p, a.at);
        let layers = p.recompute_layers(at)?;
        let layer = &layers.hotspots[&a.indicator];
        let (hot, cold) = class_counts(layer);
        let bytes = match (a.format, a.layer) {
            (MapFormat::Geojson, kind) => json_bytes(&layers.geojson(a.indicator, kind)),
            (MapFormat::Matrix, LayerKind::Gistar) => write_matrix(&grid, &layer.gi_star).into_bytes(),
            (MapFormat::Matrix, LayerKind::Density) => {
                let d: Vec<Option<f64>> = layers.density[&a.indicator].iter().map(|&v| Some(v)).collect();
                write_matrix(&grid, &d).into_bytes()
            }
        };
        (bytes, format!("{} as of {at}: {hot} hot and {cold} cold cells at p < 0.05", a.indicator))
    };
    emit(out, a.out.as_deref(), &bytes)?;
    Ok(CommandOutcome::new(summary).report(a.out.as_deref()))
}

fn coverage(env: Env, a: CoverageArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let grid = env.config.grid;
    let p = open_store(env, &a.store)?;
    let at = at_or_latest(&p, a.at);
    let layers = p.recompute_layers(at)?;
    let bytes = match a.format {
        MapFormat::Geojson => json_bytes(layers.coverage_geojson()),
        MapFormat::Matrix => {
            let mut stale: Vec<Option<f64>> = vec![None; grid.len()];
            for c in &layers.coverage {
                stale[c.cell] = c.staleness;
            }
            write_matrix(&grid, &stale).into_bytes()
        }
    };
    emit(out, a.out.as_deref(), &bytes)?;
    let count = |s: CoverageStatus| layers.coverage.iter().filter(|c| c.status == s).count();
    Ok(CommandOutcome::new(format!(
        "as of {at}: {} measured, {} uncharted cells",
        count(CoverageStatus::Measured),
        count(CoverageStatus::Uncharted)
    ))
    .report(a.out.as_deref()))
}

fn quests(env: Env, a: QuestArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let max = a.max.unwrap_or(env.config.max_quests);
    let p = open_store(env, &a.store)?;
    let at = at_or_latest(&p, a.at);
    p.recompute_layers(at)?;
    let qs = p.get_quests(&Role::Supervisor, Some(&a.chw), max)?;
    emit(out, a.out.as_deref(), &json_bytes(&qs))?;
    Ok(CommandOutcome::new(format!("{} quests for {} as of {at}", qs.len(), a.chw)).report(a.out.as_deref()))
}

fn severity(s: &str) -> Result<AlertSeverity, CliError> {
    serde_json::from_value(Value::from(s.to_ascii_lowercase()))
        .map_err(|_| CliError::Usage(format!("unknown severity {s:?}, expected info, warn or block")))
}

fn screen(env: Env, a: ScreenArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let filter = AlertFilter {
        chw_id: a.chw.clone(),
        kind: None,
        min_severity: a.min_severity.as_deref().map(severity).transpose()?,
    };
    let p = open_store(env, &a.store)?;
    let alerts = p.get_alerts(&Role::Supervisor, &filter)?;
    let mut buf = Vec::new();
    alerts_to_csv(&mut buf, &alerts).map_err(|e| CliError::Io(e.to_string()))?;
    emit(out, a.out.as_deref(), &buf)?;
    let n = |s: AlertSeverity| alerts.iter().filter(|x| x.severity == s).count();
    Ok(CommandOutcome::new(format!(
        "{} alerts: {} block, {} warn, {} info",
        alerts.len(),
        n(AlertSeverity::Block),
        n(AlertSeverity::Warn),
        n(AlertSeverity::Info)
    ))
    .report(a.out.as_deref()))
}

fn efficiency(env: Env, a: EfficiencyArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let p = open_store(env, &a.store)?;
    let from = a.from.unwrap_or(DateTime::<Utc>::MIN_UTC);
    let to = a.to.unwrap_or(DateTime::<Utc>::MAX_UTC);
    let scores = p.get_efficiency(&Role::Supervisor, a.chw.as_deref(), from, to)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["chw_id", "submissions", "accuracy", "speed", "coverage", "composite", "inactive"]).ok();
    for s in &scores {
        w.write_record([
            s.chw_id.clone(),
            s.submissions.to_string(),
            sig6(s.accuracy),
            sig6(s.speed),
            sig6(s.coverage),
            sig6(s.composite),
            s.inactive.to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    emit(out, a.out.as_deref(), &bytes)?;
    let active = scores.iter().filter(|s| !s.inactive).count();
    Ok(CommandOutcome::new(format!("{} CHWs, {active} active in the period", scores.len())).report(a.out.as_deref()))
}

fn trial_stats(a: TrialArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let records: Vec<TrialRecord> = read_rows(&a.input)?;
    let stats = t_tests(&records).map_err(|e| CliError::Domain(e.to_string()))?;
    out.write_all(format_table(&stats).as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(p) = &a.out {
        std::fs::write(p, stats_csv(&stats)).map_err(|e| CliError::io(p, e))?;
    }
    let summary = match stats.between(Phase::Post) {
        Some(b) => format!(
            "post-test IG - CG = {}, p = {}",
            sig6(b.test.mean_diff()),
            b.test.p().map_or_else(|| "NA".into(), sig6)
        ),
        None => "no post-test comparison".into(),
    };
    Ok(CommandOutcome::new(summary).report(a.out.as_deref()))
}

fn power(a: PowerArgs, out: &mut dyn Write) -> Result<CommandOutcome, CliError> {
    let params = PowerParams { d: a.d, alpha: a.alpha, power: a.power, tails: a.tails, allocation_ratio: a.ratio };
    let n = sample_size(&params).map_err(|e| CliError::Domain(e.to_string()))?;
    let line = if n.n1 == n.n2 { format!("{}\n", n.n1) } else { format!("{} {}\n", n.n1, n.n2) };
    out.write_all(line.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    let approx = normal_approx_sample_size(&params).map(|v| v.to_string()).unwrap_or_else(|_| "NA".into());
    Ok(CommandOutcome::new(format!(
        "n1 = {}, n2 = {}, achieved power {}; normal approximation {approx}",
        n.n1,
        n.n2,
        sig6(n.achieved_power)
    )))
}

fn simulate(cfg_path: Option<&Path>, a: SimulateArgs) -> Result<CommandOutcome, CliError> {
    let mut cfg = match cfg_path {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let pop = generate_population(&cfg);
    let sim = simulate_measurements(&cfg, &pop, a.days);
    let trial = simulate_trial(&cfg);
    write_dataset(&a.out, &pop, &sim, &trial).map_err(|e| CliError::io(&a.out, e))?;
    let g = cfg.grid;
    let conf = format!(
        "# grid matching the simulated cohort\ngrid.origin_lat = {}\ngrid.origin_lon = {}\ngrid.cell_size_m = {}\ngrid.rows = {}\ngrid.cols = {}\n",
        g.origin.lat, g.origin.lon, g.cell_size, g.rows, g.cols
    );
    let conf_path = a.out.join("anthroquest.conf");
    std::fs::write(&conf_path, conf).map_err(|e| CliError::io(&conf_path, e))?;
    let planted = sim.truth.digit_chws.len()
        + sim.truth.duplicate_groups.len()
        + sim.truth.height_drops.len()
        + sim.truth.extreme_z.len();
    let mut outcome = CommandOutcome::new(format!(
        "seed {}: {} children, {} CHWs, {} measurements over {} days, {planted} planted violations, {} trial scores",
        cfg.seed,
        cfg.n_children,
        cfg.n_chws,
        sim.measurements.len(),
        a.days,
        trial.len()
    ));
    for f in ["children.csv", "chws.csv", "measurements.csv", "trial.csv", "truth.json", "anthroquest.conf"] {
        outcome.reports.push(a.out.join(f));
    }
    Ok(outcome)
}

fn serve(env: Env, a: ServeArgs) -> Result<CommandOutcome, CliError> {
    let log = a.store.log.as_deref().ok_or_else(|| CliError::Usage("serve needs --log".into()))?;
    if a.store.measurements.is_some() {
        return Err(CliError::Usage("use `ingest` to load measurement files".into()));
    }
    if env.config.tokens.is_empty() {
        eprintln!("warning: no token.* entries in the config; every authenticated route will answer 401");
    }
    let p = if log.exists() {
        Platform::open(log, env)?
    } else {
        let reg = registry(&a.store)?.ok_or_else(|| CliError::Usage("a new log needs --children and --chws".into()))?;
        Platform::create_file(log, reg, env)?
    };
    let rt =
        tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| CliError::Io(e.to_string()))?;
    let refresh = std::time::Duration::from_secs(a.refresh_secs.max(1));
    eprintln!("listening on http://{}", a.addr);
    rt.block_on(crate::platform::http::serve(Arc::new(p), a.addr, refresh)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(CommandOutcome::new("stopped"))
}
