use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ttest::{mean, variance};
use super::{cohens_d, paired_t, welch_t, AnalyticsError, TTest};
use crate::fmt::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "CG")]
    Control,
    #[serde(rename = "IG")]
    Intervention,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Control, Group::Intervention];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Control => "CG",
            Group::Intervention => "IG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Baseline,
    Post,
    Delayed,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Baseline, Phase::Post, Phase::Delayed];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Baseline => "baseline",
            Phase::Post => "post",
            Phase::Delayed => "delayed",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Phase::Baseline => "Baseline",
            Phase::Post => "Post-test",
            Phase::Delayed => "Delayed",
        }
    }
}

/// A row of the trial input `chw_id,group,phase,score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub chw_id: String,
    pub group: Group,
    pub phase: Phase,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `None` when n < 2.
    pub sd: Option<f64>,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
        Some(Summary { n, mean: mean(&s), sd: (n > 1).then(|| variance(&s).sqrt()), median, min: s[0], max: s[n - 1] })
    }

    /// Standard error of the mean.
    pub fn se(&self) -> Option<f64> {
        self.sd.map(|sd| sd / (self.n as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub group: Group,
    pub phase: Phase,
    pub summary: Summary,
}

/// IG versus CG in one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetweenGroup {
    pub phase: Phase,
    pub test: TTest,
    pub cohens_d: Option<f64>,
}

/// Paired comparison of two phases within one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinGroup {
    pub group: Group,
    pub from: Phase,
    pub to: Phase,
    pub test: TTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub cells: Vec<CellSummary>,
    pub between: Vec<BetweenGroup>,
    pub within: Vec<WithinGroup>,
}

impl TrialStats {
    pub fn cell(&self, group: Group, phase: Phase) -> Option<&Summary> {
        self.cells.iter().find(|c| c.group == group && c.phase == phase).map(|c| &c.summary)
    }

    pub fn between(&self, phase: Phase) -> Option<&BetweenGroup> {
        self.between.iter().find(|b| b.phase == phase)
    }
}

type Cells = BTreeMap<(Group, Phase), BTreeMap<String, f64>>;

fn index(records: &[TrialRecord]) -> Result<Cells, AnalyticsError> {
    let mut cells: Cells = BTreeMap::new();
    for r in records {
        if !r.score.is_finite() {
            return Err(AnalyticsError::Domain(format!("non-finite score for {}", r.chw_id)));
        }
        let cell = cells.entry((r.group, r.phase)).or_default();
        if cell.insert(r.chw_id.clone(), r.score).is_some() {
            return Err(AnalyticsError::Domain(format!(
                "duplicate score for {} in {} {}",
                r.chw_id,
                r.group.as_str(),
                r.phase.as_str()
            )));
        }
    }
    Ok(cells)
}

/// Summaries per group and phase, Welch tests between groups in each phase
/// and paired tests across phases within each group.
///
/// Comparisons whose cells are both empty are skipped; any attempted test
/// with fewer than 2 observations, or paired phases with different CHWs, is
/// a domain error.
pub fn t_tests(records: &[TrialRecord]) -> Result<TrialStats, AnalyticsError> {
    let cells = index(records)?;
    let values = |g: Group, p: Phase| -> Vec<f64> {
        cells.get(&(g, p)).map(|m| m.values().copied().collect()).unwrap_or_default()
    };

    let mut out = TrialStats { cells: Vec::new(), between: Vec::new(), within: Vec::new() };
    for g in Group::ALL {
        for p in Phase::ALL {
            if let Some(summary) = Summary::of(&values(g, p)) {
                out.cells.push(CellSummary { group: g, phase: p, summary });
            }
        }
    }
    for p in Phase::ALL {
        let (cg, ig) = (values(Group::Control, p), values(Group::Intervention, p));
        if cg.is_empty() && ig.is_empty() {
            continue;
        }
        let test = welch_t(&ig, &cg)?;
        let (si, sc) = (Summary::of(&ig).unwrap(), Summary::of(&cg).unwrap());
        let d = match cohens_d(si.mean, si.sd.unwrap(), si.n, sc.mean, sc.sd.unwrap(), sc.n) {
            Ok(d) => Some(d),
            Err(AnalyticsError::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        out.between.push(BetweenGroup { phase: p, test, cohens_d: d });
    }
    for g in Group::ALL {
        for (a, b) in [(Phase::Baseline, Phase::Post), (Phase::Baseline, Phase::Delayed), (Phase::Post, Phase::Delayed)]
        {
            let (Some(ma), Some(mb)) = (cells.get(&(g, a)), cells.get(&(g, b))) else {
                continue;
            };
            if !ma.keys().eq(mb.keys()) {
                return Err(AnalyticsError::Domain(format!(
                    "paired {} {} vs {}: CHW sets differ ({} vs {})",
                    g.as_str(),
                    a.as_str(),
                    b.as_str(),
                    ma.len(),
                    mb.len()
                )));
            }
            let before: Vec<f64> = ma.values().copied().collect();
            let after: Vec<f64> = mb.values().copied().collect();
            out.within.push(WithinGroup { group: g, from: a, to: b, test: paired_t(&before, &after)? });
        }
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), sig6)
}

/// Two-decimal table of means (SD) and medians (min-max) per phase and group.
pub fn format_table(stats: &TrialStats) -> String {
    let n_of =
        |g| Phase::ALL.iter().find_map(|p| stats.cell(g, *p)).map_or_else(|| "0".to_string(), |s| s.n.to_string());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} | {:^39} | {:^39}",
        "",
        format!("Control Group (CG) (n={})", n_of(Group::Control)),
        format!("Intervention Group (IG) (n={})", n_of(Group::Intervention))
    );
    let _ = writeln!(
        s,
        "{:<12} | {:<17}{:<22} | {:<17}{:<22}",
        "Test phase", "Mean (SD)", "Median (min-max)", "Mean (SD)", "Median (min-max)"
    );
    let _ = writeln!(s, "{}", "-".repeat(97));
    for p in Phase::ALL {
        let col = |g| match stats.cell(g, p) {
            Some(c) => (
                format!("{:.2} ({})", c.mean, c.sd.map_or("NA".into(), |v| format!("{v:.2}"))),
                format!("{:.2} ({:.2}-{:.2})", c.median, c.min, c.max),
            ),
            None => ("-".into(), "-".into()),
        };
        let (cm, cmed) = col(Group::Control);
        let (im, imed) = col(Group::Intervention);
        let _ = writeln!(s, "{:<12} | {:<17}{:<22} | {:<17}{:<22}", p.label(), cm, cmed, im, imed);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Between groups (IG - CG, Welch):");
    for b in &stats.between {
        let _ = writeln!(
            s,
            "  {:<10} diff={} t={} df={} p={} d={}",
            b.phase.as_str(),
            sig6(b.test.mean_diff()),
            opt(b.test.t()),
            sig6(b.test.df()),
            opt(b.test.p()),
            opt(b.cohens_d)
        );
    }
    let _ = writeln!(s, "Within groups (paired):");
    for w in &stats.within {
        let _ = writeln!(
            s,
            "  {} {:<8} -> {:<8} diff={} t={} df={} p={}",
            w.group.as_str(),
            w.from.as_str(),
            w.to.as_str(),
            sig6(w.test.mean_diff()),
            opt(w.test.t()),
            sig6(w.test.df()),
            opt(w.test.p())
        );
    }
    s
}

/// Machine-readable report, one row per statistic.
pub fn stats_csv(stats: &TrialStats) -> String {
    let mut s = String::from("section,group,phase,n,mean,sd,median,min,max,t,df,p,cohens_d\n");
    for c in &stats.cells {
        let m = &c.summary;
        let _ = writeln!(
            s,
            "summary,{},{},{},{},{},{},{},{},,,,",
            c.group.as_str(),
            c.phase.as_str(),
            m.n,
            sig6(m.mean),
            opt(m.sd),
            sig6(m.median),
            sig6(m.min),
            sig6(m.max)
        );
    }
    for b in &stats.between {
        let _ = writeln!(
            s,
            "between,IG-CG,{},,{},,,,,{},{},{},{}",
            b.phase.as_str(),
            sig6(b.test.mean_diff()),
            opt(b.test.t()),
            sig6(b.test.df()),
            opt(b.test.p()),
            opt(b.cohens_d)
        );
    }
    for w in &stats.within {
        let _ = writeln!(
            s,
            "within,{},{}-{},,{},,,,,{},{},{},",
            w.group.as_str(),
            w.from.as_str(),
            w.to.as_str(),
            sig6(w.test.mean_diff()),
            opt(w.test.t()),
            sig6(w.test.df()),
            opt(w.test.p())
        );
    }
    s
}
