use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{GeoError, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HotspotClass {
    Cold99,
    Cold95,
    Cold90,
    Neutral,
    Hot90,
    Hot95,
    Hot99,
}

impl HotspotClass {
    pub fn from_stat(gi: f64, p: f64) -> Self {
        let hot = gi > 0.0;
        match (p, gi == 0.0) {
            (_, true) => HotspotClass::Neutral,
            (p, _) if p < 0.01 => {
                if hot {
                    HotspotClass::Hot99
                } else {
                    HotspotClass::Cold99
                }
            }
            (p, _) if p < 0.05 => {
                if hot {
                    HotspotClass::Hot95
                } else {
                    HotspotClass::Cold95
                }
            }
            (p, _) if p < 0.10 => {
                if hot {
                    HotspotClass::Hot90
                } else {
                    HotspotClass::Cold90
                }
            }
            _ => HotspotClass::Neutral,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HotspotClass::Cold99 => "cold99",
            HotspotClass::Cold95 => "cold95",
            HotspotClass::Cold90 => "cold90",
            HotspotClass::Neutral => "neutral",
            HotspotClass::Hot90 => "hot90",
            HotspotClass::Hot95 => "hot95",
            HotspotClass::Hot99 => "hot99",
        }
    }
}

/// Gi* z-scores and two-sided normal p-values per cell; `None` for cells
/// without a value.
#[derive(Debug, Clone, PartialEq)]
pub struct GiStar {
    pub z: Vec<Option<f64>>,
    pub p: Vec<Option<f64>>,
}

fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Getis-Ord Gi* with binary weights over the square neighbourhood of
/// Chebyshev `radius` (self included). A constant field yields 0 everywhere.
pub fn gi_star(values: &[f64], spec: &GridSpec, radius: usize) -> Result<GiStar, GeoError> {
    let masked: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    gi_star_masked(&masked, spec, radius)
}

/// As [`gi_star`], skipping cells with no value: they neither contribute to
/// the global moments nor to any neighbourhood.
pub fn gi_star_masked(values: &[Option<f64>], spec: &GridSpec, radius: usize) -> Result<GiStar, GeoError> {
    if values.len() != spec.len() {
        return Err(GeoError::Domain(format!("field has {} cells, grid has {}", values.len(), spec.len())));
    }
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return Err(GeoError::Domain(format!("Gi* needs at least 2 valued cells, got {n}")));
    }
    let nf = n as f64;
    let mean = present.iter().sum::<f64>() / nf;
    let var = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let sd = var.sqrt();
    // a field equal to its mean up to rounding counts as constant
    let scale = present.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let constant = sd <= 1e-12 * scale.max(f64::MIN_POSITIVE);

    let r = radius as isize;
    let mut z = vec![None; values.len()];
    let mut p = vec![None; values.len()];
    for cell in 0..spec.len() {
        if values[cell].is_none() {
            continue;
        }
        let (row, col) = spec.row_col(cell);
        let mut sum_wx = 0.0;
        let mut sum_w = 0.0;
        for dr in -r..=r {
            for dc in -r..=r {
                let (rr, cc) = (row as isize + dr, col as isize + dc);
                if rr < 0 || cc < 0 || rr >= spec.rows as isize || cc >= spec.cols as isize {
                    continue;
                }
                if let Some(x) = values[spec.index(rr as usize, cc as usize)] {
                    sum_wx += x;
                    sum_w += 1.0;
                }
            }
        }
        // binary weights: sum of w^2 equals sum of w
        let spread = (nf * sum_w - sum_w * sum_w) / (nf - 1.0);
        let gi = if constant || spread <= 0.0 { 0.0 } else { (sum_wx - mean * sum_w) / (sd * spread.sqrt()) };
        z[cell] = Some(gi);
        p[cell] = Some(two_sided_p(gi));
    }
    Ok(GiStar { z, p })
}

/// Benjamini-Hochberg adjusted p-values; `None` entries pass through.
pub fn benjamini_hochberg(p: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i].is_some()).collect();
    idx.sort_by(|&a, &b| p[a].unwrap().total_cmp(&p[b].unwrap()).then(a.cmp(&b)));
    let m = idx.len() as f64;
    let mut out = vec![None; p.len()];
    let mut running = 1.0f64;
    for (rank, &i) in idx.iter().enumerate().rev() {
        let adj = (p[i].unwrap() * m / (rank as f64 + 1.0)).min(1.0);
        running = running.min(adj);
        out[i] = Some(running);
    }
    out
}

/// One published hotspot layer: value, Gi*, p-value and class per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotLayer {
    pub spec: GridSpec,
    pub value: Vec<Option<f64>>,
    pub gi_star: Vec<Option<f64>>,
    pub p_value: Vec<Option<f64>>,
    pub class: Vec<Option<HotspotClass>>,
    pub generated_at: DateTime<Utc>,
}

impl HotspotLayer {
    /// Builds the layer; with `fdr` the reported p-values are BH-adjusted and
    /// the classes follow them. Fewer than two valued cells give an all-empty layer.
    pub fn build(
        spec: GridSpec,
        value: Vec<Option<f64>>,
        radius: usize,
        fdr: bool,
        generated_at: DateTime<Utc>,
    ) -> Result<Self, GeoError> {
        let n = value.iter().flatten().count();
        if n < 2 {
            let empty = vec![None; spec.len()];
            return Ok(Self {
                spec,
                value,
                gi_star: empty.clone(),
                p_value: empty,
                class: vec![None; spec.len()],
                generated_at,
            });
        }
        let GiStar { z, p } = gi_star_masked(&value, &spec, radius)?;
        let p = if fdr { benjamini_hochberg(&p) } else { p };
        let class = z.iter().zip(&p).map(|(z, p)| Some(HotspotClass::from_stat((*z)?, (*p)?))).collect();
        Ok(Self { spec, value, gi_star: z, p_value: p, class, generated_at })
    }
}
