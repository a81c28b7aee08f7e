//! Anomaly scores from a trained model and threshold/ranking metrics.
//!
//! The default score of a point is `1 - D_xx(x, G(E(x)))`: the cycle
//! discriminator's doubt that the reconstruction pairs with the input.
//! The feature-matching variant compares the discriminator's pre-logit
//! features of (x, x) and (x, G(E(x))) in l2 norm. Higher always means more
//! anomalous.

use serde::{Deserialize, Serialize};

use crate::dist::Grid2D;
use crate::error::{Error, Result};
use crate::gan::RCGANModel;
use crate::tensor::Tensor;

/// Scores paired with binary labels (1 = anomalous, 0 = normal), in input
/// order. The order matters: ties in score are broken by input position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoreReport {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<ScoreReport> {
        if scores.is_empty() || scores.len() != labels.len() {
            return Err(Error::Shape(format!(
                "score report needs matching non-empty scores/labels, got {}/{}",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("score".into()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Config("labels must be 0 or 1".into()));
        }
        Ok(ScoreReport { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn n_anomalous(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Which score a trained model assigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// `1 - D_xx(x, G(E(x)))`.
    DiscXx,
    /// l2 distance between pre-logit D_xx features of (x, x) and (x, G(E(x))).
    FeatureMatch,
}

impl ScoreKind {
    pub fn parse(s: &str) -> Result<ScoreKind> {
        match s {
            "dxx" => Ok(ScoreKind::DiscXx),
            "fm" => Ok(ScoreKind::FeatureMatch),
            other => Err(Error::Config(format!(
                "unknown score {other:?} (expected dxx or fm)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::DiscXx => "dxx",
            ScoreKind::FeatureMatch => "fm",
        }
    }
}

/// Anomaly scores for a batch of points, one per row of `x`.
pub fn score(model: &RCGANModel, x: &Tensor, kind: ScoreKind) -> Result<Vec<f64>> {
    match kind {
        ScoreKind::DiscXx => score_dxx(model, x),
        ScoreKind::FeatureMatch => score_feature_match(model, x),
    }
}

/// `1 - D_xx(x, G(E(x)))` per row; in (0, 1) by the sigmoid clamp.
pub fn score_dxx(model: &RCGANModel, x: &Tensor) -> Result<Vec<f64>> {
    let recon = model.reconstruct(x)?;
    let pair = Tensor::concat_cols(x, &recon)?;
    let d = model.disc_xx().forward(&pair)?;
    Ok(d.output().data().iter().map(|v| 1.0 - v).collect())
}

/// Feature-matching score: per-row l2 norm of the difference between the
/// cycle discriminator's pre-logit features on (x, x) and on (x, G(E(x))).
pub fn score_feature_match(model: &RCGANModel, x: &Tensor) -> Result<Vec<f64>> {
    let recon = model.reconstruct(x)?;
    let real = model.disc_xx().forward(&Tensor::concat_cols(x, x)?)?;
    let fake = model.disc_xx().forward(&Tensor::concat_cols(x, &recon)?)?;
    let fr = real.pre_logit_features();
    let ff = fake.pre_logit_features();
    let width = fr.ncols();
    let mut out = Vec::with_capacity(x.nrows());
    for r in 0..x.nrows() {
        let a = fr.row(r);
        let b = ff.row(r);
        let mut acc = 0.0;
        for i in 0..width {
            let d = a[i] - b[i];
            acc += d * d;
        }
        out.push(acc.sqrt());
    }
    Ok(out)
}

/// Precision/recall/F1 when the top ceil(rho * n) scores are flagged
/// anomalous. Ties and ranking follow descending score with input order as
/// the tiebreaker (stable sort).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioMetrics {
    pub rho: f64,
    pub n_flagged: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Row indices ordered by descending score; equal scores keep input order.
pub fn ranked_indices(report: &ScoreReport) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..report.len()).collect();
    idx.sort_by(|&a, &b| report.scores[b].total_cmp(&report.scores[a]));
    idx
}

/// Number of rows flagged at ratio `rho`: ceil(rho * n), at least 1.
pub fn flag_count(n: usize, rho: f64) -> Result<usize> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Config(format!("ratio must be in (0, 1], got {rho}")));
    }
    Ok(((rho * n as f64).ceil() as usize).clamp(1, n))
}

pub fn metrics_at_ratio(report: &ScoreReport, rho: f64) -> Result<RatioMetrics> {
    let n = report.len();
    let k = flag_count(n, rho)?;
    let positives = report.n_anomalous();
    if positives == 0 || positives == n {
        return Err(Error::Infeasible(format!(
            "threshold metrics need both classes, got {positives}/{n} anomalous"
        )));
    }
    let idx = ranked_indices(report);
    let tp = idx[..k].iter().filter(|&&i| report.labels[i] == 1).count();
    let precision = tp as f64 / k as f64;
    let recall = tp as f64 / positives as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(RatioMetrics {
        rho,
        n_flagged: k,
        precision,
        recall,
        f1,
    })
}

/// Area under the ROC curve via the rank statistic: average tied ranks, so a
/// tie between classes counts one half. Needs both classes present.
pub fn auroc(report: &ScoreReport) -> Result<f64> {
    let n = report.len();
    let pos = report.n_anomalous();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Infeasible(format!(
            "auroc needs both classes, got {pos} anomalous of {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| report.scores[a].total_cmp(&report.scores[b]));
    // Average 1-based rank within each tied score group.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && report.scores[idx[j]] == report.scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1 ..= j
        for &k in &idx[i..j] {
            if report.labels[k] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Threshold metrics and AUROC in one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub rho: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auroc: f64,
}

pub fn summarize(report: &ScoreReport, rho: f64) -> Result<MetricSummary> {
    let m = metrics_at_ratio(report, rho)?;
    let a = auroc(report)?;
    Ok(MetricSummary {
        rho,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        auroc: a,
    })
}

/// Which discriminator map to render over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeatmapKind {
    /// D_xz(x, E(x)) per cell center.
    DiscXz,
    /// D_xx(x, G(E(x))) per cell center.
    DiscXx,
}

impl HeatmapKind {
    pub fn parse(s: &str) -> Result<HeatmapKind> {
        match s {
            "dxz" => Ok(HeatmapKind::DiscXz),
            "dxx" => Ok(HeatmapKind::DiscXx),
            other => Err(Error::Config(format!(
                "unknown heatmap {other:?} (expected dxz or dxx)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeatmapKind::DiscXz => "dxz",
            HeatmapKind::DiscXx => "dxx",
        }
    }
}

/// Discriminator probabilities over all cell centers of a 2-D grid, in grid
/// index order. The model must have 2-D inputs.
pub fn heatmap(model: &RCGANModel, grid: &Grid2D, kind: HeatmapKind) -> Result<Vec<f64>> {
    if model.x_dim() != 2 {
        return Err(Error::Shape(format!(
            "heatmaps need a 2-D model, got x dim {}",
            model.x_dim()
        )));
    }
    let cells = grid.centers();
    let vals = match kind {
        HeatmapKind::DiscXz => {
            let z = model.encode(&cells)?;
            let pair = Tensor::concat_cols(&cells, &z)?;
            model.disc_xz().forward(&pair)?.output().data().to_vec()
        }
        HeatmapKind::DiscXx => {
            let recon = model.reconstruct(&cells)?;
            let pair = Tensor::concat_cols(&cells, &recon)?;
            model.disc_xx().forward(&pair)?.output().data().to_vec()
        }
    };
    Ok(vals)
}
