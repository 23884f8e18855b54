//! Estimators over an outcome table: variance decomposition by order,
//! first-player advantage, blank and S position tables, per-tile
//! regressions and ruleset comparison.
//!
//! Quantiles use linear interpolation between order statistics
//! (`h = (n-1)p`). Deciles are positions 1-10, 11-20, ..., with every
//! position past 90 in the last decile.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::harness::{GameOutcome, OutcomeTable};
use crate::tiles::{tile_char, BLANK, TILE_KINDS};

pub const DECILES: usize = 10;
pub const SD_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("unbalanced table: orders have between {min} and {max} games; keep only complete orders (or trim each order to {min} replicates) before decomposing")]
    Unbalanced { min: usize, max: usize },
    #[error("need at least {needed} {what}, found {found}")]
    TooFew { what: &'static str, needed: usize, found: usize },
    #[error("{0} is undefined for this table")]
    Undefined(String),
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::Unbalanced { .. } => "unbalanced_table",
            AnalysisError::TooFew { .. } => "insufficient_data",
            AnalysisError::Undefined(_) => "undefined_estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    P1Score,
    Diff,
}

impl Metric {
    pub fn of(self, o: &GameOutcome) -> f64 {
        match self {
            Metric::P1Score => o.p1_score as f64,
            Metric::Diff => o.diff as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::P1Score => "p1_score",
            Metric::Diff => "diff",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "p1_score" | "p1" | "score" => Some(Metric::P1Score),
            "diff" => Some(Metric::Diff),
            _ => None,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Metric values grouped by order, in order-id order.
pub fn grouped(table: &OutcomeTable, metric: Metric) -> Vec<Vec<f64>> {
    table.by_order().into_values().map(|games| games.iter().map(|g| metric.of(g)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub metric: String,
    pub n_orders: usize,
    pub replicates: usize,
    pub ss_total: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub ms_between: f64,
    pub ms_within: f64,
    /// Variance of the order means over variance of all values (population
    /// variances, so this equals SS_between / SS_total).
    pub between_fraction_naive: Option<f64>,
    /// `max(0, (MSB - MSW) / R)`.
    pub between_component: f64,
    pub within_component: f64,
    pub between_fraction_anova: Option<f64>,
}

impl DecompositionResult {
    /// |SS_total - (SS_between + SS_within)| / SS_total, or the absolute gap
    /// when SS_total is zero.
    pub fn identity_error(&self) -> f64 {
        let gap = (self.ss_total - self.ss_between - self.ss_within).abs();
        if self.ss_total > 0.0 {
            gap / self.ss_total
        } else {
            gap
        }
    }
}

/// One-way ANOVA with the group as the factor. Groups must be equal-sized.
pub fn decompose(groups: &[Vec<f64>], metric: &str) -> Result<DecompositionResult, AnalysisError> {
    if groups.len() < 2 {
        return Err(AnalysisError::TooFew { what: "orders", needed: 2, found: groups.len() });
    }
    let min = groups.iter().map(Vec::len).min().unwrap_or(0);
    let max = groups.iter().map(Vec::len).max().unwrap_or(0);
    if min != max {
        return Err(AnalysisError::Unbalanced { min, max });
    }
    if min < 2 {
        return Err(AnalysisError::TooFew { what: "replicates per order", needed: 2, found: min });
    }
    let (g, r) = (groups.len(), min);
    let n = (g * r) as f64;
    let grand = groups.iter().flatten().sum::<f64>() / n;
    let mut ss_total = 0.0;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for group in groups {
        let m = mean(group);
        ss_between += r as f64 * (m - grand).powi(2);
        for &x in group {
            ss_total += (x - grand).powi(2);
            ss_within += (x - m).powi(2);
        }
    }
    let ms_between = ss_between / (g - 1) as f64;
    let ms_within = ss_within / (g * (r - 1)) as f64;
    let between_component = ((ms_between - ms_within) / r as f64).max(0.0);
    let component_total = between_component + ms_within;
    Ok(DecompositionResult {
        metric: metric.to_string(),
        n_orders: g,
        replicates: r,
        ss_total,
        ss_between,
        ss_within,
        ms_between,
        ms_within,
        between_fraction_naive: (ss_total > 0.0).then(|| (ss_between / ss_total).clamp(0.0, 1.0)),
        between_component,
        within_component: ms_within,
        between_fraction_anova: (component_total > 0.0).then(|| between_component / component_total),
    })
}

pub fn variance_decomposition(table: &OutcomeTable, metric: Metric) -> Result<DecompositionResult, AnalysisError> {
    decompose(&grouped(table, metric), metric.name())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullFractions {
    pub permutations: usize,
    pub mean: f64,
    pub q95: f64,
    pub max: f64,
}

/// Naive between-order fraction after shuffling the order labels.
pub fn null_between_fraction(
    groups: &[Vec<f64>],
    permutations: usize,
    seed: u64,
) -> Result<NullFractions, AnalysisError> {
    decompose(groups, "null")?;
    let r = groups[0].len();
    let mut values: Vec<f64> = groups.iter().flatten().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fractions = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        values.shuffle(&mut rng);
        let shuffled: Vec<Vec<f64>> = values.chunks(r).map(<[f64]>::to_vec).collect();
        let d = decompose(&shuffled, "null")?;
        fractions.push(d.between_fraction_naive.unwrap_or(0.0));
    }
    if fractions.is_empty() {
        return Err(AnalysisError::TooFew { what: "permutations", needed: 1, found: 0 });
    }
    fractions.sort_by(f64::total_cmp);
    Ok(NullFractions {
        permutations,
        mean: mean(&fractions),
        q95: quantile(&fractions, 0.95),
        max: *fractions.last().expect("non-empty"),
    })
}

/// Linear interpolation between order statistics of sorted `xs`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Advantage {
    pub games: usize,
    pub clusters: usize,
    pub mean_diff: f64,
    /// Cluster-robust (by order) standard error.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean of grouped values with a cluster-robust 95% interval on G-1 degrees
/// of freedom.
pub fn clustered_mean(groups: &[Vec<f64>]) -> Result<Advantage, AnalysisError> {
    let n: usize = groups.iter().map(Vec::len).sum();
    if n < 2 {
        return Err(AnalysisError::TooFew { what: "games", needed: 2, found: n });
    }
    if groups.len() < 2 {
        return Err(AnalysisError::TooFew { what: "orders", needed: 2, found: groups.len() });
    }
    let m = groups.iter().flatten().sum::<f64>() / n as f64;
    let g = groups.len() as f64;
    let meat: f64 = groups.iter().map(|grp| grp.iter().map(|x| x - m).sum::<f64>().powi(2)).sum();
    let se = (g / (g - 1.0) * meat).sqrt() / n as f64;
    let t = StudentsT::new(0.0, 1.0, g - 1.0).expect("valid t").inverse_cdf(0.975);
    Ok(Advantage {
        games: n,
        clusters: groups.len(),
        mean_diff: m,
        std_error: se,
        ci_low: m - t * se,
        ci_high: m + t * se,
    })
}

pub fn first_player_advantage(table: &OutcomeTable) -> Result<Advantage, AnalysisError> {
    clustered_mean(&grouped(table, Metric::Diff))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdQuantiles {
    pub metric: String,
    pub orders: usize,
    pub probabilities: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-order standard deviations, ascending.
    pub sds: Vec<f64>,
}

pub fn within_sd_quantiles(table: &OutcomeTable, metric: Metric) -> Result<SdQuantiles, AnalysisError> {
    let groups = grouped(table, metric);
    let mut sds = Vec::with_capacity(groups.len());
    for grp in &groups {
        if grp.len() < 2 {
            return Err(AnalysisError::TooFew { what: "replicates per order", needed: 2, found: grp.len() });
        }
        let m = mean(grp);
        sds.push((grp.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (grp.len() - 1) as f64).sqrt());
    }
    if sds.is_empty() {
        return Err(AnalysisError::TooFew { what: "orders", needed: 1, found: 0 });
    }
    sds.sort_by(f64::total_cmp);
    Ok(SdQuantiles {
        metric: metric.name().into(),
        orders: sds.len(),
        probabilities: SD_QUANTILES.to_vec(),
        values: SD_QUANTILES.iter().map(|&p| quantile(&sds, p)).collect(),
        sds,
    })
}

/// Fixed-width histogram: `(low, high, count)` for bins `[low, high)`.
pub fn histogram(values: &[f64], bin_width: f64) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bin_width.is_nan() || bin_width <= 0.0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = (lo / bin_width).floor() as i64;
    let last = (hi / bin_width).floor() as i64;
    let mut counts = vec![0usize; (last - first + 1) as usize];
    for &v in values {
        counts[((v / bin_width).floor() as i64 - first) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let b = (first + i as i64) as f64 * bin_width;
            (b, b + bin_width, c)
        })
        .collect()
}

/// Decile (0-9) of a 1-based position.
pub fn decile(position: u16) -> usize {
    ((position.max(1) as usize - 1) / 10).min(DECILES - 1)
}

fn front_half(d: usize) -> bool {
    d < DECILES / 2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileGrid {
    /// Games in each (decile of one blank, decile of the other) cell;
    /// symmetric.
    pub counts: [[usize; DECILES]; DECILES],
    pub means: [[Option<f64>; DECILES]; DECILES],
    pub min_count: usize,
}

impl DecileGrid {
    pub fn is_masked(&self, a: usize, b: usize) -> bool {
        self.counts[a][b] < self.min_count
    }

    /// Mean with masked cells removed.
    pub fn shown(&self, a: usize, b: usize) -> Option<f64> {
        if self.is_masked(a, b) {
            None
        } else {
            self.means[a][b]
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("blank_decile,other_decile,games,mean_p1_score,masked\n");
        for a in 0..DECILES {
            for b in 0..DECILES {
                let m = self.means[a][b].map(|v| format!("{v:.4}")).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{},{}", a + 1, b + 1, self.counts[a][b], m, self.is_masked(a, b));
            }
        }
        s
    }
}

fn blank_deciles(o: &GameOutcome) -> Option<(usize, usize)> {
    let [a, b] = o.blank_positions;
    (a > 0 && b > 0).then(|| (decile(a), decile(b)))
}

/// Mean p1 score by the deciles of the two blanks, symmetrized so that
/// each game lands in both (a, b) and (b, a).
pub fn blank_decile_table(table: &OutcomeTable, min_count: usize) -> DecileGrid {
    let mut sums = [[0.0f64; DECILES]; DECILES];
    let mut counts = [[0usize; DECILES]; DECILES];
    for o in &table.outcomes {
        let Some((a, b)) = blank_deciles(o) else { continue };
        sums[a][b] += o.p1_score as f64;
        counts[a][b] += 1;
        if a != b {
            sums[b][a] += o.p1_score as f64;
            counts[b][a] += 1;
        }
    }
    let mut means = [[None; DECILES]; DECILES];
    for a in 0..DECILES {
        for b in 0..DECILES {
            if counts[a][b] > 0 {
                means[a][b] = Some(sums[a][b] / counts[a][b] as f64);
            }
        }
    }
    DecileGrid { counts, means, min_count }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlankContrast {
    /// One blank in the front half, the other in the back half.
    pub split_games: usize,
    pub split_mean: f64,
    /// Both blanks in the back half.
    pub back_games: usize,
    pub back_mean: f64,
    pub contrast: f64,
    pub std_error: f64,
}

/// Value to player 1 of a front-half blank when the other blank is in the
/// back half: mean(split) - mean(both back).
pub fn blank_contrast(table: &OutcomeTable) -> Result<BlankContrast, AnalysisError> {
    let mut split = Vec::new();
    let mut back = Vec::new();
    for o in &table.outcomes {
        let Some((a, b)) = blank_deciles(o) else { continue };
        match (front_half(a), front_half(b)) {
            (true, false) | (false, true) => split.push(o.p1_score as f64),
            (false, false) => back.push(o.p1_score as f64),
            _ => {}
        }
    }
    for (what, xs) in [("games with split blanks", &split), ("games with both blanks late", &back)] {
        if xs.len() < 2 {
            return Err(AnalysisError::TooFew { what, needed: 2, found: xs.len() });
        }
    }
    let var = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (sm, bm) = (mean(&split), mean(&back));
    Ok(BlankContrast {
        split_games: split.len(),
        split_mean: sm,
        back_games: back.len(),
        back_mean: bm,
        contrast: sm - bm,
        std_error: (var(&split) / split.len() as f64 + var(&back) / back.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SPositionTable {
    /// `lines[k][d]`: games whose (k+1)-th S falls in decile d.
    pub counts: Vec<[usize; DECILES]>,
    pub means: Vec<[Option<f64>; DECILES]>,
    pub min_count: usize,
}

impl SPositionTable {
    pub fn shown(&self, k: usize, d: usize) -> Option<f64> {
        if self.counts[k][d] < self.min_count {
            None
        } else {
            self.means[k][d]
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("s_index,decile,games,mean_p1_score,masked\n");
        for (k, line) in self.counts.iter().enumerate() {
            for (d, (&n, mean)) in line.iter().zip(&self.means[k]).enumerate() {
                let m = mean.map(|v| format!("{v:.4}")).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{},{}", k + 1, d + 1, n, m, n < self.min_count);
            }
        }
        s
    }
}

pub fn s_position_table(table: &OutcomeTable, min_count: usize) -> SPositionTable {
    let lines = table.outcomes.iter().map(|o| o.s_positions.len()).max().unwrap_or(0);
    let mut sums = vec![[0.0f64; DECILES]; lines];
    let mut counts = vec![[0usize; DECILES]; lines];
    for o in &table.outcomes {
        let mut positions = o.s_positions.clone();
        positions.sort_unstable();
        for (k, &p) in positions.iter().enumerate() {
            let d = decile(p);
            sums[k][d] += o.p1_score as f64;
            counts[k][d] += 1;
        }
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| std::array::from_fn(|d| (c[d] > 0).then(|| s[d] / c[d] as f64)))
        .collect();
    SPositionTable { counts, means, min_count }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileEffect {
    pub letter: String,
    pub metric: String,
    /// Points per additional copy exposed to player 1.
    pub slope: f64,
    /// Cluster-robust (by order) standard error.
    pub std_error: f64,
    pub games: usize,
}

pub fn kind_label(kind: u8) -> String {
    if kind == BLANK {
        "?".into()
    } else {
        tile_char(kind).to_string()
    }
}

/// OLS slope of `y` on `x` with a CR1 cluster-robust standard error.
pub fn clustered_slope(x: &[f64], y: &[f64], clusters: &[u64]) -> Result<(f64, f64), AnalysisError> {
    let n = x.len();
    if n < 3 {
        return Err(AnalysisError::TooFew { what: "games", needed: 3, found: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(AnalysisError::Undefined("slope (exposure never varies)".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut scores: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for i in 0..n {
        let e = y[i] - intercept - slope * x[i];
        *scores.entry(clusters[i]).or_default() += (x[i] - mx) * e;
    }
    let g = scores.len() as f64;
    if g < 2.0 {
        return Err(AnalysisError::TooFew { what: "orders", needed: 2, found: scores.len() });
    }
    let meat: f64 = scores.values().map(|s| s * s).sum();
    let correction = g / (g - 1.0) * (n as f64 - 1.0) / (n as f64 - 2.0);
    Ok((slope, (correction * meat).sqrt() / sxx))
}

pub fn tile_regression(table: &OutcomeTable, kind: u8, metric: Metric) -> Result<TileEffect, AnalysisError> {
    let x: Vec<f64> = table.outcomes.iter().map(|o| o.p1_drawn[kind as usize] as f64).collect();
    let y: Vec<f64> = table.outcomes.iter().map(|o| metric.of(o)).collect();
    let c: Vec<u64> = table.outcomes.iter().map(|o| o.order_id).collect();
    let (slope, std_error) = clustered_slope(&x, &y, &c).map_err(|e| match e {
        AnalysisError::Undefined(_) => AnalysisError::Undefined(format!("slope for {}", kind_label(kind))),
        other => other,
    })?;
    Ok(TileEffect { letter: kind_label(kind), metric: metric.name().into(), slope, std_error, games: table.len() })
}

/// Slopes for every tile kind; kinds without variation are skipped.
pub fn all_tile_effects(table: &OutcomeTable, metric: Metric) -> Vec<TileEffect> {
    (0..TILE_KINDS as u8).filter_map(|k| tile_regression(table, k, metric).ok()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LetterComparison {
    pub letter: String,
    pub first: Option<f64>,
    pub second: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RulesetComparison {
    pub metric: String,
    pub first_mean_p1: f64,
    pub second_mean_p1: f64,
    pub letters: Vec<LetterComparison>,
}

impl RulesetComparison {
    pub fn letter(&self, kind: u8) -> &LetterComparison {
        &self.letters[kind as usize]
    }

    pub fn to_csv(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let mut s = String::from("letter,first_slope,second_slope,delta\n");
        for l in &self.letters {
            let _ = writeln!(s, "{},{},{},{}", l.letter, f(l.first), f(l.second), f(l.delta));
        }
        s
    }
}

/// Per-letter slopes under two rulesets; `delta = second - first`.
pub fn compare_rulesets(first: &OutcomeTable, second: &OutcomeTable, metric: Metric) -> RulesetComparison {
    let mean_p1 = |t: &OutcomeTable| t.outcomes.iter().map(|o| o.p1_score as f64).sum::<f64>() / t.len().max(1) as f64;
    let letters = (0..TILE_KINDS as u8)
        .map(|k| {
            let a = tile_regression(first, k, metric).ok().map(|e| e.slope);
            let b = tile_regression(second, k, metric).ok().map(|e| e.slope);
            LetterComparison { letter: kind_label(k), first: a, second: b, delta: a.zip(b).map(|(a, b)| b - a) }
        })
        .collect();
    RulesetComparison {
        metric: metric.name().into(),
        first_mean_p1: mean_p1(first),
        second_mean_p1: mean_p1(second),
        letters,
    }
}
