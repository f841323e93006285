//! Counting function, Riesz means and the Pólya-type bounds they are
//! compared against.

use std::fmt::Write as _;

use serde::Serialize;

use crate::constants::{lt_classical, polya_constant, product_counting_constant, ConstantQuery};
use crate::error::{domain, Error, Result};
use crate::fmt_sig17;
use crate::sl_family::EigenTable;

/// Counting data: sorted eigenvalue shifts of a domain plus its hyperbolic
/// volume and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingFunction {
    sorted_nus: Vec<f64>,
    volume: f64,
    dim: u32,
    /// Every eigenvalue below this level is present.
    complete_below: f64,
}

impl CountingFunction {
    pub fn new(mut nus: Vec<f64>, volume: f64, dim: u32, complete_below: f64) -> Result<Self> {
        if nus.iter().any(|v| !v.is_finite()) {
            return domain("eigenvalues must be finite");
        }
        if !(volume > 0.0) || !volume.is_finite() {
            return domain(format!("volume must be positive, got {volume}"));
        }
        if dim < 1 {
            return domain("dimension must be at least 1");
        }
        nus.sort_by(f64::total_cmp);
        Ok(Self {
            sorted_nus: nus,
            volume,
            dim,
            complete_below,
        })
    }

    pub fn from_table(table: &EigenTable, volume: f64, dim: u32) -> Result<Self> {
        Self::new(table.sorted_nus(), volume, dim, table.cutoff)
    }

    pub fn nus(&self) -> &[f64] {
        &self.sorted_nus
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn complete_below(&self) -> f64 {
        self.complete_below
    }

    fn require_complete(&self, lam: f64) -> Result<()> {
        if lam > self.complete_below {
            return Err(Error::IncompleteTable {
                requested: lam,
                cutoff: self.complete_below,
            });
        }
        Ok(())
    }

    /// `N(Λ) = #{ν < Λ}`.
    pub fn count(&self, lam: f64) -> usize {
        self.sorted_nus.partition_point(|&v| v < lam)
    }

    /// `#{ν ≤ Λ}`, the value of `N` just after a jump at `Λ`.
    pub fn count_le(&self, lam: f64) -> usize {
        self.sorted_nus.partition_point(|&v| v <= lam)
    }

    /// `Σ (Λ - ν)₊^γ`; `γ = 0` is the strict count.
    pub fn riesz_mean(&self, lam: f64, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return domain(format!("Riesz order must be non-negative, got {gamma}"));
        }
        self.require_complete(lam)?;
        let below = &self.sorted_nus[..self.count(lam)];
        if gamma == 0.0 {
            return Ok(below.len() as f64);
        }
        Ok(below.iter().map(|&v| (lam - v).powf(gamma)).sum())
    }
}

fn power_law(coefficient: f64, lam: f64, exponent: f64, volume: f64) -> Result<f64> {
    if !(lam >= 0.0) {
        return domain(format!("spectral level must be non-negative, got {lam}"));
    }
    Ok(coefficient * lam.powf(exponent) * volume)
}

/// Semiclassical Pólya bound `L^cl_{0,d} Λ^{d/2} |Ω|_h`.
pub fn polya_rhs(lam: f64, dim: u32, volume: f64) -> Result<f64> {
    let c = lt_classical(ConstantQuery::new(0.0, dim)?)?.value;
    power_law(c, lam, f64::from(dim) / 2.0, volume)
}

/// Counting bound derived from the Lieb-Thirring inequality with `γ = 1`.
pub fn thm12_rhs(lam: f64, dim: u32, volume: f64) -> Result<f64> {
    power_law(
        polya_constant(dim)?.value,
        lam,
        f64::from(dim) / 2.0,
        volume,
    )
}

/// Counting bound for product domains, from the `γ = 1/2` Riesz-mean bound.
pub fn eq63_rhs(lam: f64, dim: u32, volume: f64) -> Result<f64> {
    power_law(
        product_counting_constant(dim)?.value,
        lam,
        f64::from(dim) / 2.0,
        volume,
    )
}

/// Riesz-mean bound on product domains, `2 L^cl_{γ,d} Λ^{d/2 + γ} |Ω|_h`,
/// for `1/2 ≤ γ < 1`.
pub fn thm61_rhs(lam: f64, gamma: f64, dim: u32, volume: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&gamma) {
        return domain(format!(
            "product-domain Riesz bound needs 1/2 ≤ γ < 1, got {gamma}"
        ));
    }
    let c = 2.0 * lt_classical(ConstantQuery::new(gamma, dim)?)?.value;
    power_law(c, lam, f64::from(dim) / 2.0 + gamma, volume)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundKind {
    Polya,
    Thm12,
    Eq63,
    Thm61 { gamma: f64 },
}

impl BoundKind {
    pub fn name(&self) -> String {
        match self {
            Self::Polya => "polya".into(),
            Self::Thm12 => "thm12".into(),
            Self::Eq63 => "eq63".into(),
            Self::Thm61 { gamma } => format!("thm61(gamma={gamma})"),
        }
    }

    pub fn rhs(&self, lam: f64, dim: u32, volume: f64) -> Result<f64> {
        match *self {
            Self::Polya => polya_rhs(lam, dim, volume),
            Self::Thm12 => thm12_rhs(lam, dim, volume),
            Self::Eq63 => eq63_rhs(lam, dim, volume),
            Self::Thm61 { gamma } => thm61_rhs(lam, gamma, dim, volume),
        }
    }

    /// Spectral quantity the bound controls: `N(Λ)` or the `γ`-Riesz mean.
    fn lhs(&self, cf: &CountingFunction, lam: f64, after_jump: bool) -> Result<f64> {
        match *self {
            Self::Thm61 { gamma } => cf.riesz_mean(lam, gamma),
            _ if after_jump => Ok(cf.count_le(lam) as f64),
            _ => Ok(cf.count(lam) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_kind: String,
    pub lam_max: f64,
    pub lambda_grid: Vec<f64>,
    /// `N(Λ)` (right limit at jump points) or the Riesz mean.
    pub values: Vec<f64>,
    pub bound_values: Vec<f64>,
    pub min_margin: f64,
    pub argmin_lambda: f64,
    pub violated: bool,
}

/// The JSON form of a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub bound_kind: String,
    pub lam_max: f64,
    pub min_margin: f64,
    pub violated: bool,
    pub argmin_lambda: f64,
}

impl BoundReport {
    pub fn summary(&self) -> BoundSummary {
        BoundSummary {
            bound_kind: self.bound_kind.clone(),
            lam_max: self.lam_max,
            min_margin: self.min_margin,
            violated: self.violated,
            argmin_lambda: self.argmin_lambda,
        }
    }
}

pub fn verify_bound(
    cf: &CountingFunction,
    bound: BoundKind,
    lam_max: f64,
    grid: usize,
) -> Result<BoundReport> {
    verify_bound_scaled(cf, bound, lam_max, grid, 1.0)
}

/// Compares the counting data with `scale · bound` on a uniform grid of
/// `grid` points in `(0, lam_max]` and at every jump in that range.
///
/// `N` is a step function and the bound is increasing, so the supremum of
/// `N - bound` over each step is approached just after its jump; jump points
/// are evaluated with the post-jump count.
pub fn verify_bound_scaled(
    cf: &CountingFunction,
    bound: BoundKind,
    lam_max: f64,
    grid: usize,
    scale: f64,
) -> Result<BoundReport> {
    if !(lam_max > 0.0) || grid == 0 {
        return domain("lam_max must be positive and the grid non-empty");
    }
    cf.require_complete(lam_max)?;

    let mut points: Vec<(f64, bool)> = (1..=grid)
        .map(|i| (lam_max * i as f64 / grid as f64, false))
        .collect();
    let jumps = &cf.sorted_nus[..cf.count_le(lam_max)];
    let mut last = f64::NAN;
    for &nu in jumps {
        if nu > 0.0 && nu != last {
            points.push((nu, true));
        }
        last = nu;
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut report = BoundReport {
        bound_kind: bound.name(),
        lam_max,
        lambda_grid: Vec::with_capacity(points.len()),
        values: Vec::with_capacity(points.len()),
        bound_values: Vec::with_capacity(points.len()),
        min_margin: f64::INFINITY,
        argmin_lambda: f64::NAN,
        violated: false,
    };
    for (lam, after_jump) in points {
        let lhs = bound.lhs(cf, lam, after_jump)?;
        let rhs = scale * bound.rhs(lam, cf.dim, cf.volume)?;
        let margin = rhs - lhs;
        if margin < report.min_margin {
            report.min_margin = margin;
            report.argmin_lambda = lam;
        }
        report.lambda_grid.push(lam);
        report.values.push(lhs);
        report.bound_values.push(rhs);
    }
    report.violated = report.min_margin < 0.0;
    Ok(report)
}

/// `(d, ratio)` rows for `d` in `d_min..=d_max`.
pub fn figure1_data(d_min: u32, d_max: u32) -> Result<Vec<(u32, f64)>> {
    if d_min < 2 || d_max < d_min {
        return domain(format!("invalid dimension range {d_min}..={d_max}"));
    }
    (d_min..=d_max)
        .map(|d| Ok((d, crate::constants::constant_ratio(d)?)))
        .collect()
}

pub fn figure1_csv(rows: &[(u32, f64)]) -> String {
    let mut out = String::from("d,ratio\n");
    for (d, r) in rows {
        let _ = writeln!(out, "{d},{}", fmt_sig17(*r));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure2Row {
    pub lambda: f64,
    pub count: usize,
    pub bound: f64,
}

/// Step data for `N(Λ)` against the semiclassical line on `[0, lam_max]`.
///
/// Each jump contributes two rows at the same `Λ`: the count before and after.
pub fn figure2_data(cf: &CountingFunction, lam_max: f64) -> Result<Vec<Figure2Row>> {
    if !(lam_max > 0.0) {
        return domain("lam_max must be positive");
    }
    cf.require_complete(lam_max)?;
    let row = |lambda: f64, count: usize| -> Result<Figure2Row> {
        Ok(Figure2Row {
            lambda,
            count,
            bound: polya_rhs(lambda, cf.dim, cf.volume)?,
        })
    };
    let mut rows = vec![row(0.0, 0)?];
    let jumps = &cf.sorted_nus[..cf.count(lam_max)];
    let mut i = 0;
    while i < jumps.len() {
        let nu = jumps[i];
        let before = cf.count(nu);
        let after = cf.count_le(nu);
        if nu > 0.0 {
            rows.push(row(nu, before)?);
            rows.push(row(nu, after)?);
        }
        i = after.max(i + 1);
    }
    rows.push(row(lam_max, cf.count(lam_max))?);
    Ok(rows)
}

pub fn figure2_csv(rows: &[Figure2Row]) -> String {
    let mut out = String::from("lambda,count,bound\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_sig17(r.lambda),
            r.count,
            fmt_sig17(r.bound)
        );
    }
    out
}
