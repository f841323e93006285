//! The separated family `-ψ'' + κ_ℓ e^{2t} ψ = ν ψ` on `(α, β)`, `ψ(α) = ψ(β) = 0`.
//!
//! Each transverse mode `ℓ` gives one Sturm-Liouville problem. Eigenvalues are
//! reported as the shift `ν` above the continuum threshold; use
//! [`lambda_from_nu`] to recover the Laplace-Beltrami eigenvalue.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{assemble_fd, ChebGrid, Interval, PotentialSpec};
use crate::eigen::{dense_eigenvalues_owned, sturm_count, tridiag_eigenvalues_by_index, Spectrum};
use crate::error::{domain, Error, Result};
use crate::fmt_sig17;

pub const DEFAULT_RESOLUTION: usize = 400;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_FD_POINTS: usize = 100_000;

/// Largest mode the `ell_max` search will consider.
const ELL_SEARCH_LIMIT: u32 = 1 << 16;

/// `λ = (d-1)²/4 + ν`.
pub fn lambda_from_nu(nu: f64, dim: u32) -> f64 {
    let dm1 = f64::from(dim) - 1.0;
    dm1 * dm1 / 4.0 + nu
}

/// `ν = λ - (d-1)²/4`.
pub fn nu_from_lambda(lambda: f64, dim: u32) -> f64 {
    let dm1 = f64::from(dim) - 1.0;
    lambda - dm1 * dm1 / 4.0
}

#[derive(Debug, Clone)]
pub struct SlProblem {
    pub interval: Interval,
    pub pot: PotentialSpec,
}

impl SlProblem {
    pub fn new(interval: Interval, pot: PotentialSpec) -> Self {
        Self { interval, pot }
    }

    pub fn mode(interval: Interval, ell: u32) -> Self {
        Self::new(interval, PotentialSpec::mode(ell))
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return domain(format!("cutoff must be positive and finite, got {cutoff}"));
    }
    Ok(())
}

fn full_spectrum(grid: &ChebGrid, p: &SlProblem) -> Result<Spectrum> {
    let op = grid.assemble(&p.interval, &p.pot)?;
    dense_eigenvalues_owned(op.matrix)
}

fn truncate(mut s: Spectrum, cutoff: f64) -> Spectrum {
    let keep = s.values.partition_point(|&v| v <= cutoff);
    s.values.truncate(keep);
    s
}

/// All eigenvalues `≤ cutoff` of the Chebyshev discretization of degree `n`.
pub fn solve_problem(p: &SlProblem, n: usize, cutoff: f64) -> Result<Spectrum> {
    check_cutoff(cutoff)?;
    let grid = ChebGrid::new(n)?;
    Ok(truncate(full_spectrum(&grid, p)?, cutoff))
}

/// Number of eigenvalues below `cutoff` according to second-order finite
/// differences with `m` and `2m + 1` interior points (mesh widths `h`, `h/2`).
///
/// When the two Sturm counts disagree, the straddling eigenvalues are
/// bisected on both meshes and Richardson-extrapolated before counting.
pub fn fd_oracle_count(p: &SlProblem, cutoff: f64, m: usize) -> Result<usize> {
    let coarse = assemble_fd(&p.interval, &p.pot, m)?;
    let fine = assemble_fd(&p.interval, &p.pot, 2 * m + 1)?;
    let nc = sturm_count(&coarse, cutoff);
    let nf = sturm_count(&fine, cutoff);
    if nc == nf {
        return Ok(nc);
    }
    let range = nc.min(nf)..nc.max(nf);
    let ec = tridiag_eigenvalues_by_index(&coarse, range.clone());
    let ef = tridiag_eigenvalues_by_index(&fine, range.clone());
    let below = ec
        .values
        .iter()
        .zip(&ef.values)
        .filter(|(c, f)| (4.0 * *f - *c) / 3.0 < cutoff)
        .count();
    Ok(range.start + below)
}

/// Lowest `count` eigenvalues from finite differences on meshes `h` and `h/2`
/// combined as `(4 ν_{h/2} - ν_h) / 3`.
pub fn fd_richardson_lowest(p: &SlProblem, count: usize, m: usize) -> Result<Vec<f64>> {
    let coarse = assemble_fd(&p.interval, &p.pot, m)?;
    let fine = assemble_fd(&p.interval, &p.pot, 2 * m + 1)?;
    let ec = tridiag_eigenvalues_by_index(&coarse, 0..count);
    let ef = tridiag_eigenvalues_by_index(&fine, 0..count);
    Ok(ec
        .values
        .iter()
        .zip(&ef.values)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}

/// Chebyshev solver that certifies each eigenvalue by comparing degrees `n`
/// and `2n`, and the count below the cutoff against the finite-difference
/// oracle.
#[derive(Debug, Clone)]
pub struct CertifiedSolver {
    coarse: ChebGrid,
    fine: ChebGrid,
    tol: f64,
    fd_points: usize,
}

impl CertifiedSolver {
    pub fn new(n: usize, tol: f64, fd_points: usize) -> Result<Self> {
        if !(tol >= 1e-13) || !tol.is_finite() {
            return domain(format!(
                "certification tolerance must be at least 1e-13, got {tol}"
            ));
        }
        Ok(Self {
            coarse: ChebGrid::new(n)?,
            fine: ChebGrid::new(2 * n)?,
            tol,
            fd_points,
        })
    }

    pub fn resolution(&self) -> usize {
        self.coarse.degree()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Lowest eigenvalue at the base resolution (uncertified).
    pub fn first_eigenvalue(&self, p: &SlProblem) -> Result<f64> {
        let s = full_spectrum(&self.coarse, p)?;
        Ok(s.values[0])
    }

    pub fn solve(&self, p: &SlProblem, cutoff: f64) -> Result<Spectrum> {
        check_cutoff(cutoff)?;
        let ell = p.pot.ell;
        let coarse = full_spectrum(&self.coarse, p)?;
        let fine = full_spectrum(&self.fine, p)?;
        let kept = coarse.values.partition_point(|&v| v <= cutoff);
        if kept >= coarse.len() {
            return Err(Error::Certification {
                ell,
                index: kept,
                detail: format!(
                    "resolution {} does not reach past the cutoff {cutoff}",
                    self.resolution()
                ),
            });
        }
        // Every retained eigenvalue plus the first one above the cutoff.
        for j in 0..=kept {
            let (c, f) = (coarse.values[j], fine.values[j]);
            if (c - f).abs() > self.tol * c.abs().max(1.0) {
                return Err(Error::Certification {
                    ell,
                    index: j,
                    detail: format!(
                        "degree {} gives {c}, degree {} gives {f}",
                        self.resolution(),
                        2 * self.resolution()
                    ),
                });
            }
        }
        let oracle = fd_oracle_count(p, cutoff, self.fd_points)?;
        if oracle != kept {
            return Err(Error::Certification {
                ell,
                index: kept.min(oracle),
                detail: format!("finite-difference oracle counts {oracle} eigenvalues below {cutoff}, collocation counts {kept}"),
            });
        }
        Ok(Spectrum {
            values: coarse.values[..kept].to_vec(),
            max_imag: coarse.max_imag.max(fine.max_imag),
            iterations: coarse.iterations + fine.iterations,
        })
    }
}

/// [`CertifiedSolver::solve`] at the default resolution.
pub fn solve_certified(p: &SlProblem, cutoff: f64, tol: f64) -> Result<Spectrum> {
    CertifiedSolver::new(DEFAULT_RESOLUTION, tol, DEFAULT_FD_POINTS)?.solve(p, cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenEntry {
    pub ell: u32,
    pub k: u32,
    pub nu: f64,
}

/// The eigenvalues `ν_{ℓk}` of all modes, complete below `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTable {
    /// Sorted by `(ell, k)`.
    pub entries: Vec<EigenEntry>,
    pub cutoff: f64,
    /// Level each solved mode was resolved to, `cutoff · (1 + margin)`.
    pub solved_to: f64,
    /// Smallest mode whose first eigenvalue exceeds `cutoff`; modes
    /// `1..ell_max` are in the table.
    pub ell_max: u32,
    pub resolution: usize,
    pub tolerance: f64,
    pub interval: Interval,
    /// `κ_ℓ = transverse_scale · ℓ²`.
    pub transverse_scale: f64,
}

impl EigenTable {
    /// All `ν` values, ascending.
    pub fn sorted_nus(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().map(|e| e.nu).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mode(&self, ell: u32) -> impl Iterator<Item = &EigenEntry> {
        self.entries.iter().filter(move |e| e.ell == ell)
    }

    /// Strict growth in `k` for fixed `ℓ` and in `ℓ` for fixed `k`.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.entries.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.ell == b.ell && !(b.k == a.k + 1 && b.nu > a.nu) {
                return Err(Error::Certification {
                    ell: a.ell,
                    index: a.k as usize,
                    detail: format!(
                        "eigenvalues not strictly increasing in k: {} then {}",
                        a.nu, b.nu
                    ),
                });
            }
        }
        let mut by_k: std::collections::BTreeMap<u32, Vec<&EigenEntry>> = Default::default();
        for e in &self.entries {
            by_k.entry(e.k).or_default().push(e);
        }
        for (k, col) in by_k {
            for w in col.windows(2) {
                if !(w[1].nu > w[0].nu) {
                    return Err(Error::Certification {
                        ell: w[1].ell,
                        index: k as usize,
                        detail: format!(
                            "eigenvalue decreases in ell: {} then {}",
                            w[0].nu, w[1].nu
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// CSV with header `ell,k,nu`, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,k,nu\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.ell, e.k, fmt_sig17(e.nu));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Vec<EigenEntry>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("ell,k,nu") => {}
            other => return domain(format!("unexpected CSV header {other:?}")),
        }
        lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                let bad = || Error::Domain(format!("malformed row {line:?}"));
                if fields.len() != 3 {
                    return Err(bad());
                }
                Ok(EigenEntry {
                    ell: fields[0].parse().map_err(|_| bad())?,
                    k: fields[1].parse().map_err(|_| bad())?,
                    nu: fields[2].parse().map_err(|_| bad())?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub resolution: usize,
    pub tol: f64,
    pub margin: f64,
    /// Fixed `ell_max` instead of the adaptive search; must still satisfy the
    /// defining property or the sweep fails.
    pub ell_max: Option<u32>,
    pub transverse_scale: f64,
    pub fd_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            tol: DEFAULT_TOL,
            margin: DEFAULT_MARGIN,
            ell_max: None,
            transverse_scale: 1.0,
            fd_points: DEFAULT_FD_POINTS,
        }
    }
}

/// Sweep with default settings and the given tolerance.
pub fn sweep(interval: Interval, cutoff: f64, tol: f64) -> Result<EigenTable> {
    sweep_with(
        interval,
        cutoff,
        &SweepConfig {
            tol,
            ..SweepConfig::default()
        },
    )
}

/// Smallest `ℓ ≥ 1` whose first eigenvalue exceeds `cutoff`, by doubling then
/// bisection (the first eigenvalue is increasing in `ℓ`).
pub fn find_ell_max(
    solver: &CertifiedSolver,
    interval: Interval,
    transverse_scale: f64,
    cutoff: f64,
) -> Result<u32> {
    let first = |ell: u32| {
        solver.first_eigenvalue(&SlProblem::new(
            interval,
            PotentialSpec::scaled_mode(ell, transverse_scale),
        ))
    };
    if first(1)? > cutoff {
        return Ok(1);
    }
    let (mut lo, mut hi) = (1u32, 2u32);
    while first(hi)? <= cutoff {
        lo = hi;
        hi *= 2;
        if hi > ELL_SEARCH_LIMIT {
            return domain(format!(
                "no mode below {ELL_SEARCH_LIMIT} has its first eigenvalue above {cutoff}"
            ));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if first(mid)? > cutoff {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Certified eigenvalue table of all modes with eigenvalues below `cutoff`.
pub fn sweep_with(interval: Interval, cutoff: f64, cfg: &SweepConfig) -> Result<EigenTable> {
    check_cutoff(cutoff)?;
    if !(cfg.margin >= 0.0) || !(cfg.transverse_scale > 0.0) {
        return domain("margin must be non-negative and transverse scale positive");
    }
    let solver = CertifiedSolver::new(cfg.resolution, cfg.tol, cfg.fd_points)?;
    let mode = |ell: u32| {
        SlProblem::new(
            interval,
            PotentialSpec::scaled_mode(ell, cfg.transverse_scale),
        )
    };

    let ell_max = match cfg.ell_max {
        None => find_ell_max(&solver, interval, cfg.transverse_scale, cutoff)?,
        Some(0) => return domain("ell_max must be at least 1"),
        Some(l) => l,
    };
    // The first excluded mode must contribute nothing below the cutoff.
    let boundary = mode(ell_max);
    let leaked = fd_oracle_count(&boundary, cutoff, cfg.fd_points)?;
    let boundary_first = solver.first_eigenvalue(&boundary)?;
    if leaked > 0 || boundary_first <= cutoff {
        return Err(Error::Certification {
            ell: ell_max,
            index: 0,
            detail: format!(
                "mode ell = {ell_max} is excluded but its first eigenvalue {boundary_first} is not above {cutoff}"
            ),
        });
    }

    let solved_to = cutoff * (1.0 + cfg.margin);
    let per_mode: Vec<Vec<EigenEntry>> = (1..ell_max)
        .into_par_iter()
        .map(|ell| {
            let s = solver.solve(&mode(ell), solved_to)?;
            Ok(s.values
                .iter()
                .enumerate()
                .map(|(i, &nu)| EigenEntry {
                    ell,
                    k: i as u32 + 1,
                    nu,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let table = EigenTable {
        entries: per_mode.into_iter().flatten().collect(),
        cutoff,
        solved_to,
        ell_max,
        resolution: cfg.resolution,
        tolerance: cfg.tol,
        interval,
        transverse_scale: cfg.transverse_scale,
    };
    table.check_invariants()?;
    Ok(table)
}
