//! Discretizations of `-d²/dt² + q(t)` on `(alpha, beta)` with Dirichlet ends.
//!
//! Two independent routes are provided: Chebyshev collocation (dense,
//! spectrally accurate) and the three-point finite-difference stencil
//! (symmetric tridiagonal, second order), which serves as an oracle.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::matrix::DenseMatrix;

/// Interval in the logarithmic variable `t = ln y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    alpha: f64,
    beta: f64,
}

impl Interval {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha >= beta {
            return domain(format!("invalid interval ({alpha}, {beta})"));
        }
        Ok(Self { alpha, beta })
    }

    /// Image of `(a, b) ⊂ (0, ∞)` under `y ↦ ln y`.
    pub fn from_heights(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > a) {
            return domain(format!("heights must satisfy 0 < a < b, got ({a}, {b})"));
        }
        Self::new(a.ln(), b.ln())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Affine map from the reference interval `[-1, 1]`.
    pub fn from_reference(&self, x: f64) -> f64 {
        self.alpha + self.length() * (x + 1.0) / 2.0
    }
}

pub type ExtraPotential = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Potential `q(t) = κ e^{2t} + extra(t)`.
///
/// `κ` is the transverse eigenvalue; for the mode `ℓ` of a box of width `X`
/// it is `(ℓπ/X)²`, which reduces to `ℓ²` when `X = π`.
#[derive(Clone)]
pub struct PotentialSpec {
    pub ell: u32,
    pub kappa: f64,
    pub extra: Option<ExtraPotential>,
}

impl PotentialSpec {
    /// Mode `ℓ` with `κ = ℓ²`.
    pub fn mode(ell: u32) -> Self {
        Self::scaled_mode(ell, 1.0)
    }

    /// Mode `ℓ` with `κ = scale · ℓ²`.
    pub fn scaled_mode(ell: u32, scale: f64) -> Self {
        let l = f64::from(ell);
        Self {
            ell,
            kappa: scale * l * l,
            extra: None,
        }
    }

    pub fn with_extra(mut self, extra: ExtraPotential) -> Self {
        self.extra = Some(extra);
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = if self.kappa == 0.0 {
            0.0
        } else {
            self.kappa * (2.0 * t).exp()
        };
        match &self.extra {
            Some(f) => base + f(t),
            None => base,
        }
    }
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("ell", &self.ell)
            .field("kappa", &self.kappa)
            .field("extra", &self.extra.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

/// Chebyshev-Gauss-Lobatto points `cos(jπ/n)`, `j = 0..=n`, descending.
///
/// Evaluated as `sin(π(n - 2j)/(2n))`, which is exactly antisymmetric about
/// the midpoint.
pub fn cheb_nodes(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return domain(format!("Chebyshev degree must be at least 2, got {n}"));
    }
    let nf = n as f64;
    Ok((0..=n)
        .map(|j| (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin())
        .collect())
}

/// First-derivative collocation matrix on [`cheb_nodes`].
///
/// Off-diagonal node differences use the product-of-sines identity; each
/// diagonal entry is minus the sum of its row.
pub fn cheb_diff_matrix(n: usize) -> Result<DenseMatrix> {
    cheb_nodes(n)?;
    let nf = n as f64;
    let weight = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DenseMatrix::zeros(n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i == j {
                continue;
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let diff = 2.0
                * (PI * (i + j) as f64 / (2.0 * nf)).sin()
                * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin();
            d[(i, j)] = weight(i) / weight(j) * sign / diff;
        }
    }
    for i in 0..=n {
        let mut off: Vec<f64> = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).collect();
        off.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        d[(i, i)] = -off.iter().sum::<f64>();
    }
    Ok(d)
}

/// Interior block of `D²` for a fixed degree, reusable across potentials and
/// intervals.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    n: usize,
    nodes: Vec<f64>,
    d2_interior: DenseMatrix,
}

impl ChebGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return domain(format!("Chebyshev resolution must be at least 4, got {n}"));
        }
        let nodes = cheb_nodes(n)?;
        let d = cheb_diff_matrix(n)?;
        let m = n - 1;
        let mut d2 = DenseMatrix::zeros(m);
        for i in 1..n {
            let dst = d2.row_mut(i - 1);
            for (k, &a) in d.row(i).iter().enumerate() {
                for (out, &b) in dst.iter_mut().zip(&d.row(k)[1..n]) {
                    *out += a * b;
                }
            }
        }
        Ok(Self {
            n,
            nodes,
            d2_interior: d2,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Collocation matrix of `-d²/dt² + q` with the boundary rows and
    /// columns deleted.
    pub fn assemble(&self, interval: &Interval, pot: &PotentialSpec) -> Result<ChebOperator> {
        let scale = 4.0 / (interval.length() * interval.length());
        let m = self.n - 1;
        let nodes: Vec<f64> = self.nodes[1..self.n]
            .iter()
            .map(|&x| interval.from_reference(x))
            .collect();
        let mut matrix = DenseMatrix::zeros(m);
        for i in 0..m {
            let src = self.d2_interior.row(i);
            for (dst, &v) in matrix.row_mut(i).iter_mut().zip(src) {
                *dst = -scale * v;
            }
            let q = pot.eval(nodes[i]);
            if !q.is_finite() {
                return domain(format!("potential is not finite at t = {}", nodes[i]));
            }
            matrix[(i, i)] += q;
        }
        Ok(ChebOperator {
            n: self.n,
            matrix,
            nodes,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ChebOperator {
    pub n: usize,
    pub matrix: DenseMatrix,
    /// Interior collocation points in `t`, descending.
    pub nodes: Vec<f64>,
}

pub fn assemble_cheb(interval: &Interval, pot: &PotentialSpec, n: usize) -> Result<ChebOperator> {
    ChebGrid::new(n)?.assemble(interval, pot)
}

/// Symmetric tridiagonal finite-difference operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub h: f64,
}

impl TridiagOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, h: f64) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return domain("off-diagonal must be one shorter than a non-empty diagonal");
        }
        Ok(Self { diag, offdiag, h })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let m = self.order();
        let mut a = DenseMatrix::zeros(m);
        for (i, &d) in self.diag.iter().enumerate() {
            a[(i, i)] = d;
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            a[(i, i + 1)] = e;
            a[(i + 1, i)] = e;
        }
        a
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let m = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let left = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < m {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

/// Three-point stencil on `m` uniform interior points, `h = (β - α)/(m + 1)`.
pub fn assemble_fd(interval: &Interval, pot: &PotentialSpec, m: usize) -> Result<TridiagOperator> {
    if m < 3 {
        return domain(format!(
            "finite-difference grid needs at least 3 points, got {m}"
        ));
    }
    let h = interval.length() / (m + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(m);
    for i in 1..=m {
        let t = interval.alpha() + i as f64 * h;
        let q = pot.eval(t);
        if !q.is_finite() {
            return domain(format!("potential is not finite at t = {t}"));
        }
        diag.push(2.0 * inv_h2 + q);
    }
    TridiagOperator::new(diag, vec![-inv_h2; m - 1], h)
}
