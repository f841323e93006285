//! Eigenvalue solvers.
//!
//! [`dense_eigenvalues`] handles the (non-symmetric) collocation matrices:
//! diagonal balancing, Householder reduction to upper Hessenberg form, then
//! Francis double-shift QR on the active window only, since no Schur vectors
//! are needed. [`tridiag_eigenvalues`] and [`sturm_count`] handle the
//! symmetric finite-difference operators by Sturm-sequence bisection.

use serde::Serialize;

use crate::discretize::TridiagOperator;
use crate::error::{domain, Error, Result};
use crate::matrix::DenseMatrix;

/// Relative tolerance below which imaginary parts are treated as rounding.
pub const REALITY_TOL: f64 = 1e-8;

/// QR sweeps allowed per unit of matrix order.
pub const QR_SWEEPS_PER_ORDER: usize = 30;

const BISECTION_REL_TOL: f64 = 1e-12;
const BISECTION_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Largest imaginary magnitude that was projected away.
    pub max_imag: f64,
    /// QR sweeps (dense) or bisection steps (tridiagonal).
    pub iterations: usize,
}

impl Spectrum {
    pub fn empty() -> Self {
        Self {
            values: Vec::new(),
            max_imag: 0.0,
            iterations: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All eigenvalues of a real square matrix whose spectrum is real.
pub fn dense_eigenvalues(matrix: &DenseMatrix) -> Result<Spectrum> {
    dense_eigenvalues_owned(matrix.clone())
}

/// As [`dense_eigenvalues`], consuming the matrix to avoid a copy.
pub fn dense_eigenvalues_owned(mut a: DenseMatrix) -> Result<Spectrum> {
    if a.order() == 0 {
        return domain("matrix must have order at least 1");
    }
    if !a.is_finite() {
        return domain("matrix has non-finite entries");
    }
    balance(&mut a);
    reduce_to_hessenberg(&mut a);
    let (re, im, iterations) = hessenberg_qr(&mut a)?;

    let mut max_imag = 0.0f64;
    for (&r, &i) in re.iter().zip(&im) {
        if i.abs() > REALITY_TOL * (1.0 + r.abs()) {
            return Err(Error::RealityViolation { re: r, im: i });
        }
        max_imag = max_imag.max(i.abs());
    }
    let mut values = re;
    values.sort_by(f64::total_cmp);
    Ok(Spectrum {
        values,
        max_imag,
        iterations,
    })
}

/// Radix-2 diagonal similarity scaling that equalises row and column norms.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.order();
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for v in a.row_mut(i) {
                    *v *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn reduce_to_hessenberg(a: &mut DenseMatrix) {
    let n = a.order();
    let mut u = vec![0.0; n];
    let mut f = vec![0.0; n];
    for m in 1..n.saturating_sub(1) {
        let scale: f64 = (m..n).map(|i| a[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in m..n {
            u[i] = a[(i, m - 1)] / scale;
            h += u[i] * u[i];
        }
        let g = if u[m] > 0.0 { -h.sqrt() } else { h.sqrt() };
        h -= u[m] * g;
        u[m] -= g;

        // Left: (I - u uᵀ/h) on rows m.., columns m..
        f[m..n].fill(0.0);
        for i in m..n {
            let ui = u[i];
            for (fj, &aij) in f[m..n].iter_mut().zip(&a.row(i)[m..n]) {
                *fj += ui * aij;
            }
        }
        for fj in &mut f[m..n] {
            *fj /= h;
        }
        for i in m..n {
            let ui = u[i];
            for (aij, &fj) in a.row_mut(i)[m..n].iter_mut().zip(&f[m..n]) {
                *aij -= ui * fj;
            }
        }
        // Right: all rows, columns m..
        for i in 0..n {
            let row = &mut a.row_mut(i)[m..n];
            let s: f64 = row.iter().zip(&u[m..n]).map(|(x, y)| x * y).sum::<f64>() / h;
            for (x, &uj) in row.iter_mut().zip(&u[m..n]) {
                *x -= s * uj;
            }
        }
        a[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            a[(i, m - 1)] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Returns real parts,
/// imaginary parts and the number of sweeps.
///
/// Shifts are the eigenvalues of the trailing 2×2 block of the active window,
/// with ad-hoc exceptional shifts after 10 and 20 stagnant sweeps. A window
/// deflates once its subdiagonal entry is negligible next to its diagonal
/// neighbours.
fn hessenberg_qr(a: &mut DenseMatrix) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = a.order();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let cap = QR_SWEEPS_PER_ORDER * n;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut total = 0usize;
    let mut shift_acc = 0.0;
    // Active window is rows/columns [.., hi).
    let mut hi = n;
    while hi > 0 {
        let nn = hi - 1;
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[(nn, nn)];
            if l == nn {
                wr[nn] = x + shift_acc;
                wi[nn] = 0.0;
                hi -= 1;
                break;
            }
            let mut y = a[(nn - 1, nn - 1)];
            let mut w = a[(nn, nn - 1)] * a[(nn - 1, nn)];
            if l + 1 == nn {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += shift_acc;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = z;
                    wi[nn] = -z;
                }
                hi -= 2;
                break;
            }

            if total >= cap {
                return Err(Error::NoConvergence { unconverged: hi });
            }
            if its == 10 || its == 20 {
                shift_acc += x;
                for i in 0..=nn {
                    a[(i, i)] -= x;
                }
                let s = a[(nn, nn - 1)].abs() + a[(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;

            // Look for two consecutive small subdiagonals to start the bulge.
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            // Chase the bulge with 3×3 Householder reflectors.
            for k in m..nn {
                let mut xk = 0.0;
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nn - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * xk;
                }
                p += s;
                let vx = p / s;
                let vy = q / s;
                let vz = r / s;
                q /= p;
                r /= p;
                let three = k != nn - 1;
                for j in k..=nn {
                    let mut pj = a[(k, j)] + q * a[(k + 1, j)];
                    if three {
                        pj += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pj * vz;
                    }
                    a[(k + 1, j)] -= pj * vy;
                    a[(k, j)] -= pj * vx;
                }
                let imax = nn.min(k + 3);
                for i in l..=imax {
                    let mut pi = vx * a[(i, k)] + vy * a[(i, k + 1)];
                    if three {
                        pi += vz * a[(i, k + 2)];
                        a[(i, k + 2)] -= pi * r;
                    }
                    a[(i, k + 1)] -= pi * q;
                    a[(i, k)] -= pi;
                }
            }
        }
    }
    Ok((wr, wi, total))
}

/// Number of eigenvalues strictly below `lam`, from the signs of the `LDLᵀ`
/// pivots of `T - lam·I`.
///
/// A pivot that vanishes exactly is replaced by a tiny positive value, which
/// amounts to moving `lam` infinitesimally downward so ties are not counted.
pub fn sturm_count(op: &TridiagOperator, lam: f64) -> usize {
    let scale = op
        .diag
        .iter()
        .map(|d| d.abs())
        .chain(op.offdiag.iter().map(|e| e.abs()))
        .fold(lam.abs(), f64::max)
        .max(f64::MIN_POSITIVE);
    let guard = f64::EPSILON * f64::EPSILON * scale;

    let mut count = 0;
    let mut pivot = op.diag[0] - lam;
    for i in 0..op.order() {
        if i > 0 {
            let e = op.offdiag[i - 1];
            pivot = (op.diag[i] - lam) - e * e / pivot;
        }
        if pivot == 0.0 {
            pivot = guard;
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// `index`-th smallest eigenvalue (0-based), bisected inside `[lo, hi]`.
fn bisect_index(op: &TridiagOperator, index: usize, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let mut steps = 0;
    while steps < BISECTION_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_REL_TOL * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(op, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    (0.5 * (lo + hi), steps)
}

/// Eigenvalues with index in `range` (0-based, ascending order).
pub fn tridiag_eigenvalues_by_index(
    op: &TridiagOperator,
    range: std::ops::Range<usize>,
) -> Spectrum {
    let (glo, ghi) = op.gershgorin();
    let pad = 1.0 + 1e-12 * glo.abs().max(ghi.abs());
    let (glo, ghi) = (glo - pad, ghi + pad);
    let end = range.end.min(op.order());
    let mut values = Vec::with_capacity(end.saturating_sub(range.start));
    let mut iterations = 0;
    for index in range.start..end {
        let (v, steps) = bisect_index(op, index, glo, ghi);
        values.push(v);
        iterations += steps;
    }
    Spectrum {
        values,
        max_imag: 0.0,
        iterations,
    }
}

/// All eigenvalues in `(lo, hi]`, ascending.
pub fn tridiag_eigenvalues(op: &TridiagOperator, lo: f64, hi: f64) -> Result<Spectrum> {
    if !(lo < hi) {
        return domain(format!("empty search range ({lo}, {hi}]"));
    }
    // Counts of eigenvalues ≤ lo and ≤ hi.
    let first = sturm_count(op, lo.next_up());
    let last = sturm_count(op, hi.next_up());
    Ok(tridiag_eigenvalues_by_index(op, first..last))
}
