//! Gauss-Legendre rules and tensor-product integration on rectangles.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return domain("Gauss-Legendre rule needs at least one node");
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// A tensor rule on `[x0, x1] × [t0, t1]`.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub xs: Vec<f64>,
    pub wx: Vec<f64>,
    pub ts: Vec<f64>,
    pub wt: Vec<f64>,
}

impl TensorRule {
    pub fn new(x: (f64, f64), t: (f64, f64), n: usize) -> Result<Self> {
        let (g, w) = gauss_legendre(n)?;
        let map = |(a, b): (f64, f64)| {
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            (
                g.iter().map(|s| mid + half * s).collect::<Vec<_>>(),
                w.iter().map(|v| half * v).collect::<Vec<_>>(),
            )
        };
        let (xs, wx) = map(x);
        let (ts, wt) = map(t);
        Ok(Self { xs, wx, ts, wt })
    }

    /// Integrates `K` functions at once; `f` fills its output slice.
    pub fn integrate<const K: usize>(
        &self,
        mut f: impl FnMut(f64, f64, &mut [f64; K]),
    ) -> [f64; K] {
        let mut total = [0.0; K];
        let mut buf = [0.0; K];
        for (&x, &wx) in self.xs.iter().zip(&self.wx) {
            let mut inner = [0.0; K];
            for (&t, &wt) in self.ts.iter().zip(&self.wt) {
                f(x, t, &mut buf);
                for (acc, v) in inner.iter_mut().zip(buf) {
                    *acc += wt * v;
                }
            }
            for (acc, v) in total.iter_mut().zip(inner) {
                *acc += wx * v;
            }
        }
        total
    }
}

/// Doubles the node count from `start` until every component of `eval(n)`
/// agrees with the previous level to `rel_tol`, or fails past `max_nodes`.
pub fn until_converged<const K: usize>(
    rel_tol: f64,
    start: usize,
    max_nodes: usize,
    mut eval: impl FnMut(usize) -> Result<[f64; K]>,
) -> Result<([f64; K], usize)> {
    let mut n = start.max(2);
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        if n > max_nodes {
            return Err(Error::Quadrature(format!(
                "no agreement to {rel_tol:e} with up to {max_nodes} nodes per axis"
            )));
        }
        let cur = eval(n)?;
        let converged = prev
            .iter()
            .zip(&cur)
            .all(|(a, b)| a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs()));
        if converged {
            return Ok((cur, n));
        }
        prev = cur;
    }
}

/// Tensor Gauss-Legendre integration of `f` over `[x0, x1] × [t0, t1]` with
/// node doubling.
pub fn integrate_adaptive<const K: usize>(
    x: (f64, f64),
    t: (f64, f64),
    rel_tol: f64,
    start: usize,
    max_nodes: usize,
    mut f: impl FnMut(f64, f64, &mut [f64; K]),
) -> Result<([f64; K], usize)> {
    until_converged(rel_tol, start, max_nodes, |n| {
        Ok(TensorRule::new(x, t, n)?.integrate(&mut f))
    })
}
