//! Lieb-Thirring and Sobolev-type checks on product domains in the
//! hyperbolic plane.
//!
//! A box potential `V = Λ` on `Ω = (0, X) × (a, b)` with Dirichlet walls
//! separates into transverse modes `sin(ℓπx/X)` and the 1D problems solved by
//! [`crate::sl_family`] on `(ln a, ln b)` with `κ_ℓ = (ℓπ/X)²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{k_one_d, lt_theorem, ConstantQuery};
use crate::counting::{thm61_rhs, CountingFunction};
use crate::discretize::{cheb_diff_matrix, cheb_nodes, Interval};
use crate::error::{domain, Error, Result};
use crate::quadrature::{until_converged, TensorRule};
use crate::sl_family::{sweep_with, EigenTable, SweepConfig, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductDomain {
    x_length: f64,
    a: f64,
    b: f64,
}

impl ProductDomain {
    pub fn new(x_length: f64, a: f64, b: f64) -> Result<Self> {
        if !(x_length > 0.0 && x_length.is_finite()) {
            return domain(format!("x_length must be positive, got {x_length}"));
        }
        if !(a > 0.0 && a < b && b.is_finite()) {
            return domain(format!("need 0 < a < b < ∞, got a = {a}, b = {b}"));
        }
        Ok(Self { x_length, a, b })
    }

    /// `(0, π) × (e⁻¹, e)`.
    pub fn reference() -> Self {
        Self {
            x_length: PI,
            a: (-1f64).exp(),
            b: 1f64.exp(),
        }
    }

    pub fn x_length(&self) -> f64 {
        self.x_length
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(ln a, ln b)`.
    pub fn log_interval(&self) -> Interval {
        Interval::from_heights(self.a, self.b).expect("validated heights")
    }

    /// `κ_ℓ / ℓ² = (π/X)²`.
    pub fn transverse_scale(&self) -> f64 {
        (PI / self.x_length).powi(2)
    }
}

/// `|Ω|_h = X (1/a - 1/b)`.
pub fn hyperbolic_volume(dom: &ProductDomain) -> f64 {
    dom.x_length * (dom.b - dom.a) / (dom.a * dom.b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxPotential {
    pub domain: ProductDomain,
    pub height: f64,
}

impl BoxPotential {
    pub fn new(dom: ProductDomain, height: f64) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) {
            return domain(format!("potential height must be positive, got {height}"));
        }
        Ok(Self {
            domain: dom,
            height,
        })
    }
}

/// `∫ V^{γ + d/2} dx dy / y^d = Λ^{γ + d/2} |Ω|_h`.
pub fn potential_integral(pot: &BoxPotential, gamma: f64, d: u32) -> Result<f64> {
    if !(gamma >= 0.5) {
        return domain(format!("γ must be at least 1/2, got {gamma}"));
    }
    if d != 2 {
        return domain("box potentials are defined in dimension 2 only");
    }
    Ok(pot.height.powf(gamma + f64::from(d) / 2.0) * hyperbolic_volume(&pot.domain))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtReport {
    pub gamma: f64,
    pub lambda: f64,
    /// `Σ (Λ - ν_{ℓk})₊^γ`.
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub passed: bool,
    /// Product-domain bound `2 L^cl_{γ,2} Λ^{γ+1} |Ω|_h`, for `1/2 ≤ γ < 1`.
    pub product_rhs: Option<f64>,
    pub product_passed: Option<bool>,
    pub eigenvalue_count: usize,
}

/// Sweeps the domain up to the potential height and compares the Riesz mean
/// of the bound states with the theorem's right-hand side.
pub fn lt_check(pot: &BoxPotential, gamma: f64) -> Result<LtReport> {
    check_gamma(gamma)?;
    let table = sweep_for(&pot.domain, pot.height, DEFAULT_TOL)?;
    lt_check_table(&table, pot, gamma)
}

/// Certified table for `dom` complete below `cutoff`.
pub fn sweep_for(dom: &ProductDomain, cutoff: f64, tol: f64) -> Result<EigenTable> {
    sweep_with(
        dom.log_interval(),
        cutoff,
        &SweepConfig {
            tol,
            transverse_scale: dom.transverse_scale(),
            ..SweepConfig::default()
        },
    )
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.5 && gamma.is_finite()) {
        return domain(format!("γ must be at least 1/2, got {gamma}"));
    }
    Ok(())
}

/// As [`lt_check`], reusing a table that must belong to the same domain and be
/// complete below the potential height.
pub fn lt_check_table(table: &EigenTable, pot: &BoxPotential, gamma: f64) -> Result<LtReport> {
    check_gamma(gamma)?;
    let dom = &pot.domain;
    let iv = dom.log_interval();
    let same = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
    if !same(table.interval.alpha(), iv.alpha())
        || !same(table.interval.beta(), iv.beta())
        || !same(table.transverse_scale, dom.transverse_scale())
    {
        return domain("eigenvalue table does not belong to this domain");
    }
    let volume = hyperbolic_volume(dom);
    let cf = CountingFunction::from_table(table, volume, 2)?;
    let lam = pot.height;
    let lhs = cf.riesz_mean(lam, gamma)?;
    let rhs = lt_theorem(ConstantQuery::new(gamma, 2)?)?.value * potential_integral(pot, gamma, 2)?;
    let ratio = lhs / rhs;
    let product_rhs = if gamma < 1.0 {
        Some(thm61_rhs(lam, gamma, 2, volume)?)
    } else {
        None
    };
    Ok(LtReport {
        gamma,
        lambda: lam,
        lhs,
        rhs,
        ratio,
        passed: ratio <= 1.0,
        product_rhs,
        product_passed: product_rhs.map(|r| lhs <= r),
        eigenvalue_count: cf.count(lam),
    })
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth function on `[lo, hi]` vanishing at both ends, with its
/// derivative.
#[derive(Clone)]
pub struct Profile {
    lo: f64,
    hi: f64,
    f: ScalarFn,
    df: ScalarFn,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl Profile {
    pub fn analytic(lo: f64, hi: f64, f: ScalarFn, df: ScalarFn) -> Result<Self> {
        let p = Self { lo, hi, f, df };
        p.validate()?;
        Ok(p)
    }

    /// Derivative taken from the degree-`degree` Chebyshev interpolant of `f`.
    pub fn spectral(lo: f64, hi: f64, f: ScalarFn, degree: usize) -> Result<Self> {
        if !(lo < hi) {
            return domain(format!("empty support [{lo}, {hi}]"));
        }
        let ref_nodes = cheb_nodes(degree)?;
        let d = cheb_diff_matrix(degree)?;
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        let values: Vec<f64> = ref_nodes.iter().map(|s| f(mid + half * s)).collect();
        let slopes: Vec<f64> = (0..=degree)
            .map(|i| {
                d.row(i)
                    .iter()
                    .zip(&values)
                    .map(|(a, v)| a * v)
                    .sum::<f64>()
                    / half
            })
            .collect();
        let df: ScalarFn = Arc::new(move |x| barycentric(&ref_nodes, &slopes, (x - mid) / half));
        Self::analytic(lo, hi, f, df)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return domain(format!("empty support [{}, {}]", self.lo, self.hi));
        }
        let scale = (1..16)
            .map(|i| (self.f)(self.lo + (self.hi - self.lo) * i as f64 / 16.0).abs())
            .fold(0.0, f64::max);
        let ends = (self.f)(self.lo).abs().max((self.f)(self.hi).abs());
        if ends > 1e-10 * scale.max(f64::MIN_POSITIVE) && ends > 0.0 {
            return domain("profile must vanish at both ends of its support");
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    /// `sin(πk(x - lo)/(hi - lo))`.
    pub fn sine(lo: f64, hi: f64, k: u32) -> Result<Self> {
        let w = PI * f64::from(k) / (hi - lo);
        Self::analytic(
            lo,
            hi,
            Arc::new(move |x| (w * (x - lo)).sin()),
            Arc::new(move |x| w * (w * (x - lo)).cos()),
        )
    }

    /// `cos²(π(x - c)/w)` on `[c - w/2, c + w/2]`.
    pub fn cos2_bump(center: f64, width: f64) -> Result<Self> {
        let k = PI / width;
        Self::analytic(
            center - width / 2.0,
            center + width / 2.0,
            Arc::new(move |x| (k * (x - center)).cos().powi(2)),
            Arc::new(move |x| -k * (2.0 * k * (x - center)).sin()),
        )
    }
}

/// Chebyshev-Lobatto barycentric interpolation at `s ∈ [-1, 1]`.
fn barycentric(nodes: &[f64], values: &[f64], s: f64) -> f64 {
    let last = nodes.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (&x, &v)) in nodes.iter().zip(values).enumerate() {
        let diff = s - x;
        if diff == 0.0 {
            return v;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == last {
            w *= 0.5;
        }
        let c = w / diff;
        num += c * v;
        den += c;
    }
    num / den
}

/// `u(x, y) = amplitude · f(x) · g(ln y)`.
#[derive(Debug, Clone)]
pub struct SobolevTrialFunction {
    pub x_profile: Profile,
    pub t_profile: Profile,
    pub amplitude: f64,
}

impl SobolevTrialFunction {
    pub fn new(x_profile: Profile, t_profile: Profile) -> Self {
        Self {
            x_profile,
            t_profile,
            amplitude: 1.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }
}

pub const SOBOLEV_QUADRATURE_TOL: f64 = 1e-10;
pub const SOBOLEV_MAX_NODES: usize = 4096;
/// A margin of `-SOBOLEV_PASS_TOL · RHS` still passes.
pub const SOBOLEV_PASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    /// `‖u‖²`, the squared norm in the hyperbolic measure.
    pub norm_sq: f64,
    /// `∫ (u_x² + u_y²) dx dy`.
    pub gradient: f64,
    /// `∫ u⁴ y⁻¹ dx dy / y²`.
    pub quartic: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub nodes: usize,
}

/// Evaluates both sides of the `d = 2` Sobolev-type inequality
/// `‖u‖² ∫|∇u|² ≥ K_{1,2} ∫ u⁴ y⁻³ dx dy + ‖u‖⁴ / 4` in `(x, t = ln y)`.
pub fn sobolev_check(u: &SobolevTrialFunction, dom: &ProductDomain) -> Result<SobolevReport> {
    let (x0, x1) = u.x_profile.support();
    let (t0, t1) = u.t_profile.support();
    let slack = 1e-12;
    let iv = dom.log_interval();
    if x0 < -slack || x1 > dom.x_length + slack || t0 < iv.alpha() - slack || t1 > iv.beta() + slack
    {
        return domain("trial function support leaves the domain");
    }
    let amp = u.amplitude;
    let ([norm_sq, gradient, quartic], nodes) =
        until_converged(SOBOLEV_QUADRATURE_TOL, 16, SOBOLEV_MAX_NODES, |n| {
            let rule = TensorRule::new((x0, x1), (t0, t1), n)?;
            let fx: Vec<(f64, f64)> = rule
                .xs
                .iter()
                .map(|&x| (amp * u.x_profile.value(x), amp * u.x_profile.derivative(x)))
                .collect();
            let gt: Vec<(f64, f64, f64)> = rule
                .ts
                .iter()
                .map(|&t| (u.t_profile.value(t), u.t_profile.derivative(t), t.exp()))
                .collect();
            let mut acc = [0.0; 3];
            for (&(f, df), &wx) in fx.iter().zip(&rule.wx) {
                let mut inner = [0.0; 3];
                for (&(g, dg, y), &wt) in gt.iter().zip(&rule.wt) {
                    let u = f * g;
                    let ux = df * g;
                    let uy = f * dg / y;
                    let u2 = u * u;
                    // dx dy = y dx dt
                    inner[0] += wt * u2 / y;
                    inner[1] += wt * (ux * ux + uy * uy) * y;
                    inner[2] += wt * u2 * u2 / (y * y);
                }
                for (a, v) in acc.iter_mut().zip(inner) {
                    *a += wx * v;
                }
            }
            if acc.iter().any(|v| !v.is_finite()) {
                return Err(Error::Quadrature("non-finite integrand".into()));
            }
            Ok(acc)
        })?;
    let lhs = norm_sq * gradient;
    let rhs = k_one_d(2)?.value * quartic + norm_sq * norm_sq / 4.0;
    let margin = lhs - rhs;
    Ok(SobolevReport {
        norm_sq,
        gradient,
        quartic,
        lhs,
        rhs,
        margin,
        passed: margin >= -SOBOLEV_PASS_TOL * rhs,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use super::*;

    #[test]
    fn volume_examples() {
        let v = hyperbolic_volume(&ProductDomain::reference());
        assert!((v - PI * (E - 1.0 / E)).abs() < 1e-14);
        assert!((v - 7.384_006_872_882_645).abs() < 1e-14);
        assert_eq!(
            hyperbolic_volume(&ProductDomain::new(1.0, 1.0, 2.0).unwrap()),
            0.5
        );
        let thin = ProductDomain::new(2.0, 1.0, 1.0 + 1e-9).unwrap();
        assert!(hyperbolic_volume(&thin) < 1e-8 * 2.0);
        assert!(ProductDomain::new(1.0, 2.0, 1.0).is_err());
        assert!(ProductDomain::new(1.0, 0.0, 1.0).is_err());
        assert!(ProductDomain::new(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn reference_domain_maps_to_unit_interval() {
        let d = ProductDomain::reference();
        let iv = d.log_interval();
        assert!((iv.alpha() + 1.0).abs() < 1e-15 && (iv.beta() - 1.0).abs() < 1e-15);
        assert_eq!(d.transverse_scale(), 1.0);
    }

    #[test]
    fn potential_integral_examples() {
        let dom = ProductDomain::reference();
        let vol = hyperbolic_volume(&dom);
        let one = BoxPotential::new(dom, 1.0).unwrap();
        assert!((potential_integral(&one, 1.0, 2).unwrap() - vol).abs() < 1e-14);
        let four = BoxPotential::new(dom, 4.0).unwrap();
        assert!((potential_integral(&four, 1.0, 2).unwrap() - 16.0 * vol).abs() < 1e-12);
        let nine = BoxPotential::new(dom, 9.0).unwrap();
        assert!((potential_integral(&nine, 0.5, 2).unwrap() - 27.0 * vol).abs() < 1e-12);
        assert!(potential_integral(&nine, 0.4, 2).is_err());
        assert!(BoxPotential::new(dom, 0.0).is_err());
    }

    #[test]
    fn potential_integral_power_law() {
        let dom = ProductDomain::new(2.0, 0.5, 3.0).unwrap();
        let base = potential_integral(&BoxPotential::new(dom, 1.0).unwrap(), 1.5, 2).unwrap();
        for lam in [0.3, 2.0, 17.5, 1e3] {
            let v = potential_integral(&BoxPotential::new(dom, lam).unwrap(), 1.5, 2).unwrap();
            assert!((v / base / lam.powf(2.5) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn below_first_eigenvalue_lhs_vanishes() {
        let pot = BoxPotential::new(ProductDomain::reference(), 3.0).unwrap();
        let r = lt_check(&pot, 1.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.ratio, 0.0);
        assert!(r.passed);
        assert_eq!(r.eigenvalue_count, 0);
    }

    #[test]
    fn lt_check_at_moderate_height() {
        let pot = BoxPotential::new(ProductDomain::reference(), 40.0).unwrap();
        for gamma in [0.5, 1.0, 1.5] {
            let r = lt_check(&pot, gamma).unwrap();
            assert!(r.lhs > 0.0);
            assert!(r.passed, "{r:?}");
            assert_eq!(
                r.product_passed,
                if gamma < 1.0 { Some(true) } else { None }
            );
        }
    }

    #[test]
    fn table_from_other_domain_is_rejected() {
        let dom = ProductDomain::new(2.0, 1.0, 3.0).unwrap();
        let table = sweep_for(&dom, 30.0, 1e-10).unwrap();
        let pot = BoxPotential::new(ProductDomain::reference(), 20.0).unwrap();
        assert!(lt_check_table(&table, &pot, 1.0).is_err());
        let own = BoxPotential::new(dom, 20.0).unwrap();
        assert!(lt_check_table(&table, &own, 1.0).is_ok());
        let too_high = BoxPotential::new(dom, 31.0).unwrap();
        assert!(matches!(
            lt_check_table(&table, &too_high, 1.0),
            Err(Error::IncompleteTable { .. })
        ));
    }

    fn reference_trial() -> SobolevTrialFunction {
        SobolevTrialFunction::new(
            Profile::sine(0.0, PI, 1).unwrap(),
            Profile::cos2_bump(0.0, 2.0).unwrap(),
        )
    }

    #[test]
    fn sobolev_reference_trial_passes() {
        let r = sobolev_check(&reference_trial(), &ProductDomain::reference()).unwrap();
        assert!(r.margin >= 0.0, "{r:?}");
        assert!(r.passed);
        let norm_sq = PI / 2.0 * COS4_EXP_M1;
        assert!((r.norm_sq / norm_sq - 1.0).abs() < 1e-10);
    }

    // ∫_{-1}^{1} cos⁴(πt/2) e^{-t} dt
    const COS4_EXP_M1: f64 = 0.780_540_971_411_516_2;

    #[test]
    fn sobolev_homogeneity() {
        let dom = ProductDomain::reference();
        let base = sobolev_check(&reference_trial(), &dom).unwrap();
        for c in [-3.0, 0.25, 7.5] {
            let r = sobolev_check(&reference_trial().scaled(c), &dom).unwrap();
            let f = c.powi(4);
            assert!((r.lhs / (f * base.lhs) - 1.0).abs() < 1e-12);
            assert!((r.rhs / (f * base.rhs) - 1.0).abs() < 1e-12);
            assert_eq!(r.margin > 0.0, base.margin > 0.0);
        }
    }

    #[test]
    fn sobolev_zero_function() {
        let r = sobolev_check(&reference_trial().scaled(0.0), &ProductDomain::reference()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.margin), (0.0, 0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn spectral_derivative_matches_analytic() {
        let f: ScalarFn = Arc::new(|x: f64| (PI * x).sin() * (x + 2.0));
        let p = Profile::spectral(0.0, 1.0, f, 40).unwrap();
        for x in [0.0, 0.1, 0.37, 0.5, 0.99, 1.0] {
            let exact = PI * (PI * x).cos() * (x + 2.0) + (PI * x).sin();
            assert!((p.derivative(x) - exact).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn profile_must_vanish_at_ends() {
        let f: ScalarFn = Arc::new(|x: f64| x.cos());
        let df: ScalarFn = Arc::new(|x: f64| -x.sin());
        assert!(Profile::analytic(0.0, 1.0, f, df).is_err());
    }

    #[test]
    fn support_outside_domain_rejected() {
        let u = SobolevTrialFunction::new(
            Profile::sine(0.0, 4.0, 1).unwrap(),
            Profile::cos2_bump(0.0, 2.0).unwrap(),
        );
        assert!(sobolev_check(&u, &ProductDomain::reference()).is_err());
    }
}
