//! Lieb-Thirring type constants and the counting-bound coefficients built
//! from them.
//!
//! All functions are pure. Everything that depends on the excess factor
//! `R_{1,1}` lives on [`LtConstants`] so a tightened value can be injected;
//! the free functions use [`R11_DEFAULT`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Best known excess factor over the semiclassical constant for the
/// one-dimensional, `γ = 1` operator-valued inequality (known only as `≤ 1.456…`).
pub const R11_DEFAULT: f64 = 1.456;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments.
///
/// Integers and half-integers use the exact recurrence from `Γ(1)` or
/// `Γ(1/2) = √π`; everything else goes through the Lanczos approximation
/// (`g = 7`, nine terms) with reflection below `1/2`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!(
            "gamma_fn requires a finite positive argument, got {x}"
        ));
    }
    if x <= 171.0 {
        if x.fract() == 0.0 {
            return Ok(rising_product(1.0, 1.0, x));
        }
        if (x - 0.5).fract() == 0.0 {
            return Ok(rising_product(PI.sqrt(), 0.5, x));
        }
    }
    Ok(lanczos(x))
}

/// `start · y · (y+1) · … ` over all `y < end`, beginning at `y = base`.
fn rising_product(start: f64, base: f64, end: f64) -> f64 {
    let mut acc = start;
    let mut y = base;
    while y < end {
        acc *= y;
        y += 1.0;
    }
    acc
}

fn lanczos(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos(1.0 - x));
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * series
}

/// A `(γ, d)` pair: Riesz-mean order and space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantQuery {
    pub gamma: f64,
    pub dim: u32,
}

impl ConstantQuery {
    pub fn new(gamma: f64, dim: u32) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return domain(format!(
                "gamma must be finite and non-negative, got {gamma}"
            ));
        }
        if dim < 1 {
            return domain("dimension must be at least 1");
        }
        Ok(Self { gamma, dim })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Classical,
    Theorem,
    KOneD,
    PolyaCounting,
    ProductCounting,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantValue {
    pub value: f64,
    pub kind: ConstantKind,
}

impl ConstantValue {
    fn new(value: f64, kind: ConstantKind) -> Self {
        Self { value, kind }
    }
}

/// Semiclassical constant `Γ(γ+1) / ((4π)^{d/2} Γ(γ + d/2 + 1))`.
pub fn lt_classical(q: ConstantQuery) -> Result<ConstantValue> {
    let half_d = f64::from(q.dim) / 2.0;
    let num = gamma_fn(q.gamma + 1.0)?;
    let den = (4.0 * PI).powf(half_d) * gamma_fn(q.gamma + half_d + 1.0)?;
    Ok(ConstantValue::new(num / den, ConstantKind::Classical))
}

fn require_dim(d: u32) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    Ok(())
}

/// Constants that depend on the excess factor `R_{1,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LtConstants {
    pub r11: f64,
}

impl Default for LtConstants {
    fn default() -> Self {
        Self { r11: R11_DEFAULT }
    }
}

impl LtConstants {
    pub fn with_r11(r11: f64) -> Result<Self> {
        if !r11.is_finite() || r11 < 1.0 {
            return domain(format!("R_11 must be finite and at least 1, got {r11}"));
        }
        Ok(Self { r11 })
    }

    /// Multiplier applied to the semiclassical constant for a given `γ`.
    ///
    /// Branches are closed on the left: `γ = 1` takes `R`, `γ = 3/2` takes 1.
    pub fn theorem_factor(&self, gamma: f64) -> Result<f64> {
        if gamma >= 1.5 {
            Ok(1.0)
        } else if gamma >= 1.0 {
            Ok(self.r11)
        } else if gamma >= 0.5 {
            Ok(2.0 * self.r11)
        } else {
            Err(Error::OutOfHypothesis { gamma })
        }
    }

    /// Best known constant `L_{γ,d}` for `γ ≥ 1/2`.
    pub fn lt_theorem(&self, q: ConstantQuery) -> Result<ConstantValue> {
        let factor = self.theorem_factor(q.gamma)?;
        let cl = lt_classical(q)?.value;
        Ok(ConstantValue::new(factor * cl, ConstantKind::Theorem))
    }

    /// `K_{1,d} = (2/d) (1 + d/2)^{1 + 2/d} L_{1,d}^{2/d}`.
    pub fn k_one_d(&self, d: u32) -> Result<ConstantValue> {
        require_dim(d)?;
        let df = f64::from(d);
        let l1 = self.lt_theorem(ConstantQuery::new(1.0, d)?)?.value;
        let value = (2.0 / df) * (1.0 + df / 2.0).powf(1.0 + 2.0 / df) * l1.powf(2.0 / df);
        Ok(ConstantValue::new(value, ConstantKind::KOneD))
    }

    /// Coefficient `C(d)` of `N(Λ) ≤ C(d) Λ^{d/2} |Ω|_h`, after eliminating the
    /// auxiliary level at its optimum `Υ = Λ (1 + d/2) / (d/2)`.
    pub fn polya_constant(&self, d: u32) -> Result<ConstantValue> {
        require_dim(d)?;
        let df = f64::from(d);
        let l1 = self.lt_theorem(ConstantQuery::new(1.0, d)?)?.value;
        let value = (1.0 + 2.0 / df).powf(df / 2.0) * (1.0 + df / 2.0) * l1;
        Ok(ConstantValue::new(value, ConstantKind::PolyaCounting))
    }

    /// `product_counting_constant(d) / polya_constant(d)`.
    pub fn constant_ratio(&self, d: u32) -> Result<f64> {
        Ok(product_counting_constant(d)?.value / self.polya_constant(d)?.value)
    }
}

pub fn lt_theorem(q: ConstantQuery) -> Result<ConstantValue> {
    LtConstants::default().lt_theorem(q)
}

pub fn k_one_d(d: u32) -> Result<ConstantValue> {
    LtConstants::default().k_one_d(d)
}

pub fn polya_constant(d: u32) -> Result<ConstantValue> {
    LtConstants::default().polya_constant(d)
}

/// Counting coefficient for product domains, `((d+1)/d)^{(d+1)/2} √d · 2 L^cl_{1/2,d}`,
/// with the auxiliary level eliminated at `Υ = Λ (1 + d) / d`.
pub fn product_counting_constant(d: u32) -> Result<ConstantValue> {
    require_dim(d)?;
    let df = f64::from(d);
    let l_half = lt_classical(ConstantQuery::new(0.5, d)?)?.value;
    let value = ((df + 1.0) / df).powf((df + 1.0) / 2.0) * df.sqrt() * 2.0 * l_half;
    Ok(ConstantValue::new(value, ConstantKind::ProductCounting))
}

pub fn constant_ratio(d: u32) -> Result<f64> {
    LtConstants::default().constant_ratio(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn cl(gamma: f64, dim: u32) -> f64 {
        lt_classical(ConstantQuery::new(gamma, dim).unwrap())
            .unwrap()
            .value
    }

    #[test]
    fn gamma_exact_points() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!(rel(gamma_fn(1.5).unwrap(), 0.886_226_925_452_758) < 1e-15);
    }

    // Reference values from a 40-digit mpmath evaluation.
    #[test]
    fn gamma_against_high_precision_reference() {
        let cases = [
            (0.1, 9.513_507_698_668_731_836_3),
            (0.5, 1.772_453_850_905_516_027_3),
            (2.5, 1.329_340_388_179_137_020_5),
            (7.3, 1_271.423_633_663_909_273_1),
            (12.25, 73_711_509.046_769_949_091),
            (33.7, 3.032_162_654_739_841_602e36),
            (49.5, 8.667_601_843_135_272_345_3e61),
            (50.0, 6.082_818_640_342_675_608_7e62),
        ];
        for (x, expected) in cases {
            let got = gamma_fn(x).unwrap();
            assert!(rel(got, expected) < 1e-12, "x={x}: {got} vs {expected}");
        }
    }

    #[test]
    fn gamma_lanczos_matches_recurrences() {
        for k in 1..40 {
            let x = k as f64 + 0.5;
            assert!(rel(lanczos(x), gamma_fn(x).unwrap()) < 1e-12, "x={x}");
            let x = k as f64;
            assert!(rel(lanczos(x), gamma_fn(x).unwrap()) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn gamma_rejects_bad_arguments() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
        assert!(gamma_fn(f64::INFINITY).is_err());
    }

    #[test]
    fn classical_examples() {
        assert!(rel(cl(0.0, 2), 1.0 / (4.0 * PI)) < 1e-15);
        assert!(rel(cl(1.0, 2), 1.0 / (8.0 * PI)) < 1e-15);
        assert!(rel(cl(0.5, 2), 1.0 / (6.0 * PI)) < 1e-15);
        assert!(rel(cl(2.0, 3), 0.003_859_854_614_946_200_816_9) < 1e-13);
    }

    #[test]
    fn theorem_branches() {
        let q = |g, d| ConstantQuery::new(g, d).unwrap();
        assert_eq!(lt_theorem(q(2.0, 3)).unwrap().value, cl(2.0, 3));
        assert_eq!(lt_theorem(q(1.5, 3)).unwrap().value, cl(1.5, 3));
        let v = lt_theorem(q(1.0, 2)).unwrap().value;
        assert!(rel(v, 0.057_932_399_285_449_902_22) < 1e-13);
        let v = lt_theorem(q(0.5, 2)).unwrap().value;
        assert!(rel(v, 2.0 * 1.456 / (6.0 * PI)) < 1e-14);
        assert_eq!(
            lt_theorem(q(0.49, 2)),
            Err(Error::OutOfHypothesis { gamma: 0.49 })
        );
    }

    #[test]
    fn k_one_d_values() {
        assert!(rel(k_one_d(2).unwrap().value, 0.231_729_597_141_799_608_88) < 1e-13);
        let plain = LtConstants::with_r11(1.0).unwrap();
        assert!(rel(plain.k_one_d(2).unwrap().value, 1.0 / (2.0 * PI)) < 1e-14);
        assert!(rel(k_one_d(4).unwrap().value, 0.101_846_728_839_881_398_28) < 1e-13);
        assert!(k_one_d(1).is_err());
    }

    #[test]
    fn counting_constants() {
        assert!(
            rel(
                polya_constant(2).unwrap().value,
                0.231_729_597_141_799_608_88
            ) < 1e-13
        );
        let plain = LtConstants::with_r11(1.0).unwrap();
        assert!(rel(plain.polya_constant(2).unwrap().value, 1.0 / (2.0 * PI)) < 1e-14);
        let cases = [
            (
                2,
                0.231_729_597_141_799_608_88,
                0.275_664_447_710_896_024_76,
            ),
            (
                3,
                0.052_903_390_184_735_667_496,
                0.061_258_766_157_976_894_39,
            ),
            (
                10,
                9.634_674_325_178_601_727_5e-8,
                1.049_460_092_809_360_457_6e-7,
            ),
            (
                20,
                1.059_806_438_168_447_059_4e-17,
                1.132_277_892_943_207_145_3e-17,
            ),
        ];
        for (d, polya, product) in cases {
            assert!(
                rel(polya_constant(d).unwrap().value, polya) < 1e-12,
                "d={d}"
            );
            assert!(
                rel(product_counting_constant(d).unwrap().value, product) < 1e-12,
                "d={d}"
            );
        }
        let factor = (1.5f64).powf(1.5) * 2f64.sqrt();
        assert!(rel(factor, 3.0 * 3f64.sqrt() / 2.0) < 1e-15);
    }

    #[test]
    fn ratio_values() {
        assert!((constant_ratio(2).unwrap() - 1.189_595_334_868_734_4).abs() < 1e-12);
        for d in 2..=20 {
            assert!(constant_ratio(d).unwrap() > 1.0, "d={d}");
        }
        let plain = LtConstants::with_r11(1.0).unwrap();
        let scaled = plain.constant_ratio(2).unwrap() / constant_ratio(2).unwrap();
        assert!(rel(scaled, 1.456) < 1e-14);
    }

    #[test]
    fn invariants_over_tables() {
        for d in 2..=8 {
            for gamma in [0.5, 1.0, 1.5, 2.0] {
                let lhs = cl(gamma, 1) * cl(gamma + 0.5, d - 1);
                assert!(
                    rel(lhs, cl(gamma, d)) < 1e-12,
                    "product rule γ={gamma} d={d}"
                );
                let q = ConstantQuery::new(gamma, d).unwrap();
                assert!(lt_theorem(q).unwrap().value >= cl(gamma, d));
            }
            let moment = (1.0 + f64::from(d) / 2.0) * cl(1.0, d);
            assert!(rel(moment, cl(0.0, d)) < 1e-12, "moment identity d={d}");
        }
        for gamma in [0.0, 0.5, 1.0] {
            for d in 2..10 {
                assert!(cl(gamma, d + 1) < cl(gamma, d));
            }
        }
    }

    #[test]
    fn query_validation() {
        assert!(ConstantQuery::new(-0.1, 2).is_err());
        assert!(ConstantQuery::new(f64::NAN, 2).is_err());
        assert!(ConstantQuery::new(1.0, 0).is_err());
        assert!(LtConstants::with_r11(0.9).is_err());
    }
}
