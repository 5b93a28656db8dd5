use crate::error::{Error, Result};
use crate::field::ScalarField;
use std::f64::consts::FRAC_PI_2;

/// Order parameter α ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Trig,
    Power,
    TimePower,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Trig => "trig",
            Family::Power => "power",
            Family::TimePower => "time_power",
            Family::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trig" => Ok(Family::Trig),
            "power" => Ok(Family::Power),
            "time_power" => Ok(Family::TimePower),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// Gain pair (κ₀, κ₁) defining D^α f = κ₁ f + κ₀ f′.
#[derive(Debug, Clone)]
pub struct KappaPair {
    alpha: Alpha,
    kappa0: ScalarField,
    kappa1: ScalarField,
    domain: (f64, f64),
    family: Family,
    omega: Option<f64>,
}

/// c·t^e on t > 0, with derivatives of every order.
fn power_law(c: f64, e: f64) -> ScalarField {
    if c == 0.0 || e == 0.0 {
        return ScalarField::constant(if e == 0.0 { c } else { 0.0 });
    }
    ScalarField::new(format!("{c}*t^{e}"), move |t: f64| c * t.powf(e)).with_lazy_deriv(move || power_law(c * e, e - 1.0))
}

pub fn make_pair(family: Family, alpha: Alpha, omega: Option<f64>) -> Result<KappaPair> {
    let needs_omega = matches!(family, Family::Power | Family::TimePower);
    match (needs_omega, omega) {
        (true, None) => return Err(Error::InvalidArgument(format!("family {} needs omega", family.name()))),
        (false, Some(_)) => return Err(Error::InvalidArgument(format!("family {} takes no omega", family.name()))),
        (true, Some(w)) if !(w > 0.0 && w.is_finite()) => {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {w}")))
        }
        _ => {}
    }
    let a = alpha.value();
    let (k0, k1, domain) = match family {
        Family::Trig => {
            let (k0, k1) = if alpha.is_one() { (1.0, 0.0) } else { ((a * FRAC_PI_2).sin(), (a * FRAC_PI_2).cos()) };
            (ScalarField::constant(k0), ScalarField::constant(k1), (f64::NEG_INFINITY, f64::INFINITY))
        }
        Family::Power => {
            let w = omega.unwrap_or(1.0);
            let (k0, k1) = if alpha.is_one() { (1.0, 0.0) } else { (a * w.powf(1.0 - a), (1.0 - a) * w.powf(a)) };
            (ScalarField::constant(k0), ScalarField::constant(k1), (f64::NEG_INFINITY, f64::INFINITY))
        }
        Family::TimePower => {
            let w = omega.unwrap_or(1.0);
            let (k0, k1) = if alpha.is_one() {
                (ScalarField::constant(1.0), ScalarField::constant(0.0))
            } else {
                (power_law(a * w.powf(1.0 - a), 1.0 - a), power_law((1.0 - a) * w.powf(a), a))
            };
            (k0, k1, (0.0, f64::INFINITY))
        }
        Family::Custom => {
            return Err(Error::InvalidArgument("custom pairs are built with custom_pair".into()));
        }
    };
    Ok(KappaPair {
        alpha,
        kappa0: k0.relabel("kappa0"),
        kappa1: k1.relabel("kappa1"),
        domain,
        family,
        omega,
    })
}

/// A pair from raw fields. Limit conditions in α are not checked for these.
pub fn custom_pair(alpha: Alpha, kappa0: ScalarField, kappa1: ScalarField, domain: (f64, f64)) -> KappaPair {
    KappaPair { alpha, kappa0, kappa1, domain, family: Family::Custom, omega: None }
}

impl KappaPair {
    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn omega(&self) -> Option<f64> {
        self.omega
    }
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
    pub fn kappa0(&self) -> &ScalarField {
        &self.kappa0
    }
    pub fn kappa1(&self) -> &ScalarField {
        &self.kappa1
    }
    /// True for custom pairs, whose α-limits are unverified.
    pub fn caveat(&self) -> bool {
        self.family == Family::Custom
    }

    #[inline]
    pub fn k0(&self, t: f64) -> f64 {
        self.kappa0.eval(t)
    }
    #[inline]
    pub fn k1(&self, t: f64) -> f64 {
        self.kappa1.eval(t)
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.domain.0 && t < self.domain.1
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain { t, lo: self.domain.0, hi: self.domain.1 })
        }
    }

    /// Closure check for interval endpoints (closed forms allow the domain edge).
    pub(crate) fn check_closed(&self, t: f64) -> Result<()> {
        let closed_ok = self.family != Family::Custom && (t == self.domain.0 || t == self.domain.1) && t.is_finite();
        if self.contains(t) || closed_ok {
            Ok(())
        } else {
            Err(Error::Domain { t, lo: self.domain.0, hi: self.domain.1 })
        }
    }

    /// ∫ₛᵗ κ₁/κ₀ in closed form, when the family provides one.
    pub fn kappa_ratio_integral(&self, t: f64, s: f64) -> Option<f64> {
        if self.alpha.is_one() && self.family != Family::Custom {
            return Some(0.0);
        }
        let a = self.alpha.value();
        match self.family {
            Family::Trig | Family::Power => Some(self.k1(0.0) / self.k0(0.0) * (t - s)),
            Family::TimePower => {
                let w = self.omega.unwrap_or(1.0);
                Some((1.0 - a) / (2.0 * a * a) * w.powf(2.0 * a - 1.0) * (t.powf(2.0 * a) - s.powf(2.0 * a)))
            }
            Family::Custom => None,
        }
    }

    /// h₁(t,s) = ∫ₛᵗ 1/κ₀ in closed form, when available.
    pub fn h1_closed(&self, t: f64, s: f64) -> Option<f64> {
        let a = self.alpha.value();
        match self.family {
            Family::Trig | Family::Power => Some((t - s) / self.k0(0.0)),
            Family::TimePower => {
                let w = self.omega.unwrap_or(1.0);
                Some((t.powf(a) - s.powf(a)) / (a * a * w.powf(1.0 - a)))
            }
            Family::Custom => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Kappa0NotPositive,
    Kappa1Negative,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
}

/// Deviation of the gains from their limiting values at an extreme α.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheck {
    pub alpha: f64,
    /// max over the grid of |κ₁ − limit|
    pub kappa1_dev: f64,
    /// max over the grid of |κ₀ − limit|
    pub kappa0_dev: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub limits: Vec<LimitCheck>,
    pub caveat: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.limits.iter().all(|l| l.passed)
    }
}

pub fn validate(pair: &KappaPair, grid: &[f64]) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty validation grid".into()));
    }
    for &t in grid {
        pair.check(t)?;
    }
    let mut violations = Vec::new();
    for &t in grid {
        let (k0, k1) = (pair.k0(t), pair.k1(t));
        if !k0.is_finite() || !k1.is_finite() {
            violations.push(Violation { t, kind: ViolationKind::NonFinite });
        } else if k0 <= 0.0 {
            violations.push(Violation { t, kind: ViolationKind::Kappa0NotPositive });
        } else if k1 < 0.0 {
            violations.push(Violation { t, kind: ViolationKind::Kappa1Negative });
        }
    }
    let mut limits = Vec::new();
    if pair.family != Family::Custom {
        for (a, lim0, lim1) in [(1e-6, 0.0, 1.0), (1.0 - 1e-6, 1.0, 0.0)] {
            let p = make_pair(pair.family, Alpha::new(a)?, pair.omega)?;
            let mut d0: f64 = 0.0;
            let mut d1: f64 = 0.0;
            let mut passed = true;
            for &t in grid {
                let e0 = (p.k0(t) - lim0).abs();
                let e1 = (p.k1(t) - lim1).abs();
                let scale = pair.omega.map_or(1.0, |w| {
                    if pair.family == Family::TimePower {
                        (w * t).abs().max(1.0 / (w * t).abs())
                    } else {
                        w.max(1.0 / w)
                    }
                });
                let tol = 1e-5 * scale.max(1.0) * (1.0 + scale.ln().abs());
                passed &= e0 < tol && e1 < tol;
                d0 = d0.max(e0);
                d1 = d1.max(e1);
            }
            limits.push(LimitCheck { alpha: a, kappa1_dev: d1, kappa0_dev: d0, passed });
        }
    }
    Ok(ValidationReport { violations, limits, caveat: pair.caveat() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_half() {
        let p = make_pair(Family::Trig, Alpha::new(0.5).unwrap(), None).unwrap();
        assert!((p.k1(3.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.k0(-3.0) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn power_alpha_one_is_classical() {
        let p = make_pair(Family::Power, Alpha::new(1.0).unwrap(), Some(3.0)).unwrap();
        assert_eq!((p.k0(2.0), p.k1(2.0)), (1.0, 0.0));
    }

    #[test]
    fn time_power_at_four() {
        let p = make_pair(Family::TimePower, Alpha::new(0.5).unwrap(), Some(1.0)).unwrap();
        assert!((p.k1(4.0) - 1.0).abs() < 1e-15 && (p.k0(4.0) - 1.0).abs() < 1e-15);
        let d = p.kappa0().deriv_at(4.0);
        assert!((d - 0.5 * 0.5 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn omega_rules() {
        let a = Alpha::new(0.5).unwrap();
        assert!(make_pair(Family::Trig, a, Some(1.0)).is_err());
        assert!(make_pair(Family::Power, a, None).is_err());
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(1.2).is_err());
    }

    #[test]
    fn validation_limits_and_domain() {
        let a = Alpha::new(0.4).unwrap();
        let trig = make_pair(Family::Trig, a, None).unwrap();
        let rep = validate(&trig, &[-1.0, 0.0, 2.0]).unwrap();
        assert!(rep.ok());
        let tp = make_pair(Family::TimePower, a, Some(2.0)).unwrap();
        assert!(validate(&tp, &[0.0, 1.0]).is_err());
        assert!(validate(&tp, &[]).is_err());
        assert!(validate(&tp, &[0.5, 1.0, 3.0]).unwrap().ok());
    }

    #[test]
    fn custom_violation_reported() {
        let a = Alpha::new(0.5).unwrap();
        let k0 = ScalarField::new("k0", |t: f64| t - 0.5);
        let p = custom_pair(a, k0, ScalarField::constant(0.3), (0.0, 1.0));
        let rep = validate(&p, &[0.25, 0.5, 0.75]).unwrap();
        assert!(rep.caveat);
        assert_eq!(rep.violations.len(), 2);
        assert_eq!(rep.violations[1].t, 0.5);
    }
}
