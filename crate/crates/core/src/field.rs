use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Maker = Arc<dyn Fn() -> ScalarField + Send + Sync>;

/// Default relative step for finite-difference derivatives.
pub const FD_STEP: f64 = 1e-5;
/// Step used when differentiating a field that is itself a finite-difference result.
pub const FD_STEP_COARSE: f64 = 1e-3;

struct LazyDeriv {
    cell: OnceLock<ScalarField>,
    make: Maker,
}

/// A real function of one variable with an optional closed-form derivative.
///
/// The derivative is itself a `ScalarField`, built lazily, so chains of closed
/// forms (second, third derivatives) are available when every link supplies one.
#[derive(Clone)]
pub struct ScalarField {
    eval: Eval,
    deriv: Option<Arc<LazyDeriv>>,
    label: Arc<str>,
    fd_step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("has_deriv", &self.has_deriv())
            .finish()
    }
}

/// Fourth-order central difference with one Richardson step.
pub fn central_diff(f: &dyn Fn(f64) -> f64, t: f64, rel_step: f64) -> f64 {
    let h = rel_step * t.abs().max(1.0);
    let d = |h: f64| (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
    let d1 = d(h);
    let d2 = d(0.5 * h);
    d2 + (d2 - d1) / 15.0
}

impl ScalarField {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            eval: Arc::new(f),
            deriv: None,
            label: Arc::from(label.into()),
            fd_step: FD_STEP,
        }
    }

    /// Attach a closed-form derivative.
    pub fn with_deriv(self, d: ScalarField) -> Self {
        self.with_lazy_deriv(move || d.clone())
    }

    /// Attach a derivative that is built on first use.
    pub fn with_lazy_deriv(mut self, make: impl Fn() -> ScalarField + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(LazyDeriv {
            cell: OnceLock::new(),
            make: Arc::new(make),
        }));
        self
    }

    /// Drop the closed-form derivative so that finite differences are used.
    pub fn without_deriv(&self) -> Self {
        ScalarField {
            eval: self.eval.clone(),
            deriv: None,
            label: self.label.clone(),
            fd_step: self.fd_step,
        }
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = Arc::from(label.into());
        self
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(format!("{c}"), move |_| c).with_lazy_deriv(|| ScalarField::constant(0.0))
    }

    pub fn zero() -> Self {
        ScalarField::constant(0.0)
    }

    /// The identity map t ↦ t.
    pub fn identity() -> Self {
        ScalarField::new("t", |t| t).with_deriv(ScalarField::constant(1.0))
    }

    pub fn sin() -> Self {
        ScalarField::new("sin", f64::sin).with_lazy_deriv(ScalarField::cos)
    }

    pub fn cos() -> Self {
        ScalarField::new("cos", f64::cos).with_lazy_deriv(|| -ScalarField::sin())
    }

    pub fn exp() -> Self {
        ScalarField::new("exp", f64::exp).with_lazy_deriv(ScalarField::exp)
    }

    /// Polynomial with coefficients in increasing degree.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c: Vec<f64> = coeffs.to_vec();
        let label = format!("poly{c:?}");
        let cc = c.clone();
        ScalarField::new(label, move |t| cc.iter().rev().fold(0.0, |acc, &a| acc * t + a)).with_lazy_deriv(move || {
            if c.len() <= 1 {
                ScalarField::constant(0.0)
            } else {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect();
                ScalarField::polynomial(&d)
            }
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    /// The closed-form derivative field, if present.
    pub fn closed_deriv(&self) -> Option<&ScalarField> {
        self.deriv.as_ref().map(|d| d.cell.get_or_init(|| (d.make)()))
    }

    /// Classical derivative at t: closed form when present, else central differences.
    pub fn deriv_at(&self, t: f64) -> f64 {
        match self.closed_deriv() {
            Some(d) => d.eval(t),
            None => central_diff(&*self.eval, t, self.fd_step),
        }
    }

    /// Derivative as a field. Without a closed form, the result evaluates by
    /// finite differences and carries a coarser step for further differentiation.
    pub fn derivative(&self) -> ScalarField {
        match self.closed_deriv() {
            Some(d) => d.clone(),
            None => {
                let f = self.eval.clone();
                let step = self.fd_step;
                ScalarField::new(format!("d({})", self.label), move |t| central_diff(&*f, t, step))
                    .with_fd_step(FD_STEP_COARSE.max(step))
            }
        }
    }

    /// outer ∘ inner, with the chain rule when both carry derivatives.
    pub fn compose(outer: &ScalarField, inner: &ScalarField) -> ScalarField {
        let (o, i) = (outer.clone(), inner.clone());
        let f = ScalarField::new(format!("{}∘{}", outer.label, inner.label), move |t| o.eval(i.eval(t)))
            .with_fd_step(outer.fd_step.max(inner.fd_step));
        if outer.has_deriv() && inner.has_deriv() {
            let (o, i) = (outer.clone(), inner.clone());
            f.with_lazy_deriv(move || {
                let od = o.closed_deriv().expect("checked").clone();
                ScalarField::compose(&od, &i) * i.closed_deriv().expect("checked").clone()
            })
        } else {
            f
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self * &ScalarField::constant(c)
    }

    pub fn powi(&self, n: i32) -> ScalarField {
        let a = self.clone();
        let f = ScalarField::new(format!("({})^{n}", self.label), move |t| a.eval(t).powi(n)).with_fd_step(self.fd_step);
        if self.has_deriv() {
            let a = self.clone();
            f.with_lazy_deriv(move || {
                let d = a.closed_deriv().expect("checked").clone();
                if n == 0 {
                    ScalarField::constant(0.0)
                } else {
                    a.powi(n - 1).scale(n as f64) * d
                }
            })
        } else {
            f
        }
    }

    pub fn recip(&self) -> ScalarField {
        &ScalarField::constant(1.0) / self
    }

    fn combine(
        a: &ScalarField,
        b: &ScalarField,
        label: String,
        op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d: Option<Box<dyn Fn(&ScalarField, &ScalarField) -> ScalarField + Send + Sync>>,
    ) -> ScalarField {
        let (x, y) = (a.clone(), b.clone());
        let f = ScalarField::new(label, move |t| op(x.eval(t), y.eval(t))).with_fd_step(a.fd_step.max(b.fd_step));
        match d {
            Some(d) if a.has_deriv() && b.has_deriv() => {
                let (x, y) = (a.clone(), b.clone());
                f.with_lazy_deriv(move || d(&x, &y))
            }
            _ => f,
        }
    }
}

fn dv(f: &ScalarField) -> ScalarField {
    f.closed_deriv().expect("derivative checked").clone()
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        ScalarField::combine(
            self,
            rhs,
            format!("({} + {})", self.label, rhs.label),
            |a, b| a + b,
            Some(Box::new(|x, y| &dv(x) + &dv(y))),
        )
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        ScalarField::combine(
            self,
            rhs,
            format!("({} - {})", self.label, rhs.label),
            |a, b| a - b,
            Some(Box::new(|x, y| &dv(x) - &dv(y))),
        )
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        ScalarField::combine(
            self,
            rhs,
            format!("{} * {}", self.label, rhs.label),
            |a, b| a * b,
            Some(Box::new(|x, y| &(&dv(x) * y) + &(x * &dv(y)))),
        )
    }
}

impl Div for &ScalarField {
    type Output = ScalarField;
    fn div(self, rhs: &ScalarField) -> ScalarField {
        ScalarField::combine(
            self,
            rhs,
            format!("{} / {}", self.label, rhs.label),
            |a, b| a / b,
            Some(Box::new(|x, y| &(&(&dv(x) * y) - &(x * &dv(y))) / &(y * y))),
        )
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        let a = self.clone();
        let f = ScalarField::new(format!("-{}", self.label), move |t| -a.eval(t)).with_fd_step(self.fd_step);
        if self.has_deriv() {
            let a = self.clone();
            f.with_lazy_deriv(move || -dv(&a))
        } else {
            f
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                (&self).$m(rhs)
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                self.$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}
