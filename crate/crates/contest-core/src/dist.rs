//! Ability distributions: atomless, strictly increasing CDFs on [0, 1]
//! with exact evaluation, inversion, and inverse-transform sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|cdf(a) - u|` for inversion of analytic CDFs.
const INVERT_TOL: f64 = 1e-12;
/// Tolerance on `|cdf(a) - u|` for inversion of the quadrature-backed Beta CDF.
const INVERT_TOL_BETA: f64 = 1e-10;
/// Absolute tolerance of the adaptive quadrature behind the Beta CDF.
const QUAD_TOL: f64 = 1e-10;

/// The common-knowledge ability distribution F.
///
/// Supported shapes: the uniform distribution, Beta(alpha, beta), and a
/// strictly increasing piecewise-linear CDF given by knots. All are
/// validated at construction so that `cdf(0) = 0`, `cdf(1) = 1`, and the
/// CDF is strictly increasing on [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpec", into = "DistSpec")]
pub struct AbilityDistribution {
    kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Uniform,
    Beta {
        alpha: f64,
        beta: f64,
        /// Cached kernel mass over [0, 1], i.e. the Beta function B(alpha, beta).
        norm: f64,
    },
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

/// Wire representation: `{"kind": "uniform" | "beta" | "piecewise", ...}`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistSpec {
    Uniform {},
    Beta { alpha: f64, beta: f64 },
    Piecewise { knots: Vec<[f64; 2]> },
}

impl TryFrom<DistSpec> for AbilityDistribution {
    type Error = Error;

    fn try_from(spec: DistSpec) -> Result<Self> {
        match spec {
            DistSpec::Uniform {} => Ok(Self::uniform()),
            DistSpec::Beta { alpha, beta } => Self::beta(alpha, beta),
            DistSpec::Piecewise { knots } => {
                Self::piecewise_linear(knots.into_iter().map(|[x, f]| (x, f)).collect())
            }
        }
    }
}

impl From<AbilityDistribution> for DistSpec {
    fn from(d: AbilityDistribution) -> Self {
        match d.kind {
            Kind::Uniform => DistSpec::Uniform {},
            Kind::Beta { alpha, beta, .. } => DistSpec::Beta { alpha, beta },
            Kind::PiecewiseLinear { knots } => DistSpec::Piecewise {
                knots: knots.into_iter().map(|(x, f)| [x, f]).collect(),
            },
        }
    }
}

impl AbilityDistribution {
    pub fn uniform() -> Self {
        Self { kind: Kind::Uniform }
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta distribution needs alpha > 0 and beta > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        let norm = beta_kernel_integral(1.0, alpha, beta);
        Ok(Self {
            kind: Kind::Beta { alpha, beta, norm },
        })
    }

    /// A strictly increasing piecewise-linear CDF. The knot list must start
    /// at (0, 0), end at (1, 1), and be strictly increasing in both
    /// coordinates (atomless, strictly increasing F).
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidConfig(
                "piecewise CDF needs at least two knots".into(),
            ));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidConfig(format!(
                "piecewise CDF must run from (0,0) to (1,1), got {first:?} .. {last:?}"
            )));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::InvalidConfig(format!(
                    "piecewise knots must be strictly increasing in x and F, got {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            kind: Kind::PiecewiseLinear { knots },
        })
    }

    /// F(a) for `a` in [0, 1].
    pub fn cdf(&self, a: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("ability {a} outside [0, 1]")));
        }
        Ok(self.cdf_raw(a))
    }

    /// F^{-1}(u) for `u` in [0, 1], by bracketed root-finding on the CDF.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("probability {u} outside [0, 1]")));
        }
        Ok(self.inverse_raw(u))
    }

    /// Inverse-transform samples, deterministic given the stream state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_raw(rng.gen::<f64>())
    }

    pub(crate) fn cdf_raw(&self, a: f64) -> f64 {
        match &self.kind {
            Kind::Uniform => a,
            Kind::Beta { alpha, beta, norm } => {
                (beta_kernel_integral(a, *alpha, *beta) / norm).clamp(0.0, 1.0)
            }
            Kind::PiecewiseLinear { knots } => {
                let idx = match knots.binary_search_by(|k| k.0.partial_cmp(&a).unwrap()) {
                    Ok(i) => return knots[i].1,
                    Err(i) => i,
                };
                let (x0, f0) = knots[idx - 1];
                let (x1, f1) = knots[idx];
                f0 + (f1 - f0) * (a - x0) / (x1 - x0)
            }
        }
    }

    pub(crate) fn inverse_raw(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Uniform => u,
            Kind::Beta { alpha, beta, norm } => invert_beta(u, *alpha, *beta, *norm),
            Kind::PiecewiseLinear { knots } => {
                let idx = match knots.binary_search_by(|k| k.1.partial_cmp(&u).unwrap()) {
                    Ok(i) => return knots[i].0,
                    Err(i) => i,
                };
                let (x0, f0) = knots[idx - 1];
                let (x1, f1) = knots[idx];
                x0 + (x1 - x0) * (u - f0) / (f1 - f0)
            }
        }
    }
}

/// Integral of the Beta kernel t^(alpha-1) (1-t)^(beta-1) over [0, x].
///
/// The kernel can be singular (but integrable) at the endpoints when
/// alpha < 1 or beta < 1, so the segment near each endpoint is
/// regularized by substitution before quadrature: u = t^alpha near 0 and
/// v = (1-t)^beta near 1 turn both pieces into bounded smooth integrands.
fn beta_kernel_integral(x: f64, alpha: f64, beta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let split = 0.5f64.min(x);
    // [0, split]: (1/alpha) * Integral of (1 - u^(1/alpha))^(beta-1) du over [0, split^alpha]
    let left = adaptive_simpson(
        &|u: f64| (1.0 - u.powf(1.0 / alpha)).powf(beta - 1.0),
        0.0,
        split.powf(alpha),
        QUAD_TOL,
    ) / alpha;
    if x <= 0.5 {
        return left;
    }
    // [0.5, x]: (1/beta) * Integral of (1 - v^(1/beta))^(alpha-1) dv over [(1-x)^beta, 0.5^beta]
    let right = adaptive_simpson(
        &|v: f64| (1.0 - v.powf(1.0 / beta)).powf(alpha - 1.0),
        (1.0 - x).powf(beta),
        0.5f64.powf(beta),
        QUAD_TOL,
    ) / beta;
    left + right
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Safeguarded Newton inversion of the Beta CDF: bisection bracket with
/// Newton steps through the closed-form density.
fn invert_beta(u: f64, alpha: f64, beta: f64, norm: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let cdf = |x: f64| (beta_kernel_integral(x, alpha, beta) / norm).clamp(0.0, 1.0);
    let pdf = |x: f64| x.powf(alpha - 1.0) * (1.0 - x).powf(beta - 1.0) / norm;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = 0.5;
    for _ in 0..100 {
        let fx = cdf(x) - u;
        if fx.abs() <= INVERT_TOL_BETA {
            return x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo < 1e-15 {
            break;
        }
        let d = pdf(x);
        let newton = x - fx / d;
        x = if d.is_finite() && d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// Residual tolerance met by `inverse_cdf` for this distribution shape.
/// Analytic CDFs invert to machine-level residuals; the quadrature-backed
/// Beta CDF inverts to 1e-7 or better.
pub fn inversion_tolerance(d: &AbilityDistribution) -> f64 {
    match d.kind {
        Kind::Beta { .. } => 1e-7,
        _ => INVERT_TOL.max(1e-9),
    }
}
