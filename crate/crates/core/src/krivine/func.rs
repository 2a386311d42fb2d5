//! Continuous positively homogeneous functions of degree one, with a
//! declared modulus of continuity on the unit sphere.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::signed_power;

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Modulus = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function `φ: ℝⁿ → ℝ` with `φ(αx) = αφ(x)` for `α ≥ 0`.
#[derive(Clone)]
pub struct HomogeneousFn {
    name: String,
    arity: usize,
    eval: Eval,
    modulus: Modulus,
    linear: Option<Vec<f64>>,
}

impl fmt::Debug for HomogeneousFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousFn")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}

fn parse_args(text: &str) -> Result<(&str, Vec<f64>)> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text, Vec::new()));
    };
    let name = text[..open].trim();
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::UnknownFunction(text.to_string()))?;
    let args = inner
        .split(',')
        .map(|a| {
            crate::scalar::Scalar::parse_literal(a.trim())
                .ok_or_else(|| Error::InvalidParameter(format!("bad argument '{a}' in {text}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((name, args))
}

fn holder_pair(alpha: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    // |sp(x,α)·sp(y,1−α) − sp(x',α)·sp(y',1−α)| on the sphere
    move |d: f64| 2f64.powf(alpha) * d.powf(1.0 - alpha) + 2f64.powf(1.0 - alpha) * d.powf(alpha)
}

impl HomogeneousFn {
    /// Wraps an evaluator. `modulus(δ)` must bound `|φ(x) − φ(y)|` for unit
    /// vectors at Euclidean distance at most `δ`.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        modulus: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            arity,
            eval: Arc::new(eval),
            modulus: Arc::new(modulus),
            linear: None,
        }
    }

    /// `x ↦ Σ cᵢxᵢ`.
    pub fn linear(coefficients: Vec<f64>) -> Self {
        let c = coefficients.clone();
        let lip = coefficients.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut f = Self::new(
            "linear",
            coefficients.len(),
            move |x| c.iter().zip(x).map(|(a, b)| a * b).sum(),
            move |d| lip * d,
        );
        f.linear = Some(coefficients);
        f
    }

    /// Looks a function up in the registry: `identity`, `euclid`,
    /// `euclid(n)`, `geomean(α)`, `power(p,q)` and `halfsum_pq(p,q)`.
    pub fn from_name(text: &str) -> Result<Self> {
        let (name, args) = parse_args(text)?;
        let bad = |msg: &str| Error::InvalidParameter(format!("{text}: {msg}"));
        let mut f = match (name, args.as_slice()) {
            ("identity", []) => Self::linear(vec![1.0]),
            ("euclid", []) | ("euclid", [_]) => {
                let n = match args.as_slice() {
                    [n] if *n >= 1.0 && n.fract() == 0.0 => *n as usize,
                    [] => 2,
                    _ => return Err(bad("dimension must be a positive integer")),
                };
                Self::new(
                    "euclid",
                    n,
                    |x| x.iter().map(|v| v * v).sum::<f64>().sqrt(),
                    |d| d,
                )
            }
            ("geomean", [alpha]) => {
                let alpha = *alpha;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(bad("exponent must lie in [0, 1]"));
                }
                Self::new(
                    "geomean",
                    2,
                    move |x| signed_power(x[0], alpha) * signed_power(x[1], 1.0 - alpha),
                    holder_pair(alpha),
                )
            }
            ("power", [p, q]) => {
                let (p, q) = (*p, *q);
                if p < 1.0 || q < 1.0 || ((1.0 / p + 1.0 / q) - 1.0).abs() > 1e-12 {
                    return Err(bad("needs conjugate exponents 1/p + 1/q = 1"));
                }
                Self::new(
                    "power",
                    2,
                    move |x| signed_power(x[0], 1.0 / p) * signed_power(x[1], 1.0 / q),
                    holder_pair(1.0 / p),
                )
            }
            ("halfsum_pq", [p, q]) => {
                let (p, q) = (*p, *q);
                if p < 1.0 || q < 1.0 {
                    return Err(bad("exponents must be at least 1"));
                }
                let r = p / q;
                let modulus: Modulus = if r <= 1.0 {
                    Arc::new(move |d: f64| (1.0 / r) * 2f64.powf(1.0 - r) * d.powf(r))
                } else {
                    Arc::new(move |d: f64| 2f64.powf(1.0 - 1.0 / r) * (r * d).powf(1.0 / r))
                };
                let mut f = Self::new(
                    "halfsum_pq",
                    2,
                    move |x| {
                        let mean = 0.5 * (signed_power(x[0], r) + signed_power(x[1], r));
                        signed_power(mean, 1.0 / r)
                    },
                    |_| 0.0,
                );
                f.modulus = modulus;
                f
            }
            _ => return Err(Error::UnknownFunction(text.to_string())),
        };
        f.name = text.trim().to_string();
        Ok(f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        Ok((self.eval)(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn modulus(&self, delta: f64) -> f64 {
        (self.modulus)(delta)
    }

    /// Coefficients when the function is declared linear.
    pub fn linear_coefficients(&self) -> Option<&[f64]> {
        self.linear.as_deref()
    }

    /// Largest `|φ(αx) − αφ(x)|` over the given points and scales.
    pub fn homogeneity_defect(&self, points: &[Vec<f64>], scales: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            let fx = self.eval_unchecked(x);
            for &a in scales {
                let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
                let defect = (self.eval_unchecked(&ax) - a * fx).abs() / (1.0 + a * fx.abs());
                worst = worst.max(defect);
            }
        }
        worst
    }
}
