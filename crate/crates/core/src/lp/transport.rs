//! The bijection `θ: f ↦ f^{p/q}` between the `L_p` and `L_q` structures on
//! one underlying set, and the duality pairing.

use crate::error::{Error, Result};
use crate::measure::{check_exponent, ExtensionPair, LatticeElement};
use crate::scalar::{signed_power, sum, Real, Scalar};

use super::{check_interval, check_unit, f_zero, interval_cond_exp};

/// `θf = f^{p/q}` atomwise with the sign-preserving power.
pub fn lq_transport<T: Real>(f: &LatticeElement<T>, p: T, q: T) -> Result<LatticeElement<T>> {
    check_exponent(p)?;
    check_exponent(q)?;
    if p == q {
        return Ok(f.clone());
    }
    let alpha = p / q;
    Ok(f.map(|v| signed_power(*v, alpha)))
}

/// The half-sum of the `L_q` structure read back in `L_p`:
/// `(½[x^{p/q} + y^{p/q}])^{q/p}`.
pub fn transported_half_sum<T: Real>(
    x: &LatticeElement<T>,
    y: &LatticeElement<T>,
    p: T,
    q: T,
) -> Result<LatticeElement<T>> {
    let tx = lq_transport(x, p, q)?;
    let ty = lq_transport(y, p, q)?;
    Ok(tx.half_sum(&ty)?.map(|v| signed_power(*v, q / p)))
}

fn conjugate_exponent<T: Real>(q: T) -> Result<T> {
    if !(q > T::one()) || !q.is_finite() {
        return Err(Error::OutOfRange {
            name: "q",
            value: Scalar::to_f64(&q),
            range: "(1, inf)",
        });
    }
    Ok(q / (q - T::one()))
}

/// `⟨f^{p/q}, g^{p/q'}⟩` computed as `∫ (f^{1/q}·g^{1/q'})^p`.
///
/// The integrand is the product of the transported elements
/// `θf = f^{p/q}` and `θ'g = g^{p/q'}`, so the result agrees with the direct
/// integral of `θf·θ'g` for every `p`.
pub fn duality_pairing<T: Real>(
    f: &LatticeElement<T>,
    g: &LatticeElement<T>,
    p: T,
    q: T,
) -> Result<T> {
    check_exponent(p)?;
    let q_dual = conjugate_exponent(q)?;
    let product = f.zip_with(g, |a, b| {
        signed_power(signed_power(*a, q.recip()) * signed_power(*b, q_dual.recip()), p)
    })?;
    Ok(product.integral())
}

/// `(∫_{E'} f·h^{p−1}, ∫_E E[f|E]·h^{p−1})` for `h ∈ E`; equal for `p > 1`.
pub fn cond_exp_pairing_check<T: Real>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    p: T,
    h: &LatticeElement<T>,
) -> Result<(T, T)> {
    check_exponent(p)?;
    if p == T::one() {
        return Err(Error::InvalidExponent(1.0));
    }
    let power = h.map(|v| signed_power(*v, p - T::one()));
    let lhs = f.mul(&pair.embed(&power)?)?.integral();
    let rhs = pair.cond_exp_base(f)?.mul(&power)?.integral();
    Ok((lhs, rhs))
}

/// Deviation of the transported interval expectation at one exponent `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportDeviation<T> {
    pub q: T,
    /// `sup_ω |E_{[t,s]}[f^{1/q}|E]^q − E_{[t,s]}[f|E]|`.
    pub sup_deviation: T,
    /// The same deviation integrated over `Ω`.
    pub l1_deviation: T,
    /// `sup_ω ε(q)·f₀(ω)`, an a priori bound on `sup_deviation`.
    pub bound: T,
}

/// `max_{0≤u≤r} |u^α − u|` for `α > 0`.
fn power_gap<T: Real>(alpha: T, r: T) -> T {
    let gap = |u: T| (u.powf(alpha) - u).abs();
    let mut best = gap(r);
    if alpha != T::one() {
        // Critical point of u^α − u.
        let u = alpha.powf((T::one() - alpha).recip());
        if u > T::zero() && u < r {
            best = best.max(gap(u));
        }
    }
    best
}

/// For each `q` in `q_list`, the `L_q` interval expectation transported
/// back to the ambient `L_1` structure, compared against the `L_1` one.
///
/// After normalising `f₀ = 1` the slices over `[t, s]` lie in
/// `[−1/t, 1/(1−s)]`; with `M = max(1/t, 1/(1−s))` and `L = s − t` the
/// deviation is at most `L·gap(1/q, M) + gap(q, L·M^{1/q})`.
pub fn transported_interval_convergence<T: Real>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    t: T,
    s: T,
    q_list: &[T],
) -> Result<Vec<TransportDeviation<T>>> {
    check_unit("t", &t, true)?;
    check_unit("s", &s, true)?;
    check_interval(&t, &s)?;
    let target = interval_cond_exp(f, pair, &t, &s)?;
    let f0 = f_zero(f, pair)?;
    let big_m = t.recip().max((T::one() - s).recip());
    let len = s - t;
    let f0_max = f0.sup_norm();
    q_list
        .iter()
        .map(|&q| {
            conjugate_exponent(q)?;
            let theta = lq_transport(f, T::one(), q)?;
            let transported = interval_cond_exp(&theta, pair, &t, &s)?;
            let back = transported.map(|v| signed_power(*v, q));
            let diff = back.sub(&target)?.abs();
            let eps = len * power_gap(q.recip(), big_m) + power_gap(q, len * big_m.powf(q.recip()));
            Ok(TransportDeviation {
                q,
                sup_deviation: diff.sup_norm(),
                l1_deviation: sum(diff.values().iter().zip(diff.space().weights()).map(|(d, w)| *d * *w)),
                bound: eps * f0_max,
            })
        })
        .collect()
}
