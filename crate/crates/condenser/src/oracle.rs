//! Closed-form and quadrature oracles: radial condenser capacities, the
//! normalized radial Green profile, one-dimensional weighted formulas and
//! the volume-growth hyperbolicity classifier. These are the ground truth
//! the grid computations are checked against.

use crate::error::{reject, Error, Result};
use crate::model::{RadialWeight, WeightedGraph};

/// Surface measure of the unit sphere in R^n: 2 π^{n/2} / Γ(n/2),
/// evaluated with exact integer / half-integer Gamma values.
pub fn unit_sphere_area(n: usize) -> Result<f64> {
    if n < 2 {
        return reject("dimension must be at least 2");
    }
    let pi = std::f64::consts::PI;
    // Γ(n/2): for even n = 2k it is (k-1)!, for odd n = 2k+1 it is
    // (2k)! √π / (4^k k!).
    let gamma_half = if n % 2 == 0 {
        let k = n / 2;
        (1..k).map(|i| i as f64).product::<f64>()
    } else {
        let k = n / 2; // n = 2k + 1
        let mut v = pi.sqrt();
        // Γ(1/2 + k) = (2k-1)!! / 2^k · √π
        for i in 0..k {
            v *= (2 * i + 1) as f64 / 2.0;
        }
        v
    };
    Ok(2.0 * pi.powf(n as f64 / 2.0) / gamma_half)
}

/// Condenser capacity of the closed ball of radius r inside the open ball
/// of radius s in R^n, unweighted unless `weight` is given.
///
/// Unweighted closed forms:
///   p ≠ n:  ω_{n-1} ((n-p)/(p-1))^{p-1} |r^{(p-n)/(p-1)} - s^{(p-n)/(p-1)}|^{1-p}
///   p = n:  ω_{n-1} (log(s/r))^{1-n}
/// s = ∞ is allowed; for p ≥ n and w ≡ 1 the whole-space capacity is 0
/// (the parabolic case). Weighted input is handled by the one-dimensional
/// Euler-Lagrange quadrature (∫_r^s (ω ρ^{n-1} w)^{1/(1-p)} dρ)^{1-p}.
pub fn radial_condenser_capacity(
    n: usize,
    p: f64,
    r: f64,
    s: f64,
    weight: Option<&RadialWeight>,
) -> Result<f64> {
    if n < 2 {
        return reject("dimension must be at least 2");
    }
    if !(p > 1.0) {
        return reject("exponent p must be > 1");
    }
    if !(r > 0.0) || r >= s {
        return reject(format!("need 0 < r < s, got r={r}, s={s}"));
    }
    let omega = unit_sphere_area(n)?;
    if let Some(w) = weight {
        let q = 1.0 / (1.0 - p);
        let nm1 = (n - 1) as i32;
        let integrand = move |rho: f64| (omega * rho.powi(nm1) * w.eval(rho)).powf(q);
        let integral = if s.is_infinite() {
            match integrate_tail(&integrand, r, 1e-12)? {
                TailIntegral::Convergent(v) => v,
                TailIntegral::Divergent { .. } => return Ok(0.0),
            }
        } else {
            adaptive_quad(&integrand, r, s, 1e-12)?
        };
        return Ok(integral.powf(1.0 - p));
    }

    let nf = n as f64;
    if (p - nf).abs() < 1e-12 {
        if s.is_infinite() {
            return Ok(0.0);
        }
        return Ok(omega * (s / r).ln().powf(1.0 - nf));
    }
    let expo = (p - nf) / (p - 1.0);
    if s.is_infinite() {
        if p > nf {
            return Ok(0.0);
        }
        let gap = r.powf(expo);
        return Ok(omega * ((nf - p) / (p - 1.0)).powf(p - 1.0) * gap.powf(1.0 - p));
    }
    let gap = (r.powf(expo) - s.powf(expo)).abs();
    Ok(omega * ((nf - p) / (p - 1.0)).abs().powf(p - 1.0) * gap.powf(1.0 - p))
}

/// Normalization constant of the radial p-Green profile in R^n (p < n),
/// fixed by requiring cap of every superlevel ball to equal b^{1-p}.
pub fn rn_green_constant(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return reject("dimension must be at least 2");
    }
    if !(p > 1.0 && p < n as f64) {
        return reject(format!("radial Green profile needs 1 < p < n, got p={p}, n={n}"));
    }
    let omega = unit_sphere_area(n)?;
    Ok((p - 1.0) / (n as f64 - p) * omega.powf(1.0 / (1.0 - p)))
}

/// The normalized p-Green profile C_{n,p} ρ^{(p-n)/(p-1)} at distance ρ.
pub fn rn_green(n: usize, p: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return reject("distance must be positive");
    }
    let c = rn_green_constant(n, p)?;
    Ok(c * rho.powf((p - n as f64) / (p - 1.0)))
}

/// Capacity of the superlevel set {u ≥ b} of the radial Green profile,
/// relative to the whole space. Equals b^{1-p} by construction; exposed so
/// tests can audit the normalization through an independent route.
pub fn rn_green_level_capacity(n: usize, p: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return reject("level must be positive");
    }
    let c = rn_green_constant(n, p)?;
    let rho_b = (b / c).powf((p - 1.0) / (p - n as f64));
    radial_condenser_capacity(n, p, rho_b, f64::INFINITY, None)
}

/// One-dimensional weighted half-line potential: α_r = ∫_r^∞ w^{1/(1-p)} dt
/// and u_r(x) = α_r^{-1} ∫_x^∞ w^{1/(1-p)} dt, which is p-harmonic on
/// (r, ∞) with boundary values 1 at r and 0 at infinity. Its energy
/// ∫_r^∞ w |u_r'|^p dt equals α_r^{1-p}.
#[derive(Debug, Clone)]
pub struct OneDWeighted {
    weight: RadialWeight,
    pub p: f64,
    pub r: f64,
    pub alpha: f64,
    /// Capacity-style energy α_r^{1-p}.
    pub energy: f64,
}

pub fn oned_weighted(weight: &RadialWeight, r: f64, p: f64) -> Result<OneDWeighted> {
    if !(p > 1.0) {
        return reject("exponent p must be > 1");
    }
    let q = 1.0 / (1.0 - p);
    let f = {
        let w = weight.clone();
        move |t: f64| w.eval(t).powf(q)
    };
    let alpha = match integrate_tail(&f, r, 1e-12)? {
        TailIntegral::Convergent(v) => v,
        TailIntegral::Divergent { exponent } => {
            return reject(format!(
                "w^(1/(1-p)) has a divergent tail (fitted exponent {exponent:.3}); \
                 the half-line potential does not exist"
            ));
        }
    };
    let energy = alpha.powf(1.0 - p);

    // Internal audit through a second arithmetic route: quadrature of the
    // energy integrand w |u'|^p, evaluated in log space so rapidly growing
    // weights cannot overflow to inf · 0.
    let audit = {
        let w = weight.clone();
        let ln_alpha = alpha.ln();
        move |t: f64| (q * w.eval(t).ln() - p * ln_alpha).exp()
    };
    let audit_energy = match integrate_tail(&audit, r, 1e-12)? {
        TailIntegral::Convergent(v) => v,
        TailIntegral::Divergent { .. } => {
            return Err(Error::InternalConsistency(
                "energy integrand diverged although alpha converged".into(),
            ));
        }
    };
    if (audit_energy - energy).abs() > 1e-8 * energy.abs().max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "energy identity failed: {audit_energy} vs {energy}"
        )));
    }

    Ok(OneDWeighted {
        weight: weight.clone(),
        p,
        r,
        alpha,
        energy,
    })
}

impl OneDWeighted {
    /// u_r(x) for x ≥ r; 1 at the left endpoint, decaying to 0.
    pub fn u(&self, x: f64) -> Result<f64> {
        if x < self.r {
            return reject("u_r is defined on [r, infinity)");
        }
        let q = 1.0 / (1.0 - self.p);
        let w = self.weight.clone();
        let f = move |t: f64| w.eval(t).powf(q);
        let tail = match integrate_tail(&f, x, 1e-12)? {
            TailIntegral::Convergent(v) => v,
            TailIntegral::Divergent { .. } => {
                return Err(Error::InternalConsistency("tail diverged past r".into()))
            }
        };
        Ok(tail / self.alpha)
    }
}

/// Volume growth profile μ(B(x₀, ρ)): analytic power law or tabulated.
#[derive(Debug, Clone)]
pub enum VolumeGrowthProfile {
    /// μ(B(x₀, ρ)) = c ρ^q.
    PowerLaw { c: f64, q: f64 },
    /// Sampled (ρ, μ) pairs, strictly increasing in ρ and nondecreasing in μ.
    Tabulated(Vec<(f64, f64)>),
}

impl VolumeGrowthProfile {
    /// Lebesgue measure growth of unweighted R^n.
    pub fn lebesgue(n: usize) -> Result<Self> {
        let omega = unit_sphere_area(n)?;
        Ok(VolumeGrowthProfile::PowerLaw {
            c: omega / n as f64,
            q: n as f64,
        })
    }

    /// Tabulates ball measures of a graph around `base` at the given radii.
    pub fn from_graph(graph: &WeightedGraph, base: usize, radii: &[f64]) -> Result<Self> {
        let mut samples = Vec::with_capacity(radii.len());
        for &r in radii {
            samples.push((r, crate::model::ball_measure(graph, base, r)?));
        }
        Ok(VolumeGrowthProfile::Tabulated(samples))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Hyperbolic,
    Parabolic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Hyperbolic => write!(f, "hyperbolic"),
            Verdict::Parabolic => write!(f, "parabolic"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    /// (P, ∫_1^P (ρ/μ(B_ρ))^{1/(p-1)} dρ) — the truncated criterion integral.
    pub integral_estimate: Option<(f64, f64)>,
    /// Fitted (or analytic) volume-growth exponent.
    pub growth_exponent: Option<f64>,
}

/// Decides p-hyperbolicity from volume growth: the space is hyperbolic
/// exactly when ∫_1^∞ (ρ/μ(B(x₀,ρ)))^{1/(p-1)} dρ converges. Power-law
/// profiles are decided analytically (hyperbolic iff (q-1)/(p-1) > 1, with
/// the borderline q = p parabolic through a logarithmic divergence).
/// Tabulated profiles are decided by a log-log tail fit over the last
/// decade of samples, with an inconclusive band of ±0.05 around the
/// threshold exponent.
pub fn classify_hyperbolicity(profile: &VolumeGrowthProfile, p: f64) -> Result<Classification> {
    if !(p > 1.0) {
        return reject("exponent p must be > 1");
    }
    match profile {
        VolumeGrowthProfile::PowerLaw { c, q } => {
            if !(*c > 0.0) || !(*q > 0.0) {
                return reject("power-law profile needs positive coefficient and exponent");
            }
            let theta = (q - 1.0) / (p - 1.0);
            let verdict = if theta > 1.0 {
                Verdict::Hyperbolic
            } else {
                Verdict::Parabolic
            };
            // Truncated integral, analytic: ∫_1^P c^{-1/(p-1)} ρ^{(1-q)/(p-1)} dρ.
            let cap_p: f64 = 1e3;
            let a = -1.0 / (p - 1.0);
            let expo = (1.0 - q) / (p - 1.0);
            let value = if (expo + 1.0).abs() < 1e-14 {
                c.powf(a) * cap_p.ln()
            } else {
                c.powf(a) * (cap_p.powf(expo + 1.0) - 1.0) / (expo + 1.0)
            };
            Ok(Classification {
                verdict,
                integral_estimate: Some((cap_p, value)),
                growth_exponent: Some(*q),
            })
        }
        VolumeGrowthProfile::Tabulated(samples) => {
            if samples.len() < 4 {
                return reject("tabulated profile needs at least 4 samples");
            }
            for w in samples.windows(2) {
                if !(w[1].0 > w[0].0) {
                    return reject("profile radii must be strictly increasing");
                }
                if w[1].1 < w[0].1 {
                    return reject("profile must be nondecreasing in rho");
                }
            }
            if samples.iter().any(|&(_, m)| !(m > 0.0)) {
                return reject("profile measures must be positive");
            }
            let rho_max = samples.last().unwrap().0;
            let tail: Vec<(f64, f64)> = samples
                .iter()
                .copied()
                .filter(|&(r, _)| r >= rho_max / 10.0)
                .collect();
            if tail.len() < 3 {
                return reject("need at least 3 samples in the last decade for the tail fit");
            }
            let q_hat = log_log_slope(&tail);
            // Truncated criterion integral by the trapezoid rule on samples.
            let e = 1.0 / (p - 1.0);
            let mut integral = 0.0;
            for w in samples.windows(2) {
                let f0 = (w[0].0 / w[0].1).powf(e);
                let f1 = (w[1].0 / w[1].1).powf(e);
                integral += 0.5 * (f0 + f1) * (w[1].0 - w[0].0);
            }
            let verdict = if (q_hat - p).abs() <= 0.05 {
                Verdict::Inconclusive
            } else if q_hat > p {
                Verdict::Hyperbolic
            } else {
                Verdict::Parabolic
            };
            Ok(Classification {
                verdict,
                integral_estimate: Some((rho_max, integral)),
                growth_exponent: Some(q_hat),
            })
        }
    }
}

fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, m) in samples {
        let x = r.ln();
        let y = m.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ---------------------------------------------------------------------------
// Adaptive quadrature: Gauss-Kronrod 7-15 with recursive bisection, and an
// improper-integral wrapper using the 1/t substitution for the far tail.
// ---------------------------------------------------------------------------

// 15-point Kronrod abscissae/weights on [-1, 1] and the embedded 7-point
// Gauss weights (standard QK15 constants).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn qk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_k = WGK[7] * fc;
    let mut result_g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        result_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }
    let integral = result_k * half;
    let err = ((result_k - result_g) * half).abs();
    (integral, err)
}

/// Adaptive quadrature of a finite-interval integral to absolute tolerance.
pub fn adaptive_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return reject("integration interval is empty");
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        evals: &mut usize,
    ) -> Result<f64> {
        *evals += 15;
        if *evals > 2_000_000 {
            return Err(Error::InternalConsistency(
                "quadrature exceeded its evaluation budget".into(),
            ));
        }
        let (v, e) = qk15(f, a, b);
        if !v.is_finite() {
            return Err(Error::InternalConsistency(
                "integrand produced a non-finite value".into(),
            ));
        }
        if e <= tol || depth >= 60 {
            return Ok(v);
        }
        let m = 0.5 * (a + b);
        Ok(recurse(f, a, m, 0.5 * tol, depth + 1, evals)?
            + recurse(f, m, b, 0.5 * tol, depth + 1, evals)?)
    }
    let mut evals = 0usize;
    recurse(f, a, b, tol, 0, &mut evals)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailIntegral {
    Convergent(f64),
    /// The tail does not decay fast enough; carries the fitted decay
    /// exponent of the integrand (≤ 1 means divergence).
    Divergent { exponent: f64 },
}

/// ∫_a^∞ f(t) dt for eventually-monotone nonnegative integrands. The decay
/// exponent is probed on geometric samples first; convergent tails are then
/// integrated as a finite piece plus a 1/t-substituted remainder.
pub fn integrate_tail(f: &dyn Fn(f64) -> f64, a: f64, tol: f64) -> Result<TailIntegral> {
    // Probe the decay exponent on t, 2t, 4t, ... to detect divergence.
    let t0 = a.abs().max(1.0);
    let mut samples = Vec::new();
    for k in 0..14 {
        let t = t0 * 2f64.powi(k) + a.max(0.0);
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::InternalConsistency(
                "tail integrand produced a non-finite value".into(),
            ));
        }
        if v > 0.0 {
            samples.push((t, v));
        }
    }
    if samples.len() >= 3 {
        let slope = log_log_slope(&samples);
        let exponent = -slope;
        if exponent <= 1.02 {
            return Ok(TailIntegral::Divergent { exponent });
        }
    }
    // All probes were zero (or decay is super-polynomial): treat as
    // convergent and integrate.
    let split = a + 8.0 * (1.0 + a.abs());
    let head = adaptive_quad(f, a, split, 0.5 * tol)?;
    let sub = move |x: f64| {
        let t = 1.0 / x;
        f(t) * t * t
    };
    let tail = adaptive_quad(&sub, 1e-300, 1.0 / split, 0.5 * tol)?;
    Ok(TailIntegral::Convergent(head + tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((unit_sphere_area(2).unwrap() - 2.0 * pi).abs() < 1e-14);
        assert!((unit_sphere_area(3).unwrap() - 4.0 * pi).abs() < 1e-13);
        assert!((unit_sphere_area(4).unwrap() - 2.0 * pi * pi).abs() < 1e-13);
    }

    #[test]
    fn radial_capacity_r3_p2() {
        let pi = std::f64::consts::PI;
        let c = radial_condenser_capacity(3, 2.0, 1.0, 2.0, None).unwrap();
        assert!((c - 8.0 * pi).abs() < 1e-12, "{c}");
        let ball = radial_condenser_capacity(3, 2.0, 1.0, f64::INFINITY, None).unwrap();
        assert!((ball - 4.0 * pi).abs() < 1e-12);
    }

    #[test]
    fn radial_capacity_parabolic_cases() {
        assert_eq!(
            radial_condenser_capacity(2, 2.0, 1.0, f64::INFINITY, None).unwrap(),
            0.0
        );
        assert_eq!(
            radial_condenser_capacity(3, 3.0, 1.0, f64::INFINITY, None).unwrap(),
            0.0
        );
        assert_eq!(
            radial_condenser_capacity(3, 4.0, 1.0, f64::INFINITY, None).unwrap(),
            0.0
        );
    }

    #[test]
    fn radial_capacity_rejects_bad_radii() {
        assert!(radial_condenser_capacity(3, 2.0, 2.0, 1.0, None).is_err());
        assert!(radial_condenser_capacity(3, 2.0, 0.0, 1.0, None).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let w = RadialWeight::constant(1.0);
        for &(n, p, r, s) in &[
            (3usize, 2.0, 1.0, 2.0),
            (3, 1.5, 0.5, 4.0),
            (2, 2.0, 1.0, 7.0),
            (4, 3.0, 0.3, 2.2),
            (3, 3.0, 1.0, 5.0),
            (5, 2.5, 0.9, 1.1),
        ] {
            let closed = radial_condenser_capacity(n, p, r, s, None).unwrap();
            let quad = radial_condenser_capacity(n, p, r, s, Some(&w)).unwrap();
            assert!(
                (closed - quad).abs() <= 1e-10 * closed.max(1.0),
                "n={n} p={p}: {closed} vs {quad}"
            );
        }
    }

    #[test]
    fn degenerate_limits() {
        // cap → ∞ as r → s⁻ and → 0 as r → 0⁺ (p < n).
        let near = radial_condenser_capacity(3, 2.0, 1.999, 2.0, None).unwrap();
        assert!(near > 1e4);
        let tiny = radial_condenser_capacity(3, 2.0, 1e-9, 2.0, None).unwrap();
        assert!(tiny < 1e-7);
    }

    #[test]
    fn green_constant_r3_p2() {
        let pi = std::f64::consts::PI;
        let c = rn_green_constant(3, 2.0).unwrap();
        assert!((c - 1.0 / (4.0 * pi)).abs() < 1e-15);
        let u = rn_green(3, 2.0, 2.0).unwrap();
        assert!((u - 1.0 / (8.0 * pi)).abs() < 1e-15);
        assert!(rn_green(3, 3.0, 1.0).is_err());
        assert!(rn_green(3, 3.5, 1.0).is_err());
    }

    #[test]
    fn green_level_normalization_over_six_orders() {
        for &(n, p) in &[(3usize, 2.0), (4, 2.5), (5, 1.5)] {
            for k in -3..=3 {
                let b = 10f64.powi(k);
                let cap = rn_green_level_capacity(n, p, b).unwrap();
                let expect = b.powf(1.0 - p);
                assert!(
                    (cap - expect).abs() <= 1e-12 * expect.max(1.0),
                    "n={n} p={p} b={b}: {cap} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn oned_weighted_exponential() {
        for p in [1.5, 2.0, 3.0] {
            let w = RadialWeight::of(move |t: f64| ((p - 1.0) * t).exp());
            for r in [0.0, 0.5, 1.0] {
                let one = oned_weighted(&w, r, p).unwrap();
                assert!(
                    (one.alpha - (-r).exp()).abs() < 1e-8,
                    "p={p} r={r}: alpha {}",
                    one.alpha
                );
                let expect = (r * (p - 1.0)).exp();
                assert!(
                    (one.energy - expect).abs() < 1e-8 * expect,
                    "p={p} r={r}: energy {} vs {expect}",
                    one.energy
                );
                // Endpoint values of the defining integral.
                assert!((one.u(r).unwrap() - 1.0).abs() < 1e-9);
                assert!(one.u(r + 30.0).unwrap() < 1e-9);
                assert!((one.u(r + 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn oned_weighted_rejects_divergent_tail() {
        let w = RadialWeight::constant(1.0);
        let err = oned_weighted(&w, 0.0, 2.0);
        assert!(err.is_err());
    }

    #[test]
    fn classifier_power_law_rule() {
        for n in [2usize, 3, 4] {
            for p in [1.5, 2.0, 3.0, 4.0] {
                let profile = VolumeGrowthProfile::lebesgue(n).unwrap();
                let out = classify_hyperbolicity(&profile, p).unwrap();
                let expect = if p < n as f64 {
                    Verdict::Hyperbolic
                } else {
                    Verdict::Parabolic
                };
                assert_eq!(out.verdict, expect, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn classifier_borderline_is_parabolic() {
        // (q-1)/(p-1) = 1 exactly: integrand ~ 1/ρ, logarithmic divergence.
        let profile = VolumeGrowthProfile::PowerLaw { c: 2.0, q: 3.0 };
        let out = classify_hyperbolicity(&profile, 3.0).unwrap();
        assert_eq!(out.verdict, Verdict::Parabolic);
    }

    #[test]
    fn classifier_rejects_non_monotone() {
        let profile = VolumeGrowthProfile::Tabulated(vec![
            (1.0, 1.0),
            (2.0, 4.0),
            (3.0, 3.0),
            (4.0, 8.0),
        ]);
        assert!(classify_hyperbolicity(&profile, 2.0).is_err());
    }

    #[test]
    fn classifier_tabulated_exponential_growth_is_hyperbolic() {
        let samples: Vec<(f64, f64)> = (1..=40)
            .map(|k| {
                let r = k as f64;
                (r, r.exp())
            })
            .collect();
        let out =
            classify_hyperbolicity(&VolumeGrowthProfile::Tabulated(samples), 2.0).unwrap();
        assert_eq!(out.verdict, Verdict::Hyperbolic);
    }

    #[test]
    fn quadrature_smoke() {
        let v = adaptive_quad(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        match integrate_tail(&|t: f64| (-t).exp(), 0.0, 1e-12).unwrap() {
            TailIntegral::Convergent(v) => assert!((v - 1.0).abs() < 1e-10),
            TailIntegral::Divergent { .. } => panic!("exponential tail must converge"),
        }
        match integrate_tail(&|t: f64| 1.0 / t.max(1.0), 1.0, 1e-12).unwrap() {
            TailIntegral::Convergent(_) => panic!("1/t tail must diverge"),
            TailIntegral::Divergent { exponent } => assert!(exponent < 1.02),
        }
    }
}
