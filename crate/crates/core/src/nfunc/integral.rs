//! `A(k) = ∫₀¹ w̄_t Φ(k|h|/w̄_t) w_e dt` for one tree edge, with `∂A/∂k` and
//! `∂²A/∂k²`.
//!
//! Substituting `u = w̄_t` turns the integral into `λ(G) ∫_b^{a+b} u Φ(α/u) du`
//! with `a = w_e/λ(G)`, `b = 1 + λ(γ_e)/λ(G)`, `α = k|h|`. Power and linear
//! kinds integrate in elementary terms; the exponential kinds go through the
//! exponential integral when `α/b` is moderate and through a power series in
//! `α` when it is small, where the closed form cancels badly.

use super::{ei, EdgeGeometry, NFuncError, NFunction, NFunctionKind, EXP_LIMIT};

/// Below this value of `α/b` the exponential kinds use the series.
const SERIES_SWITCH: f64 = 0.5;
/// Up to this change of the exponent across the edge the exponential kinds
/// use quadrature.
const QUADRATURE_SPAN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed forms, with the series and quadrature branches described in
    /// the module docs for the exponential kinds.
    #[default]
    Analytic,
    /// Closed forms only, even where they lose accuracy.
    ClosedForm,
    /// 32-point Gauss–Legendre on the original integrand, for any kind.
    Quadrature,
}

/// Edge integral value and its first two derivatives in `k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeTerms {
    pub value: f64,
    pub dk: f64,
    pub d2k: f64,
}

pub fn edge_integral(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
) -> Result<f64, NFuncError> {
    edge_terms(f, geom, habs, k, Method::Analytic).map(|t| t.value)
}

pub fn edge_integral_dk(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
) -> Result<f64, NFuncError> {
    edge_terms(f, geom, habs, k, Method::Analytic).map(|t| t.dk)
}

pub fn edge_integral_d2k(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
) -> Result<f64, NFuncError> {
    edge_terms(f, geom, habs, k, Method::Analytic).map(|t| t.d2k)
}

/// Value and derivatives together; the exponential kinds share their
/// exponential-integral evaluations across all three.
pub fn edge_terms(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
    method: Method,
) -> Result<EdgeTerms, NFuncError> {
    if habs.is_nan() || habs < 0.0 {
        return Err(NFuncError::NegativeArgument(habs));
    }
    if k.is_nan() || k <= 0.0 {
        return Err(NFuncError::NonPositiveArgument(k));
    }
    if habs == 0.0 {
        return Ok(EdgeTerms::default());
    }
    let terms = match method {
        Method::Quadrature => by_quadrature(f, geom, habs, k)?,
        Method::Analytic | Method::ClosedForm => match f.kind() {
            NFunctionKind::LimitLinear => EdgeTerms {
                value: k * habs * geom.weight,
                dk: habs * geom.weight,
                d2k: 0.0,
            },
            NFunctionKind::Power { p, .. } => {
                let scale = f.prefactor() * beta_e(p, geom);
                let alpha = k * habs;
                EdgeTerms {
                    value: scale * alpha.powf(p),
                    dk: scale * p * alpha.powf(p - 1.0) * habs,
                    d2k: scale * p * (p - 1.0) * alpha.powf(p - 2.0) * habs * habs,
                }
            }
            NFunctionKind::ExpLinear => exp_linear(f, geom, habs, k, method)?,
            NFunctionKind::ExpSquare => exp_square(f, geom, habs, k, method)?,
        },
    };
    if terms.value.is_finite() && terms.dk.is_finite() && terms.d2k.is_finite() {
        Ok(terms)
    } else {
        Err(NFuncError::Overflow { argument: k * habs })
    }
}

/// `β_e = λ(G)^{p−1} ∫_L^{L+w_e} u^{1−p} du` with `L = λ(G) + λ(γ_e)`.
///
/// Written as `λ(G)·b^{2−p}·ℓ·expm1((2−p)ℓ)/((2−p)ℓ)` with `ℓ = ln(1 + a/b)`,
/// which stays accurate as `p → 2`.
pub fn beta_e(p: f64, geom: &EdgeGeometry) -> f64 {
    let lam = geom.lambda_total;
    let (a, b) = (geom.slope(), geom.offset());
    let ell = (a / b).ln_1p();
    let x = (2.0 - p) * ell;
    if x == 0.0 {
        return lam * ell;
    }
    lam * b.powf(2.0 - p) * ell * (x.exp_m1() / x)
}

fn by_quadrature(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
) -> Result<EdgeTerms, NFuncError> {
    let alpha = k * habs;
    let mut err = None;
    let mut out = EdgeTerms::default();
    for &(t, w) in super::gauss_legendre_32() {
        let wt = geom.weight_at(t);
        let s = alpha / wt;
        let eval = || -> Result<(f64, f64, f64), NFuncError> {
            Ok((f.value(s)?, f.derivative(s)?, f.second_derivative(s)?))
        };
        match eval() {
            Ok((v, d1, d2)) => {
                out.value += w * wt * v;
                out.dk += w * d1;
                out.d2k += w * d2 / wt;
            }
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    out.value *= geom.weight;
    out.dk *= geom.weight * habs;
    out.d2k *= geom.weight * habs * habs;
    Ok(out)
}

/// Coefficients `Q_n` with `∫_b^{a+b} u^{1−n} du = b^{2−n} Q_n`, for `n ≥ 2`.
struct PowerMoments {
    ratio: f64,
    shrink: f64,
    partial: f64,
    ratio_pow: f64,
    n: usize,
}

impl PowerMoments {
    fn new(a: f64, b: f64) -> Self {
        let c = a + b;
        Self {
            ratio: b / c,
            shrink: a / c,
            partial: 0.0,
            ratio_pow: 1.0,
            n: 1,
        }
    }
}

impl Iterator for PowerMoments {
    type Item = f64;

    // Q_2 = ln(1 + a/b); Q_n = (a/c)·(1 + r + … + r^{n−3})/(n − 2), r = b/c
    fn next(&mut self) -> Option<f64> {
        self.n += 1;
        if self.n == 2 {
            return Some((self.shrink / self.ratio).ln_1p());
        }
        self.partial += self.ratio_pow;
        self.ratio_pow *= self.ratio;
        Some(self.shrink * self.partial / (self.n - 2) as f64)
    }
}

const SERIES_EPS: f64 = 1e-18;
const SERIES_MAX: usize = 400;

// Φ = eˢ − s − 1.
fn exp_linear(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
    method: Method,
) -> Result<EdgeTerms, NFuncError> {
    let lam = geom.lambda_total;
    let (a, b) = (geom.slope(), geom.offset());
    let c = a + b;
    let alpha = k * habs;
    let z0 = alpha / b;
    if z0 > EXP_LIMIT {
        return Err(NFuncError::Overflow { argument: z0 });
    }
    let z1 = alpha / c;
    if method == Method::Analytic && z0 - z1 <= QUADRATURE_SPAN && z0 >= SERIES_SWITCH {
        return by_quadrature(f, geom, habs, k);
    }
    if method == Method::Analytic && z0 < SERIES_SWITCH {
        // λ Σ_{n≥2} αⁿ/n! ∫ u^{1−n}; factorial powers tracked as z^m/m!
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        let mut e = [1.0, z0, z0 * z0 / 2.0]; // z^{n−2}/(n−2)!, z^{n−1}/(n−1)!, zⁿ/n!
        for (i, q) in PowerMoments::new(a, b).enumerate().take(SERIES_MAX) {
            let n = (i + 2) as f64;
            v += e[2] * q;
            d1 += e[1] * q;
            let t2 = e[0] * q;
            d2 += t2;
            if t2 <= SERIES_EPS * d2 {
                break;
            }
            e = [e[1], e[2], e[2] * z0 / (n + 1.0)];
        }
        return Ok(EdgeTerms {
            value: lam * b * b * v,
            dk: lam * b * d1 * habs,
            d2k: lam * d2 * habs * habs,
        });
    }
    let (e0, e1) = (z0.exp(), z1.exp());
    let dei = ei(z1)? - ei(z0)?;
    let value = 0.5
        * lam
        * (-alpha * alpha * dei + alpha * (c * e1 - b * e0) + (c * c * e1 - b * b * e0)
            - 2.0 * alpha * a
            - (c * c - b * b));
    let dk = habs * lam * (-alpha * dei + c * e1 - b * e0 - a);
    let d2k = -habs * habs * lam * dei;
    Ok(EdgeTerms { value, dk, d2k })
}

// Φ = e^{s²} − 1.
fn exp_square(
    f: &NFunction,
    geom: &EdgeGeometry,
    habs: f64,
    k: f64,
    method: Method,
) -> Result<EdgeTerms, NFuncError> {
    let lam = geom.lambda_total;
    let (a, b) = (geom.slope(), geom.offset());
    let c = a + b;
    let alpha = k * habs;
    let z0 = alpha / b;
    let y0 = z0 * z0;
    if y0 > EXP_LIMIT {
        return Err(NFuncError::Overflow { argument: y0 });
    }
    let y1 = (alpha / c) * (alpha / c);
    if method == Method::Analytic && y0 - y1 <= QUADRATURE_SPAN && z0 >= SERIES_SWITCH {
        return by_quadrature(f, geom, habs, k);
    }
    if method == Method::Analytic && z0 < SERIES_SWITCH {
        // λ Σ_{m≥1} α^{2m}/m! ∫ u^{1−2m}; only even moments contribute
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        let mut g_prev = 1.0; // z^{2(m−1)}/(m−1)!
        let moments = PowerMoments::new(a, b).step_by(2).take(SERIES_MAX);
        let mut m = 1.0;
        for q in moments {
            let g = g_prev * y0 / m;
            v += g * q;
            d1 += 2.0 * z0 * g_prev * q;
            let t2 = 2.0 * (2.0 * m - 1.0) * g_prev * q;
            d2 += t2;
            if t2 <= SERIES_EPS * d2 {
                break;
            }
            g_prev = g;
            m += 1.0;
        }
        return Ok(EdgeTerms {
            value: lam * b * b * v,
            dk: lam * b * d1 * habs,
            d2k: lam * d2 * habs * habs,
        });
    }
    let (e0, e1) = (y0.exp(), y1.exp());
    let dei = ei(y1)? - ei(y0)?;
    let value = 0.5 * lam * (-alpha * alpha * dei + (c * c * e1 - b * b * e0) - (c * c - b * b));
    let dk = -alpha * habs * lam * dei;
    let d2k = -habs * habs * lam * (dei + 2.0 * e1 - 2.0 * e0);
    Ok(EdgeTerms { value, dk, d2k })
}
