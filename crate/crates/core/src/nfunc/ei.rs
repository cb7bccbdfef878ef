//! Exponential integral `Ei(x) = PV ∫_{-∞}^x eᵗ/t dt` for positive arguments.

use super::NFuncError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this the convergent power series is used, above it the asymptotic
/// expansion.
const SERIES_LIMIT: f64 = 40.0;

/// Largest argument accepted; `eˣ` is still finite here.
pub const EXP_LIMIT: f64 = 700.0;

/// `Ei(x)` for `0 < x ≤ 700`.
///
/// ```
/// let v = gsim_core::ei(1.0).unwrap();
/// assert!((v - 1.895117816355937).abs() < 1e-14);
/// ```
pub fn ei(x: f64) -> Result<f64, NFuncError> {
    if x.is_nan() || x <= 0.0 {
        return Err(NFuncError::NonPositiveArgument(x));
    }
    if x > EXP_LIMIT {
        return Err(NFuncError::Overflow { argument: x });
    }
    Ok(if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    })
}

// γ + ln x + Σ_{k≥1} xᵏ / (k·k!)
fn series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib <= f64::EPSILON * 0.1 * sum.abs() && kf > x {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

// eˣ/x · Σ_k k!/xᵏ, stopped at the smallest term
fn asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < f64::EPSILON * 0.1 {
            break;
        }
    }
    x.exp() / x * sum
}
