//! Orlicz-Wasserstein distance: the smallest scale `t` at which some coupling
//! satisfies `Σ π_ij Φ(c_ij/t) ≤ 1`.

use super::transport::{check_problem, solve};
use super::{BaselineError, OW_MAX_SUPPORT};
use crate::nfunc::{NFuncError, NFunction, NFunctionKind};

const REL_WIDTH: f64 = 1e-8;
const MAX_WIDENING: usize = 2000;

/// Optimal value of `min_π Σ π_ij Φ(c_ij/t)`; `+∞` when some cost overflows.
fn feasibility(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
    f: &NFunction,
    t: f64,
) -> Result<f64, BaselineError> {
    let mut scaled = Vec::with_capacity(cost.len());
    for row in cost {
        let mut out = Vec::with_capacity(row.len());
        for &c in row {
            match f.value(c / t) {
                Ok(v) if v.is_finite() => out.push(v),
                Ok(_) | Err(NFuncError::Overflow { .. }) => out.push(f64::MAX / 1e6),
                Err(e) => return Err(e.into()),
            }
        }
        scaled.push(out);
    }
    let (v, _) = solve(&scaled, mu, nu)?;
    Ok(if v >= f64::MAX / 1e7 { f64::INFINITY } else { v })
}

/// Orlicz-Wasserstein distance for supports of at most 64 points per side.
/// The linear limit reduces to the 1-Wasserstein distance.
pub fn ow_oracle(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
    f: &NFunction,
) -> Result<f64, BaselineError> {
    ow_oracle_with_trace(cost, mu, nu, f).map(|(v, _)| v)
}

/// As [`ow_oracle`], also returning every probed `(t, min_π Σ π Φ(c/t))`.
pub fn ow_oracle_with_trace(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
    f: &NFunction,
) -> Result<(f64, Vec<(f64, f64)>), BaselineError> {
    check_problem(cost, mu, nu, OW_MAX_SUPPORT)?;
    let (w1, _) = solve(cost, mu, nu)?;
    if f.kind() == NFunctionKind::LimitLinear || w1 == 0.0 {
        return Ok((w1, Vec::new()));
    }
    let mut trace = Vec::new();
    let eval = |t: f64, trace: &mut Vec<(f64, f64)>| -> Result<bool, BaselineError> {
        let g = feasibility(cost, mu, nu, f, t)?;
        trace.push((t, g));
        Ok(g <= 1.0)
    };

    // any positive scale works as a seed; widen geometrically until it flips
    let seed = cost.iter().flatten().fold(0.0f64, |a, &c| a.max(c));
    let mut hi = seed;
    let mut steps = 0;
    while !eval(hi, &mut trace)? {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_WIDENING {
            return Err(BaselineError::PivotLimit(steps));
        }
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        steps += 1;
        if !eval(lo, &mut trace)? {
            break;
        }
        hi = lo;
        if steps > MAX_WIDENING {
            return Err(BaselineError::PivotLimit(steps));
        }
    }
    while hi - lo > REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut trace)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi), trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diracs_under_exp_linear() {
        // eˢ − s − 1 = 1
        let s = 1.146_193_220_620_582_6;
        let v = ow_oracle(&[vec![2.0]], &[1.0], &[1.0], &NFunction::exp_linear()).unwrap();
        assert!((v - 2.0 / s).abs() < 1e-7);
    }

    #[test]
    fn linear_is_w1() {
        let cost = vec![vec![1.0], vec![1.0]];
        let v = ow_oracle(&cost, &[0.5, 0.5], &[1.0], &NFunction::limit_linear()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feasibility_trace_is_monotone() {
        let cost = vec![vec![0.0, 1.0, 3.0], vec![2.0, 0.5, 1.0]];
        let (_, trace) =
            ow_oracle_with_trace(&cost, &[0.4, 0.6], &[0.3, 0.3, 0.4], &NFunction::exp_square())
                .unwrap();
        let mut sorted = trace.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in sorted.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }
}
