//! Univariate minimization of Amemiya-type objectives `F(k) = (1 + M(k))/k`.
//!
//! `M` is a convex, increasing modular with `M(0) = 0`, so
//! `k²F′(k) = kM′(k) − M(k) − 1` is nondecreasing and `F` is unimodal on
//! `k > 0`. The sign of `F′` therefore tells on which side of the minimizer a
//! probe lies, which is what the bracket updates below rely on.

use super::{AmemiyaResult, SolverError, SolverOptions};
use crate::nfunc::NFuncError;

/// Modular value and its derivatives at one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Modular {
    pub value: f64,
    pub dk: f64,
    pub d2k: f64,
}

const GRID_LO_EXP: i32 = -6;
const GRID_HI_EXP: i32 = 6;
/// Decades the coarse grid may be extended by when the minimum sits at an end.
const GRID_EXTENSION: i32 = 290;
const GOLDEN_STEPS: usize = 10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
struct Probe {
    k: f64,
    f: f64,
    df: f64,
    d2f: f64,
}

/// Evaluates `F` and its derivatives; overflow becomes `F = +∞`.
fn probe<M>(modular: &mut M, k: f64) -> Result<Probe, SolverError>
where
    M: FnMut(f64) -> Result<Modular, NFuncError>,
{
    match modular(k) {
        Ok(m) if m.value.is_finite() && m.dk.is_finite() && m.d2k.is_finite() => {
            let one_m = 1.0 + m.value;
            Ok(Probe {
                k,
                f: one_m / k,
                df: m.dk / k - one_m / (k * k),
                d2f: m.d2k / k - 2.0 * m.dk / (k * k) + 2.0 * one_m / (k * k * k),
            })
        }
        Ok(_) | Err(NFuncError::Overflow { .. }) => Ok(Probe {
            k,
            f: f64::INFINITY,
            df: f64::INFINITY,
            d2f: f64::NAN,
        }),
        Err(e) => Err(SolverError::Function(e)),
    }
}

/// Minimizes `(1 + M(k))/k` over `k > 0`.
///
/// A decade grid on `[1e−6, 1e6]` (extended while the minimum sits at an end)
/// locates a bracket, golden-section steps in `ln k` shrink it, and Newton
/// steps on `F′` finish, falling back to bisection whenever a step would leave
/// the bracket or `F″ ≤ 0`.
///
/// ```
/// use gsim_core::{minimize_amemiya, SolverOptions};
/// use gsim_core::solver::Modular;
///
/// // F(k) = 1/k + k
/// let r = minimize_amemiya(
///     |k| Ok(Modular { value: k * k, dk: 2.0 * k, d2k: 2.0 }),
///     &SolverOptions::default(),
/// )
/// .unwrap();
/// assert!((r.distance - 2.0).abs() < 1e-12);
/// assert!((r.k_star.unwrap() - 1.0).abs() < 1e-8);
/// ```
pub fn minimize_amemiya<M>(mut modular: M, opts: &SolverOptions) -> Result<AmemiyaResult, SolverError>
where
    M: FnMut(f64) -> Result<Modular, NFuncError>,
{
    opts.validate()?;
    let tol = opts.tol;

    // coarse grid
    let mut grid = Vec::new();
    for e in GRID_LO_EXP..=GRID_HI_EXP {
        grid.push(probe(&mut modular, 10f64.powi(e))?);
    }
    let argmin = |g: &[Probe]| {
        g.iter()
            .enumerate()
            .filter(|(_, p)| p.f.is_finite())
            .min_by(|a, b| a.1.f.total_cmp(&b.1.f))
            .map(|(i, _)| i)
    };
    let Some(mut best) = argmin(&grid) else {
        return Err(SolverError::NoFiniteBracket);
    };
    let mut extended = 0;
    while best == grid.len() - 1 && extended < GRID_EXTENSION {
        let k = grid[best].k * 10.0;
        grid.push(probe(&mut modular, k)?);
        best = argmin(&grid).expect("finite point already seen");
        extended += 1;
    }
    while best == 0 && extended < GRID_EXTENSION {
        let k = grid[0].k / 10.0;
        grid.insert(0, probe(&mut modular, k)?);
        best = argmin(&grid).expect("finite point already seen");
        extended += 1;
    }
    let mut lo = grid[best.saturating_sub(1)].k;
    let mut hi = grid[(best + 1).min(grid.len() - 1)].k;
    let mut incumbent = grid[best];
    let mut iterations = 0;

    // golden section in ln k
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut pc = probe(&mut modular, c.exp())?;
    let mut pd = probe(&mut modular, d.exp())?;
    for _ in 0..GOLDEN_STEPS {
        iterations += 1;
        if pc.f < pd.f {
            b = d;
            d = c;
            pd = pc;
            c = b - INV_PHI * (b - a);
            pc = probe(&mut modular, c.exp())?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + INV_PHI * (b - a);
            pd = probe(&mut modular, d.exp())?;
        }
    }
    for p in [pc, pd] {
        if p.f < incumbent.f {
            incumbent = p;
        }
    }
    lo = lo.max(a.exp());
    hi = hi.min(b.exp());
    if !(lo < incumbent.k && incumbent.k < hi) {
        lo = lo.min(incumbent.k);
        hi = hi.max(incumbent.k);
    }

    // safeguarded Newton on F′
    let mut cur = incumbent;
    loop {
        if cur.f.is_finite() && cur.df.abs() <= tol * cur.f.abs().max(1.0) {
            return Ok(finish(cur, iterations, true));
        }
        if (hi - lo) <= tol * hi {
            let pick = if cur.f <= incumbent.f { cur } else { incumbent };
            return Ok(finish(pick, iterations, true));
        }
        if iterations >= opts.max_iter {
            let pick = if cur.f <= incumbent.f { cur } else { incumbent };
            return Err(SolverError::NonConvergence {
                best: finish(pick, iterations, false),
            });
        }
        iterations += 1;

        // overflow only happens past the minimizer, where M is large
        if cur.df > 0.0 || !cur.f.is_finite() {
            hi = hi.min(cur.k);
        } else {
            lo = lo.max(cur.k);
        }
        let newton = cur.k - cur.df / cur.d2f;
        let next = if cur.f.is_finite() && cur.d2f > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            (lo * hi).sqrt()
        };
        cur = probe(&mut modular, next)?;
        if cur.f < incumbent.f {
            incumbent = cur;
        }
    }
}

fn finish(p: Probe, iterations: usize, converged: bool) -> AmemiyaResult {
    AmemiyaResult {
        distance: p.f,
        k_star: Some(p.k),
        iterations,
        converged,
    }
}
