//! Scalar root finding, scalar maximization and grid helpers shared by the
//! equilibrium and optimizer modules.

use crate::error::{Error, Result};

/// Tolerances and iteration budgets used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual below which a solution counts as converged.
    pub tol: f64,
    /// Iteration cap for each scalar search.
    pub max_iter: usize,
    /// Candidate points used to bracket sign changes.
    pub bracket_points: usize,
    /// Cross-check each optimizer result against a coarse grid search.
    pub oracle_check: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, bracket_points: 200, oracle_check: cfg!(debug_assertions) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent-Dekker root on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
pub fn brent_root<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if !(fa * fb < 0.0) {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NonConvergence { iterations: max_iter, best_residual: fb.abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent's parabolic/golden minimizer on `[a, b]`. `rtol` is relative in x.
pub fn brent_minimize<F>(mut f: F, a: f64, b: f64, rtol: f64, max_iter: usize) -> Extremum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let xm = 0.5 * (a + b);
        let tol1 = rtol * x.abs() + 1e-300_f64.max(1e-14 * (b - a).abs().min(1.0));
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Extremum { x, fx, iterations }
}

pub fn brent_maximize<F>(mut f: F, a: f64, b: f64, rtol: f64, max_iter: usize) -> Extremum
where
    F: FnMut(f64) -> f64,
{
    let ext = brent_minimize(|x| -f(x), a, b, rtol, max_iter);
    Extremum { fx: -ext.fx, ..ext }
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Geometric grid; both ends must be positive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect()
}

/// Sign-change direction of a located bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub crossing: Crossing,
}

/// Adjacent grid pairs over which `f` changes sign. NaN samples are skipped.
pub fn sign_changes<F>(mut f: F, grid: &[f64]) -> Vec<Bracket>
where
    F: FnMut(f64) -> f64,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if fx.is_nan() {
            continue;
        }
        if let Some((px, pf)) = prev {
            if pf != 0.0 && (fx == 0.0 || (pf < 0.0) != (fx < 0.0)) {
                out.push(Bracket {
                    lo: px,
                    hi: x,
                    crossing: if pf < 0.0 { Crossing::Rising } else { Crossing::Falling },
                });
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Grid scan followed by Brent on every bracket. The grid is densified
/// by 4x up to twice when no sign change turns up.
pub fn scan_roots<F, G>(mut f: F, grid_for: G, points: usize, xtol_rel: f64, max_iter: usize) -> Vec<(Root, Crossing)>
where
    F: FnMut(f64) -> f64,
    G: Fn(usize) -> Vec<f64>,
{
    let mut n = points.max(8);
    for _ in 0..3 {
        let grid = grid_for(n);
        let brackets = sign_changes(&mut f, &grid);
        if !brackets.is_empty() {
            return brackets
                .into_iter()
                .filter_map(|br| {
                    let xtol = xtol_rel * br.lo.abs().max(br.hi.abs()).max(f64::MIN_POSITIVE);
                    brent_root(&mut f, br.lo, br.hi, xtol, max_iter).ok().map(|r| (r, br.crossing))
                })
                .collect();
        }
        n *= 4;
    }
    Vec::new()
}

/// Newton's method in two unknowns with a forward-difference Jacobian and
/// backtracking on the residual norm.
pub fn newton2<F>(mut f: F, x0: [f64; 2], tol: f64, max_iter: usize) -> Result<([f64; 2], usize)>
where
    F: FnMut([f64; 2]) -> Option<[f64; 2]>,
{
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut x = x0;
    let mut r = f(x).ok_or(Error::NonConvergence { iterations: 0, best_residual: f64::INFINITY })?;
    for iter in 0..max_iter {
        if norm(r) <= tol {
            return Ok((x, iter));
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * x[j].abs().max(1e-8);
            let mut xp = x;
            xp[j] += h;
            let (col0, col1) = match f(xp) {
                Some(rp) => ((rp[0] - r[0]) / h, (rp[1] - r[1]) / h),
                None => {
                    xp[j] = x[j] - h;
                    let rm = f(xp).ok_or(Error::NonConvergence { iterations: iter, best_residual: norm(r) })?;
                    ((r[0] - rm[0]) / h, (r[1] - rm[1]) / h)
                }
            };
            jac[0][j] = col0;
            jac[1][j] = col1;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NonConvergence { iterations: iter, best_residual: norm(r) });
        }
        let dx = [-(jac[1][1] * r[0] - jac[0][1] * r[1]) / det, -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det];
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn = [x[0] + step * dx[0], x[1] + step * dx[1]];
            if let Some(rn) = f(xn) {
                if norm(rn) < norm(r) {
                    x = xn;
                    r = rn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(r) <= tol {
        Ok((x, max_iter))
    } else {
        Err(Error::NonConvergence { iterations: max_iter, best_residual: norm(r) })
    }
}

/// Signed relative difference of two quantities.
pub(crate) fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}
