//! Deterministic limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

use crate::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsSettings<T> {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once `(f_prev - f) <= rel_tol * max(|f_prev|, |f|)`.
    pub rel_tol: T,
    pub armijo: T,
    pub max_backtracks: usize,
}

impl<T: Scalar> LbfgsSettings<T> {
    pub fn new(max_iters: usize, rel_tol: T) -> Self {
        Self {
            memory: 10,
            max_iters,
            rel_tol,
            armijo: T::lit(1e-4),
            max_backtracks: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RelativeDecrease,
    MaxIterations,
    LineSearchFailed,
    ZeroGradient,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::RelativeDecrease => "relative-decrease",
            StopReason::MaxIterations => "max-iterations",
            StopReason::LineSearchFailed => "line-search",
            StopReason::ZeroGradient => "zero-gradient",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome<T, X> {
    pub x: Vec<T>,
    pub value: T,
    /// Extra data reported by the objective at the start point and every accepted iterate.
    pub trace: Vec<X>,
    pub iterations: usize,
    pub stop: StopReason,
}

/// The objective or its gradient was not finite at an accepted point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFinite {
    pub iteration: usize,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

fn finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Minimise `f` from `x0`. The objective returns `(value, gradient, extra)`.
/// Accepted values never increase.
pub fn minimize<T, X, F>(
    x0: Vec<T>,
    settings: &LbfgsSettings<T>,
    mut f: F,
) -> Result<LbfgsOutcome<T, X>, NonFinite>
where
    T: Scalar,
    F: FnMut(&[T]) -> (T, Vec<T>, X),
{
    let mut x = x0;
    let (mut fx, mut g, extra) = f(&x);
    if !fx.is_finite() || !finite(&g) {
        return Err(NonFinite { iteration: 0 });
    }
    let mut trace = vec![extra];
    let mut hist: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(settings.memory);
    let n = x.len();

    for iter in 0..settings.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == T::zero() {
            return Ok(LbfgsOutcome {
                x,
                value: fx,
                trace,
                iterations: iter,
                stop: StopReason::ZeroGradient,
            });
        }

        // Two-loop recursion.
        let mut d: Vec<T> = g.iter().map(|v| -*v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = *rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * *yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        } else {
            let scale = gnorm.recip();
            for di in d.iter_mut() {
                *di *= scale;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = *rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (*a - b) * *si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            // Not a descent direction: restart from steepest descent.
            hist.clear();
            let scale = gnorm.recip();
            d = g.iter().map(|v| -*v * scale).collect();
            slope = -gnorm;
        }

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..settings.max_backtracks {
            let trial: Vec<T> = x.iter().zip(&d).map(|(xi, di)| *xi + step * *di).collect();
            let (ft, gt, et) = f(&trial);
            if ft.is_finite() && finite(&gt) && ft <= fx + settings.armijo * step * slope {
                accepted = Some((trial, ft, gt, et));
                break;
            }
            step *= T::lit(0.5);
        }
        let Some((xn, fnew, gn, en)) = accepted else {
            return Ok(LbfgsOutcome {
                x,
                value: fx,
                trace,
                iterations: iter,
                stop: StopReason::LineSearchFailed,
            });
        };

        let s: Vec<T> = (0..n).map(|i| xn[i] - x[i]).collect();
        let y: Vec<T> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if hist.len() == settings.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, sy.recip()));
        }

        let fprev = fx;
        x = xn;
        fx = fnew;
        g = gn;
        trace.push(en);
        if !fx.is_finite() || !finite(&g) {
            return Err(NonFinite {
                iteration: iter + 1,
            });
        }
        let scale = fprev.abs().max(fx.abs());
        if fprev - fx <= settings.rel_tol * scale {
            return Ok(LbfgsOutcome {
                x,
                value: fx,
                trace,
                iterations: iter + 1,
                stop: StopReason::RelativeDecrease,
            });
        }
    }
    let iterations = settings.max_iters;
    Ok(LbfgsOutcome {
        x,
        value: fx,
        trace,
        iterations,
        stop: StopReason::MaxIterations,
    })
}
