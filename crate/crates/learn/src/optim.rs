//! Limited-memory BFGS with a backtracking line search, for the smooth
//! convex objectives of the linear models.

use std::collections::VecDeque;

use crate::Real;

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Minimize `f`, which returns the objective and writes the gradient.
pub fn lbfgs<F: Real>(mut f: impl FnMut(&[F], &mut [F]) -> F, x0: Vec<F>, max_iter: usize, tol: f64) -> Vec<F> {
    const MEMORY: usize = 8;
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![F::zero(); n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<F>, Vec<F>, F)> = VecDeque::new();
    let mut g_new = vec![F::zero(); n];
    for _ in 0..max_iter {
        let gmax = g.iter().map(|v| v.abs()).fold(F::zero(), F::max);
        if gmax.as_f64() < tol {
            break;
        }
        // two-loop recursion
        let mut d: Vec<F> = g.iter().map(|v| -*v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = *rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * *yi);
            alphas.push(a);
        }
        let gamma = match hist.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => F::one() / gmax.max(F::one()),
        };
        d.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * *si);
        }
        let mut slope = dot(&g, &d);
        if slope >= F::zero() {
            d = g.iter().map(|v| -*v).collect();
            slope = dot(&g, &d);
            hist.clear();
        }

        let c1 = F::of(1e-4);
        let mut step = F::one();
        let mut x_new = vec![F::zero(); n];
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new <= fx + c1 * step * slope && f_new.is_finite() {
                let s: Vec<F> = (0..n).map(|i| x_new[i] - x[i]).collect();
                let y: Vec<F> = (0..n).map(|i| g_new[i] - g[i]).collect();
                let sy = dot(&s, &y);
                if sy > F::zero() {
                    if hist.len() == MEMORY {
                        hist.pop_front();
                    }
                    hist.push_back((s, y, F::one() / sy));
                }
                let improvement = (fx - f_new).abs();
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                fx = f_new;
                accepted = improvement.as_f64() > 1e-15 * fx.abs().as_f64().max(1.0);
                break;
            }
            step *= F::of(0.5);
        }
        if !accepted {
            break;
        }
    }
    x
}
