//! Dense BFGS with a strong-Wolfe line search.
//!
//! Near convergence the energy differences fall below floating-point
//! resolution of the total energy, so the sufficient-decrease test also
//! accepts the approximate Wolfe condition of Hager and Zhang, which only
//! looks at directional derivatives.

pub trait Objective {
    /// Writes the gradient at `x` into `grad` and returns the value.
    fn value_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    fn value_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    /// Convergence when `max |grad_i| < grad_tol`.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Per-coordinate cap on the displacement of a single iteration.
    pub max_step: Option<Vec<f64>>,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { grad_tol: 1e-10, max_iter: 100_000, max_step: None }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Point {
    alpha: f64,
    value: f64,
    slope: f64,
    grad: Vec<f64>,
}

struct LineSearch<'a, F: Objective> {
    f: &'a F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    d0: f64,
    eps: f64,
    trial: Vec<f64>,
}

impl<F: Objective> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Point {
        for ((t, x), d) in self.trial.iter_mut().zip(self.x).zip(self.dir) {
            *t = x + alpha * d;
        }
        let mut grad = vec![0.0; self.x.len()];
        let value = self.f.value_gradient(&self.trial, &mut grad);
        let slope = dot(&grad, self.dir);
        Point { alpha, value, slope, grad }
    }

    fn decrease(&self, p: &Point) -> bool {
        if !p.value.is_finite() {
            return false;
        }
        let armijo = p.value <= self.f0 + C1 * p.alpha * self.d0;
        let approx = p.value <= self.f0 + self.eps && p.slope <= (2.0 * C1 - 1.0) * self.d0;
        armijo || approx
    }

    fn curvature(&self, p: &Point) -> bool {
        p.slope.abs() <= -C2 * self.d0
    }

    fn run(mut self, alpha_max: f64) -> Option<Point> {
        let mut prev = Point { alpha: 0.0, value: self.f0, slope: self.d0, grad: Vec::new() };
        let mut alpha = alpha_max.min(1.0);
        for i in 0..40 {
            let p = self.eval(alpha);
            if !self.decrease(&p) || (i > 0 && p.value >= prev.value && p.slope >= 0.0) {
                return self.zoom(prev, p);
            }
            if self.curvature(&p) {
                return Some(p);
            }
            if p.slope >= 0.0 {
                return self.zoom(p, prev);
            }
            if alpha >= alpha_max {
                return Some(p);
            }
            prev = p;
            alpha = (2.0 * alpha).min(alpha_max);
        }
        None
    }

    fn zoom(&mut self, mut lo: Point, mut hi: Point) -> Option<Point> {
        for _ in 0..60 {
            let width = hi.alpha - lo.alpha;
            let mut a = f64::NAN;
            if lo.slope * hi.slope < 0.0 {
                a = lo.alpha - lo.slope * width / (hi.slope - lo.slope);
            } else if hi.value.is_finite() {
                let denom = 2.0 * (hi.value - lo.value - lo.slope * width);
                if denom.abs() > 0.0 {
                    a = lo.alpha - lo.slope * width * width / denom;
                }
            }
            let (l, h) = if width > 0.0 { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
            let margin = 0.1 * (h - l);
            if !(a.is_finite() && a > l + margin && a < h - margin) {
                a = 0.5 * (lo.alpha + hi.alpha);
            }
            let p = self.eval(a);
            if !self.decrease(&p) || p.value > lo.value + self.eps {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Some(p);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
            if (hi.alpha - lo.alpha).abs() <= 1e-14 * lo.alpha.abs().max(1e-300) {
                break;
            }
        }
        if lo.alpha > 0.0 && !lo.grad.is_empty() {
            Some(lo)
        } else {
            None
        }
    }
}

pub fn bfgs<F: Objective>(f: &F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut value = f.value_gradient(&x, &mut grad);
    let mut hinv = vec![0.0; n * n];
    let reset = |h: &mut [f64], scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    reset(&mut hinv, 1.0);
    let mut fresh = true;
    let mut failures = 0;
    let mut dir = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let g_inf = inf_norm(&grad);
        if g_inf < opts.grad_tol {
            return Minimum { x, value, grad_inf: g_inf, iterations, converged: true };
        }
        iterations += 1;
        for i in 0..n {
            dir[i] = -(0..n).map(|j| hinv[i * n + j] * grad[j]).sum::<f64>();
        }
        let mut d0 = dot(&dir, &grad);
        if !(d0 < 0.0) {
            reset(&mut hinv, 1.0);
            fresh = true;
            dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
            d0 = dot(&dir, &grad);
        }
        let mut alpha_max = 1.0;
        if let Some(cap) = &opts.max_step {
            for (d, c) in dir.iter().zip(cap) {
                if d.abs() * alpha_max > *c {
                    alpha_max = c / d.abs();
                }
            }
        }
        let ls =
            LineSearch { f, x: &x, dir: &dir, f0: value, d0, eps: 1e-12 * (value.abs() + 1.0), trial: vec![0.0; n] };
        let Some(p) = ls.run(alpha_max) else {
            failures += 1;
            if failures > 3 {
                break;
            }
            reset(&mut hinv, 1.0);
            fresh = true;
            continue;
        };
        failures = 0;
        let s: Vec<f64> = dir.iter().map(|d| p.alpha * d).collect();
        let y: Vec<f64> = p.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        value = p.value;
        grad = p.grad;
        let sy = dot(&s, &y);
        if sy > 1e-300 && sy.is_finite() {
            if fresh {
                reset(&mut hinv, sy / dot(&y, &y));
                fresh = false;
            }
            update_inverse(&mut hinv, &s, &y, sy);
        }
    }
    let g_inf = inf_norm(&grad);
    Minimum { x, value, grad_inf: g_inf, iterations, converged: g_inf < opts.grad_tol }
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn update_inverse(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let m = bfgs(&f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!(m.converged, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ill_conditioned_quadratic_with_large_offset() {
        // A large constant makes energy differences invisible near the
        // minimum; the derivative-based acceptance must still converge.
        let scales = [1.0, 1e3, 1e-2, 50.0];
        let f = move |x: &[f64], g: &mut [f64]| {
            let mut e = 1e6;
            for i in 0..4 {
                let d = x[i] - i as f64;
                g[i] = scales[i] * d;
                e += 0.5 * scales[i] * d * d;
            }
            e
        };
        let m = bfgs(&f, &[3.0, -2.0, 10.0, 0.5], &BfgsOptions::default());
        assert!(m.converged, "{m:?}");
        assert!(m.grad_inf < 1e-10);
    }

    #[test]
    fn step_cap_is_respected() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0] - 10.0;
            0.5 * (x[0] - 10.0).powi(2)
        };
        let opts = BfgsOptions { max_step: Some(vec![0.5]), ..Default::default() };
        let m = bfgs(&f, &[0.0], &opts);
        assert!(m.converged);
        assert!(m.iterations >= 20, "{}", m.iterations);
    }
}
