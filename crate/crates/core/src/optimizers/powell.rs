//! Powell's conjugate-direction method with bracketing + Brent line searches.

use super::{check_start, Counted, Halt, OptResult, OptimizerBudget};
use crate::error::{Error, Result};

const GOLDEN_SECTION: f64 = 0.381_966_011_250_105;
const MAX_BRENT_STEPS: usize = 100;

type Step = std::result::Result<(Vec<f64>, f64), Halt>;

struct Line<'a, F> {
    f: &'a mut Counted<F>,
    origin: &'a [f64],
    dir: &'a [f64],
}

impl<F> Line<'_, F>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    fn point(&self, t: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(self.dir)
            .map(|(x, d)| x + t * d)
            .collect()
    }

    fn eval(&mut self, t: f64) -> std::result::Result<f64, Halt> {
        let p = self.point(t);
        self.f.eval(&p)
    }
}

/// Walks downhill from `t = 0` through `(step, f_step)` with growing
/// steps until the value rises. Returns `(lo, mid, hi, f_mid)`, or the last
/// probe if the probe budget runs out first.
fn expand<F>(
    line: &mut Line<'_, F>,
    step: f64,
    f_step: f64,
    budget: &OptimizerBudget,
) -> std::result::Result<(f64, f64, f64, f64), Halt>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut p = 0.0;
    let (mut q, mut fq) = (step, f_step);
    for _ in 1..budget.max_bracket_probes {
        let r = q + budget.expansion_factor * (q - p);
        let fr = line.eval(r)?;
        if fr >= fq {
            return Ok((p, q, r, fq));
        }
        p = q;
        (q, fq) = (r, fr);
    }
    Ok((q, q, q, fq))
}

fn brent<F>(
    line: &mut Line<'_, F>,
    (lo, mid, hi): (f64, f64, f64),
    f_mid: f64,
    tol: f64,
) -> std::result::Result<(f64, f64), Halt>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut x, mut w, mut v) = (mid, mid, mid);
    let (mut fx, mut fw, mut fv) = (f_mid, f_mid, f_mid);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..MAX_BRENT_STEPS {
        let xm = 0.5 * (a + b);
        let tol1 = 0.5 * tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through (v, w, x)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
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
            d = GOLDEN_SECTION * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = line.eval(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

/// Minimizes along `dir` from `x`. The returned point is only different
/// from `x` when it is strictly better.
fn line_minimize<F>(
    f: &mut Counted<F>,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    budget: &OptimizerBudget,
) -> Step
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut line = Line { f, origin: x, dir };
    let step = budget.initial_step;
    let f_fwd = line.eval(step)?;
    let (bracket, f_mid) = if f_fwd < fx {
        let (lo, mid, hi, fm) = expand(&mut line, step, f_fwd, budget)?;
        ((lo, mid, hi), fm)
    } else {
        let f_back = line.eval(-step)?;
        if f_back < fx {
            let (lo, mid, hi, fm) = expand(&mut line, -step, f_back, budget)?;
            ((lo, mid, hi), fm)
        } else {
            ((-step, 0.0, step), fx)
        }
    };
    let (t, ft) = if bracket.0 == bracket.2 {
        (bracket.1, f_mid)
    } else {
        brent(&mut line, bracket, f_mid, budget.line_search_tolerance)?
    };
    if ft < fx {
        Ok((line.point(t), ft))
    } else {
        Ok((x.to_vec(), fx))
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

fn sweep<F>(
    f: &mut Counted<F>,
    x0: &[f64],
    budget: &OptimizerBudget,
    iterations: &mut usize,
) -> std::result::Result<bool, Halt>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut x = x0.to_vec();
    let mut fx = f.eval(&x)?;
    while *iterations < budget.max_iterations {
        let (x_start, f_start) = (x.clone(), fx);
        let (mut biggest_drop, mut biggest_idx) = (0.0, 0);
        for (i, dir) in dirs.iter().enumerate() {
            let f_before = fx;
            (x, fx) = line_minimize(f, &x, fx, dir, budget)?;
            if f_before - fx > biggest_drop {
                biggest_drop = f_before - fx;
                biggest_idx = i;
            }
        }
        *iterations += 1;
        if 2.0 * (f_start - fx) <= budget.parameter_tolerance * (f_start.abs() + fx.abs()) + 1e-20 {
            return Ok(true);
        }
        let displacement: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let Some(new_dir) = unit(&displacement) else {
            return Ok(true);
        };
        let extrapolated: Vec<f64> = x.iter().zip(&displacement).map(|(a, d)| a + d).collect();
        let f_ext = f.eval(&extrapolated)?;
        if f_ext < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - biggest_drop).powi(2)
                - biggest_drop * (f_start - f_ext).powi(2);
            if t < 0.0 {
                (x, fx) = line_minimize(f, &x, fx, &new_dir, budget)?;
                dirs[biggest_idx] = dirs[n - 1].clone();
                dirs[n - 1] = new_dir;
            }
        }
    }
    Ok(false)
}

/// Derivative-free minimization by Powell's conjugate-direction method.
///
/// Directions start as the coordinate axes. Each outer iteration
/// line-minimizes along every direction, then swaps the direction of
/// largest decrease for the net displacement when Powell's test allows.
/// The result is the best point ever evaluated; calls beyond
/// `budget.max_evaluations` are never made.
pub fn powell_minimize<F>(objective: F, x0: &[f64], budget: &OptimizerBudget) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    check_start(x0)?;
    if budget.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "Powell needs at least one outer iteration".into(),
        ));
    }
    let mut f = Counted::new(objective, budget.max_evaluations);
    let mut iterations = 0;
    let converged = match sweep(&mut f, x0, budget, &mut iterations) {
        Ok(c) => c,
        Err(Halt::Budget) => false,
        Err(Halt::Failed(e)) => return Err(e),
    };
    let (best_params, best_value) = match f.best.take() {
        Some((p, v)) => (p, Some(v)),
        None => (x0.to_vec(), None),
    };
    Ok(OptResult {
        best_params,
        best_value,
        n_evals: f.evals,
        iterations,
        converged,
    })
}
