use serde::{Deserialize, Serialize};

use super::{Point, Recorder};

/// Direction-set minimization with bracketing line searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowellConfig {
    /// Stop when one sweep over all directions improves by less than this.
    pub tol: f64,
    pub max_iterations: usize,
    /// First trial step of each line search.
    pub bracket: f64,
    /// Relative tolerance of the line minimizer.
    pub line_tol: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 500,
            bracket: 0.1,
            line_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowellOutcome {
    pub point: Point,
    pub iterations: usize,
    pub converged: bool,
    pub degraded: bool,
}

const GOLD: f64 = 1.618034;
const GLIMIT: f64 = 100.0;
const CGOLD: f64 = 0.381966;
const MAX_BRACKET_STEPS: usize = 60;
const MAX_BRENT_STEPS: usize = 100;

struct Line<'r, 'a> {
    rec: &'r mut Recorder<'a>,
    origin: Vec<f64>,
    dir: Vec<f64>,
    best: (f64, f64),
}

impl Line<'_, '_> {
    fn at(&self, a: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.dir)
            .map(|(x, d)| x + a * d)
            .collect()
    }

    fn f(&mut self, a: f64) -> f64 {
        let x = self.at(a);
        let f = self.rec.eval(&x);
        if f < self.best.1 {
            self.best = (a, f);
        }
        f
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Returns a bracketing triple `(a, b, c)` with `f(b)` lowest, or `None` if
/// the function does not appear bounded below.
fn bracket(line: &mut Line, f0: f64, step: f64) -> Option<[(f64, f64); 3]> {
    let (mut a, mut fa) = (0.0, f0);
    let (mut b, mut fb) = (step, line.f(step));
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = line.f(c);
    let mut steps = 0;
    while fb > fc {
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !fc.is_finite() {
            return None;
        }
        let r = (b - a) * (fb - fc);
        let q = (b - c) * (fb - fa);
        let mut u = b - ((b - c) * q - (b - a) * r) / (2.0 * sign((q - r).abs().max(1e-20), q - r));
        let ulim = b + GLIMIT * (c - b);
        let mut fu;
        if (b - u) * (u - c) > 0.0 {
            fu = line.f(u);
            if fu < fc {
                return Some([(b, fb), (u, fu), (c, fc)]);
            } else if fu > fb {
                return Some([(a, fa), (b, fb), (u, fu)]);
            }
            u = c + GOLD * (c - b);
            fu = line.f(u);
        } else if (c - u) * (u - ulim) > 0.0 {
            fu = line.f(u);
            if fu < fc {
                b = c;
                c = u;
                u = c + GOLD * (c - b);
                fb = fc;
                fc = fu;
                fu = line.f(u);
            }
        } else if (u - ulim) * (ulim - c) >= 0.0 {
            u = ulim;
            fu = line.f(u);
        } else {
            u = c + GOLD * (c - b);
            fu = line.f(u);
        }
        a = b;
        b = c;
        c = u;
        fa = fb;
        fb = fc;
        fc = fu;
    }
    Some([(a, fa), (b, fb), (c, fc)])
}

/// Brent's parabolic minimization inside a bracket.
fn brent(line: &mut Line, br: [(f64, f64); 3], tol: f64) -> (f64, f64) {
    let (ax, cx) = (br[0].0, br[2].0);
    let mut a = ax.min(cx);
    let mut b = ax.max(cx);
    let (mut x, mut fx) = br[1];
    let (mut w, mut fw, mut v, mut fv) = (x, fx, x, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_BRENT_STEPS {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
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
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x) {
                e = if x >= xm { a - x } else { b - x };
                d = CGOLD * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = sign(tol1, xm - x);
                }
            }
        } else {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + sign(tol1, d)
        };
        let fu = line.f(u);
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
    (x, fx)
}

/// Minimizes along `dir` from `cur`. A failed bracket yields `Err` with
/// the best point seen on the line.
fn line_min(
    rec: &mut Recorder,
    cur: &Point,
    dir: &[f64],
    cfg: &PowellConfig,
) -> std::result::Result<Point, Point> {
    let mut line = Line {
        rec,
        origin: cur.params.clone(),
        dir: dir.to_vec(),
        best: (0.0, cur.energy),
    };
    let found =
        bracket(&mut line, cur.energy, cfg.bracket).map(|br| brent(&mut line, br, cfg.line_tol));
    let (a, fa) = line.best;
    let p = Point {
        params: line.at(a),
        energy: fa,
    };
    match found {
        Some(_) => Ok(p),
        None => Err(p),
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

fn axes(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Powell's conjugate direction method. Each sweep replaces the oldest
/// direction by the net displacement; the set is reset to the axes every
/// `n` sweeps.
pub fn powell(rec: &mut Recorder, start: Point, cfg: &PowellConfig) -> PowellOutcome {
    rec.set_phase("powell");
    let n = start.params.len();
    let mut dirs = axes(n);
    let mut cur = start;
    let mut degraded = false;
    for iter in 1..=cfg.max_iterations {
        let f0 = cur.energy;
        let p0 = cur.params.clone();
        for d in &dirs {
            match line_min(rec, &cur, d, cfg) {
                Ok(p) => cur = p,
                Err(p) => {
                    cur = p;
                    degraded = true;
                    break;
                }
            }
        }
        if degraded {
            return PowellOutcome {
                point: cur,
                iterations: iter,
                converged: false,
                degraded,
            };
        }
        if f0 - cur.energy < cfg.tol {
            return PowellOutcome {
                point: cur,
                iterations: iter,
                converged: true,
                degraded,
            };
        }
        let shift: Vec<f64> = cur.params.iter().zip(&p0).map(|(a, b)| a - b).collect();
        if let Some(u) = unit(&shift) {
            match line_min(rec, &cur, &u, cfg) {
                Ok(p) => cur = p,
                Err(p) => {
                    return PowellOutcome {
                        point: p,
                        iterations: iter,
                        converged: false,
                        degraded: true,
                    };
                }
            }
            dirs.remove(0);
            dirs.push(u);
        }
        if iter % n == 0 {
            dirs = axes(n);
        }
    }
    PowellOutcome {
        point: cur,
        iterations: cfg.max_iterations,
        converged: false,
        degraded,
    }
}
