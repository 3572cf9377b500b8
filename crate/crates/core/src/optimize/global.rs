use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    greedy_noisy, powell, GreedyConfig, Objective, OptRecord, Point, PowellConfig, Recorder,
};

/// Multi-start search: greedy then Powell from each start, then alternation
/// from the best.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub starts: usize,
    /// Starts are uniform in `[-start_radius, start_radius]` per parameter.
    pub start_radius: f64,
    pub greedy: GreedyConfig,
    pub powell: PowellConfig,
    /// Alternation stops once a greedy + Powell round gains less than this.
    pub improvement_tol: f64,
    pub max_alternations: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            starts: 6,
            start_radius: 0.2,
            greedy: GreedyConfig::default(),
            powell: PowellConfig::default(),
            improvement_tol: 1e-12,
            max_alternations: 50,
        }
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Alternates greedy and Powell from `start` until a round stops helping.
pub fn alternate(
    rec: &mut Recorder,
    start: Point,
    cfg: &GlobalConfig,
    rng: &mut impl Rng,
) -> Point {
    let mut cur = start;
    let mut step = None;
    for _ in 0..cfg.max_alternations {
        let before = cur.energy;
        let (g, s) = greedy_noisy(rec, cur, &cfg.greedy, step, rng);
        step = Some(s);
        let out = powell(rec, g, &cfg.powell);
        rec.record.degraded |= out.degraded;
        cur = out.point;
        if before - cur.energy < cfg.improvement_tol {
            break;
        }
    }
    cur
}

/// Runs the multi-start search inside an existing recorder.
pub fn run_global(rec: &mut Recorder, cfg: &GlobalConfig, seed: u64) -> Point {
    run_global_around(rec, None, cfg, seed)
}

/// [`run_global`] with starts scattered around `center` instead of the
/// origin. The first start is `center` itself.
pub fn run_global_around(
    rec: &mut Recorder,
    center: Option<&[f64]>,
    cfg: &GlobalConfig,
    seed: u64,
) -> Point {
    let n = rec.n_params();
    let mut best: Option<Point> = None;
    for k in 0..cfg.starts.max(1) {
        let mut rng = stream(seed, k as u64);
        let x: Vec<f64> = match center {
            Some(c) if k == 0 => c.to_vec(),
            _ => (0..n)
                .map(|i| {
                    let r = rng.random_range(-cfg.start_radius..=cfg.start_radius);
                    center.map_or(r, |c| c[i] + r)
                })
                .collect(),
        };
        rec.set_phase("start");
        let p = rec.point(x);
        let (g, _) = greedy_noisy(rec, p, &cfg.greedy, None, &mut rng);
        let out = powell(rec, g, &cfg.powell);
        rec.record.degraded |= out.degraded;
        if best.as_ref().is_none_or(|b| out.point.energy < b.energy) {
            best = Some(out.point);
        }
    }
    let best = best.expect("at least one start");
    let mut rng = stream(seed, cfg.starts as u64);
    alternate(rec, best, cfg, &mut rng)
}

/// Optimizes all parameters of `obj` simultaneously from several random
/// starts near the origin.
pub fn global_variational(obj: &dyn Objective, cfg: &GlobalConfig, seed: u64) -> OptRecord {
    let mut rec = Recorder::new(obj, seed);
    rec.record.notes.push(format!(
        "{} starts uniform in [-{r}, {r}]",
        cfg.starts,
        r = cfg.start_radius
    ));
    run_global(&mut rec, cfg, seed);
    rec.into_record()
}
