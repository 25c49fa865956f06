//! Gbest particle swarm optimization with componentwise velocity clamping.
//!
//! Velocity update per dimension:
//! `v = inertia*v + c1*rand()*(pbest - present) + c2*rand()*(gbest - present)`
//! followed by `present = present + v`. Velocities are clamped to
//! `vmax = vmax_fraction * range` and positions to the bounds (the velocity
//! component is zeroed when its position clamps).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{better, initial_population, BestResult, Bounds};
use crate::error::{Error, Result};

/// Particle swarm settings. The defaults match the reference runs: swarm 20
/// over 50 iterations, learning factors 2.0. Inertia defaults to 1.0, the
/// literal update rule; stability comes from velocity clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PSOConfig {
    pub swarm: usize,
    pub iterations: usize,
    /// Cognitive learning factor (pull toward pbest).
    pub c1: f64,
    /// Social learning factor (pull toward gbest).
    pub c2: f64,
    pub inertia: f64,
    /// Velocity cap as a fraction of each dimension's range, in (0, 1].
    pub vmax_fraction: f64,
    pub seed: u64,
}

impl Default for PSOConfig {
    fn default() -> Self {
        PSOConfig {
            swarm: 20,
            iterations: 50,
            c1: 2.0,
            c2: 2.0,
            inertia: 1.0,
            vmax_fraction: 0.5,
            seed: 0,
        }
    }
}

impl PSOConfig {
    fn validate(&self) -> Result<()> {
        if self.swarm == 0 || self.iterations == 0 {
            return Err(Error::BudgetZero);
        }
        if !(self.c1 > 0.0) || !(self.c2 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning factors must be positive, got c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        if !(self.vmax_fraction > 0.0 && self.vmax_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "vmax_fraction must be in (0, 1], got {}",
                self.vmax_fraction
            )));
        }
        if !(self.inertia >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "inertia must be nonnegative, got {}",
                self.inertia
            )));
        }
        Ok(())
    }
}

/// Particle positions and velocities, index-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

/// One particle update with fixed random draws `r1`, `r2` (one per
/// dimension). Returns the new (position, velocity).
pub fn pso_step_particle(
    position: &[f64],
    velocity: &[f64],
    pbest: &[f64],
    gbest: &[f64],
    bounds: &Bounds,
    config: &PSOConfig,
    r1: &[f64],
    r2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = bounds.dim();
    for (what, len) in [
        ("particle position", position.len()),
        ("particle velocity", velocity.len()),
        ("pbest", pbest.len()),
        ("gbest", gbest.len()),
        ("rand vector r1", r1.len()),
        ("rand vector r2", r2.len()),
    ] {
        if len != dim {
            return Err(Error::DimensionMismatch {
                what,
                expected: dim,
                found: len,
            });
        }
    }
    let mut new_pos = vec![0.0; dim];
    let mut new_vel = vec![0.0; dim];
    for d in 0..dim {
        let vmax = config.vmax_fraction * bounds.range(d);
        let mut v = config.inertia * velocity[d]
            + config.c1 * r1[d] * (pbest[d] - position[d])
            + config.c2 * r2[d] * (gbest[d] - position[d]);
        v = v.clamp(-vmax, vmax);
        let mut x = position[d] + v;
        if x < bounds.lower[d] {
            x = bounds.lower[d];
            v = 0.0;
        } else if x > bounds.upper[d] {
            x = bounds.upper[d];
            v = 0.0;
        }
        new_pos[d] = x;
        new_vel[d] = v;
    }
    Ok((new_pos, new_vel))
}

/// Updates every particle in place, drawing the per-dimension random
/// factors sequentially from `rng` (r1 vector then r2 vector per particle).
pub fn pso_step(
    swarm: &mut Swarm,
    pbest: &[Vec<f64>],
    gbest: &[f64],
    bounds: &Bounds,
    config: &PSOConfig,
    rng: &mut impl Rng,
) -> Result<()> {
    let dim = bounds.dim();
    for i in 0..swarm.positions.len() {
        let r1: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let r2: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let (pos, vel) = pso_step_particle(
            &swarm.positions[i],
            &swarm.velocities[i],
            &pbest[i],
            gbest,
            bounds,
            config,
            &r1,
            &r2,
        )?;
        swarm.positions[i] = pos;
        swarm.velocities[i] = vel;
    }
    Ok(())
}

/// Minimizes `objective` with a gbest swarm.
///
/// Particles start at `initial_points` (clamped) plus uniform samples, with
/// zero velocity. Each iteration evaluates every particle, so evaluations ==
/// swarm x iterations exactly; the returned best is the best point ever
/// evaluated.
pub fn pso_minimize(
    objective: impl Fn(&[f64]) -> f64,
    bounds: &Bounds,
    config: &PSOConfig,
    initial_points: &[Vec<f64>],
) -> Result<BestResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let positions = initial_population(bounds, config.swarm, initial_points, &mut rng);
    let velocities = vec![vec![0.0; bounds.dim()]; config.swarm];
    let mut swarm = Swarm {
        positions,
        velocities,
    };

    let mut pbest: Vec<Vec<f64>> = swarm.positions.clone();
    let mut pbest_val = vec![f64::INFINITY; config.swarm];
    let mut gbest: Vec<f64> = swarm.positions[0].clone();
    let mut gbest_val = f64::INFINITY;
    let mut evaluations = 0usize;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut first = true;

    for iteration in 0..config.iterations {
        for i in 0..config.swarm {
            let v = objective(&swarm.positions[i]);
            evaluations += 1;
            if first || better(v, pbest_val[i]) {
                pbest_val[i] = v;
                pbest[i] = swarm.positions[i].clone();
            }
            if (first && i == 0) || better(v, gbest_val) {
                gbest_val = v;
                gbest = swarm.positions[i].clone();
            }
        }
        first = false;
        trace.push(gbest_val);
        if iteration + 1 == config.iterations {
            break;
        }
        pso_step(&mut swarm, &pbest, &gbest, bounds, config, &mut rng)?;
    }

    Ok(BestResult {
        point: gbest,
        value: gbest_val,
        evaluations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bounds(dim: usize) -> Bounds {
        Bounds::new(&vec![(0.0, 1.0); dim]).unwrap()
    }

    #[test]
    fn stationary_particle_stays_put() {
        let bounds = unit_bounds(2);
        let cfg = PSOConfig::default();
        let p = vec![0.4, 0.6];
        let (pos, vel) = pso_step_particle(
            &p,
            &[0.0, 0.0],
            &p,
            &p,
            &bounds,
            &cfg,
            &[0.7, 0.2],
            &[0.9, 0.1],
        )
        .unwrap();
        assert_eq!(pos, p);
        assert_eq!(vel, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_case_velocity_and_position() {
        // 1-D: present 0.4, pbest 0.5, gbest 0.6, v = 0, c1 = c2 = 2,
        // both rand draws 0.5 => v = 2*0.5*0.1 + 2*0.5*0.2 = 0.3,
        // present -> 0.7
        let bounds = unit_bounds(1);
        let cfg = PSOConfig::default();
        let (pos, vel) =
            pso_step_particle(&[0.4], &[0.0], &[0.5], &[0.6], &bounds, &cfg, &[0.5], &[0.5])
                .unwrap();
        assert!((vel[0] - 0.3).abs() < 1e-15);
        assert!((pos[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn velocity_clamped_and_position_in_bounds() {
        let bounds = Bounds::new(&[(0.0, 2.0)]).unwrap();
        let cfg = PSOConfig::default(); // vmax = 0.5 * 2.0 = 1.0
        let (pos, vel) = pso_step_particle(
            &[0.1],
            &[5.0], // huge incoming velocity
            &[1.9],
            &[1.9],
            &bounds,
            &cfg,
            &[1.0],
            &[1.0],
        )
        .unwrap();
        assert!(vel[0].abs() <= 1.0 + 1e-15);
        assert!(pos[0] >= 0.0 && pos[0] <= 2.0);
    }

    #[test]
    fn position_clamp_zeroes_velocity() {
        let bounds = unit_bounds(1);
        let cfg = PSOConfig {
            vmax_fraction: 1.0,
            ..Default::default()
        };
        let (pos, vel) = pso_step_particle(
            &[0.9],
            &[0.0],
            &[1.0],
            &[1.0],
            &bounds,
            &cfg,
            &[1.0],
            &[1.0],
        )
        .unwrap();
        // raw step: v = 2*0.1 + 2*0.1 = 0.4, x = 1.3 -> clamped
        assert_eq!(pos[0], 1.0);
        assert_eq!(vel[0], 0.0);
    }

    #[test]
    fn step_dimension_mismatch() {
        let bounds = unit_bounds(2);
        let cfg = PSOConfig::default();
        assert!(matches!(
            pso_step_particle(&[0.1], &[0.0, 0.0], &[0.1, 0.1], &[0.1, 0.1], &bounds, &cfg, &[0.5, 0.5], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_particle_swarm_terminates_with_finite_answer() {
        let bounds = unit_bounds(2);
        let cfg = PSOConfig {
            swarm: 1,
            ..Default::default()
        };
        let r = pso_minimize(
            |x| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2),
            &bounds,
            &cfg,
            &[],
        )
        .unwrap();
        assert!(r.value.is_finite());
        assert!(bounds.contains(&r.point));
        assert_eq!(r.evaluations, cfg.iterations);
    }

    #[test]
    fn budget_zero_rejected() {
        let bounds = unit_bounds(1);
        let cfg = PSOConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(matches!(
            pso_minimize(|_| 0.0, &bounds, &cfg, &[]),
            Err(Error::BudgetZero)
        ));
    }

    #[test]
    fn exact_evaluation_budget_and_trace_length() {
        let bounds = unit_bounds(2);
        let cfg = PSOConfig::default();
        let r = pso_minimize(|x| x[0] + x[1], &bounds, &cfg, &[]).unwrap();
        assert_eq!(r.evaluations, cfg.swarm * cfg.iterations);
        assert_eq!(r.trace.len(), cfg.iterations);
    }

    #[test]
    fn trace_monotone_and_best_below_all() {
        let bounds = unit_bounds(3);
        let r = pso_minimize(
            |x| x.iter().map(|v| (v - 0.25) * (v - 0.25)).sum(),
            &bounds,
            &PSOConfig::default(),
            &[],
        )
        .unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for &v in &r.trace {
            assert!(r.value <= v);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let bounds = unit_bounds(2);
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2);
        let a = pso_minimize(f, &bounds, &PSOConfig::default(), &[]).unwrap();
        let b = pso_minimize(f, &bounds, &PSOConfig::default(), &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_evaluated_candidate_is_in_bounds() {
        let bounds = Bounds::new(&[(-3.0, -1.0), (2.0, 2.5)]).unwrap();
        let b2 = bounds.clone();
        let _ = pso_minimize(
            move |x| {
                assert!(b2.contains(x), "evaluated out-of-bounds point {x:?}");
                x[0] * x[1]
            },
            &bounds,
            &PSOConfig::default(),
            &[vec![100.0, -100.0]], // clamped into bounds
        )
        .unwrap();
    }

    #[test]
    fn sphere_success_rate() {
        let bounds = unit_bounds(2);
        let target = [0.3, 0.7];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .map(|(v, t)| (v - t) * (v - t))
                .sum::<f64>()
        };
        let mut hits = 0;
        for seed in 0..20 {
            let cfg = PSOConfig {
                seed,
                ..Default::default()
            };
            let r = pso_minimize(f, &bounds, &cfg, &[]).unwrap();
            let dist = ((r.point[0] - 0.3).powi(2) + (r.point[1] - 0.7).powi(2)).sqrt();
            if dist <= 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 18, "only {hits}/20 runs landed within 0.05");
    }
}
