//! Real-coded genetic algorithm: roulette-wheel selection on shifted
//! fitness, arithmetic crossover, non-uniform mutation, elitism of one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{better, initial_population, BestResult, Bounds};
use crate::error::{Error, Result};

/// Genetic algorithm settings. The defaults match the reference runs:
/// population 20 over 25 generations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GAConfig {
    pub population: usize,
    pub generations: usize,
    /// Probability that a selected parent pair is crossed.
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Shape parameter b of the non-uniform mutation decay.
    pub mutation_shape: f64,
    pub seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            population: 20,
            generations: 25,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            mutation_shape: 3.0,
            seed: 0,
        }
    }
}

impl GAConfig {
    fn validate(&self) -> Result<()> {
        if self.population == 0 || self.generations == 0 {
            return Err(Error::BudgetZero);
        }
        if self.population < 2 {
            return Err(Error::InvalidConfig(
                "population must be at least 2".into(),
            ));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be in [0, 1], got {p}"
                )));
            }
        }
        if !(self.mutation_shape > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mutation_shape must be positive, got {}",
                self.mutation_shape
            )));
        }
        Ok(())
    }
}

/// Nonnegative roulette mass for each individual of a minimization
/// population: `fit_i = (max - f_i) + 0.01 * (max - min + eps)`.
///
/// The shift flips the objective's sign (lower objective -> higher mass)
/// while keeping every mass strictly positive, so fitness-proportional
/// selection is well defined even when all objective values coincide.
fn shifted_fitness(objectives: &[f64]) -> Vec<f64> {
    const EPS: f64 = 1e-12;
    let max = objectives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = objectives.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 0.01 * (max - min + EPS);
    objectives.iter().map(|&f| (max - f) + floor).collect()
}

/// Draws one index with probability proportional to shifted fitness.
pub fn roulette_select(objectives: &[f64], rng: &mut impl Rng) -> Result<usize> {
    if objectives.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let fitness = shifted_fitness(objectives);
    let total: f64 = fitness.iter().sum();
    let mut ticket = rng.random::<f64>() * total;
    for (i, &f) in fitness.iter().enumerate() {
        ticket -= f;
        if ticket <= 0.0 {
            return Ok(i);
        }
    }
    Ok(fitness.len() - 1) // numeric slack lands on the last slot
}

/// Arithmetic crossover with a fixed blend factor:
/// `child1 = alpha*p1 + (1-alpha)*p2`, `child2` the mirror image.
pub fn arithmetic_crossover_with(
    p1: &[f64],
    p2: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch {
            what: "crossover parents",
            expected: p1.len(),
            found: p2.len(),
        });
    }
    let c1 = p1
        .iter()
        .zip(p2)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    let c2 = p1
        .iter()
        .zip(p2)
        .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
        .collect();
    Ok((c1, c2))
}

/// Arithmetic crossover with alpha drawn uniformly from (0, 1).
pub fn arithmetic_crossover(
    p1: &[f64],
    p2: &[f64],
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    arithmetic_crossover_with(p1, p2, rng.random::<f64>())
}

/// Non-uniform mutation of a single gene with fixed draws: moves the gene
/// toward its chosen bound by `delta(t, y) = y * (1 - r^((1 - t/T)^b))`,
/// where `y` is the distance to that bound. At `t == T` the step is zero
/// for every `r`; at `r = 0, t = 0` the gene lands exactly on the bound.
pub fn nonuniform_mutate_gene(
    value: f64,
    lower: f64,
    upper: f64,
    generation: usize,
    max_generations: usize,
    shape: f64,
    upward: bool,
    r: f64,
) -> f64 {
    debug_assert!(generation <= max_generations);
    let t_frac = generation as f64 / max_generations as f64;
    let exponent = (1.0 - t_frac).powf(shape);
    let y = if upward { upper - value } else { value - lower };
    let delta = y * (1.0 - r.powf(exponent));
    let mutated = if upward { value + delta } else { value - delta };
    mutated.clamp(lower, upper)
}

/// Mutates each gene with probability `prob`; direction and magnitude drawn
/// from `rng`. The result always stays within bounds because the step is a
/// fraction of the distance to the chosen bound.
pub fn nonuniform_mutate(
    x: &[f64],
    generation: usize,
    max_generations: usize,
    shape: f64,
    bounds: &Bounds,
    prob: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(d, &v)| {
            if rng.random::<f64>() < prob {
                let upward = rng.random::<bool>();
                let r = rng.random::<f64>();
                nonuniform_mutate_gene(
                    v,
                    bounds.lower[d],
                    bounds.upper[d],
                    generation,
                    max_generations,
                    shape,
                    upward,
                    r,
                )
            } else {
                v
            }
        })
        .collect()
}

/// Minimizes `objective` over the bounds.
///
/// Each generation evaluates the full population (so evaluations ==
/// population x generations exactly), then builds the next one from the
/// best-ever individual (elitism of one) plus roulette-selected,
/// crossed-over, mutated offspring. `initial_points` are injected into the
/// starting population, clamped to bounds.
pub fn ga_minimize(
    objective: impl Fn(&[f64]) -> f64,
    bounds: &Bounds,
    config: &GAConfig,
    initial_points: &[Vec<f64>],
) -> Result<BestResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population = initial_population(bounds, config.population, initial_points, &mut rng);

    let mut best_point: Option<Vec<f64>> = None;
    let mut best_value = f64::INFINITY;
    let mut evaluations = 0usize;
    let mut trace = Vec::with_capacity(config.generations);

    for generation in 0..config.generations {
        let values: Vec<f64> = population
            .iter()
            .map(|x| {
                evaluations += 1;
                objective(x)
            })
            .collect();
        for (x, &v) in population.iter().zip(&values) {
            if best_point.is_none() || better(v, best_value) {
                best_value = v;
                best_point = Some(x.clone());
            }
        }
        trace.push(best_value);
        if generation + 1 == config.generations {
            break;
        }

        let mut next = Vec::with_capacity(config.population);
        next.push(best_point.clone().expect("population evaluated"));
        let child_generation = generation + 1;
        while next.len() < config.population {
            let i = roulette_select(&values, &mut rng)?;
            let j = roulette_select(&values, &mut rng)?;
            let (c1, c2) = if rng.random::<f64>() < config.crossover_prob {
                arithmetic_crossover(&population[i], &population[j], &mut rng)?
            } else {
                (population[i].clone(), population[j].clone())
            };
            for child in [c1, c2] {
                if next.len() == config.population {
                    break;
                }
                next.push(nonuniform_mutate(
                    &child,
                    child_generation,
                    config.generations,
                    config.mutation_shape,
                    bounds,
                    config.mutation_prob,
                    &mut rng,
                ));
            }
        }
        population = next;
    }

    Ok(BestResult {
        point: best_point.expect("at least one generation ran"),
        value: best_value,
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

    // chi-square critical values at alpha = 0.01
    fn chi2_crit_99(df: usize) -> f64 {
        match df {
            2 => 9.2103,
            3 => 11.3449,
            4 => 13.2767,
            9 => 21.666,
            _ => panic!("no critical value tabulated for df {df}"),
        }
    }

    #[test]
    fn roulette_single_individual_always_selected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(roulette_select(&[3.7], &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn roulette_empty_population_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            roulette_select(&[], &mut rng),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn roulette_uniform_when_all_objectives_equal() {
        let objectives = [2.5; 5];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000;
        let mut counts = [0usize; 5];
        for _ in 0..draws {
            counts[roulette_select(&objectives, &mut rng).unwrap()] += 1;
        }
        let expected = draws as f64 / 5.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < chi2_crit_99(4), "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn roulette_frequencies_match_shift_formula() {
        let objectives = [0.0, 1.0, 1.0];
        // independent probability oracle from the documented shift:
        // fit_i = (max - f_i) + 0.01 * (max - min + eps)
        let eps = 1e-12;
        let (max, min) = (1.0, 0.0);
        let floor = 0.01 * (max - min + eps);
        let fits = [max - 0.0 + floor, max - 1.0 + floor, max - 1.0 + floor];
        let total: f64 = fits.iter().sum();
        let probs: Vec<f64> = fits.iter().map(|f| f / total).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[roulette_select(&objectives, &mut rng).unwrap()] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| {
                let e = p * draws as f64;
                let d = c as f64 - e;
                d * d / e
            })
            .sum();
        assert!(chi2 < chi2_crit_99(2), "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn shifted_fitness_masses_are_positive_and_normalizable() {
        for objectives in [vec![0.0, 1.0, 1.0], vec![5.0; 4], vec![-3.0, 2.0]] {
            let fits = shifted_fitness(&objectives);
            assert!(fits.iter().all(|&f| f > 0.0), "fits {fits:?}");
            let total: f64 = fits.iter().sum();
            let probs: Vec<f64> = fits.iter().map(|f| f / total).collect();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn crossover_identical_parents_gives_identical_children() {
        let p = vec![0.3, 0.7, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c1, c2) = arithmetic_crossover(&p, &p, &mut rng).unwrap();
        assert_eq!(c1, p);
        assert_eq!(c2, p);
    }

    #[test]
    fn crossover_children_stay_in_parent_envelope() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let p1: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let p2: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let (c1, c2) = arithmetic_crossover(&p1, &p2, &mut rng).unwrap();
            for d in 0..4 {
                let lo = p1[d].min(p2[d]);
                let hi = p1[d].max(p2[d]);
                assert!(c1[d] >= lo - 1e-12 && c1[d] <= hi + 1e-12);
                assert!(c2[d] >= lo - 1e-12 && c2[d] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn crossover_midpoint_hook() {
        let p1 = vec![0.0, 1.0];
        let p2 = vec![1.0, 0.0];
        let (c1, c2) = arithmetic_crossover_with(&p1, &p2, 0.5).unwrap();
        assert_eq!(c1, vec![0.5, 0.5]);
        assert_eq!(c2, vec![0.5, 0.5]);
    }

    #[test]
    fn crossover_dimension_mismatch() {
        assert!(arithmetic_crossover_with(&[0.0], &[0.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn mutation_vanishes_at_final_generation() {
        for r in [0.0, 0.3, 0.9999] {
            let v = nonuniform_mutate_gene(0.4, 0.0, 1.0, 25, 25, 3.0, true, r);
            assert_eq!(v, 0.4, "r = {r}");
        }
    }

    #[test]
    fn mutation_r_zero_at_start_jumps_to_bound() {
        let up = nonuniform_mutate_gene(0.4, 0.0, 1.0, 0, 25, 3.0, true, 0.0);
        assert_eq!(up, 1.0);
        let down = nonuniform_mutate_gene(0.4, 0.0, 1.0, 0, 25, 3.0, false, 0.0);
        assert_eq!(down, 0.0);
    }

    #[test]
    fn mutation_stays_in_bounds() {
        let bounds = Bounds::new(&[(-2.0, 3.0), (0.0, 1.0), (10.0, 11.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = vec![0.5, 0.5, 10.5];
        for gen in 0..10_000 {
            let m = nonuniform_mutate(&x, gen % 26, 25, 3.0, &bounds, 1.0, &mut rng);
            assert!(bounds.contains(&m), "generation {gen}: {m:?}");
        }
    }

    #[test]
    fn ga_constant_objective_returns_that_constant() {
        let bounds = unit_bounds(2);
        let result = ga_minimize(|_| 5.0, &bounds, &GAConfig::default(), &[]).unwrap();
        assert_eq!(result.value, 5.0);
        assert!(bounds.contains(&result.point));
    }

    #[test]
    fn ga_budget_zero_rejected() {
        let bounds = unit_bounds(1);
        let cfg = GAConfig {
            generations: 0,
            ..Default::default()
        };
        assert!(matches!(
            ga_minimize(|_| 0.0, &bounds, &cfg, &[]),
            Err(Error::BudgetZero)
        ));
    }

    #[test]
    fn ga_exact_evaluation_budget() {
        let bounds = unit_bounds(2);
        let cfg = GAConfig::default();
        let result = ga_minimize(|x| x[0] + x[1], &bounds, &cfg, &[]).unwrap();
        assert_eq!(result.evaluations, cfg.population * cfg.generations);
        assert_eq!(result.trace.len(), cfg.generations);
    }

    #[test]
    fn ga_trace_is_monotone_non_increasing() {
        let bounds = unit_bounds(3);
        let result = ga_minimize(
            |x| x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum(),
            &bounds,
            &GAConfig::default(),
            &[],
        )
        .unwrap();
        for w in result.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for &v in &result.trace {
            assert!(result.value <= v);
        }
    }

    #[test]
    fn ga_deterministic_per_seed() {
        let bounds = unit_bounds(2);
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2);
        let a = ga_minimize(f, &bounds, &GAConfig::default(), &[]).unwrap();
        let b = ga_minimize(f, &bounds, &GAConfig::default(), &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ga_every_evaluated_candidate_is_in_bounds() {
        let bounds = Bounds::new(&[(-1.0, 2.0), (0.5, 0.75)]).unwrap();
        let b2 = bounds.clone();
        let _ = ga_minimize(
            move |x| {
                assert!(b2.contains(x), "evaluated out-of-bounds point {x:?}");
                x.iter().sum()
            },
            &bounds,
            &GAConfig::default(),
            &[vec![5.0, 5.0]], // out-of-bounds seed point must be clamped
        )
        .unwrap();
    }

    #[test]
    fn ga_sphere_success_rate() {
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
            let cfg = GAConfig {
                seed,
                ..Default::default()
            };
            let r = ga_minimize(f, &bounds, &cfg, &[]).unwrap();
            let dist = ((r.point[0] - 0.3).powi(2) + (r.point[1] - 0.7).powi(2)).sqrt();
            if dist <= 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 18, "only {hits}/20 runs landed within 0.05");
    }
}
