//! Real-coded NSGA-II with simulated binary crossover and polynomial
//! mutation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pareto::{crowding_distance, non_dominated_sort};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// Per-gene mutation probability; `None` means `1 / dim`.
    pub mutation_probability: Option<f64>,
    /// Distribution index of the crossover.
    pub eta_crossover: f64,
    /// Distribution index of the mutation.
    pub eta_mutation: f64,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population: 96,
            generations: 150,
            crossover_probability: 0.9,
            mutation_probability: None,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Minimize `objective` over the box `bounds`. The objective receives a seed
/// derived from the run seed and the candidate's place in the run, so
/// results do not depend on how evaluations are scheduled. Non-finite
/// objective values count as infinitely bad. Returns the first front of the
/// final population.
pub fn nsga2<F>(bounds: &[(f64, f64)], cfg: &Nsga2Config, objective: F) -> Vec<Individual>
where
    F: Fn(&[f64], u64) -> Vec<f64> + Sync,
{
    let dim = bounds.len();
    let pop_size = cfg.population.max(2) & !1;
    let mut ops = rng::derived_stream(cfg.seed, &[0]);
    let evaluate = |xs: Vec<Vec<f64>>, generation: usize| -> Vec<Individual> {
        xs.into_par_iter()
            .enumerate()
            .map(|(i, x)| {
                let seed = rng::derive_seed(cfg.seed, &[1, generation as u64, i as u64]);
                let objectives = objective(&x, seed)
                    .into_iter()
                    .map(|v| if v.is_finite() { v } else { f64::INFINITY })
                    .collect();
                Individual { x, objectives }
            })
            .collect()
    };

    let init: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| bounds.iter().map(|&(lo, hi)| if hi > lo { ops.gen_range(lo..=hi) } else { lo }).collect())
        .collect();
    let mut pop = evaluate(init, 0);
    let (mut rank, mut crowd) = rank_and_crowd(&pop);

    let pm = cfg.mutation_probability.unwrap_or(1.0 / dim.max(1) as f64);
    for generation in 1..=cfg.generations {
        let mut children = Vec::with_capacity(pop_size);
        while children.len() < pop_size {
            let a = tournament(&mut ops, &rank, &crowd);
            let b = tournament(&mut ops, &rank, &crowd);
            let (mut c1, mut c2) = (pop[a].x.clone(), pop[b].x.clone());
            if ops.gen::<f64>() < cfg.crossover_probability {
                sbx(&mut ops, &mut c1, &mut c2, bounds, cfg.eta_crossover);
            }
            for c in [&mut c1, &mut c2] {
                mutate(&mut ops, c, bounds, pm, cfg.eta_mutation);
            }
            children.push(c1);
            children.push(c2);
        }
        let mut merged = pop;
        merged.extend(evaluate(children, generation));
        pop = survivors(merged, pop_size);
        (rank, crowd) = rank_and_crowd(&pop);
    }

    let objs: Vec<Vec<f64>> = pop.iter().map(|p| p.objectives.clone()).collect();
    let first = non_dominated_sort(&objs).swap_remove(0);
    let mut front: Vec<Individual> = Vec::with_capacity(first.len());
    for i in first {
        if !front.iter().any(|f| f.x == pop[i].x) {
            front.push(pop[i].clone());
        }
    }
    front.sort_by(|a, b| a.objectives.partial_cmp(&b.objectives).unwrap_or(std::cmp::Ordering::Equal));
    front
}

fn rank_and_crowd(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let objs: Vec<Vec<f64>> = pop.iter().map(|p| p.objectives.clone()).collect();
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, front) in non_dominated_sort(&objs).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(&objs, front)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

fn survivors(merged: Vec<Individual>, n: usize) -> Vec<Individual> {
    let objs: Vec<Vec<f64>> = merged.iter().map(|p| p.objectives.clone()).collect();
    let mut keep = Vec::with_capacity(n);
    for front in non_dominated_sort(&objs) {
        if keep.len() + front.len() <= n {
            keep.extend(front);
        } else {
            let d = crowding_distance(&objs, &front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
            keep.extend(order.into_iter().take(n - keep.len()).map(|k| front[k]));
        }
        if keep.len() == n {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("kept once")).collect()
}

fn tournament<R: Rng>(rng: &mut R, rank: &[usize], crowd: &[f64]) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    let better = |x: usize, y: usize| rank[x] < rank[y] || (rank[x] == rank[y] && crowd[x] > crowd[y]);
    if better(a, b) {
        a
    } else if better(b, a) {
        b
    } else if rng.gen::<bool>() {
        a
    } else {
        b
    }
}

/// Bounded simulated binary crossover, gene by gene with probability 1/2.
fn sbx<R: Rng>(rng: &mut R, c1: &mut [f64], c2: &mut [f64], bounds: &[(f64, f64)], eta: f64) {
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if rng.gen::<f64>() > 0.5 || (c1[i] - c2[i]).abs() < 1e-14 || hi <= lo {
            continue;
        }
        let (y1, y2) = if c1[i] < c2[i] { (c1[i], c2[i]) } else { (c2[i], c1[i]) };
        let u: f64 = rng.gen();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let d = y2 - y1;
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / d);
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / d);
        let n1 = (0.5 * ((y1 + y2) - bq1 * d)).clamp(lo, hi);
        let n2 = (0.5 * ((y1 + y2) + bq2 * d)).clamp(lo, hi);
        if rng.gen::<bool>() {
            c1[i] = n2;
            c2[i] = n1;
        } else {
            c1[i] = n1;
            c2[i] = n2;
        }
    }
}

/// Bounded polynomial mutation.
fn mutate<R: Rng>(rng: &mut R, x: &mut [f64], bounds: &[(f64, f64)], pm: f64, eta: f64) {
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if hi <= lo || rng.gen::<f64>() >= pm {
            continue;
        }
        let span = hi - lo;
        let d1 = (x[i] - lo) / span;
        let d2 = (hi - x[i]) / span;
        let u: f64 = rng.gen();
        let p = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(p) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(p)
        };
        x[i] = (x[i] + dq * span).clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::pareto::dominates;

    fn toy(cfg: &Nsga2Config) -> Vec<Individual> {
        nsga2(&[(0.0, 1.0)], cfg, |x, _| vec![x[0] * x[0], (x[0] - 1.0).powi(2)])
    }

    #[test]
    fn toy_front_spans_the_segment() {
        let cfg = Nsga2Config { population: 40, generations: 40, seed: 3, ..Default::default() };
        let front = toy(&cfg);
        let xs: Vec<f64> = front.iter().map(|i| i.x[0]).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < 0.02 && hi > 0.98, "{lo} {hi}");
        for a in &front {
            for b in &front {
                assert!(!dominates(&a.objectives, &b.objectives));
            }
        }
    }

    #[test]
    fn fixed_seed_gives_identical_fronts() {
        let cfg = Nsga2Config { population: 20, generations: 10, seed: 9, ..Default::default() };
        assert_eq!(toy(&cfg), toy(&cfg));
    }

    #[test]
    fn non_finite_objectives_lose() {
        let cfg = Nsga2Config { population: 20, generations: 15, seed: 1, ..Default::default() };
        let front = nsga2(&[(-1.0, 1.0)], &cfg, |x, _| {
            if x[0] < 0.0 {
                vec![f64::NAN, f64::NAN]
            } else {
                vec![x[0], 1.0 - x[0]]
            }
        });
        assert!(front.iter().all(|i| i.x[0] >= 0.0 && i.objectives.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn operators_stay_in_bounds() {
        let mut r = rng::stream(4);
        let bounds = [(0.0, 1.0), (-5.0, 5.0), (2.0, 2.0)];
        for _ in 0..2000 {
            let mut a = vec![r.gen_range(0.0..=1.0), r.gen_range(-5.0..=5.0), 2.0];
            let mut b = vec![r.gen_range(0.0..=1.0), r.gen_range(-5.0..=5.0), 2.0];
            sbx(&mut r, &mut a, &mut b, &bounds, 15.0);
            mutate(&mut r, &mut a, &bounds, 1.0, 20.0);
            for (v, (lo, hi)) in a.iter().chain(&b).zip(bounds.iter().chain(&bounds)) {
                assert!(v >= lo && v <= hi);
            }
        }
    }
}
