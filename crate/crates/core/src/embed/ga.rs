use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans, silhouette, KMeansOptions};

use super::{select_columns, EmbedError, ReductionMeta, ReductionMethod, ReductionResult};

/// Genetic-algorithm settings for feature-subset search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / n_features`.
    pub mutation_rate: Option<f64>,
    pub elitism: usize,
    pub seed: u64,
    /// k-means restarts inside each fitness evaluation.
    pub kmeans_restarts: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 30,
            tournament: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 2,
            seed: 0,
            kmeans_restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub mask: Vec<bool>,
    pub fitness: f64,
    /// Best fitness seen so far, after the initial population and each generation.
    pub trace: Vec<f64>,
}

/// Best silhouette of k-means on the masked features over `k_values`.
///
/// The empty mask scores -1. Each `k` uses a fixed seed so the fitness is a
/// pure function of the mask.
pub fn ga_fitness(
    x: &DMatrix<f64>,
    mask: &[bool],
    k_values: &[usize],
    params: &GaParams,
) -> Result<f64, EmbedError> {
    if !mask.iter().any(|&b| b) {
        return Ok(-1.0);
    }
    let sub = select_columns(x, mask);
    let opts = KMeansOptions {
        n_init: params.kmeans_restarts.max(1),
        ..KMeansOptions::default()
    };
    let mut best = -1.0f64;
    for &k in k_values.iter().filter(|&&k| k >= 2 && k < x.nrows()) {
        let seed = params.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
        let a = kmeans(&sub, k, seed, &opts)?;
        // all points identical on this subset: a single effective cluster
        let s = silhouette(&sub, &a.labels).unwrap_or(-1.0);
        best = best.max(s);
    }
    Ok(best)
}

struct Evaluator<'a> {
    x: &'a DMatrix<f64>,
    k_values: &'a [usize],
    params: &'a GaParams,
    cache: HashMap<Vec<bool>, f64>,
}

impl Evaluator<'_> {
    fn fitness(&mut self, mask: &[bool]) -> Result<f64, EmbedError> {
        if let Some(&f) = self.cache.get(mask) {
            return Ok(f);
        }
        let f = ga_fitness(self.x, mask, self.k_values, self.params)?;
        self.cache.insert(mask.to_vec(), f);
        Ok(f)
    }
}

fn tournament<'p>(pop: &'p [(Vec<bool>, f64)], size: usize, rng: &mut impl Rng) -> &'p Vec<bool> {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size.max(1) {
        let c = rng.gen_range(0..pop.len());
        if pop[c].1 > pop[best].1 {
            best = c;
        }
    }
    &pop[best].0
}

/// Searches binary feature masks for the highest clustering silhouette.
///
/// The all-features mask seeds the initial population and the best
/// `elitism` members survive each generation, so the best fitness never
/// drops and never falls below the all-features fitness.
pub fn ga_search(x: &DMatrix<f64>, k_values: &[usize], params: &GaParams) -> Result<GaOutcome, EmbedError> {
    let n_features = x.ncols();
    if n_features == 0 {
        return Err(EmbedError::Invalid("no features to select".into()));
    }
    if params.population < 2 || params.elitism > params.population {
        return Err(EmbedError::Invalid(format!(
            "population {} / elitism {} invalid",
            params.population, params.elitism
        )));
    }
    let mutation = params.mutation_rate.unwrap_or(1.0 / n_features as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut eval = Evaluator {
        x,
        k_values,
        params,
        cache: HashMap::new(),
    };

    let mut masks = vec![vec![true; n_features]];
    while masks.len() < params.population {
        masks.push((0..n_features).map(|_| rng.gen_bool(0.5)).collect());
    }
    let mut pop = masks
        .into_iter()
        .map(|m| eval.fitness(&m).map(|f| (m, f)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut best = pop[0].clone();
    for cand in &pop {
        if cand.1 > best.1 {
            best = cand.clone();
        }
    }
    let mut trace = vec![best.1];
    for _ in 0..params.generations {
        let mut ranked: Vec<usize> = (0..pop.len()).collect();
        ranked.sort_by(|&a, &b| pop[b].1.total_cmp(&pop[a].1).then(a.cmp(&b)));
        let mut next: Vec<Vec<bool>> = ranked[..params.elitism].iter().map(|&i| pop[i].0.clone()).collect();
        while next.len() < params.population {
            let a = tournament(&pop, params.tournament, &mut rng);
            let b = tournament(&pop, params.tournament, &mut rng);
            let mut child: Vec<bool> = if rng.gen_bool(params.crossover_rate.clamp(0.0, 1.0)) {
                a.iter().zip(b).map(|(&x, &y)| if rng.gen_bool(0.5) { x } else { y }).collect()
            } else {
                a.clone()
            };
            for bit in child.iter_mut() {
                if rng.gen_bool(mutation.clamp(0.0, 1.0)) {
                    *bit = !*bit;
                }
            }
            next.push(child);
        }
        pop = next
            .into_iter()
            .map(|m| eval.fitness(&m).map(|f| (m, f)))
            .collect::<Result<Vec<_>, _>>()?;
        for cand in &pop {
            if cand.1 > best.1 {
                best = cand.clone();
            }
        }
        trace.push(best.1);
    }
    Ok(GaOutcome {
        mask: best.0,
        fitness: best.1,
        trace,
    })
}

pub fn ga_select(x: &DMatrix<f64>, k_values: &[usize], params: &GaParams) -> Result<ReductionResult, EmbedError> {
    let outcome = ga_search(x, k_values, params)?;
    Ok(ReductionResult {
        method: ReductionMethod::Ga,
        matrix: select_columns(x, &outcome.mask),
        meta: ReductionMeta::Ga {
            mask: outcome.mask,
            fitness: outcome.fitness,
            trace: outcome.trace,
        },
    })
}
