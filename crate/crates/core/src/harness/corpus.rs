//! Seeded corpora: superpositions of generator fields at random grid-aligned
//! positions.

use crate::error::{Error, Result};
use crate::fields::{synth, GeneratorSpec, Grid, SampledField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ingredient {
    Delta,
    Heaviside,
    Gaussian,
    PowerSingularity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub label: String,
    pub parts: Vec<GeneratorSpec>,
}

impl CorpusItem {
    pub fn single(g: GeneratorSpec) -> CorpusItem {
        CorpusItem {
            label: g.name().to_string(),
            parts: vec![g],
        }
    }

    pub fn field(&self, grid: &Grid) -> Result<SampledField> {
        let mut f = SampledField::zeros(grid.clone());
        for p in &self.parts {
            f = f.add(&synth(p, grid)?)?;
        }
        Ok(f)
    }
}

/// Recipe for a random corpus on a d = 1 grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecipe {
    pub seed: u64,
    pub count: usize,
    /// Placements are grid points inside [lo, hi].
    pub span: (f64, f64),
    pub ingredients: Vec<Ingredient>,
    /// Each item superposes 1..=max_parts ingredients.
    pub max_parts: usize,
    /// When nonempty, placements are an anchor plus at most `jitter` grid
    /// cells instead of a uniform point of `span`.
    #[serde(default)]
    pub anchors: Vec<f64>,
    #[serde(default)]
    pub jitter: i64,
}

impl CorpusRecipe {
    pub fn new(seed: u64, count: usize, span: (f64, f64), ingredients: &[Ingredient], max_parts: usize) -> Self {
        CorpusRecipe {
            seed,
            count,
            span,
            ingredients: ingredients.to_vec(),
            max_parts,
            anchors: Vec::new(),
            jitter: 0,
        }
    }

    pub fn anchored(mut self, anchors: Vec<f64>, jitter: i64) -> Self {
        self.anchors = anchors;
        self.jitter = jitter;
        self
    }
}

fn grid_point(g: &Grid, rng: &mut ChaCha8Rng, recipe: &CorpusRecipe) -> f64 {
    let h = g.spacing[0];
    if !recipe.anchors.is_empty() {
        let a = recipe.anchors[rng.gen_range(0..recipe.anchors.len())];
        let m = ((a - g.origin[0]) / h).round() as i64 + rng.gen_range(-recipe.jitter..=recipe.jitter);
        return g.origin[0] + m as f64 * h;
    }
    let span = recipe.span;
    let lo = ((span.0 - g.origin[0]) / h).ceil() as i64;
    let hi = ((span.1 - g.origin[0]) / h).floor() as i64;
    let m = rng.gen_range(lo..=hi);
    g.origin[0] + m as f64 * h
}

/// Support radius of power singularities. Their cutoff switches off over
/// [R/2, R]; a narrow transition reads as a singularity of its own.
pub const POWER_CUTOFF: f64 = 4.0;

fn ingredient(kind: Ingredient, x: f64, rng: &mut ChaCha8Rng) -> GeneratorSpec {
    match kind {
        Ingredient::Delta => GeneratorSpec::Delta { x0: vec![x] },
        Ingredient::Heaviside => GeneratorSpec::Heaviside { x0: x },
        Ingredient::Gaussian => GeneratorSpec::Gaussian {
            center: vec![x],
            sigma: rng.gen_range(0.3..1.0),
        },
        Ingredient::PowerSingularity => GeneratorSpec::PowerSingularity {
            alpha: [0.5, 1.5][rng.gen_range(0..2)],
            x0: vec![x],
            cutoff: POWER_CUTOFF,
        },
    }
}

pub fn random_corpus(recipe: &CorpusRecipe, grid: &Grid) -> Result<Vec<CorpusItem>> {
    if grid.dim() != 1 || recipe.ingredients.is_empty() || recipe.max_parts == 0 {
        return Err(Error::InvalidConfig("corpus recipes need a d = 1 grid, ingredients and max_parts ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut out = Vec::with_capacity(recipe.count);
    for i in 0..recipe.count {
        let n = rng.gen_range(1..=recipe.max_parts);
        let mut parts = Vec::with_capacity(n);
        for _ in 0..n {
            let kind = recipe.ingredients[rng.gen_range(0..recipe.ingredients.len())];
            let x = grid_point(grid, &mut rng, recipe);
            parts.push(ingredient(kind, x, &mut rng));
        }
        let names: Vec<&str> = parts.iter().map(|p| p.name()).collect();
        out.push(CorpusItem {
            label: format!("{i}:{}", names.join("+")),
            parts,
        });
    }
    Ok(out)
}
