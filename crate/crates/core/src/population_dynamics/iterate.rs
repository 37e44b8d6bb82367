use std::fmt::Write as _;
use std::io::Write;

use super::reduced::step_image;
use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::star_measures::StarMeasure;
use crate::tree_model::OffspringLaw;

/// Number of quantile levels recorded per generation.
pub const QUANTILE_GRID: usize = 512;

/// `E[max_l X^(l) - 1/k]`, the reconstruction gap of a star measure.
pub fn reconstruction_gap(pop: &StarMeasure) -> f64 {
    pop.values().mean() - 1.0 / pop.k() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub mean: f64,
    pub p_frozen: f64,
    pub p_near_frozen: f64,
    pub gap: f64,
    /// Quantiles at levels `(i + 1/2) / QUANTILE_GRID`.
    pub quantiles: Vec<f64>,
}

impl GenerationStats {
    pub fn of(generation: usize, pop: &StarMeasure) -> Self {
        let v = pop.values();
        let m = v.mass();
        Self {
            generation,
            mean: v.mean(),
            p_frozen: (m - v.cdf_left(1.0)) / m,
            p_near_frozen: (m - v.cdf(1.0 - 1e-9)) / m,
            gap: reconstruction_gap(pop),
            quantiles: (0..QUANTILE_GRID).map(|i| v.quantile((i as f64 + 0.5) / QUANTILE_GRID as f64)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub k: usize,
    pub generations: Vec<GenerationStats>,
    pub last: StarMeasure,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::from("generation,mean,p_frozen,p_near_frozen,gap");
        for i in 0..QUANTILE_GRID {
            let _ = write!(s, ",q{i:03}");
        }
        s.push('\n');
        for g in &self.generations {
            let _ = write!(s, "{},{},{},{},{}", g.generation, g.mean, g.p_frozen, g.p_near_frozen, g.gap);
            for q in &g.quantiles {
                let _ = write!(s, ",{q}");
            }
            s.push('\n');
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// Population dynamics: `n_steps` generations, each made of `n` fresh
/// reduced samples drawn from the previous generation. Generation `g` uses
/// `stream.substream(g)`.
pub fn iterate(pop0: &StarMeasure, law: &OffspringLaw, n_steps: usize, n: usize, stream: RngStream) -> Result<Trajectory> {
    if n == 0 {
        return invalid("population size must be positive");
    }
    law.validate()?;
    let mut pop = pop0.clone();
    let mut generations = vec![GenerationStats::of(0, &pop)];
    for g in 1..=n_steps {
        pop = step_image(&pop, law, n, stream.substream(g as u64))?;
        generations.push(GenerationStats::of(g, &pop));
    }
    Ok(Trajectory { k: pop0.k(), generations, last: pop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_values() {
        assert_eq!(reconstruction_gap(&StarMeasure::uniform(4)), 0.0);
        assert_eq!(reconstruction_gap(&StarMeasure::frozen(4)), 0.75);
        let half = StarMeasure::uniform(4).mix(0.5, &StarMeasure::frozen(4)).unwrap();
        assert!((reconstruction_gap(&half) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn uniform_start_stays_put() {
        for &k in &[3usize, 10, 100] {
            let t = iterate(&StarMeasure::uniform(k), &OffspringLaw::Poisson { mean: 30.0 }, 20, 1000, RngStream::new(5)).unwrap();
            for g in &t.generations {
                assert_eq!(g.mean, 1.0 / k as f64);
                assert_eq!(g.gap, 0.0);
            }
            assert_eq!(t.last, StarMeasure::uniform(k));
        }
    }

    #[test]
    fn frozen_regime_stays_frozen() {
        let t = iterate(&StarMeasure::frozen(3), &OffspringLaw::Poisson { mean: 20.0 }, 20, 10_000, RngStream::new(6)).unwrap();
        assert!(t.generations.iter().all(|g| g.p_near_frozen >= 0.5));
    }

    #[test]
    fn subcritical_regime_forgets() {
        let t = iterate(&StarMeasure::frozen(3), &OffspringLaw::Poisson { mean: 1.0 }, 20, 10_000, RngStream::new(7)).unwrap();
        assert!(t.generations.last().unwrap().gap <= 1e-2);
    }

    #[test]
    fn csv_has_all_columns() {
        let t = iterate(&StarMeasure::uniform(3), &OffspringLaw::Poisson { mean: 2.0 }, 1, 1000, RngStream::new(8)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 5 + QUANTILE_GRID);
        assert_eq!(lines[1].split(',').count(), 5 + QUANTILE_GRID);
    }
}
