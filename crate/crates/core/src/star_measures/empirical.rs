use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{ReconError, Result};

/// Finite positive measure on the extended real line with finitely many
/// atoms. Atoms at `-inf` and `+inf` are ordinary points.
///
/// Points are sorted and distinct; `cum[i]` is the mass of points `<= points[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
    cum: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Build from (point, weight) pairs. Equal points are merged and zero
    /// weights dropped.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(x, w) in &pairs {
            if x.is_nan() {
                return Err(ReconError::InvalidMeasure("NaN atom".into()));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(ReconError::InvalidMeasure(format!("bad weight {w} at {x}")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if w == 0.0 {
                continue;
            }
            match points.last() {
                Some(&p) if p == x => *weights.last_mut().expect("paired") += w,
                _ => {
                    points.push(x);
                    weights.push(w);
                }
            }
        }
        let mut acc = 0.0;
        let cum = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { points, weights, cum })
    }

    /// Probability measure putting mass `1/n` on each sample.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(ReconError::InvalidMeasure("no samples".into()));
        }
        let n = samples.len() as f64;
        let mut samples = samples;
        if samples.iter().any(|x| x.is_nan()) {
            return Err(ReconError::InvalidMeasure("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < samples.len() {
            let j = i + samples[i..].partition_point(|&y| y == samples[i]);
            pairs.push((samples[i], (j - i) as f64 / n));
            i = j;
        }
        Self::from_weighted(pairs)
    }

    pub fn dirac(x: f64) -> Self {
        Self::from_weighted(vec![(x, 1.0)]).expect("finite atom")
    }

    pub fn zero() -> Self {
        Self { points: vec![], weights: vec![], cum: vec![] }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Mass of `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&p| p <= x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    /// Mass of `(-inf, x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&p| p < x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    /// Smallest atom whose cumulative mass reaches `level` (absolute mass,
    /// not normalised). Levels beyond the total return the last atom.
    pub fn quantile_mass(&self, level: f64) -> f64 {
        let i = self.cum.partition_point(|&c| c < level);
        self.points[i.min(self.points.len() - 1)]
    }

    /// Quantile at normalised level `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.quantile_mass(u * self.mass())
    }

    /// Draw one point with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, w)| x * w).sum::<f64>() / self.mass()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_weighted(self.iter().map(|(x, w)| (x, w * c)).collect())
    }

    pub fn normalised(&self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(ReconError::InvalidMeasure("cannot normalise a null measure".into()));
        }
        self.scaled(1.0 / m)
    }

    /// Sum of two measures.
    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::from_weighted(self.iter().chain(other.iter()).collect())
    }

    /// Write as CSV: a comment header with mass and colour count, then
    /// `point,weight` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, k: Option<usize>) -> Result<()> {
        let mut s = String::new();
        let k = k.map_or("na".to_string(), |k| k.to_string());
        let _ = writeln!(s, "# mass={} k={}", self.mass(), k);
        s.push_str("point,weight\n");
        for (x, p) in self.iter() {
            let _ = writeln!(s, "{x},{p}");
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Read the format produced by [`write_csv`](Self::write_csv). Returns the
    /// measure and the colour count from the header, if any.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, Option<usize>)> {
        let mut k = None;
        let mut pairs = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line == "point,weight" {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                for field in h.split_whitespace() {
                    if let Some(v) = field.strip_prefix("k=") {
                        k = v.parse().ok();
                    }
                }
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| ReconError::Parse(format!("line {}: expected point,weight", n + 1)))?;
            let x: f64 = a.trim().parse().map_err(|e| ReconError::Parse(format!("line {}: {e}", n + 1)))?;
            let p: f64 = b.trim().parse().map_err(|e| ReconError::Parse(format!("line {}: {e}", n + 1)))?;
            pairs.push((x, p));
        }
        Ok((Self::from_weighted(pairs)?, k))
    }
}
