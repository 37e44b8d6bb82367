/// The log-likelihood transform between star values in `[0, 1]` and the
/// extended half-line, for a fixed number of colours.
///
/// `forward(x) = ln[(1 - (1-x)/(k-1)) / (1-x)]` vanishes at `1/k`, is `+inf`
/// at 1 and equals `ln((k-2)/(k-1))` at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform {
    k: f64,
}

impl Transform {
    pub fn new(k: usize) -> Self {
        assert!(k >= 3, "need at least three colours");
        Self { k: k as f64 }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `1/k`, the value of the uniform vector.
    pub fn floor(&self) -> f64 {
        1.0 / self.k
    }

    pub fn forward(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return f64::INFINITY;
        }
        if x == self.floor() {
            return 0.0;
        }
        ((self.k * x - 1.0) / ((self.k - 1.0) * (1.0 - x))).ln_1p()
    }

    pub fn inverse(&self, y: f64) -> f64 {
        if y == f64::INFINITY {
            return 1.0;
        }
        if y == 0.0 {
            return self.floor();
        }
        1.0 - 1.0 / (y.exp() + 1.0 / (self.k - 1.0))
    }

    /// `1 - inverse(y)`, accurate for large `y`.
    pub fn inverse_complement(&self, y: f64) -> f64 {
        if y == f64::INFINITY {
            return 0.0;
        }
        1.0 / (y.exp() + 1.0 / (self.k - 1.0))
    }
}
