use serde::{Deserialize, Serialize};

/// How an [`IntegralEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed-form or point evaluation with no discretization error.
    Exact,
    TensorGrid,
    Adaptive,
    MonteCarlo,
    /// Finite differences of sampled values followed by Richardson extrapolation.
    Richardson,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::TensorGrid => "tensor-grid",
            Method::Adaptive => "adaptive",
            Method::MonteCarlo => "monte-carlo",
            Method::Richardson => "richardson",
        }
    }
}

/// A value together with a nonnegative error estimate.
///
/// For deterministic methods the error is the difference against a
/// second, independent discretization; for Monte-Carlo it is a standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub n_evals: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IntegralEstimate {
    pub fn exact(value: f64) -> Self {
        IntegralEstimate {
            value,
            error: 0.0,
            method: Method::Exact,
            n_evals: 1,
            notes: Vec::new(),
        }
    }

    pub fn new(value: f64, error: f64, method: Method, n_evals: usize) -> Self {
        IntegralEstimate {
            value,
            error: error.abs(),
            method,
            n_evals,
            notes: Vec::new(),
        }
    }

    pub fn zero(method: Method) -> Self {
        IntegralEstimate::new(0.0, 0.0, method, 0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn scale(&self, factor: f64) -> Self {
        IntegralEstimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            method: self.method,
            n_evals: self.n_evals,
            notes: self.notes.clone(),
        }
    }

    /// Sum of two estimates; errors add linearly.
    pub fn add(&self, other: &IntegralEstimate) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &IntegralEstimate) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &IntegralEstimate, sign: f64) -> Self {
        let method = if self.method == other.method || other.method == Method::Exact {
            self.method
        } else if self.method == Method::Exact {
            other.method
        } else {
            // mixed methods; keep the stochastic label when present
            if self.method == Method::MonteCarlo || other.method == Method::MonteCarlo {
                Method::MonteCarlo
            } else {
                self.method
            }
        };
        let mut notes = self.notes.clone();
        for n in &other.notes {
            if !notes.contains(n) {
                notes.push(n.clone());
            }
        }
        IntegralEstimate {
            value: self.value + sign * other.value,
            error: self.error + other.error,
            method,
            n_evals: self.n_evals + other.n_evals,
            notes,
        }
    }

    /// True when `|value - target| <= k * error`, with an absolute floor.
    pub fn agrees_with(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.value - target).abs() <= (k * self.error).max(floor)
    }
}

/// How the spread of an [`Ensemble`] translates into an error bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spread {
    /// Single exact value.
    Exact,
    /// `[primary, alternate]`: two independent discretizations.
    Nested,
    /// `[mean, batch_1, .., batch_B]`: Monte-Carlo batch means.
    Batches,
    /// `[primary, alternate, batch_1, .., batch_B]`: a discretization
    /// alternate on top of Monte-Carlo batches; the two errors add.
    NestedBatches,
}

/// A quantity evaluated under several discretizations (or sample batches).
///
/// Every linear post-processing step (stencils, extrapolation, sums) is applied
/// component-wise, so the spread of the result carries the propagated error.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub values: Vec<f64>,
    pub spread: Spread,
}

impl Ensemble {
    pub fn exact(v: f64) -> Self {
        Ensemble {
            values: vec![v],
            spread: Spread::Exact,
        }
    }

    pub fn nested(primary: f64, alternate: f64) -> Self {
        Ensemble {
            values: vec![primary, alternate],
            spread: Spread::Nested,
        }
    }

    pub fn batches(mean: f64, batches: Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(batches.len() + 1);
        values.push(mean);
        values.extend(batches);
        Ensemble {
            values,
            spread: Spread::Batches,
        }
    }

    pub fn nested_batches(primary: f64, alternate: f64, batches: &[f64]) -> Self {
        let mut values = Vec::with_capacity(batches.len() + 2);
        values.push(primary);
        values.push(alternate);
        values.extend_from_slice(batches);
        Ensemble {
            values,
            spread: Spread::NestedBatches,
        }
    }

    pub fn primary(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Error implied by the spread of the components.
    pub fn spread_error(&self) -> f64 {
        match self.spread {
            Spread::Exact => 0.0,
            Spread::Nested => self.values[1..]
                .iter()
                .map(|v| (v - self.values[0]).abs())
                .fold(0.0, f64::max),
            Spread::Batches => batch_error(self.values[0], &self.values[1..]),
            Spread::NestedBatches => {
                (self.values[1] - self.values[0]).abs()
                    + batch_error(self.values[0], &self.values[2..])
            }
        }
    }

    /// Component-wise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Ensemble {
            values: self.values.iter().map(|&v| f(v)).collect(),
            spread: self.spread,
        }
    }

    /// Component-wise linear combination `sum_i c_i * e_i`.
    pub fn linear(terms: &[(f64, &Ensemble)]) -> Self {
        let len = terms.iter().map(|(_, e)| e.len()).max().unwrap_or(1);
        let spread = terms
            .iter()
            .map(|(_, e)| e.spread)
            .find(|s| *s != Spread::Exact)
            .unwrap_or(Spread::Exact);
        let values = (0..len)
            .map(|i| {
                terms
                    .iter()
                    .map(|(c, e)| c * e.values[i.min(e.len() - 1)])
                    .sum()
            })
            .collect();
        Ensemble { values, spread }
    }

    /// Component-wise binary operation.
    pub fn zip_with(&self, other: &Ensemble, f: impl Fn(f64, f64) -> f64) -> Self {
        let len = self.len().max(other.len());
        let spread = if self.spread != Spread::Exact {
            self.spread
        } else {
            other.spread
        };
        Ensemble {
            values: (0..len)
                .map(|i| {
                    f(
                        self.values[i.min(self.len() - 1)],
                        other.values[i.min(other.len() - 1)],
                    )
                })
                .collect(),
            spread,
        }
    }

    pub fn to_estimate(&self, method: Method, n_evals: usize) -> IntegralEstimate {
        IntegralEstimate::new(self.primary(), self.spread_error(), method, n_evals)
    }
}

/// Standard error of a mean from its batch means. With fewer than two
/// batches nothing is known about the spread, so the error is `|mean|`.
fn batch_error(mean: f64, b: &[f64]) -> f64 {
    if b.len() < 2 {
        return mean.abs();
    }
    let n = b.len() as f64;
    let m = pairwise_sum(b) / n;
    let var = pairwise_sum(&b.iter().map(|v| (v - m).powi(2)).collect::<Vec<_>>()) / (n - 1.0);
    (var / n).sqrt()
}

/// Pairwise (cascade) summation; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_spread_is_abs_difference() {
        let e = Ensemble::nested(1.0, 1.25);
        assert_eq!(e.spread_error(), 0.25);
        let d = Ensemble::linear(&[(2.0, &e), (-1.0, &Ensemble::exact(0.5))]);
        assert_eq!(d.values, vec![1.5, 2.0]);
        assert_eq!(d.spread, Spread::Nested);
    }

    #[test]
    fn batch_spread_matches_standard_error() {
        let e = Ensemble::batches(2.0, vec![1.0, 2.0, 3.0]);
        // sample std = 1, B = 3
        assert!((e.spread_error() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }

    #[test]
    fn estimate_arithmetic_adds_errors() {
        let a = IntegralEstimate::new(1.0, 0.1, Method::TensorGrid, 10);
        let b = IntegralEstimate::new(0.5, 0.2, Method::TensorGrid, 5);
        let c = a.sub(&b);
        assert!((c.value - 0.5).abs() < 1e-15);
        assert!((c.error - 0.3).abs() < 1e-15);
        assert_eq!(c.n_evals, 15);
        assert_eq!(a.scale(-2.0).error, 0.2);
    }
}
