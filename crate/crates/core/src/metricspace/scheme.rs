use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::netgraph::VertexId;

type IndexFn<T> = dyn Fn(usize) -> T + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    FiniteSupport,
    DoubleExponential,
    Custom,
}

/// Estuary enumeration `u_0, u_1, ...` with weights `c_j > 0` and a
/// computable bound on every tail `Σ_{j ≥ J} c_j`.
#[derive(Clone)]
pub struct CoefficientScheme {
    kind: SchemeKind,
    support: Option<usize>,
    estuary: Arc<IndexFn<VertexId>>,
    coeff: Arc<IndexFn<f64>>,
    tail: Arc<IndexFn<f64>>,
}

impl fmt::Debug for CoefficientScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientScheme")
            .field("kind", &self.kind)
            .field("support", &self.support)
            .finish()
    }
}

/// Precipitous-decay diagnostic on the grid `ε = 2^{-k}`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub log2_inv_eps: Vec<u32>,
    pub j_eps: Vec<usize>,
    /// `ln J(ε) / ln|ln ε|`, with `ln 0` read as 0.
    pub ratios: Vec<f64>,
    pub precipitous: bool,
}

/// Largest `k` checked by [`CoefficientScheme::decay_report`].
const DECAY_GRID_MAX: u32 = 1000;
const DECAY_THRESHOLD: f64 = 0.5;
const J_SEARCH_LIMIT: usize = 1 << 22;

impl CoefficientScheme {
    pub fn finite(estuary: Vec<VertexId>, coeffs: Vec<f64>) -> Result<Self, MetricError> {
        if estuary.is_empty() || estuary.len() != coeffs.len() {
            return Err(MetricError::Invalid(format!(
                "{} estuary vertices but {} coefficients",
                estuary.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(MetricError::Invalid("coefficients must be positive and finite".into()));
        }
        let mut suffix = vec![0.0; coeffs.len() + 1];
        for j in (0..coeffs.len()).rev() {
            suffix[j] = suffix[j + 1] + coeffs[j];
        }
        let n = coeffs.len();
        let estuary = Arc::new(estuary);
        let coeffs = Arc::new(coeffs);
        Ok(CoefficientScheme {
            kind: SchemeKind::FiniteSupport,
            support: Some(n),
            estuary: Arc::new(move |j| estuary[j].clone()),
            coeff: Arc::new(move |j| coeffs.get(j).copied().unwrap_or(0.0)),
            tail: Arc::new(move |j| suffix[j.min(n)]),
        })
    }

    /// Single estuary vertex with weight 1.
    pub fn single(v: VertexId) -> Self {
        Self::finite(vec![v], vec![1.0]).expect("one positive weight")
    }

    /// `c_j = exp(−eʲ)·eʲ` over an infinite enumeration. Since `c_j` is the
    /// derivative of `−exp(−eˣ)` at `j`, decreasing for `x > 0`, the tail
    /// past `J` is at most `exp(−e^J)`.
    pub fn double_exponential(estuary: impl Fn(usize) -> VertexId + Send + Sync + 'static) -> Self {
        let c = |j: usize| {
            let e = (j as f64).exp();
            (-e).exp() * e
        };
        CoefficientScheme {
            kind: SchemeKind::DoubleExponential,
            support: None,
            estuary: Arc::new(estuary),
            coeff: Arc::new(c),
            tail: Arc::new(move |j| c(j) + (-(j as f64).exp()).exp()),
        }
    }

    /// Caller-supplied weights; `tail(J)` must bound `Σ_{j ≥ J} c_j` and tend to 0.
    pub fn custom(
        support: Option<usize>,
        estuary: impl Fn(usize) -> VertexId + Send + Sync + 'static,
        coeff: impl Fn(usize) -> f64 + Send + Sync + 'static,
        tail: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientScheme {
            kind: SchemeKind::Custom,
            support,
            estuary: Arc::new(estuary),
            coeff: Arc::new(coeff),
            tail: Arc::new(tail),
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Number of estuary vertices, `None` when infinite.
    pub fn support(&self) -> Option<usize> {
        self.support
    }

    pub fn vertex(&self, j: usize) -> VertexId {
        (self.estuary)(j)
    }

    pub fn coeff(&self, j: usize) -> f64 {
        (self.coeff)(j)
    }

    /// Upper bound on `Σ_{j ≥ J} c_j` (exact for finite support).
    pub fn tail_from(&self, j: usize) -> f64 {
        match self.support {
            Some(n) if j >= n => 0.0,
            _ => (self.tail)(j),
        }
    }

    /// Upper bound on `S = Σ c_j`.
    pub fn total_mass(&self) -> f64 {
        self.tail_from(0)
    }

    /// `J(ε) = min{J : Σ_{j > J} c_j < ε/2}`.
    pub fn j_eps(&self, eps: f64) -> Result<usize, MetricError> {
        let mut j = 0;
        while self.tail_from(j + 1) >= eps / 2.0 {
            j += 1;
            if j > J_SEARCH_LIMIT {
                return Err(MetricError::Invalid(format!("tail does not fall below {} ", eps / 2.0)));
            }
        }
        Ok(j)
    }

    /// Shortest prefix `0..L` whose tail bound is at most `tol`.
    pub fn prefix_len(&self, tol: f64) -> Result<usize, MetricError> {
        if let Some(n) = self.support {
            return Ok(n);
        }
        let mut l = 0;
        while self.tail_from(l) > tol {
            l += 1;
            if l > J_SEARCH_LIMIT {
                return Err(MetricError::Invalid(format!("tail does not fall below {tol}")));
            }
        }
        Ok(l)
    }

    /// Finite support is precipitous outright. Otherwise the ratio
    /// `ln J(ε) / ln|ln ε|` must be at most 0.5 at `ε = 2^{-1000}`; a finite
    /// grid cannot see the limit, so this is a heuristic.
    pub fn decay_report(&self) -> Result<DecayReport, MetricError> {
        let mut r = DecayReport {
            log2_inv_eps: Vec::new(),
            j_eps: Vec::new(),
            ratios: Vec::new(),
            precipitous: false,
        };
        for k in (8..=DECAY_GRID_MAX).step_by(8) {
            let eps = 2f64.powi(-(k as i32));
            let j = self.j_eps(eps)?;
            let ln_j = if j == 0 { 0.0 } else { (j as f64).ln() };
            r.log2_inv_eps.push(k);
            r.j_eps.push(j);
            r.ratios.push(ln_j / (k as f64 * std::f64::consts::LN_2).ln());
        }
        r.precipitous = self.support.is_some() || *r.ratios.last().unwrap() <= DECAY_THRESHOLD;
        Ok(r)
    }
}

/// JSON metric descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSpec {
    pub estuary: EstuarySpec,
    pub lambda: f64,
    pub scheme: SchemeName,
    #[serde(default)]
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EstuarySpec {
    List(Vec<VertexId>),
    /// `"naturals"`: `u_j = j`.
    Named(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Finite,
    Doubleexp,
}

impl MetricSpec {
    pub fn scheme(&self) -> Result<CoefficientScheme, MetricError> {
        match (&self.scheme, &self.estuary) {
            (SchemeName::Finite, EstuarySpec::List(vs)) => {
                let coeffs = if self.coeffs.is_empty() {
                    vec![1.0 / vs.len() as f64; vs.len()]
                } else {
                    self.coeffs.clone()
                };
                CoefficientScheme::finite(vs.clone(), coeffs)
            }
            (SchemeName::Doubleexp, EstuarySpec::Named(n)) if n == "naturals" => {
                Ok(CoefficientScheme::double_exponential(|j| VertexId::index(j as i64)))
            }
            (SchemeName::Doubleexp, EstuarySpec::List(vs)) => {
                let vs = vs.clone();
                let c = CoefficientScheme::double_exponential(|_| VertexId::index(0));
                let coeffs = (0..vs.len()).map(|j| c.coeff(j)).collect();
                CoefficientScheme::finite(vs, coeffs)
            }
            (s, e) => Err(MetricError::Invalid(format!(
                "unsupported estuary {e:?} for scheme {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_tails_are_exact() {
        let s = CoefficientScheme::finite(vec![VertexId::index(0), VertexId::index(1)], vec![0.5, 0.25]).unwrap();
        assert_eq!(s.total_mass(), 0.75);
        assert_eq!(s.tail_from(1), 0.25);
        assert_eq!(s.tail_from(5), 0.0);
        assert_eq!(s.j_eps(0.6).unwrap(), 0);
        assert_eq!(s.j_eps(0.4).unwrap(), 1);
        assert!(s.decay_report().unwrap().precipitous);
        assert!(CoefficientScheme::finite(vec![VertexId::index(0)], vec![0.0]).is_err());
    }

    #[test]
    fn double_exponential_tail_bounds_the_sum() {
        let s = CoefficientScheme::double_exponential(|j| VertexId::index(j as i64));
        for j in 0..5 {
            let direct: f64 = (j..40).map(|i| s.coeff(i)).sum();
            assert!(direct <= s.tail_from(j), "J={j}");
        }
        // J(ε) stays below ln(−ln(ε/2)) + 1.
        for k in [8, 32, 128, 512] {
            let eps = 2f64.powi(-k);
            let j = s.j_eps(eps).unwrap() as f64;
            assert!(j <= (-(eps / 2.0).ln()).ln() + 1.0);
        }
        assert!(s.decay_report().unwrap().precipitous);
    }

    #[test]
    fn geometric_decay_is_not_precipitous() {
        let s = CoefficientScheme::custom(
            None,
            |j| VertexId::index(j as i64),
            |j| 0.5f64.powi(j as i32 + 1),
            |j| 0.5f64.powi(j as i32),
        );
        let r = s.decay_report().unwrap();
        assert!(!r.precipitous);
        assert!(r.ratios.last().unwrap() > &1.0);
    }

    #[test]
    fn spec_parsing() {
        let m: MetricSpec =
            serde_json::from_str(r#"{"estuary": [[0,0]], "lambda": 2, "scheme": "finite", "coeffs": [1]}"#).unwrap();
        assert_eq!(m.scheme().unwrap().support(), Some(1));
        let m: MetricSpec =
            serde_json::from_str(r#"{"estuary": "naturals", "lambda": 2, "scheme": "doubleexp"}"#).unwrap();
        assert_eq!(m.scheme().unwrap().kind(), SchemeKind::DoubleExponential);
    }
}
