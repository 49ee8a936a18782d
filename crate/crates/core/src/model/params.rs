use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::{Error, Result};

/// Decay rates of the exponential kernel.
///
/// Evaluation paths accept both forms; every fitting path requires
/// [`Decay::Shared`].
#[derive(Debug, Clone, PartialEq)]
pub enum Decay {
    Shared(f64),
    PerPair(Matrix),
}

/// Parameters of an M-variate Hawkes process with exponential kernels.
///
/// `alpha[p][q]` is the jump in the intensity of dimension `p` caused by an
/// event in dimension `q`. Instances are validated on construction and
/// immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesParams {
    mu: Vec<f64>,
    alpha: Matrix,
    beta: Decay,
}

/// The parameter JSON document: `{"mu":[...], "alpha":[[...]], "beta": <number | [[...]]>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub mu: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: BetaDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaDoc {
    Shared(f64),
    PerPair(Vec<Vec<f64>>),
}

impl HawkesParams {
    /// Validates and builds a parameter set. See [`validate`].
    pub fn new(mu: Vec<f64>, alpha: Vec<Vec<f64>>, beta: Decay) -> Result<Self> {
        let m = mu.len();
        if m == 0 {
            return Err(Error::ShapeMismatch("mu must have at least one entry".into()));
        }
        if alpha.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "alpha has {} rows but mu has {m} entries",
                alpha.len()
            )));
        }
        if let Some((p, row)) = alpha.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::ShapeMismatch(format!(
                "alpha row {p} has {} entries, expected {m}",
                row.len()
            )));
        }
        let alpha = Matrix::from_rows(&alpha).expect("square by the checks above");
        let params = Self { mu, alpha, beta };
        validate(&params)?;
        Ok(params)
    }

    /// Univariate shorthand.
    pub fn univariate(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![mu], vec![vec![alpha]], Decay::Shared(beta))
    }

    /// Multivariate parameters with one decay shared by all pairs.
    pub fn shared(mu: Vec<f64>, alpha: Matrix, beta: f64) -> Result<Self> {
        Self::new(mu, alpha.to_rows(), Decay::Shared(beta))
    }

    pub fn from_doc(doc: ParamsDoc) -> Result<Self> {
        let beta = match doc.beta {
            BetaDoc::Shared(b) => Decay::Shared(b),
            BetaDoc::PerPair(rows) => {
                let m = doc.mu.len();
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::ShapeMismatch(format!(
                        "beta matrix must be {m}x{m} to match mu"
                    )));
                }
                Decay::PerPair(Matrix::from_rows(&rows).expect("checked square"))
            }
        };
        Self::new(doc.mu, doc.alpha, beta)
    }

    pub fn to_doc(&self) -> ParamsDoc {
        ParamsDoc {
            mu: self.mu.clone(),
            alpha: self.alpha.to_rows(),
            beta: match &self.beta {
                Decay::Shared(b) => BetaDoc::Shared(*b),
                Decay::PerPair(m) => BetaDoc::PerPair(m.to_rows()),
            },
        }
    }

    pub fn dims(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    pub fn beta(&self) -> &Decay {
        &self.beta
    }

    #[inline]
    pub fn beta_pq(&self, p: usize, q: usize) -> f64 {
        match &self.beta {
            Decay::Shared(b) => *b,
            Decay::PerPair(m) => m.get(p, q),
        }
    }

    /// The shared decay, if the parameters use one.
    pub fn shared_beta(&self) -> Option<f64> {
        match &self.beta {
            Decay::Shared(b) => Some(*b),
            Decay::PerPair(_) => None,
        }
    }

    /// Whether the fitting paths accept these parameters (shared decay only).
    pub fn is_fittable(&self) -> bool {
        self.shared_beta().is_some()
    }

    /// Same baseline and excitation with a different shared decay.
    pub fn with_shared_beta(&self, beta: f64) -> Result<Self> {
        let p = Self {
            mu: self.mu.clone(),
            alpha: self.alpha.clone(),
            beta: Decay::Shared(beta),
        };
        validate(&p)?;
        Ok(p)
    }

    /// Relabels dimensions: new dimension `i` is old dimension `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mu = perm.iter().map(|&i| self.mu[i]).collect();
        let beta = match &self.beta {
            Decay::Shared(b) => Decay::Shared(*b),
            Decay::PerPair(m) => Decay::PerPair(m.permuted(perm)),
        };
        Self::new(mu, self.alpha.permuted(perm).to_rows(), beta)
    }
}

impl Serialize for HawkesParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HawkesParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ParamsDoc::deserialize(d)?;
        HawkesParams::from_doc(doc).map_err(serde::de::Error::custom)
    }
}

/// Checks every invariant: finite entries, `mu >= 0`, `alpha >= 0`,
/// `beta > 0`, and consistent shapes.
pub fn validate(params: &HawkesParams) -> Result<()> {
    let m = params.mu.len();
    if params.alpha.dim() != m {
        return Err(Error::ShapeMismatch(format!(
            "alpha is {0}x{0} but mu has {m} entries",
            params.alpha.dim()
        )));
    }
    if let Decay::PerPair(b) = &params.beta {
        if b.dim() != m {
            return Err(Error::ShapeMismatch(format!(
                "beta is {0}x{0} but mu has {m} entries",
                b.dim()
            )));
        }
    }
    for (p, &v) in params.mu.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("mu[{p}]")));
        }
        if v < 0.0 {
            return Err(Error::NegativeRate(format!("mu[{p}] = {v}")));
        }
    }
    for p in 0..m {
        for q in 0..m {
            let v = params.alpha.get(p, q);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("alpha[{p}][{q}]")));
            }
            if v < 0.0 {
                return Err(Error::NegativeRate(format!("alpha[{p}][{q}] = {v}")));
            }
        }
    }
    match &params.beta {
        Decay::Shared(b) => check_decay(*b, "beta")?,
        Decay::PerPair(mat) => {
            for p in 0..m {
                for q in 0..m {
                    check_decay(mat.get(p, q), &format!("beta[{p}][{q}]"))?;
                }
            }
        }
    }
    Ok(())
}

fn check_decay(b: f64, name: &str) -> Result<()> {
    if !b.is_finite() {
        return Err(Error::NonFinite(name.to_string()));
    }
    if b <= 0.0 {
        return Err(Error::NegativeRate(format!("{name} = {b}")));
    }
    Ok(())
}
