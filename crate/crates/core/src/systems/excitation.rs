use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amp: f64,
    /// rad/s
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Open-loop input `u(t) = offset + Σ aᵢ sin(ωᵢt + φᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<Sinusoid>,
}

impl Excitation {
    pub fn constant(c: f64) -> Self {
        Excitation {
            offset: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|s| s.amp * (s.freq * t + s.phase).sin())
                .sum::<f64>()
    }

    /// Lower bound of `u` over all time.
    pub fn min_bound(&self) -> f64 {
        self.offset - self.terms.iter().map(|s| s.amp.abs()).sum::<f64>()
    }
}
