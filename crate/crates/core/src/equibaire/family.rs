use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowGenerator;
use crate::moebius::{Homography, MoebiusMap};

/// Geometric tail of flow times, `2⁵ … 2¹⁰`.
const FLOW_TAIL: [f64; 6] = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];

/// A sampled family: iterates `{fⁿ : 0 ≤ n ≤ n_max}` or flow maps
/// `{exp(tA)}` over `t ∈ [0, t_max]` plus a geometric tail.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilySpec {
    Iterates {
        map: MoebiusMap,
        n_max: usize,
    },
    Flow {
        generator: FlowGenerator,
        t_max: f64,
        sample_count: usize,
    },
}

impl FamilySpec {
    pub fn iterates(map: MoebiusMap, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::parameter("n_max", "must be positive"));
        }
        Ok(FamilySpec::Iterates { map, n_max })
    }

    /// Flow family with times `k·t_max/sample_count` for `k = 0..=sample_count`
    /// and the tail `2⁵ … 2¹⁰` beyond `t_max`.
    pub fn flow(generator: FlowGenerator, t_max: f64, sample_count: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::parameter("t_max", "must be positive and finite"));
        }
        if sample_count == 0 {
            return Err(Error::parameter("sample_count", "must be positive"));
        }
        Ok(FamilySpec::Flow {
            generator,
            t_max,
            sample_count,
        })
    }

    /// Iterate indices (as reals) or flow times, starting at 0.
    pub fn parameters(&self) -> Vec<f64> {
        match self {
            FamilySpec::Iterates { n_max, .. } => (0..=*n_max).map(|n| n as f64).collect(),
            FamilySpec::Flow {
                t_max,
                sample_count,
                ..
            } => {
                let step = t_max / *sample_count as f64;
                let mut ts: Vec<f64> = (0..=*sample_count).map(|k| k as f64 * step).collect();
                ts.extend(FLOW_TAIL.iter().copied().filter(|&t| t > *t_max));
                ts
            }
        }
    }

    /// The member at parameter `s` as a projective matrix.
    pub fn member(&self, s: f64) -> Homography {
        match self {
            FamilySpec::Iterates { map, .. } => map.homography().power(s as u64),
            FamilySpec::Flow { generator, .. } => generator.homography(s),
        }
    }

    pub fn members(&self) -> Vec<Homography> {
        self.parameters()
            .into_iter()
            .map(|s| self.member(s))
            .collect()
    }
}
