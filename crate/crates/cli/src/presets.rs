//! Simulation grids of the published experiments.

use clap::ValueEnum;
use descore::model::ModelFamily;
use descore::sim::BetaPattern;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Linear model, s = 2, size over d × ρ × pattern.
    Table1,
    /// Linear model, s = 3.
    Table2,
    /// Logistic model, s = 2.
    Table3,
    /// Linear model, s = 2, power over θ = 0, 0.05, …, 0.55.
    Figure1,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Figure1 => "figure1",
        }
    }
}

/// Default value lists; each sweep is their cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub family: ModelFamily,
    pub d: Vec<usize>,
    pub rho: Vec<f64>,
    pub pattern: Vec<BetaPattern>,
    pub s: Vec<usize>,
    pub theta: Vec<f64>,
    pub reps: usize,
}

const DS: [usize; 3] = [100, 200, 500];
const RHOS: [f64; 4] = [0.25, 0.4, 0.6, 0.75];

pub fn grid(preset: Option<Preset>) -> Grid {
    let linear = ModelFamily::GaussianKnownVar { sigma2: 1.0 };
    let patterns = vec![BetaPattern::Dirac, BetaPattern::UniformRange { lo: 0.0, hi: 2.0 }];
    let published = |family, s| Grid {
        family,
        d: DS.to_vec(),
        rho: RHOS.to_vec(),
        pattern: patterns.clone(),
        s: vec![s],
        theta: vec![0.0],
        reps: 500,
    };
    match preset {
        None => Grid {
            family: linear,
            d: vec![100],
            rho: vec![0.25],
            pattern: vec![BetaPattern::Dirac],
            s: vec![2],
            theta: vec![0.0],
            reps: 500,
        },
        Some(Preset::Table1) => published(linear, 2),
        Some(Preset::Table2) => published(linear, 3),
        Some(Preset::Table3) => published(ModelFamily::Logistic, 2),
        Some(Preset::Figure1) => Grid { theta: (0..12).map(|k| k as f64 * 0.05).collect(), ..published(linear, 2) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_grids() {
        let t1 = grid(Some(Preset::Table1));
        assert_eq!(t1.d.len() * t1.rho.len() * t1.pattern.len(), 24);
        assert_eq!(grid(Some(Preset::Table2)).s, vec![3]);
        assert_eq!(grid(Some(Preset::Table3)).family, ModelFamily::Logistic);
        let f1 = grid(Some(Preset::Figure1)).theta;
        assert_eq!(f1.len(), 12);
        assert!((f1[11] - 0.55).abs() < 1e-12);
    }
}
