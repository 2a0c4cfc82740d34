//! Seeded synthetic universe of factor-driven portfolios.
//!
//! Constituents load on a small set of return factors. In the
//! [`OverlapProfile::SectorTilted`] profile every constituent has a home
//! sector (one per factor) and each portfolio draws its holdings from a
//! random sector mixture; the `overlap` parameter steers draws towards a
//! small shared core of each sector. Portfolio returns are the
//! holdings-weighted factor exposure times the factor returns plus
//! independent noise.
//!
//! [`OverlapProfile::Planted`] builds a universe in which the constituent
//! cosine similarity of two portfolios equals the correlation of their
//! returns (with zero noise), so any metric monotone in that similarity
//! ranks partners exactly by return correlation.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::constituent::features::{row_cosine_matrix, FeatureTable};
use crate::error::{Error, Result};
use crate::eval::ranking::{Period, ReturnSeries};
use crate::ingest::{format_weight, write_holdings, write_returns};
use crate::matrix::SimilarityMatrix;
use crate::rng::rng;
use crate::set::WeightedSet;

/// Largest planted universe; the geometric angle spacing underflows beyond it.
pub const PLANTED_MAX_PORTFOLIOS: usize = 30;

const FACTOR_VOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapProfile {
    SectorTilted,
    Planted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticUniverseSpec {
    pub n_portfolios: usize,
    pub n_constituents: usize,
    pub n_factors: usize,
    pub holdings_per_portfolio: usize,
    /// Probability in `[0, 1]` that a holding is drawn from its sector's shared core.
    pub overlap: f64,
    /// Standard deviation of the monthly idiosyncratic portfolio return.
    pub noise: f64,
    pub n_periods: usize,
    pub start: Period,
    pub profile: OverlapProfile,
    pub seed: u64,
}

impl Default for SyntheticUniverseSpec {
    fn default() -> Self {
        Self {
            n_portfolios: 20,
            n_constituents: 2000,
            n_factors: 4,
            holdings_per_portfolio: 100,
            overlap: 0.5,
            noise: 0.005,
            n_periods: 26,
            start: Period { year: 2022, month: 2 },
            profile: OverlapProfile::SectorTilted,
            seed: 42,
        }
    }
}

impl SyntheticUniverseSpec {
    pub fn planted(n_portfolios: usize, seed: u64) -> Self {
        Self {
            n_portfolios,
            n_constituents: n_portfolios,
            n_factors: 2,
            holdings_per_portfolio: 1,
            overlap: 0.0,
            noise: 0.0,
            profile: OverlapProfile::Planted,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_portfolios == 0 || self.n_constituents == 0 || self.n_factors == 0 || self.holdings_per_portfolio == 0 {
            return bad("synthetic counts must all be at least 1".into());
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return bad(format!("noise must be a non-negative number, got {}", self.noise));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return bad(format!("overlap must lie in [0, 1], got {}", self.overlap));
        }
        if self.n_periods < 3 {
            return bad("need at least 3 return periods".into());
        }
        match self.profile {
            OverlapProfile::SectorTilted => {
                if self.holdings_per_portfolio * 2 > self.n_constituents {
                    return bad(format!(
                        "holdings per portfolio ({}) may be at most half the constituents ({})",
                        self.holdings_per_portfolio, self.n_constituents
                    ));
                }
                if self.n_constituents < self.n_factors {
                    return bad("need at least one constituent per factor".into());
                }
            }
            OverlapProfile::Planted => {
                if self.n_portfolios > PLANTED_MAX_PORTFOLIOS {
                    return bad(format!("planted profile supports at most {PLANTED_MAX_PORTFOLIOS} portfolios"));
                }
                if self.n_factors < 2 || self.n_constituents != self.n_portfolios || self.holdings_per_portfolio != 1 {
                    return bad("planted profile needs >= 2 factors and one constituent per portfolio".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUniverse {
    pub spec: SyntheticUniverseSpec,
    pub holdings: Vec<WeightedSet>,
    /// Constituent factor loadings, one column per factor.
    pub loadings: FeatureTable,
    pub factor_returns: Vec<ReturnSeries>,
    pub portfolio_returns: Vec<ReturnSeries>,
}

impl SyntheticUniverse {
    /// Cosine of factor loadings between the constituents held by any portfolio.
    pub fn constituent_similarity(&self) -> Result<SimilarityMatrix> {
        let mut held: Vec<usize> = self
            .holdings
            .iter()
            .flat_map(|s| s.ids().iter().map(|id| constituent_index(id.as_str())))
            .collect();
        held.sort_unstable();
        held.dedup();
        row_cosine_matrix(&self.loadings.select_rows(&held))
    }

    /// In-memory `holdings.csv`, `returns.csv`, `factor-returns.csv`,
    /// `constituents.csv` and `spec.json`, in that order.
    pub fn files(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        let mut holdings = Vec::new();
        write_holdings(&self.holdings, &mut holdings)?;
        let mut returns = Vec::new();
        write_returns(&self.portfolio_returns, &mut returns)?;
        let mut factors = Vec::new();
        write_returns(&self.factor_returns, &mut factors)?;
        let mut loadings = Vec::new();
        write_loadings(&self.loadings, &mut loadings)?;
        let mut spec = serde_json::to_vec_pretty(&self.spec)?;
        spec.push(b'\n');
        Ok(vec![
            ("holdings.csv", holdings),
            ("returns.csv", returns),
            ("factor-returns.csv", factors),
            ("constituents.csv", loadings),
            ("spec.json", spec),
        ])
    }

    /// Writes [`Self::files`] into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let files = self.files()?;
        std::fs::create_dir_all(dir)?;
        for (name, contents) in files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn constituent_name(c: usize) -> String {
    format!("c{c:05}")
}

fn constituent_index(name: &str) -> usize {
    name[1..].parse().expect("generated constituent ids are c<digits>")
}

fn write_loadings<W: Write>(table: &FeatureTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["constituent_id".to_string()];
    header.extend(table.feature_names().iter().cloned());
    w.write_record(&header)?;
    for r in 0..table.nrows() {
        let mut row = vec![table.row_ids()[r].clone()];
        row.extend(table.row(r).iter().map(|v| format_weight(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn periods(spec: &SyntheticUniverseSpec) -> Vec<Period> {
    let mut p = spec.start;
    (0..spec.n_periods)
        .map(|_| {
            let here = p;
            p = p.next();
            here
        })
        .collect()
}

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("finite non-negative std")
}

/// `n_periods × n_factors` factor returns.
fn draw_factors<R: Rng>(spec: &SyntheticUniverseSpec, rng: &mut R) -> Vec<Vec<f64>> {
    let dist = normal(FACTOR_VOL);
    (0..spec.n_periods)
        .map(|_| (0..spec.n_factors).map(|_| dist.sample(rng)).collect())
        .collect()
}

/// Demeans the first two factor columns and makes them orthogonal with equal
/// sample variance, so returns built from unit loadings on them have sample
/// correlation equal to the loadings' cosine.
fn orthonormalize_first_two(f: &mut [Vec<f64>]) {
    let t = f.len() as f64;
    let target = FACTOR_VOL * t.sqrt();
    let mut cols: Vec<Vec<f64>> = (0..2).map(|k| f.iter().map(|row| row[k]).collect()).collect();
    for c in &mut cols {
        let m = c.iter().sum::<f64>() / t;
        c.iter_mut().for_each(|v| *v -= m);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n0 = dot(&cols[0], &cols[0]).sqrt();
    cols[0].iter_mut().for_each(|v| *v *= target / n0);
    let proj = dot(&cols[1], &cols[0]) / dot(&cols[0], &cols[0]);
    let c0 = cols[0].clone();
    cols[1].iter_mut().zip(&c0).for_each(|(v, u)| *v -= proj * u);
    let n1 = dot(&cols[1], &cols[1]).sqrt();
    cols[1].iter_mut().for_each(|v| *v *= target / n1);
    for (t, row) in f.iter_mut().enumerate() {
        row[0] = cols[0][t];
        row[1] = cols[1][t];
    }
}

fn sector_tilted<R: Rng>(spec: &SyntheticUniverseSpec, rng: &mut R) -> Result<(Vec<WeightedSet>, Vec<Vec<f64>>)> {
    let f = spec.n_factors;
    let spill: Normal<f64> = Normal::new(0.0, 0.3).expect("valid normal");
    let loadings: Vec<Vec<f64>> = (0..spec.n_constituents)
        .map(|c| {
            (0..f)
                .map(|k| f64::from(u8::from(k == c % f)) + spill.sample(rng).abs())
                .collect()
        })
        .collect();
    let members: Vec<Vec<usize>> = (0..f)
        .map(|k| (0..spec.n_constituents).filter(|c| c % f == k).collect())
        .collect();
    let mix_dist = Gamma::new(0.5, 1.0).expect("valid gamma");
    let weight_dist = LogNormal::new(0.0, 1.0).expect("valid lognormal");

    let mut holdings = Vec::with_capacity(spec.n_portfolios);
    for p in 0..spec.n_portfolios {
        let raw: Vec<f64> = (0..f).map(|_| mix_dist.sample(rng) + 1e-9).collect();
        let total: f64 = raw.iter().sum();
        let mix: Vec<f64> = raw.iter().map(|g| g / total).collect();
        let mut chosen: Vec<usize> = Vec::with_capacity(spec.holdings_per_portfolio);
        let mut taken = vec![false; spec.n_constituents];
        while chosen.len() < spec.holdings_per_portfolio {
            let mut u: f64 = rng.random();
            let mut sector = f - 1;
            for (k, m) in mix.iter().enumerate() {
                if u < *m {
                    sector = k;
                    break;
                }
                u -= m;
            }
            let pool = &members[sector];
            let core = (pool.len() / 20).max(1);
            let c = if rng.random::<f64>() < spec.overlap {
                pool[rng.random_range(0..core)]
            } else {
                pool[rng.random_range(0..pool.len())]
            };
            if !taken[c] {
                taken[c] = true;
                chosen.push(c);
            }
        }
        let entries: Vec<(String, f64)> = chosen
            .into_iter()
            .map(|c| (constituent_name(c), weight_dist.sample(rng)))
            .collect();
        holdings.push(WeightedSet::new(format!("etf-{p:02}"), entries, true)?);
    }
    Ok((holdings, loadings))
}

fn planted(spec: &SyntheticUniverseSpec) -> Result<(Vec<WeightedSet>, Vec<Vec<f64>>)> {
    let n = spec.n_portfolios;
    // geometric gaps: every distance from a given angle to the others is distinct
    let scale = if n > 1 { FRAC_PI_2 / (2f64.powi(n as i32 - 1) - 1.0) } else { 0.0 };
    let loadings: Vec<Vec<f64>> = (0..n)
        .map(|p| {
            let theta = scale * (2f64.powi(p as i32) - 1.0);
            let mut l = vec![0.0; spec.n_factors];
            l[0] = theta.cos();
            l[1] = theta.sin();
            l
        })
        .collect();
    let holdings = (0..n)
        .map(|p| WeightedSet::new(format!("etf-{p:02}"), [(constituent_name(p), 1.0)], true))
        .collect::<Result<_>>()?;
    Ok((holdings, loadings))
}

pub fn generate_synthetic_universe(spec: &SyntheticUniverseSpec) -> Result<SyntheticUniverse> {
    spec.validate()?;
    let mut rng = rng(spec.seed);
    let (holdings, loadings) = match spec.profile {
        OverlapProfile::SectorTilted => sector_tilted(spec, &mut rng)?,
        OverlapProfile::Planted => planted(spec)?,
    };
    let mut factors = draw_factors(spec, &mut rng);
    if spec.profile == OverlapProfile::Planted {
        orthonormalize_first_two(&mut factors);
    }
    let noise = normal(spec.noise);
    let periods = periods(spec);

    let mut portfolio_returns = Vec::with_capacity(holdings.len());
    for set in &holdings {
        let mut exposure = vec![0.0; spec.n_factors];
        for (id, w) in set.iter() {
            let l = &loadings[constituent_index(id.as_str())];
            exposure.iter_mut().zip(l).for_each(|(e, v)| *e += w * v);
        }
        let obs = periods
            .iter()
            .zip(&factors)
            .map(|(&p, f)| {
                let r: f64 = exposure.iter().zip(f).map(|(e, x)| e * x).sum();
                (p, r + noise.sample(&mut rng))
            })
            .collect();
        portfolio_returns.push(ReturnSeries::new(set.label(), obs)?);
    }
    let factor_returns = (0..spec.n_factors)
        .map(|k| {
            let obs = periods.iter().zip(&factors).map(|(&p, f)| (p, f[k])).collect();
            ReturnSeries::new(format!("factor-{k}"), obs)
        })
        .collect::<Result<_>>()?;
    let loadings = FeatureTable::new(
        (0..loadings.len()).map(constituent_name).collect(),
        (0..spec.n_factors).map(|k| format!("factor_{k}")).collect(),
        loadings,
    )?;
    Ok(SyntheticUniverse {
        spec: spec.clone(),
        holdings,
        loadings,
        factor_returns,
        portfolio_returns,
    })
}
