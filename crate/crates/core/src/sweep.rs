//! Validation-based selection of `(p, s, α)`.
//!
//! Each candidate augments the training windows, a [`Scorer`] fits a
//! forecaster on originals plus synthetic windows and reports validation
//! MSE, and the lowest score wins (ties go to the earlier candidate).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_batch, Method, TpsConfig};
use crate::data::WindowBatches;
use crate::error::{Result, TpsError};
use crate::par;
use crate::rng::RngStream;
use crate::series::{SeriesBatch, SplitPair};

/// Candidate patch lengths.
pub const PATCH_LENGTHS: [usize; 21] = [
    16, 32, 48, 64, 72, 96, 120, 168, 192, 200, 220, 240, 280, 300, 340, 380, 400, 420, 440, 560,
    700,
];
/// Candidate strides.
pub const STRIDES: [usize; 10] = [1, 2, 5, 8, 12, 16, 24, 32, 36, 96];
/// Candidate shuffle rates.
pub const SHUFFLE_RATES: [f64; 6] = [0.2, 0.5, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub patch_len: usize,
    pub stride: usize,
    pub alpha: f64,
}

impl std::fmt::Display for Candidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.patch_len, self.stride, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub candidates: Vec<Candidate>,
}

impl SweepGrid {
    /// One `p,s,alpha` tuple per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut candidates = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || TpsError::Config(format!("grid line {}: expected p,s,alpha, got {line:?}", n + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            candidates.push(Candidate {
                patch_len: fields[0].parse().map_err(|_| bad())?,
                stride: fields[1].parse().map_err(|_| bad())?,
                alpha: fields[2].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self { candidates })
    }

    /// Twenty tuples drawn from the candidate lists, spanning short/long
    /// patches, dense/sparse strides and mild/full shuffling.
    pub fn default_grid() -> Self {
        let tuples: [(usize, usize, f64); 20] = [
            (16, 1, 1.0),
            (16, 2, 0.5),
            (16, 8, 1.0),
            (32, 5, 1.0),
            (32, 2, 0.8),
            (32, 8, 0.5),
            (48, 12, 0.9),
            (64, 8, 1.0),
            (64, 16, 0.7),
            (72, 12, 0.5),
            (96, 24, 1.0),
            (96, 8, 0.2),
            (120, 24, 1.0),
            (168, 24, 0.8),
            (192, 32, 1.0),
            (200, 36, 0.7),
            (240, 24, 0.9),
            (300, 32, 0.5),
            (340, 96, 1.0),
            (420, 96, 0.8),
        ];
        Self {
            candidates: tuples
                .into_iter()
                .map(|(patch_len, stride, alpha)| Candidate {
                    patch_len,
                    stride,
                    alpha,
                })
                .collect(),
        }
    }
}

/// Scores an augmentation by fitting on training windows and evaluating on
/// validation windows. Lower is better.
pub trait Scorer: Sync {
    fn name(&self) -> &str;

    fn score(
        &self,
        train: &mut dyn Iterator<Item = Result<SplitPair>>,
        val: &mut dyn Iterator<Item = SplitPair>,
    ) -> Result<f64>;
}

/// Channel-independent ridge regression from the look-back window (plus a
/// bias) to the horizon, shared across channels. A cheap stand-in for a deep
/// forecaster.
#[derive(Debug, Clone, Copy)]
pub struct RidgeScorer {
    pub lambda: f64,
}

impl Default for RidgeScorer {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

/// Rows are `(b, c)` sequences: look-back values followed by a 1 for the bias.
fn design(pair: &SplitPair) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t, h, c) = (pair.lookback_len(), pair.horizon_len(), pair.channels());
    let rows = pair.batch() * c;
    let x = DMatrix::from_fn(rows, t + 1, |r, j| {
        if j == t {
            1.0
        } else {
            pair.lookback().get(r / c, j, r % c)
        }
    });
    let y = DMatrix::from_fn(rows, h, |r, j| pair.horizon().get(r / c, j, r % c));
    (x, y)
}

impl RidgeScorer {
    pub fn fit(&self, train: &mut dyn Iterator<Item = Result<SplitPair>>) -> Result<DMatrix<f64>> {
        let mut gram: Option<DMatrix<f64>> = None;
        let mut cross: Option<DMatrix<f64>> = None;
        for pair in train {
            let pair = pair?;
            if pair.batch() == 0 {
                continue;
            }
            let (x, y) = design(&pair);
            let xt = x.transpose();
            match (&mut gram, &mut cross) {
                (Some(g), Some(xy)) => {
                    g.gemm(1.0, &xt, &x, 1.0);
                    xy.gemm(1.0, &xt, &y, 1.0);
                }
                _ => {
                    gram = Some(&xt * &x);
                    cross = Some(&xt * &y);
                }
            }
        }
        let (mut gram, cross) = match (gram, cross) {
            (Some(g), Some(c)) => (g, c),
            _ => return Err(TpsError::Data("no training windows".into())),
        };
        let n = gram.nrows();
        for i in 0..n - 1 {
            gram[(i, i)] += self.lambda;
        }
        // bias column is unpenalized; a tiny jitter keeps the system definite
        gram[(n - 1, n - 1)] += 1e-9;
        let chol = gram
            .cholesky()
            .ok_or_else(|| TpsError::Data("ridge system is not positive definite".into()))?;
        Ok(chol.solve(&cross))
    }
}

impl Scorer for RidgeScorer {
    fn name(&self) -> &str {
        "ridge"
    }

    fn score(
        &self,
        train: &mut dyn Iterator<Item = Result<SplitPair>>,
        val: &mut dyn Iterator<Item = SplitPair>,
    ) -> Result<f64> {
        let weights = self.fit(train)?;
        let mut sse = 0.0;
        let mut count = 0usize;
        for pair in val {
            let (x, y) = design(&pair);
            let residual = &x * &weights - y;
            sse += residual.iter().map(|r| r * r).sum::<f64>();
            count += residual.len();
        }
        if count == 0 {
            return Err(TpsError::Data("no validation windows".into()));
        }
        Ok(sse / count as f64)
    }
}

/// Everything a sweep needs besides the grid.
#[derive(Debug, Clone)]
pub struct SweepSetup<'a> {
    pub train: &'a SeriesBatch,
    pub val: &'a SeriesBatch,
    pub lookback: usize,
    pub horizon: usize,
    pub batch_size: usize,
    pub window_stride: usize,
    /// Seed, variant and level shared by every candidate.
    pub base: TpsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub candidate: Candidate,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCandidate {
    pub index: usize,
    pub candidate: Candidate,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    /// Validation score without augmentation.
    pub baseline: f64,
    /// Evaluated candidates, best first; equal scores keep grid order.
    pub ranked: Vec<SweepEntry>,
    pub skipped: Vec<SkippedCandidate>,
}

impl SweepOutcome {
    pub fn best(&self) -> Option<&SweepEntry> {
        self.ranked.first()
    }
}

impl SweepSetup<'_> {
    fn config(&self, c: &Candidate) -> TpsConfig {
        TpsConfig {
            patch_len: c.patch_len,
            stride: c.stride,
            alpha: c.alpha,
            ..self.base
        }
    }

    fn check(&self, c: &Candidate) -> Result<()> {
        let cfg = self.config(c);
        cfg.validate(self.train.channels())?;
        let span = if cfg.variant == crate::augment::Variant::InputOnly {
            self.lookback
        } else {
            self.lookback + self.horizon
        };
        if cfg.patch_len > span {
            return Err(TpsError::Geometry(format!(
                "patch length {} exceeds window length {span}",
                cfg.patch_len
            )));
        }
        Ok(())
    }

    fn windows<'s>(&self, split: &'s SeriesBatch) -> Result<WindowBatches<'s>> {
        WindowBatches::new(split, self.lookback, self.horizon, self.batch_size, self.window_stride)
    }

    /// Scores training windows augmented by `method` (or unaugmented for `None`).
    pub fn evaluate(&self, method: Option<&Method>, scorer: &dyn Scorer) -> Result<f64> {
        let root = RngStream::new(self.base.seed);
        let mut train = self.windows(self.train)?.enumerate().map(|(n, pair)| match method {
            Some(m) => augment_batch(&pair, m, 1, 1.0, root.derive(n as u64)),
            None => Ok(pair),
        });
        let mut val = self.windows(self.val)?;
        scorer.score(&mut train, &mut val)
    }

    pub fn run(&self, grid: &SweepGrid, scorer: &dyn Scorer) -> Result<SweepOutcome> {
        if grid.candidates.is_empty() {
            return Err(TpsError::Config("sweep grid is empty".into()));
        }
        let baseline = self.evaluate(None, scorer)?;
        let results = par::map_range(grid.candidates.len(), |i| {
            let candidate = grid.candidates[i];
            self.check(&candidate)?;
            self.evaluate(Some(&Method::Tps(self.config(&candidate))), scorer)
        });
        let mut ranked = Vec::new();
        let mut skipped = Vec::new();
        for (index, (candidate, result)) in grid.candidates.iter().zip(results).enumerate() {
            match result {
                Ok(score) => ranked.push(SweepEntry {
                    index,
                    candidate: *candidate,
                    score,
                }),
                Err(e @ (TpsError::Config(_) | TpsError::Geometry(_) | TpsError::DegenerateVariance(_))) => {
                    skipped.push(SkippedCandidate {
                        index,
                        candidate: *candidate,
                        reason: e.to_string(),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        // stable: ties keep grid order
        ranked.sort_by(|a, b| a.score.total_cmp(&b.score));
        Ok(SweepOutcome {
            baseline,
            ranked,
            skipped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(len: usize, seed: u64) -> SeriesBatch {
        let mut s = seed;
        SeriesBatch::from_fn(1, len, 2, |_, t, c| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            (t as f64 * 0.3 + c as f64).sin() + 0.2 * noise
        })
        .unwrap()
    }

    #[test]
    fn parses_grid_file() {
        let g = SweepGrid::parse("# p,s,alpha\n32,5,1.0\n\n16, 2, 0.5 # mild\n").unwrap();
        assert_eq!(g.candidates.len(), 2);
        assert_eq!(g.candidates[1].stride, 2);
        assert!(SweepGrid::parse("32,5").is_err());
        assert!(SweepGrid::parse("a,b,c").is_err());
    }

    #[test]
    fn default_grid_uses_listed_values() {
        let g = SweepGrid::default_grid();
        assert_eq!(g.candidates.len(), 20);
        for c in &g.candidates {
            assert!(PATCH_LENGTHS.contains(&c.patch_len));
            assert!(STRIDES.contains(&c.stride));
            assert!(SHUFFLE_RATES.contains(&c.alpha));
        }
    }

    #[test]
    fn ridge_recovers_linear_map() {
        // horizon = mean of the last two look-back values
        let x = series(200, 3);
        let w = WindowBatches::new(&x, 4, 1, 16, 1).unwrap();
        let pairs: Vec<SplitPair> = w
            .map(|p| {
                let f = SeriesBatch::from_fn(p.batch(), 1, 2, |b, _, c| {
                    0.5 * (p.lookback().get(b, 2, c) + p.lookback().get(b, 3, c))
                })
                .unwrap();
                SplitPair::new(p.lookback().clone(), f).unwrap()
            })
            .collect();
        let scorer = RidgeScorer { lambda: 1e-8 };
        let mse = scorer
            .score(&mut pairs.iter().cloned().map(Ok), &mut pairs.iter().cloned())
            .unwrap();
        assert!(mse < 1e-10, "{mse}");
    }

    #[test]
    fn single_candidate_selected_and_invalid_skipped() {
        let train = series(120, 1);
        let val = series(60, 2);
        let setup = SweepSetup {
            train: &train,
            val: &val,
            lookback: 16,
            horizon: 8,
            batch_size: 8,
            window_stride: 2,
            base: TpsConfig::new(1, 1, 1.0).with_seed(4),
        };
        let grid = SweepGrid::parse("8,2,1.0\n100,2,1.0\n").unwrap();
        let out = setup.run(&grid, &RidgeScorer::default()).unwrap();
        assert_eq!(out.ranked.len(), 1);
        assert_eq!(out.best().unwrap().index, 0);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].index, 1);
        assert!(SweepGrid::parse("").map(|g| setup.run(&g, &RidgeScorer::default())).unwrap().is_err());
    }

    #[test]
    fn ties_keep_grid_order() {
        let train = series(120, 1);
        let val = series(60, 2);
        let setup = SweepSetup {
            train: &train,
            val: &val,
            lookback: 16,
            horizon: 8,
            batch_size: 8,
            window_stride: 3,
            base: TpsConfig::new(1, 1, 1.0).with_seed(4),
        };
        // alpha small enough that nothing moves: every candidate is identity
        let grid = SweepGrid::parse("8,2,0.05\n4,2,0.05\n6,3,0.05\n").unwrap();
        let out = setup.run(&grid, &RidgeScorer::default()).unwrap();
        let order: Vec<usize> = out.ranked.iter().map(|e| e.index).collect();
        let scores: Vec<f64> = out.ranked.iter().map(|e| e.score).collect();
        assert!(scores.windows(2).all(|w| w[0] <= w[1]));
        if scores.iter().all(|&s| (s - scores[0]).abs() == 0.0) {
            assert_eq!(order, vec![0, 1, 2]);
        }
        let again = setup.run(&grid, &RidgeScorer::default()).unwrap();
        assert_eq!(again, out);
    }
}
