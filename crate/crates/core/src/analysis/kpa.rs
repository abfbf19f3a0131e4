//! Known-plaintext probe against the block layer.
//!
//! The attacker holds masked plaintext blocks `S` (delta = 0) and what was
//! transmitted for them. Without offsets that is `C = S V`, so three
//! independent rows of `S` pin down `V`. With offsets every transmitted
//! column carries a fresh `r_l` and the same solve yields garbage.

use rand::{seq::index::sample, CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::cipher::{encrypt_traced, CipherOptions, Layout, SessionParams};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::keyexchange::PrimitiveVector;
use crate::matrixcore::{mat_inv, mat_mul, mat_sub, Block, KeyMatrices};

use super::entropy::{entropy, EntropyReport};
use super::session::Party;

const MAX_RESAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpaVerdict {
    Recovered,
    Failed,
    /// The attacker never sees `S` because the mask is withheld.
    NotAttempted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KpaConfig {
    pub trials: usize,
    /// Known `(S, observed)` block pairs per trial, gathered over as many
    /// messages under one shared vector as needed.
    pub num_pairs: usize,
    pub offsets: bool,
    pub mask_known: bool,
    pub rows: usize,
    pub cols: usize,
}

impl Default for KpaConfig {
    fn default() -> Self {
        KpaConfig {
            trials: 100,
            num_pairs: 3,
            offsets: false,
            mask_known: true,
            rows: 8,
            cols: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpaReport {
    pub verdicts: Vec<KpaVerdict>,
    pub singular_resamples: usize,
    /// Plug-in entropy of the pooled residuals `observed - S V_guess` on
    /// pairs outside the solved triple.
    pub residual: Option<EntropyReport>,
    /// Mean plug-in entropy of the same number of uniform F_p draws.
    pub uniform_reference: Option<f64>,
}

impl KpaReport {
    pub fn recovered(&self) -> usize {
        self.verdicts.iter().filter(|&&v| v == KpaVerdict::Recovered).count()
    }

    pub fn attempted(&self) -> usize {
        self.verdicts.iter().filter(|&&v| v != KpaVerdict::NotAttempted).count()
    }

    pub fn recovery_rate(&self) -> f64 {
        self.recovered() as f64 / self.attempted().max(1) as f64
    }

    pub fn residual_gap(&self) -> Option<f64> {
        Some((self.residual?.h_bits - self.uniform_reference?).abs())
    }
}

/// Solves `A V = B` where `A` stacks the chosen rows of the known `S`
/// blocks and `B` the matching observed rows.
pub fn solve_v(pairs: &[(Block, Block)], picks: [(usize, usize); 3], ctx: &FieldCtx) -> Result<Block> {
    let mut a = Block::ZERO;
    let mut b = Block::ZERO;
    for (t, &(q, r)) in picks.iter().enumerate() {
        a.0[t] = pairs[q].0 .0[r];
        b.0[t] = pairs[q].1 .0[r];
    }
    let a_inv = mat_inv(&a, ctx).map_err(|_| Error::SingularSystem)?;
    Ok(mat_mul(&a_inv, &b, ctx))
}

struct TrialOutcome {
    verdict: KpaVerdict,
    resamples: usize,
    residuals: Vec<FieldElem>,
}

pub fn kpa_probe<R: RngCore + CryptoRng>(
    cfg: &KpaConfig,
    ctx: &FieldCtx,
    g: &PrimitiveVector,
    rng: &mut R,
) -> Result<KpaReport> {
    if cfg.num_pairs < 3 {
        return Err(Error::TooFewPairs(cfg.num_pairs));
    }
    let seeds: Vec<u64> = (0..cfg.trials).map(|_| rng.gen()).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&s| one_trial(cfg, ctx, g, &mut ChaCha20Rng::seed_from_u64(s)))
        .collect::<Result<Vec<_>>>()?;

    let singular_resamples = outcomes.iter().map(|o| o.resamples).sum();
    let residuals: Vec<FieldElem> = outcomes.iter().flat_map(|o| o.residuals.iter().copied()).collect();
    let (residual, uniform_reference) = if residuals.is_empty() {
        (None, None)
    } else {
        let reps = 8;
        let p = ctx.modulus();
        let mean = (0..reps)
            .map(|_| {
                let u: Vec<FieldElem> = (0..residuals.len()).map(|_| ctx.elem(rng.gen_range(0..p))).collect();
                entropy(&u).map(|r| r.h_bits)
            })
            .sum::<Result<f64>>()?
            / reps as f64;
        (Some(entropy(&residuals)?), Some(mean))
    };
    Ok(KpaReport {
        verdicts: outcomes.iter().map(|o| o.verdict).collect(),
        singular_resamples,
        residual,
        uniform_reference,
    })
}

fn one_trial(cfg: &KpaConfig, ctx: &FieldCtx, g: &PrimitiveVector, rng: &mut ChaCha20Rng) -> Result<TrialOutcome> {
    if !cfg.mask_known {
        return Ok(TrialOutcome {
            verdict: KpaVerdict::NotAttempted,
            resamples: 0,
            residuals: Vec::new(),
        });
    }
    let party = Party::random(ctx, g, rng)?;
    let km = KeyMatrices::build(&party.keys.shared, ctx)?;
    let opts = CipherOptions {
        offsets: cfg.offsets,
        ..Default::default()
    };
    let layout = Layout::new(cfg.rows, cfg.cols);
    let mut pairs: Vec<(Block, Block)> = Vec::with_capacity(cfg.num_pairs);
    while pairs.len() < cfg.num_pairs {
        let msg: Vec<u8> = (0..cfg.rows * cfg.cols).map(|_| rng.gen()).collect();
        let t = encrypt_traced(&msg, &layout, &party.keys, &SessionParams::random(rng), ctx, opts, None)?;
        let cols = &t.ciphertext.columns;
        for (k, b) in t.blocks.iter().enumerate() {
            if b.row == b.col || pairs.len() == cfg.num_pairs {
                continue;
            }
            let observed = Block::from_columns([cols[3 * k], cols[3 * k + 1], cols[3 * k + 2]]);
            pairs.push((b.plain, observed));
        }
    }

    let mut picks = [(0, 0), (1, 0), (2, 0)];
    let mut resamples = 0;
    let guess = loop {
        match solve_v(&pairs, picks, ctx) {
            Ok(v) => break Some(v),
            Err(Error::SingularSystem) if resamples < MAX_RESAMPLES => {
                resamples += 1;
                let idx = sample(rng, pairs.len() * 3, 3);
                let mut it = idx.iter().map(|x| (x / 3, x % 3));
                picks = [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
            }
            Err(Error::SingularSystem) => break None,
            Err(e) => return Err(e),
        }
    };
    let Some(v_guess) = guess else {
        return Ok(TrialOutcome {
            verdict: KpaVerdict::Failed,
            resamples,
            residuals: Vec::new(),
        });
    };
    let used: Vec<usize> = picks.iter().map(|p| p.0).collect();
    let residuals = pairs
        .iter()
        .enumerate()
        .filter(|(q, _)| !used.contains(q))
        .flat_map(|(_, (s, obs))| mat_sub(obs, &mat_mul(s, &v_guess, ctx), ctx).0.into_iter().flatten())
        .collect();
    Ok(TrialOutcome {
        verdict: if v_guess == km.v {
            KpaVerdict::Recovered
        } else {
            KpaVerdict::Failed
        },
        resamples,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (FieldCtx, PrimitiveVector) {
        let ctx = FieldCtx::new(12347).unwrap();
        let g = PrimitiveVector::new(&ctx, [2, 5, 6]).unwrap();
        (ctx, g)
    }

    #[test]
    fn solve_recovers_planted_v() {
        let ctx = FieldCtx::new(12347).unwrap();
        let v = Block::from_u64(&ctx, [[0, 10509, 10509], [11849, 0, 11849], [10836, 10836, 0]]);
        let s = [
            Block::from_u64(&ctx, [[1, 2, 3], [0, 0, 0], [0, 0, 0]]),
            Block::from_u64(&ctx, [[4, 5, 6], [0, 0, 0], [0, 0, 0]]),
            Block::from_u64(&ctx, [[7, 8, 10], [0, 0, 0], [0, 0, 0]]),
        ];
        let pairs: Vec<_> = s.iter().map(|s| (*s, mat_mul(s, &v, &ctx))).collect();
        assert_eq!(solve_v(&pairs, [(0, 0), (1, 0), (2, 0)], &ctx).unwrap(), v);
        assert_eq!(
            solve_v(&pairs, [(0, 0), (1, 0), (2, 1)], &ctx),
            Err(Error::SingularSystem)
        );
    }

    #[test]
    fn offsets_off_recovers() {
        let (ctx, g) = setup();
        let cfg = KpaConfig {
            trials: 40,
            ..Default::default()
        };
        let r = kpa_probe(&cfg, &ctx, &g, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.recovered(), 40);
    }

    #[test]
    fn offsets_on_fails() {
        let (ctx, g) = setup();
        let cfg = KpaConfig {
            trials: 10,
            num_pairs: 30,
            offsets: true,
            ..Default::default()
        };
        let r = kpa_probe(&cfg, &ctx, &g, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        assert_eq!(r.recovered(), 0);
        assert_eq!(r.residual.unwrap().n_values, 10 * 27 * 9);
        assert!(r.residual_gap().unwrap() < 0.1);
    }

    #[test]
    fn withheld_mask_not_attempted() {
        let (ctx, g) = setup();
        let cfg = KpaConfig {
            trials: 3,
            mask_known: false,
            ..Default::default()
        };
        let r = kpa_probe(&cfg, &ctx, &g, &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        assert!(r.verdicts.iter().all(|&v| v == KpaVerdict::NotAttempted));
        assert_eq!(r.attempted(), 0);
    }
}
