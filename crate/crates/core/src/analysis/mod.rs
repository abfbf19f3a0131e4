//! Measurement harness: entropy, avalanche, randomness, operation counts and
//! the known-plaintext probe, each also reachable by name through
//! [`registry`].

pub mod avalanche;
pub mod entropy;
pub mod kpa;
pub mod ops;
pub mod randomness;
pub mod session;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::cipher::{encrypt_traced, CipherOptions, Layout, SessionParams};
use crate::codec::plan_indices;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::keyexchange::PrimitiveVector;

pub use avalanche::{avalanche, AvalancheReport, AvalancheTrial};
pub use entropy::{entropy, EntropyReport};
pub use kpa::{kpa_probe, KpaConfig, KpaReport, KpaVerdict};
pub use ops::{count_ops, OpCounters};
pub use randomness::{
    duplicate_scan, expected_collisions, offsets_bitstream, randomness_suite, BitExtraction, RandomnessReport,
    RandomnessTest,
};
pub use session::Party;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One metric of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub name: String,
    pub value: String,
    pub threshold: String,
    pub status: Status,
}

impl ReportLine {
    pub fn new(name: &str, value: impl ToString, threshold: &str, status: Status) -> Self {
        ReportLine {
            name: name.to_string(),
            value: value.to_string(),
            threshold: threshold.to_string(),
            status,
        }
    }

    pub fn info(name: &str, value: impl ToString) -> Self {
        Self::new(name, value, "-", Status::Info)
    }
}

impl fmt::Display for ReportLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        write!(
            f,
            "{}={} threshold={} status={}",
            self.name, self.value, self.threshold, s
        )
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub ctx: FieldCtx,
    pub g: PrimitiveVector,
    pub rows: usize,
    pub cols: usize,
    pub offsets: bool,
    /// Overrides the per-analysis default trial or session count.
    pub trials: Option<usize>,
    pub seed: u64,
}

impl AnalysisConfig {
    fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed)
    }
}

pub trait Analysis: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>>;
}

pub fn registry() -> Vec<Box<dyn Analysis>> {
    vec![
        Box::new(EntropyAnalysis),
        Box::new(AvalancheAnalysis),
        Box::new(RandomnessAnalysis),
        Box::new(OpsAnalysis),
        Box::new(KpaAnalysis),
    ]
}

pub fn lookup(name: &str) -> Result<Box<dyn Analysis>> {
    registry()
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| Error::Unknown {
            kind: "analysis",
            name: name.to_string(),
        })
}

/// Transmitted elements and offsets of one fresh session with a random
/// message placed at the origin.
pub fn random_session_offsets<R: rand::RngCore + rand::CryptoRng>(
    rows: usize,
    cols: usize,
    ctx: &FieldCtx,
    g: &PrimitiveVector,
    rng: &mut R,
) -> Result<(Vec<FieldElem>, Vec<[FieldElem; 3]>)> {
    let party = Party::random(ctx, g, rng)?;
    let len = rng.gen_range(0..=rows * cols);
    let msg: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
    let t = encrypt_traced(
        &msg,
        &Layout::new(rows, cols),
        &party.keys,
        &SessionParams::random(rng),
        ctx,
        CipherOptions::default(),
        None,
    )?;
    Ok((t.ciphertext.columns.iter().flatten().copied().collect(), t.offsets))
}

struct EntropyAnalysis;
struct AvalancheAnalysis;
struct RandomnessAnalysis;
struct OpsAnalysis;
struct KpaAnalysis;

impl Analysis for EntropyAnalysis {
    fn name(&self) -> &'static str {
        "entropy"
    }

    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>> {
        let sessions = cfg.trials.unwrap_or(20).max(1);
        let mut rng = cfg.rng();
        let mut reports = Vec::with_capacity(sessions);
        for _ in 0..sessions {
            let (elems, _) = random_session_offsets(cfg.rows, cfg.cols, &cfg.ctx, &cfg.g, &mut rng)?;
            reports.push(entropy(&elems)?);
        }
        let n = reports[0].n_values;
        let h_max = (n as f64).log2();
        let min = reports.iter().map(|r| r.h_bits).fold(f64::INFINITY, f64::min);
        let mean = reports.iter().map(|r| r.h_bits).sum::<f64>() / sessions as f64;
        let exact = reports
            .iter()
            .filter(|r| r.distinct_count == n)
            .all(|r| (r.h_bits - h_max).abs() <= 1e-12);
        let all_distinct = reports.iter().filter(|r| r.distinct_count == n).count();
        Ok(vec![
            ReportLine::info("n_values", n),
            ReportLine::info("h_max_bits", format!("{h_max:.4}")),
            ReportLine::info("h_mean_bits", format!("{mean:.4}")),
            ReportLine::new(
                "h_min_bits",
                format!("{min:.4}"),
                &format!(">={:.4}", h_max - 0.15),
                Status::from_bool(min >= h_max - 0.15),
            ),
            ReportLine::new(
                "h_exact_when_distinct",
                format!("{all_distinct}/{sessions} distinct"),
                "|H-log2 n|<=1e-12",
                Status::from_bool(exact),
            ),
        ])
    }
}

impl Analysis for AvalancheAnalysis {
    fn name(&self) -> &'static str {
        "avalanche"
    }

    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>> {
        let trials = cfg.trials.unwrap_or(1000).max(1);
        let r = avalanche(trials, cfg.rows, cfg.cols, &cfg.ctx, &cfg.g, &mut cfg.rng())?;
        let mean = 100.0 * r.mean_rate();
        let pattern = r
            .trials
            .iter()
            .filter(|t| {
                t.row_changes
                    .iter()
                    .all(|row| row.iter().sum::<u8>() == 2 && row.iter().filter(|&&c| c > 0).count() == 1)
            })
            .count();
        Ok(vec![
            ReportLine::info("trials", trials),
            ReportLine::new(
                "mean_diffusion_pct",
                format!("{mean:.2}"),
                "[32.0,34.7]",
                Status::from_bool((32.0..=34.7).contains(&mean)),
            ),
            ReportLine::new(
                "whole_row_changes",
                r.whole_rows(),
                "true",
                Status::from_bool(r.whole_rows()),
            ),
            ReportLine::info("trials_two_of_nine_one_row", format!("{pattern}/{trials}")),
        ])
    }
}

impl Analysis for RandomnessAnalysis {
    fn name(&self) -> &'static str {
        "randomness"
    }

    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>> {
        let sessions = cfg.trials.unwrap_or(50).max(1);
        let mut rng = cfg.rng();
        let mut clean = 0;
        let mut passing = 0;
        let mut first = None;
        let mut n_offsets = 0;
        for _ in 0..sessions {
            let (_, offsets) = random_session_offsets(cfg.rows, cfg.cols, &cfg.ctx, &cfg.g, &mut rng)?;
            n_offsets = offsets.len();
            let dupes = duplicate_scan(&offsets);
            let rep = randomness_suite(&offsets_bitstream(&offsets, &cfg.ctx, BitExtraction::LowOctet))?;
            first.get_or_insert(rep);
            if dupes.is_empty() {
                clean += 1;
            }
            if dupes.is_empty() && rep.passes(0.01) {
                passing += 1;
            }
        }
        let first = first.expect("at least one session");
        let need = (sessions * 48).div_ceil(50);
        Ok(vec![
            ReportLine::info("sessions", sessions),
            ReportLine::info("bits_per_session", first.n_bits),
            ReportLine::info("first_p_monobit", format!("{:.4}", first.p_monobit)),
            ReportLine::info("first_p_runs", format!("{:.4}", first.p_runs)),
            ReportLine::info("first_p_poker4", format!("{:.4}", first.p_poker4)),
            ReportLine::info(
                "expected_collisions",
                format!("{:.3e}", expected_collisions(n_offsets, cfg.ctx.modulus())),
            ),
            ReportLine::new(
                "sessions_without_duplicates",
                format!("{clean}/{sessions}"),
                &format!("{sessions}/{sessions}"),
                Status::from_bool(clean == sessions),
            ),
            ReportLine::new(
                "sessions_passing_alpha_0.01",
                format!("{passing}/{sessions}"),
                &format!(">={need}/{sessions}"),
                Status::from_bool(passing >= need),
            ),
        ])
    }
}

/// Published operation counts for the three reference shapes.
pub fn table_op_counts(rows: usize, cols: usize) -> Option<OpCounters> {
    let (m, h) = match (rows, cols) {
        (5, 7) => (216, 54),
        (8, 10) => (432, 108),
        (12, 23) => (1152, 288),
        _ => return None,
    };
    Some(OpCounters {
        field_mults: m,
        field_adds: m,
        hmac_calls: h,
    })
}

impl Analysis for OpsAnalysis {
    fn name(&self) -> &'static str {
        "ops"
    }

    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>> {
        let c = count_ops(cfg.rows, cfg.cols)?;
        let blocks = plan_indices(cfg.rows, cfg.cols)?.block_count();
        let expect = table_op_counts(cfg.rows, cfg.cols);
        let line = |name: &str, got: u64, want: Option<u64>| match want {
            Some(w) => ReportLine::new(name, got, &w.to_string(), Status::from_bool(got == w)),
            None => ReportLine::info(name, got),
        };
        Ok(vec![
            ReportLine::info("blocks", blocks),
            line("field_mults", c.field_mults, expect.map(|e| e.field_mults)),
            line("field_adds", c.field_adds, expect.map(|e| e.field_adds)),
            line("hmac_calls", c.hmac_calls, expect.map(|e| e.hmac_calls)),
        ])
    }
}

impl Analysis for KpaAnalysis {
    fn name(&self) -> &'static str {
        "kpa"
    }

    fn run(&self, cfg: &AnalysisConfig) -> Result<Vec<ReportLine>> {
        let kc = KpaConfig {
            trials: cfg.trials.unwrap_or(100).max(1),
            num_pairs: if cfg.offsets { 100 } else { 3 },
            offsets: cfg.offsets,
            mask_known: true,
            rows: cfg.rows,
            cols: cfg.cols,
        };
        let r = kpa_probe(&kc, &cfg.ctx, &cfg.g, &mut cfg.rng())?;
        let mut out = vec![
            ReportLine::info("offsets", if cfg.offsets { "on" } else { "off" }),
            ReportLine::info("pairs_per_trial", kc.num_pairs),
            ReportLine::info("singular_resamples", r.singular_resamples),
        ];
        if cfg.offsets {
            let gap = r.residual_gap().unwrap_or(f64::INFINITY);
            out.push(ReportLine::new(
                "v_recovered",
                format!("{}/{}", r.recovered(), kc.trials),
                &format!("0/{}", kc.trials),
                Status::from_bool(r.recovered() == 0),
            ));
            if let (Some(h), Some(u)) = (r.residual, r.uniform_reference) {
                out.push(ReportLine::info("residual_entropy_bits", format!("{:.4}", h.h_bits)));
                out.push(ReportLine::info("uniform_reference_bits", format!("{u:.4}")));
            }
            out.push(ReportLine::new(
                "residual_gap_bits",
                format!("{gap:.4}"),
                "<=0.1",
                Status::from_bool(gap <= 0.1),
            ));
        } else {
            let rate = r.recovery_rate();
            out.push(ReportLine::new(
                "v_recovered",
                format!("{}/{}", r.recovered(), kc.trials),
                ">=95%",
                Status::from_bool(rate >= 0.95),
            ));
            if r.recovered() > 0 {
                out.push(ReportLine::info("verdict", "V recovered"));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: usize, cols: usize) -> AnalysisConfig {
        let ctx = FieldCtx::new(12347).unwrap();
        let g = PrimitiveVector::new(&ctx, [2, 5, 6]).unwrap();
        AnalysisConfig {
            ctx,
            g,
            rows,
            cols,
            offsets: true,
            trials: Some(5),
            seed: 7,
        }
    }

    #[test]
    fn registry_names() {
        let names: Vec<_> = registry().iter().map(|a| a.name()).collect();
        assert_eq!(names, ["entropy", "avalanche", "randomness", "ops", "kpa"]);
        assert!(matches!(lookup("timing"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn ops_report_passes_on_table_shape() {
        let lines = lookup("ops").unwrap().run(&cfg(12, 23)).unwrap();
        assert!(lines.iter().all(|l| l.status != Status::Fail));
        assert!(lines
            .iter()
            .any(|l| l.to_string() == "field_mults=1152 threshold=1152 status=PASS"));
    }

    #[test]
    fn every_analysis_runs_and_is_deterministic() {
        for a in registry() {
            let c = cfg(12, 23);
            assert_eq!(a.run(&c).unwrap(), a.run(&c).unwrap(), "{}", a.name());
        }
    }

    #[test]
    fn randomness_needs_enough_bits() {
        // 5x7 yields 54 offset elements, 432 bits
        assert!(matches!(
            lookup("randomness").unwrap().run(&cfg(5, 7)),
            Err(Error::InsufficientBits { needed: 2000, got: 432 })
        ));
    }
}
