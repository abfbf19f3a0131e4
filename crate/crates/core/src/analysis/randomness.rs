//! Frequency, runs and poker (m = 4) tests, plus keystream hygiene helpers.

use std::collections::HashMap;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

pub const MIN_SUITE_BITS: usize = 2000;

/// A single statistical test yielding a p-value.
pub trait RandomnessTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn p_value(&self, bits: &[bool]) -> Result<f64>;
}

pub struct Monobit;
pub struct Runs;
pub struct Poker4;

impl RandomnessTest for Monobit {
    fn name(&self) -> &'static str {
        "monobit"
    }

    fn p_value(&self, bits: &[bool]) -> Result<f64> {
        if bits.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = bits.len() as f64;
        let s: i64 = bits.iter().map(|&b| if b { 1 } else { -1 }).sum();
        Ok(erfc(s.unsigned_abs() as f64 / (2.0 * n).sqrt()))
    }
}

impl RandomnessTest for Runs {
    fn name(&self) -> &'static str {
        "runs"
    }

    fn p_value(&self, bits: &[bool]) -> Result<f64> {
        if bits.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = bits.len() as f64;
        let pi = bits.iter().filter(|&&b| b).count() as f64 / n;
        // frequency prerequisite
        if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
            return Ok(0.0);
        }
        let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
        let q = pi * (1.0 - pi);
        Ok(erfc((v as f64 - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q)))
    }
}

impl RandomnessTest for Poker4 {
    fn name(&self) -> &'static str {
        "poker4"
    }

    fn p_value(&self, bits: &[bool]) -> Result<f64> {
        let k = bits.len() / 4;
        if k == 0 {
            return Err(Error::InsufficientBits {
                needed: 4,
                got: bits.len(),
            });
        }
        let mut f = [0u64; 16];
        for nib in bits.chunks_exact(4) {
            let v = nib.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            f[v] += 1;
        }
        let kf = k as f64;
        let x = 16.0 / kf * f.iter().map(|&c| (c * c) as f64).sum::<f64>() - kf;
        if x <= 0.0 {
            return Ok(1.0);
        }
        // chi-square upper tail, 15 degrees of freedom
        Ok(gamma_ur(7.5, x / 2.0))
    }
}

pub fn randomness_tests() -> Vec<Box<dyn RandomnessTest>> {
    vec![Box::new(Monobit), Box::new(Runs), Box::new(Poker4)]
}

pub fn randomness_test(name: &str) -> Result<Box<dyn RandomnessTest>> {
    randomness_tests()
        .into_iter()
        .find(|t| t.name() == name)
        .ok_or_else(|| Error::Unknown {
            kind: "randomness test",
            name: name.to_string(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomnessReport {
    pub n_bits: usize,
    pub p_monobit: f64,
    pub p_runs: f64,
    pub p_poker4: f64,
}

impl RandomnessReport {
    pub fn passes(&self, alpha: f64) -> bool {
        [self.p_monobit, self.p_runs, self.p_poker4].iter().all(|&p| p > alpha)
    }
}

pub fn randomness_suite(bits: &[bool]) -> Result<RandomnessReport> {
    if bits.len() < MIN_SUITE_BITS {
        return Err(Error::InsufficientBits {
            needed: MIN_SUITE_BITS,
            got: bits.len(),
        });
    }
    Ok(RandomnessReport {
        n_bits: bits.len(),
        p_monobit: Monobit.p_value(bits)?,
        p_runs: Runs.p_value(bits)?,
        p_poker4: Poker4.p_value(bits)?,
    })
}

/// How offset elements become bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitExtraction {
    /// Low 8 bits of each element, MSB first.
    #[default]
    LowOctet,
    /// `I2OSP(r, octet_len)`, MSB first. Carries the forced leading zeros
    /// of every element.
    FullOctets,
}

/// Pools `r_{l,j}` for all l, j in order into one bitstream.
pub fn offsets_bitstream(offsets: &[[FieldElem; 3]], ctx: &FieldCtx, mode: BitExtraction) -> Vec<bool> {
    let octets: Vec<u8> = match mode {
        BitExtraction::LowOctet => offsets.iter().flatten().map(|x| x.value() as u8).collect(),
        BitExtraction::FullOctets => offsets.iter().flatten().flat_map(|&x| ctx.encode(x)).collect(),
    };
    bits_msb_first(&octets)
}

pub fn bits_msb_first(octets: &[u8]) -> Vec<bool> {
    octets
        .iter()
        .flat_map(|&o| (0..8).rev().map(move |i| (o >> i) & 1 == 1))
        .collect()
}

/// All index pairs `(i, j)`, `i < j`, of identical vectors (0-based).
pub fn duplicate_scan(vectors: &[[FieldElem; 3]]) -> Vec<(usize, usize)> {
    let mut seen: HashMap<[FieldElem; 3], Vec<usize>> = HashMap::new();
    let mut out = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let prior = seen.entry(*v).or_default();
        out.extend(prior.iter().map(|&i| (i, idx)));
        prior.push(idx);
    }
    out.sort_unstable();
    out
}

/// Expected number of colliding pairs among `n` uniform draws from `F_p^3`.
pub fn expected_collisions(n: usize, p: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0 / (p as f64).powi(3)
}
