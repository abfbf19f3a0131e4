//! Flag parsing and validation. Every failure names the offending flag.

use pvc_core::field::FieldCtx;
use pvc_core::keyexchange::PrimitiveVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::args::GroupArgs;
use crate::error::CliError;

pub fn parse_uint(field: &str, s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| CliError::config(field, format!("'{s}' is not an unsigned integer")))
}

fn parse_list<const N: usize>(field: &str, s: &str, sep: char) -> Result<[u64; N], CliError> {
    let parts: Vec<&str> = s.split(sep).collect();
    if parts.len() != N {
        return Err(CliError::config(
            field,
            format!("expected {N} values separated by '{sep}', got '{s}'"),
        ));
    }
    let mut out = [0u64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_uint(field, p)?;
    }
    Ok(out)
}

pub fn parse_triple(field: &str, s: &str) -> Result<[u64; 3], CliError> {
    parse_list::<3>(field, s, ',')
}

pub fn parse_shape(field: &str, s: &str) -> Result<(usize, usize), CliError> {
    let [m, n] = parse_list::<2>(field, &s.to_ascii_lowercase(), 'x')?;
    if m < 3 || n < 3 || m > u16::MAX as u64 || n > u16::MAX as u64 {
        return Err(CliError::config(
            field,
            format!("shape {m}x{n} needs both sides in 3..=65535"),
        ));
    }
    Ok((m as usize, n as usize))
}

pub fn parse_start(field: &str, s: &str, shape: (usize, usize)) -> Result<(usize, usize), CliError> {
    let [r, c] = parse_list::<2>(field, s, ',')?;
    if r == 0 || c == 0 || r as usize > shape.0 || c as usize > shape.1 {
        return Err(CliError::config(
            field,
            format!("start ({r},{c}) outside the {}x{} matrix (1-based)", shape.0, shape.1),
        ));
    }
    Ok((r as usize, c as usize))
}

pub fn group(args: &GroupArgs) -> Result<(FieldCtx, PrimitiveVector), CliError> {
    let p = parse_uint("--prime", &args.prime)?;
    let ctx = FieldCtx::new(p).map_err(|e| CliError::config("--prime", e))?;
    let g = parse_triple("--gvec", &args.gvec)?;
    let g = PrimitiveVector::new(&ctx, g).map_err(|e| CliError::config("--gvec", e))?;
    Ok((ctx, g))
}

/// Seeded when a seed is given, otherwise from the OS entropy source.
pub fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}
