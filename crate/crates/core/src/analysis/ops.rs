use crate::cipher::{encrypt_traced, CipherOptions, Layout, SessionParams};
use crate::error::Result;
use crate::field::FieldCtx;
use crate::reference;

use super::session::Party;

/// Tallies of the primitive operations in one encryption.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub field_mults: u64,
    pub field_adds: u64,
    pub hmac_calls: u64,
}

impl OpCounters {
    pub fn reset(&mut self) {
        *self = OpCounters::default();
    }
}

/// Instrumented dry run of a full encryption at the given shape.
///
/// Per block: `S*V + delta*U` is counted as 27 multiply-add pairs for the
/// product plus 9 for the diagonal term whether or not delta is zero, and
/// each of the 9 transmitted elements costs one HMAC.
pub fn count_ops(rows: usize, cols: usize) -> Result<OpCounters> {
    let ctx = FieldCtx::new(reference::PRIME)?;
    let party = Party::from_secrets(&ctx, reference::GVEC, reference::SECRET_A, reference::SECRET_B)?;
    let session = SessionParams {
        salt: [0x5a; 32],
        nonce: [0; 16],
    };
    let mut counters = OpCounters::default();
    encrypt_traced(
        b"",
        &Layout::new(rows, cols),
        &party.keys,
        &session,
        &ctx,
        CipherOptions::default(),
        Some(&mut counters),
    )?;
    Ok(counters)
}
