//! Random two-party setups for trials.

use rand::{CryptoRng, RngCore};

use crate::cipher::SenderKeys;
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::keyexchange::{derive_shared, EphemeralKeypair, PrimitiveVector};

/// Sender key state plus the receiver's secret.
#[derive(Debug, Clone)]
pub struct Party {
    pub keys: SenderKeys,
    pub receiver_secret: u64,
}

impl Party {
    pub fn from_secrets(ctx: &FieldCtx, g: [u64; 3], a: u64, b: u64) -> Result<Self> {
        let g = PrimitiveVector::new(ctx, g)?;
        let ka = EphemeralKeypair::from_secret(&g, ctx, a)?;
        let kb = EphemeralKeypair::from_secret(&g, ctx, b)?;
        let shared = derive_shared(&ka, &kb.public(), ctx)?;
        Ok(Party {
            keys: SenderKeys {
                g,
                sender_public: ka.public(),
                shared,
            },
            receiver_secret: b,
        })
    }

    /// Fresh ephemeral secrets on both sides; redraws when a public lands on
    /// a rejected value.
    pub fn random<R: RngCore + CryptoRng>(ctx: &FieldCtx, g: &PrimitiveVector, rng: &mut R) -> Result<Self> {
        loop {
            let ka = EphemeralKeypair::generate(g, ctx, rng);
            let kb = EphemeralKeypair::generate(g, ctx, rng);
            let shared = match derive_shared(&ka, &kb.public(), ctx) {
                Ok(s) => s,
                Err(Error::InvalidPeerPublic(_)) => continue,
                Err(e) => return Err(e),
            };
            if crate::keyexchange::validate_peer_public(&ka.public(), ctx).is_err() {
                continue;
            }
            return Ok(Party {
                keys: SenderKeys {
                    g: *g,
                    sender_public: ka.public(),
                    shared,
                },
                receiver_secret: kb.secret(),
            });
        }
    }
}
