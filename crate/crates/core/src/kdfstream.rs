//! Key derivation and the HMAC-SHA-256 counter-mode keystreams.
//!
//! `PRK = HKDF-Extract(salt, encode(G))` and four 32-octet working keys are
//! expanded from it under the labels `PVC/mask`, `PVC/cols`, `PVC/mac` and
//! `PVC/pad`. The mask and padding streams are
//! `HMAC(key, I2OSP(0,8)) | HMAC(key, I2OSP(1,8)) | ...`; column offsets are
//! `HMAC(K_cols, nonce | I2OSP(l,8) | I2OSP(j,1)) mod p`.

use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::codec::MatrixFp;
use crate::error::{Error, Result};
use crate::field::{os2ip, os2ip_mod, FieldCtx, FieldElem};
use crate::keyexchange::SharedVector;

pub const LABEL_MASK: &str = "PVC/mask";
pub const LABEL_COLS: &str = "PVC/cols";
pub const LABEL_MAC: &str = "PVC/mac";
pub const LABEL_PAD: &str = "PVC/pad";

pub const SALT_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;

pub(crate) fn hmac_sha256(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut m = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("any key length");
    for p in parts {
        m.update(p);
    }
    m.finalize().into_bytes().into()
}

pub fn hkdf_extract(salt: &[u8], ikm: &[u8]) -> Result<[u8; 32]> {
    if salt.is_empty() {
        return Err(Error::EmptySalt);
    }
    let (prk, _) = Hkdf::<Sha256>::extract(Some(salt), ikm);
    Ok(prk.into())
}

pub fn hkdf_expand(prk: &[u8; 32], info: &[u8], out_len: usize) -> Result<Vec<u8>> {
    if out_len > 255 * 32 {
        return Err(Error::OutLenTooLarge(out_len));
    }
    let hk = Hkdf::<Sha256>::from_prk(prk).expect("32-octet PRK");
    let mut okm = vec![0u8; out_len];
    hk.expand(info, &mut okm).map_err(|_| Error::OutLenTooLarge(out_len))?;
    Ok(okm)
}

/// `encode(G) = I2OSP(k1,len) | I2OSP(k2,len) | I2OSP(k3,len)`.
pub fn encode_shared(shared: &SharedVector, ctx: &FieldCtx) -> Vec<u8> {
    crate::keyexchange::encode_vector(&shared.components(), ctx)
}

/// How octet chunks become field elements in the mask stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Chunk mod p. Slightly biased when 256^len is not a multiple of p.
    #[default]
    Modular,
    /// Rejection sampling: chunks at or above the largest multiple of p
    /// below 256^len are skipped.
    Rejection,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DerivedKeys {
    pub prk: [u8; 32],
    pub k_mask: [u8; 32],
    pub k_cols: [u8; 32],
    pub k_mac: [u8; 32],
    pub k_pad: [u8; 32],
}

impl std::fmt::Debug for DerivedKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DerivedKeys(..)")
    }
}

impl DerivedKeys {
    pub fn derive(shared: &SharedVector, salt: &[u8], ctx: &FieldCtx) -> Result<Self> {
        let prk = hkdf_extract(salt, &encode_shared(shared, ctx))?;
        let expand = |label: &str| -> [u8; 32] {
            hkdf_expand(&prk, label.as_bytes(), 32)
                .expect("32 <= 255*32")
                .try_into()
                .unwrap()
        };
        Ok(DerivedKeys {
            prk,
            k_mask: expand(LABEL_MASK),
            k_cols: expand(LABEL_COLS),
            k_mac: expand(LABEL_MAC),
            k_pad: expand(LABEL_PAD),
        })
    }
}

/// Counter-mode byte stream: block t is `HMAC(key, I2OSP(t, 8))`.
pub struct CtrStream {
    key: [u8; 32],
    counter: u64,
    block: [u8; 32],
    pos: usize,
}

impl CtrStream {
    pub fn new(key: [u8; 32]) -> Self {
        CtrStream {
            key,
            counter: 0,
            block: [0; 32],
            pos: 32,
        }
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        for b in out {
            if self.pos == 32 {
                self.block = hmac_sha256(&self.key, &[&self.counter.to_be_bytes()]);
                self.counter += 1;
                self.pos = 0;
            }
            *b = self.block[self.pos];
            self.pos += 1;
        }
    }

    pub fn take(&mut self, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        self.fill(&mut v);
        v
    }
}

/// The mask R: `m*n*octet_len` stream octets, chunked, reduced, row-major.
pub fn mask_matrix(keys: &DerivedKeys, rows: usize, cols: usize, ctx: &FieldCtx, reduction: Reduction) -> MatrixFp {
    let ol = ctx.octet_len();
    let p = ctx.modulus();
    let mut stream = CtrStream::new(keys.k_mask);
    let mut chunk = vec![0u8; ol];
    let count = rows * cols;
    let mut data = Vec::with_capacity(count);
    match reduction {
        Reduction::Modular => {
            let bytes = stream.take(count * ol);
            for c in bytes.chunks_exact(ol) {
                data.push(ctx.elem(os2ip(c).expect("octet_len <= 8")));
            }
        }
        Reduction::Rejection => {
            let span = 1u128 << (8 * ol);
            let limit = span - span % p as u128;
            while data.len() < count {
                stream.fill(&mut chunk);
                let v = os2ip(&chunk).expect("octet_len <= 8");
                if (v as u128) < limit {
                    data.push(ctx.elem(v));
                }
            }
        }
    }
    MatrixFp::from_elems(rows, cols, data)
}

/// `r_{l,j} = HMAC(K_cols, nonce | I2OSP(l,8) | I2OSP(j,1)) mod p`, j = 1..3.
pub fn column_offset(keys: &DerivedKeys, nonce: &[u8; NONCE_LEN], ell: u64, ctx: &FieldCtx) -> [FieldElem; 3] {
    debug_assert!(ell >= 1);
    let ell_be = ell.to_be_bytes();
    [1u8, 2, 3].map(|j| {
        let h = hmac_sha256(&keys.k_cols, &[nonce, &ell_be, &[j]]);
        ctx.elem(os2ip_mod(&h, ctx.modulus()))
    })
}

/// One octet per padding cell from the `k_pad` counter stream.
pub fn padding_bytes(keys: &DerivedKeys, count: usize) -> Vec<u8> {
    CtrStream::new(keys.k_pad).take(count)
}
