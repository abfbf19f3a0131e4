//! The two-layer pipeline and its `.pvc` wire format.
//!
//! Encryption: embed the message, add the mask R, cut the planned 3x3
//! windows, map each through `S V + delta U`, then add the per-column offset
//! `r_l` to every output column. Decryption runs the same steps backwards and
//! rejects ciphertexts whose overlapping windows disagree.
//!
//! Wire layout (all integers big-endian, `e` = one field element at
//! `octet_len(p)` octets):
//!
//! ```text
//! "PVC1" | version:1 | p:8 | g:3e | g^a:3e | salt:32 | nonce:16
//!        | m:2 | n:2 | L:4 | start_row:2 | start_col:2 | rule:1 [lists]
//!        | 3B columns of 3e each, in l order
//! ```
//!
//! Rule `0x01` is stride-3 with boundary; rule `0x02` is followed by
//! `|I|:2, I:2 each, |J|:2, J:2 each`.

use rayon::prelude::*;

use crate::analysis::ops::OpCounters;
use crate::codec::{embed, extract_block, extract_message, plan_indices, reassemble, MatrixFp, SsmIndexPlan};
use crate::error::{Error, Result};
use crate::field::{os2ip, FieldCtx, FieldElem};
use crate::kdfstream::{column_offset, mask_matrix, DerivedKeys, Reduction, NONCE_LEN, SALT_LEN};
use crate::keyexchange::{derive_shared, encode_vector, EphemeralKeypair, PrimitiveVector, PublicVector, SharedVector};
use crate::matrixcore::{Block, KeyMatrices};

pub const MAGIC: &[u8; 4] = b"PVC1";
pub const VERSION: u8 = 0x01;
pub const RULE_STRIDE3: u8 = 0x01;
pub const RULE_EXPLICIT: u8 = 0x02;

/// How block top-lefts are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Indexing {
    #[default]
    Stride3Boundary,
    Explicit {
        rows: Vec<usize>,
        cols: Vec<usize>,
    },
}

impl Indexing {
    pub fn plan(&self, rows: usize, cols: usize) -> Result<SsmIndexPlan> {
        match self {
            Indexing::Stride3Boundary => plan_indices(rows, cols),
            Indexing::Explicit { rows: i, cols: j } => SsmIndexPlan::new(rows, cols, i.clone(), j.clone()),
        }
    }

    pub fn rule_id(&self) -> u8 {
        match self {
            Indexing::Stride3Boundary => RULE_STRIDE3,
            Indexing::Explicit { .. } => RULE_EXPLICIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub version: u8,
    pub p: u64,
    pub g: [FieldElem; 3],
    pub sender_public: PublicVector,
    pub salt: [u8; SALT_LEN],
    pub nonce: [u8; NONCE_LEN],
    pub rows: u16,
    pub cols: u16,
    pub msg_len: u32,
    pub start_row: u16,
    pub start_col: u16,
    pub indexing: Indexing,
}

impl Header {
    pub fn plan(&self) -> Result<SsmIndexPlan> {
        self.indexing.plan(self.rows as usize, self.cols as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub header: Header,
    pub columns: Vec<[FieldElem; 3]>,
}

/// Where and how the message sits in the master matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub rows: usize,
    pub cols: usize,
    /// 1-based.
    pub start_row: usize,
    /// 1-based.
    pub start_col: usize,
    pub indexing: Indexing,
}

impl Layout {
    pub fn new(rows: usize, cols: usize) -> Self {
        Layout {
            rows,
            cols,
            start_row: 1,
            start_col: 1,
            indexing: Indexing::Stride3Boundary,
        }
    }

    pub fn with_start(mut self, row: usize, col: usize) -> Self {
        self.start_row = row;
        self.start_col = col;
        self
    }
}

/// Per-message public randomness carried in the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionParams {
    pub salt: [u8; SALT_LEN],
    pub nonce: [u8; NONCE_LEN],
}

impl SessionParams {
    pub fn random<R: rand::RngCore + rand::CryptoRng>(rng: &mut R) -> Self {
        let mut s = SessionParams {
            salt: [0; SALT_LEN],
            nonce: [0; NONCE_LEN],
        };
        rng.fill_bytes(&mut s.salt);
        rng.fill_bytes(&mut s.nonce);
        s
    }
}

/// Sender-side key state after the exchange.
#[derive(Debug, Clone)]
pub struct SenderKeys {
    pub g: PrimitiveVector,
    pub sender_public: PublicVector,
    pub shared: SharedVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CipherOptions {
    /// Adds the per-column offsets. Disabling it is a test hook that isolates
    /// the block layer.
    pub offsets: bool,
    pub reduction: Reduction,
    pub parallel: bool,
}

impl Default for CipherOptions {
    fn default() -> Self {
        CipherOptions {
            offsets: true,
            reduction: Reduction::Modular,
            parallel: false,
        }
    }
}

/// One encrypted window with its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTrace {
    pub row: usize,
    pub col: usize,
    pub plain: Block,
    pub cipher: Block,
}

/// Intermediate values of one encryption, for demos and analyses.
#[derive(Debug, Clone)]
pub struct EncryptionTrace {
    pub plan: SsmIndexPlan,
    pub message_matrix: MatrixFp,
    pub mask: MatrixFp,
    pub masked: MatrixFp,
    pub blocks: Vec<BlockTrace>,
    pub offsets: Vec<[FieldElem; 3]>,
    pub ciphertext: Ciphertext,
}

pub fn encrypt(
    msg: &[u8],
    layout: &Layout,
    keys: &SenderKeys,
    session: &SessionParams,
    ctx: &FieldCtx,
    options: CipherOptions,
) -> Result<Ciphertext> {
    encrypt_traced(msg, layout, keys, session, ctx, options, None).map(|t| t.ciphertext)
}

/// Full encryption keeping every intermediate. When `counters` is given the
/// block products and offset HMACs are tallied (sequentially).
pub fn encrypt_traced(
    msg: &[u8],
    layout: &Layout,
    keys: &SenderKeys,
    session: &SessionParams,
    ctx: &FieldCtx,
    options: CipherOptions,
    mut counters: Option<&mut OpCounters>,
) -> Result<EncryptionTrace> {
    let plan = layout.indexing.plan(layout.rows, layout.cols)?;
    let derived = DerivedKeys::derive(&keys.shared, &session.salt, ctx)?;
    let km = KeyMatrices::build(&keys.shared, ctx)?;
    let (message_matrix, msg_len) = embed(
        msg,
        layout.rows,
        layout.cols,
        layout.start_row,
        layout.start_col,
        &derived,
        ctx,
    )?;
    let mask = mask_matrix(&derived, layout.rows, layout.cols, ctx, options.reduction);
    let masked = message_matrix.add(&mask, ctx);

    let positions = plan.blocks();
    let encrypt_one = |&(i, j): &(usize, usize)| -> BlockTrace {
        let plain = extract_block(&masked, i, j).expect("plan within bounds");
        let cipher = km.encrypt_block(&plain, i, j, ctx);
        BlockTrace {
            row: i,
            col: j,
            plain,
            cipher,
        }
    };
    let blocks: Vec<BlockTrace> = match counters.as_deref_mut() {
        Some(c) => positions
            .iter()
            .map(|&(i, j)| {
                let plain = extract_block(&masked, i, j).expect("plan within bounds");
                let cipher = km.encrypt_block_counted(&plain, i, j, ctx, c);
                BlockTrace {
                    row: i,
                    col: j,
                    plain,
                    cipher,
                }
            })
            .collect(),
        None if options.parallel => positions.par_iter().map(encrypt_one).collect(),
        None => positions.iter().map(encrypt_one).collect(),
    };

    let n_cols = plan.column_count();
    let offset_at = |ell: usize| -> [FieldElem; 3] {
        if options.offsets {
            column_offset(&derived, &session.nonce, ell as u64, ctx)
        } else {
            [FieldElem::ZERO; 3]
        }
    };
    let offsets: Vec<[FieldElem; 3]> = if options.parallel && counters.is_none() {
        (1..=n_cols).into_par_iter().map(offset_at).collect()
    } else {
        (1..=n_cols).map(offset_at).collect()
    };
    if let Some(c) = counters {
        if options.offsets {
            c.hmac_calls += 3 * n_cols as u64;
        }
    }

    let columns = blocks
        .iter()
        .flat_map(|b| (0..3).map(move |r| b.cipher.column(r)))
        .zip(&offsets)
        .map(|(c, r)| [0, 1, 2].map(|t| ctx.add(c[t], r[t])))
        .collect();

    let header = Header {
        version: VERSION,
        p: ctx.modulus(),
        g: keys.g.components(),
        sender_public: keys.sender_public,
        salt: session.salt,
        nonce: session.nonce,
        rows: layout.rows as u16,
        cols: layout.cols as u16,
        msg_len: msg_len as u32,
        start_row: layout.start_row as u16,
        start_col: layout.start_col as u16,
        indexing: layout.indexing.clone(),
    };
    Ok(EncryptionTrace {
        plan,
        message_matrix,
        mask,
        masked,
        blocks,
        offsets,
        ciphertext: Ciphertext { header, columns },
    })
}

/// Receiver side: recomputes `G` from the header's `g^a` and the secret `b`.
pub fn decrypt(ct: &Ciphertext, receiver_secret: u64, ctx: &FieldCtx, options: CipherOptions) -> Result<Vec<u8>> {
    check_header(&ct.header, ctx)?;
    let g = PrimitiveVector::new(ctx, ct.header.g.map(FieldElem::value))
        .map_err(|e| Error::HeaderMalformed(e.to_string()))?;
    let own = EphemeralKeypair::from_secret(&g, ctx, receiver_secret)?;
    let shared = derive_shared(&own, &ct.header.sender_public, ctx)?;
    decrypt_with_shared(ct, &shared, ctx, options)
}

fn check_header(h: &Header, ctx: &FieldCtx) -> Result<()> {
    if h.version != VERSION {
        return Err(Error::HeaderMalformed(format!("version {}", h.version)));
    }
    if h.p != ctx.modulus() {
        return Err(Error::HeaderMalformed(format!(
            "modulus {} does not match {}",
            h.p,
            ctx.modulus()
        )));
    }
    Ok(())
}

/// Decryption given the shared vector directly.
pub fn decrypt_with_shared(
    ct: &Ciphertext,
    shared: &SharedVector,
    ctx: &FieldCtx,
    options: CipherOptions,
) -> Result<Vec<u8>> {
    let h = &ct.header;
    check_header(h, ctx)?;
    let plan = h.plan().map_err(|e| Error::HeaderMalformed(e.to_string()))?;
    if ct.columns.len() != plan.column_count() {
        return Err(Error::HeaderMalformed(format!(
            "{} columns, plan needs {}",
            ct.columns.len(),
            plan.column_count()
        )));
    }
    let (rows, cols) = (h.rows as usize, h.cols as usize);
    let derived = DerivedKeys::derive(shared, &h.salt, ctx)?;
    let km = KeyMatrices::build(shared, ctx)?;

    let strip = |ell: usize| -> [FieldElem; 3] {
        let c = ct.columns[ell - 1];
        if options.offsets {
            let r = column_offset(&derived, &h.nonce, ell as u64, ctx);
            [0, 1, 2].map(|t| ctx.sub(c[t], r[t]))
        } else {
            c
        }
    };
    let decrypt_one = |(k, &(i, j)): (usize, &(usize, usize))| -> (usize, usize, Block) {
        let base = 3 * k + 1;
        let c = Block::from_columns([strip(base), strip(base + 1), strip(base + 2)]);
        (i, j, km.decrypt_block(&c, i, j, ctx))
    };
    let positions = plan.blocks();
    let blocks: Vec<_> = if options.parallel {
        positions.par_iter().enumerate().map(decrypt_one).collect()
    } else {
        positions.iter().enumerate().map(decrypt_one).collect()
    };

    let masked = reassemble(&blocks, rows, cols)?;
    let mask = mask_matrix(&derived, rows, cols, ctx, options.reduction);
    let m = masked.sub(&mask, ctx);
    for (idx, x) in m.elems().iter().enumerate() {
        if x.value() > 255 {
            return Err(Error::CellOutOfRange {
                row: idx / cols + 1,
                col: idx % cols + 1,
            });
        }
    }
    extract_message(&m, h.msg_len as usize, h.start_row as usize, h.start_col as usize)
}

pub fn serialize(ct: &Ciphertext) -> Vec<u8> {
    let h = &ct.header;
    let ctx_len = octet_len_of(h.p);
    let enc = |x: FieldElem| crate::field::i2osp(x.value(), ctx_len).expect("reduced element");
    let mut out = MAGIC.to_vec();
    out.push(h.version);
    out.extend_from_slice(&h.p.to_be_bytes());
    for x in h.g.iter().chain(&h.sender_public) {
        out.extend(enc(*x));
    }
    out.extend_from_slice(&h.salt);
    out.extend_from_slice(&h.nonce);
    for v in [h.rows, h.cols] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&h.msg_len.to_be_bytes());
    for v in [h.start_row, h.start_col] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.push(h.indexing.rule_id());
    if let Indexing::Explicit { rows, cols } = &h.indexing {
        for list in [rows, cols] {
            out.extend_from_slice(&(list.len() as u16).to_be_bytes());
            for &v in list {
                out.extend_from_slice(&(v as u16).to_be_bytes());
            }
        }
    }
    for col in &ct.columns {
        for &x in col {
            out.extend(enc(x));
        }
    }
    out
}

fn octet_len_of(p: u64) -> usize {
    (64 - p.leading_zeros() as usize).div_ceil(8)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::ParseError {
                offset: self.pos,
                reason: what,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn elem(&mut self, ctx: &FieldCtx, what: &'static str) -> Result<FieldElem> {
        let offset = self.pos;
        let raw = os2ip(self.take(ctx.octet_len(), what)?).expect("octet_len <= 8");
        ctx.try_elem(raw).ok_or(Error::ParseError {
            offset,
            reason: "field element not reduced",
        })
    }

    fn fail<T>(&self, offset: usize, reason: &'static str) -> Result<T> {
        Err(Error::ParseError { offset, reason })
    }
}

/// Parses a `.pvc` buffer. Returns the field context rebuilt from the header
/// alongside the ciphertext.
pub fn deserialize(buf: &[u8]) -> Result<(Ciphertext, FieldCtx)> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return r.fail(0, "bad magic");
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return r.fail(4, "unsupported version");
    }
    let p_off = r.pos;
    let p = u64::from_be_bytes(r.take(8, "modulus")?.try_into().unwrap());
    let ctx = FieldCtx::new(p).or_else(|_| r.fail(p_off, "modulus not an accepted prime"))?;
    let mut g = [FieldElem::ZERO; 3];
    for x in &mut g {
        *x = r.elem(&ctx, "generator")?;
    }
    let mut sender_public = [FieldElem::ZERO; 3];
    for x in &mut sender_public {
        *x = r.elem(&ctx, "sender public")?;
    }
    let salt = r.take(SALT_LEN, "salt")?.try_into().unwrap();
    let nonce = r.take(NONCE_LEN, "nonce")?.try_into().unwrap();
    let shape_off = r.pos;
    let rows = r.u16("rows")?;
    let cols = r.u16("cols")?;
    let msg_len = r.u32("length")?;
    let start_row = r.u16("start row")?;
    let start_col = r.u16("start col")?;
    let rule_off = r.pos;
    let indexing = match r.u8("indexing rule")? {
        RULE_STRIDE3 => Indexing::Stride3Boundary,
        RULE_EXPLICIT => {
            let mut lists = [Vec::new(), Vec::new()];
            for list in &mut lists {
                let n = r.u16("index list length")?;
                for _ in 0..n {
                    list.push(r.u16("index list entry")? as usize);
                }
            }
            let [rows, cols] = lists;
            Indexing::Explicit { rows, cols }
        }
        _ => return r.fail(rule_off, "unknown indexing rule"),
    };
    let header = Header {
        version,
        p,
        g,
        sender_public,
        salt,
        nonce,
        rows,
        cols,
        msg_len,
        start_row,
        start_col,
        indexing,
    };
    let plan = header
        .plan()
        .or_else(|_| r.fail(shape_off, "shape or index plan invalid"))?;
    let (m, n) = (rows as usize, cols as usize);
    if start_row == 0 || start_col == 0 || start_row as usize > m || start_col as usize > n {
        return r.fail(shape_off, "start position outside matrix");
    }
    let offset = (start_row as usize - 1) * n + start_col as usize - 1;
    if offset + msg_len as usize > m * n {
        return r.fail(shape_off, "length exceeds matrix");
    }
    let mut columns = Vec::with_capacity(plan.column_count());
    for _ in 0..plan.column_count() {
        let mut c = [FieldElem::ZERO; 3];
        for x in &mut c {
            *x = r.elem(&ctx, "column element")?;
        }
        columns.push(c);
    }
    if r.pos != buf.len() {
        return r.fail(r.pos, "trailing bytes");
    }
    Ok((Ciphertext { header, columns }, ctx))
}

/// Payload offset of the first column in a serialized buffer.
pub fn columns_offset(ct: &Ciphertext) -> usize {
    serialize(ct).len() - ct.columns.len() * 3 * octet_len_of(ct.header.p)
}

/// `enc(g^a)`, exposed for transcript checks.
pub fn sender_public_bytes(ct: &Ciphertext, ctx: &FieldCtx) -> Vec<u8> {
    encode_vector(&ct.header.sender_public, ctx)
}
