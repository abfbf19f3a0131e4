//! Station-to-station style authentication around the vector exchange.
//!
//! ```text
//! MSG1  I -> R   "PVCSTS" | 0x01 | enc(g^a) | len | sig_I
//! MSG2  R -> I   "PVCSTS" | 0x01 | enc(g^b) | len | sig_R | mac_R
//! MSG3  I -> R   mac_I
//! ```
//!
//! `sig_I` covers `enc(g^a)` (the initiator has not seen `g^b` yet) and
//! `sig_R` covers `enc(g^b) | enc(g^a)`. Both tags are HMAC-SHA-256 over the
//! canonical transcript `enc(g^a) | enc(g^b) | len | sig_I | len | sig_R`,
//! keyed per direction from `K_mac`. Lengths are 4-octet big-endian.

use std::sync::mpsc;

use hmac::{Hmac, Mac};
use sha2::Sha256;

use super::{
    derive_shared, encode_vector, validate_peer_public, EphemeralKeypair, PrimitiveVector, PublicVector, SharedVector,
    Signer, Verifier,
};
use crate::error::{Error, Result};
use crate::field::{os2ip, FieldCtx};
use crate::kdfstream;

pub const MAGIC: &[u8; 6] = b"PVCSTS";
pub const VERSION: u8 = 0x01;
pub const MAC_LEN: usize = 32;

const RESPONDER_TAG_LABEL: &[u8] = b"responder";
const INITIATOR_TAG_LABEL: &[u8] = b"initiator";

/// Everything both sides saw, kept after a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StsTranscript {
    pub initiator_public: PublicVector,
    pub responder_public: PublicVector,
    pub sig_initiator: Vec<u8>,
    pub sig_responder: Vec<u8>,
    pub mac_responder: [u8; MAC_LEN],
    pub mac_initiator: [u8; MAC_LEN],
}

/// Canonical MAC input.
pub fn transcript_bytes(
    initiator_public: &PublicVector,
    responder_public: &PublicVector,
    sig_initiator: &[u8],
    sig_responder: &[u8],
    ctx: &FieldCtx,
) -> Vec<u8> {
    let mut out = encode_vector(initiator_public, ctx);
    out.extend(encode_vector(responder_public, ctx));
    for sig in [sig_initiator, sig_responder] {
        out.extend_from_slice(&(sig.len() as u32).to_be_bytes());
        out.extend_from_slice(sig);
    }
    out
}

/// `K_mac = HKDF-Expand(HKDF-Extract(enc(g^a)|enc(g^b), encode(G)), "PVC/mac", 32)`.
pub fn handshake_mac_key(
    shared: &SharedVector,
    initiator_public: &PublicVector,
    responder_public: &PublicVector,
    ctx: &FieldCtx,
) -> [u8; 32] {
    let mut salt = encode_vector(initiator_public, ctx);
    salt.extend(encode_vector(responder_public, ctx));
    kdfstream::DerivedKeys::derive(shared, &salt, ctx)
        .expect("salt is never empty")
        .k_mac
}

fn tag(k_mac: &[u8; 32], direction: &[u8], transcript: &[u8]) -> [u8; MAC_LEN] {
    let dir_key = kdfstream::hmac_sha256(k_mac, &[direction]);
    kdfstream::hmac_sha256(&dir_key, &[transcript])
}

fn check_tag(k_mac: &[u8; 32], direction: &[u8], transcript: &[u8], got: &[u8]) -> Result<()> {
    let dir_key = kdfstream::hmac_sha256(k_mac, &[direction]);
    let mut m = <Hmac<Sha256> as Mac>::new_from_slice(&dir_key).expect("any key length");
    m.update(transcript);
    m.verify_slice(got).map_err(|_| Error::MacInvalid)
}

fn encode_signed(public: &PublicVector, sig: &[u8], ctx: &FieldCtx) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.push(VERSION);
    out.extend(encode_vector(public, ctx));
    out.extend_from_slice(&(sig.len() as u32).to_be_bytes());
    out.extend_from_slice(sig);
    out
}

/// Parses the common MSG1/MSG2 prefix; `trailer` is the number of octets
/// expected after the signature.
fn decode_signed(msg: &[u8], trailer: usize, ctx: &FieldCtx) -> Result<(PublicVector, Vec<u8>, Vec<u8>)> {
    let ol = ctx.octet_len();
    let head = MAGIC.len() + 1 + 3 * ol + 4;
    if msg.len() < head {
        return Err(Error::HandshakeMalformed("truncated"));
    }
    if &msg[..MAGIC.len()] != MAGIC {
        return Err(Error::HandshakeMalformed("bad magic"));
    }
    if msg[MAGIC.len()] != VERSION {
        return Err(Error::HandshakeMalformed("unsupported version"));
    }
    let mut public = [crate::field::FieldElem::ZERO; 3];
    let mut off = MAGIC.len() + 1;
    for slot in &mut public {
        let v = os2ip(&msg[off..off + ol]).map_err(|_| Error::HandshakeMalformed("element"))?;
        *slot = ctx
            .try_elem(v)
            .ok_or(Error::HandshakeMalformed("element not reduced"))?;
        off += ol;
    }
    let sig_len = u32::from_be_bytes(msg[off..off + 4].try_into().unwrap()) as usize;
    off += 4;
    if msg.len() != off + sig_len + trailer {
        return Err(Error::HandshakeMalformed("length mismatch"));
    }
    let sig = msg[off..off + sig_len].to_vec();
    let rest = msg[off + sig_len..].to_vec();
    Ok((public, sig, rest))
}

/// Initiator before MSG2 arrives.
pub struct Initiator<'a> {
    ctx: &'a FieldCtx,
    keypair: EphemeralKeypair,
    verifier: &'a dyn Verifier,
    sig_initiator: Vec<u8>,
}

impl<'a> Initiator<'a> {
    /// Returns the state and MSG1.
    pub fn start(
        ctx: &'a FieldCtx,
        _g: &PrimitiveVector,
        keypair: EphemeralKeypair,
        signer: &'a dyn Signer,
        peer: &'a dyn Verifier,
    ) -> (Self, Vec<u8>) {
        let sig = signer.sign(&encode_vector(&keypair.public(), ctx));
        let msg1 = encode_signed(&keypair.public(), &sig, ctx);
        (
            Initiator {
                ctx,
                keypair,
                verifier: peer,
                sig_initiator: sig,
            },
            msg1,
        )
    }

    /// Consumes MSG2, returns the shared vector, transcript and MSG3.
    pub fn handle_reply(self, msg2: &[u8]) -> Result<(SharedVector, StsTranscript, Vec<u8>)> {
        let ctx = self.ctx;
        let (peer_public, sig_r, mac_r) = decode_signed(msg2, MAC_LEN, ctx)?;
        validate_peer_public(&peer_public, ctx)?;
        let own_public = self.keypair.public();
        let mut signed = encode_vector(&peer_public, ctx);
        signed.extend(encode_vector(&own_public, ctx));
        if !self.verifier.verify(&signed, &sig_r) {
            return Err(Error::SignatureInvalid);
        }
        let shared = derive_shared(&self.keypair, &peer_public, ctx)?;
        let k_mac = handshake_mac_key(&shared, &own_public, &peer_public, ctx);
        let transcript = transcript_bytes(&own_public, &peer_public, &self.sig_initiator, &sig_r, ctx);
        check_tag(&k_mac, RESPONDER_TAG_LABEL, &transcript, &mac_r)?;
        let mac_i = tag(&k_mac, INITIATOR_TAG_LABEL, &transcript);
        let record = StsTranscript {
            initiator_public: own_public,
            responder_public: peer_public,
            sig_initiator: self.sig_initiator,
            sig_responder: sig_r,
            mac_responder: mac_r.try_into().expect("length checked"),
            mac_initiator: mac_i,
        };
        Ok((shared, record, mac_i.to_vec()))
    }
}

/// Responder before MSG1 arrives.
pub struct Responder<'a> {
    ctx: &'a FieldCtx,
    keypair: EphemeralKeypair,
    signer: &'a dyn Signer,
    verifier: &'a dyn Verifier,
}

/// Responder after sending MSG2, waiting for the initiator's tag.
pub struct ResponderAwaitingConfirm {
    shared: SharedVector,
    k_mac: [u8; 32],
    transcript: Vec<u8>,
    record: StsTranscript,
}

impl<'a> Responder<'a> {
    pub fn new(
        ctx: &'a FieldCtx,
        _g: &PrimitiveVector,
        keypair: EphemeralKeypair,
        signer: &'a dyn Signer,
        peer: &'a dyn Verifier,
    ) -> Self {
        Responder {
            ctx,
            keypair,
            signer,
            verifier: peer,
        }
    }

    /// Consumes MSG1 and produces MSG2.
    pub fn handle_hello(self, msg1: &[u8]) -> Result<(ResponderAwaitingConfirm, Vec<u8>)> {
        let ctx = self.ctx;
        let (peer_public, sig_i, _) = decode_signed(msg1, 0, ctx)?;
        validate_peer_public(&peer_public, ctx)?;
        if !self.verifier.verify(&encode_vector(&peer_public, ctx), &sig_i) {
            return Err(Error::SignatureInvalid);
        }
        let own_public = self.keypair.public();
        let shared = derive_shared(&self.keypair, &peer_public, ctx)?;
        let k_mac = handshake_mac_key(&shared, &peer_public, &own_public, ctx);

        let mut signed = encode_vector(&own_public, ctx);
        signed.extend(encode_vector(&peer_public, ctx));
        let sig_r = self.signer.sign(&signed);
        let transcript = transcript_bytes(&peer_public, &own_public, &sig_i, &sig_r, ctx);
        let mac_r = tag(&k_mac, RESPONDER_TAG_LABEL, &transcript);

        let mut msg2 = encode_signed(&own_public, &sig_r, ctx);
        msg2.extend_from_slice(&mac_r);
        let record = StsTranscript {
            initiator_public: peer_public,
            responder_public: own_public,
            sig_initiator: sig_i,
            sig_responder: sig_r,
            mac_responder: mac_r,
            mac_initiator: [0; MAC_LEN],
        };
        Ok((
            ResponderAwaitingConfirm {
                shared,
                k_mac,
                transcript,
                record,
            },
            msg2,
        ))
    }
}

impl ResponderAwaitingConfirm {
    /// Consumes MSG3. Key material is released only if the tag verifies.
    pub fn handle_confirm(self, msg3: &[u8]) -> Result<(SharedVector, StsTranscript)> {
        if msg3.len() != MAC_LEN {
            return Err(Error::HandshakeMalformed("confirm length"));
        }
        check_tag(&self.k_mac, INITIATOR_TAG_LABEL, &self.transcript, msg3)?;
        let mut record = self.record;
        record.mac_initiator.copy_from_slice(msg3);
        Ok((self.shared, record))
    }
}

/// A reliable, ordered message transport.
pub trait Channel {
    fn send(&mut self, msg: Vec<u8>) -> Result<()>;
    fn recv(&mut self) -> Result<Vec<u8>>;
}

/// In-process duplex queue.
pub struct MemoryChannel {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
}

impl MemoryChannel {
    pub fn pair() -> (MemoryChannel, MemoryChannel) {
        let (tx_a, rx_b) = mpsc::channel();
        let (tx_b, rx_a) = mpsc::channel();
        (
            MemoryChannel { tx: tx_a, rx: rx_a },
            MemoryChannel { tx: tx_b, rx: rx_b },
        )
    }
}

impl Channel for MemoryChannel {
    fn send(&mut self, msg: Vec<u8>) -> Result<()> {
        self.tx.send(msg).map_err(|_| Error::ChannelClosed)
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.rx.recv().map_err(|_| Error::ChannelClosed)
    }
}

/// Drives the initiator side over a channel.
pub fn run_initiator(
    ctx: &FieldCtx,
    g: &PrimitiveVector,
    keypair: EphemeralKeypair,
    signer: &dyn Signer,
    peer: &dyn Verifier,
    channel: &mut dyn Channel,
) -> Result<(SharedVector, StsTranscript)> {
    let (state, msg1) = Initiator::start(ctx, g, keypair, signer, peer);
    channel.send(msg1)?;
    let msg2 = channel.recv()?;
    let (shared, transcript, msg3) = state.handle_reply(&msg2)?;
    channel.send(msg3)?;
    Ok((shared, transcript))
}

/// Drives the responder side over a channel.
pub fn run_responder(
    ctx: &FieldCtx,
    g: &PrimitiveVector,
    keypair: EphemeralKeypair,
    signer: &dyn Signer,
    peer: &dyn Verifier,
    channel: &mut dyn Channel,
) -> Result<(SharedVector, StsTranscript)> {
    let msg1 = channel.recv()?;
    let (state, msg2) = Responder::new(ctx, g, keypair, signer, peer).handle_hello(&msg1)?;
    channel.send(msg2)?;
    let msg3 = channel.recv()?;
    state.handle_confirm(&msg3)
}
