//! 3x3 blocks over F_p and the key matrices built from the shared vector.

use crate::analysis::ops::OpCounters;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::keyexchange::SharedVector;

/// Row-major 3x3 matrix over F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Block(pub [[FieldElem; 3]; 3]);

impl Block {
    pub const ZERO: Block = Block([[FieldElem::ZERO; 3]; 3]);
    pub const IDENTITY: Block = Block([
        [FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO],
        [FieldElem::ZERO, FieldElem::ONE, FieldElem::ZERO],
        [FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE],
    ]);

    /// Reduces raw integers into a block.
    pub fn from_u64(ctx: &FieldCtx, rows: [[u64; 3]; 3]) -> Block {
        Block(rows.map(|r| r.map(|v| ctx.elem(v))))
    }

    pub fn to_u64(&self) -> [[u64; 3]; 3] {
        self.0.map(|r| r.map(FieldElem::value))
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> FieldElem {
        self.0[row][col]
    }

    pub fn column(&self, col: usize) -> [FieldElem; 3] {
        [self.0[0][col], self.0[1][col], self.0[2][col]]
    }

    /// Builds a block whose columns are `cols[0..3]`.
    pub fn from_columns(cols: [[FieldElem; 3]; 3]) -> Block {
        let mut b = Block::ZERO;
        for (c, col) in cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                b.0[r][c] = v;
            }
        }
        b
    }

    pub fn transpose(&self) -> Block {
        Block::from_columns(self.0)
    }
}

pub fn mat_mul(a: &Block, b: &Block, ctx: &FieldCtx) -> Block {
    let mut out = Block::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = FieldElem::ZERO;
            for k in 0..3 {
                acc = ctx.add(acc, ctx.mul(a.0[i][k], b.0[k][j]));
            }
            out.0[i][j] = acc;
        }
    }
    out
}

pub fn mat_add(a: &Block, b: &Block, ctx: &FieldCtx) -> Block {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out.0[i][j] = ctx.add(a.0[i][j], b.0[i][j]);
        }
    }
    out
}

pub fn mat_sub(a: &Block, b: &Block, ctx: &FieldCtx) -> Block {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out.0[i][j] = ctx.sub(a.0[i][j], b.0[i][j]);
        }
    }
    out
}

/// Determinant by cofactor expansion along the first row.
pub fn det(a: &Block, ctx: &FieldCtx) -> FieldElem {
    let m = &a.0;
    let minor = |r1: usize, c1: usize, r2: usize, c2: usize| {
        ctx.sub(ctx.mul(m[r1][c1], m[r2][c2]), ctx.mul(m[r1][c2], m[r2][c1]))
    };
    let t0 = ctx.mul(m[0][0], minor(1, 1, 2, 2));
    let t1 = ctx.mul(m[0][1], minor(1, 0, 2, 2));
    let t2 = ctx.mul(m[0][2], minor(1, 0, 2, 1));
    ctx.add(ctx.sub(t0, t1), t2)
}

/// Inverse via the adjugate: A^-1 = adj(A) / det(A).
pub fn mat_inv(a: &Block, ctx: &FieldCtx) -> Result<Block> {
    let d = det(a, ctx);
    let d_inv = ctx.inv(d).map_err(|_| Error::Singular)?;
    let m = &a.0;
    let mut out = Block::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            // cofactor of (j, i) gives adj[i][j]
            let (r1, r2) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = ctx.sub(ctx.mul(m[r1][c1], m[r2][c2]), ctx.mul(m[r1][c2], m[r2][c1]));
            let cof = if (i + j) % 2 == 0 { minor } else { ctx.neg(minor) };
            out.0[i][j] = ctx.mul(cof, d_inv);
        }
    }
    Ok(out)
}

/// Identity when the block's top-left row and column labels coincide.
pub fn delta(i: usize, j: usize) -> Block {
    if i == j {
        Block::IDENTITY
    } else {
        Block::ZERO
    }
}

/// Secret matrices derived from the shared vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMatrices {
    pub v: Block,
    pub u: Block,
    pub v_inv: Block,
}

impl KeyMatrices {
    /// `V = [[0,k1,k1],[k2,0,k2],[k3,k3,0]]`, `U = diag(k1,k2,k3)`.
    pub fn build(shared: &SharedVector, ctx: &FieldCtx) -> Result<Self> {
        let [k1, k2, k3] = shared.components();
        let z = FieldElem::ZERO;
        let v = Block([[z, k1, k1], [k2, z, k2], [k3, k3, z]]);
        let u = Block([[k1, z, z], [z, k2, z], [z, z, k3]]);
        let d = det(&v, ctx);
        let expected = ctx.mul(ctx.mul(ctx.elem(2), k1), ctx.mul(k2, k3));
        debug_assert_eq!(d, expected, "det(V) = 2 k1 k2 k3");
        if d == FieldElem::ZERO {
            return Err(Error::DegenerateKey);
        }
        let v_inv = mat_inv(&v, ctx)?;
        Ok(KeyMatrices { v, u, v_inv })
    }

    /// `C = S V + delta(i,j) U`.
    pub fn encrypt_block(&self, s: &Block, i: usize, j: usize, ctx: &FieldCtx) -> Block {
        let c = mat_mul(s, &self.v, ctx);
        if i == j {
            mat_add(&c, &self.u, ctx)
        } else {
            c
        }
    }

    /// Same as [`encrypt_block`](Self::encrypt_block), tallying one
    /// multiply-accumulate per term: 27 for `S V` and 9 for `delta U`.
    pub fn encrypt_block_counted(
        &self,
        s: &Block,
        i: usize,
        j: usize,
        ctx: &FieldCtx,
        counters: &mut OpCounters,
    ) -> Block {
        let d = delta(i, j);
        let mut out = Block::ZERO;
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = FieldElem::ZERO;
                for k in 0..3 {
                    acc = ctx.add(acc, ctx.mul(s.0[r][k], self.v.0[k][c]));
                    counters.field_mults += 1;
                    counters.field_adds += 1;
                }
                acc = ctx.add(acc, ctx.mul(d.0[r][c], self.u.0[r][c]));
                counters.field_mults += 1;
                counters.field_adds += 1;
                out.0[r][c] = acc;
            }
        }
        out
    }

    /// `S = (C - delta(i,j) U) V^-1`.
    pub fn decrypt_block(&self, c: &Block, i: usize, j: usize, ctx: &FieldCtx) -> Block {
        let x = if i == j { mat_sub(c, &self.u, ctx) } else { *c };
        mat_mul(&x, &self.v_inv, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::is_prime;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> FieldCtx {
        FieldCtx::new(12347).unwrap()
    }

    fn reference_shared(f: &FieldCtx) -> SharedVector {
        SharedVector::new(f, [10509, 11849, 10836]).unwrap()
    }

    fn random_block(f: &FieldCtx, rng: &mut impl Rng) -> Block {
        let mut b = Block::ZERO;
        for r in 0..3 {
            for c in 0..3 {
                b.0[r][c] = f.elem(rng.gen_range(0..f.modulus()));
            }
        }
        b
    }

    #[test]
    fn reference_key_matrices() {
        let f = ctx();
        let km = KeyMatrices::build(&reference_shared(&f), &f).unwrap();
        assert_eq!(km.v.to_u64(), [[0, 10509, 10509], [11849, 0, 11849], [10836, 10836, 0]]);
        assert_eq!(km.u.to_u64(), [[10509, 0, 0], [0, 11849, 0], [0, 0, 10836]]);
        // independent route: plain integer arithmetic
        let rhs = 2u128 * 10509 * 11849 * 10836 % 12347;
        assert_eq!(det(&km.v, &f).value() as u128, rhs);
        assert_eq!(mat_mul(&km.v, &km.v_inv, &f), Block::IDENTITY);
        assert_eq!(mat_mul(&km.v_inv, &km.v, &f), Block::IDENTITY);
    }

    #[test]
    fn unit_shared_vector_has_det_two() {
        let f = ctx();
        let km = KeyMatrices::build(&SharedVector::new(&f, [1, 1, 1]).unwrap(), &f).unwrap();
        assert_eq!(det(&km.v, &f).value(), 2);
    }

    #[test]
    fn first_table_entry() {
        let f = ctx();
        let km = KeyMatrices::build(&reference_shared(&f), &f).unwrap();
        let s = Block::from_u64(&f, [[7070, 6104, 8682], [7237, 8332, 9140], [1996, 11643, 5409]]);
        let c = km.encrypt_block(&s, 1, 1, &f);
        assert_eq!(c.get(0, 0).value(), 2091);
    }

    #[test]
    fn identity_and_singular() {
        let f = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_block(&f, &mut rng);
        assert_eq!(mat_mul(&a, &Block::IDENTITY, &f), a);
        assert_eq!(mat_inv(&Block::IDENTITY, &f).unwrap(), Block::IDENTITY);
        let ones = Block::from_u64(&f, [[1; 3]; 3]);
        assert_eq!(mat_inv(&ones, &f), Err(Error::Singular));
    }

    #[test]
    fn delta_labels() {
        assert_eq!(delta(1, 1), Block::IDENTITY);
        assert_eq!(delta(1, 4), Block::ZERO);
        assert_eq!(delta(4, 4), Block::IDENTITY);
    }

    #[test]
    fn mat_mul_matches_naive_oracle() {
        let f = FieldCtx::new(1_000_000_007).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let a = random_block(&f, &mut rng);
            let b = random_block(&f, &mut rng);
            let (au, bu) = (a.to_u64(), b.to_u64());
            let mut naive = [[0u64; 3]; 3];
            for (i, row) in naive.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    let s: u128 = (0..3).map(|k| au[i][k] as u128 * bu[k][j] as u128).sum();
                    *cell = (s % f.modulus() as u128) as u64;
                }
            }
            assert_eq!(mat_mul(&a, &b, &f).to_u64(), naive);
        }
    }

    #[test]
    fn inverse_is_involutive() {
        let f = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut checked = 0;
        while checked < 500 {
            let a = random_block(&f, &mut rng);
            if let Ok(inv) = mat_inv(&a, &f) {
                assert_eq!(mat_mul(&a, &inv, &f), Block::IDENTITY);
                assert_eq!(mat_inv(&inv, &f).unwrap(), a);
                checked += 1;
            }
        }
    }

    #[test]
    fn det_identity_random_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut p = rng.gen_range(1u64 << 29..1 << 60) | 1;
            while !is_prime(p) {
                p += 2;
            }
            let f = FieldCtx::new(p).unwrap();
            let ks = [(); 3].map(|_| rng.gen_range(1..p));
            let km = KeyMatrices::build(&SharedVector::new(&f, ks).unwrap(), &f).unwrap();
            let two_k = f.mul(f.mul(f.elem(2), f.elem(ks[0])), f.mul(f.elem(ks[1]), f.elem(ks[2])));
            assert_eq!(det(&km.v, &f), two_k);
            assert_ne!(two_k, FieldElem::ZERO);
            assert_eq!(mat_mul(&km.v, &km.v_inv, &f), Block::IDENTITY);
        }
    }

    #[test]
    fn affine_map_is_bijective() {
        let f = ctx();
        let km = KeyMatrices::build(&reference_shared(&f), &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let x = random_block(&f, &mut rng);
            let y = random_block(&f, &mut rng);
            let (i, j) = if rng.gen() { (1, 1) } else { (1, 4) };
            let cx = km.encrypt_block(&x, i, j, &f);
            if x != y {
                assert_ne!(cx, km.encrypt_block(&y, i, j, &f));
            }
            assert_eq!(km.decrypt_block(&cx, i, j, &f), x);
            assert_eq!(mat_mul(&mat_mul(&x, &km.v, &f), &km.v_inv, &f), x);
        }
    }

    #[test]
    fn counted_path_agrees() {
        let f = ctx();
        let km = KeyMatrices::build(&reference_shared(&f), &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut counters = OpCounters::default();
        for (i, j) in [(1, 1), (1, 4)] {
            let s = random_block(&f, &mut rng);
            assert_eq!(
                km.encrypt_block_counted(&s, i, j, &f, &mut counters),
                km.encrypt_block(&s, i, j, &f)
            );
        }
        assert_eq!((counters.field_mults, counters.field_adds), (72, 72));
    }
}
