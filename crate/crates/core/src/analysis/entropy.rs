use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::FieldElem;

/// Plug-in Shannon entropy of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub n_values: usize,
    pub h_bits: f64,
    /// `log2(n_values)`.
    pub h_max: f64,
    pub distinct_count: usize,
}

pub fn entropy(values: &[FieldElem]) -> Result<EntropyReport> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut freq: HashMap<FieldElem, usize> = HashMap::new();
    for v in values {
        *freq.entry(*v).or_default() += 1;
    }
    Ok(entropy_from_counts(freq.values().copied(), values.len()))
}

/// `H = log2 n - (1/n) sum c log2 c`, exact when every count is one.
pub(crate) fn entropy_from_counts(counts: impl Iterator<Item = usize>, n: usize) -> EntropyReport {
    let nf = n as f64;
    let mut distinct = 0;
    let mut acc = 0.0;
    for c in counts {
        distinct += 1;
        if c > 1 {
            acc += c as f64 * (c as f64).log2();
        }
    }
    let h_max = nf.log2();
    EntropyReport {
        n_values: n,
        h_bits: (h_max - acc / nf).max(0.0),
        h_max,
        distinct_count: distinct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use proptest::prelude::*;

    fn elems(v: &[u64]) -> Vec<FieldElem> {
        let ctx = FieldCtx::new(12347).unwrap();
        v.iter().map(|&x| ctx.elem(x)).collect()
    }

    #[test]
    fn reference_cases() {
        let r = entropy(&elems(&(0..108).collect::<Vec<_>>())).unwrap();
        assert_eq!(r.h_bits, 108f64.log2());
        assert!((r.h_bits - 6.7549).abs() < 1e-4);
        assert_eq!(entropy(&elems(&[5; 40])).unwrap().h_bits, 0.0);
        assert_eq!(entropy(&elems(&[1, 2, 1, 2])).unwrap().h_bits, 1.0);
        assert_eq!(entropy(&[]), Err(Error::EmptyInput));
    }

    proptest! {
        #[test]
        fn bounded_and_matches_direct_sum(v in proptest::collection::vec(0u64..20, 1..200)) {
            let r = entropy(&elems(&v)).unwrap();
            let n = v.len() as f64;
            let mut f = std::collections::HashMap::new();
            for x in &v { *f.entry(x).or_insert(0usize) += 1; }
            let direct: f64 = f.values().map(|&c| { let q = c as f64 / n; -q * q.log2() }).sum();
            prop_assert!((r.h_bits - direct).abs() < 1e-9);
            prop_assert!(r.h_bits >= 0.0 && r.h_bits <= r.h_max + 1e-12);
            prop_assert_eq!(r.distinct_count == v.len(), (r.h_bits - r.h_max).abs() < 1e-12);
        }
    }
}
