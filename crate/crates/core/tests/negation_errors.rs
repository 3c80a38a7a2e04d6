#![allow(clippy::needless_range_loop)]

//! Ciphertext negations slip through authentication: the feature and so the
//! regenerated tag are unchanged, but the plaintext is wrong. This is the
//! event behind `P_b`.

use tbe_core::receiver::receive_block;
use tbe_core::tbe::{KeyMaterial, MessageBlock, PowerSplit};
use tbe_core::{PowerAllocation, C64};

fn received(block: &MessageBlock, split: &PowerSplit, negate: &[usize]) -> Vec<C64> {
    block
        .ciphertext
        .iter()
        .zip(&block.tag)
        .enumerate()
        .map(|(i, (&c, &t))| {
            let c = if negate.contains(&i) { -c } else { c };
            c * split.rho_m + t * split.rho_t
        })
        .collect()
}

#[test]
fn negation_only_block_is_accepted_with_wrong_plaintext() {
    let key = KeyMaterial::from_u64(0x5EED, 64).unwrap();
    let split = PowerSplit::new(PowerAllocation::new(0.95, 1.0).unwrap());
    let bits: Vec<bool> = (0..240).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
    let block = MessageBlock::new(&key, bits.clone(), &split).unwrap();

    let clean = receive_block(&key, received(&block, &split, &[]), &split, 0).unwrap();
    assert!(clean.decision.authentic());
    assert_eq!(clean.plaintext.as_ref().unwrap().1, bits);

    let negated = [3, 17, 64, 119];
    let rx = receive_block(&key, received(&block, &split, &negated), &split, 0).unwrap();
    assert!(rx.decision.authentic(), "mismatches {}", rx.decision.statistic);
    assert_eq!(rx.t_tilde, block.tag);
    let (sym, out) = rx.plaintext.unwrap();
    for i in 0..sym.len() {
        let expect = if negated.contains(&i) { -block.symbols[i] } else { block.symbols[i] };
        assert!((sym[i] - expect).norm() < 1e-12, "slot {i}");
    }
    let wrong = out.chunks(2).zip(bits.chunks(2)).filter(|(a, b)| a != b).count();
    assert_eq!(wrong, negated.len());
}

#[test]
fn non_negation_error_changes_the_tag() {
    let key = KeyMaterial::from_u64(0x5EED, 64).unwrap();
    let split = PowerSplit::new(PowerAllocation::new(0.95, 1.0).unwrap());
    let bits: Vec<bool> = (0..240).map(|i| i % 3 == 0).collect();
    let block = MessageBlock::new(&key, bits, &split).unwrap();
    let mut y = received(&block, &split, &[]);
    // rotate one symbol by 90 degrees: a neighbour error flips its feature
    y[10] = (y[10] - block.tag[10] * split.rho_t) * C64::i() + block.tag[10] * split.rho_t;
    let rx = receive_block(&key, y, &split, 0).unwrap();
    assert_ne!(rx.t_tilde, block.tag);
    assert!(!rx.decision.authentic());
}
