use alloc::vec;
use alloc::vec::Vec;

use crate::statevector::{GateKind, GateOp};
use crate::{Error, Result};

/// Which end of the index ordering a permutation gathers indices into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Block whose low bits are all 0.
    Right,
    /// Block whose high bits are all 1.
    Left,
}

const MAX_ORDER_TRIALS: usize = 720;

/// Gates over register qubits `0 … register_size−1` (qubit 0 most significant)
/// that move `indices` into a contiguous block of size `2^k ≥ |indices|`.
///
/// Indices already inside the block stay put. The rest, in ascending order,
/// go to the free block slot nearest in Hamming distance, one bit flip at a
/// time, each flip an MCX controlled on every other register qubit.
pub fn build_permutation(indices: &[usize], direction: Direction, register_size: usize) -> Result<Vec<GateOp>> {
    let n = register_size;
    if n == 0 || n > usize::BITS as usize - 1 {
        return Err(Error::invalid("register size out of range"));
    }
    let size = 1usize << n;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate indices"));
    }
    if sorted.last().is_some_and(|&i| i >= size) {
        return Err(Error::invalid("index outside the register"));
    }
    if sorted.is_empty() {
        return Ok(Vec::new());
    }
    let block_bits = sorted.len().next_power_of_two().trailing_zeros() as usize;
    let fixed_bits = n - block_bits;
    let in_block = |i: usize| match direction {
        Direction::Right => i & ((1usize << fixed_bits) - 1) == 0,
        Direction::Left => i >> block_bits == (1usize << fixed_bits) - 1,
    };

    // content[pos] = original index currently stored at basis state `pos`.
    let mut content: Vec<usize> = (0..size).collect();
    let mut listed = vec![false; size];
    for &i in &sorted {
        listed[i] = true;
    }
    let mut taken = vec![false; size];
    for &i in &sorted {
        if in_block(i) {
            taken[i] = true;
        }
    }
    let mut gates = Vec::new();
    for &mover in sorted.iter().filter(|&&i| !in_block(i)) {
        let cur = content.iter().position(|&c| c == mover).expect("mover is present");
        let target = (0..size)
            .filter(|&t| in_block(t) && !taken[t])
            .min_by_key(|&t| ((t ^ cur).count_ones(), t))
            .expect("block has room");
        taken[target] = true;
        let mut bits: Vec<usize> = (0..n).filter(|&b| (cur ^ target) >> b & 1 == 1).collect();
        match direction {
            Direction::Right => bits.reverse(),
            Direction::Left => {}
        }
        let path = find_clean_order(&bits, cur, &content, &listed, mover);
        match path {
            Some(order) => {
                let mut pos = cur;
                for b in order {
                    let next = pos ^ (1 << b);
                    gates.push(flip_gate(pos, b, n)?);
                    content.swap(pos, next);
                    pos = next;
                }
            }
            None => {
                let mut map: Vec<usize> = (0..size).collect();
                map.swap(cur, target);
                gates.push(GateOp::permutation(vec![], (0..n).collect(), map)?);
                content.swap(cur, target);
            }
        }
    }
    Ok(gates)
}

/// A flip order whose intermediate states never disturb another listed index.
fn find_clean_order(bits: &[usize], start: usize, content: &[usize], listed: &[bool], mover: usize) -> Option<Vec<usize>> {
    let clean = |order: &[usize]| {
        let mut pos = start;
        for &b in order {
            pos ^= 1 << b;
            let c = content[pos];
            if c != mover && listed[c] {
                return false;
            }
        }
        true
    };
    let mut order = bits.to_vec();
    let mut trials = 0;
    // Heap's algorithm, preferred order first.
    let k = order.len();
    let mut stack = vec![0usize; k];
    if clean(&order) {
        return Some(order);
    }
    let mut i = 0;
    while i < k {
        if stack[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(stack[i], i);
            }
            trials += 1;
            if trials > MAX_ORDER_TRIALS {
                return None;
            }
            if clean(&order) {
                return Some(order);
            }
            stack[i] += 1;
            i = 0;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    None
}

/// MCX on qubit for bit `b`, controlled on every other qubit matching `pos`.
fn flip_gate(pos: usize, b: usize, n: usize) -> Result<GateOp> {
    let target = n - 1 - b;
    let controls = (0..n).filter(|&q| q != target).map(|q| (q, (pos >> (n - 1 - q)) & 1 == 1)).collect();
    GateOp::mcx(controls, target)
}

/// The basis permutation (`map[i]` = image of `i`) induced by gates that only
/// permute basis states of an `n`-qubit register.
pub fn induced_permutation(gates: &[GateOp], n: usize) -> Result<Vec<usize>> {
    let size = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut map: Vec<usize> = (0..size).collect();
    for g in gates {
        if g.qubits().iter().any(|&q| q >= n) {
            return Err(Error::invalid("gate outside the register"));
        }
        for img in map.iter_mut() {
            let s = *img;
            let controls_ok = |cs: &[(usize, bool)]| cs.iter().all(|&(q, v)| (s & bit(q) != 0) == v);
            *img = match g.kind() {
                GateKind::Mcx { controls, target } if controls_ok(controls) => s ^ bit(*target),
                GateKind::Mcx { .. } => s,
                GateKind::Permutation { controls, qubits, map: pm } => {
                    if controls_ok(controls) {
                        let k = qubits.len();
                        let local = qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
                            acc | (usize::from(s & bit(q) != 0) << (k - 1 - j))
                        });
                        let dest = pm[local];
                        let mut out = s;
                        for (j, &q) in qubits.iter().enumerate() {
                            out &= !bit(q);
                            if (dest >> (k - 1 - j)) & 1 == 1 {
                                out |= bit(q);
                            }
                        }
                        out
                    } else {
                        s
                    }
                }
                _ => return Err(Error::invalid("gate is not a basis permutation")),
            };
        }
    }
    Ok(map)
}
