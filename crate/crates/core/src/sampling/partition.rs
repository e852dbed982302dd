use alloc::vec::Vec;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

use super::counts::{count_partitions, uniform_scale};
use super::estimate::{EstimateBlock, SkewEntries, SkewEstimate};
use crate::error::{Error, Result};

/// Largest `|T_s|` that [`enumerate_partitions`] will materialise.
pub const ENUMERATION_CAP: u64 = 1_000_000;

pub fn check_block_size(d: usize, s: usize) -> Result<()> {
    if s < 2 {
        return Err(Error::BlockSizeTooSmall { s });
    }
    if d == 0 || !d.is_multiple_of(s) {
        return Err(Error::BlockSizeMustDivide { d, s });
    }
    Ok(())
}

/// A partition of `0..d` into `d / s` blocks of `s` vertices, stored in
/// canonical form: each block ascending, blocks ordered by first vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexPartition {
    d: usize,
    s: usize,
    blocks: Vec<Vec<usize>>,
}

impl VertexPartition {
    pub fn new(d: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let s = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != s) || s * blocks.len() != d || s == 0 {
            return Err(Error::InvalidArgument("blocks must be equal-sized and cover 0..d"));
        }
        let mut seen = alloc::vec![false; d];
        for &v in blocks.iter().flatten() {
            if v >= d || seen[v] {
                return Err(Error::InvalidArgument("blocks must be disjoint and cover 0..d"));
            }
            seen[v] = true;
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable();
        Ok(Self { d, s, blocks })
    }

    /// Chunks `order` into consecutive blocks of `s`.
    pub fn from_order(order: &[usize], s: usize) -> Result<Self> {
        check_block_size(order.len(), s)?;
        Self::new(order.len(), order.chunks(s).map(<[usize]>::to_vec).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of blocks `l = d / s`.
    pub fn l(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        self.blocks.iter().any(|b| b.contains(&i) && b.contains(&j))
    }

    /// Edges `(i, j)`, `i < j`, inside the blocks.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks.iter().flat_map(|b| {
            (0..b.len()).flat_map(move |x| (x + 1..b.len()).map(move |y| (b[x], b[y])))
        })
    }
}

/// Uniform draw from `T_s`: Fisher-Yates shuffle of `0..d`, then chunk into `s`-blocks.
pub fn sample_uniform_partition<R: Rng + ?Sized>(d: usize, s: usize, rng: &mut R) -> Result<VertexPartition> {
    check_block_size(d, s)?;
    let order = shuffled_order(d, rng);
    VertexPartition::from_order(&order, s)
}

pub(crate) fn shuffled_order<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    order
}

/// The uniform-partition estimate `((d-1)/(s-1)) * Omega[T]`.
pub fn uniform_estimate<E: SkewEntries + ?Sized>(omega: &E, partition: &VertexPartition) -> Result<SkewEstimate> {
    if omega.dim() != partition.d() {
        return Err(Error::DimensionMismatch {
            op: "uniform_estimate",
            expected: (partition.d(), partition.d()),
            found: (omega.dim(), omega.dim()),
        });
    }
    let scale = uniform_scale(partition.d(), partition.s())?;
    let blocks = partition
        .blocks()
        .iter()
        .map(|b| EstimateBlock::restrict(omega, b.clone()))
        .collect();
    Ok(SkewEstimate::new(partition.d(), blocks, scale))
}

/// Every element of `T_s` exactly once, in lexicographic canonical order.
pub fn enumerate_partitions(d: usize, s: usize) -> Result<Vec<VertexPartition>> {
    let count = count_partitions(d, s)?;
    let count = count.to_u64().unwrap_or(u64::MAX);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count, cap: ENUMERATION_CAP });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut used = alloc::vec![false; d];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    recurse(d, s, &mut used, &mut blocks, &mut out);
    Ok(out)
}

fn recurse(
    d: usize,
    s: usize,
    used: &mut Vec<bool>,
    blocks: &mut Vec<Vec<usize>>,
    out: &mut Vec<VertexPartition>,
) {
    let Some(first) = used.iter().position(|u| !u) else {
        out.push(VertexPartition { d, s, blocks: blocks.clone() });
        return;
    };
    used[first] = true;
    let mut block = alloc::vec![first];
    choose(d, s, first + 1, used, &mut block, blocks, out);
    used[first] = false;
}

fn choose(
    d: usize,
    s: usize,
    from: usize,
    used: &mut Vec<bool>,
    block: &mut Vec<usize>,
    blocks: &mut Vec<Vec<usize>>,
    out: &mut Vec<VertexPartition>,
) {
    if block.len() == s {
        blocks.push(block.clone());
        recurse(d, s, used, blocks, out);
        blocks.pop();
        return;
    }
    for v in from..d {
        if used[v] {
            continue;
        }
        used[v] = true;
        block.push(v);
        choose(d, s, v + 1, used, block, blocks, out);
        block.pop();
        used[v] = false;
    }
}
