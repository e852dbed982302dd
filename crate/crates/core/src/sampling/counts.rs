use num_bigint::BigUint;

use super::partition::check_block_size;
use crate::error::Result;

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// `|T_s| = d! / ((s!)^(d/s) (d/s)!)`, the number of partitions of `d`
/// vertices into blocks of size `s`.
pub fn count_partitions(d: usize, s: usize) -> Result<BigUint> {
    check_block_size(d, s)?;
    let l = d / s;
    Ok(factorial(d) / (factorial(s).pow(l as u32) * factorial(l)))
}

/// Number of partitions in `T_s` that contain a fixed edge:
/// `(d-2)! / (((d-s)/s)! (s!)^((d-s)/s) (s-2)!)`.
pub fn edge_multiplicity(d: usize, s: usize) -> Result<BigUint> {
    check_block_size(d, s)?;
    let rest = (d - s) / s;
    Ok(factorial(d - 2) / (factorial(rest) * factorial(s).pow(rest as u32) * factorial(s - 2)))
}

/// The uniform-partition rescaling `|T_s| / W = (d-1)/(s-1)`, evaluated in closed form.
pub fn uniform_scale(d: usize, s: usize) -> Result<f64> {
    check_block_size(d, s)?;
    Ok((d - 1) as f64 / (s - 1) as f64)
}
