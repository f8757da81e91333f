//! Hyperperiod and stabilization-point arithmetic.
//!
//! Everything is checked: an overflow is reported, never wrapped.

use crate::error::ArithmeticError;
use crate::model::{TaskSet, Time};

pub fn gcd(mut a: Time, mut b: Time) -> Time {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Checked least common multiple; `lcm(0, x) = 0`.
pub fn lcm(a: Time, b: Time) -> Result<Time, ArithmeticError> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(ArithmeticError::Overflow {
            what: "hyperperiod",
        })
}

/// Mathematical ceiling of `num / den` for `den > 0`, rounding toward +∞ for
/// negative quotients too.
pub fn ceil_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    if num.rem_euclid(den) == 0 {
        q
    } else {
        q + 1
    }
}

/// `P = lcm{T_1, …, T_n}`.
pub fn hyperperiod(ts: &TaskSet) -> Result<Time, ArithmeticError> {
    ts.tasks().iter().try_fold(1, |acc, t| lcm(acc, t.period))
}

/// `S_1 = O_1`, `S_i = max{O_i, O_i + ⌈(S_{i−1} − O_i) / T_i⌉·T_i}`: the first
/// release of each task at or after the previous stabilization point.
pub fn stabilization_points(ts: &TaskSet) -> Result<Vec<Time>, ArithmeticError> {
    let overflow = ArithmeticError::Overflow {
        what: "stabilization point",
    };
    let mut points: Vec<Time> = Vec::with_capacity(ts.len());
    for task in ts.tasks() {
        let s = match points.last() {
            None => task.offset,
            Some(&prev) => {
                let o = i128::from(task.offset);
                let period = i128::from(task.period);
                let aligned = o + ceil_div(i128::from(prev) - o, period) * period;
                Time::try_from(aligned.max(o)).map_err(|_| overflow.clone())?
            }
        };
        points.push(s);
    }
    Ok(points)
}

/// `S_n`, the instant from which the worst-case schedule repeats.
pub fn stabilization_point(ts: &TaskSet) -> Result<Time, ArithmeticError> {
    Ok(stabilization_points(ts)?.last().copied().unwrap_or(0))
}
