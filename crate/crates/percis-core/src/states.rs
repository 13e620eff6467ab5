//! Percolation states and the derived pair-weight quantities.
//!
//! For states `x_v` in `[0, 1]` and the ramp `R(x) = max(0, x)`, the total
//! pair weight is `C = sum_{u,w} R(x_u - x_w)`, the per-node excluded
//! denominator is `D_v = C - sum_u |x_v - x_u|`, and the likelihood ratio
//! `d_v = C / D_v` bounds how much more a node weighs under the
//! state-aware pair distribution than under the node-excluded one. All
//! aggregates are computed from the sorted states via prefix sums in
//! `O(n)` with compensated summation.

use crate::error::{Error, Result};

/// Ramp function `max(0, x)`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    x.max(0.0)
}

/// Kahan accumulator; `C` aggregates `O(n^2)` implicit terms via prefix
/// sums, so error control matters for large `n`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Validated percolation states together with every derived scalar needed
/// by the samplers and estimators.
#[derive(Debug, Clone)]
pub struct PercolationStates {
    raw: Vec<f64>,
    sorted: Vec<f64>,
    perm: Vec<u32>,
    total: f64,
    exclusion: Vec<f64>,
    denom: Vec<f64>,
    ratio: Vec<f64>,
    ratio_max: f64,
}

impl PercolationStates {
    /// Builds and validates states for `n = raw.len()` nodes.
    ///
    /// Fails when a value lies outside `[0, 1]`, when all states are equal
    /// (the measure is undefined), or when some node `v` has fewer than
    /// two distinct states among the others (`D_v = 0`).
    pub fn build(raw: Vec<f64>) -> Result<Self> {
        let n = raw.len();
        if n == 0 {
            return Err(Error::InvalidParameter("no percolation states given".into()));
        }
        for (node, &x) in raw.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::StateOutOfRange { node, value: x });
            }
        }

        // Sort non-increasing; stable so ties keep ascending dense id.
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.sort_by(|&a, &b| {
            raw[b as usize]
                .partial_cmp(&raw[a as usize])
                .expect("states are finite")
        });
        let sorted: Vec<f64> = perm.iter().map(|&v| raw[v as usize]).collect();

        if sorted[0] == sorted[n - 1] {
            return Err(Error::DegenerateStates);
        }
        // D_v > 0 iff at least two distinct states survive after removing v.
        for (pos, &v) in perm.iter().enumerate() {
            let degenerate = if pos == 0 {
                sorted[1] == sorted[n - 1]
            } else if pos == n - 1 {
                sorted[0] == sorted[n - 2]
            } else {
                false // removing a middle node keeps both extremes
            };
            if degenerate {
                return Err(Error::UndefinedCentrality { node: v as usize });
            }
        }

        // prefix[i] = sum of the i largest states
        let mut prefix = Vec::with_capacity(n + 1);
        let mut acc = KahanSum::default();
        prefix.push(0.0);
        for &x in &sorted {
            acc.add(x);
            prefix.push(acc.value());
        }

        // C = sum over sorted pairs i < j of (x_i - x_j)
        let mut total_acc = KahanSum::default();
        for (j, &x) in sorted.iter().enumerate() {
            total_acc.add(prefix[j] - j as f64 * x);
        }
        let total = total_acc.value();

        let mut exclusion = vec![0.0; n];
        let mut denom = vec![0.0; n];
        let mut ratio = vec![0.0; n];
        let mut ratio_max = 0.0f64;
        for (i, &x) in sorted.iter().enumerate() {
            let above = prefix[i] - i as f64 * x;
            let below = (n - 1 - i) as f64 * x - (prefix[n] - prefix[i + 1]);
            let excl = above + below;
            let v = perm[i] as usize;
            let d = total - excl;
            exclusion[v] = excl;
            denom[v] = d;
            ratio[v] = total / d;
            ratio_max = ratio_max.max(ratio[v]);
        }

        Ok(PercolationStates {
            raw,
            sorted,
            perm,
            total,
            exclusion,
            denom,
            ratio,
            ratio_max,
        })
    }

    pub fn node_count(&self) -> usize {
        self.raw.len()
    }

    /// State of a node, by dense id.
    pub fn state(&self, v: u32) -> f64 {
        self.raw[v as usize]
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// States in non-increasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Sorted position -> dense id.
    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    /// Total pair weight `C`.
    pub fn pair_weight_sum(&self) -> f64 {
        self.total
    }

    /// `sum_u |x_v - x_u|`, the mass removed when excluding `v`.
    pub fn exclusion(&self, v: u32) -> f64 {
        self.exclusion[v as usize]
    }

    /// Node-excluded denominator `D_v`.
    pub fn denominator(&self, v: u32) -> f64 {
        self.denom[v as usize]
    }

    /// Likelihood ratio `d_v = C / D_v`; always `>= 1`.
    pub fn likelihood_ratio(&self, v: u32) -> f64 {
        self.ratio[v as usize]
    }

    pub fn likelihood_ratios(&self) -> &[f64] {
        &self.ratio
    }

    /// Maximum likelihood ratio over all nodes.
    pub fn max_likelihood_ratio(&self) -> f64 {
        self.ratio_max
    }

    /// Node-free pair weight `R(x_s - x_t) / C`; sums to 1 over ordered
    /// pairs.
    pub fn kappa_tilde(&self, s: u32, t: u32) -> f64 {
        ramp(self.raw[s as usize] - self.raw[t as usize]) / self.total
    }

    /// Pair weight excluding `v`: `R(x_s - x_t) / D_v`. Requires
    /// `s != v != t`.
    pub fn kappa(&self, s: u32, t: u32, v: u32) -> f64 {
        debug_assert!(s != v && t != v);
        ramp(self.raw[s as usize] - self.raw[t as usize]) / self.denom[v as usize]
    }

    /// Minimum over nodes of the state spread among the remaining nodes.
    pub fn delta(&self) -> Result<f64> {
        let n = self.node_count();
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "state spread requires at least 3 nodes, got {n}"
            )));
        }
        let y = &self.sorted;
        let drop_top = y[1] - y[n - 1];
        let drop_bottom = y[0] - y[n - 2];
        let drop_middle = y[0] - y[n - 1];
        Ok(drop_top.min(drop_bottom).min(drop_middle))
    }
}
