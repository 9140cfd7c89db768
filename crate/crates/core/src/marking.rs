//! Bulk (Dörfler) marking and the two adaptive marking strategies.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::estimate::EstimatorBreakdown;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkingStrategy {
    /// Bulk marking on edge jumps plus supplementary volume marking.
    CarstensenHoppe,
    /// Switches between edge and volume marking on the ratio of the totals.
    BeckerMaoShi,
}

impl MarkingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            Self::CarstensenHoppe => "ch",
            Self::BeckerMaoShi => "bms",
        }
    }
}

impl fmt::Display for MarkingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarkingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ch" => Ok(Self::CarstensenHoppe),
            "bms" => Ok(Self::BeckerMaoShi),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown marking strategy `{other}` (expected ch or bms)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkingConfig {
    pub strategy: MarkingStrategy,
    pub theta_ch: f64,
    pub theta_bms: f64,
    pub sigma: f64,
    pub gamma_switch: f64,
    pub sigma_osc: f64,
}

impl Default for MarkingConfig {
    fn default() -> Self {
        Self {
            strategy: MarkingStrategy::CarstensenHoppe,
            theta_ch: 0.5,
            theta_bms: 0.5,
            sigma: 0.3,
            gamma_switch: 1.0,
            sigma_osc: 0.3,
        }
    }
}

impl MarkingConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = [
            ("theta_ch", self.theta_ch),
            ("theta_bms", self.theta_bms),
            ("sigma", self.sigma),
            ("sigma_osc", self.sigma_osc),
        ];
        for (name, v) in open_unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        if !(self.gamma_switch > 0.0 && self.gamma_switch.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "gamma_switch = {} must be positive and finite",
                self.gamma_switch
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkBranch {
    Jump,
    Volume,
}

impl MarkBranch {
    pub fn name(self) -> &'static str {
        match self {
            Self::Jump => "jump",
            Self::Volume => "volume",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkResult {
    pub marked_edges: Vec<usize>,
    pub marked_triangles: Vec<usize>,
    /// Set by the switching strategy only.
    pub branch: Option<MarkBranch>,
}

impl MarkResult {
    pub fn is_empty(&self) -> bool {
        self.marked_edges.is_empty() && self.marked_triangles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Selected indices in the order they were taken (descending value).
    pub indices: Vec<usize>,
    /// All indicators were zero while a positive fraction was requested.
    pub all_zero: bool,
}

/// Greedy bulk selection: the fewest indices whose values sum to at least
/// `fraction` of the total. Values are taken largest first, ties by lower
/// index. Zero entries are never selected.
pub fn dorfler_select(indicators: &[f64], fraction: f64) -> Selection {
    let total = math::ordered_sum(indicators.iter().copied());
    if total <= 0.0 {
        return Selection {
            indices: Vec::new(),
            all_zero: fraction > 0.0,
        };
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let threshold = fraction * total;
    let mut indices = Vec::new();
    let mut acc = 0.0;
    for i in order {
        if acc >= threshold || indicators[i] <= 0.0 {
            break;
        }
        acc += indicators[i];
        indices.push(i);
    }
    Selection {
        indices,
        all_zero: false,
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

pub fn mark_ch(est: &EstimatorBreakdown, cfg: &MarkingConfig) -> MarkResult {
    MarkResult {
        marked_edges: sorted(dorfler_select(&est.per_edge_jump, cfg.theta_ch).indices),
        marked_triangles: sorted(dorfler_select(&est.per_element_volume, cfg.sigma_osc).indices),
        branch: None,
    }
}

pub fn mark_bms(est: &EstimatorBreakdown, cfg: &MarkingConfig) -> MarkResult {
    if est.volume_total <= cfg.gamma_switch * est.jump_total {
        MarkResult {
            marked_edges: sorted(dorfler_select(&est.per_edge_jump, cfg.theta_bms).indices),
            marked_triangles: Vec::new(),
            branch: Some(MarkBranch::Jump),
        }
    } else {
        MarkResult {
            marked_edges: Vec::new(),
            marked_triangles: sorted(dorfler_select(&est.per_element_volume, cfg.sigma).indices),
            branch: Some(MarkBranch::Volume),
        }
    }
}

pub fn mark(est: &EstimatorBreakdown, cfg: &MarkingConfig) -> MarkResult {
    match cfg.strategy {
        MarkingStrategy::CarstensenHoppe => mark_ch(est, cfg),
        MarkingStrategy::BeckerMaoShi => mark_bms(est, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn breakdown(jump: Vec<f64>, volume: Vec<f64>) -> EstimatorBreakdown {
        let jump_total = jump.iter().sum();
        let volume_total = volume.iter().sum();
        EstimatorBreakdown {
            per_edge_jump: jump,
            per_element_volume: volume,
            jump_total,
            volume_total,
            eta_sq_total: jump_total + volume_total,
        }
    }

    /// Smallest subset size reaching the threshold, by enumeration.
    fn brute_force_min(values: &[f64], fraction: f64) -> usize {
        let total: f64 = values.iter().sum();
        let n = values.len();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << n) {
            let sum: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum();
            if sum >= fraction * total {
                best = best.min(mask.count_ones() as usize);
            }
        }
        best
    }

    #[test]
    fn bulk_examples() {
        let v = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(dorfler_select(&v, 0.5).indices, vec![0, 1]);
        assert_eq!(dorfler_select(&v, 0.39).indices, vec![0]);
        assert_eq!(dorfler_select(&v, 1.0).indices, vec![0, 1, 2, 3]);
        let w = [0.0, 2.0, 0.0, 1.0];
        assert_eq!(dorfler_select(&w, 1.0).indices, vec![1, 3]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        assert_eq!(dorfler_select(&[1.0, 2.0, 2.0, 2.0], 0.5).indices, vec![1, 2]);
    }

    #[test]
    fn all_zero_is_flagged() {
        let s = dorfler_select(&[0.0, 0.0], 0.5);
        assert!(s.indices.is_empty());
        assert!(s.all_zero);
        assert!(!dorfler_select(&[], 0.0).all_zero);
    }

    #[test]
    fn ch_marks_volume_when_jumps_vanish() {
        let est = breakdown(vec![0.0; 5], vec![1.0, 2.0]);
        let r = mark_ch(&est, &MarkingConfig::default());
        assert!(r.marked_edges.is_empty());
        assert_eq!(r.marked_triangles, vec![1]);
        assert_eq!(r.branch, None);
    }

    #[test]
    fn ch_single_positive_jump() {
        for theta in [0.01, 0.5, 0.99] {
            let cfg = MarkingConfig {
                theta_ch: theta,
                ..MarkingConfig::default()
            };
            let r = mark_ch(&breakdown(vec![0.0, 0.0, 3.0, 0.0], vec![0.0]), &cfg);
            assert_eq!(r.marked_edges, vec![2]);
        }
    }

    #[test]
    fn bms_switch() {
        let cfg = |g| MarkingConfig {
            strategy: MarkingStrategy::BeckerMaoShi,
            gamma_switch: g,
            ..MarkingConfig::default()
        };
        let zero_f = breakdown(vec![1.0, 0.5], vec![0.0, 0.0]);
        assert_eq!(mark_bms(&zero_f, &cfg(1e-6)).branch, Some(MarkBranch::Jump));
        let no_jump = breakdown(vec![0.0, 0.0], vec![1.0, 0.5]);
        let r = mark_bms(&no_jump, &cfg(1e6));
        assert_eq!(r.branch, Some(MarkBranch::Volume));
        assert!(r.marked_edges.is_empty());
        assert_eq!(r.marked_triangles, vec![0]);
        let mixed = breakdown(vec![1.0], vec![2.0]);
        assert_eq!(mark(&mixed, &cfg(1.0)).branch, Some(MarkBranch::Volume));
        assert_eq!(mark(&mixed, &cfg(3.0)).branch, Some(MarkBranch::Jump));
    }

    #[test]
    fn config_validation() {
        assert!(MarkingConfig::default().validate().is_ok());
        let bad = MarkingConfig {
            theta_ch: 1.0,
            ..MarkingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MarkingConfig {
            gamma_switch: 0.0,
            ..MarkingConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("BMS".parse::<MarkingStrategy>().unwrap(), MarkingStrategy::BeckerMaoShi);
        assert!("max".parse::<MarkingStrategy>().is_err());
    }

    proptest! {
        #[test]
        fn greedy_is_minimal(
            values in proptest::collection::vec(0.0f64..10.0, 1..=12),
            fraction in 0.01f64..=1.0,
        ) {
            prop_assume!(values.iter().any(|&v| v > 0.0));
            let sel = dorfler_select(&values, fraction);
            let total: f64 = values.iter().sum();
            let sum: f64 = sel.indices.iter().map(|&i| values[i]).sum();
            prop_assert!(sum >= fraction * total * (1.0 - 1e-12));
            prop_assert_eq!(sel.indices.len(), brute_force_min(&values, fraction));
        }
    }
}
