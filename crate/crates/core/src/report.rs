//! Check reports and seeded sample plans shared by every checker.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON has no infinities; write them (and NaN) as strings.
pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub at: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
}

impl Witness {
    pub fn new(at: &[(&str, f64)], margin: f64) -> Self {
        Witness {
            at: at.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            margin,
        }
    }
}

/// Outcome of one numeric check. `worst_margin` is the largest measured
/// excess over the asserted inequality; the check passes when it does not
/// exceed `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema: u32,
    pub check: String,
    #[serde(serialize_with = "ser_f64")]
    pub worst_margin: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    pub pass: bool,
    pub verdict: String,
    pub witnesses: Vec<Witness>,
}

impl CheckReport {
    /// Re-judge against a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.worst_margin <= tolerance;
        self.verdict = if self.pass {
            "pass".into()
        } else {
            "fail".into()
        };
        self
    }

    /// A report for a single measured quantity.
    pub fn single(check: &str, at: &[(&str, f64)], margin: f64, tolerance: f64) -> Self {
        let mut w = WorstTracker::new(1);
        w.push(at, margin);
        w.finish(check, tolerance)
    }
}

/// Keeps the `keep` largest margins seen.
#[derive(Clone, Debug)]
pub struct WorstTracker {
    keep: usize,
    items: Vec<Witness>,
    worst: f64,
}

impl WorstTracker {
    pub fn new(keep: usize) -> Self {
        WorstTracker {
            keep,
            items: Vec::new(),
            worst: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, at: &[(&str, f64)], margin: f64) {
        let m = if margin.is_nan() {
            f64::INFINITY
        } else {
            margin
        };
        if m > self.worst {
            self.worst = m;
        }
        if self.items.len() < self.keep || self.items.last().is_some_and(|w| m > w.margin) {
            self.items.push(Witness::new(at, m));
            self.items.sort_by(|a, b| b.margin.total_cmp(&a.margin));
            self.items.truncate(self.keep);
        }
    }

    pub fn merge(&mut self, other: WorstTracker) {
        for w in other.items {
            let at: Vec<(String, f64)> = w.at.into_iter().collect();
            let at: Vec<(&str, f64)> = at.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            self.push(&at, w.margin);
        }
        self.worst = self.worst.max(other.worst);
    }

    pub fn worst(&self) -> f64 {
        self.worst
    }

    pub fn finish(self, check: &str, tolerance: f64) -> CheckReport {
        let worst = if self.worst == f64::NEG_INFINITY {
            0.0
        } else {
            self.worst
        };
        let pass = worst <= tolerance;
        CheckReport {
            schema: SCHEMA_VERSION,
            check: check.to_string(),
            worst_margin: worst,
            tolerance,
            pass,
            verdict: if pass { "pass".into() } else { "fail".into() },
            witnesses: self.items,
        }
    }
}

/// Fixed-size seeded plan of `(t, x, y)` triples and momentum values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePlan {
    pub seed: u64,
    pub triples: usize,
    pub p_values: usize,
    pub p_max: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0,
            triples: 64,
            p_values: 33,
            p_max: 10.0,
        }
    }
}

impl SamplePlan {
    pub fn with_seed(seed: u64) -> Self {
        SamplePlan {
            seed,
            ..Default::default()
        }
    }

    /// `(t, x, y)` with `t` uniform in `t_range` and `x, y` uniform in
    /// `[-r, r]`.
    pub fn triples(&self, t_range: (f64, f64), r: f64) -> Vec<(f64, f64, f64)> {
        self.triples_in(t_range, (-r, r))
    }

    pub fn triples_in(&self, t_range: (f64, f64), x_range: (f64, f64)) -> Vec<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut draw = |(lo, hi): (f64, f64)| {
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        };
        (0..self.triples)
            .map(|_| (draw(t_range), draw(x_range), draw(x_range)))
            .collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        linspace(-self.p_max, self.p_max, self.p_values)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Ordered map over `items` that runs on the rayon pool when enabled.
pub fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_are_reproducible() {
        let p = SamplePlan::with_seed(5);
        assert_eq!(p.triples((0.0, 1.0), 2.0), p.triples((0.0, 1.0), 2.0));
        assert_ne!(
            p.triples((0.0, 1.0), 2.0),
            SamplePlan::with_seed(6).triples((0.0, 1.0), 2.0)
        );
        assert_eq!(p.momenta().len(), 33);
    }

    #[test]
    fn tracker_keeps_worst() {
        let mut w = WorstTracker::new(2);
        for (i, m) in [0.1, 0.5, -1.0, 0.3].into_iter().enumerate() {
            w.push(&[("i", i as f64)], m);
        }
        let r = w.finish("demo", 0.4);
        assert!(!r.pass);
        assert_eq!(r.worst_margin, 0.5);
        assert_eq!(r.witnesses.len(), 2);
        assert_eq!(r.witnesses[1].margin, 0.3);
    }

    #[test]
    fn infinities_serialize_as_strings() {
        let mut w = WorstTracker::new(1);
        w.push(&[("x", 1.0)], f64::INFINITY);
        let json = serde_json::to_string(&w.finish("c", 0.0)).unwrap();
        assert!(json.contains("\"worst_margin\":\"inf\""));
        assert!(json.contains("\"schema\":1"));
    }
}
