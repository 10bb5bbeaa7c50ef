//! Choice of chain length and chain count from a frequency gap and two risk
//! levels, plus a simulation that checks the resulting guarantee.
//!
//! With `p1` the smallest frequency that must be found and `p2` the largest
//! that must not, `a = ln(1/η1)` and `b = ln(1/(1-η2))`:
//!
//! ```text
//! D* = ⌈max{ (ln(b+1) - ln a) / ln(1/p1),
//!            (ln 2 + ln a - ln b) / (ln(1/p2) - ln(1/p1)) }⌉
//! M* = ⌈a / ln(1 / (1 - p1^D*))⌉
//! ```
//!
//! When `a ≥ max(b+1, b/2)` the first term is not positive and only the
//! second is evaluated.

use serde::{Deserialize, Serialize};

use crate::chain::{chain_seed, generate_chains};
use crate::dataset::{ClassId, EncodedDataset};
use crate::error::{Error, Result};
use crate::pattern::{Item, Pattern};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerInputs {
    pub p1: f64,
    pub p2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl PlannerInputs {
    pub fn new(p1: f64, p2: f64, eta1: f64, eta2: f64) -> Result<Self> {
        let inputs = PlannerInputs { p1, p2, eta1, eta2 };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("eta1", self.eta1), ("eta2", self.eta2)] {
            if !open(v) {
                return Err(Error::param(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.p1 <= self.p2 {
            return Err(Error::param(format!(
                "p1 = {} must exceed p2 = {}",
                self.p1, self.p2
            )));
        }
        Ok(())
    }

    /// `ln(1/η1)`
    pub fn a(&self) -> f64 {
        (1.0 / self.eta1).ln()
    }

    /// `ln(1/(1-η2))`
    pub fn b(&self) -> f64 {
        (1.0 / (1.0 - self.eta2)).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub d_star: u32,
    pub m_star: u64,
    /// the maximum before rounding up
    pub d_unrounded: f64,
    pub single_term: bool,
}

pub fn plan_parameters(inputs: &PlannerInputs) -> Result<Plan> {
    inputs.validate()?;
    let (a, b) = (inputs.a(), inputs.b());
    let l1 = (1.0 / inputs.p1).ln();
    let l2 = (1.0 / inputs.p2).ln();
    let second = (2f64.ln() + a.ln() - b.ln()) / (l2 - l1);
    let single_term = a >= (b + 1.0).max(0.5 * b);
    let d_unrounded = if single_term {
        second
    } else {
        let first = ((b + 1.0).ln() - a.ln()) / l1;
        first.max(second)
    };
    // a chain has at least its head node
    let d_star = d_unrounded.ceil().max(1.0);
    if !d_star.is_finite() || d_star > u32::MAX as f64 {
        return Err(Error::param("planned chain length is out of range"));
    }
    let d_star = d_star as u32;
    let miss = 1.0 - inputs.p1.powi(d_star as i32);
    let m_star = (a / (1.0 / miss).ln()).ceil().max(1.0);
    if !m_star.is_finite() || m_star > u64::MAX as f64 {
        return Err(Error::param("planned chain count is out of range"));
    }
    Ok(Plan {
        d_star,
        m_star: m_star as u64,
        d_unrounded,
        single_term,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeOutcome {
    pub plan: Plan,
    pub trials: usize,
    pub hit_rate_frequent: f64,
    pub hit_rate_infrequent: f64,
}

const PLANTED_ROWS: usize = 10_000;

/// One class, two features; feature `j` takes code 1 on exactly
/// `round(p_j · n)` rows and 0 elsewhere.
pub(crate) fn planted_pair(p1: f64, p2: f64, n: usize) -> EncodedDataset {
    let k1 = (p1 * n as f64).round() as usize;
    let k2 = (p2 * n as f64).round() as usize;
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|i| vec![u32::from(i < k1), u32::from(i >= n - k2)])
        .collect();
    EncodedDataset::from_codes(vec!["frequent".into(), "infrequent".into()], &rows, &vec![0; n], vec!["c".into()])
        .expect("planted dataset is well formed")
}

/// Fraction of trials in which each planted item sits in the tail of at
/// least one of `m` chains of length `d`.
pub fn simulate_hits(p1: f64, p2: f64, d: u32, m: usize, trials: usize, seed: u64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    for p in [p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("frequency {p} is outside [0, 1]")));
        }
    }
    let ds = planted_pair(p1, p2, PLANTED_ROWS);
    let item1 = Pattern::singleton(Item::new(0, 1));
    let item2 = Pattern::singleton(Item::new(1, 1));
    let (mut h1, mut h2) = (0usize, 0usize);
    for t in 0..trials {
        let cs = generate_chains(&ds, ClassId(0), m, d, 0, chain_seed(seed, ClassId(u32::MAX), t as u64))?;
        let tails = cs.tails();
        h1 += tails.iter().any(|s| item1.is_subset(s)) as usize;
        h2 += tails.iter().any(|s| item2.is_subset(s)) as usize;
    }
    Ok((h1 as f64 / trials as f64, h2 as f64 / trials as f64))
}

/// Plans `(D*, M*)` and measures how often the planted frequent and
/// infrequent items reach a tail node.
pub fn guarantee_simulation(
    p1: f64,
    p2: f64,
    eta1: f64,
    eta2: f64,
    trials: usize,
    seed: u64,
) -> Result<GuaranteeOutcome> {
    let plan = plan_parameters(&PlannerInputs::new(p1, p2, eta1, eta2)?)?;
    let m = usize::try_from(plan.m_star).map_err(|_| Error::param("M* too large"))?;
    let (f, i) = simulate_hits(p1, p2, plan.d_star, m, trials, seed)?;
    Ok(GuaranteeOutcome {
        plan,
        trials,
        hit_rate_frequent: f,
        hit_rate_infrequent: i,
    })
}
