//! Dörfler marking with minimal cardinality and the strategy variants built
//! on it.
//!
//! Every selection sorts by descending indicator with ties broken by
//! ascending element index, so the returned set is genuinely minimal and
//! deterministic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Separate marking for `η²` and `η² + ζ²`, trimmed to equal size and united.
    A,
    /// Marking for the combined estimator `η² + ζ²`.
    B,
    /// Marking for `η(T)² ζ² + η² ζ(T)²`.
    Bet1,
    /// Marking for `η(T)² (η² + ζ²) + η² (η(T)² + ζ(T)²)`.
    Bet2,
    /// Refine every element.
    Uniform,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::A, Strategy::B, Strategy::Bet1, Strategy::Bet2, Strategy::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::A => "A",
            Strategy::B => "B",
            Strategy::Bet1 => "BET1",
            Strategy::Bet2 => "BET2",
            Strategy::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}; expected A, B, BET1, BET2 or uniform")))
    }
}

/// Elements selected for refinement, in ascending index order.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSet {
    pub elements: Vec<usize>,
    pub strategy: Strategy,
    pub theta: f64,
}

impl MarkedSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.elements.binary_search(&t).is_ok()
    }
}

pub fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {theta}")))
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        Some(i) => Err(Error::InvalidArgument(format!("indicator {i} is {} (must be finite and nonnegative)", values[i]))),
        None => Ok(()),
    }
}

/// Indices sorted by descending value, ties by ascending index.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

/// Sum in descending-value order, the order used by every marking decision.
fn ordered_sum(values: &[f64], indices: impl IntoIterator<Item = usize>) -> f64 {
    let mut picked: Vec<f64> = indices.into_iter().map(|i| values[i]).collect();
    picked.sort_by(|a, b| b.total_cmp(a));
    picked.iter().sum()
}

/// Minimal prefix of the descending order reaching `θ·Σ values`.
fn doerfler_prefix(values: &[f64], theta: f64) -> Result<Vec<usize>> {
    check_theta(theta)?;
    check_values(values)?;
    let order = descending_order(values);
    let total: f64 = order.iter().map(|&i| values[i]).sum();
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let goal = theta * total;
    let mut acc = 0.0;
    let mut taken = 0;
    for &i in &order {
        if acc >= goal {
            break;
        }
        acc += values[i];
        taken += 1;
    }
    let mut prefix = order;
    prefix.truncate(taken);
    Ok(prefix)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Smallest set `M` with `Σ_{T∈M} values(T) ≥ θ Σ_T values(T)`; empty if the
/// total vanishes.
pub fn doerfler_min(values: &[f64], theta: f64) -> Result<Vec<usize>> {
    Ok(sorted(doerfler_prefix(values, theta)?))
}

/// Whether `Σ_{T∈set} values(T) ≥ θ Σ_T values(T)`, with sums taken in the
/// same order as the marking itself.
pub fn satisfies_doerfler(values: &[f64], set: &[usize], theta: f64) -> bool {
    let total = ordered_sum(values, 0..values.len());
    let marked = ordered_sum(values, set.iter().copied());
    marked >= theta * total
}

fn check_pair(eta_sq: &[f64], zeta_sq: &[f64]) -> Result<()> {
    if eta_sq.len() != zeta_sq.len() {
        return Err(Error::LengthMismatch { expected: eta_sq.len(), actual: zeta_sq.len() });
    }
    Ok(())
}

fn combined(eta_sq: &[f64], zeta_sq: &[f64]) -> Vec<f64> {
    eta_sq.iter().zip(zeta_sq).map(|(e, z)| e + z).collect()
}

fn bet1_weights(eta_sq: &[f64], zeta_sq: &[f64]) -> Vec<f64> {
    let eta_tot: f64 = eta_sq.iter().sum();
    let zeta_tot: f64 = zeta_sq.iter().sum();
    eta_sq.iter().zip(zeta_sq).map(|(e, z)| e * zeta_tot + eta_tot * z).collect()
}

fn bet2_weights(eta_sq: &[f64], zeta_sq: &[f64]) -> Vec<f64> {
    let eta_tot: f64 = eta_sq.iter().sum();
    let both_tot: f64 = eta_tot + zeta_sq.iter().sum::<f64>();
    eta_sq.iter().zip(zeta_sq).map(|(e, z)| e * both_tot + eta_tot * (e + z)).collect()
}

pub fn strategy_a(eta_sq: &[f64], zeta_sq: &[f64], theta: f64) -> Result<MarkedSet> {
    check_pair(eta_sq, zeta_sq)?;
    let mu = doerfler_prefix(eta_sq, theta)?;
    let muz = doerfler_prefix(&combined(eta_sq, zeta_sq), theta)?;
    let m = mu.len().min(muz.len());
    let elements = sorted(mu[..m].iter().chain(&muz[..m]).copied().collect());
    Ok(MarkedSet { elements, strategy: Strategy::A, theta })
}

pub fn strategy_b(eta_sq: &[f64], zeta_sq: &[f64], theta: f64) -> Result<MarkedSet> {
    check_pair(eta_sq, zeta_sq)?;
    let elements = doerfler_min(&combined(eta_sq, zeta_sq), theta)?;
    Ok(MarkedSet { elements, strategy: Strategy::B, theta })
}

pub fn strategy_bet1(eta_sq: &[f64], zeta_sq: &[f64], theta: f64) -> Result<MarkedSet> {
    check_pair(eta_sq, zeta_sq)?;
    let elements = doerfler_min(&bet1_weights(eta_sq, zeta_sq), theta)?;
    Ok(MarkedSet { elements, strategy: Strategy::Bet1, theta })
}

pub fn strategy_bet2(eta_sq: &[f64], zeta_sq: &[f64], theta: f64) -> Result<MarkedSet> {
    check_pair(eta_sq, zeta_sq)?;
    let elements = doerfler_min(&bet2_weights(eta_sq, zeta_sq), theta)?;
    Ok(MarkedSet { elements, strategy: Strategy::Bet2, theta })
}

/// Applies `strategy` to the indicator fields. `Uniform` selects every element.
pub fn mark(strategy: Strategy, eta_sq: &[f64], zeta_sq: &[f64], theta: f64) -> Result<MarkedSet> {
    match strategy {
        Strategy::A => strategy_a(eta_sq, zeta_sq, theta),
        Strategy::B => strategy_b(eta_sq, zeta_sq, theta),
        Strategy::Bet1 => strategy_bet1(eta_sq, zeta_sq, theta),
        Strategy::Bet2 => strategy_bet2(eta_sq, zeta_sq, theta),
        Strategy::Uniform => {
            check_pair(eta_sq, zeta_sq)?;
            check_theta(theta)?;
            Ok(MarkedSet { elements: (0..eta_sq.len()).collect(), strategy, theta })
        }
    }
}

/// Checks the defining inequality of `set.strategy` for the given fields.
///
/// For strategy A the union contains one of the two untrimmed Dörfler sets,
/// so at least one of the two inequalities must hold.
pub fn verify_marking(set: &MarkedSet, eta_sq: &[f64], zeta_sq: &[f64]) -> Result<()> {
    check_pair(eta_sq, zeta_sq)?;
    if let Some(&t) = set.elements.iter().find(|&&t| t >= eta_sq.len()) {
        return Err(Error::IndexOutOfRange { index: t, len: eta_sq.len() });
    }
    if set.elements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MarkingInvariant("marked indices are not unique and sorted".into()));
    }
    let theta = set.theta;
    let ok = match set.strategy {
        Strategy::A => {
            satisfies_doerfler(eta_sq, &set.elements, theta)
                || satisfies_doerfler(&combined(eta_sq, zeta_sq), &set.elements, theta)
        }
        Strategy::B => satisfies_doerfler(&combined(eta_sq, zeta_sq), &set.elements, theta),
        Strategy::Bet1 => satisfies_doerfler(&bet1_weights(eta_sq, zeta_sq), &set.elements, theta),
        Strategy::Bet2 => satisfies_doerfler(&bet2_weights(eta_sq, zeta_sq), &set.elements, theta),
        Strategy::Uniform => set.elements.len() == eta_sq.len(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::MarkingInvariant(format!(
            "strategy {} with theta {theta} selected {} elements violating its bulk criterion",
            set.strategy,
            set.len()
        )))
    }
}
