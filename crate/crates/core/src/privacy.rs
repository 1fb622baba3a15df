//! Privacy budgets, conversions between them and a per-run spending ledger.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    /// `epsilon`-differential privacy.
    Pure,
    /// `rho`-zero-concentrated differential privacy.
    Zcdp,
}

/// A privacy budget: `epsilon` for pure DP, `rho` for zCDP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub kind: BudgetKind,
    pub value: f64,
}

impl PrivacyBudget {
    pub fn new(kind: BudgetKind, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(format!("privacy budget must be positive and finite, got {value}")));
        }
        Ok(Self { kind, value })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(BudgetKind::Pure, epsilon)
    }

    pub fn zcdp(rho: f64) -> Result<Self> {
        Self::new(BudgetKind::Zcdp, rho)
    }

    /// Same kind, value multiplied by `f`.
    pub fn fraction(&self, f: f64) -> Self {
        Self { kind: self.kind, value: self.value * f }
    }

    /// Equivalent zCDP parameter.
    pub fn as_rho(&self) -> f64 {
        match self.kind {
            BudgetKind::Zcdp => self.value,
            BudgetKind::Pure => self.value * self.value / 2.0,
        }
    }
}

/// An `epsilon`-DP mechanism is `epsilon^2 / 2`-zCDP.
pub fn pure_to_zcdp(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(epsilon * epsilon / 2.0)
}

/// `rho`-zCDP implies `(rho + 2 sqrt(rho ln(1/delta)), delta)`-DP.
pub fn zcdp_to_approx(rho: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be finite and non-negative, got {rho}")));
    }
    Ok(rho + 2.0 * (rho * (1.0 / delta).ln()).sqrt())
}

/// Sequential composition: budgets of one kind add up.
pub fn compose(budgets: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    let first = budgets.first().ok_or_else(|| invalid("nothing to compose"))?;
    if budgets.iter().any(|b| b.kind != first.kind) {
        return Err(Error::MixedBudgetKinds);
    }
    Ok(PrivacyBudget { kind: first.kind, value: budgets.iter().map(|b| b.value).sum() })
}

/// Standard deviation of Gaussian noise giving `rho`-zCDP for an
/// L2-sensitivity `delta`: `delta / sqrt(2 rho)`.
pub fn gaussian_scale(sensitivity: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid("rho must be positive"));
    }
    Ok(sensitivity / (2.0 * rho).sqrt())
}

/// Scale of Laplace noise giving `epsilon`-DP for an L1-sensitivity `delta`.
pub fn laplace_scale(sensitivity: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    Ok(sensitivity / epsilon)
}

/// Records how a total budget is split between the steps of a mechanism and
/// checks that the parts add back up exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub total: PrivacyBudget,
    pub entries: Vec<(String, PrivacyBudget)>,
}

impl BudgetLedger {
    pub fn new(total: PrivacyBudget) -> Self {
        Self { total, entries: Vec::new() }
    }

    /// Records a step spending `fraction` of the total and returns its budget.
    pub fn spend(&mut self, label: &str, fraction: f64) -> PrivacyBudget {
        let b = self.total.fraction(fraction);
        self.entries.push((label.to_string(), b));
        b
    }

    pub fn spent(&self) -> Result<PrivacyBudget> {
        compose(&self.entries.iter().map(|(_, b)| *b).collect::<Vec<_>>())
    }

    /// Errors unless the recorded steps sum to exactly the total.
    pub fn check(&self) -> Result<PrivacyBudget> {
        let spent = self.spent()?;
        if spent.kind != self.total.kind {
            return Err(Error::MixedBudgetKinds);
        }
        if spent.value != self.total.value {
            return Err(Error::LedgerMismatch { spent: spent.value, requested: self.total.value });
        }
        Ok(spent)
    }
}
