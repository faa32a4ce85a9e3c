use super::coalition::Coalition;
use super::simplex::{LinearProgram, Relation};
use super::tu::TuGame;
use crate::error::{Error, Result};

/// Phase-one slack below which the core counts as nonempty.
pub const CORE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreStatus {
    NonEmpty,
    Empty,
}

/// Balanced family of proper coalitions whose weighted value exceeds `v(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedFamily {
    pub weights: Vec<(Coalition, f64)>,
    /// `sum_S w_S v(S) - v(K)`, positive for an empty core.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreResult {
    pub status: CoreStatus,
    pub witness: Option<Vec<f64>>,
    pub certificate: Option<BalancedFamily>,
    /// Optimal total artificial slack of the phase-one program.
    pub infeasibility: f64,
}

impl CoreResult {
    pub fn is_empty(&self) -> bool {
        self.status == CoreStatus::Empty
    }
}

/// Decides core nonemptiness of a TU game by phase-one feasibility of
/// `x(S) >= v(S)` for proper `S`, `x(K) = v(K)`, `x >= 0`.
pub fn core_feasible(g: &TuGame) -> Result<CoreResult> {
    let k = g.k();
    let vk = g.grand_value();
    if vk < 0.0 {
        return Err(Error::DegenerateGame(vk));
    }
    let full = g.grand();
    let mut lp = LinearProgram::new(k);
    let row = |s: Coalition| (0..k).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect();
    for s in Coalition::all_nonempty(k).filter(|&s| s != full) {
        lp.add(row(s), Relation::Ge, g.value(s));
    }
    lp.add(row(full), Relation::Eq, vk);
    let p1 = lp.phase_one()?;
    if p1.infeasibility <= CORE_TOL {
        return Ok(CoreResult {
            status: CoreStatus::NonEmpty,
            witness: Some(p1.x),
            certificate: None,
            infeasibility: p1.infeasibility,
        });
    }
    Ok(CoreResult {
        status: CoreStatus::Empty,
        witness: None,
        certificate: Some(balanced_certificate(g)?),
        infeasibility: p1.infeasibility,
    })
}

/// Solves `max sum_S y_S v(S)` over `sum_{S ∋ k} y_S <= 1`, `y >= 0`, proper `S`.
fn balanced_certificate(g: &TuGame) -> Result<BalancedFamily> {
    let k = g.k();
    let full = g.grand();
    let proper: Vec<Coalition> = Coalition::all_nonempty(k).filter(|&s| s != full).collect();
    let mut lp = LinearProgram::new(proper.len());
    for i in 0..k {
        let coeffs = proper
            .iter()
            .map(|s| if s.contains(i) { 1.0 } else { 0.0 })
            .collect();
        lp.add(coeffs, Relation::Le, 1.0);
    }
    let c: Vec<f64> = proper.iter().map(|&s| g.value(s)).collect();
    let sol = lp.maximize(&c, CORE_TOL)?;
    let weights = proper
        .iter()
        .zip(&sol.x)
        .filter(|(_, &w)| w > 1e-12)
        .map(|(&s, &w)| (s, w))
        .collect();
    Ok(BalancedFamily {
        weights,
        excess: sol.objective - g.grand_value(),
    })
}

/// Largest violation of the core constraints at payoff `x`.
pub fn core_violation(g: &TuGame, x: &[f64]) -> f64 {
    let sum = |s: Coalition| s.members().iter().map(|&i| x[i]).sum::<f64>();
    let full = g.grand();
    let mut worst = (sum(full) - g.grand_value()).abs();
    for s in Coalition::all_nonempty(g.k()).filter(|&s| s != full) {
        worst = worst.max(g.value(s) - sum(s));
    }
    worst.max(x.iter().fold(0.0, |a: f64, &v| a.max(-v)))
}
