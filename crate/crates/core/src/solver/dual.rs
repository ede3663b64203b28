//! Cell prices from the dual of the covering relaxation.
//!
//! With prices `pi` satisfying `sum(pi[c] for c in p) + mu * w(p) <= cost(p)`
//! for every placement `p`, any set of placements covering the open
//! required cells costs at least the sum of their prices, which turns the
//! relaxation's optimum into a bound that stays valid at every node.

use std::time::Duration;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

/// Dual prices in cost units: one per cell, plus the price of the
/// truncation row.
#[derive(Clone, Debug)]
pub struct DualPrices {
    pub cell: Vec<f64>,
    pub trunc: f64,
}

impl DualPrices {
    pub fn zero(n: usize) -> Self {
        DualPrices {
            cell: vec![0.0; n],
            trunc: 0.0,
        }
    }
}

/// `cells[p]` and `cost[p]` describe the placements; `opt_weight[p]` is the
/// weight of the optional cells in `p`, and `need` the optional weight that
/// must be covered overall (zero without truncation).
pub fn dual_prices(
    n: usize,
    cells: &[Vec<u32>],
    cost: &[u32],
    optional: &[bool],
    opt_weight: &[f64],
    need: f64,
    time_limit: Duration,
) -> Option<DualPrices> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let pi: Vec<_> = (0..n)
        .map(|c| {
            let hi = if optional[c] { 0.0 } else { f64::INFINITY };
            lp.add_var(1.0, (f64::NEG_INFINITY, hi))
        })
        .collect();
    let mu = (need > 0.0).then(|| lp.add_var(need, (0.0, f64::INFINITY)));
    for (p, cs) in cells.iter().enumerate() {
        let mut row: Vec<(microlp::Variable, f64)> = cs.iter().map(|&c| (pi[c as usize], 1.0)).collect();
        if let Some(mu) = mu {
            if opt_weight[p] > 0.0 {
                row.push((mu, opt_weight[p]));
            }
        }
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, cost[p] as f64);
    }
    lp.set_time_limit(time_limit);
    let sol = lp.solve().ok()?.into_solution().ok()?;
    let mut prices = DualPrices {
        cell: pi.iter().map(|&v| sol.var_value(v)).collect(),
        trunc: mu.map_or(0.0, |m| sol.var_value(m).max(0.0)),
    };
    if prices.cell.iter().any(|v| !v.is_finite()) || !prices.trunc.is_finite() {
        return None;
    }
    // restore exact feasibility lost to floating-point round-off
    let worst = cells
        .iter()
        .enumerate()
        .map(|(p, cs)| {
            let lhs: f64 = cs.iter().map(|&c| prices.cell[c as usize]).sum::<f64>() + prices.trunc * opt_weight[p];
            lhs - cost[p] as f64
        })
        .fold(0.0f64, f64::max);
    if worst > 0.0 {
        let shift = worst * (1.0 + 1e-9) + 1e-9;
        prices.cell.iter_mut().for_each(|v| *v -= shift);
    }
    Some(prices)
}
