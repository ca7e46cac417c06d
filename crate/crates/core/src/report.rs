//! δ-sweep reports and their CSV forms.

use std::fmt::Write as _;

/// `p_k = log(e_{k-1}/e_k) / log(δ_{k-1}/δ_k)`; `None` for the first row or
/// when either error is not positive.
pub fn empirical_orders(deltas: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for k in 1..errors.len() {
        let (e0, e1) = (errors[k - 1], errors[k]);
        if e0 > 0.0 && e1 > 0.0 {
            out[k] = Some((e0 / e1).ln() / (deltas[k - 1] / deltas[k]).ln());
        }
    }
    out
}

/// `true` if every value is strictly below its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub error: f64,
    pub empirical_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn from_errors(deltas: &[f64], errors: &[f64]) -> Self {
        let orders = empirical_orders(deltas, errors);
        let rows = deltas
            .iter()
            .zip(errors)
            .zip(orders)
            .map(|((&delta, &error), empirical_order)| ConvergenceRow {
                delta,
                error,
                empirical_order,
            })
            .collect();
        ConvergenceReport { rows }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        strictly_decreasing(&self.errors())
    }

    /// Smallest reported order, if any row has one.
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.empirical_order).reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,error,empirical_order\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:e},{}", r.delta, r.error, opt(r.empirical_order));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub delta: f64,
    pub lambda_delta: f64,
    pub abs_gap: f64,
    pub empirical_order: Option<f64>,
    /// principal-eigenvalue criterion for the nonlocal map
    pub pev_criterion: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub lambda_r: f64,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.abs_gap).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,lambda_delta,lambda_r,abs_gap,pev_criterion\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{}",
                r.delta,
                r.lambda_delta,
                self.lambda_r,
                r.abs_gap,
                u8::from(r.pev_criterion)
            );
        }
        s
    }
}

/// Convergence record of one periodic-orbit computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitDiagnostics {
    pub super_periods: usize,
    pub sub_periods: usize,
    /// largest nodal increase between successive iterates from above
    pub super_increase: f64,
    /// largest nodal decrease between successive iterates from below
    pub sub_decrease: f64,
    /// sup distance between the two limits
    pub start_agreement: f64,
    pub periodicity_residual: f64,
}

impl OrbitDiagnostics {
    /// Iterates from above nonincreasing and from below nondecreasing,
    /// up to `slack`.
    pub fn sandwich_holds(&self, slack: f64) -> bool {
        self.super_increase <= slack && self.sub_decrease <= slack
    }

    pub fn starts_agree(&self, tol: f64) -> bool {
        self.start_agreement <= 10.0 * tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    pub delta: f64,
    /// `None` when (H2)_δ fails and no positive orbit exists
    pub sup_gap: Option<f64>,
    pub h2_lambda: f64,
    pub h2_ok: bool,
    pub diagnostics: Option<OrbitDiagnostics>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    pub h2_lambda_local: f64,
    pub local: OrbitDiagnostics,
    pub rows: Vec<OrbitRow>,
}

impl OrbitReport {
    /// Gaps of the rows that produced an orbit.
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.sup_gap).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,sup_gap,h2_delta_lambda,h2_delta_ok\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:e},{}",
                r.delta,
                opt(r.sup_gap),
                r.h2_lambda,
                u8::from(r.h2_ok)
            );
        }
        s
    }
}
