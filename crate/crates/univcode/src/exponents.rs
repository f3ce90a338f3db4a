//! Lower bounds on decoding-error exponents, in nats per channel use.
//!
//! Each bound is a minimum of terms of two shapes: `max_{0<=s<=1} s (I_{1-s} - offset)`
//! for an information quantity `I`, and plain slack terms. Reports keep every term
//! so callers can see which one binds.

use serde::Serialize;

use crate::channels::{BCDPair, CQChannel, MACChannel};
use crate::error::{Error, Result};
use crate::infomeasure::{bcd_ensemble, mac_ensemble, BcdTerm, CondEnsemble, MacTerm, MarkovTriple};
use crate::optim::maximize_unit_interval;

/// Rates and slack parameters, all in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateSpec {
    pub rate_a: f64,
    pub rate_b: f64,
    pub slack_a: f64,
    pub slack_b: f64,
}

impl RateSpec {
    pub fn new(rate_a: f64, rate_b: f64, slack_a: f64, slack_b: f64) -> Result<Self> {
        let all = [rate_a, rate_b, slack_a, slack_b];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("rates and slacks must be finite and nonnegative".into()));
        }
        Ok(RateSpec { rate_a, rate_b, slack_a, slack_b })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentTerm {
    pub name: String,
    pub value: f64,
    /// Maximizing `s` for terms of the form `max_s s(I_{1-s} - offset)`.
    pub s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub value: f64,
    pub maximizing_s: f64,
    pub term_breakdown: Vec<ExponentTerm>,
}

impl ExponentReport {
    fn from_terms(terms: Vec<ExponentTerm>) -> Self {
        let binding = terms
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one term");
        let maximizing_s = binding
            .s
            .or_else(|| {
                terms
                    .iter()
                    .filter(|t| t.s.is_some())
                    .min_by(|a, b| a.value.total_cmp(&b.value))
                    .and_then(|t| t.s)
            })
            .unwrap_or(0.0);
        let value = binding.value.max(0.0);
        ExponentReport { value, maximizing_s, term_breakdown: terms }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.term_breakdown.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// `max_{0<=s<=1} s (I_{1-s} - offset)`, returned with its maximizer.
pub fn max_over_s(info: impl Fn(f64) -> f64, offset: f64) -> (f64, f64) {
    maximize_unit_interval(|s| if s == 0.0 { 0.0 } else { s * (info(1.0 - s) - offset) })
}

fn s_term(name: &str, ens: &CondEnsemble, offset: f64, weight: f64) -> ExponentTerm {
    let (s, v) = max_over_s(|alpha| ens.renyi(alpha), offset);
    ExponentTerm { name: name.to_string(), value: weight * v, s: Some(s) }
}

fn slack_term(name: &str, value: f64) -> ExponentTerm {
    ExponentTerm { name: name.to_string(), value, s: None }
}

/// `max_{0<=s<=1} s (I_{1-s} - rate) / (1 + s)`, the optimal slack for a
/// `min(max_s s(I_{1-s} - rate - r), r)` pair; both slack and value are that number.
pub fn exp_opt_over_slack(info: impl Fn(f64) -> f64, rate: f64) -> (f64, f64) {
    let (_, v) = maximize_unit_interval(|s| if s == 0.0 { 0.0 } else { s * (info(1.0 - s) - rate) / (1.0 + s) });
    let v = v.max(0.0);
    (v, v)
}

fn require_bcd_shape(p_ux: &MarkovTriple, w: &CQChannel) -> Result<()> {
    if p_ux.b_size() != 1 {
        return Err(Error::InvalidParameter("broadcast input law must have a one-letter B".into()));
    }
    if p_ux.a_size() != w.input_size() {
        return Err(Error::DimensionMismatch { expected: w.input_size(), got: p_ux.a_size() });
    }
    Ok(())
}

/// Receiver-Y exponent of the superposition code.
pub fn exp_bcd_y(pair: &BCDPair, p_ux: &MarkovTriple, spec: &RateSpec) -> Result<ExponentReport> {
    require_bcd_shape(p_ux, &pair.w_y)?;
    let u = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::U)?;
    let xu = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::XGivenU)?;
    Ok(ExponentReport::from_terms(vec![
        s_term("I(U;Y)", &u, spec.rate_a + spec.slack_a, 1.0),
        slack_term("r_A", spec.slack_a),
        s_term("I(X;Y|U)", &xu, spec.rate_b + spec.slack_b, 1.0),
        slack_term("r_B", spec.slack_b),
    ]))
}

/// Receiver-Z exponent (common message only).
pub fn exp_bcd_z(pair: &BCDPair, p_ux: &MarkovTriple, spec: &RateSpec) -> Result<ExponentReport> {
    require_bcd_shape(p_ux, &pair.w_z)?;
    let u = bcd_ensemble(p_ux, &pair.w_z, BcdTerm::U)?;
    Ok(ExponentReport::from_terms(vec![
        s_term("I(U;Z)", &u, spec.rate_a + spec.slack_a, 1.0),
        slack_term("r_A", spec.slack_a),
    ]))
}

/// Receiver-Y exponent of the alternative decoder that tests `(u, x)` jointly
/// against the universal state.
pub fn exp_superposition_alt(pair: &BCDPair, p_ux: &MarkovTriple, spec: &RateSpec) -> Result<ExponentReport> {
    require_bcd_shape(p_ux, &pair.w_y)?;
    let x = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::X)?;
    let xu = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::XGivenU)?;
    let total = spec.rate_a + spec.rate_b + spec.slack_a + spec.slack_b;
    Ok(ExponentReport::from_terms(vec![
        s_term("I(X;Y)", &x, total, 1.0),
        slack_term("r_A+r_B", spec.slack_a + spec.slack_b),
        s_term("I(X;Y|U)", &xu, spec.rate_b + spec.slack_b, 1.0),
        slack_term("r_B", spec.slack_b),
    ]))
}

/// Slacks maximizing [`exp_superposition_alt`]: `r_A + r_B` and `r_B` each take the
/// value of their own `(1+s)`-normalized maximization; `r_A` is clipped at zero.
pub fn opt_slacks_superposition_alt(pair: &BCDPair, p_ux: &MarkovTriple, rate_a: f64, rate_b: f64) -> Result<RateSpec> {
    require_bcd_shape(p_ux, &pair.w_y)?;
    let x = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::X)?;
    let xu = bcd_ensemble(p_ux, &pair.w_y, BcdTerm::XGivenU)?;
    let (sum, _) = exp_opt_over_slack(|a| x.renyi(a), rate_a + rate_b);
    let (rb, _) = exp_opt_over_slack(|a| xu.renyi(a), rate_b);
    RateSpec::new(rate_a, rate_b, (sum - rb).max(0.0), rb)
}

/// Joint (successive corner-point) MAC decoder exponent.
pub fn exp_mac_joint(mac: &MACChannel, triple: &MarkovTriple, spec: &RateSpec) -> Result<ExponentReport> {
    let a = mac_ensemble(triple, mac, MacTerm::AGivenT)?;
    let b = mac_ensemble(triple, mac, MacTerm::BGivenAT)?;
    Ok(ExponentReport::from_terms(vec![
        s_term("I(A;Y|T)", &a, spec.rate_a + spec.slack_a, 1.0),
        slack_term("r_A", spec.slack_a),
        s_term("I(B;Y|AT)", &b, spec.rate_b + spec.slack_b, 1.0),
        slack_term("r_B", spec.slack_b),
    ]))
}

fn separate_terms(mac: &MACChannel, triple: &MarkovTriple, spec: &RateSpec, weight: f64, for_b: bool) -> Result<Vec<ExponentTerm>> {
    let (term, rate, slack, name, slack_name) = if for_b {
        (MacTerm::BGivenAT, spec.rate_b, spec.slack_b, "I(B;Y|AT)", "r_B")
    } else {
        (MacTerm::AGivenBT, spec.rate_a, spec.slack_a, "I(A;Y|BT)", "r_A")
    };
    let own = mac_ensemble(triple, mac, term)?;
    let sum = mac_ensemble(triple, mac, MacTerm::ABGivenT)?;
    let total = spec.rate_a + spec.rate_b + spec.slack_a + spec.slack_b;
    let scaled = |n: &str| if weight == 1.0 { n.to_string() } else { format!("1/2*{n}") };
    Ok(vec![
        ExponentTerm { name: scaled(name), ..s_term(name, &own, rate + slack, weight) },
        slack_term(&scaled(slack_name), weight * slack),
        ExponentTerm { name: scaled("I(AB;Y|T)"), ..s_term("I(AB;Y|T)", &sum, total, weight) },
        slack_term(&scaled("r_A+r_B"), weight * (spec.slack_a + spec.slack_b)),
    ])
}

/// Exponents of the separate A- and B-decoders, `(report_a, report_b)`.
pub fn exp_mac_separate(mac: &MACChannel, triple: &MarkovTriple, spec: &RateSpec) -> Result<(ExponentReport, ExponentReport)> {
    let a = separate_terms(mac, triple, spec, 1.0, false)?;
    let b = separate_terms(mac, triple, spec, 1.0, true)?;
    Ok((ExponentReport::from_terms(a), ExponentReport::from_terms(b)))
}

/// Joint exponent obtained from the separate decoders through the gentle-operator
/// conversion: the four A-terms and half of each B-term.
pub fn exp_mac_joint_general(mac: &MACChannel, triple: &MarkovTriple, spec: &RateSpec) -> Result<ExponentReport> {
    let mut terms = separate_terms(mac, triple, spec, 1.0, false)?;
    terms.extend(separate_terms(mac, triple, spec, 0.5, true)?);
    Ok(ExponentReport::from_terms(terms))
}
