//! Attribute utilities and the Nash / p-mean welfare objectives.
//!
//! For a query `q` and a selection `S`, attribute `l` receives utility
//! `u_l(S) = sum of sigma(q, v) over v in S carrying l`. Welfare is the
//! `p`-th power mean of the smoothed utilities `u_l + eta`; `p = 0` is the
//! geometric mean (Nash social welfare), evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};
use crate::similarity::QueryScorer;

/// Default smoothing, the setting under which the multi-attribute guarantees hold.
pub const DEFAULT_ETA: f64 = 1.0;

/// Welfare exponent `p <= 1` (0 selects Nash) and smoothing `eta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareParams {
    p: f64,
    eta: f64,
}

impl WelfareParams {
    pub fn new(p: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::param(format!("eta must be > 0, got {eta}")));
        }
        if !(p <= 1.0 && p.is_finite()) {
            return Err(Error::param(format!("p must be a finite value <= 1, got {p}")));
        }
        Ok(Self { p, eta })
    }

    pub fn nash(eta: f64) -> Result<Self> {
        Self::new(0.0, eta)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_nash(&self) -> bool {
        self.p == 0.0
    }

    /// Per-attribute transform `F(x)` whose sum over attributes is maximized
    /// exactly when welfare is: `ln x` for Nash, `x^p` for `p > 0`, `-x^p`
    /// for `p < 0`. Marginal gains of every greedy solver are differences of it.
    pub(crate) fn transform(&self, x: f64) -> f64 {
        if self.p == 0.0 {
            x.ln()
        } else if self.p > 0.0 {
            pow(x, self.p)
        } else {
            -pow(x, self.p)
        }
    }

    /// `F(w + eta + s) - F(w + eta)` for current utility `w` and added similarity `s`.
    pub(crate) fn gain(&self, w: f64, s: f64) -> f64 {
        let base = w + self.eta;
        if self.p == 0.0 {
            (s / base).ln_1p()
        } else {
            // F(b + s) - F(b) without cancellation
            self.p.signum() * pow(base, self.p) * (self.p * (s / base).ln_1p()).exp_m1()
        }
    }
}

impl Default for WelfareParams {
    fn default() -> Self {
        Self { p: 0.0, eta: DEFAULT_ETA }
    }
}

/// `x^p` for `x > 0`, through `exp(p ln x)`.
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    (p * x.ln()).exp()
}

/// `u_l(S)` for every attribute `l`, a length-`c` array.
pub fn utilities(scorer: &QueryScorer<'_>, ids: &[usize], attrs: &AttributeTable) -> Result<Vec<f64>> {
    attrs.check_ids(ids)?;
    let mut u = vec![0.0; attrs.num_attributes()];
    for &id in ids {
        let s = scorer.score(id)?;
        for &a in attrs.of(id) {
            u[a] += s;
        }
    }
    Ok(u)
}

fn check_inputs(utilities: &[f64], eta: f64) -> Result<()> {
    if utilities.is_empty() {
        return Err(Error::Empty("welfare needs at least one attribute"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param(format!("eta must be > 0, got {eta}")));
    }
    if let Some(u) = utilities.iter().find(|u| !(**u >= 0.0 && u.is_finite())) {
        return Err(Error::param(format!("utilities must be finite and >= 0, got {u}")));
    }
    Ok(())
}

/// `log NSW = (1/c) sum ln(u_l + eta)`.
pub fn log_nsw(utilities: &[f64], eta: f64) -> Result<f64> {
    check_inputs(utilities, eta)?;
    Ok(log_nsw_unchecked(utilities, eta))
}

pub(crate) fn log_nsw_unchecked(utilities: &[f64], eta: f64) -> f64 {
    utilities.iter().map(|u| (u + eta).ln()).sum::<f64>() / utilities.len() as f64
}

/// `M_p(u_1 + eta, ..., u_c + eta)`; the geometric mean when `p = 0`.
pub fn welfare(utilities: &[f64], params: WelfareParams) -> Result<f64> {
    check_inputs(utilities, params.eta)?;
    Ok(welfare_unchecked(utilities, params))
}

pub(crate) fn welfare_unchecked(utilities: &[f64], params: WelfareParams) -> f64 {
    let eta = params.eta;
    if params.p == 0.0 {
        return log_nsw_unchecked(utilities, eta).exp();
    }
    // Factor out the extreme term so that every ratio raised to p is <= 1.
    let p = params.p;
    let shifted = utilities.iter().map(|u| u + eta);
    let pivot =
        if p > 0.0 { shifted.clone().fold(f64::MIN, f64::max) } else { shifted.clone().fold(f64::MAX, f64::min) };
    let mean = shifted.map(|x| pow(x / pivot, p)).sum::<f64>() / utilities.len() as f64;
    pivot * pow(mean, 1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::Similarity;
    use crate::vectors::VectorSet;
    use proptest::prelude::*;

    fn params(p: f64, eta: f64) -> WelfareParams {
        WelfareParams::new(p, eta).unwrap()
    }

    #[test]
    fn welfare_examples() {
        assert!((welfare(&[1.0, 1.0], params(0.0, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        // u + eta = (2, 4)
        assert!((welfare(&[1.0, 3.0], params(1.0, 1.0)).unwrap() - 3.0).abs() < 1e-12);
        assert!((welfare(&[1.0, 3.0], params(-1.0, 1.0)).unwrap() - 8.0 / 3.0).abs() < 1e-12);
        assert!((welfare(&[1.0, 3.0], params(0.0, 1.0)).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        assert!((log_nsw(&[1.0, 3.0], 1.0).unwrap() - 0.5 * 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(WelfareParams::new(0.0, 0.0).is_err());
        assert!(WelfareParams::new(1.5, 1.0).is_err());
        assert!(WelfareParams::new(f64::NEG_INFINITY, 1.0).is_err());
        assert!(welfare(&[-1.0, 2.0], params(0.0, 1.0)).is_err());
        assert!(welfare(&[], params(0.0, 1.0)).is_err());
        assert!(log_nsw(&[1.0], 0.0).is_err());
    }

    #[test]
    fn large_c_does_not_overflow() {
        let u = vec![1e6; 5000];
        let w = welfare(&u, params(0.0, 1.0)).unwrap();
        assert!((w - (1e6 + 1.0)).abs() / w < 1e-12);
        let tiny = vec![0.0; 5000];
        let w = welfare(&tiny, params(-10.0, 1e-4)).unwrap();
        assert!((w - 1e-4).abs() / 1e-4 < 1e-12);
    }

    #[test]
    fn utilities_sum_per_attribute() {
        let data = VectorSet::from_rows(&[[1.0f32, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let attrs = AttributeTable::new(3, vec![vec![0, 2], vec![1], vec![2]]).unwrap();
        let s = Similarity::DotProduct.scorer(&[2.0, 0.0], &data).unwrap();
        assert_eq!(utilities(&s, &[], &attrs).unwrap(), vec![0.0; 3]);
        assert_eq!(utilities(&s, &[0], &attrs).unwrap(), vec![2.0, 0.0, 2.0]);
        assert_eq!(utilities(&s, &[0, 1, 2], &attrs).unwrap(), vec![2.0, 0.0, 4.0]);
        assert!(utilities(&s, &[3], &attrs).is_err());
    }

    fn utility_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 1..8)
    }

    proptest! {
        #[test]
        fn power_means_are_ordered(u in utility_vec(), eta in 0.01f64..5.0,
                                   p1 in -10.0f64..1.0, p2 in -10.0f64..1.0) {
            let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            let a = welfare(&u, params(lo, eta)).unwrap();
            let b = welfare(&u, params(hi, eta)).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12));
            let min = u.iter().cloned().fold(f64::MAX, f64::min) + eta;
            let gm = welfare(&u, params(0.0, eta)).unwrap();
            let am = welfare(&u, params(1.0, eta)).unwrap();
            prop_assert!(min <= gm * (1.0 + 1e-12) && gm <= am * (1.0 + 1e-12));
        }

        #[test]
        fn welfare_strictly_increases_in_each_utility(u in utility_vec(), eta in 0.01f64..5.0,
                                                       p in -10.0f64..1.0, bump in 0.01f64..3.0,
                                                       idx in any::<prop::sample::Index>()) {
            let i = idx.index(u.len());
            let mut v = u.clone();
            v[i] += bump;
            for p in [p, 0.0] {
                prop_assert!(welfare(&v, params(p, eta)).unwrap() > welfare(&u, params(p, eta)).unwrap());
            }
        }

        #[test]
        fn p_near_zero_is_continuous(u in utility_vec(), eta in 0.01f64..5.0) {
            let g = welfare(&u, params(0.0, eta)).unwrap();
            for p in [1e-6, -1e-6] {
                let w = welfare(&u, params(p, eta)).unwrap();
                prop_assert!((w - g).abs() <= 1e-4 * g);
            }
        }
    }
}
