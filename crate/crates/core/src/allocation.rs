//! NOMA decoding order and power-allocation coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one tolerance on allocation coefficients.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Fair,
    Equal,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Fair => "fair",
            Scheme::Equal => "equal",
        }
    }
}

/// Which reading of the fair-allocation formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationForm {
    /// `a_k = h_(K-k+1) / sum_i h_i`.
    #[default]
    Normalized,
    /// `a_k = h_(K-k+1) / sum_{i=k+1..K} h_(i)`, then rescaled to sum to one.
    PaperLiteral,
}

impl AllocationForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationForm::Normalized => "normalized",
            AllocationForm::PaperLiteral => "paper_literal",
        }
    }
}

/// Channel gains of the users sharing one access point, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGains {
    entries: Vec<(UserId, f64)>,
}

impl UserGains {
    pub fn new(entries: Vec<(UserId, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("at least one user gain is required".into()));
        }
        for (i, (id, h)) in entries.iter().enumerate() {
            if !(h.is_finite() && *h >= 0.0) {
                return Err(Error::Domain(format!("gain of user `{id}` must be finite and >= 0, got {h}")));
            }
            if entries[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::Domain(format!("user `{id}` appears twice")));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(UserId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gain(&self, id: &UserId) -> Option<f64> {
        self.entries.iter().find(|(u, _)| u == id).map(|(_, h)| *h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    coefficients: Vec<(UserId, f64)>,
    scheme: Scheme,
    /// Sum of the raw coefficients before rescaling, when rescaling happened.
    renormalized_from: Option<f64>,
}

impl PowerAllocation {
    pub fn coefficients(&self) -> &[(UserId, f64)] {
        &self.coefficients
    }

    pub fn coefficient(&self, id: &UserId) -> Option<f64> {
        self.coefficients.iter().find(|(u, _)| u == id).map(|(_, a)| *a)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn renormalized_from(&self) -> Option<f64> {
        self.renormalized_from
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().map(|(_, a)| a).sum()
    }
}

/// Indices into `gains` sorted weakest first, ties by ascending user id.
fn ascending_indices(gains: &UserGains) -> Vec<usize> {
    let e = gains.entries();
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&i, &j| e[i].1.total_cmp(&e[j].1).then_with(|| e[i].0.cmp(&e[j].0)));
    idx
}

/// SIC decoding order: weakest channel first.
pub fn sic_order(gains: &UserGains) -> Vec<UserId> {
    ascending_indices(gains)
        .into_iter()
        .map(|i| gains.entries()[i].0.clone())
        .collect()
}

/// Gain-reversed allocation: the k-th weakest user gets a share proportional
/// to the k-th strongest gain.
pub fn fair_allocation(gains: &UserGains, form: AllocationForm) -> Result<PowerAllocation> {
    let e = gains.entries();
    if e.iter().all(|(_, h)| *h == 0.0) {
        return Err(Error::AllZeroGains);
    }
    let order = ascending_indices(gains);
    let sorted: Vec<f64> = order.iter().map(|&i| e[i].1).collect();
    let k_users = sorted.len();

    let mut raw = vec![0.0; k_users];
    let mut renormalized_from = None;
    match form {
        AllocationForm::Normalized => {
            let total: f64 = sorted.iter().sum();
            for (rank, &i) in order.iter().enumerate() {
                raw[i] = sorted[k_users - 1 - rank] / total;
            }
        }
        AllocationForm::PaperLiteral => {
            // The printed index range is empty for the strongest user; it is
            // widened to include that user's own gain.
            for (rank, &i) in order.iter().enumerate() {
                let from = (rank + 1).min(k_users - 1);
                let denom: f64 = sorted[from..].iter().sum();
                raw[i] = sorted[k_users - 1 - rank] / denom;
            }
            let total: f64 = raw.iter().sum();
            for a in raw.iter_mut() {
                *a /= total;
            }
            renormalized_from = Some(total);
        }
    }

    Ok(PowerAllocation {
        coefficients: e.iter().map(|(id, _)| id.clone()).zip(raw).collect(),
        scheme: Scheme::Fair,
        renormalized_from,
    })
}

pub fn equal_allocation(gains: &UserGains) -> PowerAllocation {
    let share = 1.0 / gains.len() as f64;
    PowerAllocation {
        coefficients: gains.entries().iter().map(|(id, _)| (id.clone(), share)).collect(),
        scheme: Scheme::Equal,
        renormalized_from: None,
    }
}

pub fn allocate(gains: &UserGains, scheme: Scheme, form: AllocationForm) -> Result<PowerAllocation> {
    match scheme {
        Scheme::Fair => fair_allocation(gains, form),
        Scheme::Equal => Ok(equal_allocation(gains)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gains(v: &[(&str, f64)]) -> UserGains {
        UserGains::new(v.iter().map(|(id, h)| (UserId::from(*id), *h)).collect()).unwrap()
    }

    fn ids(v: &[&str]) -> Vec<UserId> {
        v.iter().map(|s| UserId::from(*s)).collect()
    }

    #[test]
    fn sic_order_examples() {
        assert_eq!(sic_order(&gains(&[("u1", 1.9e-6), ("u2", 2.4e-5)])), ids(&["u1", "u2"]));
        assert_eq!(sic_order(&gains(&[("u2", 1e-6), ("u1", 1e-6)])), ids(&["u1", "u2"]));
        assert_eq!(
            sic_order(&gains(&[("u3", 5e-6), ("u1", 1e-6), ("u2", 3e-6)])),
            ids(&["u1", "u2", "u3"])
        );
    }

    #[test]
    fn fair_two_users() {
        let a = fair_allocation(&gains(&[("u1", 1e-6), ("u2", 2e-6)]), AllocationForm::Normalized).unwrap();
        assert!((a.coefficient(&"u1".into()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.coefficient(&"u2".into()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.renormalized_from(), None);
    }

    #[test]
    fn fair_equal_gains_and_single_user() {
        let a = fair_allocation(&gains(&[("u1", 3e-6), ("u2", 3e-6)]), AllocationForm::Normalized).unwrap();
        assert_eq!(a.coefficients(), &[(UserId::from("u1"), 0.5), (UserId::from("u2"), 0.5)]);
        let a = fair_allocation(&gains(&[("u1", 3e-6)]), AllocationForm::Normalized).unwrap();
        assert_eq!(a.coefficients(), &[(UserId::from("u1"), 1.0)]);
    }

    #[test]
    fn fair_rejects_all_zero() {
        let err = fair_allocation(&gains(&[("u1", 0.0), ("u2", 0.0)]), AllocationForm::Normalized).unwrap_err();
        assert!(matches!(err, Error::AllZeroGains));
    }

    #[test]
    fn equal_examples() {
        for k in [1usize, 2, 4] {
            let v: Vec<(UserId, f64)> = (0..k).map(|i| (UserId(format!("u{i}")), 1e-6 * (i + 1) as f64)).collect();
            let a = equal_allocation(&UserGains::new(v).unwrap());
            assert!(a.coefficients().iter().all(|(_, c)| *c == 1.0 / k as f64));
        }
    }

    #[test]
    fn paper_literal_two_users_matches_normalized() {
        let g = gains(&[("u1", 1e-6), ("u2", 2e-6)]);
        let lit = fair_allocation(&g, AllocationForm::PaperLiteral).unwrap();
        // raw: weakest h2/h2 = 1, strongest h1/h2 = 0.5
        assert_eq!(lit.renormalized_from(), Some(1.5));
        assert!((lit.coefficient(&"u1".into()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((lit.sum() - 1.0).abs() < SUM_TOLERANCE);
    }

    #[test]
    fn paper_literal_three_users() {
        let g = gains(&[("a", 1.0), ("b", 2.0), ("c", 4.0)]);
        let lit = fair_allocation(&g, AllocationForm::PaperLiteral).unwrap();
        // raw: a = 4/(2+4), b = 2/4, c = 1/4
        let raw = [4.0 / 6.0, 0.5, 0.25];
        let total: f64 = raw.iter().sum();
        for (id, r) in ["a", "b", "c"].iter().zip(raw) {
            assert!((lit.coefficient(&(*id).into()).unwrap() - r / total).abs() < 1e-15);
        }
    }

    #[test]
    fn user_gains_validation() {
        assert!(UserGains::new(vec![]).is_err());
        assert!(UserGains::new(vec![("u".into(), -1.0)]).is_err());
        assert!(UserGains::new(vec![("u".into(), 1.0), ("u".into(), 2.0)]).is_err());
    }

    fn gain_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-9..1e-3f64, 1..=8)
    }

    fn to_gains(v: &[f64]) -> UserGains {
        UserGains::new(v.iter().enumerate().map(|(i, h)| (UserId(format!("u{i}")), *h)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn coefficients_sum_to_one(v in gain_vec()) {
            let g = to_gains(&v);
            for form in [AllocationForm::Normalized, AllocationForm::PaperLiteral] {
                let a = fair_allocation(&g, form).unwrap();
                prop_assert!((a.sum() - 1.0).abs() <= SUM_TOLERANCE);
                prop_assert!(a.coefficients().iter().all(|(_, c)| (0.0..=1.0).contains(c)));
            }
            prop_assert!((equal_allocation(&g).sum() - 1.0).abs() <= SUM_TOLERANCE);
        }

        #[test]
        fn fair_is_antitone(v in gain_vec()) {
            let g = to_gains(&v);
            let a = fair_allocation(&g, AllocationForm::Normalized).unwrap();
            let c = a.coefficients();
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] < v[j] {
                        prop_assert!(c[i].1 >= c[j].1);
                    }
                }
            }
        }

        #[test]
        fn fair_is_scale_invariant(v in gain_vec(), k in 1e-3..1e3f64) {
            let a = fair_allocation(&to_gains(&v), AllocationForm::Normalized).unwrap();
            let scaled: Vec<f64> = v.iter().map(|h| h * k).collect();
            let b = fair_allocation(&to_gains(&scaled), AllocationForm::Normalized).unwrap();
            for ((_, x), (_, y)) in a.coefficients().iter().zip(b.coefficients()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.max(*y));
            }
        }

        #[test]
        fn permutation_equivariance(v in prop::collection::vec(1e-9..1e-3f64, 2..=6), rot in 0usize..6) {
            let g = to_gains(&v);
            let mut rotated = g.entries().to_vec();
            let r = rot % rotated.len();
            rotated.rotate_left(r);
            let a = fair_allocation(&g, AllocationForm::Normalized).unwrap();
            let b = fair_allocation(&UserGains::new(rotated).unwrap(), AllocationForm::Normalized).unwrap();
            for (id, x) in a.coefficients() {
                prop_assert_eq!(Some(*x), b.coefficient(id));
            }
        }
    }
}
