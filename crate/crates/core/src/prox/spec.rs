use serde::{Deserialize, Serialize};

use super::{Dgf, Domain, ProximalSetup};
use crate::error::Error;

/// File representation of a proximal setup.
///
/// ```json
/// {"kind": "simplex", "dim": 10}
/// {"kind": "ball", "dim": 5, "radius": 1.0}
/// {"kind": "box", "dim": 2, "bounds": [[-1, 1], [0, 2]]}
/// {"kind": "product", "x": {...}, "y": {...}, "beta_x": 1.0, "beta_y": 1.0}
/// ```
/// `dgf` defaults to `entropy` on the simplex and `euclidean` elsewhere.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetupSpec {
    Simplex {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dgf: Option<Dgf>,
    },
    Ball {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dgf: Option<Dgf>,
    },
    Box {
        dim: usize,
        bounds: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dgf: Option<Dgf>,
    },
    Product {
        x: std::boxed::Box<SetupSpec>,
        y: std::boxed::Box<SetupSpec>,
        beta_x: f64,
        beta_y: f64,
    },
}

impl TryFrom<SetupSpec> for ProximalSetup {
    type Error = Error;

    fn try_from(s: SetupSpec) -> Result<Self, Error> {
        match s {
            SetupSpec::Simplex { dim, dgf } => {
                ProximalSetup::new(Domain::Simplex { dim }, dgf.unwrap_or(Dgf::Entropy))
            }
            SetupSpec::Ball { dim, radius, center, dgf } => {
                let center = center.unwrap_or_else(|| vec![0.0; dim]);
                if center.len() != dim {
                    return Err(Error::Config(format!("ball center has {} entries, dim is {dim}", center.len())));
                }
                ProximalSetup::new(Domain::Ball { center, radius }, dgf.unwrap_or(Dgf::Euclidean))
            }
            SetupSpec::Box { dim, bounds, dgf } => {
                if bounds.len() != dim {
                    return Err(Error::Config(format!("box has {} bounds, dim is {dim}", bounds.len())));
                }
                let lower = bounds.iter().map(|b| b[0]).collect();
                let upper = bounds.iter().map(|b| b[1]).collect();
                ProximalSetup::new(Domain::Box { lower, upper }, dgf.unwrap_or(Dgf::Euclidean))
            }
            SetupSpec::Product { x, y, beta_x, beta_y } => {
                ProximalSetup::product((*x).try_into()?, (*y).try_into()?, beta_x, beta_y)
            }
        }
    }
}

impl From<&ProximalSetup> for SetupSpec {
    fn from(s: &ProximalSetup) -> Self {
        match s {
            ProximalSetup::Basic { domain, dgf } => match domain {
                Domain::Simplex { dim } => SetupSpec::Simplex { dim: *dim, dgf: Some(*dgf) },
                Domain::Ball { center, radius } => SetupSpec::Ball {
                    dim: center.len(),
                    radius: *radius,
                    center: center.iter().any(|c| *c != 0.0).then(|| center.clone()),
                    dgf: Some(*dgf),
                },
                Domain::Box { lower, upper } => SetupSpec::Box {
                    dim: lower.len(),
                    bounds: lower.iter().zip(upper).map(|(l, u)| [*l, *u]).collect(),
                    dgf: Some(*dgf),
                },
            },
            ProximalSetup::Product { x, y, beta_x, beta_y } => SetupSpec::Product {
                x: std::boxed::Box::new(x.as_ref().into()),
                y: std::boxed::Box::new(y.as_ref().into()),
                beta_x: *beta_x,
                beta_y: *beta_y,
            },
        }
    }
}

impl Serialize for ProximalSetup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SetupSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProximalSetup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let spec = SetupSpec::deserialize(d)?;
        ProximalSetup::try_from(spec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let texts = [
            r#"{"kind":"simplex","dim":4}"#,
            r#"{"kind":"ball","dim":3,"radius":2.0}"#,
            r#"{"kind":"box","dim":2,"bounds":[[-1,1],[0,2]]}"#,
            r#"{"kind":"product","x":{"kind":"ball","dim":2,"radius":1},"y":{"kind":"simplex","dim":3},"beta_x":0.5,"beta_y":2}"#,
        ];
        for t in texts {
            let s: ProximalSetup = serde_json::from_str(t).unwrap();
            let back: ProximalSetup = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        for t in [
            r#"{"kind":"ball","dim":3,"radius":-1}"#,
            r#"{"kind":"box","dim":3,"bounds":[[0,1]]}"#,
            r#"{"kind":"ball","dim":2,"radius":1,"dgf":"entropy"}"#,
            r#"{"kind":"simplex","dim":2,"radus":1}"#,
            r#"{"kind":"torus","dim":2}"#,
        ] {
            assert!(serde_json::from_str::<ProximalSetup>(t).is_err(), "{t}");
        }
    }
}
