use std::fmt;
use std::str::FromStr;

use super::radial::{padic_profile, sphere_profile, two_point_homogeneous_profile, RadialProfile, SphereMetric};
use crate::error::{Error, Result};

/// Stored atoms of p-adic profiles built from selectors; the geometric tail
/// covers the rest exactly.
pub const SELECTOR_PADIC_TAIL_TOL: f64 = 1e-12;

/// Built-in radial spaces by name:
/// `sphere:n=<int>:metric=<chordal|geodesic>:normalized=<bool>`,
/// `padic:p=<prime>`, `twopoint`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    Sphere { n: u32, metric: SphereMetric, normalized: bool },
    Padic { p: u64 },
    TwoPoint,
}

impl Selector {
    pub fn profile(&self) -> Result<RadialProfile> {
        match *self {
            Selector::Sphere { n, metric, normalized } => sphere_profile(n, metric, normalized),
            Selector::Padic { p } => padic_profile(p, 0, SELECTOR_PADIC_TAIL_TOL),
            Selector::TwoPoint => Ok(two_point_homogeneous_profile()),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Sphere { n, metric, normalized } => {
                write!(f, "sphere:n={n}:metric={metric}:normalized={normalized}")
            }
            Selector::Padic { p } => write!(f, "padic:p={p}"),
            Selector::TwoPoint => f.write_str("twopoint"),
        }
    }
}

fn bad(s: &str, why: &str) -> Error {
    Error::InvalidArgument(format!("space selector `{s}`: {why}"))
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let mut fields = Vec::new();
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(s, &format!("`{part}` is not key=value")))?;
            if fields.iter().any(|(seen, _)| *seen == k) {
                return Err(bad(s, &format!("key `{k}` repeated")));
            }
            fields.push((k, v));
        }
        let take = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let known = |keys: &[&str]| -> Result<()> {
            match fields.iter().find(|(k, _)| !keys.contains(k)) {
                Some((k, _)) => Err(bad(s, &format!("unknown key `{k}`"))),
                None => Ok(()),
            }
        };
        match head {
            "sphere" => {
                known(&["n", "metric", "normalized"])?;
                let n = take("n")
                    .ok_or_else(|| bad(s, "missing n"))?
                    .parse::<u32>()
                    .map_err(|e| bad(s, &format!("n: {e}")))?;
                if n < 1 {
                    return Err(bad(s, "n must be at least 1"));
                }
                let metric = match take("metric").unwrap_or("chordal") {
                    "chordal" => SphereMetric::Chordal,
                    "geodesic" => SphereMetric::Geodesic,
                    other => return Err(bad(s, &format!("metric `{other}`"))),
                };
                let normalized = match take("normalized").unwrap_or("true") {
                    "true" => true,
                    "false" => false,
                    other => return Err(bad(s, &format!("normalized `{other}`"))),
                };
                Ok(Selector::Sphere { n, metric, normalized })
            }
            "padic" => {
                known(&["p"])?;
                let p = take("p")
                    .ok_or_else(|| bad(s, "missing p"))?
                    .parse::<u64>()
                    .map_err(|e| bad(s, &format!("p: {e}")))?;
                Ok(Selector::Padic { p })
            }
            "twopoint" => {
                known(&[])?;
                Ok(Selector::TwoPoint)
            }
            other => Err(bad(s, &format!("unknown space `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ProfileKind;

    #[test]
    fn parse_and_print_round_trip() {
        for s in [
            "sphere:n=2:metric=chordal:normalized=true",
            "sphere:n=5:metric=geodesic:normalized=false",
            "padic:p=3",
            "twopoint",
        ] {
            let sel: Selector = s.parse().unwrap();
            assert_eq!(sel.to_string(), s);
        }
    }

    #[test]
    fn defaults_and_errors() {
        let sel: Selector = "sphere:n=3".parse().unwrap();
        assert_eq!(
            sel,
            Selector::Sphere { n: 3, metric: SphereMetric::Chordal, normalized: true }
        );
        for s in ["cube", "sphere:n=0", "sphere:metric=chordal", "padic:p=x", "sphere:n=2:n=3", "twopoint:x=1"] {
            assert!(s.parse::<Selector>().is_err(), "{s}");
        }
        let p: Selector = "padic:p=6".parse().unwrap();
        assert!(matches!(p.profile(), Err(Error::NotPrime(6))));
    }

    #[test]
    fn profiles_carry_their_kind() {
        let p = "padic:p=5".parse::<Selector>().unwrap().profile().unwrap();
        assert_eq!(p.kind, ProfileKind::Padic { p: 5 });
        assert!(p.tail.unwrap().total_mass() <= SELECTOR_PADIC_TAIL_TOL);
    }
}
