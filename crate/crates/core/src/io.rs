//! Serde adapters writing rationals as "p/q" strings, plus comma-separated point parsing.

use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, parse_rational, Rational};

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

pub mod rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&fmt_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| parse_rational(&s).map_err(D::Error::custom)).transpose()
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(D::Error::custom)).collect()
    }
}

pub mod rational_mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let m = Vec::<Vec<String>>::deserialize(d)?;
        m.iter().map(|r| r.iter().map(|s| parse_rational(s).map_err(D::Error::custom)).collect()).collect()
    }
}

/// Parse "1/2,-3,0.25" into rationals.
pub fn parse_point(s: &str) -> Result<Vec<Rational>> {
    if s.trim().is_empty() {
        return Err(Error::Input("empty point".into()));
    }
    s.split(',').map(|c| parse_rational(c.trim())).collect()
}

pub fn format_point(p: &[Rational]) -> String {
    p.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use serde::Serialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct S {
        #[serde(with = "rational")]
        a: Rational,
        #[serde(with = "rational_vec")]
        v: Vec<Rational>,
        #[serde(with = "rational_mat")]
        m: Vec<Vec<Rational>>,
    }

    #[test]
    fn round_trip() {
        let s = S { a: rat(-3, 4), v: vec![int(2), rat(1, 3)], m: vec![vec![rat(5, 7)]] };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"a":"-3/4","v":["2","1/3"],"m":[["5/7"]]}"#);
        assert_eq!(serde_json::from_str::<S>(&j).unwrap(), s);
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1/2, -3,0.25").unwrap(), vec![rat(1, 2), int(-3), rat(1, 4)]);
        assert!(parse_point("").is_err());
        assert_eq!(format_point(&[rat(1, 2), int(0)]), "1/2,0");
    }
}
