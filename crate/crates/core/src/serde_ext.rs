//! Serde helpers for floats that may be non-finite.
//!
//! JSON has no literal for infinities, so fields that can legitimately be
//! `+inf` (entropies under domination failure) are encoded as the strings
//! `"inf"`, `"-inf"`, `"nan"`; finite values stay plain numbers. Every
//! emitted report re-parses into its originating type.

use serde::de::{self, Deserializer, Unexpected};
use serde::ser::Serializer;
use serde::Deserialize;

fn encode<S: Serializer>(x: f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

fn decode<E: de::Error>(v: NumOrStr) -> Result<f64, E> {
    match v {
        NumOrStr::Num(x) => Ok(x),
        NumOrStr::Str(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::invalid_value(
                Unexpected::Str(other),
                &"a number or one of \"inf\", \"-inf\", \"nan\"",
            )),
        },
    }
}

pub mod maybe_inf {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*x, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(NumOrStr::deserialize(d)?)
    }
}

pub mod maybe_inf_pairs {
    use super::*;
    use serde::ser::SerializeSeq;

    #[derive(serde::Serialize)]
    struct Pair<'a>(f64, #[serde(with = "super::maybe_inf")] &'a f64);

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, x) in v {
            seq.serialize_element(&Pair(*a, x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        let raw: Vec<(f64, NumOrStr)> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|(a, v)| Ok((a, decode(v)?)))
            .collect()
    }
}
