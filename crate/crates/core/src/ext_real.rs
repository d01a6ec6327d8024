//! Serde helpers for extended reals.
//!
//! Confidence-sequence bounds are extended reals: `-inf` and `+inf` are
//! ordinary, meaningful values (no data yet, or a one-sided interval), and
//! JSON has no literal for them. Non-finite values are serialized as the
//! strings `"inf"`, `"-inf"` and `"nan"`; finite values stay numbers.

use serde::de::{self, Deserializer, Unexpected};
use serde::ser::Serializer;
use serde::Deserialize;

#[derive(serde::Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Word(String),
}

fn to_repr(x: f64) -> Repr {
    if x.is_finite() {
        Repr::Num(x)
    } else if x.is_nan() {
        Repr::Word("nan".to_owned())
    } else if x > 0.0 {
        Repr::Word("inf".to_owned())
    } else {
        Repr::Word("-inf".to_owned())
    }
}

fn from_repr<'de, D: Deserializer<'de>>(repr: Repr) -> Result<f64, D::Error> {
    match repr {
        Repr::Num(x) => Ok(x),
        Repr::Word(w) => match w.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(de::Error::invalid_value(
                Unexpected::Str(other),
                &"a number or one of \"inf\", \"-inf\", \"nan\"",
            )),
        },
    }
}

pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&to_repr(*x), ser)
}

pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    from_repr::<D>(Repr::deserialize(de)?)
}

/// Same encoding for `Vec<f64>` fields.
pub mod vec {
    use super::{from_repr, to_repr, Repr};
    use serde::de::Deserializer;
    use serde::ser::Serializer;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(xs: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = xs.iter().map(|&x| to_repr(x)).collect();
        serde::Serialize::serialize(&reprs, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        let reprs = Vec::<Repr>::deserialize(de)?;
        reprs.into_iter().map(|r| from_repr::<D>(r)).collect()
    }
}
