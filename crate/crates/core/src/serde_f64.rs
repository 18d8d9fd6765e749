//! Serialize `f64` with infinities and NaN as strings (`"inf"`, `"-inf"`, `"nan"`),
//! since JSON has no representation for them.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!(
                "invalid number '{other}'"
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct W {
        #[serde(with = "super")]
        x: f64,
    }

    #[test]
    fn round_trip() {
        for x in [1.5, f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&W { x }).unwrap();
            assert_eq!(serde_json::from_str::<W>(&s).unwrap(), W { x });
        }
        assert_eq!(
            serde_json::to_string(&W { x: f64::INFINITY }).unwrap(),
            r#"{"x":"inf"}"#
        );
    }
}
