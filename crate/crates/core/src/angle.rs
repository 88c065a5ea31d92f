//! Angles written as numbers or as multiples of pi ("pi/2", "-3pi/4", "0.5*pi").

use std::f64::consts::PI;

use serde::de::{self, Deserializer, Visitor};

pub fn parse(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    if let Ok(v) = s.parse::<f64>() {
        return finite(v, text);
    }
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return Err(format!("cannot read angle {text:?}"));
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("cannot read angle {text:?}"))?,
    };
    let denom = match tail {
        "" => 1.0,
        t => match t.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| format!("cannot read angle {text:?}"))?,
            None => return Err(format!("cannot read angle {text:?}")),
        },
    };
    if denom == 0.0 {
        return Err(format!("zero denominator in {text:?}"));
    }
    finite(coef * PI / denom, text)
}

fn finite(v: f64, text: &str) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {text:?} is not finite"))
    }
}

struct AngleVisitor;

impl Visitor<'_> for AngleVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("an angle in radians or a string such as \"pi/2\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        finite(v, &v.to_string()).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse(v).map_err(E::custom)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(AngleVisitor)
}
