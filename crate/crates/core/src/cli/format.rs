use serde_json::Value;

/// `x` with 9 significant digits, trailing zeros trimmed. Plain notation
/// for moderate magnitudes, scientific otherwise.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:.8e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to 9 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            sig9(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Number(n), Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with floats rounded to 9 significant digits.
pub fn to_json<T: serde::Serialize>(v: &T) -> crate::Result<String> {
    Ok(serde_json::to_string_pretty(&round_json(serde_json::to_value(v)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(3.0), "3");
        assert_eq!(sig9(0.123456789123), "0.123456789");
        assert_eq!(sig9(-1234.56789012), "-1234.56789");
        assert_eq!(sig9(1e-5), "0.00001");
        assert_eq!(sig9(1.23456789e-7), "1.23456789e-7");
        assert_eq!(sig9(2.5e20), "2.5e20");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let v = serde_json::json!({"a": 0.1234567891234, "n": 3, "l": [1.0, 2.00000000049]});
        assert_eq!(round_json(v).to_string(), r#"{"a":0.123456789,"l":[1.0,2.0],"n":3}"#);
    }
}
