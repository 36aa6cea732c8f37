use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{AmpcError, Result};
use crate::numerics::{Complex64, ComplexMatrix};

/// One evaluation S(ω_i) of a share polynomial, held by client `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Share {
    secret_id: String,
    eval_index: usize,
    degree: usize,
    n_points: usize,
    value: ComplexMatrix,
}

/// Wire form shared by the JSON and binary encodings: values are
/// interleaved `(re, im)` pairs in row-major order.
#[derive(Serialize, Deserialize)]
struct ShareRecord {
    secret_id: String,
    eval_index: usize,
    #[serde(rename = "T")]
    degree: usize,
    #[serde(rename = "N")]
    n_points: usize,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Share {
    pub fn new(secret_id: impl Into<String>, eval_index: usize, degree: usize, n_points: usize, value: ComplexMatrix) -> Self {
        Self { secret_id: secret_id.into(), eval_index, degree, n_points, value }
    }

    pub fn secret_id(&self) -> &str {
        &self.secret_id
    }

    pub fn eval_index(&self) -> usize {
        self.eval_index
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn value(&self) -> &ComplexMatrix {
        &self.value
    }

    pub fn into_value(self) -> ComplexMatrix {
        self.value
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }

    /// Same evaluation point and parameters, new value and id.
    pub fn with_value(&self, secret_id: impl Into<String>, value: ComplexMatrix) -> Self {
        Self { secret_id: secret_id.into(), eval_index: self.eval_index, degree: self.degree, n_points: self.n_points, value }
    }

    /// Compact little-endian record:
    /// `u32 id_len, id bytes, u32 eval_index, u32 T, u32 N, u32 rows, u32 cols, (f64 re, f64 im)*`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let id = self.secret_id.as_bytes();
        let mut out = Vec::with_capacity(24 + id.len() + 16 * self.value.data().len());
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        for v in [self.eval_index, self.degree, self.n_points, self.value.rows(), self.value.cols()] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for z in self.value.data() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(|| AmpcError::invalid("share record truncated"))?;
            pos += n;
            Ok(s)
        };
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes")) as usize;
        let id_len = u32_at(take(4)?);
        let secret_id = String::from_utf8(take(id_len)?.to_vec())
            .map_err(|_| AmpcError::invalid("share record id is not utf-8"))?;
        let mut hdr = [0usize; 5];
        for h in &mut hdr {
            *h = u32_at(take(4)?);
        }
        let [eval_index, degree, n_points, rows, cols] = hdr;
        let count = rows.checked_mul(cols).ok_or_else(|| AmpcError::invalid("share record too large"))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let re = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
            data.push(Complex64::new(re, im));
        }
        if pos != bytes.len() {
            return Err(AmpcError::invalid("trailing bytes after share record"));
        }
        Ok(Self { secret_id, eval_index, degree, n_points, value: ComplexMatrix::new(rows, cols, data)? })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShareRecord {
            secret_id: self.secret_id.clone(),
            eval_index: self.eval_index,
            degree: self.degree,
            n_points: self.n_points,
            rows: self.value.rows(),
            cols: self.value.cols(),
            values: self.value.data().iter().flat_map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Share {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ShareRecord::deserialize(d)?;
        if r.values.len() % 2 != 0 {
            return Err(serde::de::Error::custom("odd number of interleaved values"));
        }
        let data = r.values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let value = ComplexMatrix::new(r.rows, r.cols, data).map_err(serde::de::Error::custom)?;
        Ok(Self { secret_id: r.secret_id, eval_index: r.eval_index, degree: r.degree, n_points: r.n_points, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn share_from(vals: Vec<(f64, f64)>, rows: usize) -> Share {
        let cols = vals.len() / rows;
        let data = vals.into_iter().take(rows * cols).map(|(a, b)| Complex64::new(a, b)).collect();
        Share::new("client-2/X", 3, 2, 5, ComplexMatrix::new(rows, cols, data).unwrap())
    }

    proptest! {
        #[test]
        fn binary_and_json_round_trip_bit_exact(
            vals in prop::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300), 1..24),
            rows in 1usize..4,
        ) {
            prop_assume!(vals.len() >= rows);
            let s = share_from(vals, rows);
            let b = Share::from_bytes(&s.to_bytes()).unwrap();
            let j = Share::from_json(&s.to_json().unwrap()).unwrap();
            for other in [&b, &j] {
                prop_assert_eq!(other.secret_id(), s.secret_id());
                for (x, y) in other.value().data().iter().zip(s.value().data()) {
                    prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                    prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn json_field_names() {
        let s = share_from(vec![(1.0, -2.0)], 1);
        let v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        for k in ["secret_id", "eval_index", "T", "N", "rows", "cols", "values"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["values"], serde_json::json!([1.0, -2.0]));
    }

    #[test]
    fn truncated_binary_rejected() {
        let s = share_from(vec![(1.0, 2.0), (3.0, 4.0)], 1);
        let b = s.to_bytes();
        assert!(Share::from_bytes(&b[..b.len() - 1]).is_err());
    }
}
