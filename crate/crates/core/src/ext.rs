//! Extended-real helpers.
//!
//! Metric bounds may be infinite (an unbounded-above metric has upper bound
//! `+inf`). They are stored as plain `f64` with IEEE infinities, which already
//! order correctly against finite values; NaN is rejected wherever a bound or
//! threshold is accepted. With the `serde` feature, infinities serialize as the
//! strings `"inf"` / `"-inf"` since JSON has no literal for them.

/// True when `v` is a legal extended real (anything but NaN).
#[inline]
pub fn is_extended_real(v: f64) -> bool {
    !v.is_nan()
}

/// Parses the textual sentinels accepted in files: `inf`, `+inf`, `-inf`,
/// `infinity` variants (case-insensitive).
pub fn parse_sentinel(s: &str) -> Option<f64> {
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    if body.eq_ignore_ascii_case("inf") || body.eq_ignore_ascii_case("infinity") {
        Some(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
    } else {
        None
    }
}

#[cfg(feature = "serde")]
pub mod serde_ext {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn serialize_pair<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        struct Ext(f64);
        impl serde::Serialize for Ext {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize(&self.0, s)
            }
        }
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Ext(v.0))?;
        t.serialize_element(&Ext(v.1))?;
        t.end()
    }

    pub fn serialize_pairs<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        struct Pair((f64, f64));
        impl serde::Serialize for Pair {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_pair(&self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for p in v {
            seq.serialize_element(&Pair(*p))?;
        }
        seq.end()
    }
}
