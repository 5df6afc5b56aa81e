//! Serde helpers: big integers travel as decimal strings so JSON consumers
//! never see values a double-coercing parser would mangle.

use num::BigUint;
use serde::Serializer;

pub(crate) fn biguint_string<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}
