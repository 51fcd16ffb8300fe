//! Serialization of complex numbers as `{re, im}` records.

use num::complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

struct Record<'a>(&'a Complex64);

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &self.0.re)?;
        st.serialize_field("im", &self.0.im)?;
        st.end()
    }
}

pub fn one<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    Record(z).serialize(s)
}

pub fn many<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(zs.len()))?;
    for z in zs {
        seq.serialize_element(&Record(z))?;
    }
    seq.end()
}
