//! JSON serialization with 17-significant-digit reals.
//!
//! World and model files carry floating-point payloads that must round-trip
//! exactly; 17 significant digits are sufficient to reconstruct any `f64`.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

struct SigDigits17;

impl Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        // 1 leading digit + 16 fractional digits = 17 significant digits.
        write!(writer, "{value:.16e}")
    }
}

/// Serializes `value` to a JSON string, formatting every `f64` with 17
/// significant digits.
pub fn to_string_17<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json output is UTF-8"))
}
