//! The on-disk set format (`f2nset v1`).
//!
//! A set file is a single header line followed by the body:
//!
//! ```text
//! f2nset v1 n=<n> count=<|A|> format=<hex|bitmap> [gen=<spec>]
//! ```
//!
//! * `hex` bodies list one element per line as minimal-width lowercase
//!   hex, ascending;
//! * `bitmap` bodies hold the standard-base64 encoding of the dense
//!   `2^n`-bit indicator, little-endian bit order (element `x` lives in
//!   bit `x & 7` of byte `x >> 3`).
//!
//! The optional `gen=` token echoes the [`crate::instances::GeneratorSpec`]
//! that produced the file; parsers ignore tokens they do not know.
//! Round trips are bit-exact, and the `count` field must match the body.

use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use sha2::{Digest, Sha256};

use crate::set::SetF2;
use crate::{Error, Result, MAX_N};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BodyFormat {
    Hex,
    Bitmap,
}

impl fmt::Display for BodyFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BodyFormat::Hex => "hex",
            BodyFormat::Bitmap => "bitmap",
        })
    }
}

impl FromStr for BodyFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hex" => Ok(BodyFormat::Hex),
            "bitmap" => Ok(BodyFormat::Bitmap),
            other => Err(Error::Parse(format!("unknown body format {other:?}"))),
        }
    }
}

/// A parsed set file: the set plus the header metadata.
#[derive(Clone, Debug)]
pub struct SetFile {
    pub set: SetF2,
    pub format: BodyFormat,
    /// Generator echo from the header, when present.
    pub gen: Option<String>,
}

impl SetFile {
    pub fn new(set: SetF2, format: BodyFormat) -> Self {
        SetFile { set, format, gen: None }
    }

    pub fn with_gen(set: SetF2, format: BodyFormat, gen: String) -> Self {
        SetFile { set, format, gen: Some(gen) }
    }

    /// Canonical text rendering (header, then body, trailing newline).
    pub fn to_text(&self) -> String {
        let n = self.set.n();
        let mut out = format!(
            "f2nset v1 n={n} count={} format={}",
            self.set.count(),
            self.format
        );
        if let Some(g) = &self.gen {
            debug_assert!(!g.contains(char::is_whitespace));
            out.push_str(" gen=");
            out.push_str(g);
        }
        out.push('\n');
        match self.format {
            BodyFormat::Hex => {
                for x in self.set.iter() {
                    out.push_str(&format!("{x:x}\n"));
                }
            }
            BodyFormat::Bitmap => {
                let nn = 1usize << n;
                let mut bytes = vec![0u8; nn.div_ceil(8)];
                for x in self.set.iter() {
                    bytes[(x >> 3) as usize] |= 1 << (x & 7);
                }
                out.push_str(&B64.encode(&bytes));
                out.push('\n');
            }
        }
        out
    }

    /// Parse a set file, validating the header against the body.
    pub fn parse(text: &str) -> Result<SetFile> {
        let (header, body) = match text.split_once('\n') {
            Some(pair) => pair,
            None => (text, ""),
        };
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("f2nset") || tokens.next() != Some("v1") {
            return Err(Error::Parse("header must start with \"f2nset v1\"".into()));
        }
        let (mut n, mut count, mut format, mut gen) = (None, None, None, None);
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed header token {tok:?}")))?;
            match key {
                "n" => {
                    n = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("bad n: {e}")))?,
                    )
                }
                "count" => {
                    count = Some(
                        value
                            .parse::<u64>()
                            .map_err(|e| Error::Parse(format!("bad count: {e}")))?,
                    )
                }
                "format" => format = Some(value.parse::<BodyFormat>()?),
                "gen" => gen = Some(value.to_string()),
                // ignore unknown tokens for forward compatibility
                _ => {}
            }
        }
        let n = n.ok_or_else(|| Error::Parse("header missing n=".into()))?;
        let count = count.ok_or_else(|| Error::Parse("header missing count=".into()))?;
        let format = format.ok_or_else(|| Error::Parse("header missing format=".into()))?;
        if n == 0 || n > MAX_N {
            return Err(Error::Parse(format!("n must lie in 1..={MAX_N}, got {n}")));
        }

        let mut set = SetF2::empty(n)?;
        match format {
            BodyFormat::Hex => {
                for line in body.lines() {
                    let line = line.trim();
                    if line.is_empty() {
                        continue;
                    }
                    let x = u32::from_str_radix(line, 16)
                        .map_err(|e| Error::Parse(format!("bad hex element {line:?}: {e}")))?;
                    if x >> n != 0 {
                        return Err(Error::Parse(format!("element {x:#x} out of range for n={n}")));
                    }
                    if set.contains_bits(x) {
                        return Err(Error::Parse(format!("duplicate element {x:#x}")));
                    }
                    set.insert_bits(x);
                }
            }
            BodyFormat::Bitmap => {
                let b64: String = body.split_whitespace().collect();
                let bytes = B64
                    .decode(b64.as_bytes())
                    .map_err(|e| Error::Parse(format!("bad base64 body: {e}")))?;
                let nn = 1usize << n;
                if bytes.len() != nn.div_ceil(8) {
                    return Err(Error::Parse(format!(
                        "bitmap body holds {} bytes, expected {}",
                        bytes.len(),
                        nn.div_ceil(8)
                    )));
                }
                for (i, &b) in bytes.iter().enumerate() {
                    for bit in 0..8 {
                        if b >> bit & 1 == 1 {
                            let x = (i * 8 + bit) as u32;
                            if x as usize >= nn {
                                return Err(Error::Parse(format!(
                                    "bitmap sets bit {x} beyond 2^{n}"
                                )));
                            }
                            set.insert_bits(x);
                        }
                    }
                }
            }
        }
        if set.count() != count {
            return Err(Error::Parse(format!(
                "header claims count={count} but body holds {}",
                set.count()
            )));
        }
        Ok(SetFile { set, format, gen })
    }
}

/// Hex SHA-256 of the body bytes (everything after the header line).
/// Reports key their `input_digest` on this, so it is format-sensitive
/// but header-insensitive.
pub fn body_digest(text: &str) -> String {
    let body = match text.split_once('\n') {
        Some((_, body)) => body,
        None => "",
    };
    let mut hasher = Sha256::new();
    hasher.update(body.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
