use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Shortest representation that parses back to the same `f64`.
///
/// Plain decimal in the usual range, scientific notation outside it; `-0`
/// prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() && (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV table built row by row.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(c.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn nums(&mut self, xs: &[f64]) {
        self.row(xs.iter().map(|&x| num(x)));
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Write `text` to `path`, or to stdout.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialise");
    let _ = writeln!(s);
    s
}
