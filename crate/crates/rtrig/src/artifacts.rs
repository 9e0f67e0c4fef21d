//! Text artifact formats: the pi constant file, the sin table file, and the
//! coefficient file, plus the hex-float literal syntax they share.
//!
//! All three are line-oriented UTF-8. Binary64 values are written as C99
//! hexadecimal float literals so round-tripping is exact by construction;
//! integer words are plain hex. Parsing is strict: unknown tags, missing
//! fields, or checksum mismatches are errors, not warnings.

use crate::fpcore::exp2i;
use crate::kernels::CoeffSet;
use crate::poly::{PolyPair, EVAL_ORDER_TAG};
use crate::rangered::PiConstants;
use crate::tables::SinTable;

pub const GENERATOR_VERSION: &str = "rtrig-gen-1";

#[derive(Debug)]
pub enum ArtifactError {
    Syntax { line: usize, msg: String },
    Mismatch(String),
}

impl std::fmt::Display for ArtifactError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArtifactError::Syntax { line, msg } => write!(f, "line {line}: {msg}"),
            ArtifactError::Mismatch(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ArtifactError {}

/// C99 hex-float form of a binary64 value, shortest fraction, explicit
/// binary exponent. Zero keeps its sign; NaN and infinities are rejected
/// because no artifact contains them.
pub fn format_hex_f64(v: f64) -> String {
    assert!(v.is_finite(), "artifacts hold finite values only");
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0x0p+0".to_string()
        } else {
            "0x0p+0".to_string()
        };
    }
    let b = v.to_bits();
    let sign = if b >> 63 == 1 { "-" } else { "" };
    let be = ((b >> 52) & 0x7ff) as i32;
    let frac = b & ((1u64 << 52) - 1);
    let (lead, exp) = if be == 0 { (0, -1022) } else { (1, be - 1023) };
    let mut s = format!("{sign}0x{lead}.{frac:013x}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    format!("{s}p{exp:+}")
}

pub fn parse_hex_f64(text: &str) -> Option<f64> {
    let (neg, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text),
    };
    let rest = rest.strip_prefix("0x")?;
    let p = rest.find(['p', 'P'])?;
    let (mant_txt, exp_txt) = (&rest[..p], &rest[p + 1..]);
    let exp: i32 = exp_txt.parse().ok()?;
    let (int_txt, frac_txt) = match mant_txt.find('.') {
        Some(d) => (&mant_txt[..d], &mant_txt[d + 1..]),
        None => (mant_txt, ""),
    };
    if int_txt.is_empty() || frac_txt.len() > 13 {
        return None;
    }
    let mant = u64::from_str_radix(&format!("{int_txt}{frac_txt}"), 16).ok()?;
    // mant fits in 53 bits for every value we emit, so `mant as f64` is
    // exact and the two-step scale rounds once at most
    let e = exp - 4 * frac_txt.len() as i32;
    let v = if e < -1022 {
        mant as f64 * exp2i(-537) * exp2i(e + 537)
    } else if e > 1023 {
        mant as f64 * exp2i(537) * exp2i(e - 537)
    } else {
        mant as f64 * exp2i(e)
    };
    Some(if neg { -v } else { v })
}

fn syntax(line: usize, msg: impl Into<String>) -> ArtifactError {
    ArtifactError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// One constant per line: `<layout-tag> <value>`, floats as hex-float
/// literals, 64-bit words as bare hex.
pub fn emit_constants(c: &PiConstants) -> String {
    let mut out = String::new();
    for (i, p) in c.pieces28.iter().enumerate() {
        out += &format!("pieces28[{i}] {}\n", format_hex_f64(*p));
    }
    for (i, e) in c.pieces28_exp.iter().enumerate() {
        out += &format!("pieces28_exp[{i}] {e}\n");
    }
    for (i, p) in c.pieces53.iter().enumerate() {
        out += &format!("pieces53[{i}] {}\n", format_hex_f64(*p));
    }
    out += &format!("small_piece2 {}\n", format_hex_f64(c.small_piece2));
    for (i, w) in c.words64.iter().enumerate() {
        out += &format!("words64[{i}] {w:#018x}\n");
    }
    out += &format!("p1 {:#012x}\n", c.p1);
    out += &format!("p0 {:#012x}\n", c.p0);
    out += &format!("pi_over_256 {}\n", format_hex_f64(c.pi_over_256));
    out += &format!(
        "two_pow_minus_64 {}\n",
        format_hex_f64(c.two_pow_minus_64)
    );
    out
}

pub fn parse_constants(text: &str) -> Result<PiConstants, ArtifactError> {
    let mut c = PiConstants {
        pieces28: [0.0; 7],
        pieces28_exp: [0; 7],
        pieces53: [0.0; 4],
        small_piece2: 0.0,
        words64: [0; 3],
        p1: 0,
        p0: 0,
        pi_over_256: 0.0,
        two_pow_minus_64: 0.0,
    };
    let mut seen = 0usize;
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (tag, val) = line
            .split_once(' ')
            .ok_or_else(|| syntax(ln, "expected `tag value`"))?;
        let fval = || {
            parse_hex_f64(val).ok_or_else(|| syntax(ln, format!("bad hex float {val:?}")))
        };
        let wval = || {
            u64::from_str_radix(val.trim_start_matches("0x"), 16)
                .map_err(|_| syntax(ln, format!("bad hex word {val:?}")))
        };
        let idx = |name: &str| -> Option<usize> {
            tag.strip_prefix(name)?
                .strip_prefix('[')?
                .strip_suffix(']')?
                .parse()
                .ok()
        };
        if let Some(i) = idx("pieces28_exp") {
            c.pieces28_exp[i] = val
                .parse()
                .map_err(|_| syntax(ln, format!("bad exponent {val:?}")))?;
        } else if let Some(i) = idx("pieces28") {
            c.pieces28[i] = fval()?;
        } else if let Some(i) = idx("pieces53") {
            c.pieces53[i] = fval()?;
        } else if let Some(i) = idx("words64") {
            c.words64[i] = wval()?;
        } else {
            match tag {
                "small_piece2" => c.small_piece2 = fval()?,
                "p1" => c.p1 = wval()?,
                "p0" => c.p0 = wval()?,
                "pi_over_256" => c.pi_over_256 = fval()?,
                "two_pow_minus_64" => c.two_pow_minus_64 = fval()?,
                _ => return Err(syntax(ln, format!("unknown tag {tag:?}"))),
            }
        }
        seen += 1;
    }
    if seen != 7 + 7 + 4 + 1 + 3 + 2 + 2 {
        return Err(ArtifactError::Mismatch(format!(
            "constants file has {seen} entries, expected 26"
        )));
    }
    Ok(c)
}

/// One entry per line, index-prefixed: `<j> <hex-float>`.
pub fn emit_table(t: &SinTable) -> String {
    let mut out = String::new();
    for (j, e) in t.entries().iter().enumerate() {
        out += &format!("{j} {}\n", format_hex_f64(*e));
    }
    out
}

pub fn parse_table(text: &str) -> Result<SinTable, ArtifactError> {
    let mut entries = [f64::NAN; 512];
    let mut seen = [false; 512];
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (jt, vt) = line
            .split_once(' ')
            .ok_or_else(|| syntax(ln, "expected `index value`"))?;
        let j: usize = jt
            .parse()
            .map_err(|_| syntax(ln, format!("bad index {jt:?}")))?;
        if j >= 512 || seen[j] {
            return Err(syntax(ln, format!("index {j} out of range or repeated")));
        }
        entries[j] =
            parse_hex_f64(vt).ok_or_else(|| syntax(ln, format!("bad hex float {vt:?}")))?;
        seen[j] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(ArtifactError::Mismatch("table file is missing entries".into()));
    }
    Ok(SinTable { entries })
}

/// FNV-1a over the little-endian bit patterns, in index order. Stable
/// across platforms; recorded in coefficient files to bind a certificate
/// to the exact table it was trained against.
pub fn table_checksum(t: &SinTable) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for e in t.entries() {
        for b in e.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Header lines (`# key value`) then one coefficient per line:
/// `<domain> <poly> <k> <hex-float>` where k is the power of x'.
pub fn emit_coeffs(cs: &CoeffSet, table: &SinTable) -> String {
    let mut out = String::new();
    out += &format!("# sin-degree {}\n", cs.reduced.sin_degree());
    out += &format!("# cos-degree {}\n", cs.reduced.cos_degree());
    out += &format!("# eval-order {EVAL_ORDER_TAG}\n");
    out += &format!("# table-checksum {:#018x}\n", table_checksum(table));
    out += &format!("# version {GENERATOR_VERSION}\n");
    for (name, pp) in [("reduced", &cs.reduced), ("small", &cs.small)] {
        for (i, c) in pp.sin_coeffs.iter().enumerate() {
            out += &format!("{name} sin {} {}\n", 2 * i + 1, format_hex_f64(*c));
        }
        for (i, c) in pp.cos_coeffs.iter().enumerate() {
            out += &format!("{name} cos {} {}\n", 2 * i, format_hex_f64(*c));
        }
    }
    out
}

/// Rejects files whose header disagrees with this build: a certificate is
/// only valid for the evaluation order and table it was generated against.
pub fn parse_coeffs(text: &str, table: &SinTable) -> Result<CoeffSet, ArtifactError> {
    let mut cs = CoeffSet {
        reduced: PolyPair {
            sin_coeffs: Vec::new(),
            cos_coeffs: Vec::new(),
        },
        small: PolyPair {
            sin_coeffs: Vec::new(),
            cos_coeffs: Vec::new(),
        },
    };
    let mut header_seen = 0usize;
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix("# ") {
            let (key, val) = h
                .split_once(' ')
                .ok_or_else(|| syntax(ln, "expected `# key value`"))?;
            match key {
                "sin-degree" | "cos-degree" => {}
                "eval-order" => {
                    if val != EVAL_ORDER_TAG {
                        return Err(ArtifactError::Mismatch(format!(
                            "coefficient file targets evaluation order {val:?}, \
                             this build is {EVAL_ORDER_TAG:?}"
                        )));
                    }
                }
                "table-checksum" => {
                    let want = u64::from_str_radix(val.trim_start_matches("0x"), 16)
                        .map_err(|_| syntax(ln, format!("bad checksum {val:?}")))?;
                    let have = table_checksum(table);
                    if want != have {
                        return Err(ArtifactError::Mismatch(format!(
                            "table checksum {want:#x} does not match built table {have:#x}"
                        )));
                    }
                }
                "version" => {}
                _ => return Err(syntax(ln, format!("unknown header key {key:?}"))),
            }
            header_seen += 1;
            continue;
        }
        let mut parts = line.split(' ');
        let (dom, which, k, v) = (
            parts.next().ok_or_else(|| syntax(ln, "truncated line"))?,
            parts.next().ok_or_else(|| syntax(ln, "truncated line"))?,
            parts.next().ok_or_else(|| syntax(ln, "truncated line"))?,
            parts.next().ok_or_else(|| syntax(ln, "truncated line"))?,
        );
        let k: usize = k
            .parse()
            .map_err(|_| syntax(ln, format!("bad power {k:?}")))?;
        let v = parse_hex_f64(v).ok_or_else(|| syntax(ln, format!("bad hex float {v:?}")))?;
        let pp = match dom {
            "reduced" => &mut cs.reduced,
            "small" => &mut cs.small,
            _ => return Err(syntax(ln, format!("unknown domain {dom:?}"))),
        };
        let vec = match which {
            "sin" => &mut pp.sin_coeffs,
            "cos" => &mut pp.cos_coeffs,
            _ => return Err(syntax(ln, format!("unknown polynomial {which:?}"))),
        };
        let want_k = if which == "sin" {
            2 * vec.len() + 1
        } else {
            2 * vec.len()
        };
        if k != want_k {
            return Err(syntax(ln, format!("power {k} out of order, expected {want_k}")));
        }
        vec.push(v);
    }
    if header_seen < 5 {
        return Err(ArtifactError::Mismatch("coefficient file header incomplete".into()));
    }
    for pp in [&cs.reduced, &cs.small] {
        if pp.sin_coeffs.is_empty() || pp.cos_coeffs.is_empty() {
            return Err(ArtifactError::Mismatch("coefficient file is missing a polynomial".into()));
        }
    }
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::coeffs;
    use crate::rangered::pi_constants;
    use crate::tables::sin_table;

    #[test]
    fn hex_float_round_trip() {
        let vals = [
            0.0,
            -0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            f64::MIN_POSITIVE,
            f64::MAX,
            f64::from_bits(1), // smallest subnormal
            f64::from_bits(0x000f_ffff_ffff_ffff),
            2f64.powi(-1000),
        ];
        for v in vals {
            let s = format_hex_f64(v);
            let back = parse_hex_f64(&s).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v:e} -> {s}");
        }
        assert_eq!(parse_hex_f64("0x1.6a09e667f3bcdp-1"), Some(2f64.sqrt() / 2.0));
        assert_eq!(parse_hex_f64("0x1p+3"), Some(8.0));
        assert!(parse_hex_f64("1.5").is_none());
        assert!(parse_hex_f64("0x1.5q+0").is_none());
    }

    #[test]
    fn constants_round_trip() {
        let c = pi_constants();
        let text = emit_constants(c);
        let back = parse_constants(&text).unwrap();
        assert_eq!(&back, c);
        assert!(parse_constants(&text.replace("p1 ", "px ")).is_err());
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(parse_constants(&truncated).is_err());
    }

    #[test]
    fn table_round_trip() {
        let t = sin_table();
        let text = emit_table(t);
        let back = parse_table(&text).unwrap();
        for j in 0..512 {
            assert_eq!(back.entries()[j].to_bits(), t.entries()[j].to_bits());
        }
        assert_eq!(table_checksum(&back), table_checksum(t));
    }

    #[test]
    fn coeffs_round_trip_and_binding() {
        let cs = coeffs();
        let t = sin_table();
        let text = emit_coeffs(cs, t);
        let back = parse_coeffs(&text, t).unwrap();
        assert_eq!(&back, cs);
        // wrong eval order tag is rejected
        let other = text.replace(EVAL_ORDER_TAG, "some-other-order");
        assert!(matches!(parse_coeffs(&other, t), Err(ArtifactError::Mismatch(_))));
        // checksum binds to the table
        let bad = text.replace("# table-checksum 0x", "# table-checksum 0xf");
        assert!(parse_coeffs(&bad, t).is_err());
    }
}
