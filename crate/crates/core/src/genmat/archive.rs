//! Generator archive: a text header followed by raw little-endian doubles.
//!
//! ```text
//! UWOFDM-GENMAT 1
//! mode uw-ofdm
//! cfg_hash 3f9a...
//! alpha 1.5
//! array A_d 48 48
//! array G_d 52 32
//! array G_p 52 4
//! array p 4 1
//! end
//! <payload>
//! ```
//!
//! The payload holds the arrays in header order, each row-major with real and
//! imaginary parts interleaved as 64-bit little-endian floats.
//!
//! [`GeneratorArchive::export_csv`] and [`GeneratorArchive::import_csv`]
//! convert to and from a text form with one `name,row,col,re,im` line per
//! entry, for inspection and hand editing.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::GeneratorSet;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::sysmodel::SystemConfig;

pub const MAGIC: &str = "UWOFDM-GENMAT 1";

const ARRAY_NAMES: [&str; 4] = ["A_d", "G_d", "G_p", "p"];

/// Contents of an archive file.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorArchive {
    pub cfg_hash: String,
    pub set: GeneratorSet,
}

impl GeneratorArchive {
    pub fn new(set: GeneratorSet, cfg: &SystemConfig) -> Self {
        Self {
            cfg_hash: cfg.hash_hex(),
            set,
        }
    }

    /// Fails unless the archive was produced for `cfg`.
    pub fn check_config(&self, cfg: &SystemConfig) -> Result<()> {
        let expected = cfg.hash_hex();
        if self.cfg_hash != expected {
            return Err(Error::Archive(format!(
                "config hash mismatch: archive {} vs config {}",
                self.cfg_hash, expected
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.set;
        let p = CMatrix::from_column_slice(s.p.len(), 1, s.p.as_slice());
        let arrays = [&s.a_d, &s.g_d, &s.g_p, &p];

        writeln!(w, "{MAGIC}")?;
        writeln!(w, "mode {}", s.mode)?;
        writeln!(w, "cfg_hash {}", self.cfg_hash)?;
        // Debug formatting of f64 round-trips exactly
        writeln!(w, "alpha {:?}", s.alpha)?;
        for (name, m) in ARRAY_NAMES.iter().zip(arrays.iter()) {
            writeln!(w, "array {name} {} {}", m.nrows(), m.ncols())?;
        }
        writeln!(w, "end")?;
        for m in arrays {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let z = m[(r, c)];
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = String::new();
        let mut next_line = |reader: &mut BufReader<R>| -> Result<String> {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                return Err(Error::Archive("unexpected end of header".into()));
            }
            Ok(line.trim_end_matches(['\n', '\r']).to_string())
        };

        if next_line(&mut reader)? != MAGIC {
            return Err(Error::Archive("missing magic line".into()));
        }
        let mut mode = None;
        let mut cfg_hash = None;
        let mut alpha = None;
        let mut dims: Vec<(String, usize, usize)> = Vec::new();
        loop {
            let l = next_line(&mut reader)?;
            if l == "end" {
                break;
            }
            let mut parts = l.split_whitespace();
            match parts.next() {
                Some("mode") => mode = Some(field(parts.next(), "mode")?.parse()?),
                Some("cfg_hash") => cfg_hash = Some(field(parts.next(), "cfg_hash")?.to_string()),
                Some("alpha") => {
                    alpha = Some(
                        field(parts.next(), "alpha")?
                            .parse::<f64>()
                            .map_err(|e| Error::Archive(format!("bad alpha: {e}")))?,
                    )
                }
                Some("array") => {
                    let name = field(parts.next(), "array name")?.to_string();
                    let rows = parse_dim(parts.next())?;
                    let cols = parse_dim(parts.next())?;
                    dims.push((name, rows, cols));
                }
                Some(other) => return Err(Error::Archive(format!("unknown header key '{other}'"))),
                None => return Err(Error::Archive("blank header line".into())),
            }
        }
        let names: Vec<&str> = dims.iter().map(|d| d.0.as_str()).collect();
        if names != ARRAY_NAMES {
            return Err(Error::Archive(format!("unexpected array list {names:?}")));
        }

        let mut arrays = Vec::with_capacity(4);
        for (name, rows, cols) in &dims {
            let mut buf = vec![0u8; rows * cols * 16];
            reader
                .read_exact(&mut buf)
                .map_err(|_| Error::Archive(format!("truncated payload in {name}")))?;
            let mut m = CMatrix::zeros(*rows, *cols);
            for (i, chunk) in buf.chunks_exact(16).enumerate() {
                let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
                m[(i / cols, i % cols)] = Complex64::new(re, im);
            }
            arrays.push(m);
        }
        let mut trailing = [0u8; 1];
        if reader.read(&mut trailing)? != 0 {
            return Err(Error::Archive("trailing bytes after payload".into()));
        }

        let p_mat = arrays.pop().expect("four arrays");
        if p_mat.ncols() != 1 {
            return Err(Error::Archive("pilot array must be a column".into()));
        }
        let g_p = arrays.pop().expect("four arrays");
        let g_d = arrays.pop().expect("four arrays");
        let a_d = arrays.pop().expect("four arrays");
        if g_d.nrows() != g_p.nrows() || g_p.ncols() != p_mat.nrows() {
            return Err(Error::Archive("inconsistent generator dimensions".into()));
        }
        Ok(Self {
            cfg_hash: cfg_hash.ok_or_else(|| Error::Archive("missing cfg_hash".into()))?,
            set: GeneratorSet {
                mode: mode.ok_or_else(|| Error::Archive("missing mode".into()))?,
                a_d,
                g_d,
                g_p,
                p: p_mat.column(0).into_owned(),
                alpha: alpha.ok_or_else(|| Error::Archive("missing alpha".into()))?,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

impl GeneratorArchive {
    /// Text form: `name,row,col,re,im` per entry, plus an `alpha` line.
    pub fn export_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "row", "col", "re", "im"])?;
        out.write_record(["alpha", "0", "0", &format!("{:?}", self.set.alpha), "0.0"])?;
        let s = &self.set;
        let p = CMatrix::from_column_slice(s.p.len(), 1, s.p.as_slice());
        for (name, m) in ARRAY_NAMES.iter().zip([&s.a_d, &s.g_d, &s.g_p, &p]) {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let z = m[(r, c)];
                    out.write_record([
                        *name,
                        &r.to_string(),
                        &c.to_string(),
                        &format!("{:?}", z.re),
                        &format!("{:?}", z.im),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Rebuilds an archive for `cfg` from [`Self::export_csv`] output. Every
    /// entry of every array must be present exactly once.
    pub fn import_csv<R: Read>(r: R, cfg: &SystemConfig) -> Result<Self> {
        let k = cfg.n_payload();
        let (nu, nd, np) = (cfg.n_used(), cfg.n_d, cfg.n_p);
        let shapes = [(k, k), (nu, nd), (nu, np), (np, 1)];
        let mut arrays: Vec<CMatrix> = shapes.iter().map(|&(r, c)| CMatrix::zeros(r, c)).collect();
        let mut seen: Vec<Vec<bool>> = shapes.iter().map(|&(r, c)| vec![false; r * c]).collect();
        let mut alpha = None;
        let mut reader = csv::Reader::from_reader(r);
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Archive(format!("expected 5 fields, got {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Archive(format!("bad number '{}': {e}", &rec[i])))
            };
            let idx = |i: usize| -> Result<usize> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Archive(format!("bad index '{}': {e}", &rec[i])))
            };
            let name = rec[0].trim();
            if name == "alpha" {
                alpha = Some(num(3)?);
                continue;
            }
            let a = ARRAY_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Archive(format!("unknown array '{name}'")))?;
            let (row, col) = (idx(1)?, idx(2)?);
            let (rows, cols) = shapes[a];
            if row >= rows || col >= cols {
                return Err(Error::Archive(format!("{name}[{row},{col}] outside {rows}x{cols}")));
            }
            if std::mem::replace(&mut seen[a][row * cols + col], true) {
                return Err(Error::Archive(format!("{name}[{row},{col}] given twice")));
            }
            arrays[a][(row, col)] = Complex64::new(num(3)?, num(4)?);
        }
        for (a, s) in seen.iter().enumerate() {
            if let Some(missing) = s.iter().position(|v| !v) {
                let cols = shapes[a].1;
                return Err(Error::Archive(format!(
                    "{}[{},{}] missing",
                    ARRAY_NAMES[a],
                    missing / cols,
                    missing % cols
                )));
            }
        }
        let p = arrays.pop().expect("four arrays").column(0).into_owned();
        let g_p = arrays.pop().expect("four arrays");
        let g_d = arrays.pop().expect("four arrays");
        let a_d = arrays.pop().expect("four arrays");
        Ok(Self {
            cfg_hash: cfg.hash_hex(),
            set: GeneratorSet {
                mode: cfg.mode,
                a_d,
                g_d,
                g_p,
                p,
                alpha: alpha.ok_or_else(|| Error::Archive("missing alpha".into()))?,
            },
        })
    }
}

fn field<'a>(v: Option<&'a str>, what: &str) -> Result<&'a str> {
    v.ok_or_else(|| Error::Archive(format!("missing value for {what}")))
}

fn parse_dim(v: Option<&str>) -> Result<usize> {
    field(v, "dimension")?
        .parse()
        .map_err(|e| Error::Archive(format!("bad dimension: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{optimize_pilots, permutation_init};
    use crate::genmat::build_g_p;
    use crate::sysmodel::build_carrier_maps;

    fn sample() -> (SystemConfig, GeneratorArchive) {
        let cfg = SystemConfig::reference_uw();
        let maps = build_carrier_maps(&cfg).unwrap();
        let a = permutation_init(&cfg, &maps).unwrap();
        let p = optimize_pilots(&build_g_p(&maps, &cfg).unwrap(), 4).unwrap().p;
        let set = GeneratorSet::uw_ofdm(&a, p, &maps, &cfg).unwrap();
        (cfg.clone(), GeneratorArchive::new(set, &cfg))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (cfg, ar) = sample();
        let mut buf = Vec::new();
        ar.write_to(&mut buf).unwrap();
        let back = GeneratorArchive::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ar);
        back.check_config(&cfg).unwrap();
        assert!(back.check_config(&SystemConfig::reference_cp()).is_err());
    }

    #[test]
    fn header_is_text_and_payload_sized() {
        let (_, ar) = sample();
        let mut buf = Vec::new();
        ar.write_to(&mut buf).unwrap();
        let text = String::from_utf8_lossy(&buf);
        assert!(text.starts_with("UWOFDM-GENMAT 1\nmode uw-ofdm\ncfg_hash "));
        assert!(text.contains("array A_d 48 48\narray G_d 52 32\narray G_p 52 4\narray p 4 1\nend\n"));
        let header_len = text.find("end\n").unwrap() + 4;
        let values = 48 * 48 + 52 * 32 + 52 * 4 + 4;
        assert_eq!(buf.len() - header_len, values * 16);
        // first payload value is A_d[0,0] real part
        let first = f64::from_le_bytes(buf[header_len..header_len + 8].try_into().unwrap());
        assert_eq!(first, ar.set.a_d[(0, 0)].re);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (cfg, ar) = sample();
        let mut text = Vec::new();
        ar.export_csv(&mut text).unwrap();
        let back = GeneratorArchive::import_csv(text.as_slice(), &cfg).unwrap();
        assert_eq!(back, ar);
        let s = String::from_utf8(text).unwrap();
        assert!(s.starts_with("name,row,col,re,im\nalpha,0,0,1.5,0.0\n"));
        let without_last: String = s
            .lines()
            .take(s.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(GeneratorArchive::import_csv(without_last.as_bytes(), &cfg).is_err());
        let doubled = format!("{s}p,0,0,1.0,0.0\n");
        assert!(GeneratorArchive::import_csv(doubled.as_bytes(), &cfg).is_err());
    }

    #[test]
    fn rejects_corruption() {
        let (_, ar) = sample();
        let mut buf = Vec::new();
        ar.write_to(&mut buf).unwrap();
        let truncated = &buf[..buf.len() - 3];
        assert!(GeneratorArchive::read_from(truncated).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(GeneratorArchive::read_from(extra.as_slice()).is_err());
        assert!(GeneratorArchive::read_from(&b"NOPE\n"[..]).is_err());
    }
}
