//! Word vectors in, density matrices out.
//!
//! A word's density matrix is the mixture of the normalized outer products
//! of its own vector and the vectors of its hyponyms, scaled so that its
//! largest eigenvalue is 1. A word with no hyponyms is a pure state.
//!
//! Lexicons persist in a small binary format:
//!
//! ```text
//! "DMLX1"  u32 word_count  u32 dim
//! repeated word_count times:
//!     u16 byte_len  utf-8 bytes  dim·dim f64 (little endian, row-major)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::context::HypernymHierarchy;
use crate::error::{Error, Result};
use crate::spectral::{scale_to_unit_max_eig, Dmat, NORMALIZED_TOL};

pub const LEXICON_MAGIC: &[u8; 5] = b"DMLX1";

pub const RECIPE: &str = "sum of normalized outer products of the word and its hyponyms, scaled to unit max eigenvalue";

/// Word vectors of a single dimension, as read from a GloVe-style text file.
#[derive(Clone, Debug, Default)]
pub struct VectorTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    sha256: Option<String>,
}

impl VectorTable {
    /// Parses `word v1 … vd` lines. Blank lines are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = VectorTable::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let mut tokens = line.split_whitespace();
            let Some(word) = tokens.next() else { continue };
            let values = tokens
                .map(|t| match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::parse(line_no, format!("bad component `{t}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if values.is_empty() {
                return Err(Error::parse(line_no, format!("no components for `{word}`")));
            }
            if table.vectors.is_empty() {
                table.dim = values.len();
            } else if values.len() != table.dim {
                return Err(Error::DimensionMismatch { left: table.dim, right: values.len() });
            }
            if table.vectors.insert(word.to_string(), values).is_some() {
                return Err(Error::DuplicateWord(word.to_string()));
            }
        }
        Ok(table)
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = VectorTable::default();
        for (word, v) in pairs {
            if table.vectors.is_empty() {
                table.dim = v.len();
            } else if v.len() != table.dim {
                return Err(Error::DimensionMismatch { left: table.dim, right: v.len() });
            }
            table.vectors.insert(word.into(), v);
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact lookup, falling back to the lowercased word.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// SHA-256 of the source file, when loaded from disk.
    pub fn sha256(&self) -> Option<&str> {
        self.sha256.as_deref()
    }
}

pub fn load_vectors(path: impl AsRef<Path>) -> Result<VectorTable> {
    let bytes = std::fs::read(path)?;
    let mut table = VectorTable::parse(&bytes[..])?;
    table.sha256 = Some(hex::encode(Sha256::digest(&bytes)));
    Ok(table)
}

/// Density matrix of `word` from its own vector and those of `hyponyms`.
///
/// Hyponyms without a vector, or with a zero vector, are skipped. The result
/// does not depend on the order of `hyponyms`.
pub fn build_density_matrix<'a, I>(word: &str, hyponyms: I, vectors: &VectorTable) -> Result<Dmat>
where
    I: IntoIterator<Item = &'a str>,
{
    let own = vectors.get(word).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    let dim = vectors.dim();
    let mut sum = DMatrix::zeros(dim, dim);
    add_projector(&mut sum, own).ok_or(Error::ZeroMatrix)?;
    let members: BTreeSet<&str> = hyponyms.into_iter().filter(|h| *h != word).collect();
    for h in members {
        if let Some(v) = vectors.get(h) {
            add_projector(&mut sum, v);
        }
    }
    scale_to_unit_max_eig(&Dmat::from_psd_unchecked(sum))
}

fn add_projector(acc: &mut DMatrix<f64>, v: &[f64]) -> Option<()> {
    let v = DVector::from_column_slice(v);
    let norm = v.norm();
    if norm < 1e-12 {
        return None;
    }
    let v = v / norm;
    *acc += &v * v.transpose();
    Some(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub vector_sha256: String,
    pub recipe: String,
    pub dim: usize,
}

/// Words mapped to normalized density matrices of a common dimension.
#[derive(Clone, Debug)]
pub struct Lexicon {
    dim: usize,
    entries: BTreeMap<String, Dmat>,
    provenance: Option<Provenance>,
}

/// Words requested during [`Lexicon::build`] that had no vector.
#[derive(Clone, Debug, Default)]
pub struct BuildReport {
    pub missing: Vec<String>,
}

impl Lexicon {
    pub fn new(dim: usize) -> Self {
        Lexicon { dim, entries: BTreeMap::new(), provenance: None }
    }

    /// Builds matrices for every word of `hierarchy` (entries and hypernyms)
    /// plus `extra_words`. Hyponym sets come from inverting the hierarchy.
    pub fn build<'a>(
        vectors: &VectorTable,
        hierarchy: &'a HypernymHierarchy,
        extra_words: impl IntoIterator<Item = &'a str>,
    ) -> Result<(Lexicon, BuildReport)> {
        let index = hierarchy.hyponym_index();
        let mut wanted: BTreeSet<&str> = hierarchy.vocabulary();
        wanted.extend(extra_words);

        let (present, missing): (Vec<&str>, Vec<&str>) = wanted.into_iter().partition(|w| vectors.get(w).is_some());
        let built = present
            .par_iter()
            .map(|&w| {
                let hyponyms = index.get(w).into_iter().flatten().copied();
                build_density_matrix(w, hyponyms, vectors).map(|m| (w.to_string(), m))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut lexicon = Lexicon::new(vectors.dim());
        for (w, m) in built {
            lexicon.insert(w, m)?;
        }
        lexicon.provenance = Some(Provenance {
            vector_sha256: vectors.sha256().unwrap_or("unknown").to_string(),
            recipe: RECIPE.to_string(),
            dim: vectors.dim(),
        });
        let report = BuildReport { missing: missing.into_iter().map(String::from).collect() };
        Ok((lexicon, report))
    }

    /// Adds or replaces a word. The matrix must have the lexicon's dimension
    /// and `λ_max ≤ 1`.
    pub fn insert(&mut self, word: impl Into<String>, m: Dmat) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: m.dim() });
        }
        let max_eigenvalue = m.max_eigenvalue()?;
        if max_eigenvalue > 1.0 + NORMALIZED_TOL {
            return Err(Error::NotNormalized { max_eigenvalue });
        }
        self.entries.insert(word.into(), m.with_normalized(true));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact lookup, falling back to the lowercased word.
    pub fn get(&self, word: &str) -> Option<&Dmat> {
        self.entries.get(word).or_else(|| self.entries.get(&word.to_lowercase()))
    }

    pub fn require(&self, word: &str) -> Result<&Dmat> {
        self.get(word).ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Dmat)> {
        self.entries.iter().map(|(w, m)| (w.as_str(), m))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn set_provenance(&mut self, provenance: Provenance) {
        self.provenance = Some(provenance);
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let count = u32::try_from(self.entries.len())
            .map_err(|_| Error::InvalidArgument("too many words".into()))?;
        let dim = u32::try_from(self.dim).map_err(|_| Error::InvalidArgument("dimension too large".into()))?;
        w.write_all(LEXICON_MAGIC)?;
        w.write_all(&count.to_le_bytes())?;
        w.write_all(&dim.to_le_bytes())?;
        for (word, m) in &self.entries {
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch { left: self.dim, right: m.dim() });
            }
            let len = u16::try_from(word.len())
                .map_err(|_| Error::InvalidArgument(format!("word longer than 65535 bytes: {word}")))?;
            w.write_all(&len.to_le_bytes())?;
            w.write_all(word.as_bytes())?;
            let m = m.matrix();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    w.write_all(&m[(i, j)].to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the binary format and re-validates every matrix.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Lexicon> {
        let mut magic = [0u8; 5];
        read_exact(&mut r, &mut magic)?;
        if &magic != LEXICON_MAGIC {
            return Err(Error::CorruptLexicon("bad magic bytes".into()));
        }
        let count = read_u32(&mut r)? as usize;
        let dim = read_u32(&mut r)? as usize;
        let mut lexicon = Lexicon::new(dim);
        let mut values = vec![0.0f64; dim * dim];
        for _ in 0..count {
            let mut len = [0u8; 2];
            read_exact(&mut r, &mut len)?;
            let mut word = vec![0u8; u16::from_le_bytes(len) as usize];
            read_exact(&mut r, &mut word)?;
            let word = String::from_utf8(word).map_err(|e| Error::CorruptLexicon(e.to_string()))?;
            for v in values.iter_mut() {
                let mut b = [0u8; 8];
                read_exact(&mut r, &mut b)?;
                *v = f64::from_le_bytes(b);
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::CorruptLexicon(format!("non-finite entry for `{word}`")));
            }
            let m = Dmat::new(DMatrix::from_row_slice(dim, dim, &values))
                .map_err(|e| Error::CorruptLexicon(format!("`{word}`: {e}")))?;
            if lexicon.entries.contains_key(&word) {
                return Err(Error::CorruptLexicon(format!("duplicate word `{word}`")));
            }
            lexicon.insert(word.clone(), m).map_err(|e| Error::CorruptLexicon(format!("`{word}`: {e}")))?;
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::CorruptLexicon("trailing bytes".into()));
        }
        Ok(lexicon)
    }

    /// One [`text_line`] per word.
    pub fn export_text<W: Write>(&self, mut w: W) -> Result<()> {
        for (word, m) in &self.entries {
            writeln!(w, "{}", text_line(word, m))?;
        }
        Ok(())
    }
}

/// `word<TAB>dim<TAB>row-major values` with 17 significant digits.
pub fn text_line(word: &str, m: &Dmat) -> String {
    let values: Vec<String> = m.matrix().transpose().iter().map(|x| format!("{x:.16e}")).collect();
    format!("{word}\t{}\t{}", m.dim(), values.join(" "))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::CorruptLexicon("truncated file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

/// Writes the binary lexicon, plus its provenance (if any) to `<path>.meta`.
pub fn save_lexicon(lexicon: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    lexicon.write_binary(BufWriter::new(File::create(path)?))?;
    if let Some(p) = &lexicon.provenance {
        let text = format!("vector_sha256 = {}\nrecipe = {}\ndim = {}\n", p.vector_sha256, p.recipe, p.dim);
        std::fs::write(meta_path(path), text)?;
    }
    Ok(())
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let mut lexicon = Lexicon::read_binary(BufReader::new(File::open(path)?))?;
    if let Ok(text) = std::fs::read_to_string(meta_path(path)) {
        let field = |key: &str| {
            text.lines()
                .filter_map(|l| l.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim().to_string())
        };
        if let (Some(vector_sha256), Some(recipe), Some(dim)) = (field("vector_sha256"), field("recipe"), field("dim")) {
            let dim = dim.parse().map_err(|_| Error::CorruptLexicon("bad dim in metadata".into()))?;
            lexicon.provenance = Some(Provenance { vector_sha256, recipe, dim });
        }
    }
    Ok(lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> VectorTable {
        VectorTable::parse(text.as_bytes()).unwrap()
    }

    #[test]
    fn parse_vectors() {
        let t = table("a 1.0 0.0\nb 0.0 1.0\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.get("b"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn ragged_lines_rejected() {
        let err = VectorTable::parse("a 1.0 0.0\nb 0.0 1.0 2.0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn non_numeric_token_rejected() {
        let err = VectorTable::parse("a 1.0 0.0\nb 0.0 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn lowercase_fallback() {
        let t = table("apple 1 0\n");
        assert!(t.get("Apple").is_some());
        assert!(t.get("APPLES").is_none());
    }

    #[test]
    fn density_matrix_examples() {
        let t = table("w 1 0\nh 0 1\nd 2 0\n");
        let pure = build_density_matrix("w", [], &t).unwrap();
        assert_eq!(pure.matrix(), Dmat::from_diagonal(&[1.0, 0.0]).unwrap().matrix());

        let mixed = build_density_matrix("w", ["h"], &t).unwrap();
        assert!((mixed.matrix() - DMatrix::identity(2, 2)).norm() < 1e-15);

        // raw diag(2, 0), scaled back to diag(1, 0)
        let dup = build_density_matrix("w", ["d"], &t).unwrap();
        assert!((dup.matrix() - Dmat::from_diagonal(&[1.0, 0.0]).unwrap().matrix()).norm() < 1e-15);

        assert!(matches!(build_density_matrix("zzz", [], &t), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn insert_rejects_wrong_dim_and_unnormalized() {
        let mut lex = Lexicon::new(2);
        assert!(matches!(lex.insert("a", Dmat::identity(3)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            lex.insert("a", Dmat::from_diagonal(&[2.0, 0.0]).unwrap()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn binary_layout() {
        let mut lex = Lexicon::new(1);
        lex.insert("ab", Dmat::identity(1)).unwrap();
        let mut buf = Vec::new();
        lex.write_binary(&mut buf).unwrap();
        let mut expected = b"DMLX1".to_vec();
        expected.extend(1u32.to_le_bytes());
        expected.extend(1u32.to_le_bytes());
        expected.extend(2u16.to_le_bytes());
        expected.extend(b"ab");
        expected.extend(1.0f64.to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn corrupt_inputs() {
        let mut lex = Lexicon::new(2);
        lex.insert("a", Dmat::pure(&[0.6, 0.8]).unwrap()).unwrap();
        let mut buf = Vec::new();
        lex.write_binary(&mut buf).unwrap();

        let truncated = &buf[..buf.len() - 3];
        assert!(matches!(Lexicon::read_binary(truncated), Err(Error::CorruptLexicon(_))));

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(Lexicon::read_binary(&bad_magic[..]), Err(Error::CorruptLexicon(_))));

        // overwrite an off-diagonal entry so the matrix is no longer symmetric
        let mut asym = buf.clone();
        let off = 5 + 4 + 4 + 2 + 1 + 8;
        asym[off..off + 8].copy_from_slice(&0.9f64.to_le_bytes());
        assert!(matches!(Lexicon::read_binary(&asym[..]), Err(Error::CorruptLexicon(_))));

        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(matches!(Lexicon::read_binary(&trailing[..]), Err(Error::CorruptLexicon(_))));
    }

    #[test]
    fn text_export_has_17_digits() {
        let mut lex = Lexicon::new(1);
        lex.insert("x", Dmat::from_diagonal(&[1.0 / 3.0]).unwrap()).unwrap();
        let mut out = Vec::new();
        lex.export_text(&mut out).unwrap();
        let line = String::from_utf8(out).unwrap();
        assert_eq!(line, "x\t1\t3.3333333333333331e-1\n");
        let v: f64 = line.trim().rsplit('\t').next().unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }
}
