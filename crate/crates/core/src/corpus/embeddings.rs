use std::collections::HashMap;
use std::path::Path;

use super::CorpusError;

/// Reads a GloVe-style text file (`word v1 ... v_dim` per line). The first
/// occurrence of a word wins.
pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<HashMap<String, Vec<f64>>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_embeddings(&text, dim)
}

pub(crate) fn parse_embeddings(text: &str, dim: usize) -> Result<HashMap<String, Vec<f64>>, CorpusError> {
    assert!(dim > 0, "embedding dimension must be positive");
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Parse { line: i + 1, message: format!("bad embedding value: {e}") })?;
        if values.len() != dim {
            return Err(CorpusError::Parse {
                line: i + 1,
                message: format!("expected {dim} values for {word:?}, found {}", values.len()),
            });
        }
        out.entry(word.to_string()).or_insert(values);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(word: &str, n: usize, v: f64) -> String {
        let vals: Vec<String> = (0..n).map(|_| v.to_string()).collect();
        format!("{word} {}", vals.join(" "))
    }

    #[test]
    fn reads_vectors_and_keeps_first_duplicate() {
        let text = format!("{}\n{}\n", line("the", 50, 0.1), line("the", 50, 0.2));
        let m = parse_embeddings(&text, 50).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m["the"].len(), 50);
        assert_eq!(m["the"][0], 0.1);
    }

    #[test]
    fn wrong_length_is_an_error_with_line() {
        let text = format!("{}\n{}\n", line("a", 50, 0.0), line("b", 49, 0.0));
        match parse_embeddings(&text, 50).unwrap_err() {
            CorpusError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn empty_file_is_empty_map() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        std::fs::write(&p, "").unwrap();
        assert!(load_embeddings(&p, 50).unwrap().is_empty());
    }
}
