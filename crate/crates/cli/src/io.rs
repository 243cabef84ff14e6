use std::path::Path;

use reltime::corpus::{parse_json_lines_each, parse_timeml_str};
use reltime::Document;
use serde::de::DeserializeOwned;

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or prints when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Config file contents over the type's defaults. Unknown keys are errors.
pub fn config_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
    }
}

fn is_timeml(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("tml" | "xml" | "TML" | "XML"))
}

/// Documents of a corpus, each with a label for error messages: JSON-lines
/// line numbers, or TimeML file names. A directory is read as TimeML files
/// in name order.
pub fn corpus_each(path: &Path) -> Result<Vec<(String, Result<Document, String>)>, CliError> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| CliError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_timeml(p))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::Runtime(format!("{}: no .tml or .xml files", path.display())));
        }
        files.iter().map(|f| timeml_file(f)).collect()
    } else if is_timeml(path) {
        Ok(vec![timeml_file(path)?])
    } else {
        let text = read(path)?;
        Ok(parse_json_lines_each(&text)
            .into_iter()
            .map(|(line, r)| (format!("{}:{line}", path.display()), r.map_err(|e| e.to_string())))
            .collect())
    }
}

fn timeml_file(path: &Path) -> Result<(String, Result<Document, String>), CliError> {
    let text = read(path)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((path.display().to_string(), parse_timeml_str(&text, &stem).map_err(|e| e.to_string())))
}

/// Every document of a corpus; the first bad one is an error.
pub fn corpus(path: &Path) -> Result<Vec<Document>, CliError> {
    let docs: Vec<Document> = corpus_each(path)?
        .into_iter()
        .map(|(label, r)| r.map_err(|e| CliError::Runtime(format!("{label}: {e}"))))
        .collect::<Result<_, _>>()?;
    let mut seen = std::collections::HashSet::new();
    if let Some(d) = docs.iter().find(|d| !seen.insert(d.id())) {
        return Err(CliError::Runtime(format!("{}: duplicate document id {:?}", path.display(), d.id())));
    }
    Ok(docs)
}
