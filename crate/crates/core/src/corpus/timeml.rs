//! Importer for the TimeML subset: inline `EVENT`/`TIMEX3` inside `TEXT`,
//! `MAKEINSTANCE`, `TLINK`, and a creation-time `TIMEX3`
//! (`functionInDocument="CREATION_TIME"`). Everything else is ignored.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{tokenize, CorpusError, Document, Entity, EntityKind, TLink};
use crate::pointalg::TLinkType;

const EVENT_ATTRS: [&str; 1] = ["class"];
const INSTANCE_ATTRS: [&str; 3] = ["tense", "aspect", "polarity"];

struct Open {
    id: String,
    kind: EntityKind,
    first_token: usize,
    attrs: BTreeMap<String, String>,
}

struct RawLink {
    source: String,
    target: String,
    rel: String,
}

fn attributes(e: &BytesStart<'_>, line: usize) -> Result<HashMap<String, String>, CorpusError> {
    let mut out = HashMap::new();
    for a in e.attributes() {
        let a = a.map_err(|err| CorpusError::Parse { line, message: err.to_string() })?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let value = a.unescape_value().map_err(|err| CorpusError::Parse { line, message: err.to_string() })?;
        out.insert(key, value.into_owned());
    }
    Ok(out)
}

fn line_of(text: &str, byte: usize) -> usize {
    text.as_bytes()[..byte.min(text.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

pub fn parse_timeml_subset(path: impl AsRef<Path>) -> Result<Document, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let fallback = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_timeml_str(&text, &fallback)
}

/// Parses TimeML text; `fallback_id` is used when there is no `DOCID`.
pub fn parse_timeml_str(text: &str, fallback_id: &str) -> Result<Document, CorpusError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);

    let mut tokens: Vec<String> = Vec::new();
    let mut entities: Vec<Entity> = Vec::new();
    let mut open: Option<Open> = None;
    let mut in_text = false;
    let mut in_docid = false;
    let mut docid = String::new();
    let mut instances: HashMap<String, (String, BTreeMap<String, String>)> = HashMap::new();
    let mut raw_links: Vec<RawLink> = Vec::new();

    loop {
        let pos = reader.buffer_position() as usize;
        let line = line_of(text, pos);
        let event = reader.read_event().map_err(|e| CorpusError::Parse { line, message: e.to_string() })?;
        match event {
            Event::Eof => break,
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"MAKEINSTANCE" || e.name().as_ref() == b"TLINK" => {
                let a = attributes(&e, line)?;
                if e.name().as_ref() == b"MAKEINSTANCE" {
                    let (Some(eiid), Some(eid)) = (a.get("eiid"), a.get("eventID")) else {
                        return Err(CorpusError::Parse { line, message: "MAKEINSTANCE needs eiid and eventID".into() });
                    };
                    let attrs = INSTANCE_ATTRS
                        .iter()
                        .filter_map(|k| a.get(*k).map(|v| (k.to_string(), v.clone())))
                        .collect();
                    instances.insert(eiid.clone(), (eid.clone(), attrs));
                } else {
                    let source = a.get("eventInstanceID").or_else(|| a.get("timeID"));
                    let target = a.get("relatedToEventInstance").or_else(|| a.get("relatedToTime"));
                    let (Some(source), Some(target), Some(rel)) = (source, target, a.get("relType")) else {
                        return Err(CorpusError::Parse { line, message: "TLINK needs a source, a target and relType".into() });
                    };
                    raw_links.push(RawLink { source: source.clone(), target: target.clone(), rel: rel.clone() });
                }
            }
            Event::Start(e) => match e.name().as_ref() {
                b"TEXT" => in_text = true,
                b"DOCID" => in_docid = true,
                b"EVENT" | b"TIMEX3" => {
                    let a = attributes(&e, line)?;
                    let is_event = e.name().as_ref() == b"EVENT";
                    let id_key = if is_event { "eid" } else { "tid" };
                    let Some(id) = a.get(id_key) else {
                        return Err(CorpusError::Parse { line, message: format!("missing {id_key}") });
                    };
                    let dct = a.get("functionInDocument").map(String::as_str) == Some("CREATION_TIME");
                    let (kind, keys): (EntityKind, &[&str]) = if is_event {
                        (EntityKind::Event, &EVENT_ATTRS)
                    } else if dct {
                        (EntityKind::Dct, &["type"])
                    } else {
                        (EntityKind::Timex, &["type"])
                    };
                    let attrs = keys.iter().filter_map(|k| a.get(*k).map(|v| (k.to_string(), v.clone()))).collect();
                    if open.is_some() {
                        return Err(CorpusError::Parse { line, message: "nested entity tags are not supported".into() });
                    }
                    open = Some(Open { id: id.clone(), kind, first_token: tokens.len(), attrs });
                }
                _ => {}
            },
            Event::Empty(e) if e.name().as_ref() == b"TIMEX3" => {
                // Empty creation-time tags carry no text.
                let a = attributes(&e, line)?;
                if a.get("functionInDocument").map(String::as_str) == Some("CREATION_TIME") {
                    if let Some(tid) = a.get("tid") {
                        let mut ent = Entity::new(tid.clone(), EntityKind::Dct, None);
                        if let Some(t) = a.get("type") {
                            ent.attrs.insert("type".into(), t.clone());
                        }
                        entities.push(ent);
                    }
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| CorpusError::Parse { line, message: e.to_string() })?;
                if in_docid {
                    docid.push_str(s.trim());
                } else if in_text {
                    tokens.extend(tokenize(&s));
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"TEXT" => in_text = false,
                b"DOCID" => in_docid = false,
                b"EVENT" | b"TIMEX3" => {
                    let Some(o) = open.take() else { continue };
                    let span = match o.kind {
                        EntityKind::Dct => None,
                        _ if tokens.len() > o.first_token => Some((o.first_token, tokens.len() - 1)),
                        _ => return Err(CorpusError::Parse { line, message: format!("entity {:?} covers no tokens", o.id) }),
                    };
                    entities.push(Entity { id: o.id, kind: o.kind, span, attrs: o.attrs });
                }
                _ => {}
            },
            _ => {}
        }
    }

    let doc_id = if docid.is_empty() { fallback_id.to_string() } else { docid };
    if !entities.iter().any(|e| e.kind == EntityKind::Dct) {
        return Err(CorpusError::Validation { doc: doc_id, message: "no DCT (TIMEX3 with functionInDocument=\"CREATION_TIME\")".into() });
    }

    for (eid, attrs) in instances.values() {
        if let Some(ent) = entities.iter_mut().find(|e| &e.id == eid) {
            ent.attrs.extend(attrs.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
    }
    let resolve = |id: &str| instances.get(id).map(|(eid, _)| eid.clone()).unwrap_or_else(|| id.to_string());
    let tlinks = raw_links
        .into_iter()
        .map(|l| Ok(TLink::new(resolve(&l.source), resolve(&l.target), TLinkType::parse(&l.rel)?)))
        .collect::<Result<Vec<_>, CorpusError>>()?;

    Document::new(doc_id, tokens.into_iter().map(|t| (t, None)).collect(), entities, tlinks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_json_lines;

    const FIXTURE: &str = r#"<?xml version="1.0" ?>
<TimeML>
<DOCID>wsj_0001</DOCID>
<DCT><TIMEX3 tid="t0" type="DATE" value="1998-02-27" functionInDocument="CREATION_TIME">02/27/1998</TIMEX3></DCT>
<TEXT>
He <EVENT eid="e1" class="OCCURRENCE">ran</EVENT> before <TIMEX3 tid="t1" type="DATE" value="1998-03-02">Monday</TIMEX3>.
</TEXT>
<MAKEINSTANCE eiid="ei1" eventID="e1" tense="PAST" aspect="NONE" polarity="POS" pos="VERB"/>
<TLINK lid="l1" relType="BEFORE" eventInstanceID="ei1" relatedToTime="t1"/>
<TLINK lid="l2" relType="DURING" timeID="t1" relatedToTime="t0"/>
</TimeML>
"#;

    const PAIRED_JSON: &str = r#"{"id":"wsj_0001","tokens":[{"t":"he"},{"t":"ran"},{"t":"before"},{"t":"monday"},{"t":"."}],"entities":[{"id":"t0","kind":"DCT","attrs":{"type":"DATE"}},{"id":"e1","kind":"EVENT","span":[1,1],"attrs":{"aspect":"NONE","class":"OCCURRENCE","polarity":"POS","tense":"PAST"}},{"id":"t1","kind":"TIMEX","span":[3,3],"attrs":{"type":"DATE"}}],"tlinks":[{"source":"e1","target":"t1","relation":"BEFORE"},{"source":"t1","target":"t0","relation":"SIMULTANEOUS"}]}"#;

    #[test]
    fn minimal_instance() {
        let d = parse_timeml_str(FIXTURE, "x").unwrap();
        assert_eq!(d.id(), "wsj_0001");
        assert_eq!(d.entities().len(), 3);
        assert_eq!(d.dct().id, "t0");
        assert_eq!(d.tlinks()[0], TLink::new("e1", "t1", TLinkType::Before));
        // DURING is folded into SIMULTANEOUS on load.
        assert_eq!(d.tlinks()[1].relation, TLinkType::Simultaneous);
    }

    #[test]
    fn matches_json_reader() {
        let from_xml = parse_timeml_str(FIXTURE, "x").unwrap();
        let from_json = parse_json_lines(PAIRED_JSON).unwrap().remove(0);
        assert_eq!(from_xml, from_json);
    }

    #[test]
    fn overlap_is_rejected() {
        let text = FIXTURE.replace(r#"relType="BEFORE""#, r#"relType="OVERLAP""#);
        let err = parse_timeml_str(&text, "x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("OVERLAP") && msg.contains("BEFORE"), "{msg}");
    }

    #[test]
    fn missing_dct_is_a_validation_error() {
        let dct_line = FIXTURE.lines().find(|l| l.starts_with("<DCT>")).unwrap();
        let text = FIXTURE.replace(dct_line, "");
        assert!(matches!(parse_timeml_str(&text, "x").unwrap_err(), CorpusError::Validation { .. }));
    }
}
