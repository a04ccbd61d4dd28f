//! `--set key=value` overrides applied to the spec JSON before parsing.
//! Keys are dotted paths into the document; values parse as JSON first
//! and fall back to plain strings.

pub fn apply(doc: &mut serde_json::Value, entry: &str) -> Result<(), String> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| format!("override '{entry}' is not KEY=VALUE"))?;
    if path.is_empty() {
        return Err(format!("override '{entry}' has an empty key"));
    }
    let value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));

    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(format!("override path '{path}' crosses a non-object"));
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    let last = parts[parts.len() - 1];
    match node.as_object_mut() {
        Some(map) => {
            map.insert(last.to_string(), value);
            Ok(())
        }
        None => Err(format!("override path '{path}' crosses a non-object")),
    }
}
