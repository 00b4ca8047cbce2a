//! Machine-readable diagnostics on stderr: one `event=<name> key=value ...`
//! line per call. Values containing whitespace or quotes are quoted.

pub fn kv(event: &str, pairs: &[(&str, String)]) {
    let mut line = format!("event={event}");
    for (k, v) in pairs {
        line.push(' ');
        line.push_str(k);
        line.push('=');
        if v.is_empty() || v.contains(|c: char| c.is_whitespace() || c == '"') {
            line.push_str(&format!("{v:?}"));
        } else {
            line.push_str(v);
        }
    }
    eprintln!("{line}");
}
