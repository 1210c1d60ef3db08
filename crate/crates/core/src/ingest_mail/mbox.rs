use chrono::{DateTime, Utc};
use mailparse::{MailAddr, MailHeaderMap, ParsedMail};

use super::{MailLoad, Quarantined, RawMessage};

/// Parses an mbox byte stream into messages.
///
/// Entries are delimited by lines beginning with `From `. Entries whose header
/// block is malformed, or which lack a usable `Date` or `Message-ID`, are
/// quarantined. Repeated message ids within the stream are dropped and counted.
pub fn parse_mail_archive(stream: &[u8]) -> MailLoad {
    let mut load = MailLoad::default();
    let mut seen = std::collections::HashSet::new();
    for (index, entry) in split_entries(stream).into_iter().enumerate() {
        load.total_entries += 1;
        match parse_entry(&entry) {
            Ok(msg) => {
                if seen.insert(msg.message_id.clone()) {
                    load.messages.push(msg);
                } else {
                    load.duplicates += 1;
                }
            }
            Err((message_id, reason)) => {
                let reason = if message_id.is_empty() {
                    format!("{reason} (archive entry {})", index + 1)
                } else {
                    reason
                };
                load.quarantined.push(Quarantined { message_id, reason });
            }
        }
    }
    if load.duplicates > 0 {
        log::warn!("dropped {} duplicate message ids", load.duplicates);
    }
    load
}

fn lines_with_endings(data: &[u8]) -> impl Iterator<Item = &[u8]> {
    data.split_inclusive(|&b| b == b'\n')
}

fn split_entries(stream: &[u8]) -> Vec<Vec<u8>> {
    let mut entries = Vec::new();
    let mut current: Option<Vec<u8>> = None;
    for line in lines_with_endings(stream) {
        if line.starts_with(b"From ") {
            if let Some(done) = current.take() {
                entries.push(done);
            }
            current = Some(Vec::new());
            continue;
        }
        match current.as_mut() {
            Some(buf) => buf.extend_from_slice(unescape_from(line)),
            None => {
                // Content before the first separator forms its own entry unless blank.
                if !line.iter().all(u8::is_ascii_whitespace) {
                    current = Some(line.to_vec());
                }
            }
        }
    }
    if let Some(done) = current {
        entries.push(done);
    }
    entries
}

/// mboxrd escaping: `>From `, `>>From `, ... lose one leading `>`.
fn unescape_from(line: &[u8]) -> &[u8] {
    let depth = line.iter().take_while(|&&b| b == b'>').count();
    if depth > 0 && line[depth..].starts_with(b"From ") {
        &line[1..]
    } else {
        line
    }
}

fn is_blank_line(line: &[u8]) -> bool {
    line == b"\n" || line == b"\r\n" || line.is_empty()
}

fn validate_header_block(entry: &[u8]) -> Result<(), String> {
    let mut saw_field = false;
    for (n, line) in lines_with_endings(entry).enumerate() {
        if is_blank_line(line) {
            break;
        }
        if line[0] == b' ' || line[0] == b'\t' {
            if !saw_field {
                return Err(format!("malformed header block: continuation on line {}", n + 1));
            }
            continue;
        }
        let colon = line.iter().position(|&b| b == b':');
        let valid = match colon {
            Some(0) | None => false,
            Some(pos) => line[..pos].iter().all(|&b| (33..=126).contains(&b)),
        };
        if !valid {
            return Err(format!("malformed header block: line {} is not a header field", n + 1));
        }
        saw_field = true;
    }
    if saw_field {
        Ok(())
    } else {
        Err("malformed header block: no header fields".to_string())
    }
}

fn header(parsed: &ParsedMail<'_>, key: &str) -> String {
    parsed
        .headers
        .get_first_value(key)
        .map(|v| v.trim().to_string())
        .unwrap_or_default()
}

fn strip_angles(id: &str) -> String {
    id.trim().trim_start_matches('<').trim_end_matches('>').trim().to_string()
}

fn parse_entry(entry: &[u8]) -> Result<RawMessage, (String, String)> {
    validate_header_block(entry).map_err(|r| (String::new(), r))?;
    let parsed = mailparse::parse_mail(entry)
        .map_err(|e| (String::new(), format!("malformed header block: {e}")))?;

    let message_id = strip_angles(&header(&parsed, "Message-ID"));
    let raw_date = header(&parsed, "Date");
    if raw_date.is_empty() {
        return Err((message_id, "missing Date header".to_string()));
    }
    let date = mailparse::dateparse(&raw_date)
        .ok()
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .ok_or_else(|| (message_id.clone(), format!("unparseable Date header: {raw_date}")))?;
    if message_id.is_empty() {
        return Err((message_id, "missing Message-ID header".to_string()));
    }

    let (from_name, from_email) = parse_from(&parsed);
    let in_reply_to = Some(strip_angles(&header(&parsed, "In-Reply-To"))).filter(|s| !s.is_empty());

    Ok(RawMessage {
        from_name,
        from_email,
        to: header(&parsed, "To"),
        cc: header(&parsed, "Cc"),
        subject: header(&parsed, "Subject"),
        date,
        message_id,
        in_reply_to,
        body: extract_text(&parsed).replace("\r\n", "\n"),
    })
}

fn parse_from(parsed: &ParsedMail<'_>) -> (String, String) {
    let raw = header(parsed, "From");
    let single = parsed
        .headers
        .get_first_header("From")
        .and_then(|h| mailparse::addrparse_header(h).ok())
        .and_then(|list| {
            list.into_inner().into_iter().find_map(|addr| match addr {
                MailAddr::Single(info) => Some(info),
                MailAddr::Group(group) => group.addrs.into_iter().next(),
            })
        });
    let (mut name, email) = match single {
        Some(info) => (info.display_name.unwrap_or_default(), info.addr),
        None => fallback_from(&raw),
    };
    // "addr (Real Name)" style
    if name.trim().is_empty() {
        if let (Some(open), Some(close)) = (raw.find('('), raw.rfind(')')) {
            if open < close {
                name = raw[open + 1..close].to_string();
            }
        }
    }
    let name = name.trim().trim_matches('"').trim().to_string();
    let email = email.trim().to_string();
    if email.contains('@') {
        (name, email)
    } else if name.is_empty() {
        (email, String::new())
    } else {
        (name, String::new())
    }
}

fn fallback_from(raw: &str) -> (String, String) {
    let token = raw
        .split(|c: char| c.is_whitespace() || c == '<' || c == '>' || c == '(' || c == ')')
        .find(|t| t.contains('@'));
    match token {
        Some(email) => {
            let name = raw.split('<').next().unwrap_or("").trim();
            let name = if name.contains('@') { "" } else { name };
            (name.to_string(), email.to_string())
        }
        None => (raw.to_string(), String::new()),
    }
}

fn extract_text(parsed: &ParsedMail<'_>) -> String {
    let mime = parsed.ctype.mimetype.to_ascii_lowercase();
    if mime.starts_with("multipart/") {
        if let Some(part) = find_part(parsed, "text/plain").or_else(|| find_part(parsed, "text/")) {
            return part.get_body().unwrap_or_default();
        }
        return String::new();
    }
    if mime.is_empty() || mime.starts_with("text/") {
        parsed
            .get_body()
            .unwrap_or_else(|_| String::from_utf8_lossy(parsed.get_body_raw().as_deref().unwrap_or(&[])).into_owned())
    } else {
        String::new()
    }
}

fn find_part<'a>(parsed: &'a ParsedMail<'a>, prefix: &str) -> Option<&'a ParsedMail<'a>> {
    for sub in &parsed.subparts {
        let mime = sub.ctype.mimetype.to_ascii_lowercase();
        if mime.starts_with("multipart/") {
            if let Some(found) = find_part(sub, prefix) {
                return Some(found);
            }
        } else if mime.starts_with(prefix) {
            return Some(sub);
        }
    }
    None
}
