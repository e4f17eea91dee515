//! Atom feed parsing for arXiv query responses, plus the inverse used to
//! build recorded fixtures.

use chrono::{DateTime, NaiveDate};
use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use super::PaperRecord;

const ABS_PREFIXES: [&str; 4] = [
    "http://arxiv.org/abs/",
    "https://arxiv.org/abs/",
    "http://export.arxiv.org/abs/",
    "https://export.arxiv.org/abs/",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedError {
    #[error("malformed feed at entry {index}: {reason}")]
    Entry { index: usize, reason: String },
    #[error("malformed feed: {0}")]
    Document(String),
    /// arXiv reports query errors as a feed with a single error entry.
    #[error("arXiv API error: {0}")]
    Api(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeedPage {
    pub total_results: Option<u64>,
    pub records: Vec<PaperRecord>,
}

#[derive(Default)]
struct EntryFields {
    id: String,
    title: String,
    summary: String,
    published: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Id,
    Title,
    Summary,
    Published,
    TotalResults,
}

pub fn parse_feed(xml: &str) -> Result<FeedPage, FeedError> {
    let mut reader = Reader::from_str(xml);
    let mut page = FeedPage::default();
    let mut entry: Option<EntryFields> = None;
    let mut entry_index = 0usize;
    let mut field: Option<Field> = None;
    let mut total = String::new();

    let xml_error = |index: Option<usize>, e: String| match index {
        Some(index) => FeedError::Entry { index, reason: e },
        None => FeedError::Document(e),
    };

    loop {
        let current = entry.as_ref().map(|_| entry_index);
        let event = reader
            .read_event()
            .map_err(|e| xml_error(current, e.to_string()))?;
        match event {
            Event::Start(start) => {
                let local = start.local_name();
                let name = local.as_ref();
                match (entry.is_some(), name) {
                    (false, b"entry") => entry = Some(EntryFields::default()),
                    (false, b"totalResults") => field = Some(Field::TotalResults),
                    (true, b"id") => field = Some(Field::Id),
                    (true, b"title") => field = Some(Field::Title),
                    (true, b"summary") => field = Some(Field::Summary),
                    (true, b"published") => field = Some(Field::Published),
                    _ => field = None,
                }
            }
            Event::End(end) => {
                if end.local_name().as_ref() == b"entry" {
                    if let Some(fields) = entry.take() {
                        page.records.push(finish_entry(fields, entry_index)?);
                        entry_index += 1;
                    }
                }
                field = None;
            }
            Event::Text(text) => {
                let text = text
                    .decode()
                    .map_err(|e| xml_error(current, e.to_string()))?;
                push_text(&mut entry, &mut total, field, &text);
            }
            Event::CData(data) => {
                let text = data
                    .decode()
                    .map_err(|e| xml_error(current, e.to_string()))?;
                push_text(&mut entry, &mut total, field, &text);
            }
            Event::GeneralRef(reference) => {
                let resolved = match reference
                    .resolve_char_ref()
                    .map_err(|e| xml_error(current, e.to_string()))?
                {
                    Some(ch) => ch.to_string(),
                    None => {
                        let name = reference
                            .decode()
                            .map_err(|e| xml_error(current, e.to_string()))?;
                        resolve_predefined_entity(&name)
                            .ok_or_else(|| {
                                xml_error(current, format!("unknown entity &{name};"))
                            })?
                            .to_string()
                    }
                };
                push_text(&mut entry, &mut total, field, &resolved);
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if entry.is_some() {
        return Err(FeedError::Entry {
            index: entry_index,
            reason: "unterminated entry".into(),
        });
    }
    let total = total.trim();
    if !total.is_empty() {
        page.total_results = Some(
            total
                .parse()
                .map_err(|_| FeedError::Document(format!("bad totalResults {total:?}")))?,
        );
    }
    Ok(page)
}

fn push_text(entry: &mut Option<EntryFields>, total: &mut String, field: Option<Field>, text: &str) {
    match (entry.as_mut(), field) {
        (Some(e), Some(Field::Id)) => e.id.push_str(text),
        (Some(e), Some(Field::Title)) => e.title.push_str(text),
        (Some(e), Some(Field::Summary)) => e.summary.push_str(text),
        (Some(e), Some(Field::Published)) => e.published.push_str(text),
        (None, Some(Field::TotalResults)) => total.push_str(text),
        _ => {}
    }
}

fn finish_entry(fields: EntryFields, index: usize) -> Result<PaperRecord, FeedError> {
    let id_url = fields.id.trim();
    if id_url.contains("/api/errors") {
        return Err(FeedError::Api(normalize_whitespace(&fields.summary)));
    }
    let arxiv_id = ABS_PREFIXES
        .iter()
        .find_map(|p| id_url.strip_prefix(p))
        .unwrap_or(id_url)
        .trim_matches('/')
        .to_string();
    if arxiv_id.is_empty() {
        return Err(FeedError::Entry {
            index,
            reason: "missing <id>".into(),
        });
    }
    let published = fields.published.trim();
    let submitted = parse_submitted(published).ok_or_else(|| FeedError::Entry {
        index,
        reason: format!("bad <published> value {published:?}"),
    })?;
    Ok(PaperRecord {
        arxiv_id,
        title: normalize_whitespace(&fields.title),
        abstract_text: normalize_whitespace(&fields.summary),
        submitted,
    })
}

fn parse_submitted(value: &str) -> Option<NaiveDate> {
    DateTime::parse_from_rfc3339(value)
        .map(|dt| dt.date_naive())
        .ok()
        .or_else(|| NaiveDate::parse_from_str(value, "%Y-%m-%d").ok())
}

/// Collapses runs of whitespace (arXiv hard-wraps titles and abstracts).
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Renders records as an arXiv-shaped Atom feed.
pub fn render_feed(records: &[PaperRecord], total_results: Option<u64>) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <feed xmlns=\"http://www.w3.org/2005/Atom\" \
         xmlns:opensearch=\"http://a9.com/-/spec/opensearch/1.1/\" \
         xmlns:arxiv=\"http://arxiv.org/schemas/atom\">\n\
         \x20 <title type=\"html\">ArXiv Query results</title>\n",
    );
    if let Some(total) = total_results {
        out.push_str(&format!(
            "  <opensearch:totalResults>{total}</opensearch:totalResults>\n"
        ));
    }
    for record in records {
        out.push_str(&format!(
            "  <entry>\n    <id>http://arxiv.org/abs/{}</id>\n    \
             <published>{}T00:00:00Z</published>\n    \
             <title>{}</title>\n    <summary>{}</summary>\n    \
             <author><name>Anonymous</name></author>\n    \
             <link href=\"http://arxiv.org/abs/{}\" rel=\"alternate\" type=\"text/html\"/>\n  \
             </entry>\n",
            escape(record.arxiv_id.as_str()),
            record.submitted.format("%Y-%m-%d"),
            escape(record.title.as_str()),
            escape(record.abstract_text.as_str()),
            escape(record.arxiv_id.as_str()),
        ));
    }
    out.push_str("</feed>\n");
    out
}
