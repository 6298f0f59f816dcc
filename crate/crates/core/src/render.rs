//! Tabular views of segmented sessions (plain text and HTML).

use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatedSession;
use crate::corpus::Corpus;
use crate::kos::Classification;
use crate::log::ActionKind;
use crate::scalar::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRow {
    pub step: usize,
    pub kind: ActionKind,
    /// Search or facet terms as entered; empty for document views.
    pub terms: String,
    /// `Author (Year): Title` for document views, or the raw id when unknown.
    pub citation: String,
    pub session_topic: String,
    pub session_topic_label: String,
    pub topic_number: u32,
    /// True when this row starts a new segment.
    pub boundary_before: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTable {
    pub id: String,
    pub rows: Vec<SessionRow>,
}

impl SessionTable {
    pub fn build<W: Weight>(session: &AnnotatedSession<W>, corpus: &Corpus, classification: &Classification) -> Self {
        let mut rows: Vec<SessionRow> = Vec::with_capacity(session.actions.len());
        for a in &session.actions {
            let citation = match (&a.action.kind, &a.action.doc_id) {
                (ActionKind::DocView, Some(id)) => corpus.get(id).map_or_else(|| id.clone(), |d| d.citation()),
                _ => String::new(),
            };
            let topic = a.session_topic.clone().unwrap_or_default();
            let topic_number = a.topic_number.unwrap_or(0);
            rows.push(SessionRow {
                step: a.action.index,
                kind: a.action.kind,
                terms: a.action.display_terms(),
                citation,
                session_topic_label: classification.label(&topic).to_owned(),
                session_topic: topic,
                topic_number,
                boundary_before: rows.last().is_some_and(|r| r.topic_number != topic_number),
            });
        }
        Self {
            id: session.id.clone(),
            rows,
        }
    }

    const HEADER: [&'static str; 6] = [
        "Action step",
        "Action type",
        "User search terms",
        "Citation",
        "Session topic",
        "Topic number",
    ];

    fn cells(row: &SessionRow) -> [String; 6] {
        [
            format!("[{}]", row.step),
            row.kind.display_name().to_owned(),
            row.terms.clone(),
            row.citation.clone(),
            row.session_topic_label.clone(),
            format!("T{}", row.topic_number),
        ]
    }

    /// Fixed-width table; a dashed line separates rows with different topic numbers.
    pub fn to_text(&self) -> String {
        let body: Vec<[String; 6]> = self.rows.iter().map(Self::cells).collect();
        let mut widths = Self::HEADER.map(|h| h.chars().count());
        for cells in &body {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join(" | ").trim_end().to_owned()
        };
        let total = widths.iter().sum::<usize>() + 3 * (widths.len() - 1);
        let mut out = String::new();
        out.push_str(&line(&Self::HEADER.map(String::from)));
        out.push('\n');
        out.push_str(&"=".repeat(total));
        out.push('\n');
        for (row, cells) in self.rows.iter().zip(&body) {
            if row.boundary_before {
                out.push_str(&"- ".repeat(total.div_ceil(2)).trim_end().to_owned());
                out.push('\n');
            }
            out.push_str(&line(cells));
            out.push('\n');
        }
        out
    }

    /// HTML table; rows that start a new segment carry a dashed red top border.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("<table class=\"session\" data-session=\"{}\">\n", escape(&self.id)));
        out.push_str("<thead><tr>");
        for h in Self::HEADER {
            out.push_str(&format!("<th>{h}</th>"));
        }
        out.push_str("</tr></thead>\n<tbody>\n");
        for row in &self.rows {
            if row.boundary_before {
                out.push_str("<tr class=\"segment-start\" style=\"border-top: 2px dashed red\">");
            } else {
                out.push_str("<tr>");
            }
            for c in Self::cells(row) {
                out.push_str(&format!("<td>{}</td>", escape(&c)));
            }
            out.push_str("</tr>\n");
        }
        out.push_str("</tbody>\n</table>\n");
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn render_text<W: Weight>(session: &AnnotatedSession<W>, corpus: &Corpus, classification: &Classification) -> String {
    SessionTable::build(session, corpus, classification).to_text()
}

pub fn render_html<W: Weight>(session: &AnnotatedSession<W>, corpus: &Corpus, classification: &Classification) -> String {
    SessionTable::build(session, corpus, classification).to_html()
}
