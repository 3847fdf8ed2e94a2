//! CSV renderings of the reports. Every JSON counterpart is the serde form of
//! the core type.

use cogdist_core::evaluation::EvaluationReport;
use cogdist_core::exploration::{Dendrogram, SimilarityMatrix, TopicTerms};
use cogdist_core::TaskLabel;

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// `Label,N,Precision,Recall,F1`, one row per class, then the macro and
/// weighted rows.
pub fn evaluation_csv(report: &EvaluationReport) -> String {
    let mut w = csv_writer();
    w.write_record(["Label", "N", "Precision", "Recall", "F1"]).unwrap();
    for m in &report.per_class {
        w.write_record([
            m.label.name().to_string(),
            m.support.to_string(),
            f4(m.precision),
            f4(m.recall),
            f4(m.f1),
        ])
        .unwrap();
    }
    let n = report.total_support.to_string();
    for (name, avg) in [
        ("All Examples (Macro)", report.macro_avg),
        ("All Examples (Weighted)", report.weighted),
    ] {
        w.write_record([
            name.to_string(),
            n.clone(),
            f4(avg.precision),
            f4(avg.recall),
            f4(avg.f1),
        ])
        .unwrap();
    }
    finish(w)
}

/// Square matrix with the class names as header row and first column.
pub fn similarity_csv(matrix: &SimilarityMatrix) -> String {
    let mut w = csv_writer();
    let mut header = vec![String::new()];
    header.extend(matrix.labels.iter().map(|l| l.name().to_string()));
    w.write_record(&header).unwrap();
    for (label, row) in matrix.labels.iter().zip(&matrix.values) {
        let mut rec = vec![label.name().to_string()];
        rec.extend(row.iter().map(|&v| f4(v)));
        w.write_record(&rec).unwrap();
    }
    finish(w)
}

/// One column per class, `k` rows of terms, best first. Shorter columns are
/// padded with empty cells.
pub fn terms_csv(columns: &[(TaskLabel, Vec<String>)]) -> String {
    let mut w = csv_writer();
    w.write_record(columns.iter().map(|(l, _)| l.name())).unwrap();
    let rows = columns.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    for r in 0..rows {
        w.write_record(columns.iter().map(|(_, t)| t.get(r).map_or("", String::as_str)))
            .unwrap();
    }
    finish(w)
}

/// `topic,rank,term,probability`.
pub fn topics_csv(topics: &[TopicTerms]) -> String {
    let mut w = csv_writer();
    w.write_record(["topic", "rank", "term", "probability"]).unwrap();
    for t in topics {
        for (rank, (term, p)) in t.terms.iter().enumerate() {
            w.write_record([
                t.topic.to_string(),
                (rank + 1).to_string(),
                term.clone(),
                format!("{p:.6}"),
            ])
            .unwrap();
        }
    }
    finish(w)
}

/// `step,left,right,height,size` with node ids as in [`Dendrogram`].
pub fn merges_csv(d: &Dendrogram) -> String {
    let mut w = csv_writer();
    w.write_record(["step", "left", "right", "height", "size"]).unwrap();
    for (i, m) in d.merges.iter().enumerate() {
        w.write_record([
            i.to_string(),
            m.left.to_string(),
            m.right.to_string(),
            f4(m.height),
            m.size.to_string(),
        ])
        .unwrap();
    }
    finish(w)
}
