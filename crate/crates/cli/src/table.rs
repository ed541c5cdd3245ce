/// A CSV table whose rows all carry a config hash in the first column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let mut header = vec!["config_hash"];
        header.extend(&self.header);
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(std::iter::once(hash).chain(row.iter().map(String::as_str))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn flag(b: bool) -> String {
    b.to_string()
}
