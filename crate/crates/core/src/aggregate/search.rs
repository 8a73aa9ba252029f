use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub id: String,
    pub name: String,
}

// Char-by-char lowering, so lowering a longer query always extends the
// lowered shorter one (unlike `str::to_lowercase`, whose final-sigma rule
// looks at context).
fn fold(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Stops whose name contains `query`, ignoring case, ordered by match
/// position, then name, then id. An empty query returns every stop.
pub fn search_stops(store: &Store, query: &str) -> Vec<SearchHit> {
    let needle = fold(query);
    let mut hits: Vec<(usize, &str, &str)> = store
        .network()
        .stops()
        .iter()
        .filter_map(|s| {
            fold(&s.name)
                .find(&needle)
                .map(|pos| (pos, s.name.as_str(), s.id.as_str()))
        })
        .collect();
    hits.sort_unstable();
    hits.into_iter()
        .map(|(_, name, id)| SearchHit {
            id: id.to_string(),
            name: name.to_string(),
        })
        .collect()
}
