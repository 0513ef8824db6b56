use std::fmt;

/// One step of a [`DocPath`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Index(usize),
    Key(String),
}

/// Slash-separated location inside a tree document, e.g.
/// `/paths/2/sections/0/flows/1/questions`.
///
/// Ordering compares segment by segment, so `/paths/2` sorts before `/paths/10`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocPath(Vec<Segment>);

impl DocPath {
    pub fn root() -> Self {
        DocPath(Vec::new())
    }

    pub fn key(&self, key: &str) -> Self {
        let mut segments = self.0.clone();
        segments.push(Segment::Key(key.to_owned()));
        DocPath(segments)
    }

    pub fn index(&self, index: usize) -> Self {
        let mut segments = self.0.clone();
        segments.push(Segment::Index(index));
        DocPath(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn path(i: usize) -> Self {
        DocPath::root().key("paths").index(i)
    }

    pub fn section(i: usize, j: usize) -> Self {
        DocPath::path(i).key("sections").index(j)
    }

    pub fn flow(i: usize, j: usize, k: usize) -> Self {
        DocPath::section(i, j).key("flows").index(k)
    }
}

impl fmt::Display for DocPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for segment in &self.0 {
            match segment {
                Segment::Index(i) => write!(f, "/{i}")?,
                Segment::Key(k) => write!(f, "/{k}")?,
            }
        }
        Ok(())
    }
}
