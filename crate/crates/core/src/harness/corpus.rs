use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDoc {
    pub id: String,
    pub text: String,
}

/// Source documents (e.g. reviews) partitioned into groups (e.g. locations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedCorpus {
    groups: BTreeMap<String, Vec<SourceDoc>>,
    pub provenance: String,
}

impl GroupedCorpus {
    /// Every group must be non-empty and document ids unique corpus-wide.
    pub fn new(groups: BTreeMap<String, Vec<SourceDoc>>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (g, docs) in &groups {
            if docs.is_empty() {
                return Err(Error::InvalidCorpus(format!("group {g:?} is empty")));
            }
            for d in docs {
                if !seen.insert(d.id.as_str()) {
                    return Err(Error::InvalidCorpus(format!("duplicate document id {:?}", d.id)));
                }
            }
        }
        Ok(GroupedCorpus { groups, provenance: provenance.into() })
    }

    /// Groups in id order.
    pub fn groups(&self) -> impl Iterator<Item = (&str, &[SourceDoc])> + '_ {
        self.groups.iter().map(|(g, d)| (g.as_str(), d.as_slice()))
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn doc_count(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn documents(&self) -> impl Iterator<Item = &SourceDoc> + '_ {
        self.groups.values().flatten()
    }

    /// Loads a `<group_id>/<doc_id>.txt` directory tree or a
    /// `group_id<TAB>doc_id<TAB>text` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
        if meta.is_dir() {
            Self::load_dir(path)
        } else {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            Self::read_tsv(BufReader::new(file), path.display().to_string())
        }
    }

    fn load_dir(root: &Path) -> Result<Self> {
        let mut groups = BTreeMap::new();
        let mut group_dirs: Vec<_> = fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(root, e))?;
        group_dirs.sort_by_key(|e| e.file_name());
        for entry in group_dirs {
            let gpath = entry.path();
            if !gpath.is_dir() {
                continue;
            }
            let group = entry.file_name().to_string_lossy().into_owned();
            let mut files: Vec<_> = fs::read_dir(&gpath)
                .map_err(|e| Error::io(&gpath, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            let mut docs = Vec::with_capacity(files.len());
            for f in files {
                let text = fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
                let stem = f.file_stem().unwrap().to_string_lossy();
                docs.push(SourceDoc { id: format!("{group}/{stem}"), text });
            }
            groups.insert(group, docs);
        }
        if groups.is_empty() {
            return Err(Error::InvalidCorpus(format!("{} contains no group directories", root.display())));
        }
        Self::new(groups, root.display().to_string())
    }

    pub fn read_tsv<R: BufRead>(r: R, provenance: impl Into<String>) -> Result<Self> {
        let mut groups: BTreeMap<String, Vec<SourceDoc>> = BTreeMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let (Some(g), Some(id), Some(text)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Format {
                    line: i + 1,
                    message: "expected group_id<TAB>doc_id<TAB>text".into(),
                });
            };
            groups.entry(g.to_string()).or_default().push(SourceDoc {
                id: id.to_string(),
                text: text.to_string(),
            });
        }
        if groups.is_empty() {
            return Err(Error::InvalidCorpus("no documents".into()));
        }
        Self::new(groups, provenance)
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for (g, docs) in &self.groups {
            for d in docs {
                let text = d.text.replace(['\t', '\n', '\r'], " ");
                writeln!(w, "{g}\t{}\t{text}", d.id)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trip() {
        let text = "g1\td1\tgreat pool\ng1\td2\tnice\ng2\td3\tbad food\n";
        let c = GroupedCorpus::read_tsv(text.as_bytes(), "inline").unwrap();
        assert_eq!((c.group_count(), c.doc_count()), (2, 3));
        let mut buf = Vec::new();
        c.write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn rejects_duplicates_and_bad_lines() {
        assert!(GroupedCorpus::read_tsv("g\td\tx\nh\td\ty\n".as_bytes(), "").is_err());
        assert!(matches!(GroupedCorpus::read_tsv("g\td\n".as_bytes(), ""), Err(Error::Format { line: 1, .. })));
        let empty: BTreeMap<String, Vec<SourceDoc>> = [("g".to_string(), vec![])].into();
        assert!(GroupedCorpus::new(empty, "").is_err());
    }

    #[test]
    fn directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        for (g, d, t) in [("hotel", "r2", "b"), ("hotel", "r1", "a"), ("cafe", "r1", "c")] {
            fs::create_dir_all(dir.path().join(g)).unwrap();
            fs::write(dir.path().join(g).join(format!("{d}.txt")), t).unwrap();
        }
        fs::write(dir.path().join("hotel").join("notes.md"), "ignored").unwrap();
        let c = GroupedCorpus::load(dir.path()).unwrap();
        let ids: Vec<&str> = c.documents().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["cafe/r1", "hotel/r1", "hotel/r2"]);
    }
}
