//! Process metrics mined from git history.
//!
//! The window of a release holds the commits reachable from its tag and not
//! from the previous release's tag. Renames are followed backwards from the
//! path the file has at the release.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::process::Command;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROCESS_METRIC_NAMES: [&str; 5] = ["COMM", "ADDED_LINES", "DEL_LINES", "ADEV", "DDEV"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    /// Set when the commit renamed `old_path` to `path`.
    pub old_path: Option<String>,
    pub added: u64,
    pub deleted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub parents: Vec<String>,
    pub author_email: String,
    pub timestamp: i64,
    pub changes: Vec<FileChange>,
}

/// Commits with parents listed before children, plus tag targets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct History {
    pub commits: Vec<CommitRecord>,
    pub tags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub release_tag: String,
    /// None for the first release: the window is all history up to the tag.
    pub previous_tag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessMetrics {
    /// In [`PROCESS_METRIC_NAMES`] order.
    pub values: [f64; 5],
    /// No reachable commit ever touched the path.
    pub never_existed: bool,
}

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("unknown tag {0}")]
    UnknownTag(String),
    #[error("git failed: {0}")]
    Git(String),
    #[error("malformed log line: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const HEADER: &str = "@@commit\x1f";

/// Expands `-M` numstat path syntax: `a/{x => y}/F.java` or `old => new`.
fn split_rename(field: &str) -> (String, Option<String>) {
    if let (Some(open), Some(close)) = (field.find('{'), field.find('}')) {
        if let Some((old, new)) = field[open + 1..close].split_once(" => ") {
            let (pre, post) = (&field[..open], &field[close + 1..]);
            let join = |mid: &str| format!("{pre}{mid}{post}").replace("//", "/");
            return (join(new), Some(join(old)));
        }
    }
    match field.split_once(" => ") {
        Some((old, new)) => (new.to_string(), Some(old.to_string())),
        None => (field.to_string(), None),
    }
}

/// Parses `git log --numstat -M` output in the format used by
/// [`mine_history`].
pub fn parse_numstat_log(text: &str) -> Result<Vec<CommitRecord>, ProcessError> {
    let mut out: Vec<CommitRecord> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(HEADER) {
            let f: Vec<&str> = rest.split('\x1f').collect();
            if f.len() != 4 {
                return Err(ProcessError::Malformed(line.to_string()));
            }
            out.push(CommitRecord {
                id: f[0].to_string(),
                parents: f[1].split_whitespace().map(str::to_string).collect(),
                author_email: f[2].trim().to_lowercase(),
                timestamp: f[3].trim().parse().map_err(|_| ProcessError::Malformed(line.to_string()))?,
                changes: Vec::new(),
            });
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(a), Some(d), Some(p)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ProcessError::Malformed(line.to_string()));
        };
        let commit = out.last_mut().ok_or_else(|| ProcessError::Malformed(line.to_string()))?;
        // Binary files report "-".
        let (path, old_path) = split_rename(p);
        commit.changes.push(FileChange {
            path,
            old_path,
            added: a.parse().unwrap_or(0),
            deleted: d.parse().unwrap_or(0),
        });
    }
    Ok(out)
}

fn git(repo: &Path, args: &[&str]) -> Result<String, ProcessError> {
    let out = Command::new("git").arg("-C").arg(repo).args(args).output()?;
    if !out.status.success() {
        return Err(ProcessError::Git(String::from_utf8_lossy(&out.stderr).trim().to_string()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Reads all commits and tags of a repository with the `git` binary.
pub fn mine_history(repo: &Path) -> Result<History, ProcessError> {
    let format = format!("--format={HEADER}%H%x1f%P%x1f%ae%x1f%at");
    let log = git(repo, &["log", "--all", "--topo-order", "--reverse", "-M", "--numstat", &format])?;
    let commits = parse_numstat_log(&log)?;
    let refs = git(repo, &["show-ref", "--tags", "-d"]).or_else(|e| match e {
        // show-ref exits 1 when there are no tags.
        ProcessError::Git(ref m) if m.is_empty() => Ok(String::new()),
        e => Err(e),
    })?;
    let mut tags = BTreeMap::new();
    for line in refs.lines() {
        let Some((sha, name)) = line.split_once(' ') else { continue };
        let Some(tag) = name.strip_prefix("refs/tags/") else { continue };
        match tag.strip_suffix("^{}") {
            // Peeled entries point at the commit behind an annotated tag.
            Some(t) => {
                tags.insert(t.to_string(), sha.to_string());
            }
            None => {
                tags.entry(tag.to_string()).or_insert_with(|| sha.to_string());
            }
        }
    }
    Ok(History { commits, tags })
}

impl History {
    fn index(&self) -> BTreeMap<&str, usize> {
        self.commits.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect()
    }

    fn reachable(&self, index: &BTreeMap<&str, usize>, tag: &str) -> Result<BTreeSet<usize>, ProcessError> {
        let start = self
            .tags
            .get(tag)
            .and_then(|sha| index.get(sha.as_str()))
            .ok_or_else(|| ProcessError::UnknownTag(tag.to_string()))?;
        let mut seen = BTreeSet::from([*start]);
        let mut queue = VecDeque::from([*start]);
        while let Some(i) = queue.pop_front() {
            for p in &self.commits[i].parents {
                if let Some(&j) = index.get(p.as_str()) {
                    if seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
        Ok(seen)
    }
}

/// Touches of one path, newest first, following renames backwards.
fn touches<'h>(history: &'h History, reachable: &BTreeSet<usize>, path: &str) -> Vec<(usize, &'h FileChange)> {
    let mut name = path.to_string();
    let mut out = Vec::new();
    for &i in reachable.iter().rev() {
        if let Some(ch) = history.commits[i].changes.iter().find(|c| c.path == name) {
            out.push((i, ch));
            if let Some(old) = &ch.old_path {
                name = old.clone();
            }
        }
    }
    out
}

/// Process metrics of `paths` (as they are named at the release) for one window.
pub fn compute_process_metrics(
    history: &History,
    window: &Window,
    paths: &[String],
) -> Result<BTreeMap<String, ProcessMetrics>, ProcessError> {
    let index = history.index();
    let upto = history.reachable(&index, &window.release_tag)?;
    let before = match &window.previous_tag {
        Some(t) => history.reachable(&index, t)?,
        None => BTreeSet::new(),
    };
    let author = |i: usize| history.commits[i].author_email.as_str();
    let out = paths
        .par_iter()
        .map(|path| {
            let all = touches(history, &upto, path);
            if all.is_empty() {
                return (path.clone(), ProcessMetrics { values: [0.0; 5], never_existed: true });
            }
            let in_window: Vec<_> = all.iter().filter(|(i, _)| !before.contains(i)).collect();
            let comm = in_window.len() as f64;
            let per_commit = |total: u64| if comm == 0.0 { 0.0 } else { total as f64 / comm };
            let added = per_commit(in_window.iter().map(|(_, c)| c.added).sum());
            let deleted = per_commit(in_window.iter().map(|(_, c)| c.deleted).sum());
            let adev = in_window.iter().map(|(i, _)| author(*i)).collect::<BTreeSet<_>>().len();
            let ddev = all.iter().map(|(i, _)| author(*i)).collect::<BTreeSet<_>>().len();
            let values = [comm, added, deleted, adev as f64, ddev as f64];
            (path.clone(), ProcessMetrics { values, never_existed: false })
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rename_syntax() {
        assert_eq!(split_rename("src/{old => new}/A.java"), ("src/new/A.java".into(), Some("src/old/A.java".into())));
        assert_eq!(split_rename("src/{ => sub}/A.java"), ("src/sub/A.java".into(), Some("src/A.java".into())));
        assert_eq!(split_rename("A.java => B.java"), ("B.java".into(), Some("A.java".into())));
        assert_eq!(split_rename("A.java"), ("A.java".into(), None));
    }

    fn commit(id: &str, parent: &str, who: &str, changes: Vec<FileChange>) -> CommitRecord {
        CommitRecord {
            id: id.into(),
            parents: if parent.is_empty() { vec![] } else { vec![parent.into()] },
            author_email: who.into(),
            timestamp: 0,
            changes,
        }
    }

    fn change(path: &str, old: Option<&str>, added: u64) -> FileChange {
        FileChange { path: path.into(), old_path: old.map(str::to_string), added, deleted: 1 }
    }

    #[test]
    fn renames_are_followed_within_and_before_the_window() {
        let history = History {
            commits: vec![
                commit("a", "", "x@e", vec![change("Old.java", None, 5)]),
                commit("b", "a", "y@e", vec![change("New.java", Some("Old.java"), 1)]),
                commit("c", "b", "z@e", vec![change("New.java", None, 3)]),
            ],
            tags: BTreeMap::from([("r1".into(), "a".into()), ("r2".into(), "c".into())]),
        };
        let w = Window { release_tag: "r2".into(), previous_tag: Some("r1".into()) };
        let m = compute_process_metrics(&history, &w, &["New.java".into(), "Gone.java".into()]).unwrap();
        assert_eq!(m["New.java"].values, [2.0, 2.0, 1.0, 2.0, 3.0]);
        assert!(m["Gone.java"].never_existed);
        assert!(matches!(
            compute_process_metrics(&history, &Window { release_tag: "nope".into(), previous_tag: None }, &[]),
            Err(ProcessError::UnknownTag(_))
        ));
    }

    #[test]
    fn parses_log_records() {
        let log = format!(
            "{HEADER}abc\x1f\x1fA@X.org\x1f100\n\n3\t1\tF.java\n-\t-\tlogo.png\n{HEADER}def\x1fabc\x1fb@x\x1f200\n"
        );
        let c = parse_numstat_log(&log).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].author_email, "a@x.org");
        assert_eq!(c[0].changes[1].added, 0);
        assert_eq!(c[1].parents, vec!["abc".to_string()]);
        assert!(c[1].changes.is_empty());
    }
}
