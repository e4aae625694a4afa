//! Line-oriented snapshot files for a [`ShareGraph`].
//!
//! * `edges.tsv`: `item_id<TAB>user_id<TAB>iso8601_timestamp`, one tweet per line
//! * `items.jsonl`: one [`NewsItem`] per line
//! * `users.tsv`: `user_id<TAB>username` (optional on read)

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{NewsItem, ShareGraph, UserNode};
use crate::error::{Error, Result};

pub const EDGES_FILE: &str = "edges.tsv";
pub const ITEMS_FILE: &str = "items.jsonl";
pub const USERS_FILE: &str = "users.tsv";

pub fn write_snapshot(graph: &ShareGraph, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join(ITEMS_FILE);
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for item in graph.items() {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(USERS_FILE);
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for user in graph.users() {
        writeln!(w, "{}\t{}", user.user_id, user.username).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(EDGES_FILE);
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for e in graph.edges() {
        writeln!(
            w,
            "{}\t{}\t{}",
            graph.item(e.item).item_id,
            graph.user(e.user).user_id,
            e.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)
        )
        .map_err(|err| Error::io(&path, err))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn read_snapshot(dir: &Path) -> Result<ShareGraph> {
    let mut graph = ShareGraph::new();

    let path = dir.join(ITEMS_FILE);
    let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: NewsItem =
            serde_json::from_str(&line).map_err(|e| Error::parse(&path, n + 1, e.to_string()))?;
        graph
            .add_item(item)
            .map_err(|e| Error::parse(&path, n + 1, e.to_string()))?;
    }

    let path = dir.join(USERS_FILE);
    if path.exists() {
        let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.is_empty() {
                continue;
            }
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(&path, n + 1, "expected user_id<TAB>username"))?;
            graph.add_user(UserNode {
                user_id: id.to_string(),
                username: name.to_string(),
            });
        }
    }

    let path = dir.join(EDGES_FILE);
    let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(item_id), Some(user_id), Some(ts), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::parse(&path, n + 1, "expected 3 tab-separated fields"));
        };
        let ts: DateTime<Utc> = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| Error::parse(&path, n + 1, format!("timestamp `{ts}`: {e}")))?
            .with_timezone(&Utc);
        let item = graph
            .item_ix(item_id)
            .map_err(|e| Error::parse(&path, n + 1, e.to_string()))?;
        let user = graph.add_user(UserNode::new(user_id));
        graph.link(item, user, ts);
    }
    Ok(graph)
}
