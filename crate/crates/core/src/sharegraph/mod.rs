//! Bipartite share graph of news items and the users who tweeted them.
//!
//! Nodes are stored under dense integer indices assigned at insertion time.
//! Neighborhoods hold *distinct* neighbors; the raw edge list keeps every
//! tweet (with its timestamp) so that multiplicity-sensitive measures can
//! still see repeated shares.

mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot, EDGES_FILE, ITEMS_FILE, USERS_FILE};

use std::collections::{BTreeSet, HashMap};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of an item inside one [`ShareGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemIx(pub u32);

/// Dense index of a user inside one [`ShareGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserIx(pub u32);

impl ItemIx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl UserIx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsItem {
    pub item_id: String,
    pub canonical_url: String,
    /// Registered domain of the canonical URL's host.
    pub site: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub first_seen: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserNode {
    pub user_id: String,
    pub username: String,
}

impl UserNode {
    pub fn new(user_id: impl Into<String>) -> Self {
        let user_id = user_id.into();
        UserNode {
            username: user_id.clone(),
            user_id,
        }
    }
}

/// One tweet of an item by a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareEdge {
    pub item: ItemIx,
    pub user: UserIx,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Default)]
pub struct ShareGraph {
    items: Vec<NewsItem>,
    users: Vec<UserNode>,
    item_ids: HashMap<String, ItemIx>,
    user_ids: HashMap<String, UserIx>,
    edges: Vec<ShareEdge>,
    // sorted, deduplicated
    item_users: Vec<Vec<UserIx>>,
    user_items: Vec<Vec<ItemIx>>,
}

impl ShareGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the item if its id is new; an existing item keeps its metadata.
    pub fn add_item(&mut self, item: NewsItem) -> Result<ItemIx> {
        if let Some(&ix) = self.item_ids.get(&item.item_id) {
            return Ok(ix);
        }
        if item.canonical_url.trim().is_empty() {
            return Err(Error::InvalidUrl {
                url: item.canonical_url,
                reason: format!("empty canonical url for item `{}`", item.item_id),
            });
        }
        let ix = ItemIx(self.items.len() as u32);
        self.item_ids.insert(item.item_id.clone(), ix);
        self.items.push(item);
        self.item_users.push(Vec::new());
        Ok(ix)
    }

    pub fn add_user(&mut self, user: UserNode) -> UserIx {
        if let Some(&ix) = self.user_ids.get(&user.user_id) {
            return ix;
        }
        let ix = UserIx(self.users.len() as u32);
        self.user_ids.insert(user.user_id.clone(), ix);
        self.users.push(user);
        self.user_items.push(Vec::new());
        ix
    }

    /// Records a tweet of `item` by `user`, inserting either node if needed.
    pub fn add_share(
        &mut self,
        item: NewsItem,
        user: UserNode,
        timestamp: DateTime<Utc>,
    ) -> Result<()> {
        let i = self.add_item(item)?;
        let u = self.add_user(user);
        self.link(i, u, timestamp);
        Ok(())
    }

    /// Records a tweet between two nodes that already exist.
    pub fn add_share_by_id(
        &mut self,
        item_id: &str,
        user_id: &str,
        timestamp: DateTime<Utc>,
    ) -> Result<()> {
        let i = self.item_ix(item_id)?;
        let u = self.user_ix(user_id)?;
        self.link(i, u, timestamp);
        Ok(())
    }

    pub(crate) fn link(&mut self, item: ItemIx, user: UserIx, timestamp: DateTime<Utc>) {
        self.edges.push(ShareEdge {
            item,
            user,
            timestamp,
        });
        let users = &mut self.item_users[item.index()];
        if let Err(pos) = users.binary_search(&user) {
            users.insert(pos, user);
            let items = &mut self.user_items[user.index()];
            let pos = items.binary_search(&item).unwrap_err();
            items.insert(pos, item);
        }
    }

    pub fn item_ix(&self, item_id: &str) -> Result<ItemIx> {
        self.item_ids
            .get(item_id)
            .copied()
            .ok_or_else(|| Error::not_found("item", item_id))
    }

    pub fn user_ix(&self, user_id: &str) -> Result<UserIx> {
        self.user_ids
            .get(user_id)
            .copied()
            .ok_or_else(|| Error::not_found("user", user_id))
    }

    pub fn item(&self, ix: ItemIx) -> &NewsItem {
        &self.items[ix.index()]
    }

    pub fn user(&self, ix: UserIx) -> &UserNode {
        &self.users[ix.index()]
    }

    pub fn items(&self) -> &[NewsItem] {
        &self.items
    }

    pub fn users(&self) -> &[UserNode] {
        &self.users
    }

    pub fn edges(&self) -> &[ShareEdge] {
        &self.edges
    }

    pub fn item_indices(&self) -> impl ExactSizeIterator<Item = ItemIx> {
        (0..self.items.len() as u32).map(ItemIx)
    }

    pub fn user_indices(&self) -> impl ExactSizeIterator<Item = UserIx> {
        (0..self.users.len() as u32).map(UserIx)
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Number of distinct (item, user) pairs.
    pub fn num_links(&self) -> usize {
        self.item_users.iter().map(Vec::len).sum()
    }

    /// Distinct sharers of an item, sorted by dense index.
    #[inline]
    pub fn sharers(&self, item: ItemIx) -> &[UserIx] {
        &self.item_users[item.index()]
    }

    /// Distinct items shared by a user, sorted by dense index.
    #[inline]
    pub fn shared_items(&self, user: UserIx) -> &[ItemIx] {
        &self.user_items[user.index()]
    }

    /// The set ∂i of users that shared the item.
    pub fn neighborhood_item(&self, item_id: &str) -> Result<BTreeSet<&str>> {
        let ix = self.item_ix(item_id)?;
        Ok(self
            .sharers(ix)
            .iter()
            .map(|&u| self.users[u.index()].user_id.as_str())
            .collect())
    }

    /// The set ∂u of items shared by the user.
    pub fn neighborhood_user(&self, user_id: &str) -> Result<BTreeSet<&str>> {
        let ix = self.user_ix(user_id)?;
        Ok(self
            .shared_items(ix)
            .iter()
            .map(|&i| self.items[i.index()].item_id.as_str())
            .collect())
    }

    pub fn share_count(&self, item_id: &str) -> Result<usize> {
        Ok(self.sharers(self.item_ix(item_id)?).len())
    }

    #[inline]
    pub fn share_count_ix(&self, item: ItemIx) -> usize {
        self.item_users[item.index()].len()
    }

    /// Builds a new graph holding the selected items (in the given order),
    /// the users that survive, and only those edges accepted by `keep_edge`.
    pub fn restrict<F>(&self, items: &[ItemIx], mut keep_edge: F) -> ShareGraph
    where
        F: FnMut(&ShareEdge) -> bool,
    {
        let mut out = ShareGraph::new();
        let mut remap = vec![None; self.items.len()];
        for &ix in items {
            let new_ix = out
                .add_item(self.items[ix.index()].clone())
                .expect("source graph items have non-empty urls");
            remap[ix.index()] = Some(new_ix);
        }
        for e in &self.edges {
            let Some(new_item) = remap[e.item.index()] else {
                continue;
            };
            if !keep_edge(e) {
                continue;
            }
            let u = out.add_user(self.users[e.user.index()].clone());
            out.link(new_item, u, e.timestamp);
        }
        out
    }
}
