//! Server-side sessions and their nonce windows.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use num_bigint::BigUint;

use crate::realm::RealmDescriptor;
use crate::wire::Sid;

/// Outcome of checking a nonce counter against a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonceVerdict {
    Accept,
    Replay,
    OutOfWindow,
    ExceedsMax,
}

/// Sliding replay window over nonce counters.
///
/// Tracks which of the last `width` counters up to the highest accepted one
/// have been seen. Memory is `ceil(width / 64)` words regardless of how many
/// requests the session has served.
#[derive(Debug, Clone)]
pub struct NonceWindow {
    nc_max: u32,
    width: u32,
    highest: Option<u32>,
    bits: Vec<u64>,
}

impl NonceWindow {
    pub fn new(nc_max: u32, width: u32) -> Self {
        let width = width.max(1);
        NonceWindow {
            nc_max,
            width,
            highest: None,
            bits: vec![0; width.div_ceil(64) as usize],
        }
    }

    pub fn nc_max(&self) -> u32 {
        self.nc_max
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn highest(&self) -> Option<u32> {
        self.highest
    }

    /// Words of bitmap storage held by this window.
    pub fn storage_words(&self) -> usize {
        self.bits.len()
    }

    fn capacity(&self) -> u64 {
        self.bits.len() as u64 * 64
    }

    fn slot(&self, nc: u32) -> (usize, u64) {
        let i = u64::from(nc) % self.capacity();
        ((i / 64) as usize, 1u64 << (i % 64))
    }

    fn is_set(&self, nc: u32) -> bool {
        let (word, mask) = self.slot(nc);
        self.bits[word] & mask != 0
    }

    fn set(&mut self, nc: u32, on: bool) {
        let (word, mask) = self.slot(nc);
        if on {
            self.bits[word] |= mask;
        } else {
            self.bits[word] &= !mask;
        }
    }

    /// Classifies `nc` without recording it.
    pub fn check(&self, nc: u32) -> NonceVerdict {
        if nc > self.nc_max {
            return NonceVerdict::ExceedsMax;
        }
        match self.highest {
            None => NonceVerdict::Accept,
            Some(h) if nc > h => NonceVerdict::Accept,
            Some(h) if h - nc >= self.width => NonceVerdict::OutOfWindow,
            Some(_) if self.is_set(nc) => NonceVerdict::Replay,
            Some(_) => NonceVerdict::Accept,
        }
    }

    /// Classifies `nc` and records it when accepted.
    pub fn check_and_mark(&mut self, nc: u32) -> NonceVerdict {
        let verdict = self.check(nc);
        if verdict != NonceVerdict::Accept {
            return verdict;
        }
        match self.highest {
            Some(h) if nc <= h => {}
            Some(h) if u64::from(nc - h) < self.capacity() => {
                for cleared in h + 1..=nc {
                    self.set(cleared, false);
                }
                self.highest = Some(nc);
            }
            _ => {
                self.bits.iter_mut().for_each(|w| *w = 0);
                self.highest = Some(nc);
            }
        }
        self.set(nc, true);
        NonceVerdict::Accept
    }
}

/// Key-exchange state the server keeps per `sid`.
#[derive(Debug, Clone)]
pub struct ServerSession {
    pub sid: Sid,
    pub username: String,
    pub realm: RealmDescriptor,
    pub w_a: BigUint,
    pub w_b: BigUint,
    pub z: BigUint,
    pub created_at: u64,
    pub last_used: u64,
    pub lifetime_s: u64,
    pub window: NonceWindow,
}

impl ServerSession {
    /// Expiry slides: the lifetime counts from the last accepted request.
    pub fn is_expired(&self, now: u64) -> bool {
        now > self.last_used.saturating_add(self.lifetime_s)
    }
}

/// Applies the replay window of `session` to `nc`.
pub fn nonce_check_and_mark(session: &mut ServerSession, nc: u32) -> NonceVerdict {
    session.window.check_and_mark(nc)
}

struct Entry {
    seq: u64,
    session: Arc<Mutex<ServerSession>>,
}

#[derive(Default)]
struct Inner {
    by_sid: HashMap<Sid, Entry>,
    by_age: BTreeMap<u64, Sid>,
    next_seq: u64,
}

/// Bounded session table. Each session has its own lock, so requests on
/// different sessions only share the brief table lookup.
pub struct SessionStore {
    inner: RwLock<Inner>,
    capacity: usize,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        SessionStore {
            inner: RwLock::new(Inner::default()),
            capacity: capacity.max(1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.read().by_sid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, sid: Sid) -> bool {
        self.read().by_sid.contains_key(&sid)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Inner> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Inserts a session, evicting the oldest ones when full. Returns the
    /// number evicted. An existing session with the same sid is replaced.
    pub fn insert(&self, session: ServerSession) -> usize {
        let mut inner = self.write();
        let sid = session.sid;
        if let Some(old) = inner.by_sid.remove(&sid) {
            inner.by_age.remove(&old.seq);
        }
        let mut evicted = 0;
        while inner.by_sid.len() >= self.capacity {
            let Some((_, oldest)) = inner.by_age.pop_first() else {
                break;
            };
            inner.by_sid.remove(&oldest);
            evicted += 1;
        }
        let seq = inner.next_seq;
        inner.next_seq += 1;
        inner.by_age.insert(seq, sid);
        inner.by_sid.insert(
            sid,
            Entry {
                seq,
                session: Arc::new(Mutex::new(session)),
            },
        );
        evicted
    }

    pub fn get(&self, sid: Sid) -> Option<Arc<Mutex<ServerSession>>> {
        self.read().by_sid.get(&sid).map(|e| Arc::clone(&e.session))
    }

    pub fn remove(&self, sid: Sid) -> bool {
        let mut inner = self.write();
        match inner.by_sid.remove(&sid) {
            Some(entry) => {
                inner.by_age.remove(&entry.seq);
                true
            }
            None => false,
        }
    }

    /// Drops every expired session; returns how many were removed.
    pub fn gc(&self, now: u64) -> usize {
        let mut inner = self.write();
        let expired: Vec<(Sid, u64)> = inner
            .by_sid
            .iter()
            .filter(|(_, e)| lock(&e.session).is_expired(now))
            .map(|(sid, e)| (*sid, e.seq))
            .collect();
        for (sid, seq) in &expired {
            inner.by_sid.remove(sid);
            inner.by_age.remove(seq);
        }
        expired.len()
    }
}

pub(crate) fn lock(session: &Mutex<ServerSession>) -> MutexGuard<'_, ServerSession> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

/// Free-function form of [`SessionStore::gc`].
pub fn gc_sessions(sessions: &SessionStore, now: u64) -> usize {
    sessions.gc(now)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use crate::group::TOY_DL_23;

    /// Plain-set model of the replay window.
    struct SetOracle {
        nc_max: u32,
        width: u32,
        seen: BTreeSet<u32>,
    }

    impl SetOracle {
        fn submit(&mut self, nc: u32) -> NonceVerdict {
            if nc > self.nc_max {
                return NonceVerdict::ExceedsMax;
            }
            if let Some(&highest) = self.seen.iter().next_back() {
                if u64::from(nc) + u64::from(self.width) <= u64::from(highest) {
                    return NonceVerdict::OutOfWindow;
                }
            }
            if !self.seen.insert(nc) {
                return NonceVerdict::Replay;
            }
            NonceVerdict::Accept
        }
    }

    fn session(sid: u64, created: u64, lifetime: u64) -> ServerSession {
        ServerSession {
            sid: Sid(sid),
            username: "u".into(),
            realm: RealmDescriptor::new("h".parse().unwrap(), "r", TOY_DL_23),
            w_a: BigUint::from(2u8),
            w_b: BigUint::from(3u8),
            z: BigUint::from(4u8),
            created_at: created,
            last_used: created,
            lifetime_s: lifetime,
            window: NonceWindow::new(256, 64),
        }
    }

    #[test]
    fn fresh_and_replay() {
        let mut w = NonceWindow::new(256, 64);
        assert_eq!(w.check_and_mark(0), NonceVerdict::Accept);
        assert_eq!(w.check_and_mark(0), NonceVerdict::Replay);
        assert_eq!(w.check_and_mark(1), NonceVerdict::Accept);
    }

    #[test]
    fn below_window() {
        let mut w = NonceWindow::new(256, 64);
        assert_eq!(w.check_and_mark(100), NonceVerdict::Accept);
        assert_eq!(w.check_and_mark(20), NonceVerdict::OutOfWindow);
        assert_eq!(w.check_and_mark(36), NonceVerdict::OutOfWindow);
        assert_eq!(w.check_and_mark(37), NonceVerdict::Accept);
        assert_eq!(w.check_and_mark(37), NonceVerdict::Replay);
    }

    #[test]
    fn ceiling() {
        let mut w = NonceWindow::new(256, 64);
        assert_eq!(w.check_and_mark(256), NonceVerdict::Accept);
        assert_eq!(w.check_and_mark(257), NonceVerdict::ExceedsMax);
        assert_eq!(w.check_and_mark(u32::MAX), NonceVerdict::ExceedsMax);
    }

    #[test]
    fn out_of_order_within_window() {
        let mut w = NonceWindow::new(1000, 64);
        for nc in [5, 3, 9, 4, 70, 8, 7] {
            assert_eq!(w.check_and_mark(nc), NonceVerdict::Accept, "nc = {nc}");
        }
        // window is now [7, 70]
        assert_eq!(w.check_and_mark(6), NonceVerdict::OutOfWindow);
        assert_eq!(w.check_and_mark(9), NonceVerdict::Replay);
        assert_eq!(w.check_and_mark(10), NonceVerdict::Accept);
        assert_eq!(w.check_and_mark(10), NonceVerdict::Replay);
    }

    #[test]
    fn storage_is_bounded_by_width() {
        let mut w = NonceWindow::new(u32::MAX, 64);
        for nc in 0..10_000 {
            w.check_and_mark(nc);
        }
        assert_eq!(w.storage_words(), 1);
        assert_eq!(NonceWindow::new(10, 65).storage_words(), 2);
    }

    proptest! {
        #[test]
        fn window_matches_set_oracle(
            width in 1u32..200,
            nc_max in 0u32..600,
            seq in proptest::collection::vec(0u32..700, 1..300),
        ) {
            let mut window = NonceWindow::new(nc_max, width);
            let mut oracle = SetOracle { nc_max, width, seen: BTreeSet::new() };
            for nc in seq {
                prop_assert_eq!(window.check_and_mark(nc), oracle.submit(nc), "nc = {}", nc);
            }
        }
    }

    #[test]
    fn expiry_boundaries() {
        let s = session(1, 0, 300);
        assert!(!s.is_expired(299));
        assert!(!s.is_expired(300));
        assert!(s.is_expired(301));
    }

    #[test]
    fn gc_evicts_expired() {
        let store = SessionStore::new(10);
        store.insert(session(1, 0, 300));
        store.insert(session(2, 100, 300));
        assert_eq!(gc_sessions(&store, 299), 0);
        assert_eq!(gc_sessions(&store, 301), 1);
        assert!(!store.contains(Sid(1)));
        assert!(store.contains(Sid(2)));
    }

    #[test]
    fn capacity_evicts_oldest() {
        let store = SessionStore::new(2);
        assert_eq!(store.insert(session(1, 0, 300)), 0);
        assert_eq!(store.insert(session(2, 0, 300)), 0);
        assert_eq!(store.insert(session(3, 0, 300)), 1);
        assert!(!store.contains(Sid(1)));
        assert!(store.contains(Sid(2)) && store.contains(Sid(3)));
        assert!(store.remove(Sid(2)));
        assert_eq!(store.insert(session(4, 0, 300)), 0);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn concurrent_marking_never_accepts_twice() {
        let store = Arc::new(SessionStore::new(4));
        store.insert(session(7, 0, 300));
        let accepted: Vec<Vec<u32>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..8)
                .map(|_| {
                    let store = Arc::clone(&store);
                    scope.spawn(move || {
                        let mut mine = Vec::new();
                        for nc in 0..200u32 {
                            let s = store.get(Sid(7)).unwrap();
                            if nonce_check_and_mark(&mut lock(&s), nc) == NonceVerdict::Accept {
                                mine.push(nc);
                            }
                        }
                        mine
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut all: Vec<u32> = accepted.into_iter().flatten().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), total);
    }
}
