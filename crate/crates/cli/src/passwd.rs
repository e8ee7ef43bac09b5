//! Maintenance of the verifier file. Only verifiers are written; the
//! password and `pi` never touch the disk.

use std::fmt;
use std::path::Path;

use mutual_auth::group::DL_2048;
use mutual_auth::pake::{compute_verifier, derive_pi};
use mutual_auth::realm::RealmDescriptor;
use mutual_auth::server::{UserDb, UserDbError, UserRecord};

#[derive(Debug)]
pub enum PasswdError {
    Db(UserDbError),
    Invalid(String),
    NotFound,
}

impl fmt::Display for PasswdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PasswdError::Db(e) => e.fmt(f),
            PasswdError::Invalid(m) => f.write_str(m),
            PasswdError::NotFound => f.write_str("no such record"),
        }
    }
}

impl std::error::Error for PasswdError {}

impl From<UserDbError> for PasswdError {
    fn from(e: UserDbError) -> Self {
        PasswdError::Db(e)
    }
}

/// Which record an operation applies to.
#[derive(Debug, Clone)]
pub struct Entry {
    pub auth_domain: String,
    pub realm: String,
    pub username: String,
    pub algorithm: String,
}

impl Entry {
    pub fn new(auth_domain: &str, realm: &str, username: &str) -> Self {
        Entry {
            auth_domain: auth_domain.to_ascii_lowercase(),
            realm: realm.to_owned(),
            username: username.to_owned(),
            algorithm: DL_2048.to_owned(),
        }
    }

    fn record(&self, password: &str) -> Result<UserRecord, PasswdError> {
        let domain = self
            .auth_domain
            .parse()
            .map_err(|e| PasswdError::Invalid(format!("auth-domain: {e}")))?;
        let realm = RealmDescriptor::new(domain, self.realm.clone(), self.algorithm.clone());
        let group = realm.group().map_err(|e| PasswdError::Invalid(e.to_string()))?;
        let pi = derive_pi(&self.algorithm, &self.auth_domain, &self.realm, &self.username, password)
            .map_err(|e| PasswdError::Invalid(e.to_string()))?;
        Ok(UserRecord {
            username: self.username.clone(),
            realm,
            verifier: compute_verifier(&pi, group),
        })
    }
}

fn load_or_new(path: &Path) -> Result<UserDb, PasswdError> {
    if path.exists() {
        Ok(UserDb::load(path)?)
    } else {
        Ok(UserDb::new())
    }
}

/// Adds a record, creating the file if needed. An existing record is only
/// replaced when `replace` is set.
pub fn add(path: &Path, entry: &Entry, password: &str, replace: bool) -> Result<(), PasswdError> {
    let mut db = load_or_new(path)?;
    db.insert(entry.record(password)?, replace)?;
    db.store(path)?;
    Ok(())
}

pub fn remove(path: &Path, entry: &Entry) -> Result<(), PasswdError> {
    let mut db = UserDb::load(path)?;
    db.remove(&entry.auth_domain, &entry.realm, &entry.username)
        .ok_or(PasswdError::NotFound)?;
    db.store(path)?;
    Ok(())
}

/// Whether `password` matches the stored verifier.
pub fn verify(path: &Path, entry: &Entry, password: &str) -> Result<bool, PasswdError> {
    let db = UserDb::load(path)?;
    let stored = db
        .lookup(&entry.auth_domain, &entry.realm, &entry.username)
        .ok_or(PasswdError::NotFound)?;
    let candidate = Entry {
        algorithm: stored.realm.algorithm_id.clone(),
        ..entry.clone()
    }
    .record(password)?;
    Ok(candidate.verifier == stored.verifier)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(user: &str) -> Entry {
        Entry {
            algorithm: "toy-dl-23".into(),
            ..Entry::new("www.example.com", "Protected Contents", user)
        }
    }

    #[test]
    fn add_verify_remove() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("users.db");
        add(&path, &toy("foobar"), "pw", false).unwrap();
        assert!(verify(&path, &toy("foobar"), "pw").unwrap());
        assert!(!verify(&path, &toy("foobar"), "px").unwrap() || toy_collides("pw", "px"));
        assert!(matches!(add(&path, &toy("foobar"), "pw", false), Err(PasswdError::Db(UserDbError::AlreadyExists(_)))));
        add(&path, &toy("foobar"), "other", true).unwrap();
        remove(&path, &toy("foobar")).unwrap();
        assert!(matches!(remove(&path, &toy("foobar")), Err(PasswdError::NotFound)));
    }

    // With r = 11 two passwords can land on the same pi.
    fn toy_collides(a: &str, b: &str) -> bool {
        let e = toy("foobar");
        e.record(a).unwrap().verifier == e.record(b).unwrap().verifier
    }

    #[test]
    fn empty_password_refused() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(add(&dir.path().join("u"), &toy("x"), "", false), Err(PasswdError::Invalid(_))));
    }
}
