//! Password verifier database.
//!
//! One record per line, five percent-encoded fields separated by colons:
//!
//! ```text
//! username:authdomain:realm:algorithm:base64(J(pi))
//! ```
//!
//! Lines starting with `#` and blank lines are kept verbatim, so a file
//! written by [`UserDb::to_text`] after [`UserDb::parse`] is byte-identical.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use thiserror::Error;

use crate::pake::Verifier;
use crate::realm::RealmDescriptor;
use crate::wire::{element_from_octets, AuthDomainPattern};

const FIELD: &AsciiSet = &CONTROLS.add(b' ').add(b'%').add(b':').add(b'#');

#[derive(Debug, Error)]
pub enum UserDbError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate record for `{username}` in {auth_domain} / {realm}")]
    Duplicate {
        line: usize,
        username: String,
        auth_domain: String,
        realm: String,
    },
    #[error("record for `{0}` already exists")]
    AlreadyExists(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub username: String,
    pub realm: RealmDescriptor,
    pub verifier: Verifier,
}

impl UserRecord {
    fn key_matches(&self, auth_domain: &str, realm: &str, username: &str) -> bool {
        self.realm.auth_domain.as_str() == auth_domain && self.realm.realm == realm && self.username == username
    }

    fn to_line(&self) -> String {
        let group = self.realm.group().expect("records only hold known algorithms");
        let fields = [
            self.username.as_str(),
            self.realm.auth_domain.as_str(),
            self.realm.realm.as_str(),
            self.realm.algorithm_id.as_str(),
        ];
        let mut line: Vec<String> = fields
            .iter()
            .map(|f| utf8_percent_encode(f, FIELD).to_string())
            .collect();
        line.push(BASE64.encode(group.to_fixed_bytes(self.verifier.as_biguint())));
        line.join(":")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Line {
    Verbatim(String),
    Record(UserRecord),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserDb {
    lines: Vec<Line>,
}

fn parse_record(text: &str, line: usize) -> Result<UserRecord, UserDbError> {
    let bad = |reason: String| UserDbError::Malformed { line, reason };
    let fields: Vec<&str> = text.split(':').collect();
    if fields.len() != 5 {
        return Err(bad(format!("expected 5 fields, found {}", fields.len())));
    }
    let decode = |i: usize, what: &str| {
        percent_decode_str(fields[i])
            .decode_utf8()
            .map(|s| s.into_owned())
            .map_err(|_| bad(format!("{what} is not valid UTF-8")))
    };
    let username = decode(0, "username")?;
    let auth_domain: AuthDomainPattern = decode(1, "auth-domain")?
        .parse()
        .map_err(|e| bad(format!("{e}")))?;
    let realm = RealmDescriptor::new(auth_domain, decode(2, "realm")?, decode(3, "algorithm")?);
    let group = realm.group().map_err(|e| bad(e.to_string()))?;
    let octets = BASE64
        .decode(fields[4])
        .map_err(|_| bad("verifier is not valid base64".into()))?;
    let j_pi = element_from_octets(&octets, group).map_err(|e| bad(format!("verifier: {e}")))?;
    if !group.validate_element(&j_pi, true) {
        return Err(bad("verifier is not a valid group element".into()));
    }
    if username.is_empty() {
        return Err(bad("empty username".into()));
    }
    Ok(UserRecord {
        username,
        realm,
        verifier: Verifier::from_biguint(j_pi),
    })
}

impl UserDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, UserDbError> {
        let mut db = UserDb::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                db.lines.push(Line::Verbatim(raw.to_owned()));
                continue;
            }
            let record = parse_record(raw, line)?;
            if db
                .lookup(record.realm.auth_domain.as_str(), &record.realm.realm, &record.username)
                .is_some()
            {
                return Err(UserDbError::Duplicate {
                    line,
                    username: record.username,
                    auth_domain: record.realm.auth_domain.to_string(),
                    realm: record.realm.realm,
                });
            }
            db.lines.push(Line::Record(record));
        }
        Ok(db)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, UserDbError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            match line {
                Line::Verbatim(s) => out.push_str(s),
                Line::Record(r) => out.push_str(&r.to_line()),
            }
            out.push('\n');
        }
        out
    }

    /// Writes the database through a temporary file and a rename.
    pub fn store(&self, path: impl AsRef<Path>) -> Result<(), UserDbError> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_text())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn records(&self) -> impl Iterator<Item = &UserRecord> {
        self.lines.iter().filter_map(|l| match l {
            Line::Record(r) => Some(r),
            Line::Verbatim(_) => None,
        })
    }

    pub fn len(&self) -> usize {
        self.records().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact lookup on (auth-domain, realm, username).
    pub fn lookup(&self, auth_domain: &str, realm: &str, username: &str) -> Option<&UserRecord> {
        self.records().find(|r| r.key_matches(auth_domain, realm, username))
    }

    /// Adds a record. With `replace`, an existing record for the same key
    /// is overwritten in place.
    pub fn insert(&mut self, record: UserRecord, replace: bool) -> Result<(), UserDbError> {
        let existing = self.lines.iter_mut().find_map(|l| match l {
            Line::Record(r)
                if r.key_matches(record.realm.auth_domain.as_str(), &record.realm.realm, &record.username) =>
            {
                Some(r)
            }
            _ => None,
        });
        match existing {
            Some(_) if !replace => Err(UserDbError::AlreadyExists(record.username)),
            Some(slot) => {
                *slot = record;
                Ok(())
            }
            None => {
                self.lines.push(Line::Record(record));
                Ok(())
            }
        }
    }

    pub fn remove(&mut self, auth_domain: &str, realm: &str, username: &str) -> Option<UserRecord> {
        let idx = self.lines.iter().position(|l| match l {
            Line::Record(r) => r.key_matches(auth_domain, realm, username),
            Line::Verbatim(_) => false,
        })?;
        match self.lines.remove(idx) {
            Line::Record(r) => Some(r),
            Line::Verbatim(_) => None,
        }
    }
}

/// Free-function lookup on the (auth-domain, realm, username) triple.
pub fn lookup<'a>(db: &'a UserDb, auth_domain: &str, realm: &str, username: &str) -> Option<&'a UserRecord> {
    db.lookup(auth_domain, realm, username)
}
