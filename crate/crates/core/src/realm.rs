use crate::error::PakeError;
use crate::group::{named_group, GroupParams};
use crate::wire::AuthDomainPattern;

/// One authentication realm: the auth-domain, a realm label inside it, and
/// the algorithm its verifiers were computed under.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RealmDescriptor {
    pub auth_domain: AuthDomainPattern,
    pub realm: String,
    pub algorithm_id: String,
}

impl RealmDescriptor {
    pub fn new(auth_domain: AuthDomainPattern, realm: impl Into<String>, algorithm_id: impl Into<String>) -> Self {
        RealmDescriptor {
            auth_domain,
            realm: realm.into(),
            algorithm_id: algorithm_id.into(),
        }
    }

    pub fn group(&self) -> Result<&'static GroupParams, PakeError> {
        named_group(&self.algorithm_id)
    }

    /// Whether two descriptors name the same realm (auth-domain compared
    /// case-insensitively).
    pub fn same_realm(&self, other: &RealmDescriptor) -> bool {
        self.auth_domain.same_domain(&other.auth_domain)
            && self.realm == other.realm
            && self.algorithm_id == other.algorithm_id
    }
}
