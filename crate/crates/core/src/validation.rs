//! Host verification element `v`, bound into both confirmation hashes.
//!
//! Both peers compute `v` independently: the server from its own identity,
//! the client from the URL it intended to contact. A relay on another host
//! therefore always ends up with two different values.

use std::fmt;
use std::str::FromStr;

use crate::error::{ValidationError, WireError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidationMethod {
    /// `v` is the scheme-host-port triple.
    Host,
    /// `v` is a digest of the server certificate.
    TlsCert,
    /// `v` is the TLS master secret. Recognized on the wire, never computed.
    TlsKey,
}

impl ValidationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationMethod::Host => "host",
            ValidationMethod::TlsCert => "tls-cert",
            ValidationMethod::TlsKey => "tls-key",
        }
    }
}

impl fmt::Display for ValidationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValidationMethod {
    type Err = WireError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "host" => Ok(ValidationMethod::Host),
            "tls-cert" => Ok(ValidationMethod::TlsCert),
            "tls-key" => Ok(ValidationMethod::TlsKey),
            _ => Err(WireError::invalid("validation", format!("unknown method `{s}`"))),
        }
    }
}

/// The octets of `v` together with the method that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationElement {
    method: ValidationMethod,
    octets: Vec<u8>,
}

impl ValidationElement {
    pub fn new(method: ValidationMethod, octets: Vec<u8>) -> Self {
        ValidationElement { method, octets }
    }

    pub fn method(&self) -> ValidationMethod {
        self.method
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.octets
    }
}

/// Computes `v` for a connection to `scheme://host:port`.
///
/// `Host` yields the UTF-8 string `scheme://host:port` with scheme and host
/// lowercased and the port always explicit. `TlsCert` yields the certificate
/// digest verbatim.
pub fn compute_validation(
    method: ValidationMethod,
    scheme: &str,
    host: &str,
    port: u16,
    tls_cert_digest: Option<&[u8]>,
) -> Result<ValidationElement, ValidationError> {
    match method {
        ValidationMethod::Host => {
            let s = format!(
                "{}://{}:{}",
                scheme.to_ascii_lowercase(),
                host.to_ascii_lowercase(),
                port
            );
            Ok(ValidationElement::new(method, s.into_bytes()))
        }
        ValidationMethod::TlsCert => tls_cert_digest
            .map(|d| ValidationElement::new(method, d.to_vec()))
            .ok_or(ValidationError::MissingCertificateDigest),
        ValidationMethod::TlsKey => Err(ValidationError::Unsupported(method.as_str().to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_validation_strings() {
        let v = compute_validation(ValidationMethod::Host, "http", "www.example.com", 80, None).unwrap();
        assert_eq!(v.as_bytes(), b"http://www.example.com:80");
        let v = compute_validation(ValidationMethod::Host, "https", "www.example.com", 443, None).unwrap();
        assert_eq!(v.as_bytes(), b"https://www.example.com:443");
        let v = compute_validation(ValidationMethod::Host, "HTTP", "WWW.Example.COM", 8080, None).unwrap();
        assert_eq!(v.as_bytes(), b"http://www.example.com:8080");
    }

    #[test]
    fn tls_cert_passes_digest_through() {
        let digest = [0xabu8; 32];
        let v = compute_validation(ValidationMethod::TlsCert, "https", "h", 443, Some(&digest)).unwrap();
        assert_eq!(v.as_bytes(), &digest);
        assert_eq!(v.method(), ValidationMethod::TlsCert);
    }

    #[test]
    fn tls_cert_without_digest() {
        assert_eq!(
            compute_validation(ValidationMethod::TlsCert, "http", "h", 80, None),
            Err(ValidationError::MissingCertificateDigest)
        );
    }

    #[test]
    fn tls_key_is_not_computed() {
        assert!(matches!(
            compute_validation(ValidationMethod::TlsKey, "https", "h", 443, Some(&[1])),
            Err(ValidationError::Unsupported(_))
        ));
    }

    #[test]
    fn method_tokens() {
        for m in [ValidationMethod::Host, ValidationMethod::TlsCert, ValidationMethod::TlsKey] {
            assert_eq!(m.as_str().parse::<ValidationMethod>().unwrap(), m);
        }
        assert!("Host".parse::<ValidationMethod>().is_ok());
        assert!("cookie".parse::<ValidationMethod>().is_err());
    }
}
