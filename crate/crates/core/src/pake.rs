//! The modified KAM3 password-authenticated key agreement.
//!
//! Client and server share only the relation between a weak secret `pi` and
//! its verifier `J(pi) = g^pi`:
//!
//! ```text
//! client: w_a = g^s_a
//! server: w_b = (J(pi) * w_a^H(1,w_a))^s_b
//! client: z   = w_b^((s_a + H(2,w_a,w_b)) / (s_a*H(1,w_a) + pi) mod r)
//! server: z   = (w_a * g^H(2,w_a,w_b))^s_b
//! ```
//!
//! Both sides then confirm `z` with `o_a = H(4, w_a, w_b, z, nc, v)` and
//! `o_b = H(3, w_a, w_b, z, nc, v)`.
//!
//! Arithmetic is not constant-time.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::PakeError;
use crate::group::{named_group, GroupParams};
use crate::validation::ValidationElement;

/// Length of a confirmation value (`o_a`, `o_b`) in octets.
pub const CONFIRMATION_LEN: usize = 32;

/// A confirmation value `o_a` or `o_b`.
pub type Confirmation = [u8; CONFIRMATION_LEN];

const TAG_H1: u8 = 1;
const TAG_H2: u8 = 2;
const TAG_OB: u8 = 3;
const TAG_OA: u8 = 4;

/// The hashed password secret `pi`, already reduced mod `r`.
#[derive(Clone, PartialEq, Eq)]
pub struct WeakSecret(BigUint);

impl WeakSecret {
    pub fn from_biguint(pi: BigUint) -> Self {
        WeakSecret(pi)
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for WeakSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WeakSecret(..)")
    }
}

/// `J(pi) = g^pi mod q`, the value a server stores instead of a password.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verifier(BigUint);

impl Verifier {
    pub fn from_biguint(j_pi: BigUint) -> Self {
        Verifier(j_pi)
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }
}

/// An ephemeral exponent `s_a` or `s_b`, in `[1, r)`.
#[derive(Clone, PartialEq, Eq)]
pub struct EphemeralScalar(BigUint);

impl EphemeralScalar {
    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for EphemeralScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EphemeralScalar(..)")
    }
}

/// Output of [`Kam3::client_start`].
#[derive(Debug, Clone)]
pub struct ClientStart {
    pub s_a: EphemeralScalar,
    pub w_a: BigUint,
}

/// Output of [`Kam3::server_respond`].
#[derive(Debug, Clone)]
pub struct ServerResponse {
    pub s_b: EphemeralScalar,
    pub w_b: BigUint,
}

/// The hash used for the exponents `H(1, w_a)` and `H(2, w_a, w_b)`.
///
/// Results are reduced mod `r` by the caller, so implementations may return
/// any integer. The default is [`Sha256Exchange`]; tests substitute
/// [`FixedExchangeHash`] to reproduce hand-computed vectors.
pub trait ExchangeHash {
    fn h1(&self, group: &GroupParams, w_a: &BigUint) -> BigUint;
    fn h2(&self, group: &GroupParams, w_a: &BigUint, w_b: &BigUint) -> BigUint;
}

/// SHA-256 over the canonical serialization: one tag octet followed by
/// fixed-width big-endian elements.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sha256Exchange;

impl ExchangeHash for Sha256Exchange {
    fn h1(&self, group: &GroupParams, w_a: &BigUint) -> BigUint {
        HashInput::tagged(TAG_H1).element(group, w_a).finish_int()
    }

    fn h2(&self, group: &GroupParams, w_a: &BigUint, w_b: &BigUint) -> BigUint {
        HashInput::tagged(TAG_H2)
            .element(group, w_a)
            .element(group, w_b)
            .finish_int()
    }
}

/// Returns the same two values for every input.
#[derive(Debug, Clone)]
pub struct FixedExchangeHash {
    pub h1: BigUint,
    pub h2: BigUint,
}

impl ExchangeHash for FixedExchangeHash {
    fn h1(&self, _: &GroupParams, _: &BigUint) -> BigUint {
        self.h1.clone()
    }

    fn h2(&self, _: &GroupParams, _: &BigUint, _: &BigUint) -> BigUint {
        self.h2.clone()
    }
}

/// Canonical hash-input builder.
struct HashInput(Sha256);

impl HashInput {
    fn untagged() -> Self {
        HashInput(Sha256::new())
    }

    fn tagged(tag: u8) -> Self {
        let mut h = Sha256::new();
        h.update([tag]);
        HashInput(h)
    }

    fn element(mut self, group: &GroupParams, x: &BigUint) -> Self {
        self.0.update(group.to_fixed_bytes(x));
        self
    }

    fn octets(mut self, bytes: &[u8]) -> Self {
        self.0.update((bytes.len() as u32).to_be_bytes());
        self.0.update(bytes);
        self
    }

    fn counter(mut self, nc: u32) -> Self {
        self.0.update(nc.to_be_bytes());
        self
    }

    fn finish(self) -> Confirmation {
        self.0.finalize().into()
    }

    fn finish_int(self) -> BigUint {
        BigUint::from_bytes_be(&self.finish())
    }
}

/// `pi = H(algorithm, auth-domain, realm, username, password) mod r`.
pub fn derive_pi(
    algorithm_id: &str,
    auth_domain: &str,
    realm: &str,
    username: &str,
    password: &str,
) -> Result<WeakSecret, PakeError> {
    let group = named_group(algorithm_id)?;
    if password.is_empty() {
        return Err(PakeError::EmptyPassword);
    }
    let digest = HashInput::untagged()
        .octets(algorithm_id.as_bytes())
        .octets(auth_domain.as_bytes())
        .octets(realm.as_bytes())
        .octets(username.as_bytes())
        .octets(password.as_bytes())
        .finish_int();
    Ok(WeakSecret(group.reduce_exponent(&digest)))
}

/// `J(pi) = g^pi mod q`.
pub fn compute_verifier(pi: &WeakSecret, group: &GroupParams) -> Verifier {
    Verifier(group.pow(group.g(), &pi.0))
}

/// `o_a = H(4, w_a, w_b, z, nc, v)`.
pub fn compute_oa(
    group: &GroupParams,
    w_a: &BigUint,
    w_b: &BigUint,
    z: &BigUint,
    nc: u32,
    v: &ValidationElement,
) -> Confirmation {
    confirmation(TAG_OA, group, w_a, w_b, z, nc, v)
}

/// `o_b = H(3, w_a, w_b, z, nc, v)`.
pub fn compute_ob(
    group: &GroupParams,
    w_a: &BigUint,
    w_b: &BigUint,
    z: &BigUint,
    nc: u32,
    v: &ValidationElement,
) -> Confirmation {
    confirmation(TAG_OB, group, w_a, w_b, z, nc, v)
}

fn confirmation(
    tag: u8,
    group: &GroupParams,
    w_a: &BigUint,
    w_b: &BigUint,
    z: &BigUint,
    nc: u32,
    v: &ValidationElement,
) -> Confirmation {
    HashInput::tagged(tag)
        .element(group, w_a)
        .element(group, w_b)
        .element(group, z)
        .counter(nc)
        .octets(v.as_bytes())
        .finish()
}

/// Compares two confirmation values without early exit.
pub fn confirmations_equal(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// Draws a uniform exponent in `[1, r)` by rejection sampling.
pub fn random_scalar<R: RngCore + CryptoRng + ?Sized>(group: &GroupParams, rng: &mut R) -> EphemeralScalar {
    let r = group.r();
    let bits = r.bits();
    let mut buf = vec![0u8; bits.div_ceil(8) as usize];
    let excess = buf.len() as u64 * 8 - bits;
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xff >> excess;
        let s = BigUint::from_bytes_be(&buf);
        if !s.is_zero() && &s < r {
            return EphemeralScalar(s);
        }
    }
}

/// Key agreement over one group with an injectable exponent hash.
#[derive(Debug, Clone)]
pub struct Kam3<'g, H = Sha256Exchange> {
    group: &'g GroupParams,
    hash: H,
}

impl<'g> Kam3<'g, Sha256Exchange> {
    pub fn new(group: &'g GroupParams) -> Self {
        Kam3 {
            group,
            hash: Sha256Exchange,
        }
    }
}

impl<'g, H: ExchangeHash> Kam3<'g, H> {
    pub fn with_hash(group: &'g GroupParams, hash: H) -> Self {
        Kam3 { group, hash }
    }

    pub fn group(&self) -> &'g GroupParams {
        self.group
    }

    fn scalar(&self, s: BigUint) -> Result<EphemeralScalar, PakeError> {
        if s.is_zero() || &s >= self.group.r() {
            return Err(PakeError::DegenerateExchange);
        }
        Ok(EphemeralScalar(s))
    }

    fn check_element(&self, x: &BigUint) -> Result<(), PakeError> {
        if self.group.validate_element(x, true) {
            Ok(())
        } else {
            Err(PakeError::InvalidElement)
        }
    }

    fn h1(&self, w_a: &BigUint) -> BigUint {
        self.group.reduce_exponent(&self.hash.h1(self.group, w_a))
    }

    fn h2(&self, w_a: &BigUint, w_b: &BigUint) -> BigUint {
        self.group.reduce_exponent(&self.hash.h2(self.group, w_a, w_b))
    }

    /// Draws `s_a` and computes `w_a = g^s_a mod q`.
    pub fn client_start<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> ClientStart {
        let s_a = random_scalar(self.group, rng);
        let w_a = self.group.pow(self.group.g(), &s_a.0);
        ClientStart { s_a, w_a }
    }

    /// [`client_start`](Self::client_start) with a caller-chosen `s_a`.
    pub fn client_start_with(&self, s_a: BigUint) -> Result<ClientStart, PakeError> {
        let s_a = self.scalar(s_a)?;
        let w_a = self.group.pow(self.group.g(), &s_a.0);
        Ok(ClientStart { s_a, w_a })
    }

    /// Draws `s_b` and computes `w_b = (J(pi) * w_a^H(1,w_a))^s_b mod q`.
    pub fn server_respond<R: RngCore + CryptoRng + ?Sized>(
        &self,
        verifier: &Verifier,
        w_a: &BigUint,
        rng: &mut R,
    ) -> Result<ServerResponse, PakeError> {
        let s_b = random_scalar(self.group, rng);
        self.server_respond_with(verifier, w_a, s_b.0)
    }

    /// [`server_respond`](Self::server_respond) with a caller-chosen `s_b`.
    pub fn server_respond_with(
        &self,
        verifier: &Verifier,
        w_a: &BigUint,
        s_b: BigUint,
    ) -> Result<ServerResponse, PakeError> {
        self.check_element(w_a)?;
        self.check_element(&verifier.0)?;
        let s_b = self.scalar(s_b)?;
        let r = self.group.r();
        // (J * w_a^h1)^s_b = J^s_b * w_a^(h1*s_b)
        let w_a_exp = (self.h1(w_a) * &s_b.0) % r;
        let w_b = self.group.pow2(&verifier.0, &s_b.0, w_a, &w_a_exp);
        if w_b.is_one() {
            return Err(PakeError::DegenerateExchange);
        }
        Ok(ServerResponse { s_b, w_b })
    }

    /// Like [`server_respond_with`](Self::server_respond_with) for a
    /// verifier known only by its exponent: `J = g^decoy`.
    ///
    /// Costs the same single dual-base exponentiation as the real path.
    pub fn server_respond_decoy(
        &self,
        decoy: &BigUint,
        w_a: &BigUint,
        s_b: BigUint,
    ) -> Result<ServerResponse, PakeError> {
        self.check_element(w_a)?;
        let s_b = self.scalar(s_b)?;
        let r = self.group.r();
        let g_exp = (decoy % r * &s_b.0) % r;
        let w_a_exp = (self.h1(w_a) * &s_b.0) % r;
        let w_b = self.group.pow2(self.group.g(), &g_exp, w_a, &w_a_exp);
        if w_b.is_one() {
            return Err(PakeError::DegenerateExchange);
        }
        Ok(ServerResponse { s_b, w_b })
    }

    /// Client-side shared secret
    /// `z = w_b^((s_a + H2) / (s_a*H1 + pi) mod r) mod q`.
    ///
    /// A zero numerator or denominator mod `r` is reported as
    /// [`PakeError::DegenerateExchange`].
    pub fn client_z(
        &self,
        s_a: &EphemeralScalar,
        w_a: &BigUint,
        w_b: &BigUint,
        pi: &WeakSecret,
    ) -> Result<BigUint, PakeError> {
        self.check_element(w_b)?;
        let r = self.group.r();
        let denominator = (&s_a.0 * self.h1(w_a) + &pi.0) % r;
        let numerator = (&s_a.0 + self.h2(w_a, w_b)) % r;
        if denominator.is_zero() || numerator.is_zero() {
            return Err(PakeError::DegenerateExchange);
        }
        let inverse = denominator
            .modinv(r)
            .ok_or(PakeError::DegenerateExchange)?;
        let exponent = (numerator * inverse) % r;
        Ok(self.group.pow(w_b, &exponent))
    }

    /// Server-side shared secret `z = (w_a * g^H2)^s_b mod q`.
    pub fn server_z(
        &self,
        w_a: &BigUint,
        s_b: &EphemeralScalar,
        w_b: &BigUint,
    ) -> Result<BigUint, PakeError> {
        self.check_element(w_a)?;
        let r = self.group.r();
        let g_exp = (self.h2(w_a, w_b) * &s_b.0) % r;
        let z = self.group.pow2(w_a, &s_b.0, self.group.g(), &g_exp);
        if z.is_one() {
            return Err(PakeError::DegenerateExchange);
        }
        Ok(z)
    }
}
