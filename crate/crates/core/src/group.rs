//! Discrete-logarithm groups over safe primes.
//!
//! Every group here is the order-`r` subgroup of quadratic residues modulo a
//! safe prime `q = 2r + 1`. Group elements and exponents are plain
//! [`BigUint`]s; the group knows how to reduce, exponentiate and validate them.

use std::cell::Cell;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::PakeError;

/// Identifier of the 2048-bit group.
pub const DL_2048: &str = "iso11770-4-dl-2048";
/// Identifier of the 23-element toy group used in tests and examples.
pub const TOY_DL_23: &str = "toy-dl-23";

// 2048-bit MODP safe prime (RFC 3526, group 14).
const MODP_2048_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1",
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD",
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245",
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D",
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F",
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D",
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9",
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510",
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
);

thread_local! {
    static MODEXP_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of modular exponentiations performed on the current thread.
///
/// A dual-base exponentiation counts once. Use [`ModexpProbe`] to measure a
/// section of code.
pub fn modexp_count() -> u64 {
    MODEXP_COUNT.with(Cell::get)
}

fn bump_modexp() {
    MODEXP_COUNT.with(|c| c.set(c.get() + 1));
}

/// Records the modexp counter on creation and reports the delta.
#[derive(Debug)]
pub struct ModexpProbe {
    start: u64,
}

impl ModexpProbe {
    pub fn start() -> Self {
        ModexpProbe {
            start: modexp_count(),
        }
    }

    pub fn count(&self) -> u64 {
        modexp_count() - self.start
    }
}

/// Parameters `(q, g, r)` of a safe-prime discrete-log group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    algorithm_id: String,
    q: BigUint,
    g: BigUint,
    r: BigUint,
    element_len: usize,
}

impl GroupParams {
    /// Builds and checks a group: `q` and `r = (q - 1) / 2` must both pass
    /// a Miller-Rabin test and `g` must generate the order-`r` subgroup.
    pub fn new(algorithm_id: impl Into<String>, q: BigUint, g: BigUint) -> Result<Self, PakeError> {
        let algorithm_id = algorithm_id.into();
        let invalid = |why: &str| PakeError::InvalidGroup(format!("{algorithm_id}: {why}"));
        if q < BigUint::from(7u8) || q.is_even() {
            return Err(invalid("modulus must be an odd prime greater than 5"));
        }
        if !is_probable_prime(&q) {
            return Err(invalid("modulus is not prime"));
        }
        let r: BigUint = (&q - 1u8) >> 1;
        if !is_probable_prime(&r) {
            return Err(invalid("(q - 1) / 2 is not prime"));
        }
        if g <= BigUint::one() || g >= &q - 1u8 {
            return Err(invalid("generator out of range"));
        }
        if !g.modpow(&r, &q).is_one() {
            return Err(invalid("generator does not have order r"));
        }
        Ok(Self::assemble(algorithm_id, q, g))
    }

    fn assemble(algorithm_id: String, q: BigUint, g: BigUint) -> Self {
        let r = (&q - 1u8) >> 1;
        let element_len = q.bits().div_ceil(8) as usize;
        GroupParams {
            algorithm_id,
            q,
            g,
            r,
            element_len,
        }
    }

    pub fn algorithm_id(&self) -> &str {
        &self.algorithm_id
    }

    /// The prime modulus.
    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// The generator of the order-`r` subgroup.
    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// The subgroup order, `(q - 1) / 2`.
    pub fn r(&self) -> &BigUint {
        &self.r
    }

    /// Length in octets of a fixed-width encoded element (256 for the
    /// 2048-bit group, 1 for the toy group).
    pub fn element_len(&self) -> usize {
        self.element_len
    }

    /// `base^exp mod q`, counted by the modexp probe.
    pub fn pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        bump_modexp();
        base.modpow(exp, &self.q)
    }

    /// `a^x * b^y mod q` by simultaneous (Shamir) exponentiation.
    ///
    /// Counts as a single exponentiation: one squaring chain is shared by
    /// both bases.
    pub fn pow2(&self, a: &BigUint, x: &BigUint, b: &BigUint, y: &BigUint) -> BigUint {
        bump_modexp();
        let q = &self.q;
        let a = a % q;
        let b = b % q;
        let ab = (&a * &b) % q;
        let bits = x.bits().max(y.bits());
        let mut acc = BigUint::one();
        for i in (0..bits).rev() {
            acc = (&acc * &acc) % q;
            match (x.bit(i), y.bit(i)) {
                (true, true) => acc = (&acc * &ab) % q,
                (true, false) => acc = (&acc * &a) % q,
                (false, true) => acc = (&acc * &b) % q,
                (false, false) => {}
            }
        }
        acc % q
    }

    /// Reduces an integer into the exponent ring `Z_r`.
    pub fn reduce_exponent(&self, x: &BigUint) -> BigUint {
        x % &self.r
    }

    /// `true` iff `x` lies in the order-`r` subgroup. For a safe prime this
    /// is exactly "x is a non-zero quadratic residue", decided here with the
    /// Jacobi symbol instead of computing `x^r`.
    pub fn in_subgroup(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.q && jacobi(x, &self.q) == 1
    }

    /// `true` iff `2 <= x <= q - 2` and, with `full_check`, `x^r mod q = 1`.
    pub fn validate_element(&self, x: &BigUint, full_check: bool) -> bool {
        let two = BigUint::from(2u8);
        if x < &two || x > &(&self.q - 2u8) {
            return false;
        }
        !full_check || self.in_subgroup(x)
    }

    /// Fixed-length big-endian encoding of an integer below `q`.
    ///
    /// Values wider than the element length are truncated to their low
    /// octets; callers reduce first.
    pub fn to_fixed_bytes(&self, x: &BigUint) -> Vec<u8> {
        let raw = x.to_bytes_be();
        let len = self.element_len;
        if raw.len() >= len {
            return raw[raw.len() - len..].to_vec();
        }
        let mut out = vec![0u8; len - raw.len()];
        out.extend_from_slice(&raw);
        out
    }
}

/// Free-function form of [`GroupParams::validate_element`].
pub fn validate_group_element(x: &BigUint, group: &GroupParams, full_check: bool) -> bool {
    group.validate_element(x, full_check)
}

/// Looks up a registered group by its algorithm identifier.
pub fn named_group(algorithm_id: &str) -> Result<&'static GroupParams, PakeError> {
    static DL2048: OnceLock<GroupParams> = OnceLock::new();
    static TOY: OnceLock<GroupParams> = OnceLock::new();
    match algorithm_id {
        DL_2048 => Ok(DL2048.get_or_init(|| {
            let q = BigUint::parse_bytes(MODP_2048_HEX.as_bytes(), 16).expect("valid hex constant");
            GroupParams::assemble(DL_2048.to_owned(), q, BigUint::from(4u8))
        })),
        TOY_DL_23 => Ok(TOY.get_or_init(|| {
            GroupParams::assemble(TOY_DL_23.to_owned(), BigUint::from(23u8), BigUint::from(2u8))
        })),
        other => Err(PakeError::UnknownAlgorithm(other.to_owned())),
    }
}

/// Jacobi symbol `(a/n)` for odd `n`.
fn jacobi(a: &BigUint, n: &BigUint) -> i8 {
    let mut a = a % n;
    let mut n = n.clone();
    let mut result = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let n_mod_8 = low_bits(&n, 8);
            if tz % 2 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if low_bits(&a, 4) == 3 && low_bits(&n, 4) == 3 {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn low_bits(x: &BigUint, modulus: u32) -> u32 {
    x.iter_u32_digits().next().unwrap_or(0) % modulus
}

const MR_BASES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Miller-Rabin with the first sixteen prime bases. Deterministic for
/// `n < 3.3e24`, and a strong probabilistic check beyond that.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for &p in &MR_BASES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for &base in &MR_BASES {
        let mut x = BigUint::from(base).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}
