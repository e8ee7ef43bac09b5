#!/usr/bin/env python3
"""Independent reference for the hash serialization and toy-group arithmetic.

Prints the values frozen into the Rust test suite. Run with python3.
"""
import hashlib
import sympy

MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


def lp(b: bytes) -> bytes:
    return len(b).to_bytes(4, "big") + b


def fixed(x: int, width: int) -> bytes:
    return x.to_bytes(width, "big")


def pi(alg, dom, realm, user, pw, r):
    data = b"".join(lp(s.encode()) for s in (alg, dom, realm, user, pw))
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % r


def h_exp(tag, elems, width, r):
    data = bytes([tag]) + b"".join(fixed(e, width) for e in elems)
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % r


def h_confirm(tag, wa, wb, z, nc, v: bytes, width):
    data = bytes([tag]) + fixed(wa, width) + fixed(wb, width) + fixed(z, width)
    data += nc.to_bytes(4, "big") + lp(v)
    return hashlib.sha256(data).hexdigest()


q = MODP_2048
r = (q - 1) // 2
print("modp2048 bits", q.bit_length(), "q prime", sympy.isprime(q), "r prime", sympy.isprime(r))
print("4^r mod q == 1:", pow(4, r, q) == 1)
p = pi("iso11770-4-dl-2048", "www.example.com", "Protected Contents", "foobar", "secret", r)
print("pi(example) =", hex(p))

# toy group
tq, tg, tr = 23, 2, 11
print("toy: 23 prime", sympy.isprime(23), "11 prime", sympy.isprime(11), "2^11 mod 23 =", pow(2, 11, 23))
print("toy J(5) =", pow(2, 5, 23))
print("toy H1(8) =", h_exp(1, [8], 1, tr), "H2(8,8) =", h_exp(2, [8, 8], 1, tr))
print("toy oa(8,8,9,0,'http://www.example.com:80') =",
      h_confirm(4, 8, 8, 9, 0, b"http://www.example.com:80", 1))
print("toy ob(8,8,9,0,'http://www.example.com:80') =",
      h_confirm(3, 8, 8, 9, 0, b"http://www.example.com:80", 1))
# stubbed worked example
wb = pow(9 * pow(8, 4, 23), 6, 23)
e = (3 + 7) * pow(3 * 4 + 5, -1, 11) % 11
print("stub: wb =", wb, "client z =", pow(wb, e, 23), "server z =", pow(8 * pow(2, 7, 23), 6, 23))
e6 = (3 + 7) * pow(3 * 4 + 6, -1, 11) % 11
print("stub wrong pi=6: client z =", pow(wb, e6, 23))

# exhaustive toy sweep: pi, s_a, s_b in [1, 10]
outcomes = []
agree = degenerate = wrong_checked = wrong_equal = 0
for p_ in range(1, 11):
    for sa in range(1, 11):
        for sb in range(1, 11):
            wa = pow(2, sa, 23)
            h1 = h_exp(1, [wa], 1, 11)
            wb = pow(pow(2, p_, 23) * pow(wa, h1, 23), sb, 23)
            if wb == 1:
                degenerate += 1
                outcomes.append("d")
                continue
            h2 = h_exp(2, [wa, wb], 1, 11)
            zs = pow(wa * pow(2, h2, 23), sb, 23)

            def zc(pp):
                den = (sa * h1 + pp) % 11
                num = (sa + h2) % 11
                if den == 0 or num == 0:
                    return None
                return pow(wb, num * pow(den, -1, 11) % 11, 23)

            z = zc(p_)
            if zs == 1 or z is None:
                degenerate += 1
                outcomes.append("d")
                continue
            assert z == zs
            agree += 1
            outcomes.append(str(z))
            for pp in range(1, 11):
                if pp == p_:
                    continue
                zw = zc(pp)
                if zw is None:
                    continue
                wrong_checked += 1
                wrong_equal += zw == z
digest = hashlib.sha256(",".join(outcomes).encode()).hexdigest()
print("toy sweep: agree", agree, "degenerate", degenerate,
      "wrong-pi checked", wrong_checked, "wrong-pi equal", wrong_equal)
print("toy sweep outcome digest", digest)
