"""
Fixed 64-bit FNV-1a hash.

Used for feature bucketing and for deriving named RNG sub-streams, so both
are reproducible across platforms and interpreter runs (unlike ``hash()``).

    offset basis 0xcbf29ce484222325, prime 0x100000001b3
    for each byte b of the UTF-8 encoding: h = (h XOR b) * prime mod 2**64
"""

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(text: str | bytes) -> int:
    data = text.encode("utf-8") if isinstance(text, str) else text
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h
