"""Reference vectors for the portable noise generator.

Straight transliteration of the published xoshiro256** update and the
splitmix64 seed expansion, in plain Python integers.  The production
generator (whatever vectorization it uses) must reproduce these words
bit for bit, and the derived uniforms/normals to the last ulp.

Algorithm summary (all arithmetic mod 2^64):
  splitmix64:  x += 0x9E3779B97F4A7C15
               z = x; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
               z = (z ^ z>>27) * 0x94D049BB133111EB
               return z ^ z>>31
  state seeding: s[0..3] = four successive splitmix64 outputs
  xoshiro256**: result = rotl64(s1 * 5, 7) * 9
               t = s1 << 17
               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t
               s3 = rotl64(s3, 45)
  uniform (0,1]: u = ((word >> 11) + 1) * 2**-53
  normal pair (Box-Muller, trig form):
               r = sqrt(-2 ln u1); z0 = r cos(2 pi u2); z1 = r sin(2 pi u2)

Run:  python3 tests/oracles/rng_reference.py
"""

import math

M64 = (1 << 64) - 1


def splitmix64_stream(seed):
    x = seed & M64
    while True:
        x = (x + 0x9E3779B97F4A7C15) & M64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        yield z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


def xoshiro_words(seed, count):
    sm = splitmix64_stream(seed)
    s = [next(sm) for _ in range(4)]
    out = []
    for _ in range(count):
        result = (rotl((s[1] * 5) & M64, 7) * 9) & M64
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        out.append(result)
    return out


def uniforms(seed, count):
    return [((w >> 11) + 1) * 2.0 ** -53 for w in xoshiro_words(seed, count)]


def normals(seed, count):
    us = uniforms(seed, 2 * ((count + 1) // 2))
    out = []
    for u1, u2 in zip(us[0::2], us[1::2]):
        r = math.sqrt(-2.0 * math.log(u1))
        out.append(r * math.cos(2.0 * math.pi * u2))
        out.append(r * math.sin(2.0 * math.pi * u2))
    return out[:count]


def main():
    for seed in (42, 123, 2026):
        words = xoshiro_words(seed, 8)
        print(f"seed={seed} words=" + " ".join(f"0x{w:016x}" for w in words))
        print(f"seed={seed} uniforms=" +
              " ".join(f"{u!r}" for u in uniforms(seed, 4)))
        print(f"seed={seed} normals=" +
              " ".join(f"{z!r}" for z in normals(seed, 6)))


if __name__ == "__main__":
    main()
