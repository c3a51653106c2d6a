"""xoshiro256** with splitmix64 seeding.

Reference algorithm by Blackman and Vigna.  Seeding: the 64-bit seed is fed
to splitmix64 and its first four outputs become the state.  Stream ``k`` is
the seeded state advanced by ``k`` calls of the standard 2**128 jump, so
streams never overlap in practice.  Branch choice is ``next() % n``.
"""

_MASK = (1 << 64) - 1
_JUMP = (0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C)


def splitmix64(state):
    """One splitmix64 step; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    def __init__(self, seed=0, stream=0):
        sm = int(seed) & _MASK
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s
        for _ in range(int(stream)):
            self.jump()

    @classmethod
    def from_state(cls, state):
        rng = cls.__new__(cls)
        rng.s = [int(v) & _MASK for v in state]
        return rng

    def next(self):
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def jump(self):
        acc = [0, 0, 0, 0]
        for word in _JUMP:
            for b in range(64):
                if (word >> b) & 1:
                    acc = [a ^ v for a, v in zip(acc, self.s)]
                self.next()
        self.s = acc

    def choices(self, n, count):
        """``count`` branch indices in ``range(n)``, drawn as ``next() % n``."""
        # inlined generator loop: this is the chaos-game hot path
        s0, s1, s2, s3 = self.s
        m = _MASK
        out = [0] * count
        for i in range(count):
            r = ((s1 * 5) & m)
            r = (((r << 7) | (r >> 57)) & m) * 9 & m
            out[i] = r % n
            t = (s1 << 17) & m
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & m
        self.s = [s0, s1, s2, s3]
        return out
