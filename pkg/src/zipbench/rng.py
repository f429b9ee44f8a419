"""SplitMix64: a small, portable, seedable 64-bit generator.

The output sequence for a given seed is fixed by the reference algorithm
(Steele, Lea, Flood 2014), so generated fixtures are byte-identical on every
platform.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TWO_NEG_53 = 1.0 / (1 << 53)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = z = (self.state + GOLDEN_GAMMA) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_i64(self) -> int:
        """Uniform over the full signed 64-bit range."""
        x = self.next_u64()
        return x - (1 << 64) if x >> 63 else x

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound), by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        bits = (bound - 1).bit_length()
        while True:
            x = self.next_u64() >> (64 - bits) if bits else 0
            if x < bound:
                return x

    def __iter__(self):
        return self

    def __next__(self) -> int:
        return self.next_i64()
