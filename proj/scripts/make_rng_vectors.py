#!/usr/bin/env python3
"""Regenerates data/rng_vectors.csv, the known-answer file for the slot generator.

Evaluates the counter-mix formula directly in Python integers so the shipped
vectors are independent of the C++ implementation:

    z = (seed + (slot + 1) * 0x9E3779B97F4A7C15) mod 2^64
    z ^= z >> 30;  z = z * 0xBF58476D1CE4E5B9 mod 2^64
    z ^= z >> 27;  z = z * 0x94D049BB133111EB mod 2^64
    z ^= z >> 31
"""

import os

MASK = (1 << 64) - 1


def rng_word(seed: int, slot: int) -> int:
    z = (seed + (slot + 1) * 0x9E3779B97F4A7C15) & MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


SEEDS = [
    0,
    1,
    2,
    42,
    977,
    123456789,
    0x9E3779B97F4A7C15,
    0xDEADBEEFCAFEBABE,
    1 << 63,
    (1 << 64) - 1,
]

SLOTS = [0, 1, 2, 3, 7, 8, 63, 64, 1000, 1000000]


def main() -> None:
    out = os.path.join(os.path.dirname(__file__), "..", "data", "rng_vectors.csv")
    with open(out, "w", newline="\n") as fh:
        fh.write("seed,slot,word_hex\n")
        for seed in SEEDS:
            for slot in SLOTS:
                fh.write(f"{seed},{slot},{rng_word(seed, slot):016X}\n")
    print(f"wrote {out}: {len(SEEDS) * len(SLOTS)} vectors")
    print(f"rng_word(0,0) = {rng_word(0, 0):016X}")


if __name__ == "__main__":
    main()
