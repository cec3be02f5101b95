#!/usr/bin/env python3
"""Independent re-implementation of the hashing embedder, written from the recipe
alone: byte tokens (ASCII letters/digits and bytes >= 0x80), ASCII lowercase,
unigrams then space-joined adjacent bigrams, 64-bit FNV-1a, bucket = h % dim,
negative sign when bit 63 is set, L2 normalisation.

Prints the non-zero buckets of each probe text as JSON.
"""
import json
import math
import sys

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK = (1 << 64) - 1

PROBES = [
    "power bank 10000mAh",
    "Heated Tech Gloves Vertex II Generic heated gloves",
    "Crème brûlée torch, 2-pack!",
    "",
]


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def tokens(text: str):
    raw = text.encode("utf-8")
    words, cur = [], bytearray()
    for b in raw:
        if (48 <= b <= 57) or (65 <= b <= 90) or (97 <= b <= 122) or b >= 0x80:
            cur.append(b + 32 if 65 <= b <= 90 else b)
        elif cur:
            words.append(bytes(cur))
            cur = bytearray()
    if cur:
        words.append(bytes(cur))
    return words + [words[i] + b" " + words[i + 1] for i in range(len(words) - 1)]


def embed(text: str, dim: int = 256):
    vec = [0.0] * dim
    for tok in tokens(text):
        h = fnv1a(tok)
        vec[h % dim] += -1.0 if h >> 63 else 1.0
    norm = math.sqrt(sum(v * v for v in vec))
    return [v / norm for v in vec] if norm > 0 else vec


def main():
    out = []
    for text in PROBES:
        vec = embed(text)
        out.append({
            "text": text,
            "dim": len(vec),
            "tokens": len(tokens(text)),
            "nonzero": {str(i): v for i, v in enumerate(vec) if v != 0.0},
        })
    json.dump(out, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
