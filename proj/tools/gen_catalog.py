#!/usr/bin/env python3
"""Generate the synthetic product catalog used by the tests and benchmarks.

The output is deterministic for a given seed:

    python3 tools/gen_catalog.py --n 500 --seed 42 > tests/fixtures/catalog_500.jsonl
"""
import argparse
import json
import random
import sys

# (category path, nouns, price range, attribute generators)
FAMILIES = [
    ("electronics/power-banks", ["Power Bank", "Portable Charger", "Battery Pack"], (15, 90),
     {"capacity": ["5000mah", "10000mah", "20000mah", "26800mah"], "port": ["usb-c", "usb-a", "usb-c pd"]}),
    ("electronics/cameras/action", ["Action Camera", "360 Camera", "Helmet Cam"], (80, 550),
     {"resolution": ["1080p", "4k", "5.7k"], "waterproof": ["yes", "no"]}),
    ("electronics/phone-cases", ["Phone Case", "Rugged Case", "Mount Ready Case"], (10, 60),
     {"model": ["iphone 15", "pixel 8", "galaxy s24"], "color": ["black", "blue", "clear", "red"]}),
    ("electronics/headphones", ["Wireless Earbuds", "Over-Ear Headphones", "Sport Earphones"], (25, 350),
     {"color": ["black", "white", "blue"], "noise_cancelling": ["yes", "no"]}),
    ("apparel/gloves/heated", ["Heated Gloves", "Heated Tech Gloves", "Heated Liner Gloves"], (60, 260),
     {"size": ["s", "m", "l", "xl"], "battery": ["7.4v", "12v"]}),
    ("apparel/gloves/winter", ["Ski Gloves", "Insulated Mittens", "Touchscreen Gloves"], (15, 120),
     {"size": ["s", "m", "l", "xl"], "color": ["black", "grey", "red"]}),
    ("apparel/jackets", ["Ski Jacket", "Rain Shell", "Down Parka"], (70, 480),
     {"size": ["s", "m", "l", "xl"], "color": ["black", "blue", "green", "orange"]}),
    ("shoes/running", ["Running Shoes", "Trail Running Shoes", "Road Racer"], (45, 220),
     {"size": ["8", "9", "10", "11"], "color": ["blue", "black", "white", "red"]}),
    ("shoes/hiking", ["Hiking Boots", "Approach Shoes", "Waterproof Hikers"], (60, 260),
     {"size": ["8", "9", "10", "11"], "waterproof": ["yes", "no"]}),
    ("sports/ski/goggles", ["Ski Goggles", "Snow Goggles", "Photochromic Goggles"], (30, 240),
     {"lens": ["mirrored", "clear", "photochromic"], "color": ["black", "white"]}),
    ("sports/ski/helmets", ["Ski Helmet", "Snow Helmet", "MIPS Helmet"], (50, 300),
     {"size": ["s", "m", "l"], "color": ["black", "white", "blue"]}),
    ("home/kitchen", ["Coffee Grinder", "French Press", "Kettle"], (15, 180),
     {"color": ["black", "steel", "white"]}),
]

BRANDS = ["Veho", "Anker", "GoPro", "Insta360", "Nike", "Adidas", "Brooks", "Salomon",
          "Merrell", "Smith", "Oakley", "Giro", "Vertex", "Northpeak", "Kestrel", "Lumen",
          "Otter", "Spigen", "Sony", "Bose", "Hario", "Bodum"]

ADJECTIVES = ["Pro", "Lite", "Max", "Trail", "Summit", "Urban", "Alpine", "Core", "Flex", "Edge"]


def make_product(index, rng):
    category, nouns, (low, high), attrs = FAMILIES[index % len(FAMILIES)]
    brand = rng.choice(BRANDS)
    noun = rng.choice(nouns)
    adjective = rng.choice(ADJECTIVES)
    attributes = {name: rng.choice(values) for name, values in attrs.items()}
    price = round(rng.uniform(low, high), 2)
    detail = ", ".join(f"{k.replace('_', ' ')} {v}" for k, v in sorted(attributes.items()))
    return {
        "id": f"p{index:04d}",
        "title": f"{brand} {adjective} {noun}",
        "description": f"{noun} by {brand} with {detail}.",
        "category": category,
        "brand": brand,
        "price": price,
        "currency": "USD",
        "attributes": attributes,
        "in_stock": rng.random() >= 0.1,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=500)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    for i in range(args.n):
        sys.stdout.write(json.dumps(make_product(i, rng), sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
