#!/usr/bin/env python3
"""Line count and linear-scan filter oracle for the catalog fixture."""
import json
import sys


def main(path):
    lines = [l for l in open(path, encoding="utf-8") if l.strip()]
    records = [json.loads(l) for l in lines]
    ids = [r["id"] for r in records]

    def under(prefix, category):
        return category == prefix or category.startswith(prefix + "/")

    in_stock_banks = sorted(r["id"] for r in records
                            if under("electronics/power-banks", r["category"]) and r.get("in_stock", True))
    all_banks = sorted(r["id"] for r in records if under("electronics/power-banks", r["category"]))
    cheap_shoes = sorted(r["id"] for r in records
                         if under("shoes/running", r["category"]) and r["price"] <= 100
                         and r.get("in_stock", True))
    json.dump({
        "lines": len(lines),
        "distinct_ids": len(set(ids)),
        "power_banks_in_stock": in_stock_banks,
        "power_banks_all": all_banks,
        "running_shoes_max_100_in_stock": cheap_shoes,
    }, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
