#!/usr/bin/env python3
"""Generate the bundled synthetic trajectory fixture (id,x,y rows).

Deterministic: the same seed always produces the same file.
"""
import argparse
import math
import random


def walk(rng, n):
    x, y, h = 0.0, 0.0, rng.uniform(0, math.tau)
    pts = [(x, y)]
    for _ in range(n):
        h += rng.uniform(-0.6, 0.6)
        step = rng.uniform(0.5, 2.0)
        x, y = x + step * math.cos(h), y + step * math.sin(h)
        pts.append((x, y))
    return pts


def zigzag(rng, n):
    width = rng.uniform(2.0, 6.0)
    pitch = rng.uniform(0.1, 0.6)
    return [(i * pitch, width * (i % 2)) for i in range(n + 1)]


def spiral(rng, n):
    turns = rng.uniform(1.5, 4.0)
    growth = rng.uniform(0.2, 1.0)
    pts = []
    for i in range(n + 1):
        t = turns * math.tau * i / n
        r = 1.0 + growth * t
        pts.append((r * math.cos(t), r * math.sin(t)))
    return pts


def flower(rng, n):
    petals = max(2, n // 2)
    r = rng.uniform(1.0, 3.0)
    pts = [(0.0, 0.0)]
    for k in range(petals):
        t = math.pi * k / petals + rng.uniform(-0.05, 0.05)
        pts.append((r * math.cos(t), r * math.sin(t)))
        pts.append((0.0, 0.0) if k % 2 == 0 else (-r * math.cos(t), -r * math.sin(t)))
    return pts


def loop(rng, n):
    laps = rng.randint(1, 4)
    r = rng.uniform(1.0, 4.0)
    pts = []
    for i in range(n + 1):
        t = laps * math.tau * i / n
        rr = r * (1.0 + 0.05 * rng.uniform(-1, 1))
        pts.append((rr * math.cos(t), rr * math.sin(t)))
    return pts


SHAPES = [walk, zigzag, spiral, flower, loop]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20261016)
    ap.add_argument("--curves", type=int, default=50)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    with open(args.out, "w") as f:
        f.write("id,x,y\n")
        for c in range(args.curves):
            shape = SHAPES[c % len(SHAPES)]
            n = rng.randint(4, 40)
            ox, oy = rng.uniform(-100, 100), rng.uniform(-100, 100)
            for x, y in shape(rng, n):
                f.write(f"c{c:02d},{x + ox:.6f},{y + oy:.6f}\n")


if __name__ == "__main__":
    main()
