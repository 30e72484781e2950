#!/usr/bin/env python3
"""Render the circular layout of one handscroll end to end and report
how the width budget was spent per block kind.

Usage:
  python scripts/render_ring.py --data data/demo --id npm:hs-0001 \
      --target 700 --out ring.png
"""

import argparse

from handscroll.config import EngineConfig
from handscroll.service import ApiSession


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--data", required=True)
    parser.add_argument("--id", required=True)
    parser.add_argument("--target", type=int, default=900)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    session = ApiSession(args.data, EngineConfig())
    plan, layout = session.layout(args.id, args.target)

    by_kind: dict[str, list[int]] = {}
    for block in plan.blocks:
        by_kind.setdefault(block.kind, []).append(block)
    print(f"target {plan.target_length}px over {len(plan.blocks)} blocks:")
    for kind, blocks in sorted(by_kind.items()):
        natural = sum(b.natural_width for b in blocks)
        assigned = sum(b.assigned_width for b in blocks)
        print(f"  {kind:>6}: {len(blocks):>3} blocks, natural {natural:>5}px "
              f"-> assigned {assigned:>5}px")

    png = session.render_ring(args.id, args.target)
    out = args.out
    with open(out, "wb") as fh:
        fh.write(png.read_bytes())
    print(f"ring raster -> {out} ({len(layout.arcs)} arcs, "
          f"outer radius {layout.geometry.outer_radius:.1f}px)")


if __name__ == "__main__":
    main()
