"""Wall time of both mining stages against database size.

    python3 scripts/scaling.py --sizes 250 500 1000 2000 --out scaling.csv
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import asdict, dataclass, field

from relseq.datagen import GenSpec, generate_db
from relseq.hierminer import refine_all
from relseq.model import load_schema, parse_sequence_db
from relseq.typeminer import MinerConfig, mine_type_patterns


@dataclass
class ScalingConfig:
    sizes: list[int] = field(default_factory=lambda: [250, 500, 1000, 2000])
    seed: int = 17
    support_fraction: float = 0.1
    max_gap: int | None = 3
    max_pattern_events: int = 10
    plant: str = "A(A1) ; B(Any) | r(2,1)=[Resistant]"
    plant_prob: float = 0.2
    repeats: int = 3


def run(cfg: ScalingConfig) -> list[dict]:
    rows = []
    for n in cfg.sizes:
        files = generate_db(GenSpec(seed=cfg.seed, n_sequences=n, planted=[(cfg.plant, cfg.plant_prob)]))
        schema = load_schema(files["schema.txt"], taxonomy_texts=files)
        db = parse_sequence_db(files["data.txt"], schema)
        theta = max(1, round(cfg.support_fraction * n))
        best_type = best_hier = float("inf")
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            ftps = mine_type_patterns(db, MinerConfig(theta, cfg.max_gap, None, cfg.max_pattern_events), schema)
            t1 = time.perf_counter()
            results = refine_all(ftps, db, schema, theta)
            t2 = time.perf_counter()
            best_type = min(best_type, t1 - t0)
            best_hier = min(best_hier, t2 - t1)
        rows.append(
            {
                "sequences": n,
                "events": sum(len(s.events) for s in db),
                "theta": theta,
                "type_patterns": len(ftps),
                "patterns": sum(len(r.refinements) for r in results),
                "type_stage_s": round(best_type, 4),
                "hier_stage_s": round(best_hier, 4),
            }
        )
        print(rows[-1], file=sys.stderr)
    return rows


def main() -> None:
    defaults = ScalingConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=defaults.sizes)
    ap.add_argument("--seed", type=int, default=defaults.seed)
    ap.add_argument("--repeats", type=int, default=defaults.repeats)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    cfg = ScalingConfig(sizes=args.sizes, seed=args.seed, repeats=args.repeats)
    rows = run(cfg)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    print(f"# config: {asdict(cfg)}", file=sys.stderr)


if __name__ == "__main__":
    main()
