"""Full desk-preset sweep: 9 faults x 6 sample sizes x 6 repeats.

    python scripts/run_desk_sweep.py --out results/desk --seed 0
"""
import argparse
import sys
import time

from adf.benchmark import format_table, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/desk")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    start = time.perf_counter()
    done = []

    def progress(rec):
        done.append(rec)
        pos = "-" if rec.fault_position is None else rec.fault_position
        print(f"[{len(done):3d}] {rec.spec.fault_name:24s} n={rec.spec.sample_size:2d} "
              f"rep={rec.spec.repeat_index} pos={pos} leads={rec.lead_count} "
              f"t={time.perf_counter() - start:6.1f}s", file=sys.stderr, flush=True)

    result = run_sweep(base_seed=args.seed, out_dir=args.out, progress=progress)
    print(format_table(result.aggregates))
    print(f"elapsed {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
