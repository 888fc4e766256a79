"""Time loading and diffing a store of paper-scale snapshots.

    python scripts/time_paper_scale.py --snapshots 30
"""
import argparse
import tempfile
import time

from adf.changes import ChangeState, diff
from adf.simhost import SimHost, load_preset
from adf.store import SnapshotStore


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snapshots", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    host = SimHost(load_preset("paper-scale"), seed=args.seed)
    with tempfile.TemporaryDirectory() as tmp:
        store = SnapshotStore(tmp)
        for _ in range(args.snapshots):
            store.write(host.sample(), host.dictionary)

        start = time.perf_counter()
        loaded = store.load_with_schema()
        parsed = time.perf_counter()
        vectors = [diff(a, b, d) for (a, _), (b, d) in zip(loaded, loaded[1:])]
        done = time.perf_counter()

    features = loaded[0][0].feature_count(loaded[0][1])
    changed = sum(s is not ChangeState.UNCHANGED for v in vectors for s in v.states.values())
    print(f"{features} features, {len(loaded)} snapshots")
    print(f"parse {parsed - start:.2f}s  diff {done - parsed:.2f}s  total {done - start:.2f}s")
    print(f"{changed} non-unchanged states over {len(vectors)} intervals")


if __name__ == "__main__":
    main()
