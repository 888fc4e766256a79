"""Fill in the hidden half of a learned change series by clamped Gibbs sampling.

Trains one class-augmented RBM on a feature that changes every third
interval, hides the newest slots, and prints the completion next to the truth.
"""
import argparse

import numpy as np

from adf.changes import ChangeState, N_STATES, decode, encode_states, pad
from adf.rbm import TrainConfig, default_hidden_units, new_rbm, synthesize_sequence, train
from adf.snapshot import FeatureId

SYMBOL = {ChangeState.UNCHANGED: ".", ChangeState.CHANGED: "C", ChangeState.ADDED: "+",
          ChangeState.REMOVED: "-", ChangeState.NO_DATA: " "}


def show(series):
    return "".join(SYMBOL[s] for s in series.states)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--capacity", type=int, default=12)
    ap.add_argument("--hide", type=int, default=4, help="newest slots to hide")
    ap.add_argument("--epochs", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    history = [ChangeState.CHANGED if t % 3 == 2 else ChangeState.UNCHANGED for t in range(args.capacity)]
    row = np.concatenate([encode_states(pad(history, args.capacity)), [1.0, 0.0]])
    nv = row.size
    model, trace = train(new_rbm(nv, default_hidden_units(nv), args.seed), row[None, :], TrainConfig(epochs=args.epochs))
    print(f"trained {nv} visible units, final reconstruction error {trace[-1]:.2e}")

    width = args.capacity * N_STATES
    hidden_from = width - args.hide * N_STATES
    partial = [None if hidden_from <= i < width else int(b) for i, b in enumerate(row)]
    out = synthesize_sequence(model, partial, 50, np.random.default_rng(args.seed))

    feature = FeatureId("Demo", "row", "prop")
    truth = decode(row[:width], feature)
    try:
        guess = show(decode(out[:width], feature))
    except ValueError:
        guess = "(sample is not a valid one-hot series)"
    print(f"truth     |{show(truth)}|")
    print(f"completed |{guess}|")
    print(f"{'hidden':>9} |{' ' * (args.capacity - args.hide)}{'^' * args.hide}|")


if __name__ == "__main__":
    main()
