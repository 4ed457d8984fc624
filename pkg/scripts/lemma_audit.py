"""Random-instance audit of the block-diagonalization error bounds."""
import argparse
import json

from paratree import sw


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="lemma_audit.json")
    args = ap.parse_args()
    rep = sw.empirical_lemma_audit(trials=args.trials, seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write(sw.audit_json(rep))
    print(json.dumps({k: v for k, v in rep.items() if k != "violations"}, indent=2))
    print(f"violations: {len(rep['violations'])}")


if __name__ == "__main__":
    main()
