"""Check identity verdicts against countermodel enumeration on random structures."""

import argparse
import collections
import logging
import random
from dataclasses import dataclass, fields

from mccarthy.generate import IDENTITY_SIGNATURE, random_identity, random_structure
from mccarthy.identities import classify_identity, decide_identity
from mccarthy.semantics import find_countermodel
from mccarthy.syntax import individual_vars

log = logging.getLogger("identity_oracle_sweep")


@dataclass(frozen=True)
class Config:
    identities: int = 1000
    structures: int = 10
    max_ind: int = 3
    max_fn: int = 2
    seed: int = 0


def run(cfg: Config) -> int:
    rng = random.Random(cfg.seed)
    by_forms: collections.Counter = collections.Counter()
    disagreements = 0
    for _ in range(cfg.identities):
        identity = random_identity(rng, max_ind=cfg.max_ind, max_fn=cfg.max_fn)
        forms = "-".join(f.name for f in sorted(classify_identity(identity)))
        n_ind = len(set(individual_vars(identity.lhs) + individual_vars(identity.rhs)))
        for _ in range(cfg.structures):
            a = random_structure(rng, IDENTITY_SIGNATURE, size=n_ind + 2, total=rng.random() < 0.5)
            valid = decide_identity(a, None, identity)
            enumerated = find_countermodel(a, identity.lhs, identity.rhs) is None
            by_forms[forms, valid] += 1
            if valid != enumerated:
                disagreements += 1
                log.error("%s: decided %s, enumeration says %s", identity, valid, enumerated)
    for (forms, valid), count in sorted(by_forms.items()):
        print(f"{forms:8} {'valid' if valid else 'invalid':8} {count}")
    print(f"decisions {sum(by_forms.values())}  disagreements {disagreements}")
    return 1 if disagreements else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    for f in fields(Config):
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=int, default=f.default)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    return run(Config(**vars(parser.parse_args(argv))))


if __name__ == "__main__":
    raise SystemExit(main())
