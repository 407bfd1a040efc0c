"""Normalize random programs under two random strategies and compare the results."""

import argparse
import logging
import random
from dataclasses import dataclass, fields

from mccarthy.congruence import congruent
from mccarthy.generate import DEFAULT_SIGNATURE, ProgramShape, random_program, random_structure
from mccarthy.reduction import RANDOM, normalize, size
from mccarthy.semantics import denote_all, kleene_equal

log = logging.getLogger("confluence_sweep")


@dataclass(frozen=True)
class Config:
    programs: int = 500
    max_equations: int = 4
    max_depth: int = 4
    max_carrier: int = 4
    seed: int = 0


def run(cfg: Config) -> int:
    rng = random.Random(cfg.seed)
    shape = ProgramShape(max_equations=cfg.max_equations, max_depth=cfg.max_depth)
    split = changed = steps = 0
    for k in range(cfg.programs):
        p = random_program(rng, shape)
        a = normalize(p, RANDOM(rng.randrange(2**32))).final
        b = normalize(p, RANDOM(rng.randrange(2**32))).final
        steps += size(p)
        if congruent(a, b) is None:
            split += 1
            log.error("program %d: normal forms are not congruent\n%s", k, p)
        m = random_structure(rng, DEFAULT_SIGNATURE, max_size=cfg.max_carrier)
        before, after = denote_all(m, p), denote_all(m, a)
        if not all(kleene_equal(before[x], after[x]) for x in before):
            changed += 1
            log.error("program %d: normalization changed the denotation\n%s", k, p)
    print(f"programs {cfg.programs}  reduction steps {steps}  "
          f"non-congruent {split}  denotation changes {changed}")
    return 1 if split or changed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    for f in fields(Config):
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=int, default=f.default)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    return run(Config(**vars(parser.parse_args(argv))))


if __name__ == "__main__":
    raise SystemExit(main())
