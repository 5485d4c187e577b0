"""Print the structural profile of the maximal-class example group for several primes.

Shows where the advertised exponent p holds (p >= 7) and where it does not (p = 5).

    python scripts/example_profile.py --primes 5 7
"""

import argparse
import json

from pgcl.constructions import build_huppert_example
from pgcl.subgroups import whole_group
from pgcl.suites import group_profile


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--primes", type=int, nargs="+", default=[5, 7])
    args = ap.parse_args()
    for p in args.primes:
        prof = group_profile(whole_group(build_huppert_example(p)))
        print(f"p = {p}")
        print(json.dumps(prof, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
