"""Input-state-pair checks for the built-in couplings at several grid sizes."""

import argparse

from structcons.isp import builtin_candidates, check_isp


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grids", type=int, nargs="+", default=[16, 32, 64, 128])
    args = parser.parse_args()
    print(f"{'candidate':<10} {'grid_n':>6}  p1 p2 p3 p4  witness")
    for cand in builtin_candidates():
        for n in args.grids:
            rep = check_isp(cand, grid_n=n)
            marks = "  ".join("ok" if rep.properties[k].passed else "--" for k in (1, 2, 3, 4))
            witness = next((rep.properties[k].witness for k in (1, 2, 3, 4) if not rep.properties[k].passed), "")
            print(f"{cand.name:<10} {n:>6}  {marks}  {witness}")


if __name__ == "__main__":
    main()
