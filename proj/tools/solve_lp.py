#!/usr/bin/env python3
"""Solve an LP/MILP file with HiGHS and print the optimal objective.

Usage: solve_lp.py MODEL.lp
Exit status 0 with the objective on stdout, 1 if no optimum was found.
"""
import sys

import highspy


def main(argv):
    if len(argv) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    if h.readModel(argv[1]) != highspy.HighsStatus.kOk:
        print("cannot read " + argv[1], file=sys.stderr)
        return 1
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        print("status: " + h.modelStatusToString(h.getModelStatus()), file=sys.stderr)
        return 1
    print(repr(h.getInfo().objective_function_value))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
