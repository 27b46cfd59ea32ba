"""Decoy-qudit eavesdropping check: how often an intercept-resend
adversary trips the verification measurement, as a function of the
qudit dimension.

Decoys are prepared uniformly over the 2d eigenstates of the Z and X
bases; a wrong-basis resend survives re-measurement with probability
1/d, so detection per checked decoy is (1/2)(1 - 1/d).
"""

import qteleport as qt


def main():
    rounds = 20000
    print(f"{rounds} rounds per cell; detection rate (analytic in parens)\n")
    header = "  d   " + "".join(f"{a:>22}" for a in qt.decoy.EVE_ACTIONS)
    print(header)
    for d in (2, 3, 5, 7):
        cells = []
        for action in qt.decoy.EVE_ACTIONS:
            report, _ = qt.detection_campaign(d, action, rounds, seed=d)
            cells.append(f"{report.rate:.4f} ({report.expected_rate:.4f})")
        print(f"  {d}   " + "".join(f"{c:>22}" for c in cells))

    print("\nlarger d corners the adversary: a wrong-basis resend is")
    print("caught with probability 1 - 1/d, approaching certainty.")


if __name__ == "__main__":
    main()
