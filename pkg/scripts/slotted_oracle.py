"""Enumerate optimal blocking plans for small slotted instances and report
whether the central single-victim block is among them."""

from agelab.slotted import SlottedSpec, brute_force_oracle, central_block_plan, exact_value


def main():
    for variant, n_sub in (("per_user", 1), ("sub_carrier", 2)):
        for scheduler in ("uniform_random", "round_robin", "max_age"):
            for T, N, alpha in ((6, 2, 0.34), (8, 2, 0.25), (8, 3, 0.25), (10, 2, 0.3)):
                spec = SlottedSpec(T=T, N=N, alpha=alpha, variant=variant, n_sub=n_sub,
                                   scheduler=scheduler)
                winners, best = brute_force_oracle(spec)
                central = central_block_plan(spec)
                print(f"{variant:11s} {scheduler:14s} T={T:2d} N={N} B={spec.budget} "
                      f"best={float(best):.5f} maximizers={len(winners):3d} "
                      f"central={'optimal' if central in winners else float(exact_value(spec, central))}")


if __name__ == "__main__":
    main()
