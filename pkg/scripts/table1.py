"""ESS benchmark of the four simplex samplers on the volleyball posterior.

Prints ESS% and ESS/s (after burn-in) for each sampler and alpha.
"""

from _common import parser, run


def main():
    p = parser("table1", __doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=None)
    args = p.parse_args()
    extra = {"params.alphas": args.alphas} if args.alphas else {}
    cfg, summary = run(args, **extra)
    grid = summary["grid"]
    alphas = list(next(iter(grid.values())))
    print(f"{'sampler':<14}" + "".join(f"{'a=' + a:>20}" for a in alphas))
    for kind, row in grid.items():
        cells = []
        for a in alphas:
            c = row[a]
            eps = "-" if c["ess_per_second"] is None else f"{c['ess_per_second']:.1f}/s"
            cells.append(f"{c['ess_percent']:8.3f}% {eps:>10}")
        print(f"{kind:<14}" + "".join(f"{c:>20}" for c in cells))
    print(f"n_samples={cfg.n_samples}, burn-in={cfg.resolved_burn_in}, summary in {cfg.output}")


if __name__ == "__main__":
    main()
