"""Miniature replication-based benchmark (bias / SD / RMSE on a fixed grid).

Same machinery as `emlreg bench` but desk-sized: a handful of
replications, a small network, and a short epoch budget.
"""

from emlreg.cli import BENCH_DEFAULTS, run_bench

cfg = dict(
    BENCH_DEFAULTS,
    p=5,
    d=100,
    n=128,
    error="mixture",
    n_grid=256,
    replications=4,
    epochs=200,
    hidden_widths=[32, 32],
    losses=["LS", "LAD", "EML"],
    seed=42,
)

rows = run_bench(cfg, ".")
print(f"{'loss':<8}{'bias':>10}{'sd':>10}{'rmse':>10}")
for r in rows:
    print(f"{r['loss']:<8}{r['bias']:>10.4f}{r['sd']:>10.4f}{r['rmse']:>10.4f}")
