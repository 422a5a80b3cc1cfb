"""Train one network under the EML loss on heavy-tailed synthetic data.

Uses a small network and a short budget so the script finishes in a few
seconds; increase the widths and epoch counts for paper-scale runs.
"""

import numpy as np

from emlreg import (
    EML,
    LS,
    ErrorKind,
    KnnProportion,
    MlpConfig,
    ScenarioConfig,
    TrainConfig,
    forward,
    generate_scenario,
    train,
)

scenario = ScenarioConfig(p=5, d=100, n=256, error=ErrorKind.STUDENT_T2, n_grid=512, master_seed=1)
train_data, grid = generate_scenario(scenario, replication=0)

net = MlpConfig(widths=(100, 32, 32, 1))
cfg = TrainConfig(min_epochs=200, max_epochs=200, seed=7)

for loss in (LS(), EML(KnnProportion(0.3))):
    report = train(train_data, loss, net, cfg)
    preds, _ = forward(report.model, grid.X)
    rmse = float(np.sqrt(np.mean((preds - grid.g_true) ** 2)))
    print(f"{type(loss).__name__}: {report.epochs_run} epochs, "
          f"final training loss {report.loss_history[-1]:.4f}, grid RMSE {rmse:.4f}")

print()
print("At paper scale (width-256 network, 1000+ epochs) the density-based loss")
print("beats least squares under t(2) errors; at this desk scale the gap varies.")
