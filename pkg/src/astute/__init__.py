"""Robustness metrics for post hoc explainers over small self-trained MLPs.

Modules:
- linalg: norms, power iteration, weighted least squares, pairwise distances
- datasets: XOR generator, Iris CSV loader, MNIST-style IDX loader, pair sets
- nn: MLPs with manual backprop, input gradients, PSNR, Lipschitz upper bound
- explainers: integrated gradients, SmoothGrad, LIME, KernelSHAP
- robustness: probabilistic Lipschitzness, astuteness curves + normalised AUC,
  LLE/AS, theoretical explainer astuteness bounds and their verification
- stablerank: stable rank, distance matrices, Lipschitz lower bound
- harness: TOML-configured experiment commands behind the ``astute`` CLI
"""

__version__ = "0.1.0"
