#!/usr/bin/env python3
"""Print the interpreter and the versions of the packages IBVC relies on."""

import importlib
import sys

PACKAGES = ("numpy", "scipy", "torch", "networkx", "matplotlib", "PIL", "tqdm", "pytorch_msssim", "pytest")

print(sys.executable)
for name in PACKAGES:
    try:
        module = importlib.import_module(name)
        print(f"{name:16s} {getattr(module, '__version__', 'unknown')}")
    except ImportError:
        print(f"{name:16s} MISSING")

try:
    import torch
    print(f"torch threads: {torch.get_num_threads()}  cuda: {torch.cuda.is_available()}")
except ImportError:
    pass
