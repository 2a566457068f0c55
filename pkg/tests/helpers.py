import numpy as np


def step_edge(size=64, low=50, high=200):
    yy, xx = np.mgrid[0:size, 0:size]
    return np.where(xx * 0.7 + yy * 0.4 > size * 0.47, high, low).astype(np.uint8)


def boundary_energy_ratio(plane, block=8):
    """Mean squared neighbour difference across 8x8 block boundaries over the
    mean elsewhere; ~0.8 for the clean step edge, >1 when blocky."""
    p = plane.astype(np.float64)
    dh = np.diff(p, axis=1) ** 2
    dv = np.diff(p, axis=0) ** 2
    bh = np.arange(dh.shape[1]) % block == block - 1
    bv = np.arange(dv.shape[0]) % block == block - 1
    return (dh[:, bh].mean() + dv[bv].mean()) / (dh[:, ~bh].mean() + dv[~bv].mean())
