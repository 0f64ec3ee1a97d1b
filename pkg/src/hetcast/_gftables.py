"""Exp/log tables for GF(256) under x^8 + x^4 + x^3 + x^2 + 1 (0x11D), generator 2."""

import numpy as np

PRIMITIVE_POLY = 0x11D


def _build():
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    # doubled so exp[log a + log b] needs no modulo
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


EXP, LOG = _build()


def _mul_table():
    t = np.zeros((256, 256), dtype=np.uint8)
    for a in range(1, 256):
        la = LOG[a]
        for b in range(1, 256):
            t[a, b] = EXP[la + LOG[b]]
    return t


MUL_TABLE = _mul_table()
INV_TABLE = np.zeros(256, dtype=np.uint8)
for _a in range(1, 256):
    INV_TABLE[_a] = EXP[255 - LOG[_a]]
del _a
