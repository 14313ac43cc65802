"""Brute-force reference implementations, written without numpy vector ops."""

import math


def cooccurrence_oracle(token_docs, terms, window):
    """Pair counts by enumerating every ordered position pair of every document."""
    pos = {t: i for i, t in enumerate(terms)}
    d = len(terms)
    counts = [[0] * d for _ in range(d)]
    for tokens in token_docs:
        kept = [t for t in tokens if t in pos]
        for i in range(len(kept)):
            for j in range(len(kept)):
                if i != j and abs(i - j) <= window:
                    counts[pos[kept[i]]][pos[kept[j]]] += 1
    return counts


def sppmi_oracle(counts, shift):
    d = len(counts)
    total = sum(sum(row) for row in counts)
    rows = [sum(counts[i]) for i in range(d)]
    cols = [sum(counts[i][j] for i in range(d)) for j in range(d)]
    out = [[0.0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            if counts[i][j] > 0:
                pmi = math.log(counts[i][j] * total / (rows[i] * cols[j]))
                out[i][j] = max(pmi - math.log(shift), 0.0)
    return out


def frobenius_residual_oracle(X, W, H):
    total = 0.0
    for i in range(len(X)):
        for j in range(len(X[0])):
            approx = sum(W[i][k] * H[k][j] for k in range(len(H)))
            total += (X[i][j] - approx) ** 2
    return total


def matmul_oracle(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]
