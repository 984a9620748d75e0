"""
Plain-text snapshot file format.

Header line ``# m=<m> T=<T>`` followed by one snapshot per line, each with
m complex entries written as ``re+imj`` tokens separated by whitespace.
"""

import numpy as np

from .errors import ValidationError


def write_snapshots(path, Y):
    """Write an m x T complex snapshot matrix to *path*."""
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim != 2:
        raise ValidationError("snapshot matrix must be 2-D (m x T)")
    m, T = Y.shape
    with open(path, "w") as fh:
        fh.write(f"# m={m} T={T}\n")
        for t in range(T):
            tokens = [
                f"{z.real:.17g}{z.imag:+.17g}j" for z in Y[:, t]
            ]
            fh.write(" ".join(tokens) + "\n")


def read_snapshots(path):
    """Read a snapshot file back into an m x T complex matrix."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValidationError(f"{path}:1: missing '# m=<m> T=<T>' header")
        try:
            fields = dict(tok.split("=") for tok in header[1:].split())
            m, T = int(fields["m"]), int(fields["T"])
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"{path}:1: malformed header: {exc}") from exc
        if T < 1 or m < 1:
            raise ValidationError(f"{path}:1: need m >= 1 and T >= 1")
        Y = np.empty((m, T), dtype=complex)
        for t in range(T):
            line = fh.readline()
            if not line:
                raise ValidationError(f"{path}:{t + 2}: expected {T} snapshot lines")
            tokens = line.split()
            if len(tokens) != m:
                raise ValidationError(
                    f"{path}:{t + 2}: expected {m} entries, got {len(tokens)}"
                )
            for k, tok in enumerate(tokens):
                try:
                    Y[k, t] = complex(tok)
                except ValueError as exc:
                    raise ValidationError(
                        f"{path}:{t + 2}: column {k + 1}: bad complex token {tok!r}"
                    ) from exc
    return Y
