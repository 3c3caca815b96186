import numpy as np
import pytest


def read_netpbm(path, magic, channels):
    """Minimal binary netpbm reader (P5 grayscale / P6 color, maxval 255)."""
    with open(path, "rb") as fh:
        data = fh.read()
    assert data[:2] == magic, f"bad magic {data[:2]!r}"
    fields, pos = [], 2
    while len(fields) < 3:
        while data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # exactly one whitespace byte separates maxval from the payload
    width, height, maxval = fields
    assert maxval == 255
    img = np.frombuffer(data[pos:], dtype=np.uint8)
    assert img.size == width * height * channels
    return img.reshape((height, width) if channels == 1 else (height, width, channels))


def read_pgm(path):
    return read_netpbm(path, b"P5", 1)


def read_ppm(path):
    return read_netpbm(path, b"P6", 3)


def chebyshev_to_nearest(cell, targets):
    """Chebyshev distance in cell units from `cell` to the nearest target cell."""
    r, c = cell
    return min(max(abs(r - tr), abs(c - tc)) for tr, tc in targets)


@pytest.fixture(scope="session")
def uniform_32_13():
    import dpp_ipa as d

    return d.fourier_orbitals(d.build_grid(32, "periodic"), 13)


@pytest.fixture(scope="session")
def corner_32_16():
    import dpp_ipa as d

    grid = d.build_grid(32, "dirichlet")
    op = d.assemble_operator(grid, d.PotentialSpec("corner_well", 512.0))
    return d.lowest_eigenmodes(op, 16, grid)


@pytest.fixture(scope="session")
def uniform_64_61_model():
    """Full pipeline output on the balanced uniform(64, 61) problem."""
    import dpp_ipa as d

    orbitals = d.fourier_orbitals(d.build_grid(64, "periodic"), 61)
    localized = d.scdm_localize(orbitals)
    rho = d.density(orbitals)
    part = d.balance(localized.V, rho)
    model = d.build_model(part, rho, grid_n=64)
    return orbitals, localized, rho, part, model
