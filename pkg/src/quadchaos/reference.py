"""Two fixed 3x3 test matrices: one positive semidefinite, one indefinite."""

from .spectral import symmetrize

PSD_EXAMPLE = (
    (3.2504, -2.0401, 1.9337),
    (-2.0401, 2.0554, 0.3603),
    (1.9337, 0.3603, 4.5310),
)

INDEFINITE_EXAMPLE = (
    (-0.5352, 0.1436, -0.2132),
    (0.1436, -2.1746, -0.3521),
    (-0.2132, -0.3521, -0.0571),
)

BUILTIN = {"psd-example": PSD_EXAMPLE, "indefinite-example": INDEFINITE_EXAMPLE}


def psd_example():
    return symmetrize(PSD_EXAMPLE)


def indefinite_example():
    return symmetrize(INDEFINITE_EXAMPLE)
