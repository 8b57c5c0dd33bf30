import numpy as np
import pytest

from cafse.imagecore import to_luminance


def natural_images():
    """Bundled 512x512 photographs from scikit-image, as luminance."""
    data = pytest.importorskip("skimage.data")
    astro = data.astronaut().astype(np.float64)
    return {
        "camera": data.camera().astype(np.float64),
        "astronaut": to_luminance(astro[..., 0], astro[..., 1], astro[..., 2]),
        "moon": data.moon().astype(np.float64),
    }


@pytest.fixture(scope="session")
def photos():
    return natural_images()


@pytest.fixture(scope="session")
def camera(photos):
    return photos["camera"]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
