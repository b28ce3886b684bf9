import math

import numpy as np
import numpy.testing as npt
import pytest

from radialfov import (
    Circle,
    GriddingConfig,
    OutOfBand,
    SampledKSpace,
    compute_psf,
    design_2d,
    direct_dft,
    grid_reconstruct,
    load_grid,
    save_grid,
)


def _samples(coords, dcf=None):
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    m = coords.shape[0]
    return SampledKSpace(
        coords=coords,
        dcf=np.ones(m) if dcf is None else np.asarray(dcf, dtype=float),
        projection=np.zeros(m, dtype=int),
        dkr=0.01,
        projection_kind="full",
        n_projections=1,
        radial_positions=np.zeros(1),
    )


def test_single_dc_sample_gives_flat_image():
    vol = grid_reconstruct(_samples([[0.0, 0.0]]), 32)
    npt.assert_allclose(vol.values.real, 1.0, atol=1e-3)
    npt.assert_allclose(vol.values.imag, 0.0, atol=1e-9)


def test_conjugate_pair_gives_cosine():
    k0 = 0.125
    vol = grid_reconstruct(_samples([[k0, 0.0], [-k0, 0.0]]), 32)
    x = vol.axis(0)
    row = vol.values.real[vol.dims[1] // 2, :]
    npt.assert_allclose(row, 2.0 * np.cos(2.0 * math.pi * k0 * x), atol=1e-3)


def test_gridding_matches_direct_dft_2d():
    rng = np.random.default_rng(0)
    coords = rng.uniform(-0.5, 0.5, size=(200, 2))
    dcf = rng.uniform(0.5, 1.5, size=200)
    data = rng.normal(size=200) + 1j * rng.normal(size=200)
    s = _samples(coords, dcf)
    fast = grid_reconstruct(s, 32, data=data)
    oracle = direct_dft(s, 32, data=data)
    peak = np.abs(oracle.values).max()
    assert np.abs(fast.values - oracle.values).max() / peak < 1e-3


def test_gridding_matches_direct_dft_3d():
    rng = np.random.default_rng(1)
    coords = rng.uniform(-0.5, 0.5, size=(500, 3))
    data = rng.normal(size=500) + 1j * rng.normal(size=500)
    s = _samples(coords)
    fast = grid_reconstruct(s, 16, data=data)
    oracle = direct_dft(s, 16, data=data)
    peak = np.abs(oracle.values).max()
    assert np.abs(fast.values - oracle.values).max() / peak < 1e-3


def test_linearity():
    rng = np.random.default_rng(2)
    coords = rng.uniform(-0.5, 0.5, size=(50, 2))
    d1 = rng.normal(size=50) + 1j * rng.normal(size=50)
    d2 = rng.normal(size=50) + 1j * rng.normal(size=50)
    s = _samples(coords)
    a, b = 1.7, -0.4 + 0.2j
    combined = grid_reconstruct(s, 24, data=a * d1 + b * d2)
    separate = a * grid_reconstruct(s, 24, data=d1).values + b * grid_reconstruct(s, 24, data=d2).values
    npt.assert_allclose(combined.values, separate, rtol=1e-9, atol=1e-12)


def test_shift_theorem():
    rng = np.random.default_rng(3)
    coords = rng.uniform(-0.4, 0.4, size=(120, 2))
    data = rng.normal(size=120) + 1j * rng.normal(size=120)
    s = _samples(coords)
    shift = np.array([3.0, -2.0])
    phase = np.exp(-2.0j * math.pi * coords @ shift)
    base = grid_reconstruct(s, 48, data=data)
    moved = grid_reconstruct(s, 48, data=data * phase)
    # modulating by exp(-2i pi k.x0) translates the image by +x0
    rolled = np.roll(np.roll(base.values, int(shift[1]), axis=0), int(shift[0]), axis=1)
    interior = (slice(6, -6), slice(6, -6))
    peak = np.abs(base.values).max()
    assert np.abs(moved.values[interior] - rolled[interior]).max() / peak < 2e-3


def test_psf_magnitude_is_centrally_symmetric():
    p = design_2d(Circle(60.0), Circle(0.5))
    psf = compute_psf(p, Circle(60.0))
    mag = np.abs(psf.values)
    flipped = mag[::-1, ::-1]
    # align centers for even dims: index N//2 maps to N - N//2
    rolled = np.roll(np.roll(flipped, 1, axis=0), 1, axis=1)
    npt.assert_allclose(mag, rolled, atol=1e-6 * mag.max())


def test_out_of_band_rejected():
    with pytest.raises(OutOfBand):
        grid_reconstruct(_samples([[0.6, 0.0]]), 16)


def test_config_validation():
    with pytest.raises(ValueError):
        GriddingConfig(oversampling=1.1)
    with pytest.raises(ValueError):
        GriddingConfig(kernel_width=1)
    assert GriddingConfig().beta == pytest.approx(
        math.pi * math.sqrt(6**2 / 1.5**2 * (1.5 - 0.5) ** 2 - 0.8)
    )


def test_serial_rerun_is_bit_identical():
    rng = np.random.default_rng(4)
    coords = rng.uniform(-0.5, 0.5, size=(100, 2))
    s = _samples(coords)
    a = grid_reconstruct(s, 24)
    b = grid_reconstruct(s, 24)
    assert np.array_equal(a.values, b.values)


def test_grid_export_roundtrip(tmp_path):
    p = design_2d(Circle(40.0), Circle(0.5))
    psf = compute_psf(p, Circle(40.0))
    path = tmp_path / "vol.bin"
    sidecar = save_grid(psf, path)
    assert sidecar["dims"] == list(psf.dims)
    assert sidecar["endianness"] == "little"
    assert not sidecar["complex"]
    raw = np.fromfile(path, dtype="<f4")
    assert raw.size == psf.values.size
    back = load_grid(path)
    assert back.dims == psf.dims
    npt.assert_allclose(back.values.real, psf.values.real.astype(np.float32), rtol=1e-6)

    cpath = tmp_path / "cvol.bin"
    save_grid(psf, cpath, as_complex=True)
    cback = load_grid(cpath)
    npt.assert_allclose(
        cback.values, psf.values.astype(np.complex64), rtol=1e-6, atol=1e-9
    )


def test_default_psf_frame_contains_first_ridges():
    fov = Circle(100.0)
    p = design_2d(fov, Circle(0.5))
    psf = compute_psf(p, fov)
    assert psf.dims[0] >= 2 * fov.max_value()
    assert psf.dims[0] % 2 == 0
